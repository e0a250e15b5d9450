#include "prefsamp/draws_io.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>

#include "prefsamp/csv.hpp"
#include "prefsamp/error.hpp"

namespace prefsamp {

void write_draws(const std::filesystem::path& dir, const std::string& stem, const PosteriorDraws& d,
                 const GridApprox& grid) {
  std::filesystem::create_directories(dir);
  {
    CsvWriter w(dir / (stem + "_trace.csv"), d.names);
    std::vector<std::string> cells(d.names.size());
    for (Eigen::Index r = 0; r < d.samples.rows(); ++r) {
      for (Eigen::Index c = 0; c < d.samples.cols(); ++c) cells[static_cast<std::size_t>(c)] = format_double(d.samples(r, c));
      w.row(cells);
    }
  }
  for (const auto& [key, m] : d.latent) {
    std::vector<std::string> header{"draw"};
    for (Eigen::Index c = 0; c < m.cols(); ++c) header.push_back("c" + std::to_string(c));
    CsvWriter w(dir / (stem + "_latent_" + key + ".csv"), header);
    std::vector<std::string> cells(header.size());
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      cells[0] = std::to_string(d.latent_index[static_cast<std::size_t>(r)]);
      for (Eigen::Index c = 0; c < m.cols(); ++c) cells[static_cast<std::size_t>(c) + 1] = format_double(m(r, c));
      w.row(cells);
    }
  }
  YAML::Emitter e;
  e.SetDoublePrecision(17);
  e << YAML::BeginMap;
  e << YAML::Key << "family" << YAML::Value << to_string(d.spec.family);
  e << YAML::Key << "scenario" << YAML::Value << to_string(d.spec.scenario);
  e << YAML::Key << "response_mean" << YAML::Value << d.spec.response_mean;
  e << YAML::Key << "fixed" << YAML::Value << YAML::BeginMap;
  for (const auto& [k, v] : d.spec.fixed) e << YAML::Key << k << YAML::Value << v;
  e << YAML::EndMap;
  e << YAML::Key << "lgcp_dim" << YAML::Value << d.lgcp_dim;
  e << YAML::Key << "response_dim" << YAML::Value << d.response_dim;
  e << YAML::Key << "cells" << YAML::Value << d.cells;
  const Region& reg = grid.region();
  e << YAML::Key << "region" << YAML::Value << YAML::Flow << YAML::BeginSeq << reg.xmin() << reg.xmax() << reg.ymin()
    << reg.ymax() << YAML::EndSeq;
  e << YAML::Key << "grid" << YAML::Value << YAML::Flow << YAML::BeginSeq << grid.nx() << grid.ny() << YAML::EndSeq;
  e << YAML::Key << "latent" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (const auto& [key, m] : d.latent) e << key;
  e << YAML::EndSeq;
  e << YAML::EndMap;
  std::ofstream meta(dir / (stem + "_meta.yaml"));
  meta << e.c_str() << "\n";
}

LoadedDraws read_draws(const std::filesystem::path& dir, const std::string& stem) {
  YAML::Node meta;
  try {
    meta = YAML::LoadFile((dir / (stem + "_meta.yaml")).string());
  } catch (const YAML::Exception& e) {
    throw ParseError("cannot read draw metadata for '" + stem + "': " + e.what());
  }
  LoadedDraws out;
  PosteriorDraws& d = out.draws;
  d.spec.family = parse_family(meta["family"].as<std::string>());
  d.spec.scenario = parse_scenario(meta["scenario"].as<std::string>());
  d.spec.response_mean = meta["response_mean"].as<bool>();
  for (const auto& kv : meta["fixed"]) d.spec.fixed[kv.first.as<std::string>()] = kv.second.as<double>();
  d.lgcp_dim = meta["lgcp_dim"].as<std::size_t>();
  d.response_dim = meta["response_dim"].as<std::size_t>();
  d.cells = meta["cells"].as<std::size_t>();
  const auto reg = meta["region"].as<std::vector<double>>();
  const auto g = meta["grid"].as<std::vector<int>>();
  if (reg.size() != 4 || g.size() != 2) throw ParseError("malformed region or grid in draw metadata");
  out.grid = std::make_shared<GridApprox>(Region(reg[0], reg[1], reg[2], reg[3]), g[0], g[1]);

  const CsvTable trace = read_csv(dir / (stem + "_trace.csv"));
  d.names = trace.header;
  if (d.names != parameter_names(d.spec, d.lgcp_dim, d.response_dim))
    throw ParseError("trace columns do not match the model in the metadata");
  d.samples.resize(static_cast<Eigen::Index>(trace.rows.size()), static_cast<Eigen::Index>(d.names.size()));
  for (std::size_t r = 0; r < trace.rows.size(); ++r)
    for (std::size_t c = 0; c < d.names.size(); ++c)
      d.samples(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          parse_double(trace.rows[r][c], false, "trace line " + std::to_string(trace.line[r]));

  bool first = true;
  for (const auto& k : meta["latent"]) {
    const auto key = k.as<std::string>();
    const CsvTable t = read_csv(dir / (stem + "_latent_" + key + ".csv"));
    Eigen::MatrixXd m(static_cast<Eigen::Index>(t.rows.size()), static_cast<Eigen::Index>(t.header.size()) - 1);
    std::vector<long> index;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      const std::string where = key + " line " + std::to_string(t.line[r]);
      index.push_back(static_cast<long>(parse_double(t.rows[r][0], false, where)));
      for (std::size_t c = 1; c < t.header.size(); ++c)
        m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c) - 1) = parse_double(t.rows[r][c], false, where);
    }
    if (first) d.latent_index = index;
    else if (index != d.latent_index) throw ParseError("latent snapshot rows disagree between fields");
    first = false;
    d.latent[key] = std::move(m);
  }
  return out;
}

}  // namespace prefsamp
