#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "prefsamp/grid.hpp"
#include "prefsamp/mcmc.hpp"

namespace prefsamp {

/// Writes <stem>_trace.csv, one <stem>_latent_<field>.csv per latent field
/// (first column is the kept-draw row) and <stem>_meta.yaml.
void write_draws(const std::filesystem::path& dir, const std::string& stem, const PosteriorDraws& draws,
                 const GridApprox& grid);

struct LoadedDraws {
  PosteriorDraws draws;
  std::shared_ptr<const GridApprox> grid;
};

LoadedDraws read_draws(const std::filesystem::path& dir, const std::string& stem);

}  // namespace prefsamp
