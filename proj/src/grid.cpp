#include "prefsamp/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "prefsamp/error.hpp"

namespace prefsamp {

double distance(const Location& a, const Location& b) noexcept {
  return std::hypot(a.x - b.x, a.y - b.y);
}

Region::Region(double xmin, double xmax, double ymin, double ymax)
    : xmin_(xmin), xmax_(xmax), ymin_(ymin), ymax_(ymax) {
  if (!(xmax > xmin) || !(ymax > ymin) || !std::isfinite(area()))
    throw InvalidArgument("region must have positive finite area");
}

bool Region::contains(const Location& s) const noexcept {
  return s.x >= xmin_ && s.x <= xmax_ && s.y >= ymin_ && s.y <= ymax_;
}

GridApprox::GridApprox(const Region& region, int nx, int ny)
    : region_(region), nx_(nx), ny_(ny) {
  if (nx < 1 || ny < 1) throw InvalidArgument("grid resolution must be >= 1");
  dx_ = region.width() / nx;
  dy_ = region.height() / ny;
  cell_area_ = region.area() / (static_cast<double>(nx) * ny);
  centroids_.reserve(static_cast<std::size_t>(nx) * ny);
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix)
      centroids_.push_back({region.xmin() + (ix + 0.5) * dx_, region.ymin() + (iy + 0.5) * dy_});
}

int GridApprox::nearest_axis(double u, double lo, double step, int n) const noexcept {
  int guess = static_cast<int>(std::floor((u - lo) / step));
  guess = std::clamp(guess, 0, n - 1);
  // The floor can land one cell off at exact boundaries; pick the closest
  // neighbour and prefer the lower index on ties.
  int best = guess;
  double best_d = std::abs(u - (lo + (guess + 0.5) * step));
  for (int c : {guess - 1, guess + 1}) {
    if (c < 0 || c >= n) continue;
    double d = std::abs(u - (lo + (c + 0.5) * step));
    if (d < best_d || (d == best_d && c < best)) {
      best = c;
      best_d = d;
    }
  }
  return best;
}

std::size_t GridApprox::nearest_centroid(const Location& s) const {
  if (!region_.contains(s))
    throw InvalidArgument("location (" + std::to_string(s.x) + ", " + std::to_string(s.y) +
                          ") is outside the region");
  int ix = nearest_axis(s.x, region_.xmin(), dx_, nx_);
  int iy = nearest_axis(s.y, region_.ymin(), dy_, ny_);
  return static_cast<std::size_t>(iy) * nx_ + ix;
}

GridApprox build_grid(const Region& region, int resolution) {
  return GridApprox(region, resolution, resolution);
}

std::size_t nearest_centroid(const GridApprox& grid, const Location& s) {
  return grid.nearest_centroid(s);
}

Rescaling rescale_coordinates(std::span<const Location> raw) {
  if (raw.size() < 2) throw InvalidArgument("rescaling needs at least two points");
  double max_d = 0.0;
  for (std::size_t i = 0; i < raw.size(); ++i)
    for (std::size_t j = i + 1; j < raw.size(); ++j) max_d = std::max(max_d, distance(raw[i], raw[j]));
  if (!(max_d > 0.0)) throw InvalidArgument("all points identical: degenerate scale");

  Location origin{raw[0].x, raw[0].y};
  for (const auto& p : raw) {
    origin.x = std::min(origin.x, p.x);
    origin.y = std::min(origin.y, p.y);
  }

  Rescaling out;
  out.scale = max_d;
  out.origin = origin;
  out.points.reserve(raw.size());
  double w = 0.0, h = 0.0;
  for (const auto& p : raw) {
    Location q{(p.x - origin.x) / max_d, (p.y - origin.y) / max_d};
    w = std::max(w, q.x);
    h = std::max(h, q.y);
    out.points.push_back(q);
  }
  // Collinear data has a zero-width bounding box; give that axis unit extent.
  if (w < 1e-12) w = 1.0;
  if (h < 1e-12) h = 1.0;
  out.region = Region(0.0, w, 0.0, h);
  return out;
}

}  // namespace prefsamp
