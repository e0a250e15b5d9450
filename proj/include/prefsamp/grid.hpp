#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace prefsamp {

struct Location {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Location&, const Location&) = default;
};

double distance(const Location& a, const Location& b) noexcept;

/// Axis-aligned rectangular study region.
class Region {
 public:
  Region() = default;  // unit square
  Region(double xmin, double xmax, double ymin, double ymax);

  static Region unit_square() { return Region(); }

  double xmin() const noexcept { return xmin_; }
  double xmax() const noexcept { return xmax_; }
  double ymin() const noexcept { return ymin_; }
  double ymax() const noexcept { return ymax_; }
  double width() const noexcept { return xmax_ - xmin_; }
  double height() const noexcept { return ymax_ - ymin_; }
  double area() const noexcept { return width() * height(); }

  bool contains(const Location& s) const noexcept;

  friend bool operator==(const Region&, const Region&) = default;

 private:
  double xmin_ = 0.0, xmax_ = 1.0, ymin_ = 0.0, ymax_ = 1.0;
};

/// Regular grid of representative points. Centroids are stored row-major
/// with x varying fastest: index = iy * nx + ix.
class GridApprox {
 public:
  GridApprox(const Region& region, int nx, int ny);

  const Region& region() const noexcept { return region_; }
  int nx() const noexcept { return nx_; }
  int ny() const noexcept { return ny_; }
  std::size_t size() const noexcept { return centroids_.size(); }
  double cell_area() const noexcept { return cell_area_; }
  double cell_width() const noexcept { return dx_; }
  double cell_height() const noexcept { return dy_; }
  const std::vector<Location>& centroids() const noexcept { return centroids_; }
  const Location& centroid(std::size_t i) const { return centroids_.at(i); }

  /// Index of the closest centroid; equidistant candidates resolve to the
  /// lowest index. Throws InvalidArgument outside the region.
  std::size_t nearest_centroid(const Location& s) const;

 private:
  int nearest_axis(double u, double lo, double step, int n) const noexcept;

  Region region_;
  int nx_, ny_;
  double dx_, dy_, cell_area_;
  std::vector<Location> centroids_;
};

/// resolution x resolution cells over the region.
GridApprox build_grid(const Region& region, int resolution);

std::size_t nearest_centroid(const GridApprox& grid, const Location& s);

struct Rescaling {
  std::vector<Location> points;
  Region region;
  double scale = 1.0;   // raw distance = scale * rescaled distance
  Location origin;      // raw coordinates of the rescaled (0, 0)

  Location to_raw(const Location& s) const noexcept {
    return {origin.x + scale * s.x, origin.y + scale * s.y};
  }
};

/// Translate to the minimum corner and divide by the maximum pairwise
/// distance, so the rescaled points have diameter exactly 1.
Rescaling rescale_coordinates(std::span<const Location> raw);

}  // namespace prefsamp
