#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace crf {

enum class Family { AhBall, Closed };

std::string_view to_string(Family family);
Family family_from_string(std::string_view name);

/// Uniform grid in the radial coordinate s.
///
/// For AhBall the node s = 0 is the center of the ball and s_max is the
/// truncated conformal infinity; the boundary defining function is x = e^{-s}.
/// For Closed the grid covers [0, L].
class RadialGrid {
 public:
  RadialGrid(Family family, double extent, std::size_t n_points);

  Family family() const { return family_; }
  std::size_t size() const { return s_.size(); }
  double spacing() const { return ds_; }
  double extent() const { return s_.back(); }
  double operator[](std::size_t i) const { return s_[i]; }
  std::span<const double> values() const { return s_; }

  /// First index with s_i >= value (clamped to the grid).
  std::size_t index_at_or_above(double value) const;

  bool operator==(const RadialGrid& other) const = default;

 private:
  Family family_;
  double ds_;
  std::vector<double> s_;
};

}  // namespace crf
