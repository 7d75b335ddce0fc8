#include "crf/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "crf/errors.hpp"

namespace crf {

std::string_view to_string(Family family) {
  return family == Family::AhBall ? "AH_BALL" : "CLOSED";
}

Family family_from_string(std::string_view name) {
  if (name == "AH_BALL") return Family::AhBall;
  if (name == "CLOSED") return Family::Closed;
  throw InvalidArgument("unknown family '" + std::string(name) + "'");
}

RadialGrid::RadialGrid(Family family, double extent, std::size_t n_points)
    : family_(family), ds_(0.0) {
  if (!(extent > 0.0) || !std::isfinite(extent)) {
    throw InvalidArgument("grid extent must be positive and finite");
  }
  if (n_points < 5) {
    throw InvalidArgument("grid needs at least 5 points");
  }
  ds_ = extent / static_cast<double>(n_points - 1);
  s_.resize(n_points);
  for (std::size_t i = 0; i < n_points; ++i) s_[i] = ds_ * static_cast<double>(i);
  s_.back() = extent;
}

std::size_t RadialGrid::index_at_or_above(double value) const {
  auto it = std::lower_bound(s_.begin(), s_.end(), value);
  if (it == s_.end()) return s_.size() - 1;
  return static_cast<std::size_t>(it - s_.begin());
}

}  // namespace crf
