#include "crf/stencil.hpp"

namespace crf {

std::vector<double> Stencil::first(std::span<const double> f, Parity parity) const {
  std::vector<double> out(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = first<double>(f, i, parity);
  return out;
}

std::vector<double> Stencil::second(std::span<const double> f, Parity parity) const {
  std::vector<double> out(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = second<double>(f, i, parity);
  return out;
}

}  // namespace crf
