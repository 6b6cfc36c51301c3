#pragma once

// Entanglement quantities of pure bipartite states from their Schmidt coefficients.

#include <cmath>
#include <cstddef>
#include <vector>

#include "entdist/states.hpp"

namespace entdist {

// Fully entangled fraction (1/d) (sum_i a_i)^2, in [1/d, 1].
inline double fef(const ResourceSpectrum& spec) {
  double s = 0.0;
  for (double a : spec.coeffs()) s += a;
  return s * s / static_cast<double>(spec.dim());
}

// sum_{i<j} a_i a_j. Satisfies fef = (1 + 2 * negativity) / d.
inline double negativity(const ResourceSpectrum& spec) {
  const auto& a = spec.coeffs();
  double total = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = i + 1; j < a.size(); ++j) total += a[i] * a[j];
  }
  return total;
}

// Fully entangled fraction of a pure state across a square bipartition.
inline double fef_pure(const Ket& v, const SubsystemLayout& layout) {
  if (layout.party_a_dim() != layout.party_b_dim()) {
    throw InputError("fef_pure: bipartition must be square (dim A == dim B)");
  }
  if (std::abs(v.norm() - 1.0) > 1e-10) throw InputError("fef_pure: state is not normalized");
  const auto coeffs = schmidt_coefficients(v, layout);
  double s = 0.0;
  for (double a : coeffs) s += a;
  return s * s / static_cast<double>(layout.party_a_dim());
}

}  // namespace entdist
