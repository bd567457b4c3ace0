#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "snum/classify.hpp"
#include "snum/errors.hpp"

namespace snum {

/// Estimate of the Lorentz-type quasi-norm sup_n n^{1/r} s_n over a table.
struct IdealNormEstimate {
  double r = 1;
  WidthKind kind = WidthKind::approximation;
  double value = 0;
  double argmax_n = 1;  ///< first maximizing index
  double rho = 1;       ///< power used when estimates of several operators are summed

  friend bool operator==(const IdealNormEstimate&, const IdealNormEstimate&) = default;
};

/// widths[k] is s_{k+1}. Requires a non-empty, non-negative, non-increasing table.
inline IdealNormEstimate ideal_norm(const std::vector<double>& widths, double r,
                                    WidthKind kind = WidthKind::approximation, double rho = 1) {
  if (widths.empty()) throw ValidationError("widths", "table is empty");
  if (!(r > 0) || !std::isfinite(r)) throw ValidationError("r", "must be finite and > 0");
  if (!(rho > 0 && rho <= 1)) throw ValidationError("rho", "must lie in (0, 1]");
  IdealNormEstimate out{r, kind, 0.0, 1, rho};
  for (std::size_t k = 0; k < widths.size(); ++k) {
    const double s = widths[k];
    if (!(s >= 0) || !std::isfinite(s)) throw ValidationError("widths", "entries must be finite and >= 0");
    if (k > 0 && s > widths[k - 1]) throw ValidationError("widths", "table must be non-increasing");
    const double n = static_cast<double>(k + 1);
    const double v = std::pow(n, 1.0 / r) * s;
    if (v > out.value) {
      out.value = v;
      out.argmax_n = n;
    }
  }
  return out;
}

}  // namespace snum
