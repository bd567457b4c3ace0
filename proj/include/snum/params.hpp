#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "snum/errors.hpp"

namespace snum {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Relative tolerance used for every equality/boundary decision on exponents.
inline constexpr double kRelTol = 1e-12;

/// Reciprocal of an integrability exponent; 1/inf is exactly 0.
inline double inv(double p) noexcept { return std::isinf(p) ? 0.0 : 1.0 / p; }

/// Conjugate exponent: p/(p-1) for 1 < p < inf, 1 for p = inf, inf for p <= 1.
inline double conjugate(double p) noexcept {
  if (std::isinf(p)) return 1.0;
  if (p <= 1.0) return kInf;
  return p / (p - 1.0);
}

/// Reciprocal of the conjugate exponent, computed without forming p' itself.
inline double inv_conjugate(double p) noexcept {
  if (p <= 1.0) return 0.0;
  return 1.0 - inv(p);
}

/// Three-way comparison under the relative tolerance kRelTol.
/// Returns -1, 0 or +1.
inline int compare(double a, double b, double rel_tol = kRelTol) noexcept {
  const double scale = std::max(std::abs(a), std::abs(b));
  if (std::abs(a - b) <= rel_tol * scale) return 0;
  return a < b ? -1 : 1;
}

/// Orders integrability exponents, inf included; compares reciprocals so that
/// p = inf is handled without special cases.
inline int compare_exponents(double p, double q) noexcept {
  return -compare(inv(p), inv(q));
}

enum class SpaceType { B, F };

inline const char* to_string(SpaceType t) noexcept { return t == SpaceType::B ? "B" : "F"; }

/// Parameters of the embedding A^{s1}_{p1,q1}(R^d, w_alpha) -> A^{s2}_{p2,q2}(R^d).
struct EmbeddingParams {
  double s1 = 0;
  double s2 = 0;
  double p1 = 2;
  double q1 = 2;
  double p2 = 2;
  double q2 = 2;
  double alpha = 1;
  int d = 1;
  SpaceType source_type = SpaceType::B;
  SpaceType target_type = SpaceType::B;

  friend bool operator==(const EmbeddingParams&, const EmbeddingParams&) = default;
};

namespace detail {

inline void check_exponent(const char* field, double p) {
  if (!(p > 0)) throw ValidationError(field, "exponent must lie in (0, inf]");
}

}  // namespace detail

/// Throws ValidationError naming the first violated field.
inline void validate(const EmbeddingParams& p) {
  detail::check_exponent("p1", p.p1);
  detail::check_exponent("p2", p.p2);
  detail::check_exponent("q1", p.q1);
  detail::check_exponent("q2", p.q2);
  if (!std::isfinite(p.s1)) throw ValidationError("s1", "smoothness must be finite");
  if (!std::isfinite(p.s2)) throw ValidationError("s2", "smoothness must be finite");
  if (!(p.s2 < p.s1)) throw ValidationError("s2", "requires s2 < s1");
  if (!std::isfinite(p.alpha) || !(p.alpha > 0))
    throw ValidationError("alpha", "weight exponent must be finite and > 0");
  if (p.d < 1) throw ValidationError("d", "dimension must be >= 1");
  if (p.source_type == SpaceType::F && std::isinf(p.p1))
    throw ValidationError("p1", "F-type source space requires p1 < inf");
  if (p.target_type == SpaceType::F && std::isinf(p.p2))
    throw ValidationError("p2", "F-type target space requires p2 < inf");
}

struct DerivedQuantities {
  double delta = 0;
  double mu = 0;
  double inv_p_tilde = 0;  ///< 1/p~ = mu/d + 1/p1
  double p_tilde = 0;      ///< inf when 1/p~ <= 0
  double theta = std::numeric_limits<double>::quiet_NaN();   ///< NaN when p2 = 2
  double theta1 = std::numeric_limits<double>::quiet_NaN();  ///< NaN when p1' = 2
  double t = 0;                                              ///< min(p1', p2)
  double p1_conj = 0;
  double p2_conj = 0;
};

/// Differential dimension gap s1 - s2 - d(1/p1 - 1/p2).
inline double delta_of(const EmbeddingParams& p) noexcept {
  return p.s1 - p.s2 - p.d * (inv(p.p1) - inv(p.p2));
}

inline DerivedQuantities derive_quantities(const EmbeddingParams& p) {
  validate(p);
  DerivedQuantities q;
  q.delta = delta_of(p);
  q.mu = std::min(p.alpha, q.delta);
  q.inv_p_tilde = q.mu / p.d + inv(p.p1);
  q.p_tilde = q.inv_p_tilde > 0 ? 1.0 / q.inv_p_tilde : kInf;
  q.p1_conj = conjugate(p.p1);
  q.p2_conj = conjugate(p.p2);
  q.t = std::min(q.p1_conj, p.p2);

  const double theta_den = 0.5 - inv(p.p2);
  if (theta_den != 0.0) q.theta = (inv(p.p1) - inv(p.p2)) / theta_den;
  const double c1 = inv_conjugate(p.p1);
  const double theta1_den = 0.5 - c1;
  if (theta1_den != 0.0) q.theta1 = (inv_conjugate(p.p2) - c1) / theta1_den;
  return q;
}

/// min(alpha, delta) > d * max(1/p2 - 1/p1, 0), evaluated with 1/inf = 0.
inline bool compactness_criterion(double alpha, double delta, double p1, double p2, int d) {
  if (!(alpha > 0)) throw ValidationError("alpha", "weight exponent must be > 0");
  return std::min(alpha, delta) > d * std::max(inv(p2) - inv(p1), 0.0);
}

inline bool check_compact(const EmbeddingParams& p) {
  validate(p);
  return compactness_criterion(p.alpha, delta_of(p), p.p1, p.p2, p.d);
}

}  // namespace snum
