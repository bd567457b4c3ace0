#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "snum/classify.hpp"
#include "snum/errors.hpp"
#include "snum/params.hpp"

namespace snum {

/// scale * id : l_{p_src}^N -> l_{p_dst}^N
struct FiniteEmbedding {
  std::size_t N = 1;
  double p_src = 2;
  double p_dst = 2;
  double scale = 1;

  friend bool operator==(const FiniteEmbedding&, const FiniteEmbedding&) = default;
};

inline void validate(const FiniteEmbedding& e) {
  if (e.N < 1) throw ValidationError("N", "dimension must be >= 1");
  detail::check_exponent("p_src", e.p_src);
  detail::check_exponent("p_dst", e.p_dst);
  if (!std::isfinite(e.scale) || e.scale < 0) throw ValidationError("scale", "must be finite and >= 0");
}

/// Diagonal operator on l_p^N with the given (non-negative) entries.
struct DiagonalOperator {
  std::vector<double> entries;
  double p = 2;
};

enum class WidthMethod { exact_formula, envelope, oracle_spectral, oracle_subspace, reduction };

inline const char* to_string(WidthMethod m) noexcept {
  switch (m) {
    case WidthMethod::exact_formula: return "exact-formula";
    case WidthMethod::envelope: return "envelope";
    case WidthMethod::oracle_spectral: return "oracle-spectral";
    case WidthMethod::oracle_subspace: return "oracle-subspace";
    case WidthMethod::reduction: return "reduction";
  }
  return "?";
}

/// Two-sided bound lower_shape <~ s_n <~ upper_shape. Shapes are evaluated with
/// every undetermined absolute constant set to 1.
struct Envelope {
  double lower_shape = 0;
  double upper_shape = 0;
  bool constants_undetermined = true;

  friend bool operator==(const Envelope&, const Envelope&) = default;
};

struct WidthResult {
  WidthKind kind = WidthKind::approximation;
  std::size_t n = 1;
  std::variant<double, Envelope> value = 0.0;
  WidthMethod method = WidthMethod::exact_formula;

  bool is_exact() const noexcept { return std::holds_alternative<double>(value); }
  const Envelope& envelope() const { return std::get<Envelope>(value); }
  /// The exact value, or the upper shape of an envelope.
  double upper() const {
    return is_exact() ? std::get<double>(value) : std::get<Envelope>(value).upper_shape;
  }
  double lower() const {
    return is_exact() ? std::get<double>(value) : std::get<Envelope>(value).lower_shape;
  }
  bool constants_undetermined() const {
    return !is_exact() && std::get<Envelope>(value).constants_undetermined;
  }

  friend bool operator==(const WidthResult&, const WidthResult&) = default;
};

namespace detail {

inline void check_index(std::size_t n) {
  if (n < 1) throw ValidationError("n", "index must be >= 1");
}

inline WidthResult rank_zero(WidthKind kind, std::size_t n) {
  return {kind, n, 0.0, WidthMethod::exact_formula};
}

inline WidthResult make_envelope(WidthKind kind, std::size_t n, double scale, double lower,
                                 double upper) {
  return {kind, n, Envelope{scale * lower, scale * upper, true}, WidthMethod::envelope};
}

}  // namespace detail

/// s_n(scale * id, l_{p_src}^N, l_{p_dst}^N) = scale * (N - n + 1)^{1/p_dst - 1/p_src}
/// for p_dst <= p_src. Valid for approximation and Gelfand numbers in the whole
/// quasi-Banach range, and for Kolmogorov numbers when p_dst >= 1.
inline WidthResult exact_width_nonincreasing(const FiniteEmbedding& emb, std::size_t n,
                                             WidthKind kind) {
  validate(emb);
  detail::check_index(n);
  if (compare_exponents(emb.p_dst, emb.p_src) > 0)
    throw NotApplicable("exact formula needs p_dst <= p_src; use an envelope");
  if (kind == WidthKind::kolmogorov && emb.p_dst < 1.0)
    throw NotApplicable("exact Kolmogorov formula fails for p_dst < 1; use kolmogorov_envelope");
  if (n > emb.N) return detail::rank_zero(kind, n);
  const double exponent = inv(emb.p_dst) - inv(emb.p_src);
  const double v = emb.scale * std::pow(static_cast<double>(emb.N - n + 1), exponent);
  return {kind, n, v, WidthMethod::exact_formula};
}

/// Replaces p_src by min(1, p_dst); Kolmogorov numbers are unchanged.
inline FiniteEmbedding reduce_quasi_banach(const FiniteEmbedding& emb) {
  validate(emb);
  if (!(emb.p_src < 1.0) || compare_exponents(emb.p_src, emb.p_dst) >= 0)
    throw NotApplicable("reduction needs 0 < p_src < 1 and p_src < p_dst");
  FiniteEmbedding out = emb;
  out.p_src = std::min(1.0, emb.p_dst);
  return out;
}

/// Kolmogorov numbers of scale * id as a two-sided shape envelope.
///
/// Regimes:
///  - p_dst = inf, 1 <= p_src < 2: lower n^{-1/2} for n <= N/4; upper
///    n^{-1/2} log(eN/n)^{3/2} for n <= N/4, n^{-1/2} log(4eN/n)^{3/2} beyond.
///  - p_dst = inf, 2 <= p_src < inf: upper min{1, (log(1+N/(n-1))/(n-1))^{1/p}},
///    lower a quarter of it.
///  - p_dst <= p_src: upper (N-n+1)^{1/p_dst-1/p_src} (domination by a_n); lower
///    m^{1/p_dst-1/p_src} with m = floor(N/2) for n <= ceil(m/2) + 1, else 0.
inline WidthResult kolmogorov_envelope(const FiniteEmbedding& emb, std::size_t n) {
  validate(emb);
  detail::check_index(n);
  constexpr auto kind = WidthKind::kolmogorov;
  if (n > emb.N) return detail::rank_zero(kind, n);
  const double N = static_cast<double>(emb.N);
  const double nn = static_cast<double>(n);

  if (std::isinf(emb.p_dst) && emb.p_src >= 1.0 && emb.p_src < 2.0) {
    const bool small_n = 4.0 * nn <= N;
    const double root = 1.0 / std::sqrt(nn);
    const double log_arg = small_n ? std::exp(1.0) * N / nn : 4.0 * std::exp(1.0) * N / nn;
    const double upper = root * std::pow(std::log(log_arg), 1.5);
    const double lower = small_n ? root : 0.0;
    return detail::make_envelope(kind, n, emb.scale, lower, upper);
  }
  if (std::isinf(emb.p_dst) && emb.p_src >= 2.0 && std::isfinite(emb.p_src)) {
    double upper = 1.0;
    if (n > 1) {
      const double base = std::log(1.0 + N / (nn - 1.0)) / (nn - 1.0);
      upper = std::min(1.0, std::pow(base, 1.0 / emb.p_src));
    }
    return detail::make_envelope(kind, n, emb.scale, upper / 4.0, upper);
  }
  if (compare_exponents(emb.p_dst, emb.p_src) <= 0) {
    const double exponent = inv(emb.p_dst) - inv(emb.p_src);
    const double upper = std::pow(N - nn + 1.0, exponent);
    const std::size_t m = emb.N / 2;
    const std::size_t reach = (m + 1) / 2 + 1;  // ceil(m/2) + 1
    const double lower =
        (m >= 1 && n <= reach) ? std::pow(static_cast<double>(m), exponent) : 0.0;
    return detail::make_envelope(kind, n, emb.scale, lower, upper);
  }
  throw NotApplicable(
      "no Kolmogorov envelope for this (p_src, p_dst); reduce p_src < 1 with "
      "reduce_quasi_banach or use subspace_search_oracle");
}

/// Gelfand numbers of scale * id for 0 < p_src <= 1 and p_src < p_dst.
/// Both sides use b = min{1, (ln(N/(n-1)) + 1)/(n-1)}: for p_dst > 2 the lower
/// shape is b^{1/p_src-1/p_dst} and the upper b^{1/p_src-1/2}; for p_dst <= 2
/// both are b^{1/p_src-1/p_dst}. When N = 2n the lower shape is replaced by
/// n^{1/2-1/p_src} (p_dst >= 2) or n^{1/p_dst-1/p_src} (p_dst <= 2).
inline WidthResult gelfand_envelope(const FiniteEmbedding& emb, std::size_t n) {
  validate(emb);
  detail::check_index(n);
  constexpr auto kind = WidthKind::gelfand;
  if (!(emb.p_src <= 1.0) || compare_exponents(emb.p_src, emb.p_dst) >= 0)
    throw NotApplicable("Gelfand envelope needs 0 < p_src <= 1 and p_src < p_dst");
  if (n > emb.N) return detail::rank_zero(kind, n);
  const double N = static_cast<double>(emb.N);
  const double nn = static_cast<double>(n);

  const double base = n == 1 ? 1.0 : std::min(1.0, (std::log(N / (nn - 1.0)) + 1.0) / (nn - 1.0));
  const bool wide_target = compare_exponents(emb.p_dst, 2.0) > 0;
  const double low_exp = inv(emb.p_src) - inv(emb.p_dst);
  const double up_exp = wide_target ? inv(emb.p_src) - 0.5 : low_exp;
  double lower = std::pow(base, low_exp);
  const double upper = std::pow(base, up_exp);
  if (emb.N == 2 * n) {
    lower = compare_exponents(emb.p_dst, 2.0) >= 0 ? std::pow(nn, 0.5 - inv(emb.p_src))
                                                   : std::pow(nn, inv(emb.p_dst) - inv(emb.p_src));
  }
  return detail::make_envelope(kind, n, emb.scale, lower, upper);
}

/// Approximation numbers of scale * id : l_p^N -> l_inf^N, 0 < p <= 1.
/// Upper: 1 for n <= N^lambda, n^{-1/2} for N^lambda < n <= N. Lower:
/// n^{-1/2} whenever 2n <= N (the l_p^{2n} section), 0 otherwise.
inline WidthResult approximation_envelope(const FiniteEmbedding& emb, std::size_t n,
                                          double lambda = 0.5) {
  validate(emb);
  detail::check_index(n);
  if (!(lambda > 0.0 && lambda < 1.0)) throw ValidationError("lambda", "must lie in (0, 1)");
  constexpr auto kind = WidthKind::approximation;
  if (!(emb.p_src <= 1.0) || !std::isinf(emb.p_dst))
    throw NotApplicable("approximation envelope needs 0 < p_src <= 1 and p_dst = inf");
  if (n > emb.N) return detail::rank_zero(kind, n);
  const double nn = static_cast<double>(n);
  const double root = 1.0 / std::sqrt(nn);
  const double upper = nn <= std::pow(static_cast<double>(emb.N), lambda) ? 1.0 : root;
  const double lower = 2 * n <= emb.N ? root : 0.0;
  return detail::make_envelope(kind, n, emb.scale, lower, upper);
}

/// Adjoint embedding l_{p_dst'}^N -> l_{p_src'}^N with Gelfand and Kolmogorov
/// numbers swapped. Banach range only.
inline std::pair<FiniteEmbedding, WidthKind> dual_transfer(const FiniteEmbedding& emb,
                                                           WidthKind kind) {
  validate(emb);
  if (emb.p_src < 1.0 || emb.p_dst < 1.0)
    throw NotApplicable("dual transfer is only used in the Banach range p >= 1");
  if (kind == WidthKind::approximation)
    throw NotApplicable("dual transfer maps Gelfand numbers to Kolmogorov numbers and back");
  FiniteEmbedding out = emb;
  out.p_src = conjugate(emb.p_dst);
  out.p_dst = conjugate(emb.p_src);
  const auto dual_kind = kind == WidthKind::gelfand ? WidthKind::kolmogorov : WidthKind::gelfand;
  return {out, dual_kind};
}

/// n-th largest entry of a diagonal operator on l_2; in the Euclidean case all
/// three width families coincide with the singular numbers.
inline WidthResult diagonal_spectral_oracle(const DiagonalOperator& op, std::size_t n,
                                            WidthKind kind = WidthKind::approximation) {
  detail::check_index(n);
  if (op.p != 2.0) throw NotApplicable("spectral oracle is only valid on l_2");
  std::vector<double> sorted = op.entries;
  for (double e : sorted)
    if (!std::isfinite(e) || e < 0) throw ValidationError("entries", "must be finite and >= 0");
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  const double v = n <= sorted.size() ? sorted[n - 1] : 0.0;
  return {kind, n, v, WidthMethod::oracle_spectral};
}

}  // namespace snum
