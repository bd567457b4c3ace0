#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "snum/params.hpp"

namespace snum {

enum class WidthKind { approximation, gelfand, kolmogorov };

inline const char* to_string(WidthKind k) noexcept {
  switch (k) {
    case WidthKind::approximation: return "approximation";
    case WidthKind::gelfand: return "gelfand";
    case WidthKind::kolmogorov: return "kolmogorov";
  }
  return "?";
}

inline constexpr std::array<WidthKind, 3> kAllKinds = {
    WidthKind::approximation, WidthKind::gelfand, WidthKind::kolmogorov};

enum class NotCoveredReason { limiting, boundary, outside_parameter_range, not_compact };

inline const char* to_string(NotCoveredReason r) noexcept {
  switch (r) {
    case NotCoveredReason::limiting: return "limiting";
    case NotCoveredReason::boundary: return "boundary";
    case NotCoveredReason::outside_parameter_range: return "outside-parameter-range";
    case NotCoveredReason::not_compact: return "not-compact";
  }
  return "?";
}

/// s_n ~ n^{-kappa}, with the clause of the case table that produced it.
/// Labels are "K(iv)", "G(ii)", "A(iii)" for Kolmogorov, Gelfand and
/// approximation numbers respectively.
struct DecayExponent {
  double kappa = 0;
  std::string case_label;

  friend bool operator==(const DecayExponent&, const DecayExponent&) = default;
};

struct NotCovered {
  NotCoveredReason reason = NotCoveredReason::boundary;

  friend bool operator==(const NotCovered&, const NotCovered&) = default;
};

using ExponentResult = std::variant<DecayExponent, NotCovered>;

inline bool covered(const ExponentResult& r) noexcept {
  return std::holds_alternative<DecayExponent>(r);
}

namespace detail {

/// Everything the three case tables look at, in reciprocal form.
struct CaseInputs {
  EmbeddingParams params;
  DerivedQuantities q;
  double x = 0;     // mu / d
  double ip1 = 0;   // 1/p1
  double ip2 = 0;   // 1/p2
  double ic1 = 0;   // 1/p1'
  double ic2 = 0;   // 1/p2'
};

inline CaseInputs case_inputs(const EmbeddingParams& p) {
  CaseInputs c;
  c.params = p;
  c.q = derive_quantities(p);
  c.x = c.q.mu / p.d;
  c.ip1 = inv(p.p1);
  c.ip2 = inv(p.p2);
  c.ic1 = inv_conjugate(p.p1);
  c.ic2 = inv_conjugate(p.p2);
  return c;
}

inline std::string label(char family, std::string_view roman) {
  std::string s(1, family);
  s += '(';
  s += roman;
  s += ')';
  return s;
}

/// Shared preamble: p2 <= p~ < p1, non-compactness, and the limiting case.
/// Returns a result when the case tables do not apply.
inline std::optional<ExponentResult> screen(const CaseInputs& c) {
  const auto& p = c.params;
  const bool p2_below_p1 = compare_exponents(p.p2, p.p1) < 0;
  if (p2_below_p1 && c.q.mu > 0 && compare(c.q.inv_p_tilde, c.ip2) <= 0)
    return ExponentResult{NotCovered{NotCoveredReason::outside_parameter_range}};
  if (!compactness_criterion(p.alpha, c.q.delta, p.p1, p.p2, p.d))
    throw NotCompactError("embedding is not compact: min(alpha, delta) <= d max(1/p2 - 1/p1, 0)");
  if (compare(c.q.delta, p.alpha) == 0)
    return ExponentResult{NotCovered{NotCoveredReason::limiting}};
  return std::nullopt;
}

inline ExponentResult split_on(double x, double threshold, DecayExponent above,
                               DecayExponent below) {
  const int side = compare(x, threshold);
  if (side == 0) return NotCovered{NotCoveredReason::boundary};
  return side > 0 ? above : below;
}

}  // namespace detail

/// Decay exponent of the Kolmogorov numbers d_n of the embedding.
/// Throws NotCompactError unless the embedding is compact (the region
/// p2 <= p~ < p1 is reported as NotCovered instead).
inline ExponentResult kolmogorov_exponent(const EmbeddingParams& params) {
  const auto c = detail::case_inputs(params);
  if (auto screened = detail::screen(c)) return *screened;
  const auto& p = c.params;
  const double x = c.x;
  using detail::label;

  const int p1_vs_p2 = compare_exponents(p.p1, p.p2);
  if (p1_vs_p2 > 0) return DecayExponent{x + c.ip1 - c.ip2, label('K', "ii")};
  if (p1_vs_p2 == 0 || compare_exponents(p.p2, 2.0) <= 0) return DecayExponent{x, label('K', "i")};

  // p1 < p2 and p2 > 2
  if (compare_exponents(p.p1, 2.0) < 0) {
    return detail::split_on(x, c.ip2, {x + 0.5 - c.ip2, label('K', "iii")},
                            {x * p.p2 / 2.0, label('K', "iv")});
  }
  const double theta = c.q.theta;  // well defined: p2 > 2
  return detail::split_on(x, c.ip2 * theta, {x + c.ip1 - c.ip2, label('K', "v")},
                          {x * p.p2 / 2.0, label('K', "vi")});
}

/// Decay exponent of the Gelfand numbers c_n of the embedding.
inline ExponentResult gelfand_exponent(const EmbeddingParams& params) {
  const auto c = detail::case_inputs(params);
  if (auto screened = detail::screen(c)) return *screened;
  const auto& p = c.params;
  const double x = c.x;
  using detail::label;

  const int p1_vs_p2 = compare_exponents(p.p1, p.p2);
  if (p1_vs_p2 > 0) return DecayExponent{x + c.ip1 - c.ip2, label('G', "ii")};
  if (p1_vs_p2 == 0 || compare_exponents(p.p1, 2.0) >= 0) return DecayExponent{x, label('G', "i")};

  // p1 < 2 and p1 < p2; below, x * p1'/2 is written as x / (2/p1')
  if (compare_exponents(p.p2, 2.0) > 0) {
    return detail::split_on(x, c.ic1, {x + c.ip1 - 0.5, label('G', "iii")},
                            {x / (2.0 * c.ic1), label('G', "iv")});
  }
  const double theta1 = c.q.theta1;  // well defined: p1 < 2 so p1' > 2
  return detail::split_on(x, c.ic1 * theta1, {x + c.ip1 - c.ip2, label('G', "v")},
                          {x / (2.0 * c.ic1), label('G', "vi")});
}

/// Decay exponent of the approximation numbers a_n of the embedding.
inline ExponentResult approximation_exponent(const EmbeddingParams& params) {
  const auto c = detail::case_inputs(params);
  if (auto screened = detail::screen(c)) return *screened;
  const auto& p = c.params;
  const double x = c.x;
  using detail::label;

  const int p1_vs_p2 = compare_exponents(p.p1, p.p2);
  if (p1_vs_p2 > 0) return DecayExponent{x + c.ip1 - c.ip2, label('A', "ii")};
  if (p1_vs_p2 == 0 || compare_exponents(p.p2, 2.0) <= 0 || compare_exponents(p.p1, 2.0) >= 0)
    return DecayExponent{x, label('A', "i")};

  // p1 < 2 < p2, t = min(p1', p2) so 1/t = max(1/p1', 1/p2)
  const double it = std::max(c.ic1, c.ip2);
  return detail::split_on(x, it, {x + 0.5 - it, label('A', "iii")},
                          {x / (2.0 * it), label('A', "iv")});
}

inline ExponentResult exponent_for(WidthKind kind, const EmbeddingParams& params) {
  switch (kind) {
    case WidthKind::approximation: return approximation_exponent(params);
    case WidthKind::gelfand: return gelfand_exponent(params);
    case WidthKind::kolmogorov: return kolmogorov_exponent(params);
  }
  throw std::logic_error("unknown width kind");
}

enum class WidthPair { a_c, a_d, c_d };

inline const char* to_string(WidthPair w) noexcept {
  switch (w) {
    case WidthPair::a_c: return "a~c";
    case WidthPair::a_d: return "a~d";
    case WidthPair::c_d: return "c~d";
  }
  return "?";
}

struct Equivalence {
  WidthPair pair = WidthPair::a_c;
  std::string sub_case;  ///< e.g. "(ii)(a)"

  friend bool operator==(const Equivalence&, const Equivalence&) = default;
};

struct OmittedEquivalence {
  WidthPair pair = WidthPair::a_c;
  std::string reason;  ///< e.g. "kolmogorov: boundary"

  friend bool operator==(const OmittedEquivalence&, const OmittedEquivalence&) = default;
};

struct WidthComparison {
  std::vector<Equivalence> holds;
  std::vector<OmittedEquivalence> omitted;

  bool contains(WidthPair pair) const {
    for (const auto& e : holds)
      if (e.pair == pair) return true;
    return false;
  }

  friend bool operator==(const WidthComparison&, const WidthComparison&) = default;
};

namespace detail {

inline std::string omission_reason(WidthKind kind, const ExponentResult& r) {
  return std::string(to_string(kind)) + ": " + to_string(std::get<NotCovered>(r).reason);
}

inline WidthComparison compare_from(const CaseInputs& c, const ExponentResult& a,
                                    const ExponentResult& g, const ExponentResult& k) {
  const auto& p = c.params;
  const auto lt = [](double u, double v) { return compare_exponents(u, v) < 0; };
  const auto le = [](double u, double v) { return compare_exponents(u, v) <= 0; };
  const auto eq = [](double u, double v) { return compare_exponents(u, v) == 0; };

  const double p1c = c.q.p1_conj;
  // p~ < p2 <= p1
  const bool tilde_block = le(p.p2, p.p1) && compare(c.q.inv_p_tilde, c.ip2) > 0;
  const bool mu_off_p1c = compare(c.x, c.ic1) != 0;
  const bool mu_off_p2 = compare(c.x, c.ip2) != 0;

  WidthComparison out;
  const auto consider = [&](WidthPair pair, WidthKind k1, const ExponentResult& r1, WidthKind k2,
                            const ExponentResult& r2,
                            std::initializer_list<std::pair<bool, const char*>> clauses) {
    if (!covered(r1)) {
      out.omitted.push_back({pair, omission_reason(k1, r1)});
      return;
    }
    if (!covered(r2)) {
      out.omitted.push_back({pair, omission_reason(k2, r2)});
      return;
    }
    for (const auto& [holds, sub] : clauses)
      if (holds) out.holds.push_back({pair, sub});
  };

  consider(WidthPair::a_c, WidthKind::approximation, a, WidthKind::gelfand, g,
           {{le(2.0, p.p1) && lt(p.p1, p.p2), "(i)(a)"},
            {tilde_block, "(i)(b)"},
            {le(1.0, p.p1) && lt(p.p1, p1c) && le(p1c, p.p2) && mu_off_p1c, "(i)(c)"}});
  consider(WidthPair::a_d, WidthKind::approximation, a, WidthKind::kolmogorov, k,
           {{lt(p.p1, p.p2) && le(p.p2, 2.0), "(ii)(a)"},
            {tilde_block, "(ii)(b)"},
            {lt(p.p1, 2.0) && lt(2.0, p.p2) && le(p.p2, p1c) && mu_off_p2, "(ii)(c)"}});
  consider(WidthPair::c_d, WidthKind::gelfand, g, WidthKind::kolmogorov, k,
           {{tilde_block, "(iii)(a)"},
            {le(1.0, p.p1) && lt(p.p1, p1c) && eq(p1c, p.p2) && mu_off_p2, "(iii)(b)"}});
  return out;
}

}  // namespace detail

/// Which of a_n ~ c_n, a_n ~ d_n, c_n ~ d_n the comparison list asserts for
/// these parameters. Pairs involving an uncovered family are listed in
/// `omitted` together with the reason.
inline WidthComparison compare_widths(const EmbeddingParams& params) {
  const auto c = detail::case_inputs(params);
  return detail::compare_from(c, approximation_exponent(params), gelfand_exponent(params),
                              kolmogorov_exponent(params));
}

struct Classification {
  EmbeddingParams params;
  DerivedQuantities derived;
  bool compact = false;
  bool limiting = false;
  ExponentResult approximation = NotCovered{};
  ExponentResult gelfand = NotCovered{};
  ExponentResult kolmogorov = NotCovered{};
  WidthComparison equivalences;

  const ExponentResult& family(WidthKind k) const {
    switch (k) {
      case WidthKind::approximation: return approximation;
      case WidthKind::gelfand: return gelfand;
      case WidthKind::kolmogorov: return kolmogorov;
    }
    throw std::logic_error("unknown width kind");
  }
};

/// Full case analysis. Never throws for valid parameters: non-compact
/// embeddings are reported as NotCovered(not-compact) in every family.
inline Classification classify(const EmbeddingParams& params) {
  Classification out;
  const auto c = detail::case_inputs(params);
  out.params = params;
  out.derived = c.q;
  out.compact = compactness_criterion(params.alpha, c.q.delta, params.p1, params.p2, params.d);
  out.limiting = compare(c.q.delta, params.alpha) == 0;

  const auto guarded = [](auto&& fn, const EmbeddingParams& p) -> ExponentResult {
    try {
      return fn(p);
    } catch (const NotCompactError&) {
      return NotCovered{NotCoveredReason::not_compact};
    }
  };
  out.approximation = guarded(approximation_exponent, params);
  out.gelfand = guarded(gelfand_exponent, params);
  out.kolmogorov = guarded(kolmogorov_exponent, params);
  out.equivalences = detail::compare_from(c, out.approximation, out.gelfand, out.kolmogorov);
  return out;
}

}  // namespace snum
