#pragma once

// Independent transcription of the three exponent case tables, used as the
// reference for the classifier in unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "snum/params.hpp"

namespace snum_test {

using snum::inv;
using snum::kInf;
using snum::EmbeddingParams;

/// Embedding with the requested (p1, p2, mu, d). `alpha_binds` chooses whether
/// mu comes from alpha (delta = mu + 1) or from delta (alpha = mu + 1).
inline EmbeddingParams make(double p1, double p2, double mu, int d = 1, bool alpha_binds = true) {
  EmbeddingParams p;
  p.p1 = p1;
  p.p2 = p2;
  p.d = d;
  const double delta = alpha_binds ? mu + 1.0 : mu;
  p.alpha = alpha_binds ? mu : mu + 1.0;
  p.s2 = -1.0;
  p.s1 = p.s2 + delta + d * (inv(p1) - inv(p2));
  return p;
}

// ---------------------------------------------------------------------------
// Literal transcription of the three case tables, written with plain
// comparisons on p (not reciprocals). Every clause whose condition holds is
// returned, so exhaustiveness and uniqueness can be counted.

struct Hit {
  double kappa;
  std::string label;
};

inline double conj(double p) { return std::isinf(p) ? 1.0 : (p <= 1 ? kInf : p / (p - 1)); }
inline double rec(double p) { return std::isinf(p) ? 0.0 : 1.0 / p; }

inline std::vector<Hit> kolmogorov_table(double p1, double p2, double mu, int d) {
  const double x = mu / d;
  const double pt = 1.0 / (x + rec(p1));
  const double theta = (rec(p1) - rec(p2)) / (0.5 - rec(p2));
  std::vector<Hit> h;
  if ((p1 <= p2 && p2 <= 2) || (2 < p1 && p1 == p2)) h.push_back({x, "K(i)"});
  if (pt < p2 && p2 < p1) h.push_back({x + rec(p1) - rec(p2), "K(ii)"});
  if (p1 < 2 && 2 < p2 && mu > d * rec(p2)) h.push_back({x + 0.5 - rec(p2), "K(iii)"});
  if (p1 < 2 && 2 < p2 && !std::isinf(p2) && mu < d * rec(p2)) h.push_back({x * p2 / 2, "K(iv)"});
  if (2 <= p1 && p1 < p2 && mu > d * rec(p2) * theta) h.push_back({x + rec(p1) - rec(p2), "K(v)"});
  if (2 <= p1 && p1 < p2 && !std::isinf(p2) && mu < d * rec(p2) * theta)
    h.push_back({x * p2 / 2, "K(vi)"});
  return h;
}

inline std::vector<Hit> gelfand_table(double p1, double p2, double mu, int d) {
  const double x = mu / d;
  const double pt = 1.0 / (x + rec(p1));
  const double c1 = conj(p1), c2 = conj(p2);
  const double theta1 = (rec(c2) - rec(c1)) / (0.5 - rec(c1));
  std::vector<Hit> h;
  if ((2 <= p1 && p1 <= p2) || (p1 == p2 && p1 < 2)) h.push_back({x, "G(i)"});
  if (pt < p2 && p2 < p1) h.push_back({x + rec(p1) - rec(p2), "G(ii)"});
  if (p1 < 2 && 2 < p2 && mu > d * rec(c1)) h.push_back({x + rec(p1) - 0.5, "G(iii)"});
  if (1 < p1 && p1 < 2 && 2 < p2 && mu < d * rec(c1)) h.push_back({x * c1 / 2, "G(iv)"});
  if (p1 < p2 && p2 <= 2 && mu > d * rec(c1) * theta1) h.push_back({x + rec(p1) - rec(p2), "G(v)"});
  if (1 < p1 && p1 < p2 && p2 <= 2 && mu < d * rec(c1) * theta1) h.push_back({x * c1 / 2, "G(vi)"});
  return h;
}

inline std::vector<Hit> approximation_table(double p1, double p2, double mu, int d) {
  const double x = mu / d;
  const double pt = 1.0 / (x + rec(p1));
  const double t = std::min(conj(p1), p2);
  std::vector<Hit> h;
  if ((p1 <= p2 && p2 <= 2) || (2 <= p1 && p1 <= p2)) h.push_back({x, "A(i)"});
  if (pt < p2 && p2 < p1) h.push_back({x + rec(p1) - rec(p2), "A(ii)"});
  if (p1 < 2 && 2 < p2 && mu > d * rec(t)) h.push_back({x + 0.5 - rec(t), "A(iii)"});
  if (p1 < 2 && 2 < p2 && mu < d * rec(t)) h.push_back({x * t / 2, "A(iv)"});
  return h;
}

/// Smallest relative distance of mu/d from any threshold the tables split on.
inline double boundary_gap(double p1, double p2, double mu, int d) {
  const double x = mu / d;
  const double c1 = conj(p1), c2 = conj(p2);
  std::vector<double> thresholds = {rec(p2), rec(c1), rec(std::min(c1, p2)), rec(p2) - rec(p1)};
  if (p2 != 2) thresholds.push_back(rec(p2) * (rec(p1) - rec(p2)) / (0.5 - rec(p2)));
  if (rec(c1) != 0.5) thresholds.push_back(rec(c1) * (rec(c2) - rec(c1)) / (0.5 - rec(c1)));
  double gap = kInf;
  for (double t : thresholds) gap = std::min(gap, std::abs(x - t) / std::max(x, 1e-300));
  return gap;
}

struct Tuple {
  double p1, p2, mu;
  int d;
};

/// Random compact tuples with p-values drawn from a mix of special and generic
/// exponents, keeping mu/d at least 1e-6 (relative) away from every threshold.
inline std::vector<Tuple> sweep_tuples(std::size_t count, unsigned seed) {
  std::mt19937_64 rng(seed);
  const std::vector<double> special = {0.5, 1, 1.5, 2, 3, 4, kInf};
  std::uniform_real_distribution<double> u(0, 1);
  const auto draw_p = [&] {
    if (u(rng) < 0.35) return special[static_cast<std::size_t>(u(rng) * special.size())];
    return 1.0 / (u(rng) * 2.2 + 1e-3);  // 1/p in (0, 2.2)
  };
  std::vector<Tuple> out;
  while (out.size() < count) {
    Tuple t{draw_p(), draw_p(), std::exp(u(rng) * 5 - 3.5), 1 + static_cast<int>(u(rng) * 3)};
    const double needed = t.d * std::max(rec(t.p2) - rec(t.p1), 0.0);
    if (t.mu <= needed * (1 + 1e-6)) continue;
    if (boundary_gap(t.p1, t.p2, t.mu, t.d) < 1e-6) continue;
    out.push_back(t);
  }
  return out;
}

}  // namespace snum_test
