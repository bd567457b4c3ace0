#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <string>
#include <tuple>
#include <vector>

#include "snum/blocks.hpp"
#include "snum/classify.hpp"
#include "snum/errors.hpp"
#include "snum/ideal_norm.hpp"
#include "snum/params.hpp"

namespace snum {

/// How a block bound is obtained.
///  - exact_formula: sigma (D - n + 1)^{1/p2 - 1/p1}, p2 <= p1.
///  - dominated: the same expression used as an upper bound (Kolmogorov, p2 < 1).
///  - envelope: upper shape of a finite-dimensional lemma, constants set to 1.
///  - norm_bound: s_n <= ||block|| for n <= D; used when nothing sharper applies.
enum class ProfileMethod { exact_formula, dominated, envelope, norm_bound };

inline const char* to_string(ProfileMethod m) noexcept {
  switch (m) {
    case ProfileMethod::exact_formula: return "exact-formula";
    case ProfileMethod::dominated: return "dominated";
    case ProfileMethod::envelope: return "envelope";
    case ProfileMethod::norm_bound: return "norm-bound";
  }
  return "?";
}

/// Upper bound n -> s_n of sigma * id : l_{p1}^D -> l_{p2}^D, non-increasing in n.
class BlockProfile {
 public:
  BlockProfile(const Block& block, double p1, double p2, WidthKind kind, double lambda = 0.5)
      : dim_(block.dim), sigma_(block.sigma), kind_(kind), lambda_(lambda) {
    if (!(block.dim >= 1)) throw ValidationError("dim", "block dimension must be >= 1");
    if (!(block.sigma >= 0) || !std::isfinite(block.sigma))
      throw ValidationError("sigma", "block factor must be finite and >= 0");
    if (!(lambda > 0 && lambda < 1)) throw ValidationError("lambda", "must lie in (0, 1)");
    detail::check_exponent("p1", p1);
    detail::check_exponent("p2", p2);
    e_ = inv(p2) - inv(p1);
    if (compare_exponents(p2, p1) <= 0) {
      e_ = std::max(e_, 0.0);
      method_ = (kind == WidthKind::kolmogorov && p2 < 1.0) ? ProfileMethod::dominated
                                                           : ProfileMethod::exact_formula;
      return;
    }
    const double ps = std::max(p1, 1.0);  // Kolmogorov numbers do not see p1 < 1
    if (kind == WidthKind::kolmogorov && std::isinf(p2) && ps < 2.0) {
      shape_ = Shape::kolmogorov_small_p;
    } else if (kind == WidthKind::kolmogorov && std::isinf(p2) && std::isfinite(ps)) {
      shape_ = Shape::kolmogorov_large_p;
      p_ = ps;
    } else if (kind == WidthKind::gelfand && p1 <= 1.0) {
      shape_ = Shape::gelfand;
      p_ = compare_exponents(p2, 2.0) > 0 ? inv(p1) - 0.5 : inv(p1) - inv(p2);
    } else if (kind == WidthKind::approximation && p1 <= 1.0 && std::isinf(p2)) {
      shape_ = Shape::approximation;
    } else {
      method_ = ProfileMethod::norm_bound;
      return;
    }
    method_ = ProfileMethod::envelope;
  }

  double dim() const noexcept { return dim_; }
  double sigma() const noexcept { return sigma_; }
  WidthKind kind() const noexcept { return kind_; }
  ProfileMethod method() const noexcept { return method_; }
  bool exact() const noexcept { return method_ == ProfileMethod::exact_formula; }
  /// True when the bound holds with no hidden constant.
  bool rigorous() const noexcept { return method_ != ProfileMethod::envelope; }

  double norm() const { return value(1); }

  double value(double n) const {
    if (n > dim_) return 0.0;
    switch (method_) {
      case ProfileMethod::exact_formula:
      case ProfileMethod::dominated: return sigma_ * std::pow(dim_ - n + 1, e_);
      case ProfileMethod::norm_bound: return sigma_;
      case ProfileMethod::envelope: return sigma_ * std::min(1.0, shape(n));
    }
    return 0.0;
  }

  /// Smallest integer n >= 1 with value(n) <= eps; dim + 1 when only rank
  /// exhaustion gets there.
  double first_index_at_most(double eps) const {
    if (value(1) <= eps) return 1;
    double lo = 1, hi = dim_ + 1;
    while (hi - lo > 1) {
      const double mid = std::floor(lo + (hi - lo) / 2);
      if (mid <= lo || mid >= hi) break;
      (value(mid) <= eps ? hi : lo) = mid;
    }
    return hi;
  }

 private:
  enum class Shape { none, kolmogorov_small_p, kolmogorov_large_p, gelfand, approximation };

  static double small_p_upper(double N, double n) {
    const double arg = (4 * n <= N ? 1.0 : 4.0) * std::exp(1.0) * N / n;
    return std::pow(std::log(arg), 1.5) / std::sqrt(n);
  }

  double shape(double n) const {
    switch (shape_) {
      case Shape::kolmogorov_small_p: {
        double u = small_p_upper(dim_, n);
        // The switch of logarithm at n = N/4 jumps upwards; s_n is monotone.
        const double knee = std::floor(dim_ / 4);
        if (4 * n > dim_ && knee >= 1) u = std::min(u, small_p_upper(dim_, knee));
        return u;
      }
      case Shape::kolmogorov_large_p:
        if (n <= 1) return 1.0;
        return std::pow(std::log(1.0 + dim_ / (n - 1)) / (n - 1), 1.0 / p_);
      case Shape::gelfand:
        if (n <= 1) return 1.0;
        return std::pow(std::min(1.0, (std::log(dim_ / (n - 1)) + 1.0) / (n - 1)), p_);
      case Shape::approximation: return n <= std::pow(dim_, lambda_) ? 1.0 : 1.0 / std::sqrt(n);
      case Shape::none: break;
    }
    return 1.0;
  }

  double dim_;
  double sigma_;
  WidthKind kind_;
  double lambda_;
  double e_ = 0;
  double p_ = 1;
  ProfileMethod method_ = ProfileMethod::norm_bound;
  Shape shape_ = Shape::none;
};

/// Rule for combining blockwise bounds.
///  - direct_sum: l_t norm of the block bounds, t = min(t_p, t_q) with
///    1/t_p = max(0, 1/p2 - 1/p1), 1/t_q = max(0, 1/q2 - 1/q1). This is the norm
///    of a block-diagonal operator between mixed l_q(l_p) sums.
///  - rho_sum: (sum s^rho)^{1/rho}, rho = min(1, p2, q2), from the quasi-triangle
///    inequality with its constant set to 1.
enum class Combiner { direct_sum, rho_sum };

inline const char* to_string(Combiner c) noexcept {
  return c == Combiner::direct_sum ? "direct-sum" : "rho-sum";
}

inline double combination_exponent(const EmbeddingParams& p, Combiner c) {
  if (c == Combiner::rho_sum) return std::min({1.0, p.p2, p.q2});
  const double it = std::max({0.0, inv(p.p2) - inv(p.p1), inv(p.q2) - inv(p.q1)});
  return it == 0.0 ? kInf : 1.0 / it;
}

/// l_t combination of non-negative values; t = inf is the maximum.
inline double combine(const std::vector<double>& values, double t) {
  if (std::isinf(t)) return values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
  double s = 0;
  for (double v : values) s += std::pow(v, t);
  return std::pow(s, 1.0 / t);
}

inline double combine(double a, double b, double t) {
  if (std::isinf(t)) return std::max(a, b);
  return std::pow(std::pow(a, t) + std::pow(b, t), 1.0 / t);
}

struct AssemblyOptions {
  WidthKind kind = WidthKind::approximation;
  Combiner combiner = Combiner::direct_sum;
  double lambda = 0.5;        ///< threshold exponent of the approximation envelope
  int exchange_passes = 12;   ///< local-exchange rounds after the greedy phase
};

struct AssembledBound {
  double value = 0;
  double exponent = 1;             ///< combination exponent actually used
  std::vector<double> ranks;       ///< n_b - 1 per block, in input order
  bool exact_blocks = true;        ///< every block used the exact formula
  bool rigorous = true;            ///< no envelope with unit constants was used
};

namespace detail {

/// Rank allocation for minimizing the l_t combination of block bounds.
class Allocator {
 public:
  Allocator(const std::vector<BlockProfile>& profiles, const std::vector<bool>& movable, double t)
      : prof_(profiles), movable_(movable), t_(t), ranks_(profiles.size(), 0.0) {}

  const std::vector<double>& ranks() const { return ranks_; }

  double bound() const {
    std::vector<double> v(prof_.size());
    for (std::size_t b = 0; b < prof_.size(); ++b) v[b] = prof_[b].value(ranks_[b] + 1);
    return combine(v, t_);
  }

  void run(double budget, int passes) {
    double total_dim = 0;
    for (std::size_t b = 0; b < prof_.size(); ++b)
      if (movable_[b]) total_dim += prof_[b].dim();
    if (total_dim <= budget) {
      for (std::size_t b = 0; b < prof_.size(); ++b)
        if (movable_[b]) ranks_[b] = prof_[b].dim();
      return;
    }
    if (std::isinf(t_)) {
      threshold(budget);
    } else {
      greedy(budget);
      exchange(passes);
    }
  }

 private:
  double cost(double r, std::size_t b) const { return std::pow(prof_[b].value(r + 1), t_); }

  void threshold(double budget) {
    const auto spent = [&](double eps) {
      double s = 0;
      for (std::size_t b = 0; b < prof_.size(); ++b)
        if (movable_[b]) s += prof_[b].first_index_at_most(eps) - 1;
      return s;
    };
    double hi = 0, lo = kInf;
    for (std::size_t b = 0; b < prof_.size(); ++b) {
      if (!movable_[b]) continue;
      hi = std::max(hi, prof_[b].norm());
      const double last = prof_[b].value(prof_[b].dim());
      if (last > 0) lo = std::min(lo, last);
    }
    if (hi <= 0) return;
    lo = std::min(lo, hi) / 2;  // below every non-zero value: infeasible
    for (int it = 0; it < 200 && hi > lo * (1 + 1e-15); ++it) {
      const double mid = std::sqrt(lo * hi);
      if (!(mid > lo && mid < hi)) break;
      (spent(mid) <= budget ? hi : lo) = mid;
    }
    for (std::size_t b = 0; b < prof_.size(); ++b)
      if (movable_[b]) ranks_[b] = prof_[b].first_index_at_most(hi) - 1;
  }

  /// Candidate ranks for block b: every integer up to 64, then a 5% geometric
  /// ladder, then the cap itself.
  static std::vector<double> ladder(double cap) {
    std::vector<double> r;
    for (double x = 0; x <= std::min(cap, 64.0); x += 1) r.push_back(x);
    for (double x = 64; x < cap;) {
      x = std::min(cap, std::floor(x * 1.05) + 1);
      r.push_back(x);
    }
    if (r.back() < cap) r.push_back(cap);
    return r;
  }

  /// Vertices of the lower convex hull of r -> cost(r, b) on the ladder.
  std::vector<std::pair<double, double>> hull(std::size_t b, double cap) const {
    std::vector<std::pair<double, double>> h;
    for (double r : ladder(cap)) {
      const std::pair<double, double> p{r, cost(r, b)};
      while (h.size() >= 2) {
        const auto& [x1, y1] = h[h.size() - 2];
        const auto& [x2, y2] = h[h.size() - 1];
        // drop the middle point when it lies on or above the chord
        if ((y2 - y1) * (p.first - x1) >= (p.second - y1) * (x2 - x1)) h.pop_back();
        else break;
      }
      h.push_back(p);
    }
    return h;
  }

  void greedy(double budget) {
    struct Segment {
      double slope;
      std::size_t block;
      std::size_t index;
      double width;
    };
    std::vector<std::vector<std::pair<double, double>>> hulls(prof_.size());
    std::vector<Segment> segs;
    for (std::size_t b = 0; b < prof_.size(); ++b) {
      if (!movable_[b]) continue;
      hulls[b] = hull(b, std::min(prof_[b].dim(), budget));
      for (std::size_t k = 1; k < hulls[b].size(); ++k) {
        const double w = hulls[b][k].first - hulls[b][k - 1].first;
        const double slope = (hulls[b][k].second - hulls[b][k - 1].second) / w;
        if (slope < 0) segs.push_back({slope, b, k, w});
      }
    }
    std::stable_sort(segs.begin(), segs.end(), [](const Segment& a, const Segment& b) {
      return std::tie(a.slope, a.block, a.index) < std::tie(b.slope, b.block, b.index);
    });
    std::vector<std::size_t> next(prof_.size(), 1);
    std::vector<bool> blocked(prof_.size(), false);
    double left = budget;
    for (const auto& s : segs) {
      if (blocked[s.block] || s.index != next[s.block]) continue;
      if (s.width > left) {
        blocked[s.block] = true;
        continue;
      }
      left -= s.width;
      ranks_[s.block] = hulls[s.block][s.index].first;
      ++next[s.block];
    }
    // spend what is left where it helps most
    while (left >= 1) {
      double best_gain = 0;
      std::size_t best = prof_.size();
      double best_r = 0;
      for (std::size_t b = 0; b < prof_.size(); ++b) {
        if (!movable_[b] || ranks_[b] >= prof_[b].dim()) continue;
        const double r = std::min(prof_[b].dim(), ranks_[b] + left);
        const double gain = cost(ranks_[b], b) - cost(r, b);
        if (gain > best_gain) best_gain = gain, best = b, best_r = r;
      }
      if (best == prof_.size()) break;
      left -= best_r - ranks_[best];
      ranks_[best] = best_r;
    }
    left_ = left;
  }

  void exchange(int passes) {
    std::vector<std::size_t> idx;
    for (std::size_t b = 0; b < prof_.size(); ++b)
      if (movable_[b]) idx.push_back(b);
    for (int pass = 0; pass < passes; ++pass) {
      double total = 0;
      for (std::size_t b : idx) total += cost(ranks_[b], b);
      double best_gain = 1e-13 * total;
      std::size_t from = 0, to = 0;
      double from_r = 0, to_r = 0;
      for (std::size_t a : idx) {
        const double ra = ranks_[a];
        const double ca = cost(ra, a);
        for (double give : {ra, std::ceil(ra / 2), 1.0}) {
          if (give <= 0 || give > ra) continue;
          const double na = ra - give;
          const double ca_new = cost(na, a);
          const double free = give + left_;
          for (std::size_t b : idx) {
            if (b == a || ranks_[b] >= prof_[b].dim()) continue;
            const double rb = ranks_[b];
            const double nb = std::min(prof_[b].dim(), rb + free);
            const double gain = ca + cost(rb, b) - ca_new - cost(nb, b);
            if (gain > best_gain) {
              best_gain = gain;
              from = a, to = b, from_r = na, to_r = nb;
            }
          }
        }
      }
      if (from == to) break;
      left_ += (ranks_[from] - from_r) - (to_r - ranks_[to]);
      ranks_[from] = from_r;
      ranks_[to] = to_r;
    }
  }

  const std::vector<BlockProfile>& prof_;
  const std::vector<bool>& movable_;
  double t_;
  std::vector<double> ranks_;
  double left_ = 0;
};

}  // namespace detail

/// Upper bound for s_n of the block-diagonal operator formed by `blocks`.
/// Blocks with j + i <= M (the P part) receive ranks; the Q part enters with
/// its norms. The ranks satisfy sum (n_b - 1) <= n_budget - 1.
inline AssembledBound assemble_upper_bound(const EmbeddingParams& params,
                                           const std::vector<Block>& blocks, int M,
                                           double n_budget, const AssemblyOptions& opt = {}) {
  validate(params);
  if (!(n_budget >= 1) || !std::isfinite(n_budget)) throw ValidationError("n", "budget must be >= 1");
  if (M < 0) throw ValidationError("M", "cutoff must be >= 0");
  std::vector<BlockProfile> profiles;
  std::vector<bool> movable;
  AssembledBound out;
  out.exponent = combination_exponent(params, opt.combiner);
  profiles.reserve(blocks.size());
  for (const auto& b : blocks) {
    profiles.emplace_back(b, params.p1, params.p2, opt.kind, opt.lambda);
    movable.push_back(b.level_sum() <= M);
    out.exact_blocks = out.exact_blocks && profiles.back().exact();
    out.rigorous = out.rigorous && profiles.back().rigorous();
  }
  detail::Allocator alloc(profiles, movable, out.exponent);
  alloc.run(std::floor(n_budget) - 1, opt.exchange_passes);
  out.ranks = alloc.ranks();
  out.value = alloc.bound();
  return out;
}

/// Bound for the combined norm of all blocks outside the box j <= J, i <= I,
/// using dim <= 2^d 2^{(j+i)d}. Requires a compact embedding.
inline double truncation_tail_bound(const EmbeddingParams& params, int J, int I, double t) {
  validate(params);
  if (!check_compact(params)) throw NotCompactError("embedding is not compact");
  const int d = params.d;
  const double ep = std::max(0.0, inv(params.p2) - inv(params.p1));
  const double gj = delta_of(params) - d * ep;  // decay per level
  const double gi = params.alpha - d * ep;      // decay per annulus
  const double c = std::exp2(d * ep);
  if (std::isinf(t)) return c * std::max(std::exp2(-gj * (J + 1)), std::exp2(-gi * (I + 1)));
  const double a = std::exp2(-t * gj), b = std::exp2(-t * gi);
  const double aJ = std::pow(a, J + 1), bI = std::pow(b, I + 1);
  const double s = (aJ + bI - aJ * bI) / ((1 - a) * (1 - b));
  return c * std::pow(s, 1.0 / t);
}

/// sup_n n^{1/s} s_n for one block, over a 1% geometric ladder of n.
inline double block_ideal_norm(const BlockProfile& prof, double s) {
  double best = 0;
  for (double n = 1; n <= prof.dim();) {
    best = std::max(best, std::pow(n, 1.0 / s) * prof.value(n));
    if (n == prof.dim()) break;
    n = std::min(prof.dim(), std::max(n + 1, std::floor(n * 1.01)));
  }
  return best;
}

/// L_{s,inf} estimate of the Q part at cutoff M: the blockwise values summed
/// with power rho = min(1, p2, q2), constant set to 1.
inline IdealNormEstimate remainder_ideal_norm(const EmbeddingParams& params,
                                              const std::vector<Block>& blocks, int M, double s,
                                              WidthKind kind, double lambda = 0.5) {
  if (!(s > 0) || !std::isfinite(s)) throw ValidationError("s", "must be finite and > 0");
  const double rho = std::min({1.0, params.p2, params.q2});
  double acc = 0;
  for (const auto& b : split_PQ(blocks, M).second)
    acc += std::pow(block_ideal_norm(BlockProfile(b, params.p1, params.p2, kind, lambda), s), rho);
  return {s, kind, std::pow(acc, 1.0 / rho), 0, rho};
}

}  // namespace snum
