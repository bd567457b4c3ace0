#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "snum/assembly.hpp"
#include "snum/blocks.hpp"
#include "snum/classify.hpp"
#include "snum/errors.hpp"
#include "snum/ideal_norm.hpp"
#include "snum/params.hpp"

namespace snum {

struct RateSample {
  double n = 1;
  double bound = 0;

  friend bool operator==(const RateSample&, const RateSample&) = default;
};

struct LineFit {
  double slope = 0;
  double intercept = 0;
  double max_residual = 0;
  std::size_t used = 0;  ///< points left after trimming
};

/// Truncation and remainder bookkeeping of a verification run.
struct TruncationReport {
  int levels = 0;              ///< J = I
  double tail_bound = 0;       ///< combined norm of the blocks outside the box
  double tail_share = 0;       ///< relative increase of the bound at the largest n
  int cutoff = 0;              ///< M used for the Q-side estimate
  double beta = kInf;          ///< 1/beta = max(0, kappa - mu/d)
  IdealNormEstimate remainder; ///< L_{s,inf} of Q at `cutoff`
};

struct RateFit {
  WidthKind kind = WidthKind::approximation;
  std::string case_label;
  std::vector<RateSample> samples;
  double slope = 0;
  double intercept = 0;
  double max_residual = 0;
  double predicted_kappa = 0;
  double tolerance = 0.1;
  bool pass = false;
  bool shape_only = false;      ///< some block used an envelope with unit constants
  Combiner combiner = Combiner::direct_sum;
  double combination_exponent = 1;
  TruncationReport truncation;
};

/// Ordinary least squares of log(bound) on log(n) after discarding
/// floor(10%) of the points at each end of the grid.
inline LineFit fit_loglog(const std::vector<RateSample>& samples) {
  if (samples.size() < 2) throw ValidationError("samples", "need at least two points");
  for (std::size_t k = 0; k < samples.size(); ++k) {
    if (!(samples[k].n >= 1)) throw ValidationError("samples", "n must be >= 1");
    if (!(samples[k].bound > 0) || !std::isfinite(samples[k].bound))
      throw ValidationError("samples", "bounds must be finite and > 0 for a log-log fit");
    if (k > 0 && !(samples[k].n > samples[k - 1].n))
      throw ValidationError("samples", "n must be strictly increasing");
  }
  const std::size_t drop = samples.size() / 10;
  const std::size_t lo = drop, hi = samples.size() - drop;
  const double m = static_cast<double>(hi - lo);
  double sx = 0, sy = 0;
  for (std::size_t k = lo; k < hi; ++k) {
    sx += std::log(samples[k].n);
    sy += std::log(samples[k].bound);
  }
  const double mx = sx / m, my = sy / m;
  double sxx = 0, sxy = 0;
  for (std::size_t k = lo; k < hi; ++k) {
    const double dx = std::log(samples[k].n) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(samples[k].bound) - my);
  }
  LineFit out;
  out.used = hi - lo;
  out.slope = sxy / sxx;
  out.intercept = my - out.slope * mx;
  for (std::size_t k = lo; k < hi; ++k) {
    const double r = std::log(samples[k].bound) - (out.intercept + out.slope * std::log(samples[k].n));
    out.max_residual = std::max(out.max_residual, std::abs(r));
  }
  return out;
}

/// n_min, n_min * ratio, ... up to n_max (inclusive when hit exactly).
inline std::vector<double> geometric_grid(double n_min, double n_max, double ratio = 2) {
  if (!(n_min >= 1)) throw ValidationError("grid", "n_min must be >= 1");
  if (!(n_max >= n_min)) throw ValidationError("grid", "n_max must be >= n_min");
  if (!(ratio > 1)) throw ValidationError("grid", "ratio must be > 1");
  std::vector<double> out;
  for (double n = n_min; n <= n_max * (1 + 1e-12); n *= ratio) {
    const double r = std::round(n);
    if (out.empty() || r > out.back()) out.push_back(r);
  }
  return out;
}

struct VerifyOptions {
  double tolerance = 0.1;
  int max_level = 14;          ///< largest J = I tried
  Combiner combiner = Combiner::direct_sum;
  double lambda = 0.5;
  bool allow_envelope = false;
  int cutoff = -1;             ///< M for the Q-side estimate; < 0 picks ceil(log2(n_max)/d)
  unsigned workers = 1;
};

namespace detail {

inline std::vector<double> assemble_all(const EmbeddingParams& params, const std::vector<Block>& blocks,
                                        int M, const std::vector<double>& grid,
                                        const AssemblyOptions& aopt, unsigned workers) {
  std::vector<double> out(grid.size());
  const auto work = [&](std::size_t k) {
    out[k] = assemble_upper_bound(params, blocks, M, grid[k], aopt).value;
  };
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(grid.size())));
  if (workers == 1) {
    for (std::size_t k = 0; k < grid.size(); ++k) work(k);
    return out;
  }
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t k = w; k < grid.size(); k += workers) work(k);
    });
  for (auto& th : pool) th.join();
  return out;
}

}  // namespace detail

/// Fits the decay of assembled upper bounds over `n_grid` against the predicted
/// exponent. The box J = I = T grows until the tail outside it raises the bound
/// at the largest n by at most tolerance/10.
inline RateFit verify_exponent(const EmbeddingParams& params, WidthKind kind,
                               const std::vector<double>& n_grid, const VerifyOptions& opt = {}) {
  validate(params);
  if (!(opt.tolerance > 0) || !std::isfinite(opt.tolerance))
    throw ValidationError("tol", "tolerance must be finite and > 0");
  if (opt.max_level < 0) throw ValidationError("max-level", "must be >= 0");
  if (n_grid.size() < 2) throw ValidationError("grid", "need at least two grid points");
  for (std::size_t k = 0; k < n_grid.size(); ++k)
    if (!(n_grid[k] >= 1) || (k > 0 && !(n_grid[k] > n_grid[k - 1])))
      throw ValidationError("grid", "grid must be strictly increasing and >= 1");

  const auto cls = classify(params);
  const auto& er = cls.family(kind);
  if (!covered(er))
    throw VerificationRefused(std::string(to_string(kind)) + " not covered: " +
                              to_string(std::get<NotCovered>(er).reason));
  const auto& de = std::get<DecayExponent>(er);

  {
    const BlockProfile probe(Block{0, 0, 2, 1}, params.p1, params.p2, kind, opt.lambda);
    if (!probe.rigorous() && !opt.allow_envelope)
      throw VerificationRefused(std::string("blockwise ") + to_string(kind) +
                                " widths need an envelope with undetermined constants for these "
                                "exponents; pass allow_envelope to accept a shape-only fit");
  }

  RateFit out;
  out.kind = kind;
  out.case_label = de.case_label;
  out.predicted_kappa = de.kappa;
  out.tolerance = opt.tolerance;
  out.combiner = opt.combiner;
  out.combination_exponent = combination_exponent(params, opt.combiner);
  const double t = out.combination_exponent;

  AssemblyOptions aopt;
  aopt.kind = kind;
  aopt.combiner = opt.combiner;
  aopt.lambda = opt.lambda;

  const double n_max = n_grid.back();
  int T = -1;
  std::vector<Block> blocks;
  double tail = 0, share = 0;
  for (int level = 1; level <= opt.max_level; ++level) {
    blocks = build_blocks({params, level, level});
    const double head = assemble_upper_bound(params, blocks, 2 * level, n_max, aopt).value;
    tail = truncation_tail_bound(params, level, level, t);
    share = head > 0 ? combine(head, tail, t) / head - 1 : kInf;
    if (share <= opt.tolerance / 10) {
      T = level;
      break;
    }
  }
  if (T < 0)
    throw TruncationError("remainder target tol/10 = " + std::to_string(opt.tolerance / 10) +
                          " not reached within the J/I limit J = I = " + std::to_string(opt.max_level) +
                          " (tail share " + std::to_string(share) + "); raise max-level or the grid's upper end");

  const auto heads = detail::assemble_all(params, blocks, 2 * T, n_grid, aopt, opt.workers);
  for (std::size_t k = 0; k < n_grid.size(); ++k)
    out.samples.push_back({n_grid[k], combine(heads[k], tail, t)});
  for (const auto& b : blocks)
    if (!BlockProfile(b, params.p1, params.p2, kind, opt.lambda).rigorous()) out.shape_only = true;

  const auto fit = fit_loglog(out.samples);
  out.slope = fit.slope;
  out.intercept = fit.intercept;
  out.max_residual = fit.max_residual;
  out.pass = std::abs(out.slope + out.predicted_kappa) <= opt.tolerance;

  auto& tr = out.truncation;
  tr.levels = T;
  tr.tail_bound = tail;
  tr.tail_share = share;
  const double x = cls.derived.mu / params.d;
  const double ib = std::max(0.0, de.kappa - x);
  tr.beta = ib > 0 ? 1.0 / ib : kInf;
  tr.cutoff = opt.cutoff >= 0 ? opt.cutoff
                              : std::min(2 * T, static_cast<int>(std::ceil(std::log2(n_max) / params.d)));
  // 1/s midway between 1/beta and mu/d + 1/beta
  tr.remainder = remainder_ideal_norm(params, blocks, tr.cutoff, 1.0 / (ib + x / 2), kind, opt.lambda);
  return out;
}

}  // namespace snum
