#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

namespace snum::detail {

struct NelderMeadOptions {
  double initial_step = 0.5;
  double step_tol = 1e-8;
  std::size_t max_evals = 2000;
  int restarts = 4;
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = std::numeric_limits<double>::infinity();
  std::size_t evals = 0;
};

/// Derivative-free minimization with restarts at the incumbent; each restart
/// shrinks the initial simplex by a factor of ten. Works on non-smooth
/// objectives of a handful of variables.
inline NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                    std::vector<double> x0, const NelderMeadOptions& opt = {}) {
  const std::size_t dim = x0.size();
  NelderMeadResult best;
  best.x = x0;
  best.value = f(x0);
  best.evals = 1;
  if (dim == 0) return best;

  double step = opt.initial_step;
  for (int round = 0; round <= opt.restarts && best.evals < opt.max_evals; ++round) {
    std::vector<std::vector<double>> simplex(dim + 1, best.x);
    std::vector<double> values(dim + 1, best.value);
    for (std::size_t i = 0; i < dim; ++i) {
      simplex[i + 1][i] += step;
      values[i + 1] = f(simplex[i + 1]);
      ++best.evals;
    }
    std::vector<std::size_t> order(dim + 1);
    std::vector<double> centroid(dim), trial(dim), trial2(dim);

    const auto point = [&](double t, std::vector<double>& out, std::size_t worst) {
      for (std::size_t j = 0; j < dim; ++j) out[j] = centroid[j] + t * (simplex[worst][j] - centroid[j]);
    };

    while (best.evals < opt.max_evals) {
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
      const std::size_t lo = order.front(), hi = order.back(), second = order[dim - 1];

      double spread = 0;
      for (std::size_t i = 0; i <= dim; ++i)
        for (std::size_t j = 0; j < dim; ++j)
          spread = std::max(spread, std::abs(simplex[i][j] - simplex[lo][j]));
      if (spread < opt.step_tol) break;

      std::fill(centroid.begin(), centroid.end(), 0.0);
      for (std::size_t i = 0; i <= dim; ++i) {
        if (i == hi) continue;
        for (std::size_t j = 0; j < dim; ++j) centroid[j] += simplex[i][j] / dim;
      }

      point(-1.0, trial, hi);
      const double fr = f(trial);
      ++best.evals;
      if (fr < values[lo]) {
        point(-2.0, trial2, hi);
        const double fe = f(trial2);
        ++best.evals;
        if (fe < fr) {
          simplex[hi] = trial2;
          values[hi] = fe;
        } else {
          simplex[hi] = trial;
          values[hi] = fr;
        }
      } else if (fr < values[second]) {
        simplex[hi] = trial;
        values[hi] = fr;
      } else {
        const bool outside = fr < values[hi];
        point(outside ? -0.5 : 0.5, trial2, hi);
        const double fc = f(trial2);
        ++best.evals;
        if (fc < std::min(fr, values[hi])) {
          simplex[hi] = trial2;
          values[hi] = fc;
        } else {
          for (std::size_t i = 0; i <= dim; ++i) {
            if (i == lo) continue;
            for (std::size_t j = 0; j < dim; ++j)
              simplex[i][j] = simplex[lo][j] + 0.5 * (simplex[i][j] - simplex[lo][j]);
            values[i] = f(simplex[i]);
            ++best.evals;
          }
        }
      }
    }
    const auto it = std::min_element(values.begin(), values.end());
    const double improvement = best.value - *it;
    if (*it < best.value) {
      best.value = *it;
      best.x = simplex[static_cast<std::size_t>(it - values.begin())];
    }
    if (round > 0 && improvement <= 1e-14 * std::max(1.0, std::abs(best.value))) break;
    step = std::max(step * 0.1, 10 * opt.step_tol);
  }
  return best;
}

}  // namespace snum::detail
