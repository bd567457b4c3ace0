#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "snum/errors.hpp"
#include "snum/optimize.hpp"
#include "snum/params.hpp"
#include "snum/widths.hpp"

namespace snum {

struct OracleOptions {
  std::size_t starts = 64;
  double step_tol = 1e-8;
  std::size_t budget = 3000;  ///< objective evaluations per start
  std::uint64_t seed = 0;
};

inline constexpr std::size_t kOracleMaxDim = 6;

namespace detail {

// Every matrix here is at most kOracleMaxDim square; fixed capacity keeps the
// inner loops free of heap traffic.
using MatrixXd = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor,
                               kOracleMaxDim, kOracleMaxDim>;
using VectorXd = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kOracleMaxDim, 1>;

inline double lp_norm(const VectorXd& x, double p) {
  if (std::isinf(p)) return x.cwiseAbs().maxCoeff();
  if (p == 2.0) return x.norm();
  if (p == 1.0) return x.cwiseAbs().sum();
  double s = 0;
  for (double v : x) s += std::pow(std::abs(v), p);
  return std::pow(s, 1.0 / p);
}

inline double sgn(double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); }

struct Subset {
  unsigned mask = 0;
  std::array<int, kOracleMaxDim> idx{};
};

/// All subsets of {0..N-1} of size k, ordered by bitmask.
inline const std::vector<Subset>& subsets(std::size_t N, std::size_t k) {
  static const auto table = [] {
    std::array<std::array<std::vector<Subset>, kOracleMaxDim + 1>, kOracleMaxDim + 1> t;
    for (std::size_t n = 0; n <= kOracleMaxDim; ++n)
      for (unsigned m = 0; m < (1u << n); ++m) {
        Subset sub{m, {}};
        int c = 0;
        for (int i = 0; i < static_cast<int>(n); ++i)
          if (m >> i & 1u) sub.idx[static_cast<std::size_t>(c++)] = i;
        t[n][static_cast<std::size_t>(c)].push_back(sub);
      }
    return t;
  }();
  return table[N][k];
}

/// dist_q(x, span B) together with a norming functional y: B^T y = 0,
/// ||y||_{q'} <= 1, <y, x> = dist. `dual` is left empty when unavailable.
struct Distance {
  double value = 0;
  VectorXd dual;
};

inline Distance chebyshev_distance(const VectorXd& x, const MatrixXd& B) {
  const auto N = static_cast<std::size_t>(x.size());
  const auto k = static_cast<std::size_t>(B.cols());
  Distance best;
  if (k == 0) {
    Eigen::Index i;
    best.value = x.cwiseAbs().maxCoeff(&i);
    best.dual = VectorXd::Zero(x.size());
    best.dual(i) = sgn(x(i));
    return best;
  }
  best.value = std::numeric_limits<double>::infinity();
  const double scale = std::max(1.0, x.cwiseAbs().maxCoeff());
  MatrixXd A(k + 1, k + 1);
  VectorXd rhs(k + 1);
  const Subset* best_rows = nullptr;
  VectorXd best_residual;
  for (const Subset& sub : subsets(N, k + 1)) {
    const auto& rows = sub.idx;
    for (unsigned signs = 0; signs < (1u << k); ++signs) {
      for (std::size_t r = 0; r <= k; ++r) {
        A.row(r).head(k) = B.row(rows[r]);
        A(r, k) = (r > 0 && (signs >> (r - 1)) & 1u) ? -1.0 : 1.0;
        rhs(r) = x(rows[r]);
      }
      Eigen::FullPivLU<MatrixXd> lu(A);
      lu.setThreshold(1e-10);
      if (!lu.isInvertible()) continue;
      const VectorXd sol = lu.solve(rhs);
      const double t = std::abs(sol(k));
      if (t >= best.value) continue;
      const VectorXd r = x - B * sol.head(k);
      if (r.cwiseAbs().maxCoeff() > t + 1e-10 * scale) continue;
      best.value = t;
      best_rows = &sub;
      best_residual = r;
    }
  }
  if (!best_rows) {
    best.value = (x - B * (B.transpose() * x)).cwiseAbs().maxCoeff();
    return best;
  }
  // Multipliers on the active rows: B_S^T y_S = 0, sum sign(r_i) y_i = 1.
  MatrixXd D(k + 1, k + 1);
  VectorXd e = VectorXd::Zero(k + 1);
  e(k) = 1.0;
  for (std::size_t r = 0; r <= k; ++r) {
    D.col(r).head(k) = B.row(best_rows->idx[r]).transpose();
    D(k, r) = sgn(best_residual(best_rows->idx[r]));
  }
  Eigen::FullPivLU<MatrixXd> lu(D);
  if (lu.isInvertible() && best.value > 0) {
    const VectorXd ys = lu.solve(e);
    best.dual = VectorXd::Zero(x.size());
    for (std::size_t r = 0; r <= k; ++r) best.dual(best_rows->idx[r]) = ys(r);
    best.dual /= std::max(1.0, ys.cwiseAbs().sum());
  }
  return best;
}

/// Exact for q <= 1: the minimum is attained where k residuals vanish.
inline Distance sparse_distance(const VectorXd& x, const MatrixXd& B, double q) {
  const auto N = static_cast<std::size_t>(x.size());
  const auto k = static_cast<std::size_t>(B.cols());
  Distance best;
  if (k == 0) {
    best.value = lp_norm(x, q);
    if (q == 1.0) best.dual = x.unaryExpr([](double v) { return sgn(v); });
    return best;
  }
  best.value = std::numeric_limits<double>::infinity();
  const Subset* best_rows = nullptr;
  VectorXd best_residual;
  MatrixXd A(k, k);
  VectorXd rhs(k);
  for (const Subset& sub : subsets(N, k)) {
    const auto& rows = sub.idx;
    for (std::size_t r = 0; r < k; ++r) {
      A.row(r) = B.row(rows[r]);
      rhs(r) = x(rows[r]);
    }
    Eigen::FullPivLU<MatrixXd> lu(A);
    lu.setThreshold(1e-10);
    if (!lu.isInvertible()) continue;
    const VectorXd r = x - B * lu.solve(rhs);
    const double v = lp_norm(r, q);
    if (v < best.value) {
      best.value = v;
      best_rows = &sub;
      best_residual = r;
    }
  }
  if (q == 1.0 && best_rows) {
    // y = sign(r) off the zero set S; on S solve B_S^T y_S = -B_{S^c}^T sign(r).
    VectorXd y = best_residual.unaryExpr([](double v) { return sgn(v); });
    for (std::size_t r = 0; r < k; ++r) y(best_rows->idx[r]) = 0;
    MatrixXd BS(k, k);
    for (std::size_t r = 0; r < k; ++r) BS.row(r) = B.row(best_rows->idx[r]);
    const VectorXd ys = BS.transpose().fullPivLu().solve(-(B.transpose() * y));
    for (std::size_t r = 0; r < k; ++r) y(best_rows->idx[r]) = ys(r);
    best.dual = y / std::max(1.0, y.cwiseAbs().maxCoeff());
  }
  return best;
}

/// Damped Newton on sum |x - Bc|^q, used for 2 < q < inf.
inline Distance smooth_distance(const VectorXd& x, const MatrixXd& B, double q) {
  VectorXd c = B.transpose() * x;
  const auto objective = [&](const VectorXd& cc) {
    double s = 0;
    for (double v : VectorXd(x - B * cc)) s += std::pow(std::abs(v), q);
    return s;
  };
  double f = objective(c);
  for (int it = 0; it < 80 && B.cols() > 0; ++it) {
    const VectorXd r = x - B * c;
    const double floor = 1e-12 * std::max(1e-300, r.cwiseAbs().maxCoeff());
    VectorXd g(r.size()), w(r.size());
    for (Eigen::Index i = 0; i < r.size(); ++i) {
      const double a = std::max(std::abs(r(i)), floor);
      g(i) = sgn(r(i)) * std::pow(std::abs(r(i)), q - 1.0);
      w(i) = std::pow(a, q - 2.0);
    }
    const VectorXd grad = -q * (B.transpose() * g);
    MatrixXd H = q * (q - 1.0) * (B.transpose() * w.asDiagonal() * B);
    H.diagonal().array() += 1e-14 * (1.0 + H.trace());
    const VectorXd step = -H.ldlt().solve(grad);
    double t = 1.0, fn = objective(c + step);
    while (fn > f && t > 1e-12) {
      t *= 0.5;
      fn = objective(c + t * step);
    }
    if (fn > f) break;
    c += t * step;
    const bool done = (t * step).norm() <= 1e-15 * (1.0 + c.norm()) || f - fn <= 1e-16 * f;
    f = fn;
    if (done) break;
  }
  Distance out;
  const VectorXd r = x - B * c;
  out.value = lp_norm(r, q);
  if (out.value > 0) {
    out.dual = r.unaryExpr([q](double v) { return sgn(v) * std::pow(std::abs(v), q - 1.0); });
    out.dual /= std::pow(out.value, q - 1.0);
  }
  return out;
}

/// For 1 < q < 2 the primal Hessian blows up at vanishing residuals, which
/// corrupts the norming functional. Solve the dual instead:
/// dist = 1 / min{ ||y||_{q'} : y orthogonal to span B, <x, y> = 1 }, q' > 2.
inline Distance dual_smooth_distance(const VectorXd& x, const MatrixXd& B, double q) {
  const double r = conjugate(q);
  const Eigen::Index N = x.size(), m = N - B.cols();
  MatrixXd C = MatrixXd::Identity(N, N);
  if (B.cols() > 0) {
    Eigen::HouseholderQR<MatrixXd> qr(B);
    C = qr.householderQ() * MatrixXd::Identity(N, N);
  }
  const MatrixXd Cm = C.rightCols(m);
  const VectorXd a = Cm.transpose() * x;
  Distance out;
  if (a.norm() <= 1e-15 * std::max(1.0, x.norm())) {
    out.value = 0;
    return out;
  }
  const VectorXd z0 = a / a.squaredNorm();
  const MatrixXd a_col = a;
  Eigen::HouseholderQR<MatrixXd> qa(a_col);
  const MatrixXd P = (qa.householderQ() * MatrixXd::Identity(m, m)).rightCols(m - 1);
  const MatrixXd CP = Cm * P;
  const VectorXd y0 = Cm * z0;

  const auto objective = [&](const VectorXd& w) {
    double s = 0;
    for (double v : VectorXd(y0 + CP * w)) s += std::pow(std::abs(v), r);
    return s;
  };
  VectorXd w = VectorXd::Zero(m - 1);
  double f = objective(w);
  for (int it = 0; it < 200 && m > 1; ++it) {
    const VectorXd y = y0 + CP * w;
    VectorXd g(N), h(N);
    for (Eigen::Index i = 0; i < N; ++i) {
      g(i) = sgn(y(i)) * std::pow(std::abs(y(i)), r - 1.0);
      h(i) = std::pow(std::abs(y(i)), r - 2.0);
    }
    const VectorXd grad = r * (CP.transpose() * g);
    MatrixXd H = r * (r - 1.0) * (CP.transpose() * h.asDiagonal() * CP);
    H.diagonal().array() += 1e-15 * (1.0 + H.trace());
    const VectorXd step = -H.ldlt().solve(grad);
    double t = 1.0, fn = objective(w + step);
    while (fn > f && t > 1e-12) {
      t *= 0.5;
      fn = objective(w + t * step);
    }
    if (fn > f) break;
    w += t * step;
    const bool done = f - fn <= 1e-16 * f;
    f = fn;
    if (done) break;
  }
  const VectorXd y = y0 + CP * w;
  const double ny = lp_norm(y, r);
  out.value = 1.0 / ny;
  out.dual = y / ny;
  return out;
}

inline Distance distance(const VectorXd& x, const MatrixXd& B, double q) {
  if (std::isinf(q)) return chebyshev_distance(x, B);
  if (q > 1.0 && q < 2.0) return dual_smooth_distance(x, B, q);
  if (q == 2.0) {
    Distance out;
    const VectorXd r = x - B * (B.transpose() * x);
    out.value = r.norm();
    if (out.value > 0) out.dual = r / out.value;
    return out;
  }
  if (q <= 1.0) return sparse_distance(x, B, q);
  return smooth_distance(x, B, q);
}

/// Maximizer of <y, x> over the unit l_p ball, 1 < p < inf.
inline VectorXd norming_point(const VectorXd& y, double p) {
  const double pc = conjugate(p);
  VectorXd x = y.unaryExpr([pc](double v) { return sgn(v) * std::pow(std::abs(v), pc - 1.0); });
  const double nx = lp_norm(x, p);
  return nx > 0 ? VectorXd(x / nx) : x;
}

/// Refines the best probes of a homogeneous ratio with Nelder-Mead. Used only
/// where no exact or monotone inner path is available.
template <class Ratio>
double sampled_sup(const Ratio& ratio, const std::vector<VectorXd>& probes) {
  std::vector<std::pair<double, std::size_t>> scored;
  for (std::size_t i = 0; i < probes.size(); ++i) scored.emplace_back(ratio(probes[i]), i);
  std::sort(scored.begin(), scored.end(), std::greater<>());
  double best = scored.empty() ? 0.0 : scored.front().first;
  for (std::size_t r = 0; r < std::min<std::size_t>(2, scored.size()); ++r) {
    const VectorXd& z0 = probes[scored[r].second];
    const auto f = [&](const std::vector<double>& v) {
      const VectorXd z = Eigen::Map<const VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
      return z.norm() == 0 ? 0.0 : -ratio(z);
    };
    const auto res = nelder_mead(f, std::vector<double>(z0.data(), z0.data() + z0.size()),
                                 {0.2 * z0.norm(), 1e-9, 600, 2});
    best = std::max(best, -res.value);
  }
  return best;
}

/// sup over the unit l_p ball of dist_q(x, span B).
inline double kolmogorov_sup(const MatrixXd& B, double p, double q,
                             const std::vector<VectorXd>& probes) {
  const auto N = B.rows();
  const auto unit = [N](Eigen::Index i) { return VectorXd(VectorXd::Unit(N, i)); };
  if (p <= std::min(1.0, q)) {
    double best = 0;
    for (Eigen::Index i = 0; i < N; ++i) best = std::max(best, distance(unit(i), B, q).value);
    return best;
  }
  if (p == 2.0 && q == 2.0) return B.cols() < N ? 1.0 : 0.0;
  if (std::isinf(p) && q >= 1.0) {
    double best = 0;
    VectorXd x(N);
    for (unsigned s = 0; s < (1u << (N - 1)); ++s) {
      x(0) = 1.0;
      for (Eigen::Index i = 1; i < N; ++i) x(i) = (s >> (i - 1)) & 1u ? -1.0 : 1.0;
      best = std::max(best, distance(x, B, q).value);
    }
    return best;
  }
  if (p > 1.0 && !std::isinf(p) && q >= 1.0) {
    // Ascent x <- argmax_{B_p} <y(x), .>, monotone because dist_q is convex.
    double best = 0;
    const auto climb = [&](VectorXd x) {
      x /= lp_norm(x, p);
      Distance d = distance(x, B, q);
      for (int it = 0; it < 200 && d.dual.size() > 0; ++it) {
        const VectorXd xn = norming_point(d.dual, p);
        const Distance dn = distance(xn, B, q);
        const bool stalled = dn.value <= d.value * (1.0 + 1e-14);
        if (dn.value > d.value) {
          d = dn;
          x = xn;
        }
        if (stalled) break;
      }
      best = std::max(best, d.value);
    };
    for (Eigen::Index i = 0; i < N; ++i) climb(unit(i));
    for (const auto& z : probes) climb(z);
    if (p != 2.0) {
      // Away from p = 2 the local maxima sit near coordinate or sign vectors.
      VectorXd x(N);
      for (unsigned s = 0; s < (1u << (N - 1)); ++s) {
        x(0) = 1.0;
        for (Eigen::Index i = 1; i < N; ++i) x(i) = (s >> (i - 1)) & 1u ? -1.0 : 1.0;
        climb(x);
      }
    }
    return best;
  }
  const auto ratio = [&](const VectorXd& z) { return distance(z, B, q).value / lp_norm(z, p); };
  std::vector<VectorXd> all = probes;
  for (Eigen::Index i = 0; i < N; ++i) all.push_back(unit(i));
  return sampled_sup(ratio, all);
}

/// sup over nonzero x in span M (orthonormal columns) of ||x||_q / ||x||_p.
/// W spans the orthogonal complement of M.
inline double gelfand_sup(const MatrixXd& M, const MatrixXd& W, double p, double q,
                          const std::vector<VectorXd>& probes) {
  const auto N = M.rows();
  const auto m = M.cols();
  const auto k = W.cols();
  if (p == q) return 1.0;
  if (p == 1.0 && q >= 1.0) {
    // Vertices of M cut with the cross-polytope have support of size <= k + 1.
    double best = 0;
    for (std::size_t size = 1; size <= static_cast<std::size_t>(k) + 1; ++size) {
      for (const Subset& sub : subsets(static_cast<std::size_t>(N), size)) {
        const auto& cols = sub.idx;
        MatrixXd C(std::max<Eigen::Index>(k, 1), static_cast<Eigen::Index>(size));
        C.setZero();
        for (std::size_t c = 0; c < size; ++c)
          if (k > 0) C.col(static_cast<Eigen::Index>(c)) = W.row(cols[c]).transpose();
        Eigen::FullPivLU<MatrixXd> lu(C);
        lu.setThreshold(1e-10);
        if (static_cast<std::size_t>(lu.rank()) + 1 != size) continue;
        const VectorXd v = lu.kernel().col(0);
        VectorXd x = VectorXd::Zero(N);
        for (std::size_t c = 0; c < size; ++c) x(cols[c]) = v(static_cast<Eigen::Index>(c));
        best = std::max(best, lp_norm(x, q) / lp_norm(x, 1.0));
      }
    }
    return best;
  }
  if (std::isinf(p) && q >= 1.0) {
    // Vertices of M cut with the cube: m active constraints |x_i| = 1.
    double best = 0;
    MatrixXd A(m, m);
    VectorXd s(m);
    for (const Subset& sub : subsets(static_cast<std::size_t>(N), static_cast<std::size_t>(m))) {
      const auto& rows = sub.idx;
      for (Eigen::Index r = 0; r < m; ++r) A.row(r) = M.row(rows[static_cast<std::size_t>(r)]);
      Eigen::FullPivLU<MatrixXd> lu(A);
      lu.setThreshold(1e-10);
      if (!lu.isInvertible()) continue;
      for (unsigned signs = 0; signs < (1u << (m - 1)); ++signs) {
        s(0) = 1.0;
        for (Eigen::Index r = 1; r < m; ++r) s(r) = (signs >> (r - 1)) & 1u ? -1.0 : 1.0;
        const VectorXd x = M * lu.solve(s);
        const double inf_norm = x.cwiseAbs().maxCoeff();
        if (inf_norm > 1.0 + 1e-9) continue;
        best = std::max(best, lp_norm(x, q) / inf_norm);
      }
    }
    return best;
  }
  if (p == 2.0 && q >= 1.0) {
    // Projected ascent of the convex ||.||_q on the unit sphere of M.
    double best = 0;
    const auto climb = [&](VectorXd x) {
      if (x.norm() == 0) return;
      x.normalize();
      double v = lp_norm(x, q);
      for (int it = 0; it < 200; ++it) {
        VectorXd g(N);
        if (std::isinf(q)) {
          Eigen::Index i;
          x.cwiseAbs().maxCoeff(&i);
          g.setZero();
          g(i) = sgn(x(i));
        } else {
          g = x.unaryExpr([q](double t) { return sgn(t) * std::pow(std::abs(t), q - 1.0); });
        }
        VectorXd xn = M * (M.transpose() * g);
        if (xn.norm() == 0) break;
        xn.normalize();
        const double vn = lp_norm(xn, q);
        if (vn <= v * (1.0 + 1e-14)) {
          v = std::max(v, vn);
          break;
        }
        v = vn;
        x = xn;
      }
      best = std::max(best, v);
    };
    for (Eigen::Index i = 0; i < N; ++i) climb(M * M.row(i).transpose());
    for (const auto& z : probes) climb(M * (M.transpose() * z));
    return best;
  }
  const auto ratio = [&](const VectorXd& z) {
    const VectorXd x = M * z;
    return lp_norm(x, q) / lp_norm(x, p);
  };
  std::vector<VectorXd> coords;
  for (const auto& z : probes) coords.push_back(M.transpose() * z);
  for (Eigen::Index i = 0; i < m; ++i) coords.push_back(VectorXd::Unit(m, i));
  for (Eigen::Index i = 0; i < N; ++i) coords.push_back(M.row(i).transpose());
  return sampled_sup(ratio, coords);
}

inline MatrixXd random_orthogonal(std::size_t N, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  MatrixXd G(N, N);
  for (Eigen::Index c = 0; c < G.cols(); ++c)
    for (Eigen::Index r = 0; r < G.rows(); ++r) G(r, c) = g(rng);
  Eigen::HouseholderQR<MatrixXd> qr(G);
  return qr.householderQ();
}

/// Orthonormal basis of span(R [I; X]); X is (N-k) x k in column-major order.
inline MatrixXd chart_frame(const MatrixXd& R, const std::vector<double>& X, Eigen::Index k) {
  const Eigen::Index N = R.rows();
  const Eigen::Map<const MatrixXd> Xm(X.data(), N - k, k);
  const MatrixXd A = R.leftCols(k) + R.rightCols(N - k) * Xm;
  Eigen::HouseholderQR<MatrixXd> qr(A);
  return qr.householderQ() * MatrixXd::Identity(N, N);
}

}  // namespace detail

/// Upper estimate of c_n or d_n of scale * id : l_{p_src}^N -> l_{p_dst}^N by
/// multi-start search over (n-1)-dimensional subspaces. Each start draws its
/// own stream from (seed, start index), so results do not depend on ordering.
inline WidthResult subspace_search_oracle(const FiniteEmbedding& emb, std::size_t n,
                                          WidthKind kind, const OracleOptions& opt = {}) {
  validate(emb);
  detail::check_index(n);
  if (kind == WidthKind::approximation)
    throw NotApplicable("subspace oracle computes Gelfand and Kolmogorov numbers only");
  if (emb.N > kOracleMaxDim) throw NotApplicable("subspace oracle is limited to N <= 6");
  if (opt.starts < 1) throw ValidationError("starts", "must be >= 1");
  if (!(opt.step_tol > 0)) throw ValidationError("step_tol", "must be > 0");
  if (n > emb.N) return detail::rank_zero(kind, n);

  using detail::MatrixXd;
  using detail::VectorXd;
  const auto N = static_cast<Eigen::Index>(emb.N);
  const auto k = static_cast<Eigen::Index>(n - 1);
  const double p = emb.p_src, q = emb.p_dst;

  const auto evaluate = [&](const MatrixXd& Q, const std::vector<VectorXd>& probes) {
    if (kind == WidthKind::kolmogorov) return detail::kolmogorov_sup(Q.leftCols(k), p, q, probes);
    return detail::gelfand_sup(Q.rightCols(N - k), Q.leftCols(k), p, q, probes);
  };

  double best = std::numeric_limits<double>::infinity();
  const std::size_t starts = k == 0 ? 1 : opt.starts;
  for (std::size_t s = 0; s < starts; ++s) {
    std::seed_seq seq{static_cast<std::uint64_t>(opt.seed), static_cast<std::uint64_t>(s)};
    std::mt19937_64 rng(seq);
    const MatrixXd R = detail::random_orthogonal(emb.N, rng);
    std::vector<VectorXd> probes;
    std::normal_distribution<double> g;
    for (int i = 0; i < 4; ++i) {
      VectorXd z(N);
      for (Eigen::Index j = 0; j < N; ++j) z(j) = g(rng);
      probes.push_back(z);
    }
    const auto objective = [&](const std::vector<double>& X) {
      return evaluate(detail::chart_frame(R, X, k), probes);
    };
    const std::vector<double> x0(static_cast<std::size_t>((N - k) * k), 0.0);
    const auto res = detail::nelder_mead(objective, x0, {0.5, opt.step_tol, opt.budget, 4});
    best = std::min(best, res.value);
  }
  return {kind, n, emb.scale * best, WidthMethod::oracle_subspace};
}

}  // namespace snum
