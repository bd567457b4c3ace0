#include <gtest/gtest.h>

#include <cmath>
#include <string>

#include "snum/rate_fit.hpp"
#include "snum/widths.hpp"

using namespace snum;

namespace {

EmbeddingParams with_gap(double p1, double p2, double alpha, double delta, int d = 1) {
  EmbeddingParams p;
  p.p1 = p1;
  p.p2 = p2;
  p.alpha = alpha;
  p.d = d;
  p.s2 = 0;
  p.s1 = delta + d * (inv(p1) - inv(p2));
  return p;
}

const std::vector<double>& acceptance_grid() {
  static const auto g = geometric_grid(16, 4096);
  return g;
}

}  // namespace

TEST(FitLogLog, ExactPowerLaw) {
  std::vector<RateSample> s;
  for (double n : geometric_grid(16, 4096)) s.push_back({n, 7 * std::pow(n, -0.75)});
  const auto f = fit_loglog(s);
  EXPECT_NEAR(f.slope, -0.75, 1e-12);
  EXPECT_NEAR(f.intercept, std::log(7.0), 1e-10);
  EXPECT_NEAR(f.max_residual, 0.0, 1e-12);
  EXPECT_EQ(f.used, 9u);
}

TEST(FitLogLog, TrimsTenPercentAtEachEnd) {
  std::vector<RateSample> s;
  for (int k = 0; k < 20; ++k) {
    const double n = std::exp2(k);
    s.push_back({n, std::pow(n, -2.0)});
  }
  s[0].bound *= 50;
  s[1].bound *= 0.01;
  s[19].bound *= 1e6;
  s[18].bound *= 3;
  const auto f = fit_loglog(s);
  EXPECT_EQ(f.used, 16u);
  EXPECT_NEAR(f.slope, -2.0, 1e-12);
}

TEST(FitLogLog, Refusals) {
  EXPECT_THROW(fit_loglog({{1, 1}}), ValidationError);
  EXPECT_THROW(fit_loglog({{2, 1}, {2, 0.5}}), ValidationError);
  EXPECT_THROW(fit_loglog({{2, 1}, {3, 0}}), ValidationError);
  EXPECT_THROW(fit_loglog({{0.5, 1}, {3, 1}}), ValidationError);
}

TEST(GeometricGrid, Examples) {
  EXPECT_EQ(geometric_grid(16, 4096), (std::vector<double>{16, 32, 64, 128, 256, 512, 1024, 2048, 4096}));
  EXPECT_EQ(geometric_grid(1, 10, 3), (std::vector<double>{1, 3, 9}));
  EXPECT_EQ(geometric_grid(1, 3, 1.2), (std::vector<double>{1, 2, 3}));
  EXPECT_THROW(geometric_grid(0, 10), ValidationError);
  EXPECT_THROW(geometric_grid(10, 5), ValidationError);
  EXPECT_THROW(geometric_grid(1, 5, 1), ValidationError);
}

TEST(VerifyExponent, EuclideanCaseOne) {
  const auto p = with_gap(2, 2, 1, 2);
  for (auto kind : kAllKinds) {
    const auto f = verify_exponent(p, kind, acceptance_grid());
    EXPECT_DOUBLE_EQ(f.predicted_kappa, 1.0);
    EXPECT_GE(f.slope, -1.1);
    EXPECT_LE(f.slope, -0.9);
    EXPECT_TRUE(f.pass);
    EXPECT_FALSE(f.shape_only);
    EXPECT_EQ(f.samples.size(), 9u);
    EXPECT_LE(f.truncation.levels, 14);
    EXPECT_LE(f.truncation.tail_share, 0.01);
  }
}

TEST(VerifyExponent, SamplesAreValidUpperBoundsOfTheModel) {
  // l_2 blocks: the merged diagonal of the box gives the exact value.
  const auto p = with_gap(2, 2, 1, 2);
  const auto f = verify_exponent(p, WidthKind::approximation, acceptance_grid());
  std::vector<double> merged;
  for (const auto& b : build_blocks({p, f.truncation.levels, f.truncation.levels}))
    merged.insert(merged.end(), static_cast<std::size_t>(b.dim), b.sigma);
  for (const auto& s : f.samples)
    EXPECT_GE(s.bound, diagonal_spectral_oracle({merged, 2}, static_cast<std::size_t>(s.n)).upper());
}

TEST(VerifyExponent, RateFidelityWhenDeltaAndAlphaAreSeparated) {
  // The correction to the pure power law decays like n^{-c|delta - alpha|}; on
  // the acceptance grid it is below the tolerance once the gap is >= 1 in d = 1
  // for case (i) and >= 2 for case (ii).
  struct Case {
    double p1, p2, alpha, delta;
  };
  for (Case c : {Case{2, 2, 1, 2}, Case{2, 2, 2, 1}, Case{2, 2, 1, 3}, Case{1, 1, 1, 2}, Case{kInf, kInf, 1, 2},
                 Case{2, 1, 3, 6}, Case{2, 1, 3, 9}, Case{4, 2, 1, 3}, Case{3, 1.5, 2, 4}})
    for (auto kind : kAllKinds) {
      const auto f = verify_exponent(with_gap(c.p1, c.p2, c.alpha, c.delta), kind, acceptance_grid());
      EXPECT_TRUE(f.pass) << c.p1 << " " << c.p2 << " " << c.alpha << " " << c.delta << " " << to_string(kind)
                          << " slope " << f.slope << " kappa " << f.predicted_kappa;
    }
}

TEST(VerifyExponent, CaseTwoApproachesItsExponentOnLargerGrids) {
  // alpha = 3, delta = 4: the model converges slowly; the fitted slope moves
  // towards -2.5 as the window moves out.
  const auto p = with_gap(2, 1, 3, 4);
  VerifyOptions o;
  o.max_level = 24;
  o.tolerance = 0.1;
  const double near = verify_exponent(p, WidthKind::approximation, acceptance_grid(), o).slope;
  const double far = verify_exponent(p, WidthKind::approximation, geometric_grid(1 << 12, 1 << 20), o).slope;
  EXPECT_LT(far, near);
  EXPECT_NEAR(far, -2.5, 0.1);
}

TEST(VerifyExponent, WorkersDoNotChangeTheResult) {
  const auto p = with_gap(2, 1, 3, 6);
  VerifyOptions one, many;
  many.workers = 4;
  const auto a = verify_exponent(p, WidthKind::gelfand, acceptance_grid(), one);
  const auto b = verify_exponent(p, WidthKind::gelfand, acceptance_grid(), many);
  EXPECT_EQ(a.samples, b.samples);
  EXPECT_EQ(a.slope, b.slope);
}

TEST(VerifyExponent, Refusals) {
  // limiting case delta = alpha
  EXPECT_THROW(verify_exponent(with_gap(2, 2, 1, 1), WidthKind::approximation, acceptance_grid()),
               VerificationRefused);
  VerifyOptions bad;
  bad.tolerance = 0;
  EXPECT_THROW(verify_exponent(with_gap(2, 2, 1, 2), WidthKind::approximation, acceptance_grid(), bad),
               ValidationError);
  EXPECT_THROW(verify_exponent(with_gap(2, 2, 1, 2), WidthKind::approximation, {16}), ValidationError);
  EXPECT_THROW(verify_exponent(with_gap(2, 2, 1, 2), WidthKind::approximation, {32, 16}), ValidationError);
}

TEST(VerifyExponent, TruncationLimitIsNamed) {
  VerifyOptions o;
  o.max_level = 3;
  try {
    verify_exponent(with_gap(2, 2, 1, 2), WidthKind::kolmogorov, acceptance_grid(), o);
    FAIL() << "expected TruncationError";
  } catch (const TruncationError& e) {
    EXPECT_NE(std::string(e.what()).find("J/I limit J = I = 3"), std::string::npos) << e.what();
  }
}

TEST(VerifyExponent, EnvelopesNeedConsent) {
  const auto p = with_gap(1, kInf, 1, 2);
  EXPECT_THROW(verify_exponent(p, WidthKind::gelfand, acceptance_grid()), VerificationRefused);
  VerifyOptions o;
  o.allow_envelope = true;
  const auto f = verify_exponent(p, WidthKind::gelfand, acceptance_grid(), o);
  EXPECT_TRUE(f.shape_only);
}

TEST(VerifyExponent, ReportsTheRemainderEstimate) {
  const auto p = with_gap(2, 1, 3, 6);
  const auto f = verify_exponent(p, WidthKind::approximation, acceptance_grid());
  const double x = 3.0;  // mu / d; kappa = 2.5 < x, so 1/beta clamps to 0
  EXPECT_TRUE(std::isinf(f.truncation.beta));
  EXPECT_NEAR(1.0 / f.truncation.remainder.r, x / 2, 1e-12);
  const auto g = verify_exponent(with_gap(2, 2, 1, 2), WidthKind::approximation, acceptance_grid());
  EXPECT_NEAR(1.0 / g.truncation.remainder.r, 0.5, 1e-12);
  EXPECT_EQ(f.truncation.cutoff, 12);
  EXPECT_GT(f.truncation.remainder.value, 0.0);
  EXPECT_EQ(f.combination_exponent, 2.0);
}
