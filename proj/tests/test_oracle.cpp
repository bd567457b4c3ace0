#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <numbers>

#include "snum/subspace_oracle.hpp"
#include "support/angle_search.hpp"

using namespace snum;
using namespace snum_test;

namespace {

OracleOptions quick() {
  OracleOptions o;
  o.starts = 8;
  return o;
}

}  // namespace

TEST(SubspaceOracle, SecondWidthsMatchAngleSearch) {
  const double ref_d = n2_kolmogorov(1, 2);
  const double ref_c = n2_gelfand(1, 2);
  EXPECT_NEAR(ref_d, std::sqrt(0.5), 1e-6);
  EXPECT_NEAR(ref_c, std::sqrt(0.5), 1e-6);
  EXPECT_NEAR(subspace_search_oracle({2, 1, 2, 1}, 2, WidthKind::kolmogorov).upper(), ref_d, 1e-4);
  EXPECT_NEAR(subspace_search_oracle({2, 1, 2, 1}, 2, WidthKind::gelfand).upper(), ref_c, 1e-4);
}

TEST(SubspaceOracle, SecondWidthsOffTheDiagonalPairs) {
  for (auto [p, q] : {std::pair{2.0, kInf}, {3.0, 1.5}, {kInf, 1.0}, {1.5, 4.0}}) {
    EXPECT_NEAR(subspace_search_oracle({2, p, q, 1}, 2, WidthKind::kolmogorov, quick()).upper(),
                n2_kolmogorov(p, q), 1e-4)
        << p << " " << q;
    EXPECT_NEAR(subspace_search_oracle({2, p, q, 1}, 2, WidthKind::gelfand, quick()).upper(),
                n2_gelfand(p, q), 1e-4)
        << p << " " << q;
  }
}

TEST(SubspaceOracle, FirstWidthIsOperatorNorm) {
  EXPECT_NEAR(subspace_search_oracle({2, 1, 2, 1}, 1, WidthKind::kolmogorov).upper(), 1.0, 1e-12);
  EXPECT_NEAR(subspace_search_oracle({4, kInf, 1, 1}, 1, WidthKind::gelfand).upper(), 4.0, 1e-12);
  EXPECT_NEAR(subspace_search_oracle({4, 2, 1, 0.5}, 1, WidthKind::kolmogorov).upper(), 1.0, 1e-9);
}

TEST(SubspaceOracle, EuclideanAgreesWithSpectral) {
  for (std::size_t N = 1; N <= 4; ++N)
    for (std::size_t n = 1; n <= N + 1; ++n)
      for (auto kind : {WidthKind::gelfand, WidthKind::kolmogorov}) {
        const double spectral = diagonal_spectral_oracle({std::vector<double>(N, 1.0), 2}, n).upper();
        EXPECT_NEAR(subspace_search_oracle({N, 2, 2, 1}, n, kind, quick()).upper(), spectral, 1e-6);
      }
}

TEST(SubspaceOracle, UpperEstimateOfExactFormula) {
  for (double ps : {1.0, 2.0, kInf})
    for (double pd : {1.0, 2.0, kInf}) {
      if (compare_exponents(pd, ps) > 0) continue;
      for (std::size_t N = 2; N <= 4; ++N)
        for (std::size_t n = 1; n <= N; ++n)
          for (auto kind : {WidthKind::gelfand, WidthKind::kolmogorov}) {
            const FiniteEmbedding e{N, ps, pd, 1};
            const double exact = exact_width_nonincreasing(e, n, kind).upper();
            const double oracle = subspace_search_oracle(e, n, kind, quick()).upper();
            EXPECT_GE(oracle, exact * (1 - 1e-9)) << ps << " " << pd << " N=" << N << " n=" << n;
            EXPECT_LE(oracle, exact * 1.05) << ps << " " << pd << " N=" << N << " n=" << n;
          }
    }
}

TEST(SubspaceOracle, DualPairsAgree) {
  for (std::size_t N = 2; N <= 4; ++N)
    for (std::size_t n = 2; n <= N; ++n)
      for (auto [p, q] : {std::pair{1.0, 2.0}, {2.0, kInf}})
        for (auto kind : {WidthKind::gelfand, WidthKind::kolmogorov}) {
          const FiniteEmbedding e{N, p, q, 1};
          const auto [dual, dual_kind] = dual_transfer(e, kind);
          EXPECT_NEAR(subspace_search_oracle(e, n, kind, quick()).upper(),
                      subspace_search_oracle(dual, n, dual_kind, quick()).upper(), 1e-4);
        }
}

TEST(SubspaceOracle, DualPairsAgreeOnSampledPath) {
  // Neither side has an exact inner path here.
  const FiniteEmbedding e{3, 3, 1.5, 1};
  const auto [dual, dual_kind] = dual_transfer(e, WidthKind::kolmogorov);
  OracleOptions o = quick();
  o.starts = 4;
  EXPECT_NEAR(subspace_search_oracle(e, 2, WidthKind::kolmogorov, o).upper(),
              subspace_search_oracle(dual, 2, dual_kind, o).upper(), 1e-3);
}

TEST(SubspaceOracle, MonotoneAndRankVanishing) {
  for (auto [p, q] : {std::pair{1.0, 2.0}, {2.0, 1.0}, {1.0, kInf}, {kInf, 2.0}})
    for (auto kind : {WidthKind::gelfand, WidthKind::kolmogorov}) {
      double prev = kInf;
      for (std::size_t n = 1; n <= 5; ++n) {
        const double v = subspace_search_oracle({4, p, q, 1}, n, kind, quick()).upper();
        EXPECT_LE(v, prev * (1 + 1e-9));
        EXPECT_EQ(v == 0.0, n > 4);
        prev = v;
      }
    }
}

TEST(SubspaceOracle, QuasiBanachSourceReducesToOne) {
  for (std::size_t n = 1; n <= 3; ++n) {
    const FiniteEmbedding e{3, 0.5, kInf, 1};
    EXPECT_NEAR(subspace_search_oracle(e, n, WidthKind::kolmogorov, quick()).upper(),
                subspace_search_oracle(reduce_quasi_banach(e), n, WidthKind::kolmogorov, quick()).upper(),
                1e-9);
  }
}

TEST(SubspaceOracle, DominatedByApproximationNumbers) {
  for (double ps : {1.0, 2.0, kInf})
    for (double pd : {1.0, 2.0}) {
      if (compare_exponents(pd, ps) > 0) continue;
      for (std::size_t n = 1; n <= 3; ++n) {
        const FiniteEmbedding e{3, ps, pd, 1};
        const double a = exact_width_nonincreasing(e, n, WidthKind::approximation).upper();
        for (auto kind : {WidthKind::gelfand, WidthKind::kolmogorov})
          EXPECT_LE(subspace_search_oracle(e, n, kind, quick()).upper(), a * 1.05);
      }
    }
}

TEST(SubspaceOracle, DeterministicGivenSeed) {
  OracleOptions o = quick();
  o.seed = 17;
  const FiniteEmbedding e{3, 1.5, 4, 1};
  const double a = subspace_search_oracle(e, 2, WidthKind::kolmogorov, o).upper();
  const double b = subspace_search_oracle(e, 2, WidthKind::kolmogorov, o).upper();
  EXPECT_EQ(a, b);
}

TEST(SubspaceOracle, ScaleIsLinear) {
  EXPECT_NEAR(subspace_search_oracle({2, 1, 2, 3.0}, 2, WidthKind::gelfand).upper(), 3.0 * std::sqrt(0.5),
              1e-6);
}

TEST(SubspaceOracle, Refusals) {
  EXPECT_THROW(subspace_search_oracle({7, 1, 2, 1}, 2, WidthKind::gelfand), NotApplicable);
  EXPECT_THROW(subspace_search_oracle({3, 1, 2, 1}, 2, WidthKind::approximation), NotApplicable);
  EXPECT_THROW(subspace_search_oracle({3, 1, 2, 1}, 0, WidthKind::gelfand), ValidationError);
  OracleOptions o;
  o.starts = 0;
  EXPECT_THROW(subspace_search_oracle({3, 1, 2, 1}, 2, WidthKind::gelfand, o), ValidationError);
  EXPECT_EQ(subspace_search_oracle({3, 1, 2, 1}, 4, WidthKind::gelfand).upper(), 0.0);
}
