#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "snum/classify.hpp"
#include "support/case_tables.hpp"

using namespace snum;
using namespace snum_test;

namespace {

DecayExponent expect_covered(const ExponentResult& r) {
  EXPECT_TRUE(covered(r));
  return covered(r) ? std::get<DecayExponent>(r) : DecayExponent{-1, "none"};
}

NotCoveredReason expect_not_covered(const ExponentResult& r) {
  EXPECT_FALSE(covered(r));
  return covered(r) ? NotCoveredReason::limiting : std::get<NotCovered>(r).reason;
}

}  // namespace

// ---------------------------------------------------------------------------

TEST(KolmogorovExponent, Examples) {
  auto k = expect_covered(kolmogorov_exponent(make(1, 2, 0.5)));
  EXPECT_DOUBLE_EQ(k.kappa, 0.5);
  EXPECT_EQ(k.case_label, "K(i)");

  k = expect_covered(kolmogorov_exponent(make(1, 4, 0.2)));
  EXPECT_NEAR(k.kappa, 0.4, 1e-15);
  EXPECT_EQ(k.case_label, "K(iv)");

  k = expect_covered(kolmogorov_exponent(make(1, kInf, 1.0)));
  EXPECT_DOUBLE_EQ(k.kappa, 1.5);
  EXPECT_EQ(k.case_label, "K(iii)");

  EXPECT_EQ(expect_not_covered(kolmogorov_exponent(make(1, 4, 0.25))), NotCoveredReason::boundary);
}

TEST(GelfandExponent, Examples) {
  auto g = expect_covered(gelfand_exponent(make(2, 3, 0.7)));
  EXPECT_DOUBLE_EQ(g.kappa, 0.7);
  EXPECT_EQ(g.case_label, "G(i)");

  g = expect_covered(gelfand_exponent(make(1.5, 3, 2.0)));
  EXPECT_NEAR(g.kappa, 13.0 / 6.0, 1e-14);
  EXPECT_EQ(g.case_label, "G(iii)");

  g = expect_covered(gelfand_exponent(make(1.5, 2, 0.2)));
  EXPECT_NEAR(g.kappa, 0.3, 1e-14);
  EXPECT_EQ(g.case_label, "G(vi)");
}

TEST(GelfandExponent, MirrorCasesUnreachableBelowOne) {
  for (double mu : {1e-3, 0.05, 0.4, 3.0}) {
    for (double p2 : {1.5, 2.0, 3.0, kInf}) {
      const auto g = expect_covered(gelfand_exponent(make(0.8, p2, mu)));
      EXPECT_NE(g.case_label, "G(iv)");
      EXPECT_NE(g.case_label, "G(vi)");
    }
  }
}

TEST(ApproximationExponent, Examples) {
  auto a = expect_covered(approximation_exponent(make(2, 2, 0.5)));
  EXPECT_DOUBLE_EQ(a.kappa, 0.5);
  EXPECT_EQ(a.case_label, "A(i)");

  a = expect_covered(approximation_exponent(make(1, kInf, 1.0)));
  EXPECT_DOUBLE_EQ(a.kappa, 1.5);
  EXPECT_EQ(a.case_label, "A(iii)");

  a = expect_covered(approximation_exponent(make(1.5, 4, 0.2)));
  EXPECT_NEAR(a.kappa, 0.3, 1e-14);
  EXPECT_EQ(a.case_label, "A(iv)");
}

TEST(Exponents, TargetNarrowerCaseTwo) {
  // p1 = 2, p2 = 1, mu = 3: 1/p~ = 3.5 > 1 so p~ < p2
  for (auto kind : kAllKinds) {
    const auto r = expect_covered(exponent_for(kind, make(2, 1, 3)));
    EXPECT_DOUBLE_EQ(r.kappa, 2.5);
  }
}

TEST(Exponents, ScreeningOrder) {
  // Limiting case delta = alpha.
  EmbeddingParams p = make(2, 2, 1.0);
  p.s1 = p.s2 + p.alpha;
  for (auto kind : kAllKinds)
    EXPECT_EQ(expect_not_covered(exponent_for(kind, p)), NotCoveredReason::limiting);

  // p2 <= p~ < p1: reported, not thrown, although not compact.
  p = make(3, 1, 0.5);
  EXPECT_FALSE(check_compact(p));
  for (auto kind : kAllKinds)
    EXPECT_EQ(expect_not_covered(exponent_for(kind, p)),
              NotCoveredReason::outside_parameter_range);

  // delta <= 0 with p1 <= p2 throws.
  p = make(1, 4, 0.3);
  p.s1 = p.s2 + 0.5;  // delta = 0.5 - 0.75
  for (auto kind : kAllKinds) EXPECT_THROW(exponent_for(kind, p), NotCompactError);
}

TEST(Exponents, BoundaryWithinRelativeTolerance) {
  const double mu = 0.25 * (1 + 1e-13);
  EXPECT_EQ(expect_not_covered(kolmogorov_exponent(make(1, 4, mu))), NotCoveredReason::boundary);
  const auto k = expect_covered(kolmogorov_exponent(make(1, 4, 0.25 * (1 + 1e-9))));
  EXPECT_EQ(k.case_label, "K(iii)");
}

TEST(Classify, NeverThrowsForValidParameters) {
  EmbeddingParams p = make(1, 4, 0.3);
  p.s1 = p.s2 + 0.5;
  const auto c = classify(p);
  EXPECT_FALSE(c.compact);
  for (auto kind : kAllKinds)
    EXPECT_EQ(std::get<NotCovered>(c.family(kind)).reason, NotCoveredReason::not_compact);
  EXPECT_TRUE(c.equivalences.holds.empty());
  EXPECT_EQ(c.equivalences.omitted.size(), 3u);
}

TEST(Classify, EuclideanCaseOne) {
  const auto c = classify(make(2, 2, 1.0, 1, false));
  EXPECT_TRUE(c.compact);
  EXPECT_FALSE(c.limiting);
  EXPECT_EQ(std::get<DecayExponent>(c.approximation).case_label, "A(i)");
  EXPECT_EQ(std::get<DecayExponent>(c.gelfand).case_label, "G(i)");
  EXPECT_EQ(std::get<DecayExponent>(c.kolmogorov).case_label, "K(i)");
  for (auto kind : kAllKinds) EXPECT_DOUBLE_EQ(std::get<DecayExponent>(c.family(kind)).kappa, 1.0);
}

TEST(CompareWidths, Examples) {
  auto w = compare_widths(make(1, 2, 0.7));
  ASSERT_TRUE(w.contains(WidthPair::a_d));
  bool via_iia = false;
  for (const auto& e : w.holds) via_iia |= e.pair == WidthPair::a_d && e.sub_case == "(ii)(a)";
  EXPECT_TRUE(via_iia);

  w = compare_widths(make(2, 1, 3));
  EXPECT_TRUE(w.contains(WidthPair::a_c));
  EXPECT_TRUE(w.contains(WidthPair::a_d));
  EXPECT_TRUE(w.contains(WidthPair::c_d));

  w = compare_widths(make(3, 4, 0.5));
  ASSERT_TRUE(w.contains(WidthPair::a_c));
  EXPECT_EQ(w.holds.front().sub_case, "(i)(a)");
}

TEST(CompareWidths, OmitsPairsWithUncoveredFamily) {
  const auto w = compare_widths(make(1.5, 4, 0.25));  // only Kolmogorov on its boundary
  EXPECT_FALSE(w.contains(WidthPair::a_d));
  EXPECT_FALSE(w.contains(WidthPair::c_d));
  ASSERT_EQ(w.omitted.size(), 2u);
  EXPECT_EQ(w.omitted[0].reason, "kolmogorov: boundary");
}

// ---------------------------------------------------------------------------
// Property sweeps

TEST(ClassifierProperties, ExactlyOneClauseAgreesWithTable) {
  for (const auto& t : sweep_tuples(10000, 1)) {
    for (bool alpha_binds : {true, false}) {
      const auto p = make(t.p1, t.p2, t.mu, t.d, alpha_binds);
      const std::vector<std::pair<std::vector<Hit>, ExponentResult>> checks = {
          {kolmogorov_table(t.p1, t.p2, t.mu, t.d), kolmogorov_exponent(p)},
          {gelfand_table(t.p1, t.p2, t.mu, t.d), gelfand_exponent(p)},
          {approximation_table(t.p1, t.p2, t.mu, t.d), approximation_exponent(p)}};
      for (const auto& [hits, result] : checks) {
        ASSERT_EQ(hits.size(), 1u) << "p1=" << t.p1 << " p2=" << t.p2 << " mu=" << t.mu;
        ASSERT_TRUE(covered(result));
        const auto& e = std::get<DecayExponent>(result);
        EXPECT_EQ(e.case_label, hits[0].label);
        EXPECT_NEAR(e.kappa, hits[0].kappa, 1e-12 * std::max(1.0, hits[0].kappa));
        EXPECT_GT(e.kappa, 0);
      }
    }
  }
}

TEST(ClassifierProperties, GelfandMirrorsKolmogorov) {
  std::size_t checked = 0;
  for (const auto& t : sweep_tuples(10000, 2)) {
    if (!(t.p1 > 1 && t.p2 > 1 && std::isfinite(t.p1) && std::isfinite(t.p2))) continue;
    // The mirrored tuple must itself be a compact, non-boundary configuration.
    const double m1 = conj(t.p2), m2 = conj(t.p1);
    if (t.mu <= t.d * std::max(rec(m2) - rec(m1), 0.0) * (1 + 1e-6)) continue;
    if (boundary_gap(m1, m2, t.mu, t.d) < 1e-6) continue;
    const auto g = gelfand_exponent(make(t.p1, t.p2, t.mu, t.d));
    const auto k = kolmogorov_exponent(make(m1, m2, t.mu, t.d));
    ASSERT_EQ(covered(g), covered(k));
    if (!covered(g)) continue;
    const auto& ge = std::get<DecayExponent>(g);
    const auto& ke = std::get<DecayExponent>(k);
    EXPECT_EQ(ge.case_label.substr(1), ke.case_label.substr(1));
    EXPECT_NEAR(ge.kappa, ke.kappa, 1e-12 * std::max(1.0, ge.kappa));
    ++checked;
  }
  EXPECT_GT(checked, 1000u);
}

TEST(ClassifierProperties, FineIndicesNeverMatter) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.1, 6.0);
  for (const auto& t : sweep_tuples(2000, 3)) {
    auto p = make(t.p1, t.p2, t.mu, t.d);
    const auto ref = classify(p);
    for (int rep = 0; rep < 3; ++rep) {
      p.q1 = rep == 2 ? kInf : u(rng);
      p.q2 = u(rng);
      const auto c = classify(p);
      EXPECT_EQ(c.approximation, ref.approximation);
      EXPECT_EQ(c.gelfand, ref.gelfand);
      EXPECT_EQ(c.kolmogorov, ref.kolmogorov);
      EXPECT_EQ(c.equivalences, ref.equivalences);
    }
  }
}

TEST(ClassifierProperties, DependsOnlyOnMuOverD) {
  for (const auto& t : sweep_tuples(2000, 4)) {
    const auto ref = classify(make(t.p1, t.p2, t.mu, t.d, true));
    EmbeddingParams p = make(t.p1, t.p2, t.mu, t.d, false);
    p.s1 += 3.0;
    p.s2 += 3.0;
    const auto c = classify(p);
    for (auto kind : kAllKinds) {
      const auto& a = std::get<DecayExponent>(c.family(kind));
      const auto& b = std::get<DecayExponent>(ref.family(kind));
      EXPECT_EQ(a.case_label, b.case_label);
      EXPECT_NEAR(a.kappa, b.kappa, 1e-12 * b.kappa);
    }
  }
}

TEST(ClassifierProperties, KappaNonDecreasingInMuWithinCase) {
  for (const auto& t : sweep_tuples(2000, 5)) {
    const double mu2 = t.mu * 1.0001;
    if (boundary_gap(t.p1, t.p2, mu2, t.d) < 1e-6) continue;
    for (auto kind : kAllKinds) {
      const auto a = exponent_for(kind, make(t.p1, t.p2, t.mu, t.d));
      const auto b = exponent_for(kind, make(t.p1, t.p2, mu2, t.d));
      const auto& ea = std::get<DecayExponent>(a);
      const auto& eb = std::get<DecayExponent>(b);
      if (ea.case_label != eb.case_label) continue;
      EXPECT_GE(eb.kappa, ea.kappa);
    }
  }
}

TEST(ClassifierProperties, EquivalencesMatchEqualExponents) {
  for (const auto& t : sweep_tuples(10000, 6)) {
    const auto c = classify(make(t.p1, t.p2, t.mu, t.d));
    const double a = std::get<DecayExponent>(c.approximation).kappa;
    const double g = std::get<DecayExponent>(c.gelfand).kappa;
    const double k = std::get<DecayExponent>(c.kolmogorov).kappa;
    const auto same = [](double u, double v) { return std::abs(u - v) <= 1e-9 * std::max(u, v); };
    EXPECT_EQ(c.equivalences.contains(WidthPair::a_c), same(a, g));
    EXPECT_EQ(c.equivalences.contains(WidthPair::a_d), same(a, k));
    EXPECT_EQ(c.equivalences.contains(WidthPair::c_d), same(g, k));
  }
}
