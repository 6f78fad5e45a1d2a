#include <gtest/gtest.h>

#include <cmath>

#include "conelab/minimal_solutions.hpp"
#include "oracles.hpp"

using namespace conelab;

namespace {

const AngularDomain hemi = AngularDomain::cap(3, pi / 2);
const AngularDomain quarter = AngularDomain::cap(3, pi / 4);

MinimalSolutionSeries bump_series(const AngularDomain& d, std::size_t K, std::size_t n = 2000) {
  const auto basis = eigen_basis(assemble(d, n), K + 1);
  return build_series(basis, Bump::for_domain(d), K);
}

}  // namespace

TEST(MinimalSolutions, HemisphereExponents) {
  const auto s = bump_series(hemi, 5);
  EXPECT_GT(s.psi_k[0], 0.0);
  for (int k = 1; k <= 5; ++k) {
    EXPECT_NEAR(s.alpha_k[k - 1], oracle::alpha_minus(oracle::hemisphere_eigenvalue(k), 3), 2e-3) << k;
  }
}

TEST(MinimalSolutions, GradientNormEqualsAbsAlpha) {
  const auto s = bump_series(hemi, 5);
  for (std::size_t k = 1; k <= 5; ++k) {
    const auto g = gradient_norm_check(s, k);
    EXPECT_LT(g.relative_gap, 5e-3) << k;
  }
  EXPECT_NEAR(gradient_norm_check(s, 1).energy, 2.0, 1e-3);
  for (std::size_t a = 1; a <= 5; ++a)
    for (std::size_t b = 1; b <= 5; ++b)
      if (a != b) {
        EXPECT_LT(std::abs(gradient_pairing(s, a, b)), 1e-8);
      }
}

TEST(MinimalSolutions, FullSphereGradientNorm) {
  const auto s = bump_series(AngularDomain::full_sphere(3), 3);
  EXPECT_NEAR(gradient_norm_check(s, 1).energy, 1.0, 1e-6);
  EXPECT_NEAR(s.alpha_k[0], -1.0, 1e-9);
}

TEST(MinimalSolutions, EigenfunctionDataGivesSingleTerm) {
  const auto basis = eigen_basis(assemble(hemi, 800), 4);
  const auto s = build_series(basis, basis.phi[0], 4);
  EXPECT_NEAR(s.psi_k[0], 1.0, 1e-12);
  for (std::size_t k = 1; k < 4; ++k) EXPECT_NEAR(s.psi_k[k], 0.0, 1e-12);
  const double th = basis.mesh.theta[100];
  EXPECT_NEAR(evaluate(s, 1.0, th), basis.phi[0][100], 1e-12);
  EXPECT_NEAR(evaluate(s, 10.0, th), std::pow(10.0, s.alpha_k[0]) * basis.phi[0][100], 1e-12);
}

TEST(MinimalSolutions, SeriesPreconditions) {
  const auto basis = eigen_basis(assemble(hemi, 400), 4);
  const std::vector<double> zero(basis.mesh.size(), 0.0);
  EXPECT_THROW(build_series(basis, zero, 2), Error);
  std::vector<double> neg(basis.mesh.size(), 1.0);
  neg[3] = -1.0;
  EXPECT_THROW(build_series(basis, neg, 2), Error);
  EXPECT_THROW(build_series(basis, Bump::for_domain(hemi), 5), Error);
  const auto s = build_series(basis, Bump::for_domain(hemi), 2);
  EXPECT_THROW(evaluate(s, 0.5, 0.3), Error);
}

TEST(MinimalSolutions, LeadingTermDominates) {
  const auto s = bump_series(hemi, 5);
  const double th = 0.4;
  const double lead = s.psi_k[0] * std::pow(1e4, s.alpha_k[0]) * s.decomposition.interpolate(0, th);
  EXPECT_NEAR(evaluate(s, 1e4, th) / lead, 1.0, 1e-6);
  EXPECT_NEAR(evaluate(s, 3.0, pi / 2), 0.0, 1e-12);
}

TEST(MinimalSolutions, LowerBoundStabilizes) {
  const auto s = bump_series(hemi, 8);
  const auto lb = lower_bound_check(s, quarter, 2.0);
  EXPECT_TRUE(lb.pass);
  EXPECT_GT(lb.c, 0.0);
  EXPECT_LE(lb.last_decade_variation, 0.01);
  EXPECT_THROW(lower_bound_check(s, hemi, 2.0), Error);
}

TEST(MinimalSolutions, LowerBoundSingleTermIsExact) {
  const auto basis = eigen_basis(assemble(hemi, 800), 2);
  const auto s = build_series(basis, Bump::for_domain(hemi), 1);
  const auto lb = lower_bound_check(s, quarter, 2.0);
  double m = 1e300;
  for (auto i : nodes_in(s, quarter)) m = std::min(m, basis.phi[0][i]);
  EXPECT_NEAR(lb.c, s.psi_k[0] * m, 1e-12 * lb.c);
}

TEST(MinimalSolutions, LowerBoundIsLinearInData) {
  const auto basis = eigen_basis(assemble(hemi, 800), 6);
  std::vector<double> psi(basis.mesh.size());
  const auto bump = Bump::for_domain(hemi);
  for (std::size_t i = 0; i < psi.size(); ++i) psi[i] = bump(basis.mesh.theta[i]);
  auto scaled = psi;
  for (double& v : scaled) v *= 7.5;
  const double a = lower_bound_check(build_series(basis, psi, 5), quarter, 2.0).c;
  const double b = lower_bound_check(build_series(basis, scaled, 5), quarter, 2.0).c;
  EXPECT_NEAR(b / a, 7.5, 1e-10);
}

TEST(MinimalSolutions, TailBound) {
  const auto s = bump_series(hemi, 8);
  const double rhos[] = {10.0, 100.0};
  const auto tb = tail_bound_check(s, quarter, rhos);
  EXPECT_TRUE(tb.pass);
  double prev = 1e300;
  for (double r : {10.0, 100.0, 1000.0}) {
    const double ratio = tail_constant(s, quarter, r) * std::pow(r, s.alpha_k[1] - s.alpha_k[0]);
    EXPECT_LT(ratio, prev);
    prev = ratio;
  }
  const auto basis = eigen_basis(assemble(hemi, 800), 2);
  const auto one = build_series(basis, Bump::for_domain(hemi), 1);
  EXPECT_THROW(tail_constant(one, quarter, 10.0), Error);
}

TEST(MinimalSolutions, FundamentalUpperBound) {
  const auto h = fundamental_upper_check(bump_series(hemi, 5));
  EXPECT_TRUE(h.pass());
  EXPECT_LT(h.alpha_1, h.fundamental_exponent);
  const auto f = fundamental_upper_check(bump_series(AngularDomain::full_sphere(3), 3));
  EXPECT_TRUE(f.pass());
  EXPECT_NEAR(f.alpha_1, -1.0, 1e-9);
  const auto c = fundamental_upper_check(bump_series(AngularDomain::cap(3, 2.5), 4));
  EXPECT_LT(c.alpha_1, c.fundamental_exponent);
}

TEST(MinimalSolutions, SeriesJsonCarriesDescriptor) {
  nlohmann::json j = bump_series(hemi, 3, 400);
  EXPECT_EQ(j.at("psi").at("shape"), "cos^2");
  EXPECT_EQ(j.at("K"), 3);
}
