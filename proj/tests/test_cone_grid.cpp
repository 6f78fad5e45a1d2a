#include <gtest/gtest.h>

#include <chrono>
#include <cmath>

#include "conelab/cone_grid.hpp"
#include "oracles.hpp"

using namespace conelab;

namespace {

const AngularDomain hemi = AngularDomain::cap(3, pi / 2);

ConeGridOptions fine_grid() { return {1000, 1000, 16}; }

}  // namespace

TEST(ConeGrid, AnnularEigenvalueMatchesBessel) {
  const auto ev = annular_eigenvalue(hemi, 1.0, 2.0, MatrixModel::identity(), fine_grid());
  EXPECT_EQ(ev.argmin_mode, 1u);
  EXPECT_NEAR(ev.lambda / oracle::annulus_eigenvalue(2.0, 3, 1.0), 1.0, 1e-4);
  const auto cap = AngularDomain::cap(4, 1.0);
  const double lc = oracle::cap_principal_eigenvalue(1.0, 4);
  const auto ec = annular_eigenvalue(cap, 3.0, 1.5, MatrixModel::identity(), fine_grid());
  EXPECT_NEAR(ec.lambda / oracle::annulus_eigenvalue(lc, 4, 3.0, 1.5), 1.0, 1e-3);
}

TEST(ConeGrid, AnnularEigenvalueScalesExactly) {
  const auto basis = default_angular_basis(hemi, {});
  const double a = annular_eigenvalue(basis, 1.0, 2.0, MatrixModel::identity()).lambda;
  const double b = annular_eigenvalue(basis, 4.0, 2.0, MatrixModel::identity()).lambda;
  EXPECT_NEAR(b * 16.0 / a, 1.0, 1e-6);
}

TEST(ConeGrid, FullSphereUsesPureRadialMode) {
  const auto full = AngularDomain::full_sphere(3);
  const auto ev = annular_eigenvalue(full, 1.0, 2.0, MatrixModel::identity(), fine_grid());
  EXPECT_EQ(ev.argmin_mode, 1u);
  // lambda_1 is zero up to round-off on the discrete sphere.
  const double radial = radial_dirichlet_eigenvalue(3, 0.0, std::log(2.0), [](double) { return 0.0; }, 1000);
  EXPECT_NEAR(ev.lambda / radial, 1.0, 1e-9);
  EXPECT_NEAR(radial / (pi * pi), 1.0, 1e-5);  // u = r R solves -u'' = Lambda u on (1, 2)
  EXPECT_NEAR(ev.lambda / oracle::annulus_eigenvalue(0.0, 3, 1.0), 1.0, 1e-5);
}

TEST(ConeGrid, AnnularEigenvalueMonotone) {
  const auto id = MatrixModel::identity();
  const double small = annular_eigenvalue(AngularDomain::cap(3, 1.0), 1.0, 2.0, id).lambda;
  const double big = annular_eigenvalue(AngularDomain::cap(3, 2.0), 1.0, 2.0, id).lambda;
  EXPECT_GT(small, big);
  const double thin = annular_eigenvalue(hemi, 1.0, 2.0, id).lambda;
  const double thick = annular_eigenvalue(hemi, 1.0, 3.0, id).lambda;
  EXPECT_GT(thin, thick);
}

TEST(ConeGrid, ExtraModesDoNotChangeMinimum) {
  ConeGridOptions few{400, 400, 4}, many{400, 400, 32};
  const auto a = annular_eigenvalue(hemi, 1.0, 2.0, MatrixModel::identity(), few);
  const auto b = annular_eigenvalue(hemi, 1.0, 2.0, MatrixModel::identity(), many);
  EXPECT_EQ(a.lambda, b.lambda);
  EXPECT_LT(b.mode_values.size(), 32u);
}

TEST(ConeGrid, ScalingCurveIdentityIsFlat) {
  const double rhos[] = {1, 2, 4, 8};
  const auto c = scaling_curve(hemi, MatrixModel::identity(), rhos);
  ASSERT_EQ(c.rows.size(), 4u);
  EXPECT_LE(c.spread - 1.0, 1e-6);
  const double wide[] = {1, 10, 100};
  EXPECT_LE(scaling_curve(hemi, MatrixModel::identity(), wide).spread - 1.0, 1e-6);
  EXPECT_TRUE(scaling_curve(hemi, MatrixModel::identity(), {}).rows.empty());
}

TEST(ConeGrid, ScalingCurveGalleryWithinEllipticity) {
  const double rhos[] = {3, 6, 12, 24};
  for (const auto& c : {RadialCoefficient::constant(-3.0, 3), RadialCoefficient::log_corrected(-3.0, 3)}) {
    const auto w = ellipticity_window(c, 2.0);
    const auto curve = scaling_curve(hemi, MatrixModel::radial_angular(c, 2.0), rhos);
    EXPECT_LE(curve.spread, w.nu * w.nu) << c.name();
  }
}

TEST(ConeGrid, MeshGeometry) {
  const auto m = make_cone_mesh(hemi, 1.0, 10.0, 32, 40.0, MatrixModel::identity());
  EXPECT_NEAR(std::exp(m.t.back()), 10.0, 1e-12);
  EXPECT_EQ(m.radial_count(), 41u);
  EXPECT_TRUE(m.is_boundary(0, 5));
  EXPECT_TRUE(m.is_boundary(3, 33));   // cap edge
  EXPECT_FALSE(m.is_boundary(3, 0));   // pole
  EXPECT_TRUE(m.is_interior(3, 1));
  EXPECT_THROW(make_cone_mesh(hemi, 1.0, 10.0, 32, 10.0, MatrixModel::identity()), Error);
  EXPECT_THROW(make_cone_mesh(hemi, 1.0, 10.0, 32, 40.0,
                              MatrixModel::radial_angular(RadialCoefficient::log_corrected(-3, 3), 2.0)),
               Error);
}

TEST(ConeGrid, MaximumPrincipleHolds) {
  const auto id = maximum_principle_check(make_cone_mesh(hemi, 1.0, 10.0, 32, 40.0, MatrixModel::identity()));
  EXPECT_TRUE(id.passed());
  EXPECT_GE(id.worst_sample_min, 0.0);
  const auto ld = maximum_principle_check(make_cone_mesh(
      hemi, 3.0, 300.0, 32, 40.0, MatrixModel::radial_angular(RadialCoefficient::oscillating(-3, 0.2, 1, 3), 2.0)));
  EXPECT_TRUE(ld.passed());
}

TEST(ConeGrid, CorruptedStencilDetected) {
  auto op = assemble_cone(make_cone_mesh(hemi, 1.0, 10.0, 32, 40.0, MatrixModel::identity()));
  const auto& m = op.mesh;
  op.stiffness.coeffRef(static_cast<Eigen::Index>(m.index(3, 3)), static_cast<Eigen::Index>(m.index(3, 4))) = 0.5;
  EXPECT_FALSE(maximum_principle_check(op, 0).m_matrix);
}

TEST(ConeGrid, HarmonicExtensionReproducesRadialHarmonic) {
  // a + b / r is harmonic in R^3 and constant in angle.
  const auto full = AngularDomain::full_sphere(3);
  const auto op = assemble_cone(make_cone_mesh(full, 1.0, 4.0, 24, 200.0, MatrixModel::identity()));
  const auto& m = op.mesh;
  auto exact = [](double r) { return 2.0 - 1.0 / r; };
  DiscreteField u{std::vector<double>(m.size(), 0.0)};
  for (std::size_t k = 0; k < m.size(); ++k)
    if (op.boundary[k]) u[k] = exact(std::exp(m.t[k / m.slots()]));
  harmonic_extension(op, u);
  double worst = 0.0;
  for (std::size_t k = 0; k < m.size(); ++k)
    if (op.interior[k]) worst = std::max(worst, std::abs(u[k] - exact(std::exp(m.t[k / m.slots()]))));
  EXPECT_LT(worst, 1e-4);
}

TEST(ConeGrid, DirectAndIterativeSolvesAgree) {
  const auto op = assemble_cone(make_cone_mesh(hemi, 1.0, 8.0, 32, 64.0, MatrixModel::identity()));
  std::vector<double> b(op.mesh.size(), 0.0), x_cg(op.mesh.size(), 0.0), x_ldlt(op.mesh.size(), 0.0);
  for (std::size_t k = 0; k < b.size(); ++k)
    if (op.interior[k]) b[k] = std::sin(0.01 * static_cast<double>(k)) + 1.0;
  conjugate_gradient(op.stiffness, {}, op.interior, b, x_cg, 1e-13);
  ActiveFactor(op.stiffness, {}, op.interior).solve(b, x_ldlt);
  double scale = 0.0, diff = 0.0;
  for (std::size_t k = 0; k < b.size(); ++k) {
    scale = std::max(scale, std::abs(x_ldlt[k]));
    diff = std::max(diff, std::abs(x_cg[k] - x_ldlt[k]));
  }
  EXPECT_LT(diff, 1e-9 * scale);
}

TEST(ConeGrid, HarnackExponentBelowFundamental) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto rep = harnack_exponent(hemi, AngularDomain::cap(3, pi / 4), MatrixModel::identity(), 1.0, 3, 1);
  EXPECT_GT(rep.c_s, 0.0);
  EXPECT_LT(rep.c_s, 1.0);
  EXPECT_LE(rep.alpha, 2.0 - 3.0);
  EXPECT_EQ(rep.level_ratio.size(), 3u);
  for (double r : rep.level_ratio) EXPECT_NEAR(r / rep.level_ratio[0], 1.0, 0.1);
  EXPECT_LT(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(), 30.0);
}

TEST(ConeGrid, HarnackSampledKernelsBoundExhaustiveOne) {
  const auto inner = AngularDomain::cap(3, pi / 4);
  const double all = harnack_ratio(hemi, inner, MatrixModel::identity(), 1.0, 7, {32, 48, 0});
  const double some = harnack_ratio(hemi, inner, MatrixModel::identity(), 1.0, 7, {32, 48, 20});
  EXPECT_GE(some, all);
}

TEST(ConeGrid, HarnackPreconditions) {
  const auto inner = AngularDomain::cap(3, pi / 4);
  EXPECT_THROW(harnack_exponent(hemi, inner, MatrixModel::identity(), 1.0, 2, 1), Error);
  EXPECT_THROW(harnack_exponent(hemi, hemi, MatrixModel::identity(), 1.0, 3, 1), Error);
}
