#include <gtest/gtest.h>

#include <cmath>

#include "conelab/certificates.hpp"
#include "oracles.hpp"

using namespace conelab;

namespace {

const AngularDomain hemi = AngularDomain::cap(3, pi / 2);

ConeOperator weak_operator(const AngularDomain& d = hemi) {
  return assemble_cone(make_cone_mesh(d, 1.0, 100.0, 64, 64.0, MatrixModel::identity()));
}

}  // namespace

TEST(Certificates, PrincipalModeIsSupNormalized) {
  const auto m = principal_mode(hemi, 1000);
  EXPECT_NEAR(m.lambda1, 2.0, 1e-4);
  EXPECT_DOUBLE_EQ(*std::max_element(m.phi.begin(), m.phi.end()), 1.0);
  EXPECT_NEAR(supersolution_cmax(hemi, 3.0), std::sqrt(2.0), 1e-4);
}

TEST(Certificates, StrongPassesAboveCritical) {
  const auto c = verify_supersolution_strong(hemi, 3.0, 1.0);
  EXPECT_TRUE(c.pass());
  EXPECT_GE(*c.strong_margin, 1.0 - 1e-6);  // 2 - cos^2 >= 1
  for (double p : {2.05, 2.5, 3.0, 4.0}) {
    const auto cert = verify_supersolution_strong(hemi, p, 0.5 * supersolution_cmax(hemi, p));
    EXPECT_TRUE(cert.pass()) << p;
  }
}

TEST(Certificates, StrongFailsAtAndBelowCritical) {
  for (double p : {1.5, 2.0})
    for (int i = 0; i < 25; ++i) {
      const double c = std::pow(10.0, -6.0 + 0.5 * i);
      EXPECT_FALSE(verify_supersolution_strong(hemi, p, c).pass()) << p << ' ' << c;
    }
}

TEST(Certificates, StrongImpliesWeak) {
  const auto op = weak_operator();
  for (double p : {2.5, 3.0, 4.0}) {
    const double c = 0.5 * supersolution_cmax(hemi, p);
    ASSERT_TRUE(verify_supersolution_strong(hemi, p, c).pass());
    const auto u = power_candidate(op.mesh, c, homogeneity_exponent(p));
    for (int trials : {1, 10, 100}) EXPECT_TRUE(verify_supersolution_weak(op, u, p, trials, 42).pass()) << p;
  }
}

TEST(Certificates, WeakRejectsConstantField) {
  const auto op = weak_operator();
  const DiscreteField one{std::vector<double>(op.mesh.size(), 1.0)};
  const auto cert = verify_supersolution_weak(op, one, 2.0, 20, 3);
  EXPECT_FALSE(cert.pass());
  EXPECT_LT(*cert.weak_margin, -0.5);
}

TEST(Certificates, WeakWithoutTrialsIsVacuous) {
  const auto op = weak_operator();
  const DiscreteField one{std::vector<double>(op.mesh.size(), 1.0)};
  const auto cert = verify_supersolution_weak(op, one, 2.0, 0, 3);
  EXPECT_TRUE(cert.pass());
  EXPECT_EQ(cert.flags, std::vector<std::string>{"no-trials"});
  EXPECT_FALSE(cert.weak_margin.has_value());
}

TEST(Certificates, WeakRejectsNonpositiveField) {
  const auto op = weak_operator();
  const DiscreteField zero{std::vector<double>(op.mesh.size(), 0.0)};
  EXPECT_THROW(verify_supersolution_weak(op, zero, 2.0, 5, 1), Error);
}

TEST(Certificates, PowerLift) {
  const auto op = weak_operator();
  const double c = 0.5 * supersolution_cmax(hemi, 3.0);
  const auto u = power_candidate(op.mesh, c, homogeneity_exponent(3.0));
  ASSERT_TRUE(verify_supersolution_weak(op, u, 3.0, 100, 9).pass());
  for (double p : {3.5, 4.0, 6.0}) EXPECT_TRUE(verify_supersolution_weak(op, power_lift(u, 3.0, p), p, 100, 9).pass());
  EXPECT_EQ(power_lift(u, 3.0, 3.0).values, u.values);
  const DiscreteField one{std::vector<double>(5, 1.0)};
  for (double v : power_lift(one, 3.0, 4.0).values) EXPECT_NEAR(v, std::pow(1.5, 1.0 / (1.0 - 4.0)), 1e-15);
  EXPECT_THROW(power_lift(one, 3.0, 2.0), Error);
}

TEST(Certificates, NonexistenceBelowCritical) {
  for (double p : {1.1, 1.3, 1.5, 1.7, 1.9}) {
    const auto cert = nonexistence_certificate(hemi, p, -2.0, 1.0);
    EXPECT_TRUE(cert.pass) << p;
    EXPECT_GT(cert.mu, cert.Lambda1);
    EXPECT_NEAR(cert.mu, std::pow(2.0 * cert.R_star, -2.0 * (p - 1.0)), 1e-12 * cert.mu);
  }
}

TEST(Certificates, NonexistenceWitnessMatchesBessel) {
  const auto cert = nonexistence_certificate(hemi, 1.5, -2.0, 1.0);
  const double l1 = oracle::cap_principal_eigenvalue(cert.inner.theta1(), 3);
  const double ref = oracle::annulus_eigenvalue(l1, 3, cert.R_star);
  EXPECT_NEAR(cert.Lambda1 / ref, 1.0, 1e-3);
}

TEST(Certificates, SmallConstantStillTerminates) {
  const auto a = nonexistence_certificate(hemi, 1.5, -2.0, 1.0);
  const auto b = nonexistence_certificate(hemi, 1.5, -2.0, 1e-6);
  EXPECT_TRUE(b.pass);
  EXPECT_GT(b.R_star, a.R_star);
}

TEST(Certificates, NonexistenceRejectsCriticalAndAbove) {
  for (double p : {2.0, 2.5}) {
    try {
      nonexistence_certificate(hemi, p, -2.0, 1.0);
      FAIL() << p;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), "supercritical-input");
    }
  }
  EXPECT_THROW(nonexistence_certificate(hemi, 1.5, -2.0, 0.0), Error);
}

TEST(Certificates, NonexistenceSearchCanExhaust) {
  CertificateOptions opts;
  opts.max_doublings = 3;
  try {
    nonexistence_certificate(hemi, 1.9, -2.0, 1.0, MatrixModel::identity(), opts);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "search-exhausted");
    EXPECT_EQ(e.error_class(), ErrorClass::numerical);
  }
}

TEST(Certificates, DichotomyHasNoOverlap) {
  CertificateOptions opts;
  opts.max_doublings = 120;
  for (int i = 1; i <= 19; ++i) {
    const double p = 1.0 + 0.05 * i;
    EXPECT_TRUE(nonexistence_certificate(hemi, p, -2.0, 1.0, MatrixModel::identity(), opts).pass) << p;
    EXPECT_FALSE(verify_supersolution_strong(hemi, p, 1.0).pass()) << p;
  }
  for (int i = 41; i <= 80; ++i) {
    const double p = 0.05 * i;
    EXPECT_TRUE(verify_supersolution_strong(hemi, p, 0.5 * supersolution_cmax(hemi, p)).pass()) << p;
    EXPECT_THROW(nonexistence_certificate(hemi, p, -2.0, 1.0), Error) << p;
  }
}

TEST(Certificates, CriticalCaseHemisphere) {
  const auto cert = critical_case_certificate(hemi);
  EXPECT_TRUE(cert.pass);
  EXPECT_NEAR(cert.p, 2.0, 1e-4);
  const double lt = cert.extra.at("lambda_tilde");
  EXPECT_GT(lt, 1.5);
  EXPECT_LT(lt, 2.0);
  EXPECT_GT(cert.alpha, -2.0);
  EXPECT_GT(cert.alpha * (cert.p - 1.0), -2.0);
}

TEST(Certificates, CriticalCaseFullSphere) {
  const auto cert = critical_case_certificate(AngularDomain::full_sphere(3));
  EXPECT_TRUE(cert.pass);
  EXPECT_DOUBLE_EQ(cert.p, 3.0);
  EXPECT_EQ(cert.inner, AngularDomain::cap(3, 0.75 * pi));
}

TEST(Certificates, CriticalCaseWithoutPerturbationFails) {
  CriticalCaseOptions crit;
  crit.epsilon = 0.0;
  const auto cert = critical_case_certificate(hemi, crit);
  EXPECT_FALSE(cert.pass);
  EXPECT_EQ(cert.flags, std::vector<std::string>{"gap-failure"});
  EXPECT_NEAR(double(cert.extra.at("gap")), 0.0, 1e-6);
  EXPECT_EQ(certificate_json(cert).at("verdict"), "fail");
}

TEST(Certificates, GbNormMatchesQuadratureOracle) {
  const double ref = oracle::gb_integral();
  const auto r = gb_norm_estimate(1.0);
  EXPECT_NEAR(r.estimate, ref, 1e-10 * ref);
  EXPECT_NEAR(gb_norm_estimate(1.0, 5).estimate, ref / 3.0, 1e-10 * ref);
}

TEST(Certificates, GbNormIsLinear) {
  const auto base = gb_norm_estimate(1.0);
  for (double eps : {1e-3, 0.5, 2.0, 1e3})
    EXPECT_NEAR(gb_norm_estimate(eps).estimate / (eps * base.estimate), 1.0, 1e-10);
  const auto half = gb_norm_estimate(0.5 * base.epsilon_star);
  EXPECT_LT(half.estimate, 1.0);
  EXPECT_NEAR(gb_norm_estimate(base.epsilon_star).estimate, 1.0, 1e-12);
  EXPECT_THROW(gb_norm_estimate(0.0), Error);
}

TEST(Certificates, JsonIsDeterministic) {
  const auto op = weak_operator();
  const auto u = power_candidate(op.mesh, 0.5, -1.0);
  const auto a = certificate_json(verify_supersolution_weak(op, u, 3.0, 50, 77)).dump();
  const auto b = certificate_json(verify_supersolution_weak(op, u, 3.0, 50, 77)).dump();
  EXPECT_EQ(a, b);
  EXPECT_EQ(certificate_json(nonexistence_certificate(hemi, 1.5, -2.0, 1.0)).dump(),
            certificate_json(nonexistence_certificate(hemi, 1.5, -2.0, 1.0)).dump());
  const auto j = nlohmann::json::parse(a);
  EXPECT_EQ(j.at("schema"), certificate_schema);
  EXPECT_EQ(j.at("kind"), "supersolution");
  EXPECT_TRUE(j.at("evidence").contains("seed"));
}

TEST(Certificates, SubSeedsAreStableAndDistinct) {
  EXPECT_EQ(sub_seed(1, 2), sub_seed(1, 2));
  EXPECT_NE(sub_seed(1, 2), sub_seed(1, 3));
  EXPECT_NE(sub_seed(1, 2), sub_seed(2, 2));
  std::mt19937_64 g(5);
  for (int i = 0; i < 1000; ++i) {
    const double u = uniform01(g);
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
}
