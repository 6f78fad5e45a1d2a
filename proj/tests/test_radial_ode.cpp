#include <gtest/gtest.h>

#include <algorithm>
#include <chrono>
#include <cmath>

#include "conelab/radial_ode.hpp"
#include "oracles.hpp"

using namespace conelab;

namespace {

double at_radius(const RadialProfile& p, double r) {
  const auto it = std::min_element(p.r.begin(), p.r.end(),
                                   [r](double a, double b) { return std::abs(a - r) < std::abs(b - r); });
  return p.R(static_cast<std::size_t>(it - p.r.begin()));
}

}  // namespace

TEST(RadialOde, DecayingInitFollowsPowerLaw) {
  const auto c = RadialCoefficient::constant(-3.0, 3);
  const auto p = integrate_radial(c, 1.0, 100.0, {1.0, -3.0});
  EXPECT_NEAR(p.R(p.size() - 1) / 1e-6, 1.0, 1e-6);
  EXPECT_DOUBLE_EQ(p.r.back(), 100.0);
}

TEST(RadialOde, GenericInitSelectsGrowingBranch) {
  const auto c = RadialCoefficient::constant(-3.0, 3);
  const auto p = integrate_radial(c, 1.0, 1e6, {1.0, 0.0});
  EXPECT_NEAR(local_exponent(p).back(), 2.0, 1e-6);
}

TEST(RadialOde, OscillatingOutwardShortRangeMatchesClosedForm) {
  const auto c = RadialCoefficient::oscillating(-3.0, 0.2, 1.0, 3);
  const double r0 = std::exp(3.0), r1 = 10.0 * r0;
  const double e0 = oracle::local_exponent_oscillating(-3.0, 0.2, 1.0, r0);
  IntegrationOptions opts;
  opts.tolerance = 1e-13;
  const auto p = integrate_radial(c, r0, r1, {1.0, e0 / r0}, opts);
  auto closed = [](double r) { return std::pow(r, -3.0 + 0.2 * std::sin(std::log(std::log(r)))); };
  EXPECT_NEAR(p.R(p.size() - 1) / (closed(r1) / closed(r0)), 1.0, 1e-4);
}

TEST(RadialOde, OscillatingDecayingBranchMatchesClosedForm) {
  const auto c = RadialCoefficient::oscillating(-3.0, 0.2, 1.0, 3);
  const double r0 = std::exp(3.0), r1 = 1e6;
  const auto p = decaying_profile(c, r0, r1).profile;
  auto closed = [](double r) { return std::pow(r, -3.0 + 0.2 * std::sin(std::log(std::log(r)))); };
  EXPECT_NEAR(p.R(p.size() - 1) / (closed(r1) / closed(r0)), 1.0, 1e-4);
}

TEST(RadialOde, ConstantDecayingExponent) {
  const auto c = RadialCoefficient::constant(-3.0, 3);
  const auto p = decaying_profile(c, 10.0, 1e4);
  for (double e : local_exponent(p.profile)) EXPECT_NEAR(e, oracle::local_exponent_constant(-3.0), 1e-3);
  EXPECT_NEAR(at_radius(p.profile, 1e3), 1e-6, 1e-12);
}

TEST(RadialOde, LogCorrectedDecayingExponent) {
  const auto c = RadialCoefficient::log_corrected(-3.0, 3);
  const auto p = decaying_profile(c, 10.0, 1e5);
  const auto e = local_exponent(p.profile);
  for (std::size_t j = 0; j < e.size(); ++j)
    EXPECT_NEAR(e[j], oracle::local_exponent_log(-3.0, p.profile.r[j]), 1e-6);
}

TEST(RadialOde, OscillatingExponentAttainsEnvelope) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto c = RadialCoefficient::oscillating(-3.0, 0.2, 1.0, 3);
  const auto p = decaying_profile(c, 3.0, 1e300);
  const auto e = local_exponent(p.profile);
  const auto [lo, hi] = std::minmax_element(e.begin(), e.end());
  const double amp = 0.2 * std::sqrt(2.0);
  EXPECT_NEAR(*lo, -3.0 - amp, 1e-2);
  EXPECT_NEAR(*hi, -3.0 + amp, 1e-2);
  for (std::size_t j = 0; j < e.size(); j += 97)
    EXPECT_NEAR(e[j], oracle::local_exponent_oscillating(-3.0, 0.2, 1.0, p.profile.r[j]), 1e-4);
  EXPECT_LT(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(), 5.0);
}

TEST(RadialOde, ClosedFormResiduals) {
  EXPECT_LE(closed_form_residual(RadialCoefficient::constant(-3.0, 3), log_spaced(10, 1e5, 200)), 1e-10);
  EXPECT_LE(closed_form_residual(RadialCoefficient::log_corrected(-3.0, 3), log_spaced(10, 1e5, 200)), 1e-6);
  EXPECT_LE(closed_form_residual(RadialCoefficient::oscillating(-3.0, 0.2, 1.0, 3), log_spaced(std::exp(3.0), 1e6, 200)),
            1e-6);
  EXPECT_THROW(closed_form_residual(RadialCoefficient::tabulated({1, 2}, {6, 6}, 3), log_spaced(1, 2, 10)), Error);
}

TEST(RadialOde, LogCorrectedCoefficientApproachesConstant) {
  const auto c = RadialCoefficient::log_corrected(-3.0, 3);
  const auto ref = RadialCoefficient::constant(-3.0, 3);
  EXPECT_LT(std::abs(c.d_of_t(1e4) - ref.d_of_t(1e4)), 1e-3);
  // The profiles are not comparable: their ratio 1/log r tends to zero.
  const auto a = decaying_profile(c, 10.0, 1e8).profile;
  const auto b = decaying_profile(ref, 10.0, 1e8).profile;
  EXPECT_LT(a.R(a.size() - 1) / b.R(b.size() - 1), 0.2);
}

TEST(RadialOde, GalleryExponents) {
  const auto g = gallery_exponent(RadialCoefficient::constant(-3.0, 3));
  EXPECT_TRUE(g.exact());
  EXPECT_DOUBLE_EQ(g.alpha_low, -3.0);
  EXPECT_NEAR(g.p_low, 5.0 / 3.0, 1e-15);
  const auto o = gallery_exponent(RadialCoefficient::oscillating(-3.0, 0.2, 1.0, 3));
  EXPECT_FALSE(o.exact());
  EXPECT_NEAR(o.alpha_low, -3.0 - 0.2 * std::sqrt(2.0), 1e-15);
  EXPECT_LT(o.p_low, o.p_high);
}

TEST(RadialOde, EllipticityWindow) {
  const auto w = ellipticity_window(RadialCoefficient::constant(-3.0, 3), 2.0);
  EXPECT_DOUBLE_EQ(w.nu, 3.0);
  EXPECT_DOUBLE_EQ(w.R0, 3.0);
  const auto l = ellipticity_window(RadialCoefficient::log_corrected(-3.0, 3), 2.0);
  EXPECT_TRUE(std::isfinite(l.R0));
  EXPECT_GE(l.nu, 3.0);
  EXPECT_THROW(ellipticity_window(RadialCoefficient::tabulated({3, 10, 100}, {1, -1, -1}, 3), 2.0), Error);
}

TEST(RadialOde, ConstructorsValidate) {
  EXPECT_THROW(RadialCoefficient::oscillating(-1.5, 0.6, 1.0, 3), Error);
  EXPECT_THROW(RadialCoefficient::constant(-0.5, 3), Error);
  EXPECT_THROW(RadialCoefficient::tabulated({2, 1}, {1, 1}, 3), Error);
  EXPECT_THROW(integrate_radial(RadialCoefficient::log_corrected(-3.0, 3), 1.0, 10.0, {1, 0}), Error);
  EXPECT_THROW(integrate_radial(RadialCoefficient::constant(-3.0, 3), 1.0, 10.0, {0, 0}), Error);
}

TEST(RadialOde, ProfileCsvHasHeader) {
  std::ostringstream os;
  write_csv(os, decaying_profile(RadialCoefficient::constant(-3.0, 3), 10.0, 100.0).profile);
  EXPECT_EQ(os.str().rfind("r,logR,R,e\n", 0), 0u);
}
