#include <gtest/gtest.h>

#include "conelab/exponents.hpp"

using namespace conelab;

TEST(Exponents, RootsOfZeroEigenvalue) {
  const auto r = characteristic_roots(0.0, 5);
  EXPECT_DOUBLE_EQ(r.alpha_minus, -3.0);
  EXPECT_DOUBLE_EQ(r.alpha_plus, 0.0);
}

TEST(Exponents, RootsSatisfyQuadratic) {
  const auto r = characteristic_roots(2.0, 3);
  EXPECT_DOUBLE_EQ(r.alpha_minus, -2.0);
  EXPECT_DOUBLE_EQ(r.alpha_plus, 1.0);
  for (double lambda : {-0.2, 0.0, 1.0, 37.5, 1e6})
    for (int dim : {3, 4, 7}) {
      const auto q = characteristic_roots(lambda, dim);
      for (double a : {q.alpha_minus, q.alpha_plus})
        EXPECT_NEAR(a * (a + dim - 2), lambda, 1e-12 * (1 + std::abs(lambda)));
      EXPECT_LT(q.alpha_minus, q.alpha_plus);
    }
}

TEST(Exponents, SpectralFloorRejected) {
  EXPECT_THROW(characteristic_roots(-0.25, 3), Error);
  EXPECT_THROW(characteristic_roots(-1.0, 4), Error);
  EXPECT_THROW(characteristic_roots(1.0, 2), Error);
}

TEST(Exponents, CriticalExponents) {
  EXPECT_DOUBLE_EQ(critical_exponent(characteristic_roots(0.0, 3)).p_star, 3.0);
  EXPECT_DOUBLE_EQ(critical_exponent(characteristic_roots(0.0, 5)).p_star, 5.0 / 3.0);
  EXPECT_DOUBLE_EQ(critical_exponent(characteristic_roots(2.0, 3)).p_star, 2.0);
  EXPECT_NEAR(critical_exponent_from_alpha(-3.0), 5.0 / 3.0, 1e-15);
  EXPECT_THROW(critical_exponent_from_alpha(0.5), Error);
}

TEST(Exponents, SupersolutionAmplitude) {
  EXPECT_DOUBLE_EQ(homogeneity_exponent(3.0), -1.0);
  EXPECT_DOUBLE_EQ(supersolution_gap(3.0, 2.0, 3), 2.0);
  EXPECT_NEAR(supersolution_amplitude(3.0, 2.0, 3, 1.0), std::sqrt(2.0), 1e-15);
  EXPECT_THROW(supersolution_amplitude(2.0, 2.0, 3, 1.0), Error);
  EXPECT_THROW(supersolution_amplitude(1.5, 2.0, 3, 1.0), Error);
  for (double p : {3.1, 4.0, 10.0}) EXPECT_GT(supersolution_amplitude(p, 0.0, 3, 1.0), 0.0);
  EXPECT_THROW(homogeneity_exponent(1.0), Error);
}
