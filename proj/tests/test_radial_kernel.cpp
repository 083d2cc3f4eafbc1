#include <catch_amalgamated.hpp>

#include <numbers>

#include "fracneu/quadrature.hpp"
#include "fracneu/radial_kernel.hpp"

using namespace fracneu;
using Catch::Matchers::WithinRel;
using Catch::Matchers::WithinAbs;

// reference values from 30-digit quadrature, computed outside this code base

TEST_CASE("normalization constant matches high-precision values") {
  CHECK_THAT(normalization_constant(1, 0.75), WithinRel(0.299206710301075, 1e-13));
  CHECK_THAT(normalization_constant(3, 0.6), WithinRel(0.116789289179240, 1e-13));
  CHECK_THAT(normalization_constant(1, 0.9), WithinRel(0.164904938818303, 1e-13));
  CHECK_THAT(normalization_constant(1, 0.95), WithinRel(0.0909924824751945, 1e-13));
  CHECK_THAT(normalization_constant(1, 0.99), WithinRel(0.0196325966875818, 1e-13));
}

TEST_CASE("normalization constant vanishes as s -> 1") {
  double prev = normalization_constant(1, 0.9);
  for (double s : {0.95, 0.99, 0.999}) {
    const double c = normalization_constant(1, s);
    CHECK(c < prev);
    prev = c;
  }
  CHECK(prev < 0.003);
}

TEST_CASE("order outside (1/2, 1) is rejected") {
  CHECK_THROWS_AS(normalization_constant(1, 0.4), ParameterError);
  CHECK_THROWS_AS(normalization_constant(1, 0.5), ParameterError);
  CHECK_THROWS_AS(normalization_constant(1, 1.0), ParameterError);
  CHECK_THROWS_AS(normalization_constant(0, 0.75), ParameterError);
  CHECK_THROWS_AS(check_order(std::nan("")), ParameterError);
}

TEST_CASE("angular kernel at r = 1, rho = 2, s = 0.75") {
  CHECK_THAT(angular_kernel(1.0, 2.0, make_kernel_params(1, 0.75)), WithinRel(1.06415002990996, 1e-13));
  CHECK_THAT(angular_kernel(1.0, 2.0, make_kernel_params(3, 0.75)), WithinRel(1.17602375635884, 1e-13));
  CHECK_THAT(angular_kernel(1.0, 2.0, make_kernel_params(2, 0.75)), WithinRel(1.30101885841820, 1e-10));
}

TEST_CASE("angular kernel is symmetric and singular on the diagonal") {
  for (int n : {1, 2, 3, 4}) {
    const auto kp = make_kernel_params(n, 0.7);
    CHECK_THAT(angular_kernel(0.3, 1.7, kp), WithinRel(angular_kernel(1.7, 0.3, kp), 1e-10));
    CHECK_THROWS_AS(angular_kernel(0.5, 0.5, kp), SingularityError);
  }
}

TEST_CASE("weighted split reassembles the weighted kernel") {
  for (int n : {1, 2, 3}) {
    const auto kp = make_kernel_params(n, 0.75);
    for (auto [r, rho] : {std::pair{0.4, 0.9}, std::pair{1.0, 1.001}, std::pair{2.0, 5.0}}) {
      const auto sp = weighted_split(r, rho, kp);
      const double v = sp.sing * std::pow(std::abs(r - rho), -1.0 - 2.0 * kp.s) + sp.reg;
      CHECK_THAT(v, WithinRel(weighted_kernel(r, rho, kp), 1e-9));
    }
  }
}

TEST_CASE("weighted kernel approaches its singular coefficient near the diagonal") {
  const auto kp = make_kernel_params(2, 0.75);
  const double r = 1.3;
  const double near = weighted_split(r, r * (1.0 + 1e-4), kp).sing;
  const double diag = weighted_split(r, r, kp).sing;
  CHECK_THAT(near, WithinRel(diag, 1e-3));
}

TEST_CASE("domain measures") {
  CHECK_THAT(sphere_area(1), WithinRel(2.0, 1e-15));
  CHECK_THAT(sphere_area(3), WithinRel(4.0 * std::numbers::pi, 1e-14));
  CHECK_THAT(domain_measure(3, 1.0, 2.0), WithinRel(29.3215314335047, 1e-13));
  CHECK_THAT(domain_measure(1, 0.0, 3.0), WithinRel(6.0, 1e-15));
}

TEST_CASE("Gauss-Jacobi rules integrate weighted monomials exactly") {
  for (double beta : {0.0, -0.5, -0.25, 0.5}) {
    const auto& q = gauss_jacobi01(8, beta);
    for (int k = 0; k < 16; ++k) {
      double sum = 0.0;
      for (std::size_t i = 0; i < q.size(); ++i) sum += q.w[i] * std::pow(q.x[i], k);
      CHECK_THAT(sum, WithinRel(1.0 / (k + beta + 1.0), 1e-12));
    }
  }
}
