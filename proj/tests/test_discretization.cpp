#include <catch_amalgamated.hpp>

#include "fracneu/discretization.hpp"
#include "fracneu/oracles.hpp"

using namespace fracneu;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

AssembledForms forms(int n, double R0, double R, int N, double grading = 1.0, double s = 0.75) {
  DomainSpec d{n, s, R0, R, 8.0 * R};
  return assemble_forms(build_grid(d, N, std::max(2, N / 2), grading), make_kernel_params(n, s));
}

}  // namespace

TEST_CASE("grid covers the inner exterior, the domain and the outer exterior") {
  const auto g = build_grid(DomainSpec{3, 0.75, 1.0, 2.0, 16.0}, 16, 8, 2.0);
  for (std::size_t k = 1; k < g.x.size(); ++k) CHECK(g.x[k] > g.x[k - 1]);
  CHECK(g.x.front() == 0.0);
  CHECK(g.x[g.first_int] == 1.0);
  CHECK(g.x[g.last_int] == 2.0);
  CHECK(g.x.back() == 16.0);
  CHECK(g.n_int() == 17);
  CHECK(g.n_ext() + g.n_int() == g.n_dof());
}

TEST_CASE("invalid grids are rejected") {
  CHECK_THROWS_AS(build_grid(DomainSpec{1, 0.75, 0.0, 1.0, 8.0}, 3, 4), ParameterError);
  CHECK_THROWS_AS(build_grid(DomainSpec{1, 0.75, 0.0, 1.0, 8.0}, 8, 1), ParameterError);
  CHECK_THROWS_AS(build_grid(DomainSpec{1, 0.75, 2.0, 1.0, 8.0}, 8, 4), ParameterError);
  CHECK_THROWS_AS(build_grid(DomainSpec{1, 0.75, 0.0, 1.0, 0.5}, 8, 4), ParameterError);
  CHECK_THROWS_AS(build_grid(DomainSpec{1, 0.75, 0.0, 1.0, 8.0}, 8, 4, 0.5), ParameterError);
}

TEST_CASE("lumped masses sum to the measure of the domain") {
  for (int n : {1, 2, 3}) {
    const auto g = build_grid(DomainSpec{n, 0.75, 0.5, 1.5, 12.0}, 24, 12, 2.0);
    CHECK_THAT(g.mass.sum(), WithinRel(domain_measure(n, 0.5, 1.5), 1e-12));
  }
}

TEST_CASE("reduced form is symmetric, positive semidefinite and kills constants") {
  for (int n : {1, 3}) {
    const auto F = forms(n, n == 1 ? 0.0 : 1.0, 2.0, 24, 2.0);
    const double scale = F.A_red.cwiseAbs().maxCoeff();
    CHECK((F.A_red - F.A_red.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale);
    CHECK((F.A_red * Eigen::VectorXd::Ones(F.n_int())).cwiseAbs().maxCoeff() <= 1e-10 * scale);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(F.A_red);
    CHECK(es.eigenvalues().minCoeff() >= -1e-10 * scale);
  }
}

TEST_CASE("reduced form matches the brute-force quadrature oracle") {
  SECTION("ball, n = 1") {
    const auto g = build_grid(DomainSpec{1, 0.75, 0.0, 1.0, 8.0}, 6, 4);
    const auto kp = make_kernel_params(1, 0.75);
    const auto F = assemble_forms(g, kp);
    const Eigen::MatrixXd Ar = oracle::reduce(oracle::dense_full_form(g, kp), g);
    CHECK((F.A_red - Ar).cwiseAbs().maxCoeff() <= 1e-8);
  }
  SECTION("annulus, n = 3") {
    const auto g = build_grid(DomainSpec{3, 0.75, 1.0, 2.0, 16.0}, 6, 4);
    const auto kp = make_kernel_params(3, 0.75);
    const auto F = assemble_forms(g, kp);
    const Eigen::MatrixXd Ar = oracle::reduce(oracle::dense_full_form(g, kp), g);
    CHECK((F.A_red - Ar).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("Neumann extension of u(r) = r approaches the continuum quotient at r = 2") {
  // w(2) = int |2-y|^{-1-2s} |y| dy / int |2-y|^{-1-2s} dy over (-1, 1)
  const auto F = forms(1, 0.0, 1.0, 256);
  const auto& g = F.grid;
  Eigen::VectorXd u(F.n_int());
  for (int a = 0; a < F.n_int(); ++a) u[a] = g.x[g.first_int + a];
  const auto ue = extend(u, F);
  double w2 = 0.0;
  for (int j = 0; j + 1 < g.n_ext(); ++j) {
    const double xa = g.x[g.ext[j]], xb = g.x[g.ext[j + 1]];
    if (xa <= 2.0 && 2.0 <= xb) {
      const double t = (2.0 - xa) / (xb - xa);
      w2 = (1.0 - t) * (*ue.exterior)[j] + t * (*ue.exterior)[j + 1];
    }
  }
  CHECK_THAT(w2, WithinAbs(0.595971209353583, 1e-3));
}

TEST_CASE("constants extend to themselves with zero operator and zero normal derivative") {
  const auto F = forms(3, 1.0, 2.0, 16);
  const auto ue = extend(Eigen::VectorXd::Constant(F.n_int(), 2.5), F);
  CHECK(((*ue.exterior).array() - 2.5).abs().maxCoeff() <= 1e-10);
  CHECK_THAT(*ue.farfield, WithinRel(2.5, 1e-14));
  CHECK(apply_fractional_laplacian(ue, F).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("extended functions satisfy the Neumann condition and integrate to zero") {
  const auto F = forms(1, 0.0, 1.0, 32, 2.0);
  Eigen::VectorXd u = Eigen::VectorXd::Random(F.n_int());
  const auto ue = extend(u, F);
  const Eigen::VectorXd ns = neumann_derivative(ue, F);
  const double scale = (F.C_IE.transpose() * u).cwiseQuotient(F.grid.ext_mass).cwiseAbs().maxCoeff();
  CHECK(ns.cwiseAbs().maxCoeff() <= 1e-10 * scale);
  const Eigen::VectorXd lap = apply_fractional_laplacian(ue, F);
  CHECK(std::abs(F.B.dot(lap)) <= 1e-10 * F.B.dot(lap.cwiseAbs()));
  // the reduced form is the full form on extended functions
  CHECK_THAT(full_bilinear(ue, ue, F), WithinRel(u.dot(F.A_red * u), 1e-10));
}

TEST_CASE("operator needs an extended function") {
  const auto F = forms(1, 0.0, 1.0, 8);
  RadialFunction u{Eigen::VectorXd::Ones(F.n_int()), std::nullopt, std::nullopt, false};
  CHECK_THROWS_AS(apply_fractional_laplacian(u, F), ContractError);
  CHECK_THROWS_AS(extend(Eigen::VectorXd::Ones(3), F), ParameterError);
}

TEST_CASE("homothety scales the reduced form like k^{n-2s}") {
  const double k = 1.7, s = 0.75;
  const auto F1 = forms(3, 1.0, 2.0, 12, 2.0);
  const auto F2 = forms(3, k, 2.0 * k, 12, 2.0);
  const double scale = F1.A_red.cwiseAbs().maxCoeff();
  CHECK((F2.A_red - std::pow(k, 3.0 - 2.0 * s) * F1.A_red).cwiseAbs().maxCoeff() <= 1e-9 * scale * std::pow(k, 3.0 - 2.0 * s));
  CHECK((F2.B - std::pow(k, 3.0) * F1.B).cwiseAbs().maxCoeff() <= 1e-12 * F2.B.maxCoeff());
}

TEST_CASE("norms are consistent") {
  const auto F = forms(1, 0.0, 1.0, 16);
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(F.n_int());
  const auto N = norms(one, F);
  CHECK_THAT(N.l2, WithinRel(std::sqrt(2.0), 1e-12));
  CHECK(N.seminorm <= 1e-6);
}
