#include <catch_amalgamated.hpp>

#include <random>

#include "fracneu/oracles.hpp"
#include "fracneu/spectral.hpp"

using namespace fracneu;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

AssembledForms forms(int n, double R0, double R, int N, double grading = 1.0) {
  DomainSpec d{n, 0.75, R0, R, 8.0 * R};
  return assemble_forms(build_grid(d, N, std::max(2, N / 2), grading), make_kernel_params(n, 0.75));
}

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

}  // namespace

TEST_CASE("PAVA on small hand examples") {
  const Eigen::VectorXd a = pava_project(vec({3, 1, 2}), Eigen::VectorXd::Ones(3));
  CHECK((a - vec({2, 2, 2})).cwiseAbs().maxCoeff() == 0.0);
  const Eigen::VectorXd b = pava_project(vec({1, 3}), Eigen::VectorXd::Ones(2), Orientation::nonincreasing);
  CHECK((b - vec({2, 2})).cwiseAbs().maxCoeff() == 0.0);
  const Eigen::VectorXd c = pava_project(vec({1, 2, 3}), Eigen::VectorXd::Ones(3));
  CHECK(c == vec({1, 2, 3}));
  const Eigen::VectorXd d = pava_project(vec({2, 0}), vec({3, 1}));
  CHECK_THAT(d[0], WithinAbs(1.5, 1e-15));
  CHECK_THAT(d[1], WithinAbs(1.5, 1e-15));
}

TEST_CASE("PAVA rejects bad input") {
  CHECK_THROWS_AS(pava_project(vec({1, 2}), vec({1})), ParameterError);
  CHECK_THROWS_AS(pava_project(vec({1, 2}), vec({1, 0})), ParameterError);
}

TEST_CASE("PAVA agrees with brute-force enumeration and preserves the weighted mean") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-1.0, 1.0), W(0.1, 3.0);
  for (int k = 0; k < 300; ++k) {
    const int n = 1 + k % 7;
    Eigen::VectorXd v(n), w(n);
    for (int i = 0; i < n; ++i) { v[i] = U(rng); w[i] = W(rng); }
    const bool inc = k % 2 == 0;
    const Eigen::VectorXd p = pava_project(v, w, inc ? Orientation::nondecreasing : Orientation::nonincreasing);
    CHECK((p - oracle::brute_force_isotonic(v, w, inc)).cwiseAbs().maxCoeff() <= 1e-14);
    CHECK_THAT(p.dot(w), WithinAbs(v.dot(w), 1e-13));
    CHECK(is_monotone(p, inc ? Orientation::nondecreasing : Orientation::nonincreasing));
  }
}

TEST_CASE("monotone zero-mean projection") {
  const Eigen::VectorXd B = vec({1.0, 2.0, 0.5, 1.5});
  const Eigen::VectorXd p = project_monotone_zero_mean(vec({4, -1, 3, 0}), B);
  CHECK(is_monotone(p));
  CHECK(std::abs(p.dot(B)) <= 1e-14);
}

TEST_CASE("Neumann spectrum on the ball: constant ground state, B-orthonormal modes") {
  const auto F = forms(1, 0.0, 1.0, 64, 2.0);
  const auto eig = neumann_eigs(F, 6);
  CHECK(std::abs(eig[0].lambda) <= 1e-8 * eig[1].lambda);
  const Eigen::VectorXd& v0 = eig[0].eigenfunction.interior;
  CHECK((v0.array() - v0.mean()).abs().maxCoeff() <= 1e-6 * std::abs(v0.mean()));
  for (int i = 0; i < 6; ++i) {
    if (i > 0) CHECK(eig[i].lambda >= eig[i - 1].lambda);
    for (int j = 0; j < 6; ++j) {
      const double ip = eig[i].eigenfunction.interior.dot(F.B.cwiseProduct(eig[j].eigenfunction.interior));
      CHECK_THAT(ip, WithinAbs(i == j ? 1.0 : 0.0, 1e-8));
    }
  }
  CHECK_THROWS_AS(neumann_eigs(F, 0), ParameterError);
  CHECK_THROWS_AS(neumann_eigs(F, F.n_int() + 1), ParameterError);
}

TEST_CASE("eigenvalues match the dense oracle on a tiny grid") {
  const auto g = build_grid(DomainSpec{3, 0.75, 1.0, 2.0, 16.0}, 6, 4);
  const auto kp = make_kernel_params(3, 0.75);
  const auto F = assemble_forms(g, kp);
  const auto de = oracle::dense_generalized_eigs(oracle::reduce(oracle::dense_full_form(g, kp), g), F.B);
  const auto pe = neumann_eigs(F, F.n_int());
  for (int i = 0; i < F.n_int(); ++i) CHECK_THAT(pe[i].lambda, WithinAbs(de.values[i], 1e-10 * de.values.maxCoeff()));
}

TEST_CASE("lambda2_plus matches pooling-pattern enumeration") {
  for (auto [n, R0] : {std::pair{1, 0.0}, std::pair{3, 1.0}}) {
    const auto g = build_grid(DomainSpec{n, 0.75, R0, 2.0, 16.0}, 6, 4);
    const auto F = assemble_forms(g, make_kernel_params(n, 0.75));
    const double le = oracle::enumerate_lambda2_plus(F.A_red, F.B);
    const auto L = lambda2_increasing(F);
    CHECK_THAT(L.pair.lambda, WithinAbs(le, 1e-9 * le));
  }
}

TEST_CASE("lambda2_rad <= lambda2_plus with a monotone eigenfunction of zero mean") {
  for (auto [n, R0, o] : {std::tuple{1, 0.0, Orientation::nondecreasing}, std::tuple{3, 1.0, Orientation::nondecreasing},
                          std::tuple{3, 1.0, Orientation::nonincreasing}}) {
    const auto F = forms(n, R0, 2.0, 32, 2.0);
    const auto L = lambda2_increasing(F, o);
    CHECK(L.lambda2_rad <= L.pair.lambda + 1e-9);
    const Eigen::VectorXd& v = L.pair.eigenfunction.interior;
    CHECK(is_monotone(v, o));
    CHECK(std::abs(v.dot(F.B)) <= 1e-10);
    CHECK_THAT(v.dot(F.B.cwiseProduct(v)), WithinRel(1.0, 1e-10));
  }
}

TEST_CASE("scaling the form scales lambda2_plus and keeps the eigenfunction") {
  auto F = forms(1, 0.0, 1.0, 24);
  const auto L1 = lambda2_increasing(F);
  F.A_red *= 3.0;
  const auto L2 = lambda2_increasing(F);
  CHECK_THAT(L2.pair.lambda, WithinRel(3.0 * L1.pair.lambda, 1e-9));
  CHECK((L2.pair.eigenfunction.interior - L1.pair.eigenfunction.interior).cwiseAbs().maxCoeff() <= 1e-6);
}
