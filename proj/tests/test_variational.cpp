#include <catch_amalgamated.hpp>

#include <random>

#include "fracneu/variational.hpp"

using namespace fracneu;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

struct Setup {
  AssembledForms F;
  NonlinearitySpec spec = NonlinearitySpec::prototype(4, 3);
  TruncatedNonlinearity T;
  Lambda2Plus L;

  Setup(int n, double R0, double R, int N, Orientation o = Orientation::nondecreasing) {
    DomainSpec d{n, 0.75, R0, R, 8.0 * R};
    F = assemble_forms(build_grid(d, N, std::max(2, N / 2), 2.0), make_kernel_params(n, 0.75));
    L = lambda2_increasing(F, o);
    const auto H = check_hypotheses(spec, L.pair.lambda);
    T = truncate(spec, 50.0, default_ell(n, 0.75), 0.75, n, H.M, H.delta);
  }
};

Eigen::VectorXd random_cone_point(std::mt19937_64& rng, Eigen::Index n, const ConeSpec& c, double top) {
  std::uniform_real_distribution<double> U(c.lower, std::min(c.upper, top));
  Eigen::VectorXd u(n);
  for (Eigen::Index i = 0; i < n; ++i) u[i] = U(rng);
  std::sort(u.data(), u.data() + n);
  if (c.orientation == Orientation::nonincreasing) u.reverseInPlace();
  return u;
}

}  // namespace

TEST_CASE("energy of constants on the unit ball") {
  Setup S(1, 0.0, 1.0, 32);
  const Problem P(S.F, S.T);
  const Eigen::Index n = S.F.n_int();
  CHECK_THAT(P.energy(Eigen::VectorXd::Ones(n)), WithinAbs(7.0 / 6.0, 1e-12));
  CHECK_THAT(P.energy(Eigen::VectorXd::Constant(n, 1.61803398874989485)), WithinAbs(2.01502832395825, 1e-11));
  CHECK_THAT(energy(Eigen::VectorXd::Ones(n), S.F, S.T), WithinAbs(7.0 / 6.0, 1e-12));
}

TEST_CASE("linear solve reproduces constants and the shift leaves fixed points unchanged") {
  Setup S(3, 1.0, 2.0, 16);
  const Eigen::Index n = S.F.n_int();
  const Eigen::VectorXd c = Eigen::VectorXd::Constant(n, 0.7);
  CHECK((solve_linear(c, S.F) - c).cwiseAbs().maxCoeff() <= 1e-12);
  const Problem P(S.F, S.T);
  CHECK(P.c > 0.0);
  const Eigen::VectorXd u0 = Eigen::VectorXd::Constant(n, S.T.u0_list[0]);
  CHECK((P.tilde_T(u0) - u0).cwiseAbs().maxCoeff() <= 1e-11);
  CHECK(P.residual(u0) <= 1e-10);
}

TEST_CASE("gradient equals the directional derivative of the energy") {
  Setup S(1, 0.0, 1.0, 24);
  const Problem P(S.F, S.T);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(0.0, 2.0);
  for (int k = 0; k < 20; ++k) {
    Eigen::VectorXd u(S.F.n_int()), v(S.F.n_int());
    for (Eigen::Index i = 0; i < u.size(); ++i) { u[i] = U(rng); v[i] = U(rng) - 1.0; }
    const double h = 1e-5;
    const double fd = (P.energy(u + h * v) - P.energy(u - h * v)) / (2 * h);
    CHECK_THAT(P.inner(P.gradient(u), v), WithinRel(fd, 1e-5));
  }
}

TEST_CASE("cone projection is exact and idempotent") {
  const Eigen::VectorXd B = Eigen::VectorXd::LinSpaced(9, 0.5, 1.5);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> N01;
  for (auto cone : {ConeSpec{Orientation::nondecreasing, 0.0, kInf}, ConeSpec{Orientation::nonincreasing, 0.5, 2.0}}) {
    for (int k = 0; k < 50; ++k) {
      Eigen::VectorXd v(9);
      for (auto& x : v) x = 2.0 * N01(rng);
      const Eigen::VectorXd p = project_cone(v, B, cone);
      CHECK(in_cone(p, cone));
      CHECK(project_cone(p, B, cone) == p);
    }
  }
}

TEST_CASE("nonincreasing cone is refused on the ball") {
  CHECK_THROWS_AS(validate_cone(ConeSpec{Orientation::nonincreasing}, DomainSpec{1, 0.75, 0.0, 1.0, 8.0}),
                  ParameterError);
  CHECK_NOTHROW(validate_cone(ConeSpec{Orientation::nonincreasing}, DomainSpec{1, 0.75, 1.0, 2.0, 16.0}));
  CHECK_THROWS_AS(validate_cone(ConeSpec{Orientation::nondecreasing, 2.0, 1.0}, DomainSpec{}), ParameterError);
}

TEST_CASE("flow steps decrease the energy and stay in the cone") {
  Setup S(1, 0.0, 3.0, 32);
  const Problem P(S.F, S.T);
  const ConeSpec cone{Orientation::nondecreasing, 0.0, kInf};
  std::mt19937_64 rng(2);
  for (int k = 0; k < 30; ++k) {
    Eigen::VectorXd u = random_cone_point(rng, S.F.n_int(), cone, 3.0);
    for (int it = 0; it < 5; ++it) {
      const auto st = flow_step(u, 1.0, P, cone);
      CHECK(st.energy_after <= st.energy_before + 1e-12 * std::max(1.0, std::abs(st.energy_before)));
      CHECK(in_cone(st.u, cone));
      u = st.u;
    }
  }
}

TEST_CASE("initial path: endpoint chain and a dip below E(u0)") {
  Setup S(1, 0.0, 3.0, 32);
  const Problem P(S.F, S.T);
  const ConeSpec cone{Orientation::nondecreasing, 0.0, kInf};
  const double u0 = S.T.u0_list[0];
  const auto ip = build_initial_path(P, cone, u0, S.L.pair.eigenfunction.interior);
  CHECK(0.0 < ip.t_minus * u0);
  CHECK(ip.t_minus < 1.0);
  CHECK(ip.t_plus > 1.0);
  CHECK(ip.max_energy < ip.energy_u0);
  for (const auto& p : ip.points) CHECK(in_cone(p, cone));
  // the straight path through u0 (tau = 0) peaks exactly at E(u0)
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(S.F.n_int());
  double emax = -kInf;
  for (int i = 0; i <= 64; ++i) {
    const double t = ip.t_minus + (ip.t_plus - ip.t_minus) * i / 64.0;
    emax = std::max(emax, P.energy(t * u0 * one));
  }
  CHECK(emax <= ip.energy_u0 + 1e-12);
  CHECK(P.energy(u0 * one) == ip.energy_u0);
}

TEST_CASE("mountain pass finds a non-constant monotone critical point") {
  Setup S(1, 0.0, 3.0, 48);
  const Problem P(S.F, S.T);
  const ConeSpec cone{Orientation::nondecreasing, 0.0, kInf};
  const double u0 = S.T.u0_list[0];
  const auto r = mountain_pass(P, cone, u0, S.L.pair.eigenfunction.interior);
  CHECK(r.status == "nonconstant");
  CHECK(r.residual <= 1e-10 * std::max(1.0, P.norm(r.u_star)));
  CHECK(r.level < r.energy_u0);
  CHECK(in_cone(r.u_star, cone));
  CHECK(r.nonconstancy_linf > 1e-6);
  const double lhs = S.F.B.dot(r.u_star), rhs = S.F.B.dot(P.f_of(r.u_star));
  CHECK_THAT(lhs, WithinRel(rhs, 1e-8));
}

TEST_CASE("mountain pass on an annulus in the nonincreasing cone") {
  Setup S(1, 2.0, 4.0, 48, Orientation::nonincreasing);
  const Problem P(S.F, S.T);
  const ConeSpec cone{Orientation::nonincreasing, 0.0, kInf};
  const auto r = mountain_pass(P, cone, S.T.u0_list[0], S.L.pair.eigenfunction.interior);
  CHECK(r.status == "nonconstant");
  CHECK(is_monotone(r.u_star, Orientation::nonincreasing));
  CHECK(r.u_star[0] > r.u_star[r.u_star.size() - 1]);
}

TEST_CASE("multi_solve with a single band reduces to one mountain pass") {
  Setup S(1, 0.0, 3.0, 32);
  const Problem P(S.F, S.T);
  const auto m = multi_solve(P, Orientation::nondecreasing, S.T.u0_list, S.T.u_minus, S.T.u_plus,
                             S.L.pair.eigenfunction.interior);
  REQUIRE(m.solutions.size() == 1);
  CHECK(m.solutions[0].has_value());
  CHECK(m.errors[0].empty());
  CHECK(m.interleaving);
}
