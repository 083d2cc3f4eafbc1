#include <catch_amalgamated.hpp>

#include <random>

#include "fracneu/verification.hpp"

using namespace fracneu;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

AssembledForms forms(int n, double R0, double R, int N, double grading = 2.0) {
  DomainSpec d{n, 0.75, R0, R, 8.0 * R};
  return assemble_forms(build_grid(d, N, std::max(2, N / 2), grading), make_kernel_params(n, 0.75));
}

struct Solved {
  AssembledForms F = forms(1, 0.0, 3.0, 48);
  NonlinearitySpec spec = NonlinearitySpec::prototype(4, 3);
  Lambda2Plus L = lambda2_increasing(F);
  HypothesisReport H = check_hypotheses(spec, L.pair.lambda);
  TruncatedNonlinearity T = truncate(spec, 50.0, 4.0, 0.75, 1, H.M, H.delta);
  ConeSpec cone{Orientation::nondecreasing, 0.0, kInf};
};

bool has(const VerificationReport& r, const std::string& name) { return r.find(name) != nullptr; }

}  // namespace

TEST_CASE("oracle comparison passes on the tiny ball and annulus") {
  for (auto [n, R0] : {std::pair{1, 0.0}, std::pair{3, 1.0}}) {
    const auto g = build_grid(DomainSpec{n, 0.75, R0, 2.0, 16.0}, 6, 4);
    const auto rep = oracle_compare(g, make_kernel_params(n, 0.75));
    for (const auto& c : rep.checks) {
      INFO(c.name << " " << c.value << " tol " << c.tol);
      CHECK(c.pass);
    }
  }
}

TEST_CASE("oracle harness detects a mis-scaled normalization constant") {
  const auto g = build_grid(DomainSpec{1, 0.75, 0.0, 1.0, 8.0}, 6, 4);
  OracleOptions o;
  o.form_scale = 2.0;
  o.pava_trials = 10;
  const auto rep = oracle_compare(g, make_kernel_params(1, 0.75), o);
  CHECK_FALSE(rep.find("oracle_A_red")->pass);
  CHECK_FALSE(rep.find("oracle_eigenvalues")->pass);
  CHECK(rep.find("oracle_eigenvectors")->pass);
  CHECK(rep.find("oracle_pava")->pass);
  CHECK_THROWS_AS(oracle_compare(build_grid(DomainSpec{}, 12, 4), make_kernel_params(1, 0.75)), ParameterError);
}

TEST_CASE("integration by parts, same matrices and independent quadrature") {
  const auto g = build_grid(DomainSpec{3, 0.75, 1.0, 2.0, 16.0}, 5, 4);
  const auto kp = make_kernel_params(3, 0.75);
  const auto F = assemble_forms(g, kp);
  const Eigen::MatrixXd Af = oracle::dense_full_form(g, kp);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int k = 0; k < 5; ++k) {
    RadialFunction u, v;
    u.interior = Eigen::VectorXd::NullaryExpr(F.n_int(), [&] { return U(rng); });
    v.interior = Eigen::VectorXd::NullaryExpr(F.n_int(), [&] { return U(rng); });
    u.exterior = Eigen::VectorXd::NullaryExpr(g.n_ext(), [&] { return U(rng); });
    v.exterior = Eigen::VectorXd::NullaryExpr(g.n_ext(), [&] { return U(rng); });
    const auto rep = check_integration_by_parts(u, v, F, &Af);
    CHECK(rep.required_pass());
  }
  // v = 1 and extended u: the integral of the operator vanishes
  const auto ue = extend(Eigen::VectorXd::Random(F.n_int()), F);
  const auto one = extend(Eigen::VectorXd::Ones(F.n_int()), F);
  const auto rep = check_integration_by_parts(ue, one, F);
  CHECK(rep.required_pass());
  CHECK(std::abs(F.B.dot(apply_fractional_laplacian(ue, F))) <= 1e-9 * F.A_full.cwiseAbs().maxCoeff());
}

TEST_CASE("verify_solution on a constant, a converged and a corrupted state") {
  Solved S;
  const Problem P(S.F, S.T);
  VerifyInputs in;
  in.u0 = S.T.u0_list[0];
  const auto K = apriori_constants(S.H.M, S.H.delta, S.F.measure(), 2.0, P.c);
  in.K1 = K.K1; in.K_inf = K.K_inf; in.K2 = K.K2;

  SECTION("constant u0: identities hold, non-constancy fails") {
    const auto rep = verify_solution(Eigen::VectorXd::Constant(S.F.n_int(), in.u0), P, S.cone, in);
    CHECK(rep.find("residual")->pass);
    CHECK(rep.find("identity_mass")->pass);
    CHECK(rep.find("integral_fractional_laplacian")->pass);
    CHECK(rep.find("neumann_condition")->pass);
    CHECK_FALSE(rep.find("nonconstant")->pass);
    CHECK_FALSE(rep.required_pass());
  }
  SECTION("mountain-pass solution passes, a 10% perturbation does not") {
    const auto r = mountain_pass(P, S.cone, in.u0, S.L.pair.eigenfunction.interior);
    const auto rep = verify_solution(r.u_star, P, S.cone, in);
    for (const auto& c : rep.checks) {
      INFO(c.name << " " << c.value << " tol " << c.tol);
      CHECK(c.pass);
    }
    for (const char* name : {"residual", "raw_residual", "identity_mass", "integral_fractional_laplacian",
                             "neumann_condition", "bound_L1", "bound_Linf", "bound_H", "positivity", "monotone",
                             "cone_bounds", "nonconstant", "distinct_from_u0", "below_u0_level"})
      CHECK(has(rep, name));
    Eigen::VectorXd bad = r.u_star;
    bad[bad.size() / 2] *= 1.1;
    const auto rb = verify_solution(bad, P, S.cone, in);
    CHECK_FALSE(rb.find("residual")->pass);
    CHECK_FALSE(rb.find("identity_mass")->pass);
  }
  SECTION("non-monotone input carries a snapshot") {
    Eigen::VectorXd u = Eigen::VectorXd::Constant(S.F.n_int(), 1.0);
    u[0] = 2.0;
    const auto rep = verify_solution(u, P, S.cone, in);
    CHECK_FALSE(rep.find("monotone")->pass);
    CHECK(rep.find("monotone")->snapshot.size() == static_cast<std::size_t>(u.size()));
  }
}

TEST_CASE("constancy criterion") {
  CHECK(constancy_criterion([](double) { return 0.5; }, 100.0, 0.1).only_constants);
  const auto f = NonlinearitySpec::prototype(4, 3);
  auto fp = [&](double t) { return f.fprime(t); };
  CHECK_FALSE(constancy_criterion(fp, 10.0, 3.0).only_constants);
  // scaling f by beta moves max f' on [0, 2] across lambda2 + 1 exactly where the margin changes sign
  const double lam = 2.0, top = 2.0;
  const double mx = f.fprime(top);  // f' increasing on [1/3, inf)
  const double beta_star = (lam + 1.0) / mx;
  auto scaled = [&](double beta) { return [&, beta](double t) { return beta * f.fprime(t); }; };
  CHECK(constancy_criterion(scaled(0.999 * beta_star), top, lam).only_constants);
  CHECK_FALSE(constancy_criterion(scaled(1.001 * beta_star), top, lam).only_constants);
}

TEST_CASE("embedding scan: bounded below by constants and stable under refinement") {
  const ConeSpec cone{Orientation::nondecreasing, 0.0, kInf};
  std::vector<double> c;
  for (int N : {32, 64, 128}) {
    const auto F = forms(1, 0.0, 1.0, N);
    const auto e = embedding_scan(F, cone, 200, 1, 1.0 / 3.0);
    CHECK_THAT(e.constant_ratio, WithinRel(1.0 / std::sqrt((4.0 / 3.0) * 2.0), 1e-10));
    CHECK(e.max_ratio >= e.constant_ratio);
    CHECK(std::isfinite(e.C_emb));
    CHECK_THAT(e.C_emb, WithinRel(2.0 * e.max_ratio, 1e-15));
    c.push_back(e.C_emb);
  }
  CHECK_THAT(c[1], WithinRel(c[0], 0.2));
  CHECK_THAT(c[2], WithinRel(c[1], 0.2));
  CHECK_THROWS_AS(embedding_scan(forms(1, 0.0, 1.0, 8), cone, 50, 1), ParameterError);
}

TEST_CASE("discrete maximum principle harness") {
  const auto F = forms(3, 1.0, 2.0, 16);
  CHECK(max_principle_holds(extend(Eigen::VectorXd::Constant(F.n_int(), 0.3), F), F, 1e-9));
  CHECK(max_principle_holds(extend(Eigen::VectorXd::Zero(F.n_int()), F), F, 1e-9));
  // first eigenfunction of (-Delta)^s + I type problems is positive: the solution of (A+B)v = B 1
  const Eigen::VectorXd v = solve_linear(Eigen::VectorXd::Ones(F.n_int()), F);
  CHECK(max_principle_holds(extend(v, F), F, 1e-9));
}
