#pragma once
// Invariant battery over computed objects, and comparisons against the brute-force oracles.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "fracneu/discretization.hpp"
#include "fracneu/nonlinearity.hpp"
#include "fracneu/oracles.hpp"
#include "fracneu/spectral.hpp"
#include "fracneu/variational.hpp"

namespace fracneu {

struct Check {
  std::string name;
  double value = 0.0;
  double tol = 0.0;
  bool pass = false;
  bool required = true;
  std::string note;
  std::vector<double> snapshot;  // offending data on failure
};

struct VerificationReport {
  std::vector<Check> checks;

  Check& add(std::string name, double value, double tol, bool pass, bool required = true, std::string note = {}) {
    checks.push_back({std::move(name), value, tol, pass, required, std::move(note), {}});
    return checks.back();
  }
  bool required_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return !c.required || c.pass; });
  }
  const Check* find(const std::string& n) const {
    for (const auto& c : checks)
      if (c.name == n) return &c;
    return nullptr;
  }
  void append(const VerificationReport& o) { checks.insert(checks.end(), o.checks.begin(), o.checks.end()); }
};

inline std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

struct VerifyInputs {
  double K1 = kInf, K_inf = kInf, K2 = kInf;
  double tol = 1e-10;            // residual tolerance, relative to max(1, ||u||)
  double identity_rtol = 1e-6;
  double distinct_factor = 10.0;
  double u0 = 0.0;               // constant reference for the non-constancy check
};

/// Every check on a candidate solution; failures are entries, never exceptions.
inline VerificationReport verify_solution(const Eigen::VectorXd& u, const Problem& P, const ConeSpec& cone,
                                          const VerifyInputs& in) {
  VerificationReport rep;
  const auto& F = *P.F;
  const Eigen::VectorXd& B = F.B;
  const double hn = P.norm(u);
  const double scale = std::max(1.0, hn);

  const double res = safeguarded_residual(u, P, cone);
  rep.add("residual", res, in.tol * scale, res <= in.tol * scale, true, "||u - P(T~(u))|| in the shifted H^s norm");
  rep.add("raw_residual", P.residual(u), 0.0, true, false, "||u - T~(u)|| without the cone safeguard (discretization level)");

  const double lhs = B.dot(u), rhs = B.dot(P.f_of(u));
  const double id_err = std::abs(lhs - rhs) / std::max(std::abs(lhs), 1e-300);
  rep.add("identity_mass", id_err, in.identity_rtol, id_err <= in.identity_rtol, true, "sum m u = sum m f~(u)");

  const RadialFunction ue = extend(u, F);
  const Eigen::VectorXd lap = apply_fractional_laplacian(ue, F);
  // scale: size of the summed terms, so constants (lap at round-off) are judged fairly
  const Eigen::VectorXd terms = F.A_full.cwiseAbs() * full_vector(ue, F).cwiseAbs();
  const double lap_sum = B.dot(lap), lap_scale = terms.segment(F.grid.first_int, F.n_int()).sum() + 1e-300;
  rep.add("integral_fractional_laplacian", std::abs(lap_sum), 1e-10 * lap_scale, std::abs(lap_sum) <= 1e-10 * lap_scale,
          true, "sum m (-Delta)^s u over the interior");

  const Eigen::VectorXd ns = neumann_derivative(ue, F);
  const double ns_scale = (F.C_IE.transpose() * u).cwiseQuotient(F.grid.ext_mass).cwiseAbs().maxCoeff() + 1e-300;
  const double ns_max = ns.size() ? ns.cwiseAbs().maxCoeff() : 0.0;
  rep.add("neumann_condition", ns_max, 1e-10 * ns_scale, ns_max <= 1e-10 * ns_scale, true, "max |N_s u| at exterior nodes");

  const double l1 = B.dot(u.cwiseAbs());
  rep.add("bound_L1", l1, in.K1, l1 <= in.K1, true, "||u||_1 <= K1");
  const double linf = u.cwiseAbs().maxCoeff();
  rep.add("bound_Linf", linf, in.K_inf, linf <= in.K_inf, true, "||u||_inf <= K_inf");
  rep.add("bound_H", hn, in.K2, hn <= in.K2, true, "||u||_H <= K2");

  double minpos = kInf;
  for (int a = 0; a < F.n_int(); ++a)
    if (F.grid.x[F.grid.first_int + a] > 0.0) minpos = std::min(minpos, u[a]);
  auto& pos = rep.add("positivity", minpos, 0.0, minpos > 0.0, true, "u > 0 at nodes with r > 0");
  if (!pos.pass) pos.snapshot = to_std(u);

  auto& mono = rep.add("monotone", 0.0, 0.0, is_monotone(u, cone.orientation), true, "exact nodal monotonicity");
  if (!mono.pass) mono.snapshot = to_std(u);
  rep.add("cone_bounds", u.minCoeff(), cone.lower, in_cone(u, cone), true, "lower <= u <= upper");

  const double osc = u.maxCoeff() - u.minCoeff();
  const double thresh = in.distinct_factor * in.tol * scale;
  rep.add("nonconstant", osc, thresh, osc > thresh, true, "max u - min u above 10x the residual tolerance");
  const double dist0 = (u.array() - in.u0).abs().maxCoeff();
  rep.add("distinct_from_u0", dist0, thresh, dist0 > thresh, true, "||u - u0||_inf");
  const double E = P.energy(u), E0 = P.energy(Eigen::VectorXd::Constant(u.size(), in.u0));
  rep.add("below_u0_level", E - E0, 0.0, E < E0, true, "E(u) < E(u0)");
  return rep;
}

/// <u, v>_A = sum_int m v (-Delta)^s u + sum_ext m v N_s u. With an oracle matrix the exterior term is
/// taken from it instead, which exercises an independent quadrature of N_s.
inline VerificationReport check_integration_by_parts(const RadialFunction& u, const RadialFunction& v,
                                                     const AssembledForms& F,
                                                     const Eigen::MatrixXd* oracle_full = nullptr) {
  VerificationReport rep;
  const auto& g = F.grid;
  const Eigen::VectorXd U = full_vector(u, F), V = full_vector(v, F);
  const Eigen::VectorXd AU = F.A_full * U;
  const double bil = V.dot(AU);
  double interior = 0.0, exterior = 0.0;
  for (int a = 0; a < g.n_int(); ++a) {
    const int k = g.first_int + a;
    interior += F.B[a] * V[k] * (AU[k] / F.B[a]);
  }
  const Eigen::VectorXd ns = neumann_derivative(u, F);
  for (int j = 0; j < g.n_ext(); ++j) exterior += g.ext_mass[j] * V[g.ext[j]] * ns[j];
  const double scale = V.cwiseAbs().dot(F.A_full.cwiseAbs() * U.cwiseAbs()) + 1e-300;
  const double err = std::abs(bil - interior - exterior);
  rep.add("by_parts_same_matrix", err, 1e-12 * scale, err <= 1e-12 * scale);
  if (oracle_full) {
    const Eigen::VectorXd AUo = *oracle_full * U;
    double ext_o = 0.0;
    for (int j = 0; j < g.n_ext(); ++j) ext_o += V[g.ext[j]] * AUo[g.ext[j]];
    const double err_o = std::abs(bil - interior - ext_o);
    rep.add("by_parts_independent", err_o, 1e-6 * scale, err_o <= 1e-6 * scale, true,
            "exterior term from the brute-force quadrature");
  }
  return rep;
}

struct ConstancyResult {
  bool only_constants = false;
  double margin = 0.0;  // lambda2_rad + 1 - max f' on [0, K_inf]
};

inline ConstancyResult constancy_criterion(const std::function<double(double)>& fprime, double K_inf,
                                           double lambda2_rad) {
  ConstancyResult r;
  r.margin = constancy_margin(fprime, K_inf, lambda2_rad);
  r.only_constants = r.margin > 0.0;
  return r;
}

struct EmbeddingEstimate {
  double max_ratio = 0.0;       // max ||u||_inf / ||u||_H over the samples
  double constant_ratio = 0.0;  // the same for u = 1
  double C_emb = 0.0;           // 2 x max_ratio
  int samples = 0;
};

/// Random monotone nonnegative functions of several shapes; ||.||_H is the norm of K = A_red + (1+c)B.
inline EmbeddingEstimate embedding_scan(const AssembledForms& F, const ConeSpec& cone, int n_samples, unsigned seed,
                                        double shift = 0.0) {
  if (n_samples < 100) throw ParameterError("embedding scan needs at least 100 samples");
  Eigen::MatrixXd K = F.A_red;
  K.diagonal() += (1.0 + shift) * F.B;
  auto hnorm = [&](const Eigen::VectorXd& u) { return std::sqrt(u.dot(K * u)); };
  const int n = F.n_int();
  const auto& g = F.grid;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  EmbeddingEstimate est;
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(n);
  est.constant_ratio = 1.0 / hnorm(one);
  est.max_ratio = est.constant_ratio;
  const double R0 = g.spec.R0, R = g.spec.R;
  for (int k = 0; k < n_samples; ++k) {
    Eigen::VectorXd u(n);
    const int shape = k % 4;
    const double a = U(rng), p = 0.5 + 8.0 * U(rng);
    for (int i = 0; i < n; ++i) {
      double t = (g.x[g.first_int + i] - R0) / (R - R0);
      if (cone.orientation == Orientation::nonincreasing) t = 1.0 - t;
      switch (shape) {
        case 0: u[i] = U(rng); break;
        case 1: u[i] = std::pow(t, p); break;
        case 2: u[i] = t >= a ? 1.0 : 0.0; break;
        default: u[i] = std::max(0.0, t - a) / std::max(1e-12, 1.0 - a); break;
      }
    }
    if (shape == 0) {
      std::sort(u.data(), u.data() + n);
      if (cone.orientation == Orientation::nonincreasing) u.reverseInPlace();
    }
    const double h = hnorm(u);
    if (h > 0.0) est.max_ratio = std::max(est.max_ratio, u.cwiseAbs().maxCoeff() / h);
    ++est.samples;
  }
  est.C_emb = 2.0 * est.max_ratio;
  return est;
}

/// Sampled lower barrier around u_- : min of E(u_- + rho d) - E(u_-) over random cone directions d
/// with ||d||_H = 1.
inline double geometry_alpha(const Problem& P, const ConeSpec& cone, double rho, int samples, unsigned seed) {
  const Eigen::Index n = P.B().size();
  const Eigen::VectorXd base = Eigen::VectorXd::Constant(n, cone.lower);
  const double E0 = P.energy(base);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  double alpha = kInf;
  for (int k = 0; k < samples; ++k) {
    Eigen::VectorXd d(n);
    for (Eigen::Index i = 0; i < n; ++i) d[i] = k == 0 ? 1.0 : U(rng);
    std::sort(d.data(), d.data() + n);
    if (cone.orientation == Orientation::nonincreasing) d.reverseInPlace();
    d /= P.norm(d);
    alpha = std::min(alpha, P.energy(base + rho * d) - E0);
  }
  return alpha;
}

/// Discrete maximum principle: (-Delta)^s u >= -tol, u >= 0, N_s u >= -tol imply min u > 0 or u ~ 0.
inline bool max_principle_holds(const RadialFunction& u, const AssembledForms& F, double tol) {
  const Eigen::VectorXd lap = apply_fractional_laplacian(u, F);
  const Eigen::VectorXd ns = neumann_derivative(u, F);
  const bool hyp = lap.minCoeff() >= -tol && u.interior.minCoeff() >= 0.0 && (ns.size() == 0 || ns.minCoeff() >= -tol);
  if (!hyp) return true;
  return u.interior.minCoeff() > 0.0 || u.interior.cwiseAbs().maxCoeff() <= tol * std::max(1.0, F.A_full.norm());
}

struct OracleOptions {
  double form_scale = 1.0;  // multiplies the production form (harness self-test)
  int pava_trials = 1000;
  unsigned seed = 7;
};

/// Production objects against the brute-force oracles on a tiny grid.
inline VerificationReport oracle_compare(const RadialGrid& grid, const KernelParams& kp, const OracleOptions& opt = {}) {
  VerificationReport rep;
  if (grid.n_int() > 10) throw ParameterError("oracle comparison needs at most 10 interior nodes");
  AssembledForms F = assemble_forms(grid, kp);
  if (opt.form_scale != 1.0) {
    F.A_full *= opt.form_scale; F.A_II *= opt.form_scale; F.A_Omega *= opt.form_scale;
    F.C_IE *= opt.form_scale; F.G_EE *= opt.form_scale; F.D_I *= opt.form_scale; F.A_red *= opt.form_scale;
    F.G_llt.compute(F.G_EE);
  }
  const Eigen::MatrixXd Af = oracle::dense_full_form(grid, kp);
  const Eigen::MatrixXd Ar = oracle::reduce(Af, grid);
  const double dA = (F.A_red - Ar).cwiseAbs().maxCoeff();
  rep.add("oracle_A_red", dA, 1e-8, dA <= 1e-8, true, "entrywise against nested graded quadrature");

  const auto de = oracle::dense_generalized_eigs(Ar, F.B);
  const auto pe = neumann_eigs(F, F.n_int());
  double dl = 0.0, dv = 0.0;
  for (int i = 0; i < F.n_int(); ++i) {
    dl = std::max(dl, std::abs(pe[i].lambda - de.values[i]));
    if (i == 0) continue;  // constant mode: sign only
    Eigen::VectorXd a = pe[i].eigenfunction.interior, b = de.vectors.col(i);
    if (a.dot(F.B.cwiseProduct(b)) < 0.0) b = -b;
    const bool simple = (i + 1 >= F.n_int() || de.values[i + 1] - de.values[i] > 1e-6) &&
                        de.values[i] - de.values[i - 1] > 1e-6;
    if (simple) dv = std::max(dv, (a - b).cwiseAbs().maxCoeff());
  }
  rep.add("oracle_eigenvalues", dl, 1e-10 * std::max(1.0, de.values.maxCoeff()),
          dl <= 1e-10 * std::max(1.0, de.values.maxCoeff()), true, "dense generalized eigensolve of the oracle form");
  rep.add("oracle_eigenvectors", dv, 1e-6, dv <= 1e-6, true, "simple eigenvalues only, B-normalized");

  if (F.n_int() <= 8) {
    const double le = oracle::enumerate_lambda2_plus(Ar, F.B);
    const double lp = lambda2_increasing(F).pair.lambda;
    rep.add("oracle_lambda2_plus", std::abs(le - lp), 1e-9 * std::max(1.0, le), std::abs(le - lp) <= 1e-9 * std::max(1.0, le),
            true, "enumeration of pooling patterns");
  }

  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0), W(0.1, 2.0);
  std::uniform_int_distribution<int> L(1, 8);
  int mismatches = 0;
  double worst = 0.0;
  for (int k = 0; k < opt.pava_trials; ++k) {
    const int n = L(rng);
    Eigen::VectorXd v(n), w(n);
    for (int i = 0; i < n; ++i) { v[i] = U(rng); w[i] = W(rng); }
    const auto o = k % 2 ? Orientation::nonincreasing : Orientation::nondecreasing;
    const Eigen::VectorXd a = pava_project(v, w, o);
    const Eigen::VectorXd b = oracle::brute_force_isotonic(v, w, o == Orientation::nondecreasing);
    const double d = (a - b).cwiseAbs().maxCoeff();
    worst = std::max(worst, d);
    bool same_pattern = true;
    for (int i = 0; i + 1 < n; ++i) same_pattern = same_pattern && ((a[i] == a[i + 1]) == (std::abs(b[i] - b[i + 1]) <= 1e-14));
    if (!same_pattern || d > 1e-14) ++mismatches;
  }
  rep.add("oracle_pava", worst, 1e-14, mismatches == 0, true,
          std::to_string(opt.pava_trials) + " random vectors; same pooling pattern, values to round-off");
  return rep;
}

}  // namespace fracneu
