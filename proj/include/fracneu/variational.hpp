#pragma once
// Energy, linear solve T, composed map T~ = T o f~, cone-preserving descent, and the mountain-pass
// search over paths in the restricted cone.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "fracneu/discretization.hpp"
#include "fracneu/errors.hpp"
#include "fracneu/nonlinearity.hpp"
#include "fracneu/spectral.hpp"

namespace fracneu {

struct ConeSpec {
  Orientation orientation = Orientation::nondecreasing;
  double lower = 0.0;
  double upper = kInf;
};

inline void validate_cone(const ConeSpec& c, const DomainSpec& d) {
  if (c.orientation == Orientation::nonincreasing && d.is_ball())
    throw ParameterError("nonincreasing cone is only available on an annulus");
  if (!(c.lower >= 0.0) || !(c.upper > c.lower)) throw ParameterError("cone bounds must satisfy 0 <= lower < upper");
}

/// Exact nodal membership: bounds, monotonicity, nonnegativity.
inline bool in_cone(const Eigen::VectorXd& u, const ConeSpec& c) {
  for (Eigen::Index i = 0; i < u.size(); ++i)
    if (!(u[i] >= c.lower && u[i] <= c.upper && u[i] >= 0.0)) return false;
  return is_monotone(u, c.orientation);
}

/// clamp, PAVA, clamp; twice. Clamping is monotone so the result is exactly feasible.
inline Eigen::VectorXd project_cone(const Eigen::VectorXd& u, const Eigen::VectorXd& B, const ConeSpec& c) {
  const double lo = std::max(0.0, c.lower);
  Eigen::VectorXd x = u.cwiseMax(lo).cwiseMin(c.upper);
  for (int k = 0; k < 2; ++k) {
    x = pava_project(x, B, c.orientation);
    x = x.cwiseMax(lo).cwiseMin(c.upper);
  }
  return x;
}

/// Everything the solvers need for one (forms, truncation) pair. K = A_red + (1+c) B is the inner
/// product matrix; with c = 0 it is the H^s_{Omega,0} scalar product.
struct Problem {
  const AssembledForms* F = nullptr;
  const TruncatedNonlinearity* T = nullptr;
  double c = 0.0;
  Eigen::MatrixXd K;
  Eigen::LLT<Eigen::MatrixXd> K_llt;

  Problem(const AssembledForms& forms, const TruncatedNonlinearity& trunc, std::optional<double> shift = std::nullopt)
      : F(&forms), T(&trunc), c(shift ? *shift : trunc.shift) {
    K = F->A_red;
    K.diagonal() += (1.0 + c) * F->B;
    K_llt.compute(K);
    if (K_llt.info() != Eigen::Success) throw NumericalError("A_red + (1+c)B is not positive definite");
  }

  const Eigen::VectorXd& B() const { return F->B; }
  double inner(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const { return u.dot(K * v); }
  double norm(const Eigen::VectorXd& u) const { return std::sqrt(std::max(0.0, inner(u, u))); }

  Eigen::VectorXd f_of(const Eigen::VectorXd& u) const { return u.unaryExpr([&](double x) { return T->f(x); }); }

  double energy(const Eigen::VectorXd& u) const {
    double Fs = 0.0;
    for (Eigen::Index a = 0; a < u.size(); ++a) Fs += F->B[a] * T->F(u[a]);
    return 0.5 * u.dot(F->A_red * u) + 0.5 * u.dot(F->B.cwiseProduct(u)) - Fs;
  }

  /// (A_red + (1+c)B) v = B h
  Eigen::VectorXd solve(const Eigen::VectorXd& h) const { return K_llt.solve(F->B.cwiseProduct(h)); }

  /// T~(u) = T(f~(u) + c u); fixed points are those of the unshifted problem.
  Eigen::VectorXd tilde_T(const Eigen::VectorXd& u) const { return solve(f_of(u) + c * u); }

  Eigen::VectorXd gradient(const Eigen::VectorXd& u) const { return u - tilde_T(u); }

  double residual(const Eigen::VectorXd& u) const { return norm(gradient(u)); }
};

/// ||u - P(T~(u))||_K with the cone safeguard applied to T~.
inline double safeguarded_residual(const Eigen::VectorXd& u, const Problem& P, const ConeSpec& cone) {
  return P.norm(u - project_cone(P.tilde_T(u), P.B(), cone));
}

inline double energy(const Eigen::VectorXd& u, const AssembledForms& F, const TruncatedNonlinearity& T) {
  return Problem(F, T).energy(u);
}

/// (A_red + B) v = B h
inline Eigen::VectorXd solve_linear(const Eigen::VectorXd& h, const AssembledForms& F) {
  Eigen::MatrixXd K = F.A_red;
  K.diagonal() += F.B;
  Eigen::LLT<Eigen::MatrixXd> llt(K);
  if (llt.info() != Eigen::Success) throw NumericalError("A_red + B factorization failed");
  return llt.solve(F.B.cwiseProduct(h));
}

struct SafeguardedT {
  Eigen::VectorXd value;  // projected into the cone
  double violation = 0.0; // max nodal distance moved by the projection
};

inline SafeguardedT tilde_T_safeguarded(const Eigen::VectorXd& u, const Problem& P, const ConeSpec& cone) {
  SafeguardedT out;
  const Eigen::VectorXd raw = P.tilde_T(u);
  out.value = project_cone(raw, P.B(), cone);
  out.violation = (out.value - raw).cwiseAbs().maxCoeff();
  return out;
}

struct FlowStep {
  Eigen::VectorXd u;
  double lambda = 0.0;
  double energy_before = 0.0, energy_after = 0.0;
  double violation = 0.0;
  bool moved = false;  // false: lambda underflowed, u is returned unchanged
};

/// Projection of (1-lambda) u + lambda T~(u), lambda halved until the energy does not increase.
inline FlowStep flow_step(const Eigen::VectorXd& u, double lambda, const Problem& P, const ConeSpec& cone,
                          std::optional<double> E_u = std::nullopt) {
  if (!(lambda > 0.0 && lambda <= 1.0)) throw ParameterError("flow step needs lambda in (0, 1]");
  FlowStep st;
  st.energy_before = E_u ? *E_u : P.energy(u);
  const auto Tu = tilde_T_safeguarded(u, P, cone);
  st.violation = Tu.violation;
  for (; lambda >= 1e-12; lambda *= 0.5) {
    Eigen::VectorXd w = project_cone((1.0 - lambda) * u + lambda * Tu.value, P.B(), cone);
    const double Ew = P.energy(w);
    if (std::isfinite(Ew) && w.allFinite() && Ew <= st.energy_before) {
      st.u = std::move(w);
      st.lambda = lambda;
      st.energy_after = Ew;
      st.moved = true;
      return st;
    }
  }
  st.u = u;
  st.energy_after = st.energy_before;
  return st;
}

struct InitialPath {
  std::vector<Eigen::VectorXd> points;
  std::vector<double> energies;
  double tau_bar = 0.0, t_minus = 0.0, t_plus = 0.0;
  double energy_u0 = 0.0;
  double max_energy = 0.0;
  std::vector<double> tau_scan, tau_scan_max;  // measured profile, also reported on failure
};

/// gamma(t) = t (u0 + tau v2) for t in [t-, t+], every point projected into the cone.
inline InitialPath build_initial_path(const Problem& P, const ConeSpec& cone, double u0, const Eigen::VectorXd& v2,
                                      int n_points = 33) {
  if (n_points < 3) throw ParameterError("path needs at least 3 points");
  const Eigen::Index n = v2.size();
  if (!is_monotone(v2, cone.orientation)) throw ContractError("v2 orientation does not match the cone");
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(n);
  const double Omega = P.B().sum();
  InitialPath ip;
  ip.energy_u0 = P.energy(u0 * one);
  const double margin = 1e-8 * std::max(1.0, std::abs(ip.energy_u0));

  const double lo = cone.lower, hi = cone.upper;
  ip.t_minus = (lo + 0.05 * (u0 - lo)) / u0;
  auto const_energy = [&](double t) { return Omega * (0.5 * t * t - P.T->F(t)); };
  if (std::isfinite(hi)) {
    ip.t_plus = (hi - 0.05 * (hi - u0)) / u0;
  } else {
    const double E_low = const_energy(lo);
    double t = 2.0;
    while (const_energy(t * u0) >= E_low && t < 1e6) t *= 1.5;
    if (t >= 1e6) throw GeometryError("constant energy never drops below its value at the lower bound");
    ip.t_plus = t;
  }

  auto ray = [&](double tau, int m) {
    std::vector<Eigen::VectorXd> pts;
    for (int i = 0; i < m; ++i) {
      const double t = ip.t_minus + (ip.t_plus - ip.t_minus) * i / (m - 1);
      pts.push_back(project_cone(t * (u0 * one + tau * v2), P.B(), cone));
    }
    return pts;
  };
  auto path_max = [&](const std::vector<Eigen::VectorXd>& pts) {
    double mx = -kInf;
    for (const auto& p : pts) mx = std::max(mx, P.energy(p));
    return mx;
  };

  // finer sampling of t near 1 to resolve the dip; the reported path uses n_points
  const int fine = 4 * n_points + 1;
  const double vmax = v2.cwiseAbs().maxCoeff();
  double tau = 0.5 * (u0 - lo) / vmax;
  double best_tau = 0.0, best_max = kInf;
  for (int k = 0; k <= 50; ++k, tau *= 0.5) {
    const double mx = path_max(ray(tau, fine));
    ip.tau_scan.push_back(tau);
    ip.tau_scan_max.push_back(mx);
    if (mx < ip.energy_u0 - margin && mx < best_max) {
      best_max = mx;
      best_tau = tau;
    }
  }
  if (!(best_tau > 0.0)) throw GeometryError("no tau gives a path below E(u0)");
  ip.tau_bar = best_tau;
  ip.points = ray(best_tau, n_points);
  for (const auto& p : ip.points) ip.energies.push_back(P.energy(p));
  ip.max_energy = *std::max_element(ip.energies.begin(), ip.energies.end());
  return ip;
}

struct MinimaxResult {
  Eigen::VectorXd u_star;
  double level = 0.0;       // E(u_star)
  double residual = 0.0;         // ||u - P(T~(u))||_K, P the cone safeguard
  double relative_residual = 0.0;
  double raw_residual = 0.0;     // ||u - T~(u)||_K without the safeguard
  double cone_violation = 0.0;   // max nodal move of the safeguard at u*
  std::vector<Eigen::VectorXd> path;
  std::vector<double> path_energies;
  int iterations = 0;
  int newton_iterations = 0;
  double t_minus = 0.0, t_plus = 0.0, tau_bar = 0.0;
  double energy_u0 = 0.0;
  double initial_path_max = 0.0;
  double u0 = 0.0;
  double nonconstancy_linf = 0.0;   // ||u* - u0||_inf
  double oscillation = 0.0;         // max u* - min u*
  std::string status;               // "nonconstant", "constant", "unresolved"
  ConeSpec cone;
};

/// Iteration cap without convergence; carries the best iterate.
struct MountainPassFailure : NumericalError {
  MinimaxResult best;
  MountainPassFailure(const std::string& what, MinimaxResult r) : NumericalError(what), best(std::move(r)) {}
};

struct MountainPassOptions {
  int path_points = 33;
  double tol = 1e-10;       // residual target for the polished point
  int max_outer = 2000;
  double step = 0.5;          // fraction of the K-gradient per string update
  double newton_switch = 1e-2; // relative maximizer residual that triggers a Newton attempt
  double distinct_factor = 10.0;
};

namespace detail {

// Arclength (B-norm, weighted towards high energy) reparametrization with fixed endpoints.
inline void reparametrize(std::vector<Eigen::VectorXd>& pts, const std::vector<double>& E, const Eigen::VectorXd& B,
                          const ConeSpec& cone) {
  const int m = static_cast<int>(pts.size());
  const double Emin = *std::min_element(E.begin(), E.end()), Emax = *std::max_element(E.begin(), E.end());
  const double span = std::max(Emax - Emin, 1e-300);
  std::vector<double> s(m, 0.0);
  for (int i = 1; i < m; ++i) {
    const Eigen::VectorXd d = pts[i] - pts[i - 1];
    const double w = 1.0 + 0.5 * ((E[i] + E[i - 1]) / 2.0 - Emin) / span;
    s[i] = s[i - 1] + w * std::sqrt(d.dot(B.cwiseProduct(d)));
  }
  if (!(s.back() > 0.0)) return;
  std::vector<Eigen::VectorXd> out(m);
  out[0] = pts[0];
  out[m - 1] = pts[m - 1];
  int j = 0;
  for (int i = 1; i + 1 < m; ++i) {
    const double target = s.back() * i / (m - 1);
    while (j + 1 < m - 1 && s[j + 1] < target) ++j;
    const double len = s[j + 1] - s[j];
    const double th = len > 0.0 ? (target - s[j]) / len : 0.0;
    out[i] = project_cone((1.0 - th) * pts[j] + th * pts[j + 1], B, cone);
  }
  pts = std::move(out);
}

struct NewtonOutcome {
  Eigen::VectorXd u;
  double residual = kInf;
  int iterations = 0;
  bool converged = false;
};

// Newton on A_red u + B u - B f~(u) = 0 with residual-norm backtracking.
inline NewtonOutcome newton_polish(const Eigen::VectorXd& start, const Problem& P, double tol, int max_it = 40) {
  const auto& F = *P.F;
  auto G = [&](const Eigen::VectorXd& u) -> Eigen::VectorXd {
    return F.A_red * u + F.B.cwiseProduct(u) - F.B.cwiseProduct(P.f_of(u));
  };
  NewtonOutcome out;
  out.u = start;
  Eigen::VectorXd g = G(out.u);
  const double scale = std::max(1.0, P.norm(start));
  for (int it = 0; it < max_it; ++it) {
    out.residual = P.residual(out.u);
    out.iterations = it;
    if (out.residual <= tol * scale) {
      out.converged = true;
      return out;
    }
    Eigen::MatrixXd J = F.A_red;
    for (Eigen::Index a = 0; a < J.rows(); ++a) J(a, a) += F.B[a] * (1.0 - P.T->fprime(out.u[a]));
    const Eigen::VectorXd d = J.partialPivLu().solve(-g);
    if (!d.allFinite()) break;
    double step = 1.0;
    const double g0 = g.norm();
    bool ok = false;
    for (int bt = 0; bt < 30; ++bt, step *= 0.5) {
      Eigen::VectorXd w = out.u + step * d;
      Eigen::VectorXd gw = G(w);
      if (gw.norm() < (1.0 - 1e-4 * step) * g0) {
        out.u = std::move(w);
        g = std::move(gw);
        ok = true;
        break;
      }
    }
    if (!ok) break;
  }
  out.residual = P.residual(out.u);
  out.converged = out.residual <= tol * scale;
  return out;
}

// Semismooth Newton for u = P(T~(u)), P the cone projection. On the pattern of P(T~(u)) (pooled
// blocks, clamped nodes) P is affine with linear part Pi, so the Jacobian is I - Pi K^{-1} B diag(g').
inline NewtonOutcome projected_newton(const Eigen::VectorXd& start, const Problem& P, const ConeSpec& cone,
                                      double tol, int max_it = 40) {
  const Eigen::VectorXd& B = P.B();
  const Eigen::Index n = start.size();
  auto H = [&](const Eigen::VectorXd& u, Eigen::VectorXd* proj) {
    Eigen::VectorXd p = project_cone(P.tilde_T(u), B, cone);
    Eigen::VectorXd h = u - p;
    if (proj) *proj = std::move(p);
    return h;
  };
  NewtonOutcome out;
  out.u = project_cone(start, B, cone);
  Eigen::VectorXd p;
  Eigen::VectorXd h = H(out.u, &p);
  for (int it = 0; it < max_it; ++it) {
    out.iterations = it;
    out.residual = P.norm(h);
    if (out.residual <= tol * std::max(1.0, P.norm(out.u))) {
      out.converged = true;
      return out;
    }
    const double lo = std::max(0.0, cone.lower);
    Eigen::MatrixXd Pi = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n;) {
      Eigen::Index j = i;
      while (j + 1 < n && p[j + 1] == p[i]) ++j;
      if (p[i] != lo && p[i] != cone.upper) {
        const double w = B.segment(i, j - i + 1).sum();
        for (Eigen::Index a = i; a <= j; ++a)
          for (Eigen::Index b = i; b <= j; ++b) Pi(a, b) = B[b] / w;
      }
      i = j + 1;
    }
    Eigen::VectorXd gp(n);
    for (Eigen::Index a = 0; a < n; ++a) gp[a] = B[a] * (P.T->fprime(out.u[a]) + P.c);
    const Eigen::MatrixXd M = P.K_llt.solve(Eigen::MatrixXd(gp.asDiagonal()));
    const Eigen::MatrixXd J = Eigen::MatrixXd::Identity(n, n) - Pi * M;
    const Eigen::VectorXd d = J.partialPivLu().solve(-h);
    if (!d.allFinite()) break;
    double step = 1.0;
    bool ok = false;
    const double h0 = P.norm(h);
    for (int bt = 0; bt < 30; ++bt, step *= 0.5) {
      Eigen::VectorXd w = out.u + step * d, pw;
      Eigen::VectorXd hw = H(w, &pw);
      if (P.norm(hw) < (1.0 - 1e-4 * step) * h0) {
        out.u = std::move(w);
        h = std::move(hw);
        p = std::move(pw);
        ok = true;
        break;
      }
    }
    if (!ok) break;
  }
  out.residual = P.norm(h);
  out.converged = out.residual <= tol * std::max(1.0, P.norm(out.u));
  return out;
}

}  // namespace detail

/// Climbing-image string: interior path points descend along the part of -grad orthogonal to the
/// path, the current maximizer ascends along the path tangent and descends across it, and each half
/// of the path is re-spaced by arclength. Endpoints stay fixed. When the maximizer is nearly critical
/// it is polished by Newton and accepted if it stays close, inside the cone and below E(u0).
inline MinimaxResult mountain_pass(const Problem& P, const ConeSpec& cone, double u0, const Eigen::VectorXd& v2,
                                   const MountainPassOptions& opt = {}) {
  MinimaxResult res;
  res.cone = cone;
  res.u0 = u0;
  auto ip = build_initial_path(P, cone, u0, v2, opt.path_points);
  res.t_minus = ip.t_minus;
  res.t_plus = ip.t_plus;
  res.tau_bar = ip.tau_bar;
  res.energy_u0 = ip.energy_u0;
  res.initial_path_max = ip.max_energy;

  auto pts = ip.points;
  std::vector<double> E = ip.energies;
  const Eigen::VectorXd& B = P.B();
  const int m = static_cast<int>(pts.size());
  std::optional<detail::NewtonOutcome> accepted;
  double last_try = kInf;
  const double step = opt.step;

  for (int it = 0; it < opt.max_outer; ++it) {
    res.iterations = it + 1;
    const int imax = static_cast<int>(std::max_element(E.begin(), E.end()) - E.begin());
    if (imax == 0 || imax == m - 1) break;  // the maximum sits on an endpoint: geometry lost
    const Eigen::VectorXd gmax = P.gradient(pts[imax]);
    const double r = P.norm(gmax);
    const double scale = std::max(1.0, P.norm(pts[imax]));
    if (r < opt.newton_switch * scale && r < 0.5 * last_try) {
      last_try = r;
      // raw Newton gets close to the discrete critical point; the projected fixed point is then
      // found by semismooth Newton from its projection
      auto raw = detail::newton_polish(pts[imax], P, 1e-3 * opt.tol);
      auto nt = detail::projected_newton(raw.converged ? raw.u : pts[imax], P, cone, 1e-3 * opt.tol);
      {
        // the returned point is P(T~(u)), exactly in the cone
        Eigen::VectorXd u = project_cone(P.tilde_T(nt.u), B, cone);
        const double ru = safeguarded_residual(u, P, cone);
        const double dist = (u - pts[imax]).cwiseAbs().maxCoeff();
        if (ru <= opt.tol * std::max(1.0, P.norm(u)) &&
            dist <= 0.25 * std::max(1e-12, pts[imax].cwiseAbs().maxCoeff()) && P.energy(u) < ip.energy_u0) {
          nt.u = u;
          nt.residual = ru;
          accepted = nt;
          break;
        }
      }
    }
    std::vector<Eigen::VectorXd> next = pts;
    for (int i = 1; i + 1 < m; ++i) {
      // upwind tangent towards the higher neighbour, K-normalized
      Eigen::VectorXd tau;
      if (i == imax)
        tau = pts[i + 1] - pts[i - 1];
      else
        tau = E[i + 1] > E[i - 1] ? Eigen::VectorXd(pts[i + 1] - pts[i]) : Eigen::VectorXd(pts[i] - pts[i - 1]);
      const double tn = P.norm(tau);
      const Eigen::VectorXd g = i == imax ? gmax : P.gradient(pts[i]);
      Eigen::VectorXd dir = g;
      if (tn > 0.0) {
        tau /= tn;
        dir -= (i == imax ? 2.0 : 1.0) * P.inner(g, tau) * tau;
      }
      next[i] = project_cone(pts[i] - step * dir, B, cone);
    }
    // re-space each side of the climbing point separately
    std::vector<double> En(m);
    for (int i = 0; i < m; ++i) En[i] = (i == 0 || i == m - 1) ? E[i] : P.energy(next[i]);
    std::vector<Eigen::VectorXd> left(next.begin(), next.begin() + imax + 1), right(next.begin() + imax, next.end());
    std::vector<double> El(En.begin(), En.begin() + imax + 1), Er(En.begin() + imax, En.end());
    if (left.size() > 2) detail::reparametrize(left, El, B, cone);
    if (right.size() > 2) detail::reparametrize(right, Er, B, cone);
    for (int i = 0; i <= imax; ++i) pts[i] = left[i];
    for (int i = imax; i < m; ++i) pts[i] = right[i - imax];
    for (int i = 1; i + 1 < m; ++i) E[i] = P.energy(pts[i]);
  }

  res.path = pts;
  res.path_energies = E;
  if (!accepted) {
    const auto imax = static_cast<std::size_t>(std::max_element(E.begin(), E.end()) - E.begin());
    res.u_star = pts[imax];
    res.level = E[imax];
    res.residual = safeguarded_residual(res.u_star, P, cone);
    res.relative_residual = res.residual / std::max(1.0, P.norm(res.u_star));
    res.raw_residual = P.residual(res.u_star);
    res.status = "unresolved";
    throw MountainPassFailure("mountain pass did not converge: residual " + std::to_string(res.residual), res);
  }
  res.u_star = accepted->u;
  res.newton_iterations = accepted->iterations;
  res.level = P.energy(res.u_star);
  res.residual = accepted->residual;
  res.relative_residual = res.residual / std::max(1.0, P.norm(res.u_star));
  res.raw_residual = P.residual(res.u_star);
  res.cone_violation = tilde_T_safeguarded(res.u_star, P, cone).violation;
  res.nonconstancy_linf = (res.u_star.array() - u0).abs().maxCoeff();
  res.oscillation = res.u_star.maxCoeff() - res.u_star.minCoeff();
  const double thresh = opt.distinct_factor * opt.tol * std::max(1.0, P.norm(res.u_star));
  if (res.oscillation > thresh && res.level < res.energy_u0)
    res.status = "nonconstant";
  else if (res.oscillation <= thresh)
    res.status = "constant";
  else
    res.status = "unresolved";
  return res;
}

struct MultiSolveResult {
  std::vector<std::optional<MinimaxResult>> solutions;  // one per band, empty when that band failed
  std::vector<std::string> errors;
  bool interleaving = false;  // u_{-,1} <= u_1 <= u_{+,1} <= u_{-,2} <= u_2 <= ... nodal-wise
  bool distinct = false;
};

/// One mountain pass per admissible fixed point, each in its own band [u_-, u_+].
inline MultiSolveResult multi_solve(const Problem& P, Orientation o, const std::vector<double>& u0,
                                    const std::vector<double>& u_minus, const std::vector<double>& u_plus,
                                    const Eigen::VectorXd& v2, const MountainPassOptions& opt = {}) {
  MultiSolveResult out;
  for (std::size_t i = 0; i < u0.size(); ++i) {
    ConeSpec cone{o, u_minus[i], u_plus[i]};
    try {
      out.solutions.push_back(mountain_pass(P, cone, u0[i], v2, opt));
      out.errors.emplace_back();
    } catch (const std::exception& e) {
      out.solutions.push_back(std::nullopt);
      out.errors.emplace_back(e.what());
    }
  }
  bool inter = true, dist = true;
  for (std::size_t i = 0; i < u0.size(); ++i) {
    if (i + 1 < u0.size() && u_plus[i] > u_minus[i + 1]) inter = false;
    if (!out.solutions[i]) { inter = false; dist = false; continue; }
    const auto& u = out.solutions[i]->u_star;
    if (u.minCoeff() < u_minus[i] || u.maxCoeff() > u_plus[i]) inter = false;
    for (std::size_t j = 0; j < i; ++j) {
      if (!out.solutions[j]) continue;
      const double d = (u - out.solutions[j]->u_star).cwiseAbs().maxCoeff();
      const double tol = out.solutions[i]->residual + out.solutions[j]->residual;
      if (!(d > tol)) dist = false;
    }
  }
  out.interleaving = inter;
  out.distinct = dist;
  return out;
}

}  // namespace fracneu
