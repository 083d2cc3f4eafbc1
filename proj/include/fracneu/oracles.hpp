#pragma once
// Brute-force reference computations for tiny instances. They share no quadrature code with the
// production assembly: everything here is hp-graded composite Gauss-Legendre on the original variables.

#include "fracneu/discretization.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

namespace fracneu::oracle {

namespace detail {

struct Graded {
  std::vector<double> x, w;
};

// Composite rule on [a,b] refined geometrically towards both ends. la/lb are the number of
// levels used at each end.
inline Graded graded_rule(double a, double b, int la, int lb, int npts = 10, double sigma = 0.5) {
  Graded g;
  const auto& q = gauss_legendre01(npts);
  auto push = [&](double lo, double hi) {
    for (std::size_t i = 0; i < q.size(); ++i) {
      g.x.push_back(lo + (hi - lo) * q.x[i]);
      g.w.push_back((hi - lo) * q.w[i]);
    }
  };
  const double mid = 0.5 * (a + b);
  // left half graded towards a
  {
    double hi = mid;
    for (int k = 0; k < la; ++k) {
      const double lo = a + (hi - a) * sigma;
      push(lo, hi);
      hi = lo;
    }
    push(a, hi);
  }
  {
    double lo = mid;
    for (int k = 0; k < lb; ++k) {
      const double hi = b - (b - lo) * sigma;
      push(lo, hi);
      lo = hi;
    }
    push(lo, b);
  }
  return g;
}

// Cells shrink by 1/2 towards an end, so every cell sits at least one cell width away from a
// singularity at that end; enough levels are used to reach the distance of a nearby singularity.
inline int levels_for(double dist, double len) {
  if (dist <= 0.0) return 60;
  const double ratio = dist / len;
  if (ratio > 1.0) return 1;
  return std::min(60, 2 + static_cast<int>(std::ceil(std::log2(1.0 / ratio))));
}

}  // namespace detail

// (r rho)^{n-1} K(r,rho) with the separation d = |r - rho| supplied exactly.
inline double kernel_at(double r, double rho, double d, const KernelParams& kp) {
  const double p = kp.n + 2.0 * kp.s;
  if (kp.n == 1) return std::pow(d, -p) + std::pow(r + rho, -p);
  if (kp.n == 3)
    return 2.0 * std::numbers::pi * r * rho / (p - 2.0) * (std::pow(d, 2.0 - p) - std::pow(r + rho, 2.0 - p));
  return weighted_kernel(r, rho, kp);
}

/// Full form over all nodes computed by nested graded quadrature of
///   (1/2)\int_I\int_I W (U(r)-U(rho))^2 + \int_I\int_E W (U(r)-U(rho))^2
/// with U beyond R_ext equal to the mass-weighted mean of the interior values.
/// Points are carried as offsets from element ends so that separations and basis differences near
/// the singular set are formed without cancellation.
inline Eigen::MatrixXd dense_full_form(const RadialGrid& g, const KernelParams& kp) {
  const int nd = g.n_dof();
  const auto& x = g.x;
  const double pref = kp.c_ns * sphere_area(kp.n);
  const double Omega = g.spec.measure();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(nd, nd);

  std::vector<double> coef(nd, 0.0);
  std::vector<int> idx;
  auto reset = [&]() {
    for (int a : idx) coef[a] = 0.0;
    idx.clear();
  };
  auto add = [&](int k, double v) {
    if (std::find(idx.begin(), idx.end(), k) == idx.end()) idx.push_back(k);
    coef[k] += v;
  };
  auto accumulate = [&](double w) {
    for (int a : idx)
      for (int b : idx) A(a, b) += w * coef[a] * coef[b];
  };

  for (int e = g.first_int; e < g.last_int; ++e) {
    const double a = x[e], b = x[e + 1], h = b - a;
    for (int side = 0; side < 2; ++side) {
      auto outer = detail::graded_rule(0.0, 0.5 * h, 50, 1);
      for (std::size_t io = 0; io < outer.x.size(); ++io) {
        const double da = side == 0 ? outer.x[io] : h - outer.x[io];  // r - a
        const double db = side == 0 ? h - outer.x[io] : outer.x[io];  // b - r
        const double r = side == 0 ? a + da : b - db;
        const double wo = outer.w[io] * pref;
        auto refl = [&](double rho_end) { return kp.n == 1 ? r + rho_end : 1e300; };

        for (int f = 0; f + 1 < nd; ++f) {
          const double c = x[f], d = x[f + 1], hf = d - c;
          const double chi = g.is_interior_elem(f) ? 0.5 : 1.0;
          if (f == e) {
            // rho = r -/+ t inside the same element
            for (int dir = 0; dir < 2; ++dir) {
              const double len = dir == 0 ? da : db;
              if (len <= 0.0) continue;
              const double far_end = dir == 0 ? refl(a) : 1e300;
              auto rule = detail::graded_rule(0.0, len, 60, detail::levels_for(far_end, len));
              for (std::size_t ii = 0; ii < rule.x.size(); ++ii) {
                const double t = rule.x[ii];
                const double rho = dir == 0 ? r - t : r + t;
                const double sgn = dir == 0 ? 1.0 : -1.0;
                reset();
                add(e, -sgn * t / h);
                add(e + 1, sgn * t / h);
                accumulate(chi * wo * rule.w[ii] * kernel_at(r, rho, t, kp));
              }
            }
          } else if (f == e - 1) {
            auto rule = detail::graded_rule(0.0, hf, detail::levels_for(da, hf),
                                            detail::levels_for(std::min(da + hf, refl(c)), hf));
            for (std::size_t ii = 0; ii < rule.x.size(); ++ii) {
              const double sg = rule.x[ii];  // a - rho
              const double rho = a - sg;
              reset();
              add(e + 1, da / h);
              add(e, sg / hf - da / h);
              add(f, -sg / hf);
              accumulate(chi * wo * rule.w[ii] * kernel_at(r, rho, da + sg, kp));
            }
          } else if (f == e + 1) {
            auto rule = detail::graded_rule(0.0, hf, detail::levels_for(db, hf), 1);
            for (std::size_t ii = 0; ii < rule.x.size(); ++ii) {
              const double sg = rule.x[ii];  // rho - b
              const double rho = b + sg;
              reset();
              add(e, db / h);
              add(e + 1, sg / hf - db / h);
              add(f + 1, -sg / hf);
              accumulate(chi * wo * rule.w[ii] * kernel_at(r, rho, db + sg, kp));
            }
          } else {
            const double dl = std::min(std::abs(c - r), refl(c)), dr = std::abs(d - r);
            auto rule = detail::graded_rule(c, d, detail::levels_for(dl, hf), detail::levels_for(dr, hf));
            for (std::size_t ii = 0; ii < rule.x.size(); ++ii) {
              const double rho = rule.x[ii];
              const double q1 = (rho - c) / hf;
              reset();
              add(e, db / h);
              add(e + 1, da / h);
              add(f, -(1.0 - q1));
              add(f + 1, -q1);
              accumulate(chi * wo * rule.w[ii] * kernel_at(r, rho, std::abs(r - rho), kp));
            }
          }
        }
        // far field rho = R_ext / y
        auto far = detail::graded_rule(0.0, 1.0, 60, 1);
        double T = 0.0;
        for (std::size_t ii = 0; ii < far.x.size(); ++ii) {
          const double y = far.x[ii];
          const double rho = g.spec.R_ext / y;
          T += far.w[ii] * kernel_at(r, rho, rho - r, kp) * g.spec.R_ext / (y * y);
        }
        reset();
        add(e, db / h);
        add(e + 1, da / h);
        for (int m = 0; m < g.n_int(); ++m) add(g.first_int + m, -g.mass[m] / Omega);
        accumulate(wo * T);
      }
    }
  }
  return 0.5 * (A + A.transpose());
}

/// Schur reduction of a full form onto the interior nodes.
inline Eigen::MatrixXd reduce(const Eigen::MatrixXd& A, const RadialGrid& g) {
  const int nI = g.n_int(), nE = g.n_ext();
  Eigen::MatrixXd AII = A.block(g.first_int, g.first_int, nI, nI);
  Eigen::MatrixXd AIE(nI, nE), AEE(nE, nE);
  for (int j = 0; j < nE; ++j) {
    for (int a = 0; a < nI; ++a) AIE(a, j) = A(g.first_int + a, g.ext[j]);
    for (int k = 0; k < nE; ++k) AEE(j, k) = A(g.ext[j], g.ext[k]);
  }
  Eigen::MatrixXd R = AII - AIE * AEE.ldlt().solve(AIE.transpose());
  return 0.5 * (R + R.transpose());
}

/// Generalized eigenpairs of (A, diag(B)) by Eigen's Cholesky-based generalized solver.
struct DenseEig {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;  // B-normalized columns
};

inline DenseEig dense_generalized_eigs(const Eigen::MatrixXd& A, const Eigen::VectorXd& B) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::MatrixXd(B.asDiagonal()));
  return {es.eigenvalues(), es.eigenvectors()};
}

/// Exact weighted least-squares projection onto monotone vectors by enumerating every partition into
/// contiguous blocks (2^{n-1} candidates). n <= 20.
inline Eigen::VectorXd brute_force_isotonic(const Eigen::VectorXd& v, const Eigen::VectorXd& w, bool nondecreasing) {
  const int n = static_cast<int>(v.size());
  double best = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_x = v;
  for (unsigned mask = 0; mask < (1u << (n - 1)); ++mask) {
    Eigen::VectorXd xcand(n);
    int start = 0;
    for (int i = 0; i < n; ++i) {
      const bool cut = (i == n - 1) || (mask & (1u << i));
      if (cut) {
        double sw = 0, sv = 0;
        for (int k = start; k <= i; ++k) sw += w[k], sv += w[k] * v[k];
        for (int k = start; k <= i; ++k) xcand[k] = sv / sw;
        start = i + 1;
      }
    }
    bool ok = true;
    for (int i = 0; i + 1 < n && ok; ++i)
      ok = nondecreasing ? xcand[i] <= xcand[i + 1] : xcand[i] >= xcand[i + 1];
    if (!ok) continue;
    const double dist = (xcand - v).cwiseAbs2().dot(w);
    if (dist < best) best = dist, best_x = xcand;
  }
  return best_x;
}

/// lambda_2^{+,r} by enumerating pooling patterns: each pattern restricts v to be constant on contiguous
/// blocks; the pooled generalized eigenproblem is solved densely and every monotone non-constant
/// eigenvector is a candidate. The minimum over candidates is the cone-constrained infimum.
inline double enumerate_lambda2_plus(const Eigen::MatrixXd& A, const Eigen::VectorXd& B) {
  const int n = static_cast<int>(B.size());
  double best = std::numeric_limits<double>::infinity();
  for (unsigned mask = 0; mask < (1u << (n - 1)); ++mask) {
    std::vector<int> block(n);
    int nb = 0;
    for (int i = 0; i < n; ++i) {
      block[i] = nb;
      if (i == n - 1 || (mask & (1u << i))) ++nb;
    }
    if (nb < 2) continue;
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, nb);
    for (int i = 0; i < n; ++i) P(i, block[i]) = 1.0;
    Eigen::MatrixXd Ap = P.transpose() * A * P;
    Eigen::MatrixXd Bp = P.transpose() * B.asDiagonal() * P;
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(Ap, Bp);
    for (int k = 0; k < nb; ++k) {
      Eigen::VectorXd z = es.eigenvectors().col(k);
      Eigen::VectorXd v = P * z;
      const double mean = v.dot(B) / B.sum();
      if (std::abs(mean) > 1e-8 * v.cwiseAbs().maxCoeff()) continue;  // constant direction
      for (double sgn : {1.0, -1.0}) {
        bool mono = true;
        for (int i = 0; i + 1 < nb && mono; ++i) mono = sgn * z[i] <= sgn * z[i + 1];
        if (mono) best = std::min(best, es.eigenvalues()[k]);
      }
    }
  }
  return best;
}

}  // namespace fracneu::oracle
