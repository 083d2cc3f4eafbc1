#pragma once
// Neumann spectrum of the reduced form, weighted isotonic projection, and the second eigenvalue
// restricted to monotone zero-mean vectors.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "fracneu/discretization.hpp"
#include "fracneu/errors.hpp"

namespace fracneu {

enum class Orientation { nondecreasing, nonincreasing };

struct EigenPair {
  double lambda = 0.0;
  RadialFunction eigenfunction;  // B-normalized
};

/// Generalized eigenpairs A_red v = lambda B v, ascending.
inline std::vector<EigenPair> neumann_eigs(const AssembledForms& F, int k) {
  const int nI = F.n_int();
  if (k < 1 || k > nI) throw ParameterError("requested eigenpair count out of range");
  const Eigen::VectorXd bi = F.B.cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd S = bi.asDiagonal() * F.A_red * bi.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (S + S.transpose()));
  if (es.info() != Eigen::Success) throw NumericalError("symmetric eigensolver failed");
  std::vector<EigenPair> out;
  for (int i = 0; i < k; ++i) {
    EigenPair p;
    p.lambda = es.eigenvalues()[i];
    p.eigenfunction.interior = bi.cwiseProduct(es.eigenvectors().col(i));
    out.push_back(std::move(p));
  }
  if (out[0].lambda < -1e-10 * std::abs(es.eigenvalues()[nI - 1]))
    throw NumericalError("negative eigenvalue " + std::to_string(out[0].lambda));
  return out;
}

/// Weighted least-squares projection onto monotone vectors (pool adjacent violators).
inline Eigen::VectorXd pava_project(const Eigen::VectorXd& v, const Eigen::VectorXd& w,
                                    Orientation o = Orientation::nondecreasing) {
  if (v.size() != w.size()) throw ParameterError("pava: value and weight lengths differ");
  const Eigen::Index n = v.size();
  if ((w.array() <= 0.0).any()) throw ParameterError("pava: weights must be positive");
  const double sgn = o == Orientation::nondecreasing ? 1.0 : -1.0;
  std::vector<double> val, wt;
  std::vector<Eigen::Index> len;
  for (Eigen::Index i = 0; i < n; ++i) {
    val.push_back(sgn * v[i]);
    wt.push_back(w[i]);
    len.push_back(1);
    while (val.size() > 1 && val[val.size() - 2] > val.back()) {
      const double W = wt[wt.size() - 2] + wt.back();
      const double V = (wt[wt.size() - 2] * val[val.size() - 2] + wt.back() * val.back()) / W;
      const Eigen::Index L = len[len.size() - 2] + len.back();
      val.pop_back(); wt.pop_back(); len.pop_back();
      val.back() = V; wt.back() = W; len.back() = L;
    }
  }
  Eigen::VectorXd out(n);
  Eigen::Index k = 0;
  for (std::size_t b = 0; b < val.size(); ++b)
    for (Eigen::Index j = 0; j < len[b]; ++j) out[k++] = sgn * val[b];
  return out;
}

inline bool is_monotone(const Eigen::VectorXd& v, Orientation o = Orientation::nondecreasing) {
  for (Eigen::Index i = 0; i + 1 < v.size(); ++i) {
    if (o == Orientation::nondecreasing ? v[i] > v[i + 1] : v[i] < v[i + 1]) return false;
  }
  return true;
}

/// Projection onto {monotone} intersected with {zero B-mean}: alternate mean removal and PAVA until
/// nothing moves. PAVA preserves the weighted mean, so this settles after one round.
inline Eigen::VectorXd project_monotone_zero_mean(const Eigen::VectorXd& v, const Eigen::VectorXd& B,
                                                  Orientation o = Orientation::nondecreasing) {
  Eigen::VectorXd x = v;
  for (int it = 0; it < 50; ++it) {
    Eigen::VectorXd y = pava_project(x.array() - x.dot(B) / B.sum(), B, o);
    const bool done = (y - x).cwiseAbs().maxCoeff() <= 1e-15 * (1.0 + x.cwiseAbs().maxCoeff());
    x = std::move(y);
    if (done && std::abs(x.dot(B)) <= 1e-14 * B.sum() * (1.0 + x.cwiseAbs().maxCoeff())) break;
  }
  return x;
}

struct Lambda2Plus {
  EigenPair pair;
  double lambda2_rad = 0.0;
  double stationarity = 0.0;  // projected-gradient norm at exit
  int iterations = 0;
};

namespace detail {

inline double rayleigh(const Eigen::MatrixXd& A, const Eigen::VectorXd& B, const Eigen::VectorXd& v) {
  return v.dot(A * v) / v.dot(B.cwiseProduct(v));
}

inline Eigen::VectorXd b_normalize(const Eigen::VectorXd& v, const Eigen::VectorXd& B) {
  return v / std::sqrt(v.dot(B.cwiseProduct(v)));
}

// Equal-value runs of v as contiguous blocks.
inline std::vector<int> pooling_blocks(const Eigen::VectorXd& v, double tol) {
  std::vector<int> block(v.size());
  int b = 0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i > 0 && std::abs(v[i] - v[i - 1]) > tol) ++b;
    block[i] = b;
  }
  return block;
}

// Second eigenpair of the problem pooled on the blocks; empty if it is not monotone.
inline std::optional<Eigen::VectorXd> pooled_candidate(const Eigen::MatrixXd& A, const Eigen::VectorXd& B,
                                                       const std::vector<int>& block) {
  const int n = static_cast<int>(B.size()), nb = block.back() + 1;
  if (nb < 2) return std::nullopt;
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, nb);
  for (int i = 0; i < n; ++i) P(i, block[i]) = 1.0;
  const Eigen::VectorXd Bp = P.transpose() * B;
  const Eigen::VectorXd bi = Bp.cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd S = bi.asDiagonal() * (P.transpose() * A * P) * bi.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (S + S.transpose()));
  Eigen::VectorXd z = bi.cwiseProduct(es.eigenvectors().col(1));
  if (z[nb - 1] < z[0]) z = -z;
  Eigen::VectorXd v = P * z;
  if (!is_monotone(v)) return std::nullopt;
  return v;
}

}  // namespace detail

/// lambda_2^{+,r}: minimum Rayleigh quotient over monotone zero-mean vectors. Projected gradient on
/// the B-sphere from several starts; each result is polished by solving the eigenproblem pooled on
/// its detected equal-value pattern.
inline Lambda2Plus lambda2_increasing(const AssembledForms& F, Orientation o = Orientation::nondecreasing,
                                      unsigned seed = 1, int n_starts = 16, double tol = 1e-9,
                                      int max_iter = 10000) {
  const Eigen::MatrixXd& A = F.A_red;
  const Eigen::VectorXd& B = F.B;
  const int n = F.n_int();
  auto eig = neumann_eigs(F, 2);
  const double lam2 = eig[1].lambda;
  const Eigen::VectorXd Binv = B.cwiseInverse();

  std::vector<Eigen::VectorXd> starts;
  Eigen::VectorXd v2 = eig[1].eigenfunction.interior;
  if (v2[n - 1] < v2[0]) v2 = -v2;
  starts.push_back(project_monotone_zero_mean(v2, B));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  while (static_cast<int>(starts.size()) < n_starts) {
    Eigen::VectorXd r(n);
    for (int i = 0; i < n; ++i) r[i] = U(rng);
    std::sort(r.data(), r.data() + n);
    starts.push_back(project_monotone_zero_mean(r, B));
  }

  Lambda2Plus best;
  best.pair.lambda = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_v;
  int total_it = 0;
  double best_stat = 0.0;
  for (auto v0 : starts) {
    if (v0.cwiseAbs().maxCoeff() == 0.0) continue;
    Eigen::VectorXd v = detail::b_normalize(v0, B);
    double R = detail::rayleigh(A, B, v);
    double eta = 1.0 / std::max(1.0, A.diagonal().cwiseQuotient(B).maxCoeff());
    double stat = std::numeric_limits<double>::infinity();
    for (int it = 0; it < max_iter; ++it, ++total_it) {
      const Eigen::VectorXd G = 2.0 * (Binv.cwiseProduct(A * v) - R * v);
      bool accepted = false;
      for (int bt = 0; bt < 60; ++bt) {
        Eigen::VectorXd w = project_monotone_zero_mean(v - eta * G, B);
        if (w.cwiseAbs().maxCoeff() == 0.0) { eta *= 0.5; continue; }
        w = detail::b_normalize(w, B);
        const double Rw = detail::rayleigh(A, B, w);
        if (Rw <= R) {
          const Eigen::VectorXd d = w - v;
          stat = std::sqrt(d.dot(B.cwiseProduct(d))) / eta;
          v = w; R = Rw; accepted = true;
          eta *= 1.5;
          break;
        }
        eta *= 0.5;
      }
      if (!accepted || stat < tol) break;
    }
    // polish on the detected pattern; keep it only if it is feasible and not worse
    for (int pass = 0; pass < 5; ++pass) {
      auto cand = detail::pooled_candidate(A, B, detail::pooling_blocks(v, 1e-9 * v.cwiseAbs().maxCoeff()));
      if (!cand) break;
      Eigen::VectorXd c = detail::b_normalize(project_monotone_zero_mean(*cand, B), B);
      const double Rc = detail::rayleigh(A, B, c);
      if (Rc > R + 1e-12 * std::abs(R)) break;
      const bool same = (c - v).cwiseAbs().maxCoeff() < 1e-13;
      v = c; R = Rc;
      const Eigen::VectorXd G = 2.0 * (Binv.cwiseProduct(A * v) - R * v);
      const double h = 1e-3 / std::max(1.0, G.cwiseAbs().maxCoeff());
      Eigen::VectorXd d = detail::b_normalize(project_monotone_zero_mean(v - h * G, B), B) - v;
      stat = std::sqrt(d.dot(B.cwiseProduct(d))) / h;
      if (same) break;
      // one projected step to let a wrongly pooled block split before re-detecting
      Eigen::VectorXd w = detail::b_normalize(project_monotone_zero_mean(v - h * G, B), B);
      if (detail::rayleigh(A, B, w) < R - 1e-14 * std::abs(R)) { v = w; R = detail::rayleigh(A, B, v); }
    }
    if (R < best.pair.lambda) {
      best.pair.lambda = R;
      best_v = v;
      best_stat = stat;
    }
  }
  if (!std::isfinite(best.pair.lambda)) throw NumericalError("lambda2+: no feasible start");
  if (best.pair.lambda < lam2 - 1e-10 * std::max(1.0, lam2))
    throw NumericalError("lambda2+ fell below lambda2_rad: " + std::to_string(best.pair.lambda));
  if (o == Orientation::nonincreasing) best_v = -best_v;
  best.pair.eigenfunction.interior = best_v;
  best.lambda2_rad = lam2;
  best.stationarity = best_stat;
  best.iterations = total_it;
  return best;
}

}  // namespace fracneu
