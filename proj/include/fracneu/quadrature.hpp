#pragma once
// Gauss rules on [0,1] generated by Golub-Welsch.
// gauss_jacobi01(n, beta) integrates  \int_0^1 x^beta g(x) dx  exactly for polynomial g of degree < 2n.

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <mutex>
#include <utility>
#include <vector>

namespace fracneu {

struct QuadRule {
  std::vector<double> x;
  std::vector<double> w;
  std::size_t size() const { return x.size(); }
};

namespace detail {

// Jacobi weight (1-x)^a (1+x)^b on [-1,1], mapped to x^b on [0,1].
inline QuadRule golub_welsch_jacobi(int n, double a, double b) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    const double ab = a + b, t = 2.0 * k + ab;
    J(k, k) = (k == 0 && std::abs(ab + 2.0) > 0) ? (b - a) / (ab + 2.0)
                                                 : (b * b - a * a) / (t * (t + 2.0));
    if (k + 1 < n) {
      const double kk = k + 1.0, tt = 2.0 * kk + ab;
      const double num = 4.0 * kk * (kk + a) * (kk + b) * (kk + ab);
      const double den = tt * tt * (tt + 1.0) * (tt - 1.0);
      J(k, k + 1) = J(k + 1, k) = std::sqrt(num / den);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  const double mu0 = std::pow(2.0, a + b + 1.0) * std::tgamma(a + 1.0) * std::tgamma(b + 1.0) /
                     std::tgamma(a + b + 2.0);
  QuadRule r;
  r.x.resize(n);
  r.w.resize(n);
  const double scale = std::pow(2.0, -(b + 1.0));  // x^b on [0,1] <- (1+x)^b on [-1,1]
  for (int i = 0; i < n; ++i) {
    const double v0 = es.eigenvectors()(0, i);
    r.x[i] = 0.5 * (1.0 + es.eigenvalues()(i));
    r.w[i] = mu0 * v0 * v0 * scale * std::pow(2.0, -a);  // (1-x)^a -> 2^a (1-y)^a ; a=0 in practice
  }
  return r;
}

}  // namespace detail

/// Cached Gauss-Jacobi rule for weight x^beta on [0,1] (beta > -1).
inline const QuadRule& gauss_jacobi01(int n, double beta) {
  static std::mutex mtx;
  static std::map<std::pair<int, double>, QuadRule> cache;
  std::lock_guard<std::mutex> lock(mtx);
  auto key = std::make_pair(n, beta);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, detail::golub_welsch_jacobi(n, 0.0, beta)).first;
  return it->second;
}

/// Cached Gauss-Legendre rule on [0,1].
inline const QuadRule& gauss_legendre01(int n) { return gauss_jacobi01(n, 0.0); }

}  // namespace fracneu
