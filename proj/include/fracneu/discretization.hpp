#pragma once
// Radial P1 discretization of the H^s_{Omega,0} seminorm
//   (c/2) \iint_{R^{2n} \ (Omega^c)^2} (u(x)-u(y))^2 |x-y|^{-n-2s}
// on a single ascending node array covering the inner exterior (annulus only), Omega and [R, R_ext].
// Beyond R_ext the extension is replaced by the Lebesgue mean of u over Omega.

#include "fracneu/errors.hpp"
#include "fracneu/quadrature.hpp"
#include "fracneu/radial_kernel.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <optional>
#include <string>
#include <vector>

namespace fracneu {

struct DomainSpec {
  int n = 1;
  double s = 0.75;
  double R0 = 0.0;  // 0 means ball
  double R = 1.0;
  double R_ext = 8.0;

  bool is_ball() const { return R0 == 0.0; }
  double measure() const { return domain_measure(n, R0, R); }
};

inline void validate(const DomainSpec& d) {
  if (d.n < 1) throw ParameterError("dimension n must be >= 1");
  check_order(d.s);
  if (!(d.R0 >= 0.0 && d.R0 < d.R && d.R < d.R_ext))
    throw ParameterError("radii must satisfy 0 <= R0 < R < R_ext");
}

struct RadialGrid {
  DomainSpec spec;
  std::vector<double> x;   // every node, ascending
  int first_int = 0;       // node index of r = R0
  int last_int = 0;        // node index of r = R
  std::vector<int> ext;    // node indices of exterior unknowns (interface nodes excluded)
  Eigen::VectorXd mass;    // lumped interior masses, omega_n \int phi_a r^{n-1}
  Eigen::VectorXd ext_mass;

  int n_int() const { return last_int - first_int + 1; }
  int n_ext() const { return static_cast<int>(ext.size()); }
  int n_dof() const { return static_cast<int>(x.size()); }
  bool is_interior_node(int k) const { return k >= first_int && k <= last_int; }
  bool is_interior_elem(int e) const { return e >= first_int && e + 1 <= last_int; }
  int n_elem() const { return n_dof() - 1; }

  std::vector<double> interior_nodes() const {
    return {x.begin() + first_int, x.begin() + last_int + 1};
  }
  std::vector<double> exterior_nodes() const {  // [R, R_ext], interface node included
    return {x.begin() + last_int, x.end()};
  }
  std::vector<double> inner_exterior_nodes() const {  // [0, R0], empty for the ball
    if (first_int == 0) return {};
    return {x.begin(), x.begin() + first_int + 1};
  }
};

namespace detail {

// Geometric progression of m cells starting at h0 summing to L (ratio >= 1).
inline std::vector<double> geometric_cells(double h0, double L, int m) {
  std::vector<double> cells(m);
  if (h0 * m >= L) {
    std::fill(cells.begin(), cells.end(), L / m);
    return cells;
  }
  auto total = [&](double q) {
    double t = 0, h = h0;
    for (int i = 0; i < m; ++i, h *= q) t += h;
    return t;
  };
  double lo = 1.0, hi = 2.0;
  while (total(hi) < L) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (total(mid) < L ? lo : hi) = mid;
  }
  double h = h0;
  for (int i = 0; i < m; ++i, h *= lo) cells[i] = h;
  const double scale = L / total(lo);
  for (auto& c : cells) c *= scale;
  return cells;
}

inline double lumped_mass(const std::vector<double>& x, int k, int n, bool left, bool right) {
  const auto& g = gauss_legendre01(8);
  double m = 0.0;
  if (left && k > 0) {
    const double a = x[k - 1], b = x[k], h = b - a;
    for (std::size_t q = 0; q < g.size(); ++q) {
      const double r = a + h * g.x[q];
      m += g.w[q] * h * g.x[q] * std::pow(r, n - 1);
    }
  }
  if (right && k + 1 < static_cast<int>(x.size())) {
    const double a = x[k], b = x[k + 1], h = b - a;
    for (std::size_t q = 0; q < g.size(); ++q) {
      const double r = a + h * g.x[q];
      m += g.w[q] * h * (1.0 - g.x[q]) * std::pow(r, n - 1);
    }
  }
  return sphere_area(n) * m;
}

}  // namespace detail

/// Graded radial mesh. grading = 1 gives uniform interior spacing; > 1 clusters nodes at the boundary.
/// The exterior [R, R_ext] uses N_ext geometrically growing cells starting at the last interior spacing;
/// the inner exterior (0, R0) of an annulus uses max(2, N_ext/2) cells shrinking towards R0.
inline RadialGrid build_grid(const DomainSpec& spec, int N_int, int N_ext, double grading = 1.0) {
  validate(spec);
  if (N_int < 4) throw ParameterError("N_int must be >= 4");
  if (N_ext < 2) throw ParameterError("N_ext must be >= 2");
  if (!(grading >= 1.0)) throw ParameterError("grading exponent must be >= 1");

  std::vector<double> xi(N_int + 1);
  const double R0 = spec.R0, R = spec.R;
  for (int i = 0; i <= N_int; ++i) {
    const double t = static_cast<double>(i) / N_int;
    double g;
    if (spec.is_ball()) {
      g = 1.0 - std::pow(1.0 - t, grading);
    } else {
      const double z = 2.0 * t - 1.0;
      const double psi = (z >= 0 ? 1.0 : -1.0) * (1.0 - std::pow(1.0 - std::abs(z), grading));
      g = 0.5 * (1.0 + psi);
    }
    xi[i] = R0 + (R - R0) * g;
  }
  xi.front() = R0;
  xi.back() = R;

  RadialGrid grid;
  grid.spec = spec;
  if (!spec.is_ball()) {
    const int m = std::max(2, N_ext / 2);
    auto cells = detail::geometric_cells(xi[1] - xi[0], R0, m);
    std::vector<double> inner(m + 1);
    inner[m] = R0;
    for (int i = m - 1; i >= 0; --i) inner[i] = inner[i + 1] - cells[m - 1 - i];
    inner[0] = 0.0;
    grid.x.assign(inner.begin(), inner.end() - 1);
  }
  grid.first_int = static_cast<int>(grid.x.size());
  grid.x.insert(grid.x.end(), xi.begin(), xi.end());
  grid.last_int = static_cast<int>(grid.x.size()) - 1;
  auto cells = detail::geometric_cells(xi[N_int] - xi[N_int - 1], spec.R_ext - R, N_ext);
  double r = R;
  for (int i = 0; i < N_ext; ++i) {
    r += cells[i];
    grid.x.push_back(i + 1 == N_ext ? spec.R_ext : r);
  }
  for (std::size_t k = 1; k < grid.x.size(); ++k)
    if (!(grid.x[k] > grid.x[k - 1])) throw ParameterError("mesh nodes not strictly increasing");

  for (int k = 0; k < grid.n_dof(); ++k)
    if (!grid.is_interior_node(k)) grid.ext.push_back(k);

  const int n = spec.n;
  grid.mass.resize(grid.n_int());
  for (int a = 0; a < grid.n_int(); ++a) {
    const int k = grid.first_int + a;
    grid.mass[a] = detail::lumped_mass(grid.x, k, n, k > grid.first_int, k < grid.last_int);
  }
  grid.ext_mass.resize(grid.n_ext());
  for (int j = 0; j < grid.n_ext(); ++j) {
    const int k = grid.ext[j];
    grid.ext_mass[j] = detail::lumped_mass(grid.x, k, n, true, true);
  }
  return grid;
}

/// Nodal values of a radial function on the interior nodes, optionally with exterior (extension) data.
struct RadialFunction {
  Eigen::VectorXd interior;
  std::optional<Eigen::VectorXd> exterior;  // one value per exterior unknown (grid.ext order)
  std::optional<double> farfield;
  bool extended = false;
};

struct AssembledForms {
  RadialGrid grid;
  KernelParams kp;
  Eigen::MatrixXd A_full;   // all nodes; interior block contains the far-field correction
  Eigen::MatrixXd A_Omega;  // Omega x Omega part only
  Eigen::MatrixXd A_II;     // interior block of A_full
  Eigen::MatrixXd C_IE;     // -(interior/exterior block of A_full)
  Eigen::MatrixXd G_EE;     // exterior block of A_full
  Eigen::MatrixXd D_I;      // A_II - A_Omega (cross and tail contributions)
  Eigen::MatrixXd A_red;    // Schur complement, the reduced seminorm form
  Eigen::VectorXd B;        // lumped interior mass (diagonal)
  Eigen::VectorXd tail_col; // \int_Omega T phi_a
  double tail_scalar = 0.0; // \int_Omega T
  Eigen::LLT<Eigen::MatrixXd> G_llt;

  double measure() const { return grid.spec.measure(); }
  int n_int() const { return grid.n_int(); }
};

namespace detail {

constexpr int kGauss = 10;   // GL points per separated cell
constexpr int kJacobi = 16;  // points per direction on singular pairs

struct PairAssembler {
  const RadialGrid& g;
  const KernelParams& kp;
  double pref;  // c_{n,s} omega_n
  Eigen::MatrixXd& A;

  // [a,b] is a sub-interval of parent element (pa, pb); same for [c,d] in (pc, pd).
  // Accumulates \int\int W c c^T with c = (phi0(r), phi1(r), -psi0(rho), -psi1(rho)).
  void separated(double a, double b, double pa, double pb, double c, double d, double pc, double pd,
                 double local[4][4], int depth = 0) const {
    const double gap = (c >= b) ? c - b : a - d;
    const double size = std::max(b - a, d - c);
    if (gap < size && depth < 40) {
      if (b - a >= d - c) {
        const double m = 0.5 * (a + b);
        separated(a, m, pa, pb, c, d, pc, pd, local, depth + 1);
        separated(m, b, pa, pb, c, d, pc, pd, local, depth + 1);
      } else {
        const double m = 0.5 * (c + d);
        separated(a, b, pa, pb, c, m, pc, pd, local, depth + 1);
        separated(a, b, pa, pb, m, d, pc, pd, local, depth + 1);
      }
      return;
    }
    const auto& q = gauss_legendre01(kGauss);
    const double h1 = b - a, h2 = d - c, H1 = pb - pa, H2 = pd - pc;
    for (std::size_t i = 0; i < q.size(); ++i) {
      const double r = a + h1 * q.x[i];
      const double p1 = (r - pa) / H1;
      for (std::size_t j = 0; j < q.size(); ++j) {
        const double rho = c + h2 * q.x[j];
        const double p2 = (rho - pc) / H2;
        const double w = q.w[i] * q.w[j] * h1 * h2 * pref * weighted_kernel(r, rho, kp);
        const double cv[4] = {1.0 - p1, p1, -(1.0 - p2), -p2};
        for (int k = 0; k < 4; ++k)
          for (int l = 0; l < 4; ++l) local[k][l] += w * cv[k] * cv[l];
      }
    }
  }

  // (1/2) \iint_{e x e} W (U(r)-U(rho))^2 = J (u1-u0)^2 with J the integral over {rho < r}.
  double self_pair(double a, double b) const {
    const double h = b - a, s = kp.s;
    const auto& gx = gauss_jacobi01(kJacobi, 2.0 - 2.0 * s);
    const auto& gt = gauss_jacobi01(kJacobi, 1.0 - 2.0 * s);
    const auto& gl = gauss_legendre01(kJacobi);
    double J = 0.0;
    // singular part: S (h x t)^{-1-2s} (h x t)^2 / h^2 * h^2 x
    for (std::size_t i = 0; i < gx.size(); ++i)
      for (std::size_t j = 0; j < gt.size(); ++j) {
        const double r = a + h * gx.x[i], rho = a + h * gx.x[i] * (1.0 - gt.x[j]);
        J += gx.w[i] * gt.w[j] * weighted_split(r, rho, kp).sing * std::pow(h, 1.0 - 2.0 * s);
      }
    // regular part: Reg (h x t)^2 x
    if (kp.n == 1 || kp.n == 3) {
      if (a == 0.0) {
        for (std::size_t i = 0; i < gx.size(); ++i)
          for (std::size_t j = 0; j < gl.size(); ++j) {
            const double x = gx.x[i], t = gl.x[j];
            const double r = h * x, rho = h * x * (1.0 - t);
            J += gx.w[i] * gl.w[j] * weighted_split(r, rho, kp).reg * h * h * std::pow(x, 1.0 + 2.0 * s) * t * t;
          }
      } else {
        for (std::size_t i = 0; i < gl.size(); ++i)
          for (std::size_t j = 0; j < gl.size(); ++j) {
            const double x = gl.x[i], t = gl.x[j];
            const double r = a + h * x, rho = a + h * x * (1.0 - t);
            J += gl.w[i] * gl.w[j] * weighted_split(r, rho, kp).reg * h * h * x * x * x * t * t;
          }
      }
    }
    return pref * J;
  }

  // Elements [m-h1, m] and [m, m+h2] sharing node m; local dofs (left, shared, right).
  void touching_pair(double h1, double m, double h2, double local[3][3]) const {
    const double s = kp.s;
    const auto& gx = gauss_jacobi01(kJacobi, 2.0 - 2.0 * s);
    const auto& gl = gauss_legendre01(kJacobi);
    const bool has_reg = (kp.n == 1 || kp.n == 3);
    for (int tri = 0; tri < 2; ++tri) {
      for (std::size_t j = 0; j < gl.size(); ++j) {
        const double eta = gl.x[j];
        double chat[3];
        double dscale;
        if (tri == 0) {
          chat[0] = 1.0; chat[1] = eta - 1.0; chat[2] = -eta;
          dscale = h1 + h2 * eta;
        } else {
          chat[0] = eta; chat[1] = 1.0 - eta; chat[2] = -1.0;
          dscale = h1 * eta + h2;
        }
        double acc = 0.0;
        for (std::size_t i = 0; i < gx.size(); ++i) {
          const double xi = gx.x[i];
          const double x = tri == 0 ? h1 * xi : h1 * xi * eta;
          const double y = tri == 0 ? h2 * xi * eta : h2 * xi;
          acc += gx.w[i] * weighted_split(m - x, m + y, kp).sing * std::pow(dscale, -1.0 - 2.0 * s);
        }
        if (has_reg) {
          for (std::size_t i = 0; i < gl.size(); ++i) {
            const double xi = gl.x[i];
            const double x = tri == 0 ? h1 * xi : h1 * xi * eta;
            const double y = tri == 0 ? h2 * xi * eta : h2 * xi;
            acc += gl.w[i] * weighted_split(m - x, m + y, kp).reg * xi * xi * xi;
          }
        }
        const double w = gl.w[j] * pref * h1 * h2 * acc;
        for (int k = 0; k < 3; ++k)
          for (int l = 0; l < 3; ++l) local[k][l] += w * chat[k] * chat[l];
      }
    }
  }

  void add_pair(int e, int f) {
    const auto& x = g.x;
    if (e == f) {
      const double J = self_pair(x[e], x[e + 1]);
      A(e, e) += J; A(e + 1, e + 1) += J;
      A(e, e + 1) -= J; A(e + 1, e) -= J;
      return;
    }
    if (e > f) std::swap(e, f);
    if (f == e + 1) {
      double local[3][3] = {};
      touching_pair(x[e + 1] - x[e], x[e + 1], x[f + 1] - x[f], local);
      const int idx[3] = {e, e + 1, f + 1};
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) A(idx[k], idx[l]) += local[k][l];
      return;
    }
    double local[4][4] = {};
    separated(x[e], x[e + 1], x[e], x[e + 1], x[f], x[f + 1], x[f], x[f + 1], local);
    const int idx[4] = {e, e + 1, f, f + 1};
    for (int k = 0; k < 4; ++k)
      for (int l = 0; l < 4; ++l) A(idx[k], idx[l]) += local[k][l];
  }
};

// T(r) = c omega_n \int_{R_ext}^\infty (r rho)^{n-1} K(r,rho) drho via rho = R_ext / y.
inline double tail_density(double r, const DomainSpec& d, const KernelParams& kp) {
  const double s = kp.s;
  const auto& q = gauss_jacobi01(24, 2.0 * s - 1.0);
  double t = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double y = q.x[i];
    const double rho = d.R_ext / y;
    t += q.w[i] * weighted_kernel(r, rho, kp) * d.R_ext * std::pow(y, -1.0 - 2.0 * s);
  }
  return kp.c_ns * sphere_area(kp.n) * t;
}

}  // namespace detail

/// Assemble every block of the discrete form and the Schur-reduced interior form.
inline AssembledForms assemble_forms(const RadialGrid& grid, const KernelParams& kp) {
  AssembledForms F;
  F.grid = grid;
  F.kp = kp;
  const int nd = grid.n_dof(), nI = grid.n_int(), nE = grid.n_ext();
  const double pref = kp.c_ns * sphere_area(kp.n);

  Eigen::MatrixXd A_om = Eigen::MatrixXd::Zero(nd, nd);
  Eigen::MatrixXd A_x = Eigen::MatrixXd::Zero(nd, nd);
  detail::PairAssembler om{grid, kp, pref, A_om};
  detail::PairAssembler cross{grid, kp, pref, A_x};
  const int ne = grid.n_elem();
  for (int e = 0; e < ne; ++e) {
    if (!grid.is_interior_elem(e)) continue;
    for (int f = e; f < ne; ++f) {
      if (grid.is_interior_elem(f)) om.add_pair(e, f);
    }
    for (int f = 0; f < ne; ++f) {
      if (!grid.is_interior_elem(f)) cross.add_pair(e, f);
    }
  }

  // far field: \int_Omega T(r) (u(r) - mean u)^2
  F.B = grid.mass;
  const Eigen::VectorXd mu = F.B / F.measure();
  Eigen::MatrixXd MT = Eigen::MatrixXd::Zero(nI, nI);
  F.tail_col = Eigen::VectorXd::Zero(nI);
  F.tail_scalar = 0.0;
  const auto& q = gauss_legendre01(detail::kGauss);
  for (int a = 0; a + 1 < nI; ++a) {
    const double r0 = grid.x[grid.first_int + a], r1 = grid.x[grid.first_int + a + 1], h = r1 - r0;
    for (std::size_t i = 0; i < q.size(); ++i) {
      const double r = r0 + h * q.x[i];
      const double w = q.w[i] * h * detail::tail_density(r, grid.spec, kp);
      const double p1 = q.x[i], p0 = 1.0 - p1;
      MT(a, a) += w * p0 * p0; MT(a + 1, a + 1) += w * p1 * p1;
      MT(a, a + 1) += w * p0 * p1; MT(a + 1, a) += w * p0 * p1;
      F.tail_col[a] += w * p0; F.tail_col[a + 1] += w * p1;
      F.tail_scalar += w;
    }
  }
  Eigen::MatrixXd tail = MT - F.tail_col * mu.transpose() - mu * F.tail_col.transpose() +
                         F.tail_scalar * mu * mu.transpose();

  F.A_full = A_om + A_x;
  F.A_full.block(grid.first_int, grid.first_int, nI, nI) += tail;
  F.A_Omega = A_om.block(grid.first_int, grid.first_int, nI, nI);
  F.A_II = F.A_full.block(grid.first_int, grid.first_int, nI, nI);
  F.D_I = F.A_II - F.A_Omega;
  F.C_IE.resize(nI, nE);
  F.G_EE.resize(nE, nE);
  for (int j = 0; j < nE; ++j) {
    for (int a = 0; a < nI; ++a) F.C_IE(a, j) = -F.A_full(grid.first_int + a, grid.ext[j]);
    for (int k = 0; k < nE; ++k) F.G_EE(j, k) = F.A_full(grid.ext[j], grid.ext[k]);
  }
  F.G_llt.compute(F.G_EE);
  if (F.G_llt.info() != Eigen::Success) throw AssemblyError("exterior Gram block is not positive definite");
  F.A_red = F.A_II - F.C_IE * F.G_llt.solve(F.C_IE.transpose());
  F.A_red = 0.5 * (F.A_red + F.A_red.transpose());

  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(nI);
  const double scale = F.A_red.cwiseAbs().maxCoeff();
  if ((F.A_red * ones).cwiseAbs().maxCoeff() > 1e-10 * scale * nI)
    throw AssemblyError("reduced form does not annihilate constants");
  return F;
}

/// Exterior values solving G_EE w = C_IE^T u; far field = Lebesgue mean of u.
inline RadialFunction neumann_extension(const RadialFunction& u, const AssembledForms& F) {
  if (u.interior.size() != F.n_int()) throw ParameterError("interior vector has wrong length");
  if (!u.interior.allFinite()) throw ParameterError("interior values must be finite");
  RadialFunction out;
  out.interior = u.interior;
  out.exterior = F.G_llt.solve(F.C_IE.transpose() * u.interior);
  out.farfield = F.B.dot(u.interior) / F.measure();
  out.extended = true;
  return out;
}

inline RadialFunction extend(const Eigen::VectorXd& u, const AssembledForms& F) {
  return neumann_extension(RadialFunction{u, std::nullopt, std::nullopt, false}, F);
}

/// Scatter interior and exterior values into one vector over all nodes.
inline Eigen::VectorXd full_vector(const RadialFunction& u, const AssembledForms& F) {
  const auto& g = F.grid;
  Eigen::VectorXd U = Eigen::VectorXd::Zero(g.n_dof());
  U.segment(g.first_int, g.n_int()) = u.interior;
  if (u.exterior)
    for (int j = 0; j < g.n_ext(); ++j) U[g.ext[j]] = (*u.exterior)[j];
  return U;
}

/// Full-form bilinear <u, v>_A over all nodes (far field at the mean of the interior values).
inline double full_bilinear(const RadialFunction& u, const RadialFunction& v, const AssembledForms& F) {
  return full_vector(v, F).dot(F.A_full * full_vector(u, F));
}

/// Discrete (-Delta)^s at interior nodes: (A_full U)_a / m_a.
inline Eigen::VectorXd apply_fractional_laplacian(const RadialFunction& u, const AssembledForms& F) {
  if (!u.extended || !u.exterior) throw ContractError("fractional Laplacian needs an extended function");
  const Eigen::VectorXd AU = F.A_full * full_vector(u, F);
  return AU.segment(F.grid.first_int, F.n_int()).cwiseQuotient(F.B);
}

/// Discrete nonlocal normal derivative at exterior nodes: (G_EE w - C_IE^T u)_j / m_j.
inline Eigen::VectorXd neumann_derivative(const RadialFunction& u, const AssembledForms& F) {
  Eigen::VectorXd w = u.exterior ? *u.exterior : Eigen::VectorXd::Zero(F.grid.n_ext());
  return (F.G_EE * w - F.C_IE.transpose() * u.interior).cwiseQuotient(F.grid.ext_mass);
}

struct Norms {
  double seminorm;
  double l2;
  double full_norm;
  double interior_seminorm;
};

inline Norms norms(const Eigen::VectorXd& u, const AssembledForms& F) {
  Norms N{};
  N.seminorm = std::sqrt(std::max(0.0, u.dot(F.A_red * u)));
  N.l2 = std::sqrt(u.dot(F.B.cwiseProduct(u)));
  N.full_norm = N.l2 + N.seminorm;
  N.interior_seminorm = std::sqrt(std::max(0.0, u.dot(F.A_Omega * u)));
  return N;
}

inline Norms norms(const RadialFunction& u, const AssembledForms& F) { return norms(u.interior, F); }

/// CSV profile with header r,u (radii ascending, full precision).
inline void write_profile_csv(const std::string& path, const std::vector<double>& r, const Eigen::VectorXd& u) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os << "r,u\n" << std::setprecision(17);
  for (std::size_t i = 0; i < r.size(); ++i) os << r[i] << ',' << u[static_cast<Eigen::Index>(i)] << '\n';
  if (!os) throw std::runtime_error("write failed for " + path);
}

/// Coordinate-format dump (row col value) for debugging.
inline void write_matrix_coo(const std::string& path, const Eigen::MatrixXd& M) {
  std::ofstream os(path);
  os << std::setprecision(17);
  for (Eigen::Index i = 0; i < M.rows(); ++i)
    for (Eigen::Index j = 0; j < M.cols(); ++j)
      if (M(i, j) != 0.0) os << i << ' ' << j << ' ' << M(i, j) << '\n';
}

}  // namespace fracneu
