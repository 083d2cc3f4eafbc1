#pragma once
// The nonlinearity f: evaluation, hypothesis scans, fixed points, subcritical truncation and the
// a priori constants derived from it.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/tools/minima.hpp>

#include "fracneu/errors.hpp"

namespace fracneu {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

namespace detail {

// Power-basis cubic on [a, a+h] in x = (t-a)/h from Hermite data.
struct Cubic {
  double a = 0.0, h = 1.0, c[4] = {0, 0, 0, 0};
  static Cubic hermite(double a, double h, double y0, double m0, double y1, double m1) {
    Cubic p;
    p.a = a; p.h = h;
    p.c[0] = y0;
    p.c[1] = h * m0;
    p.c[2] = -3.0 * y0 - 2.0 * h * m0 + 3.0 * y1 - h * m1;
    p.c[3] = 2.0 * y0 + h * m0 - 2.0 * y1 + h * m1;
    return p;
  }
  double val(double t) const {
    const double x = (t - a) / h;
    return ((c[3] * x + c[2]) * x + c[1]) * x + c[0];
  }
  double der(double t) const {
    const double x = (t - a) / h;
    return ((3.0 * c[3] * x + 2.0 * c[2]) * x + c[1]) / h;
  }
  double integral(double t) const {  // \int_a^t
    const double x = (t - a) / h;
    return h * x * (c[0] + x * (c[1] / 2.0 + x * (c[2] / 3.0 + x * c[3] / 4.0)));
  }
};

}  // namespace detail

/// f either as the prototype t^{q-1} - t^{r-1} or as a table (t, f, f') with cubic Hermite
/// interpolation. Below 0 f is continued by its tangent at 0; beyond the last table row by the
/// tangent at the last row.
struct NonlinearitySpec {
  enum class Kind { prototype, table } kind = Kind::prototype;
  double q = 4.0, r = 3.0;
  std::vector<double> t, fv, fpv;
  std::vector<double> cumF;  // \int_{t_0}^{t_i} f
  std::string source;

  static NonlinearitySpec prototype(double q, double r) {
    if (!(r >= 2.0 && q > r)) throw ParameterError("prototype needs 2 <= r < q");
    NonlinearitySpec s;
    s.kind = Kind::prototype;
    s.q = q; s.r = r;
    s.source = "prototype";
    return s;
  }

  static NonlinearitySpec table(std::vector<double> t, std::vector<double> f, std::vector<double> fp) {
    if (t.size() < 2 || t.size() != f.size() || t.size() != fp.size())
      throw ParameterError("nonlinearity table needs at least two complete rows");
    for (std::size_t i = 0; i + 1 < t.size(); ++i)
      if (!(t[i + 1] > t[i])) throw ParameterError("nonlinearity table: t must be strictly increasing");
    if (t[0] != 0.0) throw ParameterError("nonlinearity table must start at t = 0");
    NonlinearitySpec s;
    s.kind = Kind::table;
    s.t = std::move(t); s.fv = std::move(f); s.fpv = std::move(fp);
    s.cumF.assign(s.t.size(), 0.0);
    for (std::size_t i = 0; i + 1 < s.t.size(); ++i)
      s.cumF[i + 1] = s.cumF[i] + s.segment(i).integral(s.t[i + 1]);
    s.source = "table";
    return s;
  }

  detail::Cubic segment(std::size_t i) const {
    return detail::Cubic::hermite(t[i], t[i + 1] - t[i], fv[i], fpv[i], fv[i + 1], fpv[i + 1]);
  }
  std::size_t locate(double x) const {
    auto it = std::upper_bound(t.begin(), t.end(), x);
    return std::min<std::size_t>(std::max<std::ptrdiff_t>(it - t.begin() - 1, 0), t.size() - 2);
  }

  double f(double x) const {
    if (kind == Kind::prototype) {
      if (x < 0.0) return x * fprime(0.0);
      return std::pow(x, q - 1.0) - std::pow(x, r - 1.0);
    }
    if (x < 0.0) return fv[0] + fpv[0] * x;
    if (x >= t.back()) return fv.back() + fpv.back() * (x - t.back());
    return segment(locate(x)).val(x);
  }
  double fprime(double x) const {
    if (kind == Kind::prototype) {
      if (x <= 0.0) return (q == 2.0 ? 1.0 : 0.0) - (r == 2.0 ? 1.0 : 0.0);
      return (q - 1.0) * std::pow(x, q - 2.0) - (r - 1.0) * std::pow(x, r - 2.0);
    }
    if (x < 0.0) return fpv[0];
    if (x >= t.back()) return fpv.back();
    return segment(locate(x)).der(x);
  }
  double F(double x) const {  // \int_0^x f
    if (kind == Kind::prototype) {
      if (x < 0.0) return 0.5 * fprime(0.0) * x * x;
      return std::pow(x, q) / q - std::pow(x, r) / r;
    }
    if (x < 0.0) return fv[0] * x + 0.5 * fpv[0] * x * x;
    if (x >= t.back()) {
      const double d = x - t.back();
      return cumF.back() + fv.back() * d + 0.5 * fpv.back() * d * d;
    }
    const std::size_t i = locate(x);
    return cumF[i] + segment(i).integral(x);
  }
};

/// Table file: CSV header t,f,fprime then one row per node.
inline NonlinearitySpec load_table_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ParameterError("cannot open nonlinearity table " + path);
  std::string line;
  std::getline(is, line);
  line.erase(std::remove_if(line.begin(), line.end(), ::isspace), line.end());
  if (line != "t,f,fprime") throw ParameterError("nonlinearity table header must be t,f,fprime");
  std::vector<double> t, f, fp;
  int row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::stringstream ss(line);
    std::string a, b, c;
    if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, c))
      throw ParameterError(path + ": malformed row " + std::to_string(row));
    try {
      t.push_back(std::stod(a)); f.push_back(std::stod(b)); fp.push_back(std::stod(c));
    } catch (const std::exception&) {
      throw ParameterError(path + ": non-numeric value on row " + std::to_string(row));
    }
  }
  auto s = NonlinearitySpec::table(std::move(t), std::move(f), std::move(fp));
  s.source = path;
  return s;
}

/// Critical Sobolev exponent 2n/(n-2s), +inf when 2s >= n.
inline double critical_exponent(int n, double s) { return n > 2.0 * s ? 2.0 * n / (n - 2.0 * s) : kInf; }

inline double default_ell(int n, double s) {
  const double cs = critical_exponent(n, s);
  return std::isfinite(cs) ? std::min(4.0, 0.5 * (2.0 + cs)) : 4.0;
}

struct FixedPoints {
  std::vector<double> roots;    // positive roots of f(t) = t, ascending
  std::vector<double> u0;       // roots with f'(u0) > 1
  std::vector<double> u_minus;  // per u0
  std::vector<double> u_plus;   // per u0, +inf allowed
};

/// Roots of f(t) - t on (0, hi] by sign changes on a dense sample, refined by bisection to 1e-12.
inline FixedPoints fixed_points(const std::function<double(double)>& f, const std::function<double(double)>& fp,
                                double hi, int samples = 20000) {
  FixedPoints out;
  auto g = [&](double x) { return f(x) - x; };
  double xa = hi / samples, ga = g(xa);
  if (ga == 0.0) out.roots.push_back(xa);
  for (int i = 2; i <= samples; ++i) {
    const double xb = hi * i / samples, gb = g(xb);
    if (gb == 0.0) {
      out.roots.push_back(xb);
    } else if (ga * gb < 0.0) {
      double lo = xa, up = xb, glo = ga;
      while (up - lo > 1e-12 * std::max(1.0, up)) {
        const double mid = 0.5 * (lo + up), gm = g(mid);
        if (gm == 0.0) { lo = up = mid; break; }
        if ((gm < 0.0) == (glo < 0.0)) { lo = mid; glo = gm; } else { up = mid; }
      }
      out.roots.push_back(0.5 * (lo + up));
    }
    xa = xb; ga = gb;
  }
  for (double r : out.roots) {
    if (fp(r) > 1.0 + 1e-8) {
      out.u0.push_back(r);
      double lo = 0.0, up = kInf;
      for (double q : out.roots) {
        if (q < r) lo = std::max(lo, q);
        if (q > r) up = std::min(up, q);
      }
      out.u_minus.push_back(lo);
      out.u_plus.push_back(up);
    }
  }
  return out;
}

/// min of g on [lo, hi]: uniform scan, then Brent on the bracket around the best sample.
inline double scan_minimum(const std::function<double(double)>& g, double lo, double hi, int samples = 20000) {
  int best = 0;
  double gmin = kInf;
  for (int i = 0; i <= samples; ++i) {
    const double v = g(lo + (hi - lo) * i / samples);
    if (v < gmin) { gmin = v; best = i; }
  }
  const double a = lo + (hi - lo) * std::max(0, best - 1) / samples;
  const double b = lo + (hi - lo) * std::min(samples, best + 1) / samples;
  const auto r = boost::math::tools::brent_find_minima(g, a, b, 52);
  return std::min(gmin, r.second);
}

struct HypothesisCheck {
  std::string name;
  bool pass = false;
  bool required = false;
  double value = 0.0;  // witness or margin
  std::string detail;
};

struct HypothesisReport {
  std::vector<HypothesisCheck> checks;
  double M = 0.0, delta = 0.0;
  double tbar = 0.0;         // f(t) < t on (0, tbar)
  double min_fprime = 0.0;   // over [0, T_scan]
  double shift = 0.0;        // c = max(0, -min f')
  FixedPoints fixed;
  std::vector<double> f3_margins;  // f'(u0) - lambda2_plus - 1 per u0

  bool required_pass() const {
    for (const auto& c : checks)
      if (c.required && !c.pass) return false;
    return true;
  }
  const HypothesisCheck* find(const std::string& n) const {
    for (const auto& c : checks)
      if (c.name == n) return &c;
    return nullptr;
  }
};

/// (M, delta) with f(t) >= (1+delta) t on [M, T_scan]; M = +inf when f(t)/t does not stay above 1.
inline std::pair<double, double> growth_witness(const std::function<double(double)>& f, double T_scan,
                                                int samples = 20000) {
  double tail = kInf;
  for (int i = 0; i <= 100; ++i) {
    const double x = T_scan * (0.5 + 0.5 * i / 100.0);
    tail = std::min(tail, f(x) / x);
  }
  if (!(tail > 1.0)) return {kInf, 0.0};
  const double delta = std::min(0.5, 0.5 * (tail - 1.0));
  auto ok = [&](double x) { return f(x) >= (1.0 + delta) * x; };
  int last_bad = -1;
  for (int i = 1; i <= samples; ++i)
    if (!ok(T_scan * i / samples)) last_bad = i;
  if (last_bad < 0) return {T_scan / samples, delta};
  double lo = T_scan * last_bad / samples, up = T_scan * (last_bad + 1) / samples;
  for (int k = 0; k < 80; ++k) {
    const double mid = 0.5 * (lo + up);
    (ok(mid) ? up : lo) = mid;
  }
  return {up, delta};
}

/// Scan (f0), (f1), (f1'), (f2), (f3) on [0, T_scan].
inline HypothesisReport check_hypotheses(const NonlinearitySpec& spec, double lambda2_plus, double T_scan = 0.0) {
  HypothesisReport rep;
  auto f = [&](double x) { return spec.f(x); };
  auto fp = [&](double x) { return spec.fprime(x); };
  if (!std::isfinite(f(1.0)) || !std::isfinite(fp(1.0))) throw ParameterError("nonlinearity not evaluable");
  rep.fixed = fixed_points(f, fp, T_scan > 0.0 ? T_scan : 100.0);
  if (T_scan <= 0.0) {
    const double top = rep.fixed.u0.empty() ? 1.0 : rep.fixed.u0.back();
    T_scan = std::max(100.0, 10.0 * top);
    rep.fixed = fixed_points(f, fp, T_scan);
  }
  const int S = 20000;
  double fmin = kInf, fpmin = kInf;
  for (int i = 0; i <= S; ++i) {
    const double x = T_scan * i / S;
    fmin = std::min(fmin, f(x));
  }
  fpmin = scan_minimum(fp, 0.0, T_scan, S);
  rep.min_fprime = fpmin;
  rep.shift = std::max(0.0, -fpmin);
  rep.checks.push_back({"f0", fmin >= 0.0 && fpmin >= 0.0, false, fpmin,
                        fpmin >= 0.0 && fmin >= 0.0 ? "f >= 0 and f' >= 0 on the scan"
                                                    : "fails; restored by the linear shift c = max(0, -min f')"});
  const bool f1 = std::abs(f(0.0)) <= 1e-14 && fp(0.0) < 1.0;
  rep.checks.push_back({"f1", f1, false, fp(0.0), "f'(0) < 1 with f(0) = 0"});
  rep.tbar = rep.fixed.roots.empty() ? T_scan : rep.fixed.roots.front();
  bool f1p = std::abs(f(0.0)) <= 1e-14 && rep.tbar > 0.0;
  for (int i = 1; i < S && f1p; ++i) {
    const double x = rep.tbar * i / S;
    f1p = f(x) < x;
  }
  rep.checks.push_back({"f1_prime", f1p, false, rep.tbar, "f(t) < t on (0, tbar)"});
  rep.checks.push_back({"f1_or_f1_prime", f1 || f1p, true, 0.0, "behaviour near 0"});
  auto [M, delta] = growth_witness(f, T_scan);
  rep.M = M; rep.delta = delta;
  rep.checks.push_back({"f2", std::isfinite(M), true, M,
                        "f(t) >= (1+delta) t for t >= M, delta = " + std::to_string(delta)});
  rep.checks.push_back({"fixed_point", !rep.fixed.u0.empty(), true, static_cast<double>(rep.fixed.u0.size()),
                        "roots of f(t) = t with f'(u0) > 1"});
  bool any = false;
  double best = -kInf;
  for (double u0 : rep.fixed.u0) {
    const double m = fp(u0) - lambda2_plus - 1.0;
    rep.f3_margins.push_back(m);
    best = std::max(best, m);
    any = any || m > 0.0;
  }
  rep.checks.push_back({"f3", any, true, best, "f'(u0) - lambda2_plus - 1 > 0"});
  return rep;
}

/// f with the subcritical tail: f on [0, t*], cubic Hermite on [t*, 2t*], t^{ell-1} + D beyond.
struct TruncatedNonlinearity {
  NonlinearitySpec base;
  double ell = 4.0;
  double t_star = 0.0;
  double D = 0.0;
  detail::Cubic blend;
  double F_tstar = 0.0, F_2tstar = 0.0;
  double M = 0.0, delta = 0.0;
  double shift = 0.0;  // c in (-Delta)^s u + (1+c) u = f(u) + c u
  std::vector<double> u0_list, u_minus, u_plus;
  double K1 = 0.0, K_inf = 0.0, K2 = 0.0;
  double mu = 0.0, T0 = 0.0;

  double f(double x) const {
    if (x <= t_star) return base.f(x);
    if (x <= 2.0 * t_star) return blend.val(x);
    return std::pow(x, ell - 1.0) + D;
  }
  double fprime(double x) const {
    if (x <= t_star) return base.fprime(x);
    if (x <= 2.0 * t_star) return blend.der(x);
    return (ell - 1.0) * std::pow(x, ell - 2.0);
  }
  double F(double x) const {
    if (x <= t_star) return base.F(x);
    if (x <= 2.0 * t_star) return F_tstar + blend.integral(x);
    const double b = 2.0 * t_star;
    return F_2tstar + (std::pow(x, ell) - std::pow(b, ell)) / ell + D * (x - b);
  }
};

struct AprioriConstants {
  double K1, K_inf, K2;
};

/// K1 = M|Omega|(1 + 1/delta), K_inf = C^2 (1+c) K1, K2 = C (1+c) K1. With c = 0 these are the
/// classical constants; c is the linear shift and C the embedding constant of the shifted norm.
inline AprioriConstants apriori_constants(double M, double delta, double omega_measure, double C_emb,
                                          double shift = 0.0) {
  if (!(M > 0.0 && delta > 0.0 && omega_measure > 0.0 && C_emb > 0.0 && shift >= 0.0))
    throw ParameterError("a priori constants need positive inputs");
  const double K1 = M * omega_measure * (1.0 + 1.0 / delta);
  return {K1, C_emb * C_emb * (1.0 + shift) * K1, C_emb * (1.0 + shift) * K1};
}

/// Build the truncation. t* starts at max(K_inf, largest u0, M) (1 + margin) and doubles until the
/// sampled checks pass (at most 5 retries).
inline TruncatedNonlinearity truncate(const NonlinearitySpec& spec, double K_inf, double ell, double s, int n,
                                      double M, double delta, double margin = 0.1) {
  const double cs = critical_exponent(n, s);
  if (!(ell > 2.0 && ell < cs)) throw ParameterError("ell must lie in (2, 2_s^*)");
  if (!(K_inf > 0.0)) throw ParameterError("K_inf must be positive");
  auto pre = fixed_points([&](double x) { return spec.f(x); }, [&](double x) { return spec.fprime(x); },
                          std::max(100.0, 2.0 * K_inf));
  double top = std::max(K_inf, M);
  if (!pre.u0.empty()) top = std::max(top, pre.u0.back());
  double ts = top * (1.0 + margin);

  for (int attempt = 0; attempt <= 5; ++attempt, ts *= 2.0) {
    TruncatedNonlinearity T;
    T.base = spec; T.ell = ell; T.t_star = ts; T.M = M; T.delta = delta;
    const double y0 = spec.f(ts), m0 = spec.fprime(ts), b = 2.0 * ts;
    const double m1 = (ell - 1.0) * std::pow(b, ell - 2.0);
    if (m0 < 0.0 || y0 < 0.0) continue;
    // secant >= (m0 + m1)/3 keeps the Hermite cubic monotone
    T.D = std::max(0.0, y0 + ts * (m0 + m1) / 3.0 - std::pow(b, ell - 1.0));
    T.blend = detail::Cubic::hermite(ts, ts, y0, m0, std::pow(b, ell - 1.0) + T.D, m1);
    T.F_tstar = spec.F(ts);
    T.F_2tstar = T.F_tstar + T.blend.integral(b);

    const int S = 20000;
    const double fpmin = scan_minimum([&](double x) { return T.fprime(x); }, 0.0, ts, S);
    T.shift = std::max(0.0, -fpmin);
    bool ok = true;
    // shifted nonlinearity nonnegative and nondecreasing on [0, 100 t*]
    double prev = -kInf;
    for (int i = 0; i <= 4 * S && ok; ++i) {
      const double x = 100.0 * ts * i / (4.0 * S);
      const double g = T.f(x) + T.shift * x;
      ok = g >= -1e-12 * (1.0 + std::abs(g)) && g >= prev - 1e-12 * (1.0 + std::abs(g));
      prev = g;
    }
    for (int i = 0; i <= S && ok; ++i) {
      const double x = M * std::pow(1000.0 * ts / M, static_cast<double>(i) / S);
      ok = T.f(x) >= (1.0 + delta) * x;
    }
    if (!ok) continue;
    auto fx = fixed_points([&](double x) { return T.f(x); }, [&](double x) { return T.fprime(x); }, 4.0 * ts);
    T.u0_list = fx.u0; T.u_minus = fx.u_minus; T.u_plus = fx.u_plus;
    return T;
  }
  throw ConstructionError("truncation could not satisfy the growth class after 5 retries");
}

/// mu in (2, ell] and T0 with f(t) t >= mu F(t) for sampled t in [T0, 1e6 T0].
inline std::pair<double, double> ar_constants(const TruncatedNonlinearity& T) {
  double mu = 0.5 * (2.0 + T.ell);
  const int S = 20000;
  for (int tries = 0; tries < 12; ++tries, mu = 0.5 * (2.0 + mu)) {
    const double lo = 1e-3 * T.t_star, hi = 1e7 * T.t_star;
    int last_bad = -1;
    for (int i = 0; i <= S; ++i) {
      const double x = lo * std::pow(hi / lo, static_cast<double>(i) / S);
      if (T.f(x) * x < mu * T.F(x)) last_bad = i;
    }
    if (last_bad == S) continue;
    const double T0 = last_bad < 0 ? lo : lo * std::pow(hi / lo, static_cast<double>(last_bad + 1) / S);
    bool ok = true;
    for (int i = 0; i <= 100000 && ok; ++i) {
      const double x = T0 * std::pow(1e6, i / 100000.0);
      ok = T.f(x) * x >= mu * T.F(x);
    }
    if (ok) return {mu, T0};
  }
  throw ConstructionError("no Ambrosetti-Rabinowitz pair found");
}

/// max f' on [0, K_inf] < lambda2_rad + 1 means only constant radial solutions; returns the margin
/// lambda2_rad + 1 - max f' (positive when the criterion holds).
inline double constancy_margin(const std::function<double(double)>& fprime, double K_inf, double lambda2_rad,
                               int samples = 20000) {
  double mx = -kInf;
  for (int i = 0; i <= samples; ++i) mx = std::max(mx, fprime(K_inf * i / samples));
  return lambda2_rad + 1.0 - mx;
}

}  // namespace fracneu
