#include "fracneu/pipeline.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <json.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

namespace fracneu {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

json jnum(double x) {
  if (std::isfinite(x)) return x;
  return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
}

json jvec(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(jnum(x));
  return a;
}

json jvec(const Eigen::VectorXd& v) { return jvec(to_std(v)); }

const char* orientation_name(Orientation o) {
  return o == Orientation::nondecreasing ? "nondecreasing" : "nonincreasing";
}

void log(const std::string& msg) { std::cerr << "[fracneu] " << msg << '\n'; }

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

const std::map<std::string, std::set<std::string>> kKeys = {
    {"domain", {"n", "s", "R0", "R", "R_ext", "auto_scale", "scale_target"}},
    {"grid", {"N_int", "N_ext", "grading"}},
    {"nonlinearity", {"kind", "q", "r", "table", "shift", "T_scan"}},
    {"truncation", {"ell", "margin"}},
    {"cone", {"orientation"}},
    {"solver", {"path_points", "tol", "max_outer", "seed", "bands", "force"}},
    {"verification", {"embedding_samples", "eigs_count", "oracle_N"}},
    {"outputs", {"directory"}},
};

template <class T>
T get_num(const boost::property_tree::ptree& pt, const std::string& key, T def) {
  auto v = pt.get_optional<std::string>(key);
  if (!v || *v == "auto") return def;
  try {
    std::size_t pos = 0;
    T out;
    if constexpr (std::is_same_v<T, int>) out = std::stoi(*v, &pos);
    else if constexpr (std::is_same_v<T, unsigned>) out = static_cast<unsigned>(std::stoul(*v, &pos));
    else out = std::stod(*v, &pos);
    if (pos != v->size()) throw std::invalid_argument("trailing characters");
    return out;
  } catch (const std::exception&) {
    throw ParameterError("config key " + key + ": cannot parse '" + *v + "'");
  }
}

bool get_bool(const boost::property_tree::ptree& pt, const std::string& key, bool def) {
  auto v = pt.get_optional<std::string>(key);
  if (!v) return def;
  if (*v == "true" || *v == "1" || *v == "yes") return true;
  if (*v == "false" || *v == "0" || *v == "no") return false;
  throw ParameterError("config key " + key + ": expected true or false");
}

NonlinearitySpec make_spec(const RunConfig& cfg) {
  if (cfg.nl_kind == "prototype") return NonlinearitySpec::prototype(cfg.q, cfg.r);
  return load_table_csv(cfg.table_path);
}

DomainSpec with_defaults(DomainSpec d) {
  if (d.R_ext <= 0.0) d.R_ext = 8.0 * d.R;
  return d;
}

AssembledForms build_forms(const RunConfig& cfg, const DomainSpec& d) {
  const int N_ext = cfg.N_ext > 0 ? cfg.N_ext : std::max(2, cfg.N_int / 2);
  return assemble_forms(build_grid(d, cfg.N_int, N_ext, cfg.grading), make_kernel_params(d.n, d.s));
}

// smallest f'(u0) - 1 over the fixed points that will be solved for (largest with bands = best)
double solve_gap(const HypothesisReport& H, const NonlinearitySpec& spec, const std::string& bands) {
  double gap = bands == "best" ? -kInf : kInf;
  for (double u0 : H.fixed.u0) {
    const double g = spec.fprime(u0) - 1.0;
    gap = bands == "best" ? std::max(gap, g) : std::min(gap, g);
  }
  return gap;
}

json domain_json(const DomainSpec& d) {
  return {{"n", d.n}, {"s", d.s}, {"R0", d.R0}, {"R", d.R}, {"R_ext", d.R_ext}, {"measure", d.measure()}};
}

json config_json(const RunConfig& c) {
  return {{"domain", domain_json(c.domain)},
          {"auto_scale", c.auto_scale},
          {"scale_target", c.scale_target},
          {"grid", {{"N_int", c.N_int}, {"N_ext", c.N_ext}, {"grading", c.grading}}},
          {"nonlinearity",
           {{"kind", c.nl_kind}, {"q", c.q}, {"r", c.r}, {"table", c.table_path}, {"shift", c.shift_policy},
            {"T_scan", c.T_scan}}},
          {"truncation", {{"ell", c.ell}, {"margin", c.trunc_margin}}},
          {"cone", {{"orientation", orientation_name(c.orientation)}}},
          {"solver",
           {{"path_points", c.path_points}, {"tol", c.tol}, {"max_outer", c.max_outer}, {"seed", c.seed},
            {"bands", c.bands}, {"force", c.force}}},
          {"verification",
           {{"embedding_samples", c.embedding_samples}, {"eigs_count", c.eigs_count}, {"oracle_N", c.oracle_N}}}};
}

json checks_json(const VerificationReport& rep) {
  json a = json::array();
  for (const auto& c : rep.checks) {
    json j = {{"name", c.name}, {"value", jnum(c.value)}, {"tol", jnum(c.tol)}, {"pass", c.pass},
              {"required", c.required}, {"note", c.note}};
    if (!c.snapshot.empty()) j["snapshot"] = jvec(c.snapshot);
    a.push_back(std::move(j));
  }
  return a;
}

json hypotheses_json(const Prepared& p) {
  json checks = json::array();
  for (const auto& c : p.H.checks)
    checks.push_back({{"name", c.name}, {"pass", c.pass}, {"required", c.required}, {"value", jnum(c.value)},
                      {"detail", c.detail}});
  return {{"schema", kSchema},
          {"pass", p.H.required_pass()},
          {"lambda2_plus", p.L.pair.lambda},
          {"checks", checks},
          {"M", jnum(p.H.M)},
          {"delta", p.H.delta},
          {"tbar", jnum(p.H.tbar)},
          {"min_fprime", p.H.min_fprime},
          {"shift", p.H.shift},
          {"fixed_points",
           {{"roots", jvec(p.H.fixed.roots)},
            {"u0", jvec(p.H.fixed.u0)},
            {"u_minus", jvec(p.H.fixed.u_minus)},
            {"u_plus", jvec(p.H.fixed.u_plus)}}},
          {"f3_margins", jvec(p.H.f3_margins)},
          {"domain", domain_json(p.cfg.domain)},
          {"scale_factor", p.scale_factor}};
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os << j.dump(2) << '\n';
  if (!os) throw std::runtime_error("write failed for " + path.string());
}

fs::path ensure_out(const RunConfig& cfg) {
  fs::path out(cfg.out_dir);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + out.string() + ": " + ec.message());
  return out;
}

void write_eigs(const Prepared& p, const fs::path& out) {
  json lam = json::array();
  for (const auto& e : p.eigs) lam.push_back(e.lambda);
  const fs::path v2 = out / "v2.csv";
  write_profile_csv(v2.string(), p.F.grid.interior_nodes(), p.L.pair.eigenfunction.interior);
  write_json(out / "eigs.json", {{"schema", kSchema},
                                 {"lambda", lam},
                                 {"lambda2_rad", p.L.lambda2_rad},
                                 {"lambda2_plus", p.L.pair.lambda},
                                 {"gap", p.L.pair.lambda - p.L.lambda2_rad},
                                 {"stationarity", p.L.stationarity},
                                 {"orientation", orientation_name(p.cfg.orientation)},
                                 {"v2_profile_csv_path", v2.string()},
                                 {"domain", domain_json(p.cfg.domain)},
                                 {"scale_factor", p.scale_factor}});
}

std::string utc_timestamp() {
  const std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

int exit_for(const std::exception& e) {
  if (dynamic_cast<const ParameterError*>(&e) || dynamic_cast<const HypothesisError*>(&e) ||
      dynamic_cast<const ConstructionError*>(&e))
    return kHypothesisFailure;
  if (dynamic_cast<const NumericalError*>(&e) || dynamic_cast<const GeometryError*>(&e) ||
      dynamic_cast<const AssemblyError*>(&e) || dynamic_cast<const SingularityError*>(&e))
    return kNonConvergence;
  return kIoFailure;
}

void write_error(const RunConfig& cfg, const std::string& file, int code, const std::string& what) {
  try {
    write_json(ensure_out(cfg) / file,
               {{"schema", kSchema}, {"timestamp", utc_timestamp()}, {"exit_code", code}, {"error", what}});
  } catch (const std::exception& e) {
    log(std::string("could not write diagnostics: ") + e.what());
  }
}

VerificationReport band_checks(const Prepared& p, const Problem& P, const MinimaxResult& r) {
  VerifyInputs in;
  in.K1 = p.K.K1; in.K_inf = p.K.K_inf; in.K2 = p.K.K2;
  in.tol = p.cfg.tol;
  in.u0 = r.u0;
  VerificationReport rep = verify_solution(r.u_star, P, r.cone, in);

  const auto cc = constancy_criterion([&](double t) { return p.spec.fprime(t); }, p.K.K_inf, p.L.lambda2_rad);
  rep.add("constancy_criterion", cc.margin, 0.0, !cc.only_constants || r.status != "nonconstant", true,
          "lambda2_rad + 1 - max f' on [0, K_inf]; a positive margin forbids a non-constancy certificate");

  // sampled barrier around u_-; informational because sampling overestimates the true minimum
  const Eigen::Index n = r.u_star.size();
  const double lo = r.cone.lower;
  const double d0 = P.norm(Eigen::VectorXd::Constant(n, r.t_minus * r.u0 - lo));
  const double dmax = P.norm(Eigen::VectorXd::Constant(n, r.u0 - lo));
  const double rho = std::min(2.0 * d0, 0.5 * dmax);
  const double alpha = geometry_alpha(P, r.cone, rho, 64, p.cfg.seed);
  const double Elo = P.energy(Eigen::VectorXd::Constant(n, lo));
  rep.add("minimax_above_geometry", r.level - Elo - alpha, 0.0, r.level >= Elo + alpha, false,
          "c - E(u_-) - alpha, alpha sampled on the sphere of radius " + std::to_string(rho));
  return rep;
}

}  // namespace

RunConfig parse_config_string(const std::string& text, const std::string& base_dir) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream is(text);
  try {
    pt::ini_parser::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ParameterError(std::string("config parse error: ") + e.what());
  }
  for (const auto& [sec, body] : tree) {
    auto it = kKeys.find(sec);
    if (it == kKeys.end()) throw ParameterError("unknown config section [" + sec + "]");
    for (const auto& [key, val] : body)
      if (!it->second.count(key)) throw ParameterError("unknown config key " + sec + "." + key);
  }
  RunConfig c;
  c.domain.n = get_num(tree, "domain.n", c.domain.n);
  c.domain.s = get_num(tree, "domain.s", c.domain.s);
  c.domain.R0 = get_num(tree, "domain.R0", c.domain.R0);
  c.domain.R = get_num(tree, "domain.R", c.domain.R);
  c.domain.R_ext = get_num(tree, "domain.R_ext", 0.0);
  c.auto_scale = get_bool(tree, "domain.auto_scale", c.auto_scale);
  c.scale_target = get_num(tree, "domain.scale_target", c.scale_target);
  c.N_int = get_num(tree, "grid.N_int", c.N_int);
  c.N_ext = get_num(tree, "grid.N_ext", c.N_ext);
  c.grading = get_num(tree, "grid.grading", c.grading);
  c.nl_kind = tree.get<std::string>("nonlinearity.kind", c.nl_kind);
  c.q = get_num(tree, "nonlinearity.q", c.q);
  c.r = get_num(tree, "nonlinearity.r", c.r);
  c.table_path = tree.get<std::string>("nonlinearity.table", "");
  if (!c.table_path.empty() && fs::path(c.table_path).is_relative())
    c.table_path = (fs::path(base_dir) / c.table_path).string();
  c.shift_policy = tree.get<std::string>("nonlinearity.shift", c.shift_policy);
  c.T_scan = get_num(tree, "nonlinearity.T_scan", c.T_scan);
  c.ell = get_num(tree, "truncation.ell", c.ell);
  c.trunc_margin = get_num(tree, "truncation.margin", c.trunc_margin);
  const std::string o = tree.get<std::string>("cone.orientation", "nondecreasing");
  if (o == "nondecreasing") c.orientation = Orientation::nondecreasing;
  else if (o == "nonincreasing") c.orientation = Orientation::nonincreasing;
  else throw ParameterError("cone.orientation must be nondecreasing or nonincreasing");
  c.path_points = get_num(tree, "solver.path_points", c.path_points);
  c.tol = get_num(tree, "solver.tol", c.tol);
  c.max_outer = get_num(tree, "solver.max_outer", c.max_outer);
  c.seed = get_num(tree, "solver.seed", c.seed);
  c.bands = tree.get<std::string>("solver.bands", c.bands);
  c.force = get_bool(tree, "solver.force", c.force);
  c.embedding_samples = get_num(tree, "verification.embedding_samples", c.embedding_samples);
  c.eigs_count = get_num(tree, "verification.eigs_count", c.eigs_count);
  c.oracle_N = get_num(tree, "verification.oracle_N", c.oracle_N);
  c.out_dir = tree.get<std::string>("outputs.directory", c.out_dir);
  validate_config(c);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ParameterError("cannot open config " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config_string(ss.str(), fs::path(path).parent_path().string());
}

void validate_config(const RunConfig& c) {
  validate(with_defaults(c.domain));
  validate_cone(ConeSpec{c.orientation, 0.0, kInf}, c.domain);
  if (c.N_int < 4) throw ParameterError("grid.N_int must be >= 4");
  if (c.N_ext != 0 && c.N_ext < 2) throw ParameterError("grid.N_ext must be >= 2");
  if (!(c.grading >= 1.0)) throw ParameterError("grid.grading must be >= 1");
  if (c.nl_kind == "prototype") {
    if (!(c.r >= 2.0 && c.q > c.r)) throw ParameterError("prototype needs 2 <= r < q");
  } else if (c.nl_kind == "table") {
    if (c.table_path.empty()) throw ParameterError("nonlinearity.table is required for kind = table");
  } else {
    throw ParameterError("nonlinearity.kind must be prototype or table");
  }
  if (c.shift_policy != "auto" && c.shift_policy != "none")
    throw ParameterError("nonlinearity.shift must be auto or none");
  if (c.ell != 0.0) {
    const double cs = critical_exponent(c.domain.n, c.domain.s);
    if (!(c.ell > 2.0 && c.ell < cs)) throw ParameterError("truncation.ell must lie in (2, 2_s^*)");
  }
  if (!(c.scale_target > 0.0 && c.scale_target < 1.0)) throw ParameterError("domain.scale_target must lie in (0, 1)");
  if (c.path_points < 5) throw ParameterError("solver.path_points must be >= 5");
  if (!(c.tol > 0.0)) throw ParameterError("solver.tol must be positive");
  if (c.max_outer < 1) throw ParameterError("solver.max_outer must be >= 1");
  if (c.bands != "all" && c.bands != "best") throw ParameterError("solver.bands must be all or best");
  if (c.embedding_samples < 100) throw ParameterError("verification.embedding_samples must be >= 100");
  if (c.oracle_N < 3 || c.oracle_N > 7) throw ParameterError("verification.oracle_N must lie in [3, 7]");
  if (c.eigs_count < 1) throw ParameterError("verification.eigs_count must be >= 1");
}

std::string default_config_text() {
  return R"([domain]
# dimension and order, s in (1/2, 1)
n = 1
s = 0.75
# R0 = 0 is the ball B_R, R0 > 0 the annulus A_{R0,R}
R0 = 0
R = 1
# outer end of the exterior mesh; auto = 8 R
R_ext = auto
# rescale the domain homothetically until lambda2_plus <= scale_target (f'(u0) - 1)
auto_scale = true
scale_target = 0.5

[grid]
N_int = 128
# auto = N_int / 2
N_ext = auto
# node clustering towards the boundary (1 = uniform)
grading = 2

[nonlinearity]
# prototype: f(t) = t^(q-1) - t^(r-1); table: CSV with header t,f,fprime starting at t = 0
kind = prototype
q = 4
r = 3
table =
# auto: linear shift c = max(0, -min f'); none: c = 0
shift = auto
# hypothesis scan range; auto = max(100, 10 u0)
T_scan = auto

[truncation]
# auto = min(4, (2 + 2_s^*)/2)
ell = auto
margin = 0.1

[cone]
# nonincreasing needs an annulus
orientation = nondecreasing

[solver]
path_points = 33
tol = 1e-10
max_outer = 2000
seed = 1
# all: one mountain pass per admissible fixed point; best: only the largest (f3) margin
bands = all
# continue past failed hypotheses (negative controls)
force = false

[verification]
embedding_samples = 400
eigs_count = 10
oracle_N = 6

[outputs]
directory = out
)";
}

Prepared prepare(const RunConfig& cfg_in, Stage stage) {
  validate_config(cfg_in);
  Prepared p;
  p.cfg = cfg_in;
  p.cfg.domain = with_defaults(cfg_in.domain);
  p.original_domain = p.cfg.domain;
  p.spec = make_spec(p.cfg);
  const auto& c = p.cfg;
  Timer tm;

  p.F = build_forms(c, c.domain);
  p.L = lambda2_increasing(p.F, c.orientation, c.seed);
  p.H = check_hypotheses(p.spec, p.L.pair.lambda, c.T_scan);
  if (c.auto_scale && !p.H.fixed.u0.empty()) {
    const double target = c.scale_target * solve_gap(p.H, p.spec, c.bands);
    if (target > 0.0 && p.L.pair.lambda > target) {
      // eigenvalues of the homothetic grid scale exactly like k^{-2s}
      p.scale_factor = std::pow(p.L.pair.lambda / target, 1.0 / (2.0 * c.domain.s));
      p.cfg.domain.R0 *= p.scale_factor;
      p.cfg.domain.R *= p.scale_factor;
      p.cfg.domain.R_ext *= p.scale_factor;
      p.F = build_forms(c, p.cfg.domain);
      p.L = lambda2_increasing(p.F, c.orientation, c.seed);
      p.H = check_hypotheses(p.spec, p.L.pair.lambda, c.T_scan);
    }
  }
  p.eigs = neumann_eigs(p.F, std::min(c.eigs_count, p.F.n_int()));
  log("forms, spectrum and hypotheses: " + std::to_string(tm.seconds()) + " s, R = " +
      std::to_string(p.cfg.domain.R) + ", lambda2_plus = " + std::to_string(p.L.pair.lambda));
  if (stage != Stage::full) return p;

  if (!p.H.required_pass() && !c.force) {
    std::string failed;
    for (const auto& h : p.H.checks)
      if (h.required && !h.pass) failed += (failed.empty() ? "" : ", ") + h.name;
    throw HypothesisError("required hypotheses failed: " + failed);
  }

  const double s = c.domain.s;
  const int n = c.domain.n;
  const double ell = c.ell > 0.0 ? c.ell : default_ell(n, s);
  const ConeSpec scan_cone{c.orientation, 0.0, kInf};
  double shift = c.shift_policy == "auto" ? p.H.shift : 0.0;
  p.M_eff = p.H.M;
  for (int i = 0; i <= 2000 && std::isfinite(p.H.M); ++i) {
    const double t = p.H.M * i / 2000.0;
    p.M_eff = std::max(p.M_eff, t - p.spec.f(t));
  }
  for (int round = 0;; ++round) {
    p.emb = embedding_scan(p.F, scan_cone, c.embedding_samples, c.seed, shift);
    p.K = apriori_constants(p.M_eff, p.H.delta, p.F.measure(), p.emb.C_emb, shift);
    p.T = truncate(p.spec, p.K.K_inf, ell, s, n, p.H.M, p.H.delta, c.trunc_margin);
    if (c.shift_policy == "auto" && p.T.shift > shift * (1.0 + 1e-12) && round < 3) {
      shift = p.T.shift;
      continue;
    }
    break;
  }
  p.shift = shift;
  p.T.shift = shift;
  p.T.K1 = p.K.K1; p.T.K_inf = p.K.K_inf; p.T.K2 = p.K.K2;
  std::tie(p.mu, p.T0) = ar_constants(p.T);
  p.T.mu = p.mu; p.T.T0 = p.T0;

  int best = -1;
  for (std::size_t i = 0; i < p.T.u0_list.size(); ++i) {
    const double m = p.T.fprime(p.T.u0_list[i]) - p.L.pair.lambda - 1.0;
    if (best < 0 || m > p.f3_margins[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
    p.f3_margins.push_back(m);
    if (c.bands == "all" && (m > 0.0 || c.force)) p.bands.push_back(static_cast<int>(i));
  }
  if (c.bands == "best" && best >= 0 && (p.f3_margins[best] > 0.0 || c.force)) p.bands.push_back(best);
  if (p.bands.empty()) throw HypothesisError("no fixed point with a positive (f3) margin");
  log("truncation t* = " + std::to_string(p.T.t_star) + ", K_inf = " + std::to_string(p.K.K_inf) +
      ", shift = " + std::to_string(shift) + ", total " + std::to_string(tm.seconds()) + " s");
  return p;
}

PipelineResult run_pipeline(const RunConfig& cfg, bool write) {
  PipelineResult res;
  try {
    res.prep = prepare(cfg, Stage::full);
  } catch (const std::exception& e) {
    res.exit_code = exit_for(e);
    res.error = e.what();
    log(std::string("stopped: ") + e.what());
    if (write) write_error(cfg, "result.json", res.exit_code, res.error);
    return res;
  }
  const Prepared& p = *res.prep;
  const Problem P(p.F, p.T, p.shift);
  MountainPassOptions opt;
  opt.path_points = p.cfg.path_points;
  opt.tol = p.cfg.tol;
  opt.max_outer = p.cfg.max_outer;
  const Eigen::VectorXd& v2 = p.L.pair.eigenfunction.interior;

  bool failed = false;
  for (int b : p.bands) {
    BandOutcome bo;
    bo.u0 = p.T.u0_list[b];
    bo.u_minus = p.T.u_minus[b];
    bo.u_plus = p.T.u_plus[b];
    bo.f3_margin = p.f3_margins[b];
    const ConeSpec cone{p.cfg.orientation, bo.u_minus, bo.u_plus};
    Timer tm;
    try {
      bo.result = mountain_pass(P, cone, bo.u0, v2, opt);
      bo.verify = band_checks(p, P, *bo.result);
    } catch (const MountainPassFailure& e) {
      bo.result = e.best;
      bo.error = e.what();
      failed = true;
    } catch (const GeometryError& e) {
      bo.error = e.what();
      failed = true;
    } catch (const NumericalError& e) {
      bo.error = e.what();
      failed = true;
    }
    log("band u0 = " + std::to_string(bo.u0) + ": " + (bo.result ? bo.result->status : "no result") +
        (bo.error.empty() ? "" : " (" + bo.error + ")") + ", " + std::to_string(tm.seconds()) + " s");
    res.verify.append(bo.verify);
    res.bands.push_back(std::move(bo));
  }

  if (res.bands.size() > 1) {
    for (std::size_t i = 0; i < res.bands.size(); ++i) {
      const auto& bi = res.bands[i];
      if (i + 1 < res.bands.size() && bi.u_plus > res.bands[i + 1].u_minus) res.interleaving = false;
      if (!bi.result || bi.result->status != "nonconstant") { res.interleaving = false; res.distinct = false; continue; }
      const auto& u = bi.result->u_star;
      if (u.minCoeff() < bi.u_minus || u.maxCoeff() > bi.u_plus) res.interleaving = false;
      for (std::size_t j = 0; j < i; ++j) {
        if (!res.bands[j].result) continue;
        const double d = (u - res.bands[j].result->u_star).cwiseAbs().maxCoeff();
        const double t = 10.0 * p.cfg.tol * (std::max(1.0, P.norm(u)) + std::max(1.0, P.norm(res.bands[j].result->u_star)));
        if (!(d > t)) res.distinct = false;
      }
    }
    res.verify.add("interleaving", 0.0, 0.0, res.interleaving, true, "u_-,i <= u_i <= u_+,i <= u_-,i+1 nodal-wise");
    res.verify.add("distinct", 0.0, 0.0, res.distinct, true, "pairwise L_inf distance above the combined tolerances");
  }

  if (failed) res.exit_code = kNonConvergence;
  else if (!res.verify.required_pass()) res.exit_code = kVerificationFailure;

  if (write) {
    try {
      const fs::path out = ensure_out(p.cfg);
      write_eigs(p, out);
      write_json(out / "hypotheses.json", hypotheses_json(p));
      json sols = json::array(), vb = json::array();
      std::ofstream pe(out / "path_energies.csv");
      pe << "band,index,energy\n" << std::setprecision(17);
      int k = 0;
      for (const auto& bo : res.bands) {
        ++k;
        json j = {{"u0", bo.u0}, {"u_minus", jnum(bo.u_minus)}, {"u_plus", jnum(bo.u_plus)},
                  {"f3_margin", bo.f3_margin}, {"error", bo.error}};
        if (bo.result) {
          const auto& r = *bo.result;
          const std::string name = k == 1 ? "solution.csv" : "solution_" + std::to_string(k) + ".csv";
          write_profile_csv((out / name).string(), p.F.grid.interior_nodes(), r.u_star);
          for (std::size_t i = 0; i < r.path_energies.size(); ++i)
            pe << k << ',' << i << ',' << r.path_energies[i] << '\n';
          j.update({{"profile", name}, {"status", r.status}, {"c", r.level}, {"residual", r.residual},
                    {"relative_residual", r.relative_residual}, {"raw_residual", r.raw_residual},
                    {"cone_violation", r.cone_violation}, {"energy_u0", r.energy_u0},
                    {"nonconstancy_linf", r.nonconstancy_linf}, {"oscillation", r.oscillation},
                    {"iterations", r.iterations}, {"newton_iterations", r.newton_iterations},
                    {"t_minus", r.t_minus}, {"t_plus", jnum(r.t_plus)}, {"tau_bar", r.tau_bar},
                    {"initial_path_max", r.initial_path_max}});
        }
        sols.push_back(j);
        vb.push_back({{"u0", bo.u0}, {"pass", bo.verify.required_pass() && bo.result.has_value() && bo.error.empty()},
                      {"checks", checks_json(bo.verify)}});
      }
      json cross = json::array();
      if (res.bands.size() > 1) {
        VerificationReport cr;
        for (const auto& ch : res.verify.checks)
          if (ch.name == "interleaving" || ch.name == "distinct") cr.checks.push_back(ch);
        cross = checks_json(cr);
      }
      write_json(out / "verify.json", {{"schema", kSchema}, {"pass", res.verify.required_pass() && !failed},
                                       {"bands", vb}, {"cross", cross}});

      json result = {{"schema", kSchema},
                     {"timestamp", utc_timestamp()},
                     {"exit_code", res.exit_code},
                     {"config", config_json(cfg)},
                     {"domain", domain_json(p.cfg.domain)},
                     {"scale_factor", p.scale_factor},
                     {"lambda2_rad", p.L.lambda2_rad},
                     {"lambda2_plus", p.L.pair.lambda},
                     {"shift", p.shift},
                     {"constants",
                      {{"M", p.H.M}, {"delta", p.H.delta}, {"M_eff", p.M_eff}, {"C_emb", p.emb.C_emb},
                       {"K1", p.K.K1}, {"K_inf", p.K.K_inf}, {"K2", p.K.K2}, {"ell", p.T.ell},
                       {"t_star", p.T.t_star}, {"D", p.T.D}, {"mu", p.mu}, {"T0", p.T0}}},
                     {"solutions", sols}};
      if (!res.bands.empty()) {
        const auto& b0 = res.bands.front();
        result["f3_margin"] = b0.f3_margin;
        if (b0.result) {
          result["c"] = b0.result->level;
          result["residual"] = b0.result->residual;
          result["energy_u0"] = b0.result->energy_u0;
          result["nonconstancy_linf"] = b0.result->nonconstancy_linf;
          result["status"] = b0.result->status;
        }
      }
      if (res.bands.size() > 1) {
        result["interleaving"] = res.interleaving;
        result["distinct"] = res.distinct;
      }
      write_json(out / "result.json", result);
    } catch (const std::exception& e) {
      log(std::string("report emission failed: ") + e.what());
      res.exit_code = kIoFailure;
      res.error = e.what();
    }
  }
  return res;
}

int run_eigs(const RunConfig& cfg) {
  try {
    const Prepared p = prepare(cfg, Stage::eigs);
    write_eigs(p, ensure_out(p.cfg));
    return kOk;
  } catch (const std::exception& e) {
    const int code = exit_for(e);
    write_error(cfg, "eigs.json", code, e.what());
    log(e.what());
    return code;
  }
}

int run_hypotheses(const RunConfig& cfg) {
  try {
    const Prepared p = prepare(cfg, Stage::hypotheses);
    write_json(ensure_out(p.cfg) / "hypotheses.json", hypotheses_json(p));
    return p.H.required_pass() ? kOk : kHypothesisFailure;
  } catch (const std::exception& e) {
    const int code = exit_for(e);
    write_error(cfg, "hypotheses.json", code, e.what());
    log(e.what());
    return code;
  }
}

std::vector<std::pair<double, double>> read_profile_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open profile " + path);
  std::string line;
  std::getline(is, line);
  if (line != "r,u") throw ParameterError(path + ": expected header r,u");
  std::vector<std::pair<double, double>> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ParameterError(path + ": malformed row '" + line + "'");
    rows.emplace_back(std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1)));
  }
  return rows;
}

VerificationReport verify_profiles(const Prepared& p, const std::vector<Eigen::VectorXd>& profiles) {
  const Problem P(p.F, p.T, p.shift);
  VerificationReport all;
  for (std::size_t k = 0; k < profiles.size() && k < p.bands.size(); ++k) {
    const int b = p.bands[k];
    const ConeSpec cone{p.cfg.orientation, p.T.u_minus[b], p.T.u_plus[b]};
    VerifyInputs in;
    in.K1 = p.K.K1; in.K_inf = p.K.K_inf; in.K2 = p.K.K2;
    in.tol = p.cfg.tol;
    in.u0 = p.T.u0_list[b];
    all.append(verify_solution(profiles[k], P, cone, in));
  }
  return all;
}

int run_verify(const RunConfig& cfg) {
  try {
    const Prepared p = prepare(cfg, Stage::full);
    const fs::path out(p.cfg.out_dir);
    const auto r = p.F.grid.interior_nodes();
    std::vector<Eigen::VectorXd> profiles;
    for (std::size_t k = 1; k <= p.bands.size(); ++k) {
      const fs::path f = out / (k == 1 ? "solution.csv" : "solution_" + std::to_string(k) + ".csv");
      if (!fs::exists(f)) break;
      const auto rows = read_profile_csv(f.string());
      if (rows.size() != r.size()) throw ParameterError(f.string() + ": node count differs from the configured grid");
      Eigen::VectorXd u(static_cast<Eigen::Index>(rows.size()));
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (std::abs(rows[i].first - r[i]) > 1e-12 * std::max(1.0, r[i]))
          throw ParameterError(f.string() + ": radii differ from the configured grid");
        u[static_cast<Eigen::Index>(i)] = rows[i].second;
      }
      profiles.push_back(std::move(u));
    }
    if (profiles.empty()) throw std::runtime_error("no solution.csv in " + out.string());
    const auto rep = verify_profiles(p, profiles);
    write_json(out / "verify.json", {{"schema", kSchema}, {"pass", rep.required_pass()}, {"checks", checks_json(rep)}});
    return rep.required_pass() ? kOk : kVerificationFailure;
  } catch (const std::exception& e) {
    const int code = exit_for(e);
    write_error(cfg, "verify.json", code, e.what());
    log(e.what());
    return code;
  }
}

int run_oracle(const RunConfig& cfg) {
  try {
    validate_config(cfg);
    const DomainSpec d = with_defaults(cfg.domain);
    const RadialGrid g = build_grid(d, cfg.oracle_N, 4, cfg.grading);
    const KernelParams kp = make_kernel_params(d.n, d.s);
    OracleOptions oo;
    oo.seed = cfg.seed;
    VerificationReport rep = oracle_compare(g, kp, oo);
    const AssembledForms F = assemble_forms(g, kp);
    const Eigen::MatrixXd Af = oracle::dense_full_form(g, kp);
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    VerificationReport ibp;
    for (int k = 0; k < 20; ++k) {
      RadialFunction u, v;
      u.interior = Eigen::VectorXd::NullaryExpr(F.n_int(), [&] { return U(rng); });
      v.interior = Eigen::VectorXd::NullaryExpr(F.n_int(), [&] { return U(rng); });
      u.exterior = Eigen::VectorXd::NullaryExpr(g.n_ext(), [&] { return U(rng); });
      v.exterior = Eigen::VectorXd::NullaryExpr(g.n_ext(), [&] { return U(rng); });
      ibp.append(check_integration_by_parts(u, v, F, &Af));
    }
    // keep the worst case of each identity
    for (const std::string name : {"by_parts_same_matrix", "by_parts_independent"}) {
      const Check* worst = nullptr;
      for (const auto& c : ibp.checks)
        if (c.name == name && (!worst || c.value / c.tol > worst->value / worst->tol)) worst = &c;
      bool all = true;
      for (const auto& c : ibp.checks)
        if (c.name == name) all = all && c.pass;
      if (worst) rep.add(name, worst->value, worst->tol, all, true, "worst of 20 random pairs");
    }
    write_json(ensure_out(cfg) / "oracle.json",
               {{"schema", kSchema}, {"pass", rep.required_pass()}, {"domain", domain_json(d)},
                {"N_int", cfg.oracle_N}, {"checks", checks_json(rep)}});
    return rep.required_pass() ? kOk : kVerificationFailure;
  } catch (const std::exception& e) {
    const int code = exit_for(e);
    write_error(cfg, "oracle.json", code, e.what());
    log(e.what());
    return code;
  }
}

}  // namespace fracneu
