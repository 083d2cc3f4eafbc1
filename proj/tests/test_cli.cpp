#include <catch_amalgamated.hpp>

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "fracneu/pipeline.hpp"

using namespace fracneu;
namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::string cli() {
  const char* p = std::getenv("FRACNEU_CLI");
  return p ? p : "./fracneu";
}

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("fracneu_cli_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

// small but complete run
std::string small_config(const fs::path& out, const std::string& extra = "") {
  std::string t = default_config_text();
  auto set = [&](const std::string& key, const std::string& val) {
    const auto pos = t.find("\n" + key + " = ");
    REQUIRE(pos != std::string::npos);
    const auto end = t.find('\n', pos + 1);
    t.replace(pos + 1, end - pos - 1, key + " = " + val);
  };
  set("N_int", "32");
  set("embedding_samples", "100");
  set("directory", out.string());
  return t + extra;
}

fs::path write_config(const fs::path& dir, const std::string& text) {
  const fs::path p = dir / "run.ini";
  std::ofstream(p) << text;
  return p;
}

int run(const std::string& args) {
  const int st = std::system((cli() + " " + args + " > /dev/null 2>&1").c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

json read_json(const fs::path& p) {
  std::ifstream is(p);
  return json::parse(is);
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("printed defaults parse back to the default configuration") {
  const auto c = parse_config_string(default_config_text());
  const RunConfig d;
  CHECK(c.domain.n == d.domain.n);
  CHECK(c.domain.s == d.domain.s);
  CHECK(c.N_int == d.N_int);
  CHECK(c.tol == d.tol);
  CHECK(c.bands == d.bands);
  CHECK(c.out_dir == d.out_dir);
  const fs::path dir = scratch("defaults");
  CHECK(std::system((cli() + " --print-defaults > " + (dir / "d.ini").string()).c_str()) == 0);
  CHECK(slurp(dir / "d.ini") == default_config_text());
}

TEST_CASE("invalid configurations exit with code 2") {
  const fs::path dir = scratch("invalid");
  const auto base = small_config(dir / "out");
  auto with = [&](const std::string& from, const std::string& to) {
    std::string t = base;
    t.replace(t.find(from), from.size(), to);
    return t;
  };
  CHECK(run("solve --config " + write_config(dir, with("s = 0.75", "s = 0.4")).string()) == 2);
  CHECK(run("solve --config " + write_config(dir, with("orientation = nondecreasing", "orientation = nonincreasing")).string()) == 2);
  CHECK(run("solve --config " + write_config(dir, with("[grid]\n", "[grid]\nbogus = 1\n")).string()) == 2);
  CHECK_THROWS(parse_config_string("[grid]\nbogus = 1\n"));
  CHECK_THROWS(parse_config_string("[nowhere]\nx = 1\n"));
}

TEST_CASE("solve is reproducible and writes complete reports") {
  const fs::path dir = scratch("solve");
  const fs::path out = dir / "out";
  const fs::path cfg = write_config(dir, small_config(out));
  REQUIRE(run("solve --config " + cfg.string()) == 0);
  json r1 = read_json(out / "result.json");
  const std::string s1 = slurp(out / "solution.csv");
  REQUIRE(run("solve --config " + cfg.string()) == 0);
  json r2 = read_json(out / "result.json");
  CHECK(slurp(out / "solution.csv") == s1);
  r1.erase("timestamp");
  r2.erase("timestamp");
  CHECK(r1 == r2);
  CHECK(r1["schema"] == kSchema);
  CHECK(r1["exit_code"] == 0);
  CHECK(r1["status"] == "nonconstant");

  const auto prof = read_profile_csv((out / "solution.csv").string());
  REQUIRE(prof.size() == 33);
  for (std::size_t i = 1; i < prof.size(); ++i) {
    CHECK(prof[i].first > prof[i - 1].first);
    CHECK(prof[i].second >= prof[i - 1].second);
  }

  const json v = read_json(out / "verify.json");
  CHECK(v["pass"] == true);
  std::set<std::string> names;
  for (const auto& c : v["bands"][0]["checks"]) names.insert(c["name"].get<std::string>());
  for (const char* n : {"residual", "raw_residual", "identity_mass", "integral_fractional_laplacian",
                        "neumann_condition", "bound_L1", "bound_Linf", "bound_H", "positivity", "monotone",
                        "cone_bounds", "nonconstant", "distinct_from_u0", "below_u0_level", "constancy_criterion"})
    CHECK(names.count(n) == 1);
  CHECK(fs::exists(out / "path_energies.csv"));
  CHECK(fs::exists(out / "hypotheses.json"));
  CHECK(fs::exists(out / "eigs.json"));

  CHECK(run("verify --config " + cfg.string()) == 0);
  CHECK(read_json(out / "verify.json")["pass"] == true);
}

TEST_CASE("hypotheses on a linear table exit with code 2") {
  const fs::path dir = scratch("linear");
  std::ofstream(dir / "lin.csv") << "t,f,fprime\n0,0,0.5\n10,5,0.5\n";
  std::string t = small_config(dir / "out");
  t.replace(t.find("kind = prototype"), 16, "kind = table");
  t.replace(t.find("table =\n"), 8, "table = lin.csv\n");
  const fs::path cfg = write_config(dir, t);
  CHECK(run("hypotheses --config " + cfg.string()) == 2);
  const json h = read_json(dir / "out" / "hypotheses.json");
  CHECK(h.value("pass", false) == false);
}

TEST_CASE("eigs and oracle subcommands") {
  const fs::path dir = scratch("eigs");
  const fs::path out = dir / "out";
  const fs::path cfg = write_config(dir, small_config(out));
  REQUIRE(run("eigs --config " + cfg.string()) == 0);
  const json e = read_json(out / "eigs.json");
  CHECK(e["schema"] == kSchema);
  CHECK(fs::exists(out / "v2.csv"));
  CHECK(run("oracle --config " + cfg.string()) == 0);
  CHECK(read_json(out / "oracle.json")["pass"] == true);
  CHECK(run("solve") != 0);
}
