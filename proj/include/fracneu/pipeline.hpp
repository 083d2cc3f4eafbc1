#pragma once
// Run configuration, the staged pipeline (hypotheses, eigs, truncation, solve, verify) and report files.

#include <optional>
#include <string>
#include <vector>

#include "fracneu/discretization.hpp"
#include "fracneu/nonlinearity.hpp"
#include "fracneu/spectral.hpp"
#include "fracneu/variational.hpp"
#include "fracneu/verification.hpp"

namespace fracneu {

inline constexpr const char* kSchema = "fracneu/1";

enum ExitCode : int { kOk = 0, kHypothesisFailure = 2, kNonConvergence = 3, kVerificationFailure = 4, kIoFailure = 5 };

struct RunConfig {
  DomainSpec domain;             // R_ext <= 0 means 8 R
  bool auto_scale = true;        // homothetic rescaling until the (f3) margin is comfortable
  double scale_target = 0.5;     // aim for lambda2_plus <= scale_target (f'(u0) - 1)

  int N_int = 128;
  int N_ext = 0;                 // 0 means N_int / 2
  double grading = 2.0;

  std::string nl_kind = "prototype";  // prototype | table
  double q = 4.0, r = 3.0;
  std::string table_path;
  std::string shift_policy = "auto";  // auto | none
  double T_scan = 0.0;                // 0 means automatic

  double ell = 0.0;                   // 0 means automatic
  double trunc_margin = 0.1;

  Orientation orientation = Orientation::nondecreasing;

  int path_points = 33;
  double tol = 1e-10;
  int max_outer = 2000;
  unsigned seed = 1;
  std::string bands = "all";          // all | best
  bool force = false;                 // continue past failed hypotheses

  int embedding_samples = 400;
  int eigs_count = 10;
  int oracle_N = 6;

  std::string out_dir = "out";
};

/// INI file; unknown keys are rejected. Relative table paths resolve against the file's directory.
RunConfig load_config(const std::string& path);
RunConfig parse_config_string(const std::string& text, const std::string& base_dir = ".");
std::string default_config_text();
void validate_config(const RunConfig& cfg);

/// Everything up to (not including) the mountain pass.
struct Prepared {
  RunConfig cfg;                 // with the final (possibly rescaled) domain
  double scale_factor = 1.0;
  DomainSpec original_domain;
  AssembledForms F;
  std::vector<EigenPair> eigs;
  Lambda2Plus L;
  NonlinearitySpec spec;
  HypothesisReport H;
  double shift = 0.0;
  EmbeddingEstimate emb;
  double M_eff = 0.0;
  AprioriConstants K{};
  TruncatedNonlinearity T;
  double mu = 0.0, T0 = 0.0;
  std::vector<int> bands;        // indices into T.u0_list selected for solving
  std::vector<double> f3_margins;  // per band
};

enum class Stage { eigs, hypotheses, full };

/// Throws the module errors; run_* map them to exit codes.
Prepared prepare(const RunConfig& cfg, Stage stage = Stage::full);

struct BandOutcome {
  double u0 = 0.0, u_minus = 0.0, u_plus = kInf;
  double f3_margin = 0.0;
  std::optional<MinimaxResult> result;  // converged or best iterate
  std::string error;
  VerificationReport verify;
};

struct PipelineResult {
  int exit_code = kOk;
  std::string error;
  std::optional<Prepared> prep;
  std::vector<BandOutcome> bands;
  bool interleaving = true, distinct = true;
  VerificationReport verify;  // union of per-band reports plus cross-band checks
};

/// hypotheses -> eigs -> truncation -> mountain pass -> verification, with reports written to
/// cfg.out_dir when write is set.
PipelineResult run_pipeline(const RunConfig& cfg, bool write = true);

int run_eigs(const RunConfig& cfg);
int run_hypotheses(const RunConfig& cfg);
int run_verify(const RunConfig& cfg);
int run_oracle(const RunConfig& cfg);

/// Interior verification of previously written profiles against a freshly prepared problem.
VerificationReport verify_profiles(const Prepared& prep, const std::vector<Eigen::VectorXd>& profiles);

std::vector<std::pair<double, double>> read_profile_csv(const std::string& path);

}  // namespace fracneu
