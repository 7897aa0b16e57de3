#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "cvc/nfl.hpp"
#include "cvc/trainer.hpp"

namespace cvc {

std::string build_identifier();

enum class Command { Compile, Nfl, Landscape, Verify };

struct ExperimentConfig {
  Command command = Command::Compile;
  std::uint64_t seed = 1;
  int cutoff = 50;
  std::string out;
  long long shots = 0;
  int threads = 1;
  bool allow_large = false;

  // target
  std::string target_kind = "gaussian";  // gaussian | kerr | beamsplitter | identity
  bool target_random = true;
  bool target_elliptic = false;  // restrict random Gaussians to the
                                 // truncation-converged elliptic regime
  std::vector<double> target_params;  // explicit parameters when not random

  // ansatz
  std::string ansatz_kind = "gaussian";  // gaussian | layered | two-mode-layered
  int ansatz_layers = 1;
  bool ansatz_bounded = false;
  double ansatz_lo = 0.0, ansatz_hi = 1.0;

  // cost
  std::string cost_kind = "le-tmss";
  double cost_r = 0.1;
  double cost_energy = 1.0;
  int cost_k = 1;
  int cost_rank = 1;
  int cost_d = 50;

  // schedule / optimizer
  std::vector<double> schedule_r = {0.1, 0.5, 2.5};
  std::string opt_method = "lbfgs";  // nelder-mead | lbfgs
  long long opt_max_evals = 30000;
  double opt_f_tol = 1e-9;
  double opt_fd_step = 1e-6;
  int opt_stage0_starts = 5;
  int opt_retries = 5;
  double opt_retry_threshold = 1e-6;
  double opt_cost_floor = 0.0;

  // nfl
  std::string nfl_experiment = "thm1";  // thm1 | thm2 | cor1 | appd
  long long nfl_samples = 2000;
  long long nfl_sigma_samples = 100;
  double nfl_d_max = 2.0;

  // landscape
  std::vector<double> landscape_r = {0.1, 2.5};
  std::vector<double> landscape_eps = {0.0, 0.05, 0.1, 0.2, 0.3, 0.5};
  int landscape_samples = 50;
  int landscape_m_max = 4;
  int landscape_grad_samples = 2000;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Canonical `key = value` text form; parse(serialize(c)) == c.
std::string serialize_config(const ExperimentConfig& config);
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

/// Named presets for the shipped experiment classes; throws
/// std::invalid_argument for unknown names.
ExperimentConfig preset(const std::string& name);
std::vector<std::string> preset_names();

/// Tabular experiment output: JSON header line (prefixed "# ") carrying the
/// canonical config echo and build id, then a CSV header and rows.
struct ExperimentRecord {
  ExperimentConfig config;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void write(std::ostream& os) const;
  void write_file(const std::string& path) const;
};

/// Refuses configurations whose largest state exceeds 2^24 amplitudes
/// (throws resource_refusal) unless allow_large is set.
void check_resources(const ExperimentConfig& config);

ExperimentRecord run_compile(const ExperimentConfig& config);
ExperimentRecord run_nfl(const ExperimentConfig& config);
ExperimentRecord run_landscape(const ExperimentConfig& config);
ExperimentRecord run_verify(const ExperimentConfig& config);
ExperimentRecord run(const ExperimentConfig& config);

/// Target construction shared with the acceptance suite: draws random
/// parameters in the standard ranges when config.target_random is set.
CompileTarget make_target(const ExperimentConfig& config, RngStream& rng);
AnsatzSpec make_ansatz(const ExperimentConfig& config);
CostKind parse_cost_kind(const std::string& name);

}  // namespace cvc
