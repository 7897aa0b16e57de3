#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cvc/costs.hpp"
#include "cvc/gates.hpp"

namespace cvc {

MatrixXcd kron(const MatrixXcd& a, const MatrixXcd& b);

enum class AnsatzKind { Gaussian, GaussianFactored, Layered, TwoModeLayered };

/// Parameter layouts:
///   Gaussian:         [Re a, Im a, Re b, Im b, phi]                  (5)
///   GaussianFactored: [Re a, Im a, Re z, Im z, phi]: D(a) S(z) R(phi)
///                     (covers every single-mode Gaussian up to a global
///                     phase; the exponential chart does not)            (5)
///   Layered:          per layer [Re a, Im a, Re b, Im b, phi, chi]   (6L)
///   TwoModeLayered:   [theta, phi_bs, layer(mode 1), layer(mode 2)]  (14)
struct AnsatzSpec {
  AnsatzKind kind = AnsatzKind::Gaussian;
  int layers = 1;
  int cutoff = 0;
  std::optional<std::pair<double, double>> bounds;  // uniform box per parameter
};

int ansatz_param_count(const AnsatzSpec& spec);

/// One general single-mode layer U_Kerr(chi) R(phi) D(alpha) S(beta);
/// S acts first.
Operator build_single_mode_layer(Complex alpha, Complex beta, double phi,
                                 double chi, int cutoff);

/// Product of L layers; layer 1 acts first.
Operator build_layered_ansatz(const VectorXd& theta, int layers, int cutoff);

/// U_BS(theta, phi) applied after independent single-mode layers on the two
/// modes.
Operator build_two_mode_ansatz(const VectorXd& theta, int cutoff);

Operator build_ansatz(const AnsatzSpec& spec, const VectorXd& theta);

enum class OptMethod { SimplexDerivativeFree, QuasiNewtonFiniteDifference };

struct OptimizerConfig {
  OptMethod method = OptMethod::QuasiNewtonFiniteDifference;
  long long max_evals = 20000;
  double f_tol = 1e-10;   // stage-advance window tolerance
  double fd_step = 1e-6;  // scaled by max(1, |x_i|)
  double cost_floor = 0.0;  // stop early once the best value reaches this
  std::uint64_t seed = 0;
};

struct BoxBounds {
  VectorXd lo, hi;
};

struct MinimizeResult {
  VectorXd best_params;
  double best_value = 0.0;
  long long evals = 0;
  long long nonfinite_evals = 0;
};

/// Called on every strict improvement of the best value.
using ImprovementObserver =
    std::function<void(long long evals, const VectorXd& params, double value)>;

/// Local minimization: Nelder-Mead with adaptive restarts, or projected
/// L-BFGS with central finite differences. Non-finite objective values are
/// counted and replaced by a large penalty. Deterministic given the seed.
MinimizeResult minimize(const std::function<double(const VectorXd&)>& objective,
                        const VectorXd& init, const OptimizerConfig& config,
                        const BoxBounds* bounds = nullptr,
                        const ImprovementObserver& observer = nullptr);

struct CompileTarget {
  enum class Kind { Gaussian, Kerr, Beamsplitter, Identity };
  Kind kind = Kind::Identity;
  Operator op;
  VectorXd true_params;  // layout matching the kind; used by diagnostics
};

/// Parameter-error metrics for a candidate solution plus HST diagnostics at
/// d = 5 and d = 50 (capped at the cutoff).
std::map<std::string, double> diagnostics(const AnsatzSpec& spec,
                                          const VectorXd& theta,
                                          const CompileTarget& target);

using InitSampler = std::function<VectorXd(RngStream&)>;

struct ScheduleConfig {
  std::vector<double> r_values;
  OptimizerConfig opt;
  // Multi-start count for the first stage and full-schedule retries when the
  // final cost exceeds retry_threshold; both need init_sampler.
  int stage0_starts = 1;
  int retries = 0;
  double retry_threshold = 1e-6;
  InitSampler init_sampler;
};

struct TrainRecord {
  long long iteration = 0;  // improvement index within the run
  long long evals = 0;      // cumulative objective evaluations
  int stage = 0;
  double r = 0.0;
  double cost = 0.0;
  double hst5 = 0.0;
  double hst50 = 0.0;
  std::map<std::string, double> metrics;
  double wall_seconds = 0.0;  // excluded from determinism comparisons
  std::uint64_t seed = 0;
};

struct ScheduledTraining {
  std::vector<TrainRecord> records;
  VectorXd final_params;
  double final_cost = 0.0;
  long long total_evals = 0;
};

/// Squeezing-annealed training: stage s+1 starts from the stage-s optimum.
/// Only TMSS cost kinds are allowed.
ScheduledTraining train_with_r_schedule(const CompileTarget& target,
                                        const AnsatzSpec& ansatz, CostKind kind,
                                        const ScheduleConfig& schedule,
                                        const VectorXd& init, std::uint64_t seed);

}  // namespace cvc
