#pragma once

#include <cstdint>
#include <functional>
#include <utility>

#include "cvc/common.hpp"
#include "cvc/rng.hpp"

namespace cvc {

/// Closed-form LE-TMSS cost for compiling the m-mode identity with phase
/// gates V = e^{i sum phi_j n_j}:
/// 1 - cosh^{-4m}(r) prod_j (1 - 2 cos(phi_j) tanh^2 r + tanh^4 r)^{-1}.
double analytic_phase_cost(const VectorXd& phis, double r);

/// Exact expectation of |d C / d phi_1| over phi uniform on [-pi, pi]^m for
/// the phase-gate cost above:
///   (4 tanh^2 r cosh^4 r / pi) * (1 + 2 sinh^2 r)^{-(m+1)}.
/// Decays exponentially in m with per-mode ratio 1/(1 + 2 sinh^2 r).
double analytic_grad_expectation(double r, int m);

/// Same expectation for the local cost 1 - (1/m) sum_j Pr(00)_j:
///   4 tanh^2 r / (pi m (1 + tanh^2 r)^2).
/// m * value is constant in m (polynomial, no exponential plateau).
double analytic_local_grad_expectation(double r, int m);

/// Mean and standard error of |central-difference d cost / d phi_1| over
/// phi drawn uniformly on [-pi, pi]^m.
std::pair<double, double> grad_magnitude_mc(
    const std::function<double(const VectorXd&)>& cost, int m,
    int n_samples, double fd_step, RngStream& rng);

struct LandscapeScan {
  VectorXd eps_grid;
  int samples_per_eps = 0;
  MatrixXd costs;  // samples x grid
  std::uint64_t seed = 0;
};

/// Evaluates cost at theta_opt + eps * R with R uniform in [-1,1] per
/// parameter, for every eps on the grid. Requires cost(theta_opt) <= 1e-6.
LandscapeScan landscape_scan(const std::function<double(const VectorXd&)>& cost,
                             const VectorXd& theta_opt, const VectorXd& eps_grid,
                             int samples_per_eps, std::uint64_t seed);

}  // namespace cvc
