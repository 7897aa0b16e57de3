#include "cvc/landscape.hpp"

#include <cmath>

namespace cvc {

double analytic_phase_cost(const VectorXd& phis, double r) {
  if (r < 0.0) throw std::invalid_argument("analytic_phase_cost: r must be >= 0");
  const double t2 = std::tanh(r) * std::tanh(r);
  const int m = int(phis.size());
  double prod = 1.0;
  for (int j = 0; j < m; ++j)
    prod /= 1.0 - 2.0 * std::cos(phis(j)) * t2 + t2 * t2;
  return 1.0 - std::pow(std::cosh(r), -4.0 * m) * prod;
}

double analytic_grad_expectation(double r, int m) {
  if (r <= 0.0) throw std::invalid_argument("analytic_grad_expectation: r must be > 0");
  const double t2 = std::tanh(r) * std::tanh(r);
  const double ch = std::cosh(r);
  const double s2 = std::sinh(r) * std::sinh(r);
  return 4.0 * t2 * ch * ch * ch * ch / M_PI *
         std::pow(1.0 + 2.0 * s2, -double(m) - 1.0);
}

double analytic_local_grad_expectation(double r, int m) {
  if (r <= 0.0)
    throw std::invalid_argument("analytic_local_grad_expectation: r must be > 0");
  const double t2 = std::tanh(r) * std::tanh(r);
  return 4.0 * t2 / (M_PI * double(m) * (1.0 + t2) * (1.0 + t2));
}

std::pair<double, double> grad_magnitude_mc(
    const std::function<double(const VectorXd&)>& cost, int m,
    int n_samples, double fd_step, RngStream& rng) {
  if (n_samples < 2) throw std::invalid_argument("grad_magnitude_mc: need >= 2 samples");
  double sum = 0.0, sum2 = 0.0;
  VectorXd phi(m);
  for (int i = 0; i < n_samples; ++i) {
    for (int j = 0; j < m; ++j) phi(j) = rng.uniform(-M_PI, M_PI);
    VectorXd p = phi;
    p(0) = phi(0) + fd_step;
    const double cp = cost(p);
    p(0) = phi(0) - fd_step;
    const double cm = cost(p);
    const double g = std::abs((cp - cm) / (2.0 * fd_step));
    sum += g;
    sum2 += g * g;
  }
  const double mean = sum / n_samples;
  const double var = std::max(0.0, sum2 / n_samples - mean * mean);
  return {mean, std::sqrt(var / n_samples)};
}

LandscapeScan landscape_scan(const std::function<double(const VectorXd&)>& cost,
                             const VectorXd& theta_opt, const VectorXd& eps_grid,
                             int samples_per_eps, std::uint64_t seed) {
  const double c0 = cost(theta_opt);
  if (!(c0 <= 1e-6))
    throw std::invalid_argument("landscape_scan: cost(theta_opt) > 1e-6, not an optimum");
  for (Eigen::Index i = 1; i < eps_grid.size(); ++i)
    if (eps_grid(i) <= eps_grid(i - 1))
      throw std::invalid_argument("landscape_scan: eps grid must be strictly increasing");

  LandscapeScan scan;
  scan.eps_grid = eps_grid;
  scan.samples_per_eps = samples_per_eps;
  scan.seed = seed;
  scan.costs.resize(samples_per_eps, eps_grid.size());
  RngStream rng(seed);
  VectorXd theta(theta_opt.size());
  for (int s = 0; s < samples_per_eps; ++s) {
    RngStream sub = rng.substream(std::uint64_t(s));
    for (Eigen::Index e = 0; e < eps_grid.size(); ++e) {
      for (Eigen::Index k = 0; k < theta.size(); ++k)
        theta(k) = theta_opt(k) + eps_grid(e) * sub.uniform(-1.0, 1.0);
      scan.costs(s, e) = cost(theta);
    }
  }
  return scan;
}

}  // namespace cvc
