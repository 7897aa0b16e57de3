#include "cvc/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>

#include "cvc/rng.hpp"

namespace cvc {

MatrixXcd kron(const MatrixXcd& a, const MatrixXcd& b) {
  MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

int ansatz_param_count(const AnsatzSpec& spec) {
  switch (spec.kind) {
    case AnsatzKind::Gaussian: return 5;
    case AnsatzKind::GaussianFactored: return 5;
    case AnsatzKind::Layered: return 6 * spec.layers;
    case AnsatzKind::TwoModeLayered: return 14;
  }
  return 0;
}

Operator build_single_mode_layer(Complex alpha, Complex beta, double phi,
                                 double chi, int cutoff) {
  MatrixXcd m = kerr(chi, cutoff).mat * rotation(phi, cutoff).mat *
                displacement(alpha, cutoff).mat * squeeze(beta, cutoff).mat;
  return Operator(HilbertSpec(cutoff, 1), std::move(m));
}

Operator build_layered_ansatz(const VectorXd& theta, int layers, int cutoff) {
  if (theta.size() != 6 * layers)
    throw std::invalid_argument("build_layered_ansatz: need 6 parameters per layer");
  MatrixXcd v = MatrixXcd::Identity(cutoff, cutoff);
  for (int l = 0; l < layers; ++l) {
    const double* p = theta.data() + 6 * l;
    Operator layer = build_single_mode_layer(Complex(p[0], p[1]), Complex(p[2], p[3]),
                                             p[4], p[5], cutoff);
    v = layer.mat * v;  // layer 1 acts first
  }
  return Operator(HilbertSpec(cutoff, 1), std::move(v));
}

Operator build_two_mode_ansatz(const VectorXd& theta, int cutoff) {
  if (theta.size() != 14)
    throw std::invalid_argument("build_two_mode_ansatz: need 14 parameters");
  Operator l1 = build_single_mode_layer(Complex(theta(2), theta(3)),
                                        Complex(theta(4), theta(5)), theta(6),
                                        theta(7), cutoff);
  Operator l2 = build_single_mode_layer(Complex(theta(8), theta(9)),
                                        Complex(theta(10), theta(11)), theta(12),
                                        theta(13), cutoff);
  MatrixXcd v = beamsplitter(theta(0), theta(1), cutoff).mat * kron(l1.mat, l2.mat);
  return Operator(HilbertSpec(cutoff, 2), std::move(v));
}

Operator build_ansatz(const AnsatzSpec& spec, const VectorXd& theta) {
  if (theta.size() != ansatz_param_count(spec))
    throw std::invalid_argument("build_ansatz: parameter count mismatch");
  switch (spec.kind) {
    case AnsatzKind::Gaussian:
      return gaussian_unitary(Complex(theta(0), theta(1)), Complex(theta(2), theta(3)),
                              theta(4), spec.cutoff);
    case AnsatzKind::GaussianFactored: {
      MatrixXcd m = displacement(Complex(theta(0), theta(1)), spec.cutoff).mat *
                    squeeze(Complex(theta(2), theta(3)), spec.cutoff).mat *
                    rotation(theta(4), spec.cutoff).mat;
      return Operator(HilbertSpec(spec.cutoff, 1), std::move(m));
    }
    case AnsatzKind::Layered:
      return build_layered_ansatz(theta, spec.layers, spec.cutoff);
    case AnsatzKind::TwoModeLayered:
      return build_two_mode_ansatz(theta, spec.cutoff);
  }
  throw std::logic_error("build_ansatz: unknown kind");
}

// ---------------------------------------------------------------------------
// optimizers
// ---------------------------------------------------------------------------

namespace {

struct BudgetExhausted {};

constexpr double kPenalty = 1e9;

class Tracker {
public:
  Tracker(const std::function<double(const VectorXd&)>& f, long long max_evals,
          double floor, const ImprovementObserver& observer)
      : f_(f), max_evals_(max_evals), floor_(floor), observer_(observer) {}

  double operator()(const VectorXd& x) {
    if (evals_ >= max_evals_) throw BudgetExhausted{};
    ++evals_;
    double v = f_(x);
    if (!std::isfinite(v)) {
      ++nonfinite_;
      v = kPenalty;
    }
    if (v < best_value_) {
      best_value_ = v;
      best_ = x;
      if (observer_) observer_(evals_, x, v);
    }
    return v;
  }

  // no relative improvement of at least f_tol over the trailing window of
  // objective evaluations
  bool stalled(double f_tol, long long window) {
    if (best_value_ <= floor_) return true;
    history_.emplace_back(evals_, best_value_);
    while (history_.size() >= 2 && evals_ - history_[1].first >= window)
      history_.pop_front();
    if (evals_ - history_.front().first < window) return false;
    const double before = history_.front().second;
    return (before - best_value_) < f_tol * std::max(std::abs(before), 1e-18);
  }

  long long evals() const { return evals_; }
  long long nonfinite() const { return nonfinite_; }
  double best_value() const { return best_value_; }
  const VectorXd& best() const { return best_; }
  bool has_best() const { return best_.size() > 0; }

private:
  const std::function<double(const VectorXd&)>& f_;
  long long max_evals_;
  double floor_ = 0.0;
  const ImprovementObserver& observer_;
  long long evals_ = 0;
  long long nonfinite_ = 0;
  double best_value_ = std::numeric_limits<double>::infinity();
  VectorXd best_;
  std::deque<std::pair<long long, double>> history_;
};

VectorXd clamp_to(const VectorXd& x, const BoxBounds* b) {
  if (!b) return x;
  return x.cwiseMax(b->lo).cwiseMin(b->hi);
}

void nelder_mead(Tracker& track, const VectorXd& init, const OptimizerConfig& cfg,
                 const BoxBounds* bounds) {
  const int n = int(init.size());
  const long long window = std::max<long long>(25, 5 * n + 20);
  RngStream rng(cfg.seed ^ 0x5eedba11);
  VectorXd center = clamp_to(init, bounds);
  double scale = 1.0;

  for (int restart = 0; restart < 64; ++restart) {
    std::vector<VectorXd> xs(n + 1);
    std::vector<double> fs(n + 1);
    xs[0] = center;
    fs[0] = track(xs[0]);
    for (int i = 0; i < n; ++i) {
      VectorXd v = center;
      double step = scale * 0.1 * std::max(1.0, std::abs(center(i)));
      if (restart > 0) step *= (0.5 + rng.uniform());
      v(i) += step;
      xs[size_t(i) + 1] = clamp_to(v, bounds);
      fs[size_t(i) + 1] = track(xs[size_t(i) + 1]);
    }

    while (true) {
      std::vector<int> order(n + 1);
      for (int i = 0; i <= n; ++i) order[i] = i;
      std::sort(order.begin(), order.end(), [&](int a, int b) { return fs[a] < fs[b]; });
      std::vector<VectorXd> xs2(n + 1);
      std::vector<double> fs2(n + 1);
      for (int i = 0; i <= n; ++i) {
        xs2[i] = xs[order[i]];
        fs2[i] = fs[order[i]];
      }
      xs.swap(xs2);
      fs.swap(fs2);

      if (track.stalled(cfg.f_tol, window)) return;
      const double spread = fs[n] - fs[0];
      double size = 0.0;
      for (int i = 1; i <= n; ++i) size = std::max(size, (xs[size_t(i)] - xs[0]).norm());
      if (spread < 1e-15 * (1.0 + std::abs(fs[0])) && size < 1e-10) break;  // restart

      VectorXd centroid = VectorXd::Zero(n);
      for (int i = 0; i < n; ++i) centroid += xs[size_t(i)];
      centroid /= double(n);

      VectorXd xr = clamp_to(centroid + (centroid - xs[n]), bounds);
      double fr = track(xr);
      if (fr < fs[0]) {
        VectorXd xe = clamp_to(centroid + 2.0 * (centroid - xs[n]), bounds);
        double fe = track(xe);
        if (fe < fr) {
          xs[n] = xe;
          fs[n] = fe;
        } else {
          xs[n] = xr;
          fs[n] = fr;
        }
      } else if (fr < fs[n - 1]) {
        xs[n] = xr;
        fs[n] = fr;
      } else {
        VectorXd xc = clamp_to(centroid + 0.5 * (xs[n] - centroid), bounds);
        double fc = track(xc);
        if (fc < fs[n]) {
          xs[n] = xc;
          fs[n] = fc;
        } else {
          for (int i = 1; i <= n; ++i) {
            xs[size_t(i)] = clamp_to(xs[0] + 0.5 * (xs[size_t(i)] - xs[0]), bounds);
            fs[size_t(i)] = track(xs[size_t(i)]);
          }
        }
      }
    }

    center = track.best();
    scale *= 0.3;
  }
}

VectorXd fd_gradient(Tracker& track, const VectorXd& x, double fd_step,
                     const BoxBounds* bounds) {
  const int n = int(x.size());
  VectorXd g(n);
  VectorXd p = x;
  for (int i = 0; i < n; ++i) {
    const double h = fd_step * std::max(1.0, std::abs(x(i)));
    // keep probe points inside the box; the stencil turns one-sided at a bound
    double xp = x(i) + h, xm = x(i) - h;
    if (bounds) {
      xp = std::min(xp, bounds->hi(i));
      xm = std::max(xm, bounds->lo(i));
    }
    if (xp <= xm) {
      g(i) = 0.0;
      continue;
    }
    p(i) = xp;
    const double fp = track(p);
    p(i) = xm;
    const double fm = track(p);
    p(i) = x(i);
    g(i) = (fp - fm) / (xp - xm);
  }
  return g;
}

void project_gradient(VectorXd& g, const VectorXd& x, const BoxBounds* b) {
  if (!b) return;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double eps = 1e-12 * std::max(1.0, std::abs(x(i)));
    if (x(i) <= b->lo(i) + eps && g(i) > 0.0) g(i) = 0.0;
    if (x(i) >= b->hi(i) - eps && g(i) < 0.0) g(i) = 0.0;
  }
}

void lbfgs(Tracker& track, const VectorXd& init, const OptimizerConfig& cfg,
           const BoxBounds* bounds) {
  const int n = int(init.size());
  const long long window = std::max<long long>(25, 6 * n + 30);
  const int hist_max = 10;
  std::deque<std::pair<VectorXd, VectorXd>> hist;  // (s, y)

  VectorXd x = clamp_to(init, bounds);
  double fx = track(x);
  VectorXd g = fd_gradient(track, x, cfg.fd_step, bounds);
  project_gradient(g, x, bounds);

  for (;;) {
    if (g.lpNorm<Eigen::Infinity>() < 1e-13 * std::max(1.0, std::abs(fx))) return;

    // two-loop recursion
    VectorXd q = g;
    std::vector<double> alpha(hist.size());
    for (int i = int(hist.size()) - 1; i >= 0; --i) {
      const auto& [s, y] = hist[size_t(i)];
      const double rho = 1.0 / y.dot(s);
      alpha[size_t(i)] = rho * s.dot(q);
      q -= alpha[size_t(i)] * y;
    }
    if (!hist.empty()) {
      const auto& [s, y] = hist.back();
      q *= s.dot(y) / y.dot(y);
    }
    for (size_t i = 0; i < hist.size(); ++i) {
      const auto& [s, y] = hist[i];
      const double rho = 1.0 / y.dot(s);
      const double beta = rho * y.dot(q);
      q += (alpha[i] - beta) * s;
    }
    VectorXd d = -q;
    if (d.dot(g) > -1e-18) {
      d = -g;
      hist.clear();
    }

    // backtracking line search on the projected path
    double t = hist.empty() ? std::min(1.0, 1.0 / std::max(1.0, g.norm())) : 1.0;
    bool accepted = false;
    VectorXd xn;
    double fn = fx;
    for (int ls = 0; ls < 60; ++ls) {
      xn = clamp_to(x + t * d, bounds);
      VectorXd delta = xn - x;
      if (delta.norm() < 1e-18) break;
      fn = track(xn);
      if (fn <= fx + 1e-4 * g.dot(delta)) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      if (!hist.empty()) {
        hist.clear();
        continue;  // retry from steepest descent
      }
      return;
    }

    VectorXd gn = fd_gradient(track, xn, cfg.fd_step, bounds);
    project_gradient(gn, xn, bounds);
    VectorXd s = xn - x;
    VectorXd y = gn - g;
    if (y.dot(s) > 1e-12 * s.norm() * y.norm()) {
      hist.emplace_back(std::move(s), std::move(y));
      if (int(hist.size()) > hist_max) hist.pop_front();
    }
    x = std::move(xn);
    fx = fn;
    g = std::move(gn);

    if (track.stalled(cfg.f_tol, window)) return;
  }
}

}  // namespace

MinimizeResult minimize(const std::function<double(const VectorXd&)>& objective,
                        const VectorXd& init, const OptimizerConfig& config,
                        const BoxBounds* bounds, const ImprovementObserver& observer) {
  if (bounds && (bounds->lo.size() != init.size() || bounds->hi.size() != init.size()))
    throw std::invalid_argument("minimize: bounds shape mismatch");
  if (bounds && ((bounds->hi - bounds->lo).minCoeff() < 0.0))
    throw std::invalid_argument("minimize: bounds not well-ordered");

  Tracker track(objective, config.max_evals, config.cost_floor, observer);
  try {
    if (config.method == OptMethod::SimplexDerivativeFree)
      nelder_mead(track, init, config, bounds);
    else
      lbfgs(track, init, config, bounds);
  } catch (const BudgetExhausted&) {
  }

  MinimizeResult result;
  result.evals = track.evals();
  result.nonfinite_evals = track.nonfinite();
  if (track.has_best()) {
    result.best_params = track.best();
    result.best_value = track.best_value();
  } else {
    result.best_params = clamp_to(init, bounds);
    result.best_value = objective(result.best_params);
  }
  return result;
}

// ---------------------------------------------------------------------------
// schedule training
// ---------------------------------------------------------------------------

std::map<std::string, double> diagnostics(const AnsatzSpec& spec,
                                          const VectorXd& theta,
                                          const CompileTarget& target) {
  std::map<std::string, double> out;
  auto angle_dist = [](double a, double b) {
    double d = std::fmod(std::abs(a - b), 2.0 * M_PI);
    return std::min(d, 2.0 * M_PI - d);
  };

  switch (spec.kind) {
    case AnsatzKind::Gaussian: {
      static const char* names[5] = {"alpha_re_err", "alpha_im_err", "beta_re_err",
                                     "beta_im_err", "phi_err"};
      for (int i = 0; i < 5; ++i)
        out[names[i]] = std::abs(theta(i) - (int(target.true_params.size()) > i
                                                 ? target.true_params(i)
                                                 : 0.0));
      break;
    }
    case AnsatzKind::GaussianFactored:
      // chart differs from the generator parameters of the targets, so only
      // the truncated-HST diagnostics below are comparable
      break;
    case AnsatzKind::Layered: {
      Complex sum_a = 0.0, sum_b = 0.0;
      double sum_phi = 0.0, sum_chi = 0.0;
      for (int l = 0; l < spec.layers; ++l) {
        sum_a += Complex(theta(6 * l), theta(6 * l + 1));
        sum_b += Complex(theta(6 * l + 2), theta(6 * l + 3));
        sum_phi += theta(6 * l + 4);
        sum_chi += theta(6 * l + 5);
      }
      const double chi_targ =
          (target.kind == CompileTarget::Kind::Kerr && target.true_params.size() > 0)
              ? target.true_params(0)
              : 0.0;
      out["disp_err"] = std::abs(sum_a);
      out["squeeze_err"] = std::abs(sum_b);
      out["phase_err"] = std::abs(sum_phi);
      out["kerr_err"] = std::abs(sum_chi - chi_targ);
      break;
    }
    case AnsatzKind::TwoModeLayered: {
      double tt = target.true_params.size() > 0 ? target.true_params(0) : 0.0;
      double tp = target.true_params.size() > 1 ? target.true_params(1) : 0.0;
      out["theta_err"] = angle_dist(theta(0), tt);
      out["phi_err"] = angle_dist(theta(1), tp);
      out["layer1_norm"] = theta.segment(2, 6).norm();
      out["layer2_norm"] = theta.segment(8, 6).norm();
      break;
    }
  }

  Operator v = build_ansatz(spec, theta);
  const int N = spec.cutoff;
  out["hst5"] = hst_truncated(target.op, v, std::min(5, N));
  out["hst50"] = hst_truncated(target.op, v, std::min(50, N));
  return out;
}

ScheduledTraining train_with_r_schedule(const CompileTarget& target,
                                        const AnsatzSpec& ansatz, CostKind kind,
                                        const ScheduleConfig& schedule,
                                        const VectorXd& init, std::uint64_t seed) {
  if (kind != CostKind::LeTmss && kind != CostKind::RTmss &&
      kind != CostKind::RTmssNormalized && kind != CostKind::LeTmssLocal)
    throw std::invalid_argument("train_with_r_schedule: cost kind must be a TMSS kind");
  if (schedule.r_values.empty())
    throw std::invalid_argument("train_with_r_schedule: empty r schedule");
  for (size_t i = 1; i < schedule.r_values.size(); ++i)
    if (schedule.r_values[i] <= schedule.r_values[i - 1])
      throw std::invalid_argument("train_with_r_schedule: r values must be increasing");

  std::optional<BoxBounds> box;
  if (ansatz.bounds) {
    const int n = ansatz_param_count(ansatz);
    box = BoxBounds{VectorXd::Constant(n, ansatz.bounds->first),
                    VectorXd::Constant(n, ansatz.bounds->second)};
  }

  ScheduledTraining result;
  long long eval_base = 0;
  long long iteration = 0;
  const auto t0 = std::chrono::steady_clock::now();
  RngStream restart_rng(seed ^ 0xa17e52a2u);

  const bool can_resample = bool(schedule.init_sampler);
  const int attempts = can_resample ? schedule.retries + 1 : 1;
  const int starts = can_resample ? std::max(1, schedule.stage0_starts) : 1;

  auto make_observer = [&](size_t stage, double r) {
    return [&, stage, r](long long evals, const VectorXd& theta, double value) {
      TrainRecord rec;
      rec.iteration = iteration++;
      rec.evals = eval_base + evals;
      rec.stage = int(stage);
      rec.r = r;
      rec.cost = value;
      rec.metrics = diagnostics(ansatz, theta, target);
      rec.hst5 = rec.metrics["hst5"];
      rec.hst50 = rec.metrics["hst50"];
      rec.metrics.erase("hst5");
      rec.metrics.erase("hst50");
      rec.wall_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      rec.seed = seed;
      result.records.push_back(std::move(rec));
    };
  };

  for (int attempt = 0; attempt < attempts; ++attempt) {
    VectorXd current =
        (attempt == 0) ? init : schedule.init_sampler(restart_rng);

    for (size_t stage = 0; stage < schedule.r_values.size(); ++stage) {
      const double r = schedule.r_values[stage];
      auto objective = [&](const VectorXd& theta) {
        Operator v = build_ansatz(ansatz, theta);
        switch (kind) {
          case CostKind::LeTmss: return le_tmss_cost(target.op, v, r);
          case CostKind::RTmss: return r_tmss_cost(target.op, v, r);
          case CostKind::RTmssNormalized: return r_tmss_normalized(target.op, v, r);
          case CostKind::LeTmssLocal: return le_tmss_local_cost(target.op, v, r);
          default: throw std::logic_error("unreachable");
        }
      };

      OptimizerConfig cfg = schedule.opt;
      cfg.seed = seed + stage + 977 * std::uint64_t(attempt);
      auto observer = make_observer(stage, r);

      if (stage == 0 && starts > 1) {
        // multi-start against spurious shallow minima of the small-r stage
        MinimizeResult best;
        best.best_value = std::numeric_limits<double>::infinity();
        for (int s = 0; s < starts; ++s) {
          VectorXd begin = (s == 0) ? current : schedule.init_sampler(restart_rng);
          MinimizeResult mr =
              minimize(objective, begin, cfg, box ? &*box : nullptr, observer);
          eval_base += mr.evals;
          if (mr.best_value < best.best_value) best = std::move(mr);
          if (best.best_value <= std::max(1e-12, cfg.cost_floor)) break;
        }
        current = best.best_params;
        result.final_cost = best.best_value;
      } else {
        MinimizeResult mr =
            minimize(objective, current, cfg, box ? &*box : nullptr, observer);
        eval_base += mr.evals;
        current = mr.best_params;
        result.final_cost = mr.best_value;
      }
    }

    result.final_params = current;
    if (result.final_cost <= schedule.retry_threshold) break;
  }

  result.total_evals = eval_base;
  return result;
}

}  // namespace cvc
