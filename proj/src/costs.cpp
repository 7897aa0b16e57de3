#include "cvc/costs.hpp"

#include <cmath>

namespace cvc {

double ShotModel::sample(double p) const {
  if (shots <= 0 || rng == nullptr) return p;
  p = std::min(1.0, std::max(0.0, p));
  if (shots <= 10000) {
    long long hits = 0;
    for (long long i = 0; i < shots; ++i)
      if (rng->uniform() < p) ++hits;
    return double(hits) / double(shots);
  }
  // normal approximation for large shot counts
  double mean = p, sd = std::sqrt(p * (1.0 - p) / double(shots));
  return std::min(1.0, std::max(0.0, mean + sd * rng->normal()));
}

namespace {

double shot(double p, MaybeShots s) { return s ? s->sample(p) : p; }

void check_pair(const Operator& u, const Operator& v) {
  if (u.spec != v.spec) throw std::invalid_argument("cost: U and V specs differ");
}

// Squared Schmidt weights of the m-pair TMSS over the N^m register index.
VectorXd multimode_weights(double r, int cutoff, int m) {
  VectorXd w1 = tmss_schmidt_sq(r, cutoff);
  VectorXd w = w1;
  for (int j = 1; j < m; ++j) {
    VectorXd next(w.size() * cutoff);
    for (Eigen::Index i = 0; i < w.size(); ++i)
      for (int n = 0; n < cutoff; ++n) next(i * cutoff + n) = w(i) * w1(n);
    w.swap(next);
  }
  return w;
}

}  // namespace

Complex tmss_sandwich(const Operator& x, const Operator& y, double r) {
  check_pair(x, y);
  VectorXd lam = multimode_weights(r, x.spec.cutoff, x.spec.modes).cwiseSqrt();
  // <psi| X_A (x) Y_B |psi> = lam^T (X .* Y) lam
  return lam.transpose().cast<Complex>() * (x.mat.cwiseProduct(y.mat)) * lam.cast<Complex>();
}

double hst_truncated(const Operator& u, const Operator& v, int d) {
  check_pair(u, v);
  const int N = u.spec.cutoff, m = u.spec.modes;
  if (d < 1 || d > N) throw std::invalid_argument("hst_truncated: d outside 1..cutoff");
  double dm = std::pow(double(d), m);
  // Tr(P_d V^dag U P_d) = sum_{i in P_d} <i|V^dag U|i>
  Complex tr = 0.0;
  const long long dim = u.spec.dim();
  for (long long i = 0; i < dim; ++i) {
    long long rem = i;
    bool inside = true;
    for (int j = 0; j < m; ++j) {
      if (rem % N >= d) { inside = false; break; }
      rem /= N;
    }
    if (!inside) continue;
    tr += v.mat.col(i).dot(u.mat.col(i));
  }
  return 1.0 - std::norm(tr) / (dm * dm);
}

double le_tmss_cost(const Operator& u, const Operator& v, double r, MaybeShots shots) {
  check_pair(u, v);
  VectorXd w = multimode_weights(r, u.spec.cutoff, u.spec.modes);
  // <psi|(U V^dag (x) I)|psi> = sum_i w_i (U V^dag)_{ii}
  VectorXcd diag = (u.mat.cwiseProduct(v.mat.conjugate())).rowwise().sum();
  Complex ov = w.cast<Complex>().dot(diag);
  return 1.0 - shot(std::norm(ov), shots);
}

double r_tmss_cost(const Operator& u, const Operator& v, double r, MaybeShots shots) {
  Complex ov = tmss_sandwich(u, Operator(v.spec, v.mat.conjugate()), r);
  return 1.0 - shot(std::norm(ov), shots);
}

double r_tmss_normalized(const Operator& u, const Operator& v, double r) {
  check_pair(u, v);
  const Operator uc(u.spec, u.mat.conjugate());
  const Operator vc(v.spec, v.mat.conjugate());
  const double nu = std::abs(tmss_sandwich(u, uc, r));
  const double nv = std::abs(tmss_sandwich(v, vc, r));
  if (nu <= 1e-14 || nv <= 1e-14)
    throw degenerate_input("r_tmss_normalized: vanishing normalizer");
  const Complex ov = tmss_sandwich(u, vc, r);
  return 1.0 - std::norm(ov) / (nu * nv);
}

double le_tmss_local_cost(const Operator& u, const Operator& v, double r,
                          MaybeShots shots) {
  check_pair(u, v);
  const int m = u.spec.modes, N = u.spec.cutoff;
  if (m == 1) return le_tmss_cost(u, v, r, shots);

  Ket psi = tmss(r, m, N);
  std::vector<int> amodes(m);
  for (int j = 0; j < m; ++j) amodes[j] = j;
  Operator w(u.spec, u.mat * v.mat.adjoint());
  Ket phi = apply_to_modes(psi, w, amodes);

  Ket pair_ref = tmss(r, 1, N);
  double acc = 0.0;
  for (int j = 0; j < m; ++j) {
    DensityMatrix rho = partial_trace(phi, {j, m + j});
    double pr = (pair_ref.amps.adjoint() * rho.mat * pair_ref.amps)(0).real();
    acc += shot(pr, shots);
  }
  return 1.0 - acc / m;
}

double le_tmss_local_via_fidelity(const Operator& u, const Operator& v, double r) {
  check_pair(u, v);
  const int m = u.spec.modes, N = u.spec.cutoff;
  if (m > 2) throw unsupported_size("le_tmss_local_via_fidelity: supports m <= 2");
  if (m == 1) {
    // no environment: F = |sum_n c_n^2 W_nn|^2, i.e. the global cost
    return le_tmss_cost(u, v, r);
  }
  const VectorXd c2 = tmss_schmidt_sq(r, N);        // squared Schmidt coefficients
  const VectorXd sigma = tmss_schmidt_sq(r, N);     // thermal weights, same spectrum
  MatrixXcd wmat = u.mat * v.mat.adjoint();

  double acc = 0.0;
  for (int j = 0; j < 2; ++j) {
    // channel on mode j, thermal environment on the other mode;
    // F_j = sum_{e,b} sigma_b |G_{eb}|^2, G_{eb} = sum_n c_n^2 W_{(n,e),(n,b)}
    // with (x,y) flattened as x*N+y for j=0 and y*N+x for j=1.
    double fj = 0.0;
    for (int e = 0; e < N; ++e)
      for (int b = 0; b < N; ++b) {
        Complex g = 0.0;
        for (int n = 0; n < N; ++n) {
          long long row = (j == 0) ? (long long)n * N + e : (long long)e * N + n;
          long long col = (j == 0) ? (long long)n * N + b : (long long)b * N + n;
          g += c2(n) * wmat(row, col);
        }
        fj += sigma(b) * std::norm(g);
      }
    acc += fj;
  }
  return 1.0 - acc / 2.0;
}

double acs_cost(const Operator& u, const Operator& v, const TrainingSet& training,
                MaybeShots shots) {
  check_pair(u, v);
  if (training.size() == 0) throw std::invalid_argument("acs_cost: empty training set");
  if (training.kind != TrainingKind::Coherent)
    throw std::invalid_argument("acs_cost: training kind must be coherent");
  double acc = 0.0;
  for (const Ket& s : training.states) {
    if (s.spec != u.spec) throw std::invalid_argument("acs_cost: state/operator spec mismatch");
    VectorXcd us = u.mat * s.amps;
    VectorXcd vs = v.mat * s.amps;
    acc += shot(std::norm(vs.dot(us)), shots);
  }
  return 1.0 - acc / training.size();
}

double acs_local_cost(const Operator& u, const Operator& v, const TrainingSet& training,
                      MaybeShots shots) {
  check_pair(u, v);
  if (training.size() == 0) throw std::invalid_argument("acs_local_cost: empty training set");
  if (training.kind != TrainingKind::Coherent)
    throw std::invalid_argument("acs_local_cost: training kind must be coherent");
  const int m = u.spec.modes, N = u.spec.cutoff;
  double acc = 0.0;
  for (int j = 0; j < training.size(); ++j) {
    const Ket& s = training.states[size_t(j)];
    Ket phi(u.spec, v.mat.adjoint() * (u.mat * s.amps));
    double term = 0.0;
    for (int mode = 0; mode < m; ++mode) {
      VectorXcd bra = coherent_state(training.alphas[size_t(j)](mode), N).amps;
      // contract mode with <alpha_mode|: norm^2 of the remaining vector
      long long before = 1;
      for (int b = 0; b < mode; ++b) before *= N;
      const long long after = u.spec.dim() / (before * N);
      double p = 0.0;
      for (long long x = 0; x < before; ++x)
        for (long long z = 0; z < after; ++z) {
          Complex amp = 0.0;
          for (int n = 0; n < N; ++n)
            amp += std::conj(bra(n)) * phi.amps((x * N + n) * after + z);
          p += std::norm(amp);
        }
      term += shot(p, shots);
    }
    acc += term / m;
  }
  return 1.0 - acc / training.size();
}

double ecfs_cost(const Operator& u, const Operator& v, const TrainingSet& training,
                 MaybeShots shots) {
  check_pair(u, v);
  if (training.size() == 0) throw std::invalid_argument("ecfs_cost: empty training set");
  if (training.kind != TrainingKind::EntangledCoherentFock)
    throw std::invalid_argument("ecfs_cost: training kind must be entangled-coherent-fock");
  const int m = u.spec.modes;
  Operator w(u.spec, v.mat.adjoint() * u.mat);
  std::vector<int> sysmodes(m);
  for (int j = 0; j < m; ++j) sysmodes[j] = j;
  double acc = 0.0;
  for (const Ket& s : training.states) {
    if (s.spec.modes != m + 1 || s.spec.cutoff != u.spec.cutoff)
      throw std::invalid_argument("ecfs_cost: training state is not m system modes + register");
    Ket ws = apply_to_modes(s, w, sysmodes);
    acc += shot(std::norm(inner_product(s, ws)), shots);
  }
  return 1.0 - acc / training.size();
}

Complex gce_inner_product(const Operator& u, const Operator& v, double r) {
  check_pair(u, v);
  if (r <= 0.0) throw std::invalid_argument("gce_inner_product: r must be > 0");
  const int N = u.spec.cutoff, m = u.spec.modes;
  const double t = std::tanh(r);
  // exact thermal weights (1-t^2)^{m/2} t^{sum of digits}, no renormalization
  VectorXd lam1(N);
  double pref = std::sqrt(1.0 - t * t);
  for (int n = 0; n < N; ++n) lam1(n) = pref * std::pow(t, n);
  VectorXd lam = lam1;
  for (int j = 1; j < m; ++j) {
    VectorXd next(lam.size() * N);
    for (Eigen::Index i = 0; i < lam.size(); ++i)
      for (int n = 0; n < N; ++n) next(i * N + n) = lam(i) * lam1(n);
    lam.swap(next);
  }
  return lam.transpose().cast<Complex>() * (u.mat.cwiseProduct(v.mat.conjugate())) *
         lam.cast<Complex>();
}

}  // namespace cvc
