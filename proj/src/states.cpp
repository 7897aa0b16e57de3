#include "cvc/states.hpp"

#include <cmath>
#include <iostream>

#include "cvc/gates.hpp"

namespace cvc {

Ket fock_state(int n, int cutoff) {
  if (n < 0 || n >= cutoff) throw std::out_of_range("fock_state: n outside 0..cutoff-1");
  VectorXcd v = VectorXcd::Zero(cutoff);
  v(n) = 1.0;
  return Ket(HilbertSpec(cutoff, 1), std::move(v));
}

Ket coherent_state(Complex alpha, int cutoff) {
  VectorXcd v(cutoff);
  // alpha^n / sqrt(n!) built recursively to avoid overflow
  Complex c = 1.0;
  v(0) = c;
  for (int n = 1; n < cutoff; ++n) {
    c *= alpha / std::sqrt(double(n));
    v(n) = c;
  }
  const double nrm = v.norm();
  const double tail = 1.0 - nrm * nrm * std::exp(-std::norm(alpha));
  if (tail > 1e-6)
    std::cerr << "coherent_state: warning, truncated tail mass " << tail
              << " for |alpha|^2 = " << std::norm(alpha) << " at cutoff " << cutoff << "\n";
  v /= nrm;
  return Ket(HilbertSpec(cutoff, 1), std::move(v));
}

Ket coherent_state_multimode(const VectorXcd& alphas, int cutoff) {
  const int m = int(alphas.size());
  HilbertSpec spec(cutoff, m);
  VectorXcd v = VectorXcd::Ones(1);
  for (int j = 0; j < m; ++j) {
    Ket single = coherent_state(alphas(j), cutoff);
    VectorXcd next(v.size() * cutoff);
    for (Eigen::Index i = 0; i < v.size(); ++i)
      for (int n = 0; n < cutoff; ++n) next(i * cutoff + n) = v(i) * single.amps(n);
    v.swap(next);
  }
  return Ket(spec, std::move(v));
}

VectorXd tmss_schmidt_sq(double r, int cutoff) {
  if (r < 0.0) throw std::invalid_argument("tmss: r must be >= 0");
  const double t2 = std::tanh(r) * std::tanh(r);
  VectorXd w(cutoff);
  double x = 1.0;
  for (int n = 0; n < cutoff; ++n) {
    w(n) = x;
    x *= t2;
  }
  w /= w.sum();
  return w;
}

Ket tmss(double r, int m, int cutoff) {
  const HilbertSpec spec(cutoff, 2 * m);
  VectorXd w = tmss_schmidt_sq(r, cutoff);
  VectorXd c = w.cwiseSqrt();
  const long long dimA = HilbertSpec(cutoff, m).dim();
  VectorXcd v = VectorXcd::Zero(spec.dim());
  // psi(a_vec, b_vec) = prod_j c(a_j) delta(a_j, b_j); modes [A_1..A_m, B_1..B_m]
  std::vector<int> digits(m, 0);
  for (long long a = 0; a < dimA; ++a) {
    long long rem = a;
    double amp = 1.0;
    for (int j = m - 1; j >= 0; --j) {
      digits[j] = int(rem % cutoff);
      rem /= cutoff;
      amp *= c(digits[j]);
    }
    v(a * dimA + a) = amp;  // b index = a index, placed after the A block
  }
  return Ket(spec, std::move(v));
}

Ket tmss_via_circuit(double r, int m, int cutoff) {
  // The circuit acts pairwise, so one pair is prepared with cutoff headroom
  // (squeezed vacua shed weight near the truncation edge), projected back to
  // the requested cutoff, and tensored m times.
  const int inner = std::max(3 * cutoff, cutoff + 16);
  HilbertSpec pair_spec(inner, 2);
  VectorXcd v0 = VectorXcd::Zero(pair_spec.dim());
  v0(0) = 1.0;
  Ket pair(pair_spec, std::move(v0));
  pair = apply_to_modes(pair, squeeze(Complex(-r, 0.0), inner), {0});
  pair = apply_to_modes(pair, squeeze(Complex(r, 0.0), inner), {1});
  // 50:50 entangler applied sector by sector (the dense two-mode matrix at
  // the headroom cutoff would be needlessly huge)
  for (int n = 0; n <= 2 * (inner - 1); ++n) {
    const int lo = std::max(0, n - (inner - 1));
    MatrixXcd block = beamsplitter_block(M_PI / 4.0, 0.0, inner, n);
    const int dim = int(block.rows());
    VectorXcd slice(dim);
    for (int i = 0; i < dim; ++i)
      slice(i) = pair.amps(Eigen::Index(lo + i) * inner + (n - lo - i));
    slice = (block * slice).eval();
    for (int i = 0; i < dim; ++i)
      pair.amps(Eigen::Index(lo + i) * inner + (n - lo - i)) = slice(i);
  }

  MatrixXcd pair_proj(cutoff, cutoff);
  for (int a = 0; a < cutoff; ++a)
    for (int b = 0; b < cutoff; ++b)
      pair_proj(a, b) = pair.amps(Eigen::Index(a) * inner + b);
  pair_proj /= pair_proj.norm();

  const HilbertSpec spec(cutoff, 2 * m);
  const long long dim_a = HilbertSpec(cutoff, m).dim();
  VectorXcd v = VectorXcd::Zero(spec.dim());
  std::vector<int> da(m), db(m);
  for (long long a = 0; a < dim_a; ++a) {
    long long rem = a;
    for (int j = m - 1; j >= 0; --j) {
      da[j] = int(rem % cutoff);
      rem /= cutoff;
    }
    for (long long b = 0; b < dim_a; ++b) {
      rem = b;
      for (int j = m - 1; j >= 0; --j) {
        db[j] = int(rem % cutoff);
        rem /= cutoff;
      }
      Complex amp = 1.0;
      for (int j = 0; j < m; ++j) amp *= pair_proj(da[j], db[j]);
      if (amp != Complex(0.0)) v(a * dim_a + b) = amp;
    }
  }
  return Ket(spec, std::move(v));
}

Ket truncated_tmss(double r, int rank) {
  if (rank < 1) throw std::invalid_argument("truncated_tmss: rank must be >= 1");
  if (r < 0.0) throw std::invalid_argument("truncated_tmss: r must be >= 0");
  const int N = std::max(rank, 2);
  const double t = std::tanh(r);
  VectorXcd v = VectorXcd::Zero(HilbertSpec(N, 2).dim());
  double x = 1.0, norm2 = 0.0;
  for (int n = 0; n < rank; ++n) {
    v(n * N + n) = x;
    norm2 += x * x;
    x *= t;  // t == 1.0 at large r collapses to the uniform Bell-like state
  }
  v /= std::sqrt(norm2);
  return Ket(HilbertSpec(N, 2), std::move(v));
}

Ket entangled_coherent_fock(const MatrixXcd& means, int cutoff) {
  const int m = int(means.rows());
  const int rank = int(means.cols());
  if (rank < 1) throw std::invalid_argument("entangled_coherent_fock: rank must be >= 1");
  if (rank >= cutoff)
    throw std::invalid_argument("entangled_coherent_fock: register needs rank < cutoff");

  // linear independence of the rank mean vectors over R^{2m}
  if (rank > 2 * m)
    throw degenerate_input("entangled_coherent_fock: more mean vectors than phase-space dims");
  MatrixXd real_means(2 * m, rank);
  for (int k = 0; k < rank; ++k)
    for (int j = 0; j < m; ++j) {
      real_means(2 * j, k) = means(j, k).real();
      real_means(2 * j + 1, k) = means(j, k).imag();
    }
  Eigen::ColPivHouseholderQR<MatrixXd> qr(real_means);
  qr.setThreshold(1e-10);
  if (qr.rank() < rank)
    throw degenerate_input("entangled_coherent_fock: mean vectors linearly dependent");

  const HilbertSpec spec(cutoff, m + 1);
  VectorXcd v = VectorXcd::Zero(spec.dim());
  const double pref = 1.0 / std::sqrt(double(rank));
  for (int k = 0; k < rank; ++k) {
    Ket sys = coherent_state_multimode(means.col(k), cutoff);
    // register is the last (fastest-varying) mode, Fock level k+1
    for (Eigen::Index i = 0; i < sys.amps.size(); ++i)
      v(i * cutoff + (k + 1)) += pref * sys.amps(i);
  }
  v /= v.norm();  // exact already up to truncation of the |w_k>
  return Ket(spec, std::move(v));
}

DensityMatrix thermal_state(double r, int cutoff) {
  if (r <= 0.0) throw std::invalid_argument("thermal_state: r must be > 0");
  VectorXd w = tmss_schmidt_sq(r, cutoff);
  MatrixXcd rho = MatrixXcd::Zero(cutoff, cutoff);
  for (int n = 0; n < cutoff; ++n) rho(n, n) = w(n);
  return DensityMatrix(HilbertSpec(cutoff, 1), std::move(rho));
}

VectorXcd sample_coherent_amplitudes(int m, double energy_bound, RngStream& rng) {
  const double radius = std::sqrt(energy_bound);
  while (true) {
    VectorXcd a(m);
    double n2 = 0.0;
    for (int j = 0; j < m; ++j) {
      double x = rng.uniform(-radius, radius);
      double y = rng.uniform(-radius, radius);
      a(j) = Complex(x, y);
      n2 += x * x + y * y;
    }
    if (n2 <= energy_bound) return a;
  }
}

TrainingSet sample_coherent_training(int m, double energy_bound, int k, int cutoff,
                                     RngStream& rng) {
  if (k < 1) throw std::invalid_argument("sample_coherent_training: k must be >= 1");
  TrainingSet ts;
  ts.kind = TrainingKind::Coherent;
  ts.rank = 1;
  ts.energy_bound = energy_bound;
  for (int j = 0; j < k; ++j) {
    ts.alphas.push_back(sample_coherent_amplitudes(m, energy_bound, rng));
    ts.states.push_back(coherent_state_multimode(ts.alphas.back(), cutoff));
  }
  return ts;
}

TrainingSet sample_ecfs_training(int m, double energy_bound, int rank, int k,
                                 int cutoff, RngStream& rng) {
  TrainingSet ts;
  ts.kind = TrainingKind::EntangledCoherentFock;
  ts.rank = rank;
  ts.energy_bound = energy_bound;
  for (int j = 0; j < k; ++j) {
    MatrixXcd means(m, rank);
    while (true) {
      for (int c = 0; c < rank; ++c) means.col(c) = sample_coherent_amplitudes(m, energy_bound, rng);
      try {
        ts.states.push_back(entangled_coherent_fock(means, cutoff));
        break;
      } catch (const degenerate_input&) {
        // resample (probability-zero event, but guard anyway)
      }
    }
    ts.mean_sets.push_back(means);
  }
  return ts;
}

}  // namespace cvc
