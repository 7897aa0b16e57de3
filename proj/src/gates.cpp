#include "cvc/gates.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace cvc {

namespace {

struct HermitianBasis {
  MatrixXcd vecs;
  VectorXd vals;
};

// One-time eigendecompositions of the fixed unit-amplitude generators.
// D(alpha) = R(arg a) e^{-i|a| H_D} R(-arg a) and
// S(z)     = R(arg z / 2) e^{-i|z| H_S} R(-arg z / 2)
// hold exactly in the truncated space (the ladder operators transform
// covariantly under the diagonal rotation), so these paths agree with
// exponentiating the truncated generator directly.
const HermitianBasis& unit_generator_basis(int cutoff, bool squeeze_kind) {
  static std::mutex mu;
  static std::map<std::pair<int, bool>, HermitianBasis> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_pair(cutoff, squeeze_kind);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;

  const Operator a = ladder_operator(cutoff);
  MatrixXcd h;
  if (squeeze_kind) {
    MatrixXcd a2 = a.mat * a.mat;
    h = kI * (a2 - a2.adjoint()) / 2.0;
  } else {
    h = kI * (a.mat.adjoint() - a.mat);
  }
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(h);
  HermitianBasis basis{es.eigenvectors(), es.eigenvalues()};
  return cache.emplace(key, std::move(basis)).first->second;
}

Operator phase_conjugated_exponential(double amplitude, double phase, int cutoff,
                                      bool squeeze_kind) {
  const HermitianBasis& basis = unit_generator_basis(cutoff, squeeze_kind);
  VectorXcd expv(cutoff);
  for (int k = 0; k < cutoff; ++k)
    expv(k) = std::exp(Complex(0.0, -amplitude * basis.vals(k)));
  MatrixXcd u = basis.vecs * expv.asDiagonal() * basis.vecs.adjoint();
  if (phase != 0.0) {
    VectorXcd rot(cutoff);
    for (int n = 0; n < cutoff; ++n) rot(n) = std::exp(Complex(0.0, phase * n));
    u = rot.asDiagonal() * u * rot.conjugate().asDiagonal();
  }
  return Operator(HilbertSpec(cutoff, 1), std::move(u));
}

}  // namespace

Operator displacement(Complex alpha, int cutoff) {
  // e^{alpha a^dag - alpha* a} = e^{-iH}, H = i(alpha a^dag - alpha* a)
  return phase_conjugated_exponential(std::abs(alpha), std::arg(alpha), cutoff, false);
}

Operator squeeze(Complex z, int cutoff) {
  // e^{(z* a^2 - z a^dag^2)/2}
  return phase_conjugated_exponential(std::abs(z), std::arg(z) / 2.0, cutoff, true);
}

Operator rotation(double phi, int cutoff) {
  MatrixXcd u = MatrixXcd::Zero(cutoff, cutoff);
  for (int n = 0; n < cutoff; ++n) u(n, n) = std::exp(Complex(0.0, phi * n));
  return Operator(HilbertSpec(cutoff, 1), std::move(u));
}

Operator kerr(double chi, int cutoff) {
  MatrixXcd u = MatrixXcd::Zero(cutoff, cutoff);
  for (int n = 0; n < cutoff; ++n) u(n, n) = std::exp(Complex(0.0, -chi * double(n) * double(n)));
  return Operator(HilbertSpec(cutoff, 1), std::move(u));
}

MatrixXcd beamsplitter_block(double theta, double phi, int cutoff, int total_n) {
  const int N = cutoff;
  const int n = total_n;
  const int lo = std::max(0, n - (N - 1));
  const int hi = std::min(n, N - 1);
  const int dim = hi - lo + 1;
  const Complex eip = std::exp(Complex(0.0, phi));
  MatrixXcd h = MatrixXcd::Zero(dim, dim);
  // H = i theta (a b^dag e^{i phi} - a^dag b e^{-i phi}); a b^dag maps
  // |na, nb> -> sqrt(na (nb+1)) |na-1, nb+1>.
  for (int na = lo + 1; na <= hi; ++na) {
    const int nb = n - na;
    if (nb + 1 > N - 1) continue;  // truncated away
    const double amp = std::sqrt(double(na) * double(nb + 1));
    h(na - 1 - lo, na - lo) += kI * theta * amp * eip;
    h(na - lo, na - 1 - lo) += -kI * theta * amp * std::conj(eip);
  }
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(h);
  VectorXcd ph(dim);
  for (int k = 0; k < dim; ++k) ph(k) = std::exp(Complex(0.0, -es.eigenvalues()(k)));
  return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

Operator beamsplitter(double theta, double phi, int cutoff) {
  const int N = cutoff;
  const HilbertSpec spec(N, 2);
  MatrixXcd u = MatrixXcd::Zero(N * N, N * N);
  for (int n = 0; n <= 2 * (N - 1); ++n) {
    const int lo = std::max(0, n - (N - 1));
    MatrixXcd ublock = beamsplitter_block(theta, phi, N, n);
    const int dim = int(ublock.rows());
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j)
        u((lo + i) * N + (n - lo - i), (lo + j) * N + (n - lo - j)) = ublock(i, j);
  }
  return Operator(spec, std::move(u));
}

Operator gaussian_generator(Complex alpha, Complex beta, double phi, int cutoff) {
  const Operator a = ladder_operator(cutoff);
  MatrixXcd a2 = a.mat * a.mat;
  MatrixXcd h = alpha * a.mat + std::conj(alpha) * a.mat.adjoint() + beta * a2 +
                std::conj(beta) * a2.adjoint() + phi * (a.mat.adjoint() * a.mat);
  return Operator(a.spec, std::move(h));
}

Operator gaussian_unitary(Complex alpha, Complex beta, double phi, int cutoff) {
  return matrix_exponential_unitary(gaussian_generator(alpha, beta, phi, cutoff));
}

}  // namespace cvc
