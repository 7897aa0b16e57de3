#pragma once

#include <vector>

#include "cvc/common.hpp"

namespace cvc {

/// Pure state on a truncated Fock space. Amplitudes are stored row-major with
/// mode 0 slowest-varying: index(n_0..n_{k-1}) = n_0 N^{k-1} + ... + n_{k-1}.
struct Ket {
  HilbertSpec spec;
  VectorXcd amps;

  Ket() = default;
  Ket(HilbertSpec s, VectorXcd a) : spec(s), amps(std::move(a)) {
    if (amps.size() != spec.dim())
      throw std::invalid_argument("Ket: amplitude length != spec dimension");
  }

  double norm() const { return amps.norm(); }
};

/// Dense operator on k modes of a truncated Fock space (N^k x N^k).
struct Operator {
  HilbertSpec spec;
  MatrixXcd mat;

  Operator() = default;
  Operator(HilbertSpec s, MatrixXcd m) : spec(s), mat(std::move(m)) {
    if (mat.rows() != spec.dim() || mat.cols() != spec.dim())
      throw std::invalid_argument("Operator: matrix shape != spec dimension");
  }

  Operator adjoint() const { return Operator(spec, mat.adjoint()); }
  Operator conjugate() const { return Operator(spec, mat.conjugate()); }
};

/// Mixed state; Hermiticity is checked at construction, positivity in tests.
struct DensityMatrix {
  HilbertSpec spec;
  MatrixXcd mat;

  DensityMatrix() = default;
  DensityMatrix(HilbertSpec s, MatrixXcd m) : spec(s), mat(std::move(m)) {
    if (mat.rows() != spec.dim() || mat.cols() != spec.dim())
      throw std::invalid_argument("DensityMatrix: matrix shape != spec dimension");
    if ((mat - mat.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
      throw std::invalid_argument("DensityMatrix: not Hermitian within 1e-12");
  }

  double trace() const { return mat.trace().real(); }
};

/// Annihilation operator a on one mode: <n-1|a|n> = sqrt(n).
Operator ladder_operator(int cutoff);

/// Number operator a^dag a = diag(0..N-1).
Operator number_operator(int cutoff);

/// e^{-iH} for Hermitian H, by full eigendecomposition. Throws
/// std::invalid_argument if max|H - H^dag| > 1e-10.
Operator matrix_exponential_unitary(const Operator& h);

/// Apply a g-mode gate to the listed modes of a k-mode state by tensor
/// contraction; never forms the N^k x N^k embedding. `targets` gives the
/// state modes matched to gate modes 0..g-1 in order.
Ket apply_to_modes(const Ket& state, const Operator& gate,
                   const std::vector<int>& targets);

/// <a|b>, conjugate-linear in the first argument.
Complex inner_product(const Ket& a, const Ket& b);

/// Marginal density matrix on the kept modes (in the listed order).
DensityMatrix partial_trace(const Ket& state, const std::vector<int>& keep);
DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<int>& keep);

}  // namespace cvc
