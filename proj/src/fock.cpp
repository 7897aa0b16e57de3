#include "cvc/fock.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace cvc {

Operator ladder_operator(int cutoff) {
  if (cutoff < 2) throw std::invalid_argument("ladder_operator: cutoff must be >= 2");
  MatrixXcd a = MatrixXcd::Zero(cutoff, cutoff);
  for (int n = 1; n < cutoff; ++n) a(n - 1, n) = std::sqrt(double(n));
  return Operator(HilbertSpec(cutoff, 1), std::move(a));
}

Operator number_operator(int cutoff) {
  MatrixXcd n = MatrixXcd::Zero(cutoff, cutoff);
  for (int k = 0; k < cutoff; ++k) n(k, k) = double(k);
  return Operator(HilbertSpec(cutoff, 1), std::move(n));
}

Operator matrix_exponential_unitary(const Operator& h) {
  double herm = (h.mat - h.mat.adjoint()).cwiseAbs().maxCoeff();
  if (herm > 1e-10)
    throw std::invalid_argument("matrix_exponential_unitary: input not Hermitian (max dev " +
                                std::to_string(herm) + ")");
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(h.mat);
  const VectorXd& lam = es.eigenvalues();
  VectorXcd phase(lam.size());
  for (Eigen::Index k = 0; k < lam.size(); ++k)
    phase(k) = std::exp(Complex(0.0, -lam(k)));
  MatrixXcd u = es.eigenvectors() * phase.asDiagonal() * es.eigenvectors().adjoint();
  return Operator(h.spec, std::move(u));
}

namespace {

// Offsets of the target-mode multi-index (gate ordering) and of the rest
// multi-index into the flat state vector.
struct ContractionPlan {
  std::vector<long long> target_offsets;  // N^g entries
  std::vector<long long> rest_offsets;    // N^{k-g} entries
};

ContractionPlan make_plan(const HilbertSpec& spec, const std::vector<int>& targets) {
  const int k = spec.modes;
  const int N = spec.cutoff;
  const int g = int(targets.size());

  std::vector<char> is_target(k, 0);
  for (int t : targets) {
    if (t < 0 || t >= k) throw std::invalid_argument("apply_to_modes: target out of range");
    if (is_target[t]) throw std::invalid_argument("apply_to_modes: duplicate target mode");
    is_target[t] = 1;
  }

  std::vector<long long> stride(k);
  long long s = 1;
  for (int j = k - 1; j >= 0; --j) {
    stride[j] = s;
    s *= N;
  }

  ContractionPlan plan;
  long long tdim = 1;
  for (int i = 0; i < g; ++i) tdim *= N;
  plan.target_offsets.assign(tdim, 0);
  for (long long idx = 0; idx < tdim; ++idx) {
    long long rem = idx, off = 0;
    for (int i = g - 1; i >= 0; --i) {
      off += (rem % N) * stride[targets[i]];
      rem /= N;
    }
    plan.target_offsets[idx] = off;
  }

  long long rdim = 1;
  for (int j = 0; j < k; ++j)
    if (!is_target[j]) rdim *= N;
  plan.rest_offsets.assign(rdim, 0);
  std::vector<int> rest_modes;
  for (int j = 0; j < k; ++j)
    if (!is_target[j]) rest_modes.push_back(j);
  for (long long idx = 0; idx < rdim; ++idx) {
    long long rem = idx, off = 0;
    for (int i = int(rest_modes.size()) - 1; i >= 0; --i) {
      off += (rem % N) * stride[rest_modes[i]];
      rem /= N;
    }
    plan.rest_offsets[idx] = off;
  }
  return plan;
}

}  // namespace

Ket apply_to_modes(const Ket& state, const Operator& gate,
                   const std::vector<int>& targets) {
  const int N = state.spec.cutoff;
  if (gate.spec.cutoff != N)
    throw std::invalid_argument("apply_to_modes: cutoff mismatch");
  if (gate.spec.modes != int(targets.size()))
    throw std::invalid_argument("apply_to_modes: gate modes != number of targets");

  // Fast path: gate on the leading modes in order is a plain reshape-matmul.
  bool leading = true;
  for (size_t i = 0; i < targets.size(); ++i)
    if (targets[i] != int(i)) { leading = false; break; }
  const long long tdim = gate.spec.dim();
  const long long rdim = state.spec.dim() / tdim;
  if (leading) {
    using Eigen::Map;
    using RowMat = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    Map<const RowMat> in(state.amps.data(), tdim, rdim);
    VectorXcd out(state.amps.size());
    Map<RowMat>(out.data(), tdim, rdim).noalias() = gate.mat * in;
    return Ket(state.spec, std::move(out));
  }

  ContractionPlan plan = make_plan(state.spec, targets);
  VectorXcd out = VectorXcd::Zero(state.amps.size());
  VectorXcd slice(tdim);
  for (long long r : plan.rest_offsets) {
    for (long long a = 0; a < tdim; ++a) slice(a) = state.amps(plan.target_offsets[a] + r);
    VectorXcd res = gate.mat * slice;
    for (long long a = 0; a < tdim; ++a) out(plan.target_offsets[a] + r) = res(a);
  }
  return Ket(state.spec, std::move(out));
}

Complex inner_product(const Ket& a, const Ket& b) {
  if (a.spec != b.spec) throw std::invalid_argument("inner_product: HilbertSpec mismatch");
  return a.amps.dot(b.amps);  // Eigen dot conjugates the first argument
}

namespace {

DensityMatrix partial_trace_impl(const HilbertSpec& spec,
                                 const std::vector<int>& keep,
                                 const std::function<Complex(long long, long long)>& elem) {
  if (keep.empty()) throw std::invalid_argument("partial_trace: keep set empty");
  ContractionPlan plan = make_plan(spec, keep);  // validates keep
  const long long kdim = plan.target_offsets.size();
  MatrixXcd rho = MatrixXcd::Zero(kdim, kdim);
  for (long long r : plan.rest_offsets)
    for (long long i = 0; i < kdim; ++i)
      for (long long j = 0; j < kdim; ++j)
        rho(i, j) += elem(plan.target_offsets[i] + r, plan.target_offsets[j] + r);
  // enforce exact Hermiticity against accumulation roundoff
  rho = ((rho + rho.adjoint()) / 2.0).eval();
  return DensityMatrix(HilbertSpec(spec.cutoff, int(keep.size())), std::move(rho));
}

}  // namespace

DensityMatrix partial_trace(const Ket& state, const std::vector<int>& keep) {
  if (keep.empty()) throw std::invalid_argument("partial_trace: keep set empty");
  // rho(i,j) = sum_rest psi(i,rest) conj(psi(j,rest)); gather slices once.
  ContractionPlan plan = make_plan(state.spec, keep);
  const long long kdim = plan.target_offsets.size();
  MatrixXcd slices(kdim, plan.rest_offsets.size());
  for (size_t c = 0; c < plan.rest_offsets.size(); ++c)
    for (long long i = 0; i < kdim; ++i)
      slices(i, long(c)) = state.amps(plan.target_offsets[i] + plan.rest_offsets[c]);
  MatrixXcd rho = slices * slices.adjoint();
  rho = ((rho + rho.adjoint()) / 2.0).eval();
  return DensityMatrix(HilbertSpec(state.spec.cutoff, int(keep.size())), std::move(rho));
}

DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<int>& keep) {
  return partial_trace_impl(rho.spec, keep,
                            [&rho](long long i, long long j) { return rho.mat(i, j); });
}

}  // namespace cvc
