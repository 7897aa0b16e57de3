#pragma once

#include <functional>
#include <utility>

#include "cvc/common.hpp"
#include "cvc/rng.hpp"

namespace cvc {

enum class MapKind { Orthogonal, Symplectic };

/// Real 2m x 2m phase-space action of a linear optical (orthogonal) or
/// Gaussian (symplectic) unitary, acting on row vectors w -> w M.
struct PhaseSpaceMap {
  MatrixXd mat;
  MapKind kind = MapKind::Orthogonal;

  int dim() const { return int(mat.rows()); }
};

/// Standard symplectic form, interleaved (q1,p1,...,qm,pm) ordering.
MatrixXd symplectic_form(int dim);

/// Haar-distributed matrix on Orth(k), Gaussian matrix -> QR with R-diagonal
/// sign correction. Works for any k >= 1 (used internally for complements).
MatrixXd haar_orthogonal_matrix(int k, RngStream& rng);

/// Haar sample of the phase-space orthogonal group (dim even, >= 2).
PhaseSpaceMap haar_orthogonal(int dim, RngStream& rng);

/// Haar sample of Orth(2k) ∩ Sp(2k) via the unitary-group embedding.
MatrixXd haar_orthosymplectic_matrix(int dim, RngStream& rng);

/// Haar-distributed complex unitary (Ginibre -> QR with phase correction).
MatrixXcd haar_unitary_matrix(int dim, RngStream& rng);

using ZSampler = std::function<double(RngStream&)>;

/// Default singular-value distribution: log-uniform on [1/2, 2]
/// (symmetric under z -> 1/z).
double log_uniform_z(RngStream& rng);

/// Bloch-Messiah sample O1 Z O2 with O1, O2 Haar orthosymplectic and
/// Z = direct sum of diag(z_j, 1/z_j), z_j ~ z_dist.
PhaseSpaceMap haar_symplectic_bloch_messiah(int dim, const ZSampler& z_dist,
                                            RngStream& rng);

/// Perfect learner in block form: T_S * target^T = I_s ⊕ Y with Y Haar on
/// the complement group (Orth(2m-s), or W1 F W2 for the symplectic kind).
/// For orthogonal targets this equals (I_s ⊕ Y) * target. Symplectic kind
/// requires s even (throws std::invalid_argument otherwise).
PhaseSpaceMap block_perfect_learner(const PhaseSpaceMap& target, int agree_dim,
                                    RngStream& rng,
                                    const ZSampler& z_dist = log_uniform_z);

/// Interpolating learner solved from explicit training row vectors
/// (rows of w_rows): agrees with target on span(w), Haar on the complement.
/// Orthogonal targets only; secondary cross-check of the block construction.
PhaseSpaceMap learner_from_training_vectors(const PhaseSpaceMap& target,
                                            const MatrixXd& w_rows, RngStream& rng);

/// Trace form of the phase-space risk: 1/2 - Tr(T O^T)/(4m).
double risk_closed_form(const PhaseSpaceMap& o, const PhaseSpaceMap& t);

/// Monte Carlo of the defining Gaussian-average risk
/// (1/(8 m sigma)) E_x ||xT - xO||^2, x ~ N(0, sigma I).
double mc_phase_space_risk(const PhaseSpaceMap& o, const PhaseSpaceMap& t,
                           double sigma, long long n_samples, RngStream& rng);

struct RiskEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  double theory = 0.0;
  long long n_samples = 0;
  int m = 0;
  int set_size = 0;
  int rank = 1;
  MapKind kind = MapKind::Orthogonal;
};

/// Samples (target, perfect learner) pairs with agreement dimension
/// rank*set_size and averages the trace-form risk.
/// Theory value: 1/2 - rank*set_size/(4m). Throws if rank*set_size > 2m.
RiskEstimate expected_risk_mc(int m, int set_size, int rank, MapKind kind,
                              long long n_samples, RngStream& rng,
                              const ZSampler& z_dist = log_uniform_z);

/// Monte Carlo covariance risk (1/(m (log D)^m)) ∫ ||T^T S T - O^T S O||_F^2
/// with S = W^T diag(e^{-2r_j}/2, e^{2r_j}/2) W, W Haar orthogonal,
/// r_j uniform on [-log(D)/2, log(D)/2].
double covariance_risk_mc(const MatrixXd& o, const MatrixXd& t, double d_max,
                          int m, long long n_samples, RngStream& rng);

/// Large-m closed form of the expected covariance risk over Haar targets and
/// block learners (the O(m^-2) remainder is excluded):
/// (D^2-D^-2)/(4 log D) (1 - 1/(2(m+1))) - (D-1/D)^2 (s^2+1)/(8 m (log D)^2).
double expected_covariance_risk(int m, int set_size, double d_max);

/// Exact finite-m expectation of the same Monte Carlo quantity, from the
/// degree-2 orthogonal-group moments. Matches covariance_risk_mc to
/// statistical error at every m; see tests.
double expected_covariance_risk_finite(int m, int set_size, double d_max);

/// Closed forms of the degree-2 conjugation moments over Orth(n):
/// E[(e_i^T W^T L W e_i)^2] and E[(e_i^T W^T L W e_j)^2], i != j,
/// for orthogonal L.
double orth_moment_diag(const MatrixXd& l);
double orth_moment_offdiag(const MatrixXd& l);

/// MC estimates of the two moments above (i != j required).
std::pair<double, double> lemma1_mc(const MatrixXd& l, int i, int j,
                                    long long n_samples, RngStream& rng);

}  // namespace cvc
