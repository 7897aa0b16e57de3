#pragma once

#include <vector>

#include "cvc/fock.hpp"
#include "cvc/rng.hpp"

namespace cvc {

/// Fock basis state |n> on one mode.
Ket fock_state(int n, int cutoff);

/// Coherent state |alpha>, renormalized to unit norm after truncation.
/// Emits a warning on stderr when the truncated tail mass exceeds 1e-6
/// (|alpha|^2 <= cutoff/4 keeps it far below that).
Ket coherent_state(Complex alpha, int cutoff);

/// Product coherent state over m modes.
Ket coherent_state_multimode(const VectorXcd& alphas, int cutoff);

/// 2m-mode two-mode-squeezed state, pairs (A_j, B_j) = modes (j, m+j),
/// Schmidt coefficients per pair proportional to tanh(r)^n, truncated and
/// renormalized.
Ket tmss(double r, int m, int cutoff);

/// Per-pair squared Schmidt coefficients of the truncated, renormalized TMSS.
VectorXd tmss_schmidt_sq(double r, int cutoff);

/// Same state prepared through gates: squeeze(-r) on A_j, squeeze(r) on B_j,
/// then a 50:50 beamsplitter on each pair.
Ket tmss_via_circuit(double r, int m, int cutoff);

/// Rank-truncated two-mode squeezed state on a pair space of `rank` levels,
/// normalized by the closed-form prefactor sqrt((1-tanh^2 r)/(1-tanh^{2r} r)).
Ket truncated_tmss(double r, int rank);

/// Entangled coherent-Fock state on m system modes plus one register mode:
/// (1/sqrt(rank)) sum_k |w_k> (x) |k>, register Fock levels k = 1..rank.
/// `means` is m x rank, column k the coherent amplitudes of |w_k>.
/// Throws degenerate_input if the mean vectors are linearly dependent
/// over R^{2m}; std::invalid_argument if rank >= cutoff.
Ket entangled_coherent_fock(const MatrixXcd& means, int cutoff);

/// Thermal state (1/cosh^2 r) sum tanh^{2n} r |n><n|, renormalized.
DensityMatrix thermal_state(double r, int cutoff);

enum class TrainingKind { Coherent, EntangledCoherentFock };

/// Training data for the averaged-state costs.  For Coherent, states[j] is
/// the m-mode coherent state with amplitudes alphas[j].  For
/// EntangledCoherentFock, states[j] is built from mean_sets[j] (m x rank).
struct TrainingSet {
  TrainingKind kind = TrainingKind::Coherent;
  int rank = 1;
  double energy_bound = 0.0;
  std::vector<VectorXcd> alphas;      // coherent kind: k entries of length m
  std::vector<MatrixXcd> mean_sets;   // entangled kind: k entries, m x rank
  std::vector<Ket> states;

  int size() const { return int(states.size()); }
};

/// Draw an m-mode amplitude vector uniformly from the ball ||alpha||^2 <= E
/// (rejection sampling); single mode reduces to energy uniform on [0, E] with
/// uniform phase.
VectorXcd sample_coherent_amplitudes(int m, double energy_bound, RngStream& rng);

TrainingSet sample_coherent_training(int m, double energy_bound, int k, int cutoff,
                                     RngStream& rng);

TrainingSet sample_ecfs_training(int m, double energy_bound, int rank, int k,
                                 int cutoff, RngStream& rng);

}  // namespace cvc
