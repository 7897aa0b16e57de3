#pragma once

#include <optional>

#include "cvc/states.hpp"

namespace cvc {

enum class CostKind {
  Hst,
  LeTmss,
  RTmss,
  RTmssNormalized,
  LeTmssLocal,
  Acs,
  AcsLocal,
  Ecfs,
};

/// Optional shot-noise layer: every measured probability p is replaced by a
/// binomial(shots, p)/shots draw. Costs are exact when absent.
struct ShotModel {
  long long shots = 0;
  RngStream* rng = nullptr;

  double sample(double p) const;
};

using MaybeShots = const ShotModel*;

/// Truncated Hilbert-Schmidt test diagnostic:
/// 1 - |Tr(P_d V^dag U P_d)|^2 / d^{2m}, P_d keeping levels 0..d-1 per mode.
double hst_truncated(const Operator& u, const Operator& v, int d);

/// Loschmidt-echo TMSS cost 1 - |<psi_TMSS| U V^dag (x) I |psi_TMSS>|^2.
/// Evaluated through the Schmidt weights of the truncated, renormalized TMSS
/// (identical to building the 2m-mode state; see tests).
double le_tmss_cost(const Operator& u, const Operator& v, double r,
                    MaybeShots shots = nullptr);

/// Ricocheted TMSS cost 1 - |<psi| U_A (x) V*_B |psi>|^2.
double r_tmss_cost(const Operator& u, const Operator& v, double r,
                   MaybeShots shots = nullptr);

/// Normalized ricocheted cost; faithful. Throws degenerate_input when a
/// normalizer falls below 1e-14.
double r_tmss_normalized(const Operator& u, const Operator& v, double r);

/// Local TMSS cost 1 - (1/m) sum_j Pr(00)_{A_j B_j}, computed from the
/// marginals of (U V^dag (x) I)|psi_TMSS> on each pair.
double le_tmss_local_cost(const Operator& u, const Operator& v, double r,
                          MaybeShots shots = nullptr);

/// Independent oracle for the local cost: 1 - (1/m) sum_j F_j with F_j the
/// entanglement fidelity of the thermal-embedded single-pair channel.
/// Supports m <= 2 (throws unsupported_size beyond).
double le_tmss_local_via_fidelity(const Operator& u, const Operator& v, double r);

/// Averaged coherent-state cost 1 - (1/k) sum_j |<a_j|V^dag U|a_j>|^2.
double acs_cost(const Operator& u, const Operator& v, const TrainingSet& training,
                MaybeShots shots = nullptr);

/// Local ACS cost with per-mode coherent projectors.
double acs_local_cost(const Operator& u, const Operator& v, const TrainingSet& training,
                      MaybeShots shots = nullptr);

/// Entangled coherent-Fock cost 1 - (1/k) sum_j |<psi_j|(V^dag U (x) I)|psi_j>|^2.
double ecfs_cost(const Operator& u, const Operator& v, const TrainingSet& training,
                 MaybeShots shots = nullptr);

/// Generalized thermal inner product Tr[sqrt(rho_b)^m U sqrt(rho_b)^m V^dag]
/// computed directly from thermal weights (no truncation renormalization).
Complex gce_inner_product(const Operator& u, const Operator& v, double r);

/// <psi_TMSS| X_A (x) Y_B |psi_TMSS> via Schmidt weights (exposed for tests).
Complex tmss_sandwich(const Operator& x, const Operator& y, double r);

}  // namespace cvc
