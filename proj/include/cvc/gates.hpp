#pragma once

#include "cvc/fock.hpp"

namespace cvc {

/// Parameters of one general single-mode layer (displacement amplitude,
/// squeeze amplitude, rotation phase, Kerr strength) plus the beamsplitter
/// angles used by the two-mode layer. Units: hbar*omega = 1.
struct GateParams {
  Complex alpha{0.0, 0.0};
  Complex beta{0.0, 0.0};
  double phi = 0.0;
  double chi = 0.0;
  double theta = 0.0;    // beamsplitter mixing angle
  double bs_phi = 0.0;   // beamsplitter phase
};

/// D(alpha) = exp(alpha a^dag - alpha* a), truncated generator exponentiated.
Operator displacement(Complex alpha, int cutoff);

/// S(z) = exp((z* a^2 - z a^dag^2)/2); real z = r is the standard squeezer.
Operator squeeze(Complex z, int cutoff);

/// R(phi) = diag(e^{+i phi n}).  Sign convention: +i phi n.
Operator rotation(double phi, int cutoff);

/// Kerr gate diag(e^{-i chi n^2}).
Operator kerr(double chi, int cutoff);

/// Two-mode beamsplitter exp(theta (a b^dag e^{i phi} - a^dag b e^{-i phi})),
/// built block-wise over total-photon-number sectors (it commutes with
/// a^dag a + b^dag b, exactly so in the truncated space).
Operator beamsplitter(double theta, double phi, int cutoff);

/// Unitary block of the beamsplitter on the total-photon-number-n sector
/// (basis |na, n-na> for na = max(0, n-cutoff+1) .. min(n, cutoff-1)).
MatrixXcd beamsplitter_block(double theta, double phi, int cutoff, int total_n);

/// General single-mode Gaussian unitary e^{-iH} with
/// H = alpha a + alpha* a^dag + beta a^2 + beta* a^dag^2 + phi a^dag a.
Operator gaussian_unitary(Complex alpha, Complex beta, double phi, int cutoff);

/// The Hermitian generator of gaussian_unitary (exposed for tests).
Operator gaussian_generator(Complex alpha, Complex beta, double phi, int cutoff);

}  // namespace cvc
