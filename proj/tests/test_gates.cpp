#include <doctest.h>

#include "cvc/gates.hpp"
#include "cvc/states.hpp"
#include "cvc/trainer.hpp"
#include "oracles.hpp"

using namespace cvc;

namespace {

double unitarity_defect(const MatrixXcd& u) {
  return (u.adjoint() * u - MatrixXcd::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff();
}

Operator expm_generator_route(const MatrixXcd& h, int modes, int cutoff) {
  return matrix_exponential_unitary(Operator(HilbertSpec(cutoff, modes), h));
}

}  // namespace

TEST_CASE("displacement") {
  SUBCASE("alpha = 0 is the identity") {
    CHECK((displacement(0.0, 12).mat - MatrixXcd::Identity(12, 12)).cwiseAbs().maxCoeff() <
          1e-14);
  }
  SUBCASE("matches exponentiating the truncated generator directly") {
    const int n = 18;
    const Complex alpha(0.37, -0.62);
    MatrixXcd a = ladder_operator(n).mat;
    MatrixXcd h = kI * (alpha * a.adjoint() - std::conj(alpha) * a);
    Operator direct = expm_generator_route(h, 1, n);
    CHECK((displacement(alpha, n).mat - direct.mat).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("D(alpha)|0> is the coherent state up to the truncation tail") {
    const int n = 50;
    for (Complex alpha : {Complex(1.0, 0.0), Complex(0.3, -0.8)}) {
      VectorXcd from_gate = displacement(alpha, n).mat.col(0);
      VectorXcd ref = oracles::coherent_amplitudes(alpha, n);
      CHECK((from_gate - ref).norm() < 1e-10);
      Ket coh = coherent_state(alpha, n);
      CHECK(std::abs(std::abs(coh.amps.dot(from_gate)) - 1.0) < 1e-10);
    }
  }
  SUBCASE("group inverse on the low-lying subspace") {
    const int n = 48, k = n / 4;
    Complex alpha(0.9, 0.4);
    MatrixXcd prod = displacement(alpha, n).mat * displacement(-alpha, n).mat;
    CHECK((prod.topLeftCorner(k, k) - MatrixXcd::Identity(k, k)).cwiseAbs().maxCoeff() <
          1e-8);
  }
}

TEST_CASE("squeeze") {
  SUBCASE("z = 0 is the identity") {
    CHECK((squeeze(0.0, 10).mat - MatrixXcd::Identity(10, 10)).cwiseAbs().maxCoeff() < 1e-14);
  }
  SUBCASE("S(r)^dag = S(-r)") {
    const int n = 24;
    Operator s = squeeze(Complex(0.8, 0.0), n);
    Operator sm = squeeze(Complex(-0.8, 0.0), n);
    CHECK((s.mat.adjoint() - sm.mat).cwiseAbs().maxCoeff() < 1e-10);
  }
  SUBCASE("matches exponentiating the truncated generator, complex z") {
    const int n = 16;
    const Complex z(0.45, 0.3);
    MatrixXcd a = ladder_operator(n).mat;
    MatrixXcd a2 = a * a;
    MatrixXcd h = kI * (std::conj(z) * a2 - z * a2.adjoint()) / 2.0;
    Operator direct = expm_generator_route(h, 1, n);
    CHECK((squeeze(z, n).mat - direct.mat).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("squeezed vacuum amplitudes against the closed form") {
    // the closed form is the infinite-cutoff state; the truncated gate can
    // only match it up to the mass the closed form leaves beyond the cutoff
    const int n = 50;
    for (double r : {0.3, 0.7, 1.0}) {
      VectorXcd col = squeeze(Complex(r, 0.0), n).mat.col(0);
      VectorXcd ref = oracles::squeezed_vacuum(r, n);
      const double tail = std::sqrt(std::max(0.0, 1.0 - ref.squaredNorm()));
      CHECK((col - ref).norm() < 3.0 * tail + 1e-9);
      CHECK(std::abs(col(0).real() - 1.0 / std::sqrt(std::cosh(r))) <
            3.0 * tail + 1e-9);
    }
  }
}

TEST_CASE("rotation and Kerr are exact diagonals") {
  const int n = 9;
  Operator r = rotation(0.37, n);
  Operator k = kerr(0.81, n);
  for (int i = 0; i < n; ++i) {
    CHECK(std::abs(r.mat(i, i) - std::exp(Complex(0.0, 0.37 * i))) < 1e-15);
    CHECK(std::abs(k.mat(i, i) - std::exp(Complex(0.0, -0.81 * i * i))) < 1e-15);
  }
  CHECK((rotation(0.0, n).mat - MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((rotation(2.0 * M_PI, n).mat - MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff() <
        1e-12);
  CHECK((kerr(0.0, n).mat - MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((kerr(2.0 * M_PI, n).mat - MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(unitarity_defect(r.mat) < 1e-15);
  CHECK(unitarity_defect(k.mat) < 1e-15);
}

TEST_CASE("beamsplitter") {
  SUBCASE("theta = 0 is the identity") {
    CHECK((beamsplitter(0.0, 0.3, 6).mat - MatrixXcd::Identity(36, 36)).cwiseAbs().maxCoeff() <
          1e-14);
  }
  SUBCASE("matches exponentiating the dense two-mode generator") {
    const int n = 10;
    const double theta = 0.73, phi = 1.21;
    MatrixXcd a = ladder_operator(n).mat;
    MatrixXcd eye = MatrixXcd::Identity(n, n);
    MatrixXcd amode = kron(a, eye);
    MatrixXcd bmode = kron(eye, a);
    MatrixXcd gen = theta * (amode * bmode.adjoint() * std::exp(kI * phi) -
                             amode.adjoint() * bmode * std::exp(-kI * phi));
    Operator direct = expm_generator_route(kI * gen, 2, n);
    CHECK((beamsplitter(theta, phi, n).mat - direct.mat).cwiseAbs().maxCoeff() < 1e-10);
  }
  SUBCASE("commutes with the total number operator and is exactly unitary") {
    const int n = 8;
    Operator bs = beamsplitter(1.1, 0.4, n);
    MatrixXcd ntot = MatrixXcd::Zero(n * n, n * n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) ntot(i * n + j, i * n + j) = double(i + j);
    CHECK((bs.mat * ntot - ntot * bs.mat).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(unitarity_defect(bs.mat) < 1e-12);
  }
  SUBCASE("theta = pi/4, phi = 0 entangles oppositely squeezed vacua into a TMSS") {
    // covered end to end in the states suite; here just pin the generator sign
    const int n = 12;
    Operator bs = beamsplitter(M_PI / 4.0, 0.0, n);
    MatrixXcd a = ladder_operator(n).mat;
    MatrixXcd eye = MatrixXcd::Identity(n, n);
    MatrixXcd gen = kron(a, eye) * kron(eye, a).adjoint() - kron(a, eye).adjoint() * kron(eye, a);
    Operator direct = expm_generator_route(kI * (M_PI / 4.0) * gen, 2, n);
    CHECK((bs.mat - direct.mat).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("gaussian unitary") {
  SUBCASE("alpha = beta = 0 rotates with phase -phi") {
    const int n = 14;
    const double phi = 0.9;
    Operator u = gaussian_unitary(0.0, 0.0, phi, n);
    for (int k = 0; k < n; ++k)
      CHECK(std::abs(u.mat(k, k) - std::exp(Complex(0.0, -phi * k))) < 1e-12);
  }
  SUBCASE("beta = 0, phi = 0, real alpha reduces to a displacement") {
    const int n = 48, k = n / 4;
    const double alpha = 0.6;
    Operator u = gaussian_unitary(alpha, 0.0, 0.0, n);
    Operator d = displacement(Complex(0.0, -alpha), n);
    CHECK((u.mat.topLeftCorner(k, k) - d.mat.topLeftCorner(k, k)).cwiseAbs().maxCoeff() <
          1e-8);
  }
  SUBCASE("arbitrary parameters: isometric on the low-lying quarter") {
    const int n = 50, k = n / 4;
    Operator u = gaussian_unitary(Complex(0.7, 0.2), Complex(0.4, -0.6), 1.3, n);
    MatrixXcd gram = u.mat.leftCols(k).adjoint() * u.mat.leftCols(k);
    CHECK((gram - MatrixXcd::Identity(k, k)).cwiseAbs().maxCoeff() < 1e-8);
  }
  SUBCASE("beta = 0 factorization cross-check: e^{-iH} = D(nu) R(-phi) D(nu)^dag") {
    // H = alpha a + alpha* a^dag + phi n is a displaced rotation generator,
    // displaced by nu with phi*nu = -alpha* (frame where H is diagonal);
    // compared up to global phase on the low-lying subspace.
    const int n = 48, k = n / 4;
    const Complex alpha(0.4, -0.3);
    const double phi = 1.7;
    const Complex nu = -std::conj(alpha) / phi;
    Operator u = gaussian_unitary(alpha, 0.0, phi, n);
    MatrixXcd fact = displacement(nu, n).mat * rotation(-phi, n).mat *
                     displacement(-nu, n).mat;
    Complex phase = u.mat(0, 0) / fact(0, 0);
    CHECK(std::abs(std::abs(phase) - 1.0) < 1e-6);
    CHECK((u.mat.topLeftCorner(k, k) - phase * fact.topLeftCorner(k, k))
              .cwiseAbs()
              .maxCoeff() < 1e-6);
  }
}

TEST_CASE("number-conserving gates are exactly unitary, others low-lying isometric") {
  const int n = 40, k = n / 4;
  CHECK(unitarity_defect(rotation(1.1, n).mat) < 1e-12);
  CHECK(unitarity_defect(kerr(0.7, n).mat) < 1e-12);
  CHECK(unitarity_defect(beamsplitter(0.9, 0.2, 8).mat) < 1e-12);
  for (const Operator& u : {displacement(Complex(0.9, 0.2), n),
                            squeeze(Complex(0.5, 0.8), n),
                            gaussian_unitary(Complex(1.0, 0.0), Complex(0.0, 1.0), 0.4, n)}) {
    MatrixXcd gram = u.mat.leftCols(k).adjoint() * u.mat.leftCols(k);
    CHECK((gram - MatrixXcd::Identity(k, k)).cwiseAbs().maxCoeff() < 1e-8);
  }
}
