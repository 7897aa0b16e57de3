#include <doctest.h>

#include "cvc/costs.hpp"
#include "cvc/gates.hpp"
#include "cvc/nfl.hpp"
#include "cvc/trainer.hpp"
#include "oracles.hpp"

using namespace cvc;

namespace {

Operator random_unitary(int dim, int modes, int cutoff, RngStream& rng) {
  return Operator(HilbertSpec(cutoff, modes), haar_unitary_matrix(dim, rng));
}

Operator random_diag_unitary(int cutoff, RngStream& rng) {
  MatrixXcd d = MatrixXcd::Zero(cutoff, cutoff);
  for (int i = 0; i < cutoff; ++i)
    d(i, i) = std::exp(Complex(0.0, rng.uniform(0.0, 2.0 * M_PI)));
  return Operator(HilbertSpec(cutoff, 1), std::move(d));
}

// state-route LE-TMSS cost: build the 2m-mode state explicitly
double le_tmss_state_route(const Operator& u, const Operator& v, double r) {
  const int m = u.spec.modes, n = u.spec.cutoff;
  Ket psi = tmss(r, m, n);
  std::vector<int> amodes(m);
  for (int j = 0; j < m; ++j) amodes[j] = j;
  Operator w(u.spec, u.mat * v.mat.adjoint());
  Ket out = apply_to_modes(psi, w, amodes);
  return 1.0 - std::norm(inner_product(psi, out));
}

}  // namespace

TEST_CASE("truncated HST diagnostic") {
  RngStream rng(5);
  const int n = 12;
  Operator u = random_unitary(n, 1, n, rng);
  SUBCASE("faithful at zero and under a global phase") {
    CHECK(hst_truncated(u, u, n) < 1e-12);
    Operator v(u.spec, std::exp(Complex(0.0, 1.234)) * u.mat);
    CHECK(hst_truncated(u, v, n) < 1e-12);
    CHECK(hst_truncated(u, v, 5) < 1e-12);
  }
  SUBCASE("diagonal pair at d = 4 matches the explicit trace") {
    Operator a = random_diag_unitary(n, rng);
    Operator b = random_diag_unitary(n, rng);
    Complex tr = 0.0;
    for (int i = 0; i < 4; ++i) tr += std::conj(b.mat(i, i)) * a.mat(i, i);
    CHECK(std::abs(hst_truncated(a, b, 4) - (1.0 - std::norm(tr) / 16.0)) < 1e-13);
  }
  SUBCASE("d out of range is rejected") {
    CHECK_THROWS_AS(hst_truncated(u, u, 0), std::invalid_argument);
    CHECK_THROWS_AS(hst_truncated(u, u, n + 1), std::invalid_argument);
  }
}

TEST_CASE("LE-TMSS cost") {
  RngStream rng(17);
  SUBCASE("faithful at V = U") {
    Operator u = random_unitary(16, 1, 16, rng);
    CHECK(le_tmss_cost(u, u, 0.7) < 1e-12);
  }
  SUBCASE("random diagonal pair matches the explicit weight sum") {
    const int n = 5;
    for (double r : {0.3, 1.0}) {
      Operator a = random_diag_unitary(n, rng);
      Operator b = random_diag_unitary(n, rng);
      const double expected = 1.0 - std::norm(oracles::le_tmss_overlap_sum(a.mat, b.mat, r));
      CHECK(std::abs(le_tmss_cost(a, b, r) - expected) < 1e-13);
    }
  }
  SUBCASE("weighted evaluation equals the explicit 2m-mode state route") {
    Operator u1 = random_unitary(12, 1, 12, rng);
    Operator v1 = random_unitary(12, 1, 12, rng);
    CHECK(std::abs(le_tmss_cost(u1, v1, 0.8) - le_tmss_state_route(u1, v1, 0.8)) < 1e-12);

    Operator u2 = random_unitary(36, 2, 6, rng);
    Operator v2 = random_unitary(36, 2, 6, rng);
    CHECK(std::abs(le_tmss_cost(u2, v2, 0.5) - le_tmss_state_route(u2, v2, 0.5)) < 1e-12);
  }
}

TEST_CASE("ricocheted TMSS cost") {
  RngStream rng(23);
  const int n = 10;
  SUBCASE("identity pair") {
    Operator eye(HilbertSpec(n, 1), MatrixXcd::Identity(n, n));
    CHECK(r_tmss_cost(eye, eye, 0.9) < 1e-13);
  }
  SUBCASE("exact ricochet for Fock-diagonal V") {
    Operator u = random_unitary(n, 1, n, rng);
    Operator v = random_diag_unitary(n, rng);
    for (double r : {0.4, 1.1})
      CHECK(std::abs(le_tmss_cost(u, v, r) - r_tmss_cost(u, v, r)) < 1e-10);
  }
  SUBCASE("V = U vanishes only as r grows") {
    Operator u = random_unitary(n, 1, n, rng);
    double prev = 1.0;
    for (double r : {0.5, 1.0, 2.0}) {
      const double c = r_tmss_cost(u, u, r);
      CHECK(c >= -1e-12);
      CHECK(c <= prev + 1e-12);
      prev = c;
    }
  }
}

TEST_CASE("normalized ricocheted cost") {
  RngStream rng(31);
  const int n = 12;
  SUBCASE("faithful both ways under a global phase") {
    Operator u = random_unitary(n, 1, n, rng);
    Operator v(u.spec, std::exp(Complex(0.0, 0.77)) * u.mat);
    CHECK(r_tmss_normalized(u, v, 0.6) < 1e-10);
    Operator eye(HilbertSpec(n, 1), MatrixXcd::Identity(n, n));
    CHECK(r_tmss_normalized(eye, eye, 0.6) < 1e-13);
  }
  SUBCASE("nonnegative by Cauchy-Schwarz") {
    for (int rep = 0; rep < 10; ++rep) {
      Operator u = random_unitary(n, 1, n, rng);
      Operator v = random_unitary(n, 1, n, rng);
      CHECK(r_tmss_normalized(u, v, 0.5) >= -1e-12);
    }
  }
  SUBCASE("vanishing normalizer raises degenerate_input") {
    // operator supported entirely on the far tail of the thermal weights
    MatrixXcd x = MatrixXcd::Zero(40, 40);
    x(39, 39) = 1.0;
    Operator edge(HilbertSpec(40, 1), x);
    CHECK_THROWS_AS(r_tmss_normalized(edge, edge, 0.3), degenerate_input);
  }
}

TEST_CASE("local TMSS cost") {
  RngStream rng(41);
  SUBCASE("m = 1 equals the global cost") {
    Operator u = random_unitary(14, 1, 14, rng);
    Operator v = random_unitary(14, 1, 14, rng);
    CHECK(std::abs(le_tmss_local_cost(u, v, 0.7) - le_tmss_cost(u, v, 0.7)) < 1e-13);
  }
  SUBCASE("faithful at V = U") {
    const int n = 8;
    Operator u = random_unitary(n * n, 2, n, rng);
    CHECK(le_tmss_local_cost(u, u, 0.6) < 1e-11);
  }
  SUBCASE("m = 2 state route matches the entanglement-fidelity decomposition") {
    const int n = 10;
    // single-mode phase gates on each register as in the trainability study
    Operator u(HilbertSpec(n, 2),
               kron(rotation(0.9, n).mat, rotation(-0.4, n).mat));
    Operator v(HilbertSpec(n, 2),
               kron(rotation(0.2, n).mat, rotation(1.3, n).mat));
    for (double r : {0.5, 1.0})
      CHECK(std::abs(le_tmss_local_cost(u, v, r) - le_tmss_local_via_fidelity(u, v, r)) <
            1e-10);
    // and for generic two-mode unitaries
    Operator a = random_unitary(n * n, 2, n, rng);
    Operator b = random_unitary(n * n, 2, n, rng);
    CHECK(std::abs(le_tmss_local_cost(a, b, 0.6) - le_tmss_local_via_fidelity(a, b, 0.6)) <
          1e-10);
  }
  SUBCASE("local lower-bounds global (observed property, reported not asserted)") {
    const int n = 8;
    for (int rep = 0; rep < 5; ++rep) {
      Operator a = random_unitary(n * n, 2, n, rng);
      Operator b = random_unitary(n * n, 2, n, rng);
      const double local = le_tmss_local_cost(a, b, 0.7);
      const double global = le_tmss_cost(a, b, 0.7);
      WARN_LE(local, global + 1e-10);
    }
  }
  SUBCASE("oracle size guard") {
    Operator u(HilbertSpec(3, 3), MatrixXcd::Identity(27, 27));
    CHECK_THROWS_AS(le_tmss_local_via_fidelity(u, u, 0.5), unsupported_size);
  }
}

TEST_CASE("averaged coherent-state cost") {
  RngStream rng(55);
  const int n = 50;
  SUBCASE("faithful at V = U") {
    TrainingSet ts = sample_coherent_training(1, 1.0, 3, n, rng);
    Operator u = gaussian_unitary(Complex(0.3, 0.1), Complex(0.2, -0.4), 0.8, n);
    CHECK(acs_cost(u, u, ts) < 1e-12);
  }
  SUBCASE("vacuum training with a rotation target is blind") {
    TrainingSet ts;
    ts.kind = TrainingKind::Coherent;
    ts.alphas.push_back(VectorXcd::Zero(1));
    ts.states.push_back(coherent_state(0.0, n));
    Operator eye(HilbertSpec(n, 1), MatrixXcd::Identity(n, n));
    CHECK(acs_cost(eye, rotation(1.1, n), ts) < 1e-13);
  }
  SUBCASE("matches per-term overlaps for random Gaussian pairs") {
    TrainingSet ts = sample_coherent_training(1, 1.0, 3, n, rng);
    Operator u = gaussian_unitary(Complex(0.5, 0.4), Complex(0.1, 0.2), 1.9, n);
    Operator v = gaussian_unitary(Complex(0.1, 0.9), Complex(0.3, -0.1), 0.4, n);
    double acc = 0.0;
    for (const Ket& s : ts.states) {
      VectorXcd lhs = v.mat.adjoint() * (u.mat * s.amps);
      acc += std::norm(s.amps.dot(lhs));
    }
    CHECK(std::abs(acs_cost(u, v, ts) - (1.0 - acc / 3.0)) < 1e-12);
  }
  SUBCASE("empty and mismatched training sets are rejected") {
    TrainingSet empty;
    Operator eye(HilbertSpec(n, 1), MatrixXcd::Identity(n, n));
    CHECK_THROWS_AS(acs_cost(eye, eye, empty), std::invalid_argument);
  }
}

TEST_CASE("local averaged coherent-state cost") {
  RngStream rng(61);
  SUBCASE("m = 1 equals the global ACS cost") {
    const int n = 30;
    TrainingSet ts = sample_coherent_training(1, 1.0, 2, n, rng);
    Operator u = gaussian_unitary(Complex(0.4, 0.0), Complex(0.0, 0.3), 0.7, n);
    Operator v = gaussian_unitary(Complex(0.2, 0.2), Complex(0.1, 0.0), 1.2, n);
    CHECK(std::abs(acs_local_cost(u, v, ts) - acs_cost(u, v, ts)) < 1e-12);
  }
  SUBCASE("faithful at V = U and matches the partial-trace oracle at m = 2") {
    const int n = 10;
    TrainingSet ts = sample_coherent_training(2, 1.0, 2, n, rng);
    Operator u = random_unitary(n * n, 2, n, rng);
    Operator v = random_unitary(n * n, 2, n, rng);
    CHECK(acs_local_cost(u, u, ts) < 1e-11);

    double acc = 0.0;
    for (int j = 0; j < ts.size(); ++j) {
      Ket phi(u.spec, v.mat.adjoint() * (u.mat * ts.states[size_t(j)].amps));
      double term = 0.0;
      for (int mode = 0; mode < 2; ++mode) {
        DensityMatrix rho = partial_trace(phi, {mode});
        VectorXcd alpha = coherent_state(ts.alphas[size_t(j)](mode), n).amps;
        term += (alpha.adjoint() * rho.mat * alpha)(0).real();
      }
      acc += term / 2.0;
    }
    CHECK(std::abs(acs_local_cost(u, v, ts) - (1.0 - acc / ts.size())) < 1e-11);
  }
}

TEST_CASE("entangled coherent-Fock cost") {
  RngStream rng(71);
  const int n = 30;
  SUBCASE("rank 1 reduces to the ACS cost on the same mean vectors") {
    TrainingSet ecfs = sample_ecfs_training(1, 1.0, 1, 2, n, rng);
    TrainingSet acs;
    acs.kind = TrainingKind::Coherent;
    for (const MatrixXcd& means : ecfs.mean_sets) {
      acs.alphas.push_back(means.col(0));
      acs.states.push_back(coherent_state_multimode(means.col(0), n));
    }
    Operator u = gaussian_unitary(Complex(0.5, 0.1), Complex(0.0, 0.2), 0.9, n);
    Operator v = gaussian_unitary(Complex(0.3, 0.3), Complex(0.1, 0.1), 1.4, n);
    CHECK(std::abs(ecfs_cost(u, v, ecfs) - acs_cost(u, v, acs)) < 1e-12);
  }
  SUBCASE("faithful at V = U") {
    TrainingSet ts = sample_ecfs_training(1, 1.0, 2, 1, n, rng);
    Operator u = gaussian_unitary(Complex(0.2, 0.6), Complex(0.1, -0.2), 0.5, n);
    CHECK(ecfs_cost(u, u, ts) < 1e-12);
  }
  SUBCASE("rank 2 matches the register-resolved overlap sum") {
    TrainingSet ts = sample_ecfs_training(1, 1.0, 2, 1, n, rng);
    Operator u = gaussian_unitary(Complex(0.4, 0.2), Complex(0.2, 0.1), 1.1, n);
    Operator v = gaussian_unitary(Complex(0.1, 0.5), Complex(0.0, 0.4), 0.3, n);
    MatrixXcd w = v.mat.adjoint() * u.mat;
    Complex overlap = 0.0;
    for (int k = 0; k < 2; ++k) {
      Ket wk = coherent_state(ts.mean_sets[0](0, k), n);
      overlap += 0.5 * wk.amps.dot(w * wk.amps);
    }
    CHECK(std::abs(ecfs_cost(u, v, ts) - (1.0 - std::norm(overlap))) < 1e-12);
  }
}

TEST_CASE("generalized thermal inner product") {
  RngStream rng(81);
  const int n = 20;
  const double r = 0.5;
  SUBCASE("equals the TMSS sandwich within the truncation tail") {
    for (int rep = 0; rep < 5; ++rep) {
      Operator u = random_unitary(n, 1, n, rng);
      Operator v = random_unitary(n, 1, n, rng);
      Complex lhs = gce_inner_product(u, v, r);
      Complex rhs = tmss_sandwich(u, Operator(v.spec, v.mat.conjugate()), r);
      CHECK(std::abs(lhs - rhs) < 1e-8);
    }
  }
  SUBCASE("inner-product axioms") {
    Operator u = random_unitary(n, 1, n, rng);
    Operator v = random_unitary(n, 1, n, rng);
    Complex uu = gce_inner_product(u, u, r);
    Complex vv = gce_inner_product(v, v, r);
    CHECK(uu.real() > 0.0);
    CHECK(std::abs(uu.imag()) < 1e-12);
    CHECK(std::norm(gce_inner_product(v, u, r)) <= uu.real() * vv.real() + 1e-12);
  }
  SUBCASE("r <= 0 rejected") {
    Operator eye(HilbertSpec(4, 1), MatrixXcd::Identity(4, 4));
    CHECK_THROWS_AS(gce_inner_product(eye, eye, 0.0), std::invalid_argument);
  }
}

TEST_CASE("faithfulness suite across cost kinds") {
  RngStream rng(91);
  const int n = 16;
  for (int rep = 0; rep < 20; ++rep) {
    Operator u = random_unitary(n, 1, n, rng);
    Operator v(u.spec, std::exp(Complex(0.0, rng.uniform(0.0, 2.0 * M_PI))) * u.mat);
    CHECK(hst_truncated(u, v, n) <= 1e-10);
    CHECK(le_tmss_cost(u, v, 0.6) <= 1e-10);
    CHECK(le_tmss_local_cost(u, v, 0.6) <= 1e-10);
    CHECK(r_tmss_normalized(u, v, 0.6) <= 1e-10);
  }
  TrainingSet ts = sample_coherent_training(1, 1.0, 2, n, rng);  // k = 2m
  TrainingSet ecfs = sample_ecfs_training(1, 1.0, 2, 1, n, rng);
  for (int rep = 0; rep < 20; ++rep) {
    Operator u = random_unitary(n, 1, n, rng);
    Operator v(u.spec, std::exp(Complex(0.0, rng.uniform(0.0, 2.0 * M_PI))) * u.mat);
    CHECK(acs_cost(u, v, ts) <= 1e-10);
    CHECK(ecfs_cost(u, v, ecfs) <= 1e-10);
  }
}

TEST_CASE("range property on random inputs") {
  RngStream rng(101);
  const int n = 10;
  TrainingSet ts = sample_coherent_training(1, 1.0, 2, n, rng);
  TrainingSet ecfs = sample_ecfs_training(1, 1.0, 2, 1, n, rng);
  for (int rep = 0; rep < 10; ++rep) {
    Operator u = random_unitary(n, 1, n, rng);
    Operator v = random_unitary(n, 1, n, rng);
    for (double c : {hst_truncated(u, v, n), le_tmss_cost(u, v, 0.8),
                     r_tmss_cost(u, v, 0.8), r_tmss_normalized(u, v, 0.8),
                     le_tmss_local_cost(u, v, 0.8), acs_cost(u, v, ts),
                     acs_local_cost(u, v, ts), ecfs_cost(u, v, ecfs)}) {
      CHECK(c >= -1e-12);
      CHECK(c <= 1.0 + 1e-12);
    }
  }
}

TEST_CASE("shot-noise layer") {
  RngStream rng(111);
  const int n = 12;
  Operator u = random_unitary(n, 1, n, rng);
  Operator v = random_unitary(n, 1, n, rng);
  const double exact = le_tmss_cost(u, v, 0.7);

  RngStream shots_rng(7);
  ShotModel model{4000, &shots_rng};
  const double noisy = le_tmss_cost(u, v, 0.7, &model);
  CHECK(std::abs(noisy - exact) < 6.0 / std::sqrt(4000.0));

  RngStream shots_rng2(7);
  ShotModel model2{4000, &shots_rng2};
  CHECK(le_tmss_cost(u, v, 0.7, &model2) == noisy);  // deterministic given seed
}
