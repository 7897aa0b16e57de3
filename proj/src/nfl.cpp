#include "cvc/nfl.hpp"

#include <cmath>

namespace cvc {

MatrixXd symplectic_form(int dim) {
  if (dim % 2 != 0) throw std::invalid_argument("symplectic_form: dim must be even");
  MatrixXd delta = MatrixXd::Zero(dim, dim);
  for (int j = 0; j < dim / 2; ++j) {
    delta(2 * j, 2 * j + 1) = 1.0;
    delta(2 * j + 1, 2 * j) = -1.0;
  }
  return delta;
}

MatrixXd haar_orthogonal_matrix(int k, RngStream& rng) {
  if (k < 1) throw std::invalid_argument("haar_orthogonal_matrix: k must be >= 1");
  if (k == 1) return MatrixXd::Constant(1, 1, rng.uniform() < 0.5 ? -1.0 : 1.0);
  MatrixXd g(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) g(i, j) = rng.normal();
  Eigen::HouseholderQR<MatrixXd> qr(g);
  MatrixXd q = qr.householderQ();
  MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < k; ++j)
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  return q;
}

PhaseSpaceMap haar_orthogonal(int dim, RngStream& rng) {
  if (dim < 2 || dim % 2 != 0)
    throw std::invalid_argument("haar_orthogonal: dim must be even and >= 2");
  return {haar_orthogonal_matrix(dim, rng), MapKind::Orthogonal};
}

MatrixXcd haar_unitary_matrix(int dim, RngStream& rng) {
  if (dim < 1) throw std::invalid_argument("haar_unitary_matrix: dim must be >= 1");
  MatrixXcd g(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) g(i, j) = Complex(rng.normal(), rng.normal());
  Eigen::HouseholderQR<MatrixXcd> qr(g);
  MatrixXcd q = qr.householderQ();
  MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < dim; ++j) {
    Complex d = r(j, j);
    q.col(j) *= std::conj(d) / std::abs(d);
  }
  return q;
}

MatrixXd haar_orthosymplectic_matrix(int dim, RngStream& rng) {
  if (dim % 2 != 0)
    throw std::invalid_argument("haar_orthosymplectic_matrix: dim must be even");
  const int k = dim / 2;
  MatrixXcd q = haar_unitary_matrix(k, rng);
  // real embedding, interleaved (q,p) pairs; orthogonal and symplectic
  MatrixXd w(dim, dim);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      double x = q(i, j).real(), y = q(i, j).imag();
      w(2 * i, 2 * j) = x;
      w(2 * i, 2 * j + 1) = -y;
      w(2 * i + 1, 2 * j) = y;
      w(2 * i + 1, 2 * j + 1) = x;
    }
  return w;
}

double log_uniform_z(RngStream& rng) {
  return std::exp(rng.uniform(-std::log(2.0), std::log(2.0)));
}

namespace {

MatrixXd bloch_messiah_z(int dim, const ZSampler& z_dist, RngStream& rng) {
  MatrixXd z = MatrixXd::Zero(dim, dim);
  for (int j = 0; j < dim / 2; ++j) {
    double zj = z_dist(rng);
    z(2 * j, 2 * j) = zj;
    z(2 * j + 1, 2 * j + 1) = 1.0 / zj;
  }
  return z;
}

}  // namespace

PhaseSpaceMap haar_symplectic_bloch_messiah(int dim, const ZSampler& z_dist,
                                            RngStream& rng) {
  MatrixXd o1 = haar_orthosymplectic_matrix(dim, rng);
  MatrixXd o2 = haar_orthosymplectic_matrix(dim, rng);
  return {o1 * bloch_messiah_z(dim, z_dist, rng) * o2, MapKind::Symplectic};
}

PhaseSpaceMap block_perfect_learner(const PhaseSpaceMap& target, int agree_dim,
                                    RngStream& rng, const ZSampler& z_dist) {
  const int n = target.dim();
  if (agree_dim < 0 || agree_dim > n)
    throw std::invalid_argument("block_perfect_learner: agree_dim outside 0..2m");
  const int k = n - agree_dim;

  MatrixXd blk = MatrixXd::Identity(n, n);
  if (target.kind == MapKind::Orthogonal) {
    if (k > 0) blk.bottomRightCorner(k, k) = haar_orthogonal_matrix(k, rng);
    return {blk * target.mat, MapKind::Orthogonal};
  }
  if (agree_dim % 2 != 0)
    throw std::invalid_argument("block_perfect_learner: symplectic kind needs even agree_dim");
  if (k > 0) {
    MatrixXd w1 = haar_orthosymplectic_matrix(k, rng);
    MatrixXd w2 = haar_orthosymplectic_matrix(k, rng);
    blk.bottomRightCorner(k, k) = w1 * bloch_messiah_z(k, z_dist, rng) * w2;
  }
  // T L^T = blk  =>  T = blk (L^T)^{-1} = blk (-Delta L Delta)
  MatrixXd delta = symplectic_form(n);
  return {blk * (-delta * target.mat * delta), MapKind::Symplectic};
}

PhaseSpaceMap learner_from_training_vectors(const PhaseSpaceMap& target,
                                            const MatrixXd& w_rows, RngStream& rng) {
  if (target.kind != MapKind::Orthogonal)
    throw std::invalid_argument("learner_from_training_vectors: orthogonal targets only");
  const int n = target.dim();
  const int s = int(w_rows.rows());
  // orthonormal basis whose first s columns span the training rows
  Eigen::HouseholderQR<MatrixXd> qr(w_rows.transpose());
  MatrixXd q = qr.householderQ();
  MatrixXd blk = MatrixXd::Identity(n, n);
  if (n - s > 0) blk.bottomRightCorner(n - s, n - s) = haar_orthogonal_matrix(n - s, rng);
  // w T = w O for w in span: rows of Q^T spanning directions are fixed
  return {q * blk * q.transpose() * target.mat, MapKind::Orthogonal};
}

double risk_closed_form(const PhaseSpaceMap& o, const PhaseSpaceMap& t) {
  if (o.dim() != t.dim()) throw std::invalid_argument("risk_closed_form: dim mismatch");
  const double m = o.dim() / 2.0;
  return 0.5 - (t.mat * o.mat.transpose()).trace() / (4.0 * m);
}

double mc_phase_space_risk(const PhaseSpaceMap& o, const PhaseSpaceMap& t,
                           double sigma, long long n_samples, RngStream& rng) {
  if (sigma <= 0.0) throw std::invalid_argument("mc_phase_space_risk: sigma must be > 0");
  const int n = o.dim();
  const double m = n / 2.0;
  double acc = 0.0;
  Eigen::RowVectorXd x(n);
  const double sd = std::sqrt(sigma);
  for (long long i = 0; i < n_samples; ++i) {
    for (int j = 0; j < n; ++j) x(j) = sd * rng.normal();
    acc += (x * t.mat - x * o.mat).squaredNorm();
  }
  return acc / double(n_samples) / (8.0 * m * sigma);
}

RiskEstimate expected_risk_mc(int m, int set_size, int rank, MapKind kind,
                              long long n_samples, RngStream& rng,
                              const ZSampler& z_dist) {
  if (rank * set_size > 2 * m)
    throw std::invalid_argument("expected_risk_mc: rank*|S| exceeds 2m");
  const int agree = rank * set_size;
  double sum = 0.0, sum2 = 0.0;
  for (long long i = 0; i < n_samples; ++i) {
    PhaseSpaceMap target =
        (kind == MapKind::Orthogonal)
            ? haar_orthogonal(2 * m, rng)
            : haar_symplectic_bloch_messiah(2 * m, z_dist, rng);
    PhaseSpaceMap learner = block_perfect_learner(target, agree, rng, z_dist);
    double risk = risk_closed_form(target, learner);
    sum += risk;
    sum2 += risk * risk;
  }
  RiskEstimate est;
  est.n_samples = n_samples;
  est.m = m;
  est.set_size = set_size;
  est.rank = rank;
  est.kind = kind;
  est.mean = sum / double(n_samples);
  double var = std::max(0.0, sum2 / double(n_samples) - est.mean * est.mean);
  est.stderr_ = std::sqrt(var / double(n_samples));
  est.theory = 0.5 - double(rank * set_size) / (4.0 * m);
  return est;
}

double covariance_risk_mc(const MatrixXd& o, const MatrixXd& t, double d_max,
                          int m, long long n_samples, RngStream& rng) {
  if (d_max <= 1.0) throw std::invalid_argument("covariance_risk_mc: D must be > 1");
  const int n = 2 * m;
  const double half_log = 0.5 * std::log(d_max);
  double acc = 0.0;
  VectorXd d(n);
  for (long long i = 0; i < n_samples; ++i) {
    MatrixXd w = haar_orthogonal_matrix(n, rng);
    for (int j = 0; j < m; ++j) {
      double r = rng.uniform(-half_log, half_log);
      d(2 * j) = std::exp(-2.0 * r) / 2.0;
      d(2 * j + 1) = std::exp(2.0 * r) / 2.0;
    }
    MatrixXd sig = w.transpose() * d.asDiagonal() * w;
    acc += (t.transpose() * sig * t - o.transpose() * sig * o).squaredNorm();
  }
  return acc / double(n_samples) / double(m);
}

double expected_covariance_risk(int m, int set_size, double d_max) {
  if (m < 1 || d_max <= 1.0)
    throw std::invalid_argument("expected_covariance_risk: need m >= 1, D > 1");
  const double s = double(set_size);
  const double logd = std::log(d_max);
  const double g2 = (d_max * d_max - 1.0 / (d_max * d_max)) / (4.0 * logd);
  const double dd = d_max - 1.0 / d_max;
  return g2 * (1.0 - 1.0 / (2.0 * (m + 1.0))) -
         dd * dd * (s * s + 1.0) / (8.0 * m * logd * logd);
}

double expected_covariance_risk_finite(int m, int set_size, double d_max) {
  if (m < 1 || d_max <= 1.0)
    throw std::invalid_argument("expected_covariance_risk_finite: need m >= 1, D > 1");
  const double n = 2.0 * m;
  const double s = double(set_size);
  const double logd = std::log(d_max);
  const double g2 = (d_max * d_max - 1.0 / (d_max * d_max)) / (4.0 * logd);
  const double h = (d_max - 1.0 / d_max) / (2.0 * logd);
  // E[Tr L] = s, E[(Tr L)^2] = s^2 + c, E[Tr L^2] = s + c with c = 1 unless
  // the complement block is empty (L = I ⊕ Y, Y Haar on Orth(2m - s)).
  const double c = (set_size < 2 * m) ? 1.0 : 0.0;
  const double e_tr2 = s * s + c;   // E[(Tr L)^2]
  const double e_trsq = s + c;      // E[Tr L^2]
  const double i1 = (n + e_trsq + e_tr2) / (n * (n + 2.0));
  const double i2 = (n * (n + 1.0) - e_tr2 - e_trsq) / (n * (n - 1.0) * (n + 2.0));
  return g2 - g2 * i1 - (1.0 + 2.0 * (m - 1.0) * h * h) * i2;
}

double orth_moment_diag(const MatrixXd& l) {
  const double n = double(l.rows());
  const double tr = l.trace();
  const double tr2 = (l * l).trace();
  return (n + tr2 + tr * tr) / (n * (n + 2.0));
}

double orth_moment_offdiag(const MatrixXd& l) {
  const double n = double(l.rows());
  const double tr = l.trace();
  const double tr2 = (l * l).trace();
  return (n * (n + 1.0) - tr * tr - tr2) / (n * (n - 1.0) * (n + 2.0));
}

std::pair<double, double> lemma1_mc(const MatrixXd& l, int i, int j,
                                    long long n_samples, RngStream& rng) {
  if (i == j) throw std::invalid_argument("lemma1_mc: needs i != j");
  const int n = int(l.rows());
  double acc_ii = 0.0, acc_ij = 0.0;
  for (long long k = 0; k < n_samples; ++k) {
    MatrixXd w = haar_orthogonal_matrix(n, rng);
    VectorXd ui = w.col(i);
    VectorXd uj = w.col(j);
    double mii = ui.dot(l * ui);
    double mij = ui.dot(l * uj);
    acc_ii += mii * mii;
    acc_ij += mij * mij;
  }
  return {acc_ii / double(n_samples), acc_ij / double(n_samples)};
}

}  // namespace cvc
