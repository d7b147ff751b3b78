// SPDX-License-Identifier: Apache-2.0
#include "thzest/estimators.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <chrono>
#include <cmath>
#include <numeric>

namespace thzest {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

/// Cholesky with the trace-scaled jitter fallback.
Eigen::LLT<Mat> robust_llt(Mat s) {
  Eigen::LLT<Mat> llt(s);
  if (llt.info() == Eigen::Success) return llt;
  const double jitter = 1e-12 * s.trace().real() / s.rows();
  for (int attempt = 0; attempt < 3; ++attempt) {
    s += jitter * std::pow(10.0, attempt) * Mat::Identity(s.rows(), s.cols());
    llt.compute(s);
    if (llt.info() == Eigen::Success) return llt;
  }
  throw NumericalError(
      "Cholesky factorization failed even with jitter; the inner system is "
      "numerically singular");
}

std::vector<int> active_indices(const RVec& gamma) {
  std::vector<int> idx;
  idx.reserve(gamma.size());
  for (Eigen::Index i = 0; i < gamma.size(); ++i)
    if (gamma(i) > 0.0) idx.push_back(static_cast<int>(i));
  return idx;
}

Mat select_columns(const Mat& x, const std::vector<int>& idx) {
  Mat out(x.rows(), idx.size());
  for (std::size_t j = 0; j < idx.size(); ++j) out.col(j) = x.col(idx[j]);
  return out;
}

}  // namespace

void bgsr_e_step(const SensingTensor& xi, const Mat& y, const BlockDiagCov& c_w,
                 const RVec& gamma, std::vector<Mat>& sigma_out, Mat& h_b_out) {
  if (gamma.minCoeff() < 0.0)
    throw std::invalid_argument("hyperparameters must be nonnegative");
  const int num_k = xi.num_subcarriers();
  const int n = xi.atoms();
  const auto idx = active_indices(gamma);
  const Mat c_dense = c_w.dense();

  sigma_out.assign(num_k, Mat::Zero(n, n));
  h_b_out = Mat::Zero(n, num_k);
  if (idx.empty()) return;

  RVec g_a(idx.size());
  for (std::size_t j = 0; j < idx.size(); ++j) g_a(j) = gamma(idx[j]);

  for (int k = 0; k < num_k; ++k) {
    const Mat xa = select_columns(xi.slab[k], idx);
    const Mat xg = xa * g_a.asDiagonal();  // Xi Gamma
    Mat s = c_dense;
    s.noalias() += xg * xa.adjoint();  // C_w + Xi Gamma Xi^H
    auto llt = robust_llt(std::move(s));
    // Sigma = Gamma - Gamma Xi^H S^{-1} Xi Gamma
    const Mat sinv_xg = llt.solve(xg);
    Mat sigma_a = g_a.cast<cxd>().asDiagonal();
    sigma_a.noalias() -= xg.adjoint() * sinv_xg;
    // mean = Gamma Xi^H S^{-1} y
    const Vec mu_a = xg.adjoint() * llt.solve(y.col(k));
    for (std::size_t a = 0; a < idx.size(); ++a) {
      h_b_out(idx[a], k) = mu_a(a);
      for (std::size_t b = 0; b < idx.size(); ++b)
        sigma_out[k](idx[a], idx[b]) = sigma_a(a, b);
    }
  }
}

void bgsr_e_step_direct(const SensingTensor& xi, const Mat& y,
                        const BlockDiagCov& c_w, const RVec& gamma,
                        std::vector<Mat>& sigma_out, Mat& h_b_out) {
  if (gamma.minCoeff() <= 0.0)
    throw std::invalid_argument(
        "direct posterior requires strictly positive hyperparameters");
  const int num_k = xi.num_subcarriers();
  const int n = xi.atoms();
  sigma_out.assign(num_k, Mat::Zero(n, n));
  h_b_out = Mat::Zero(n, num_k);
  for (int k = 0; k < num_k; ++k) {
    const Mat& x = xi.slab[k];
    const Mat cinv_x = c_w.solve(x);
    Mat a = x.adjoint() * cinv_x;
    a += gamma.cwiseInverse().cast<cxd>().asDiagonal();
    Eigen::LLT<Mat> llt(a);
    if (llt.info() != Eigen::Success)
      throw NumericalError("direct posterior system is not positive definite");
    sigma_out[k] = llt.solve(Mat::Identity(n, n));
    h_b_out.col(k) = sigma_out[k] * (cinv_x.adjoint() * y.col(k));
  }
}

RVec bgsr_m_step(const std::vector<Mat>& sigma, const Mat& h_b) {
  const int num_k = static_cast<int>(sigma.size());
  const Eigen::Index n = h_b.rows();
  RVec gamma = RVec::Zero(n);
  for (int k = 0; k < num_k; ++k)
    gamma += sigma[k].diagonal().real() + h_b.col(k).cwiseAbs2();
  return gamma / num_k;
}

EstimatorOutput bgsr_estimate(const SensingTensor& xi, const Mat& y,
                              const BlockDiagCov& c_w, const BgsrOptions& opt) {
  if (opt.eps_tol <= 0.0) throw std::invalid_argument("eps_tol must be > 0");
  if (opt.k_max < 1) throw std::invalid_argument("k_max must be >= 1");
  const auto t0 = Clock::now();
  const int num_k = xi.num_subcarriers();
  const int n = xi.atoms();
  const Mat c_dense = c_w.dense();

  EstimatorOutput out;
  RVec gamma_prev = RVec::Zero(n);
  RVec gamma = RVec::Ones(n);
  Mat h_b = Mat::Zero(n, num_k);

  int j = 1;
  while ((gamma - gamma_prev).squaredNorm() > opt.eps_tol && j < opt.k_max) {
    const auto idx = active_indices(gamma);
    RVec sqrt_g(idx.size());
    for (std::size_t a = 0; a < idx.size(); ++a)
      sqrt_g(a) = std::sqrt(gamma(idx[a]));

    RVec acc = RVec::Zero(n);
    h_b.setZero();
    const bool full = static_cast<int>(idx.size()) == n;
    for (int k = 0; k < num_k; ++k) {
      // S = C_w + Xt Xt^H with Xt = Xi_active diag(sqrt(gamma))
      Mat xt = full ? xi.slab[k] : select_columns(xi.slab[k], idx);
      xt = xt * sqrt_g.asDiagonal();
      Mat s = c_dense;
      s.selfadjointView<Eigen::Lower>().rankUpdate(xt);
      auto llt = robust_llt(std::move(s));
      llt.matrixL().solveInPlace(xt);  // xt <- L^{-1} Xt
      const Vec z = llt.matrixL().solve(y.col(k));
      // posterior mean (scaled back) and covariance diagonal
      const Vec mu = sqrt_g.cast<cxd>().asDiagonal() * (xt.adjoint() * z);
      const RVec qt = xt.colwise().squaredNorm().real().transpose();
      for (std::size_t a = 0; a < idx.size(); ++a) {
        const double g_i = gamma(idx[a]);
        const double sig_ii = std::max(0.0, g_i * (1.0 - qt(a)));
        acc(idx[a]) += sig_ii + std::norm(mu(a));
        h_b(idx[a], k) = mu(a);
      }
    }
    RVec gamma_next = acc / num_k;
    // prune: tiny hyperparameters are clamped to exact zero and leave the
    // active set, keeping the inner Woodbury system small
    const double floor = opt.prune_rel * gamma_next.maxCoeff();
    for (Eigen::Index i = 0; i < n; ++i)
      if (gamma_next(i) < floor) gamma_next(i) = 0.0;

    gamma_prev = gamma;
    gamma = gamma_next;
    out.trace.push_back((gamma - gamma_prev).squaredNorm());
    ++j;
  }

  out.h_b_hat = std::move(h_b);
  out.gamma = std::move(gamma);
  out.iterations = j - 1;
  out.wall_time_s = seconds_since(t0);
  return out;
}

EstimatorOutput gsmp_estimate(const SensingTensor& xi, const Mat& y,
                              double eps0, int max_atoms) {
  if (eps0 <= 0.0) throw std::invalid_argument("eps0 must be > 0");
  const auto t0 = Clock::now();
  const int num_k = xi.num_subcarriers();
  const int rows = xi.rows();
  const int n = xi.atoms();
  if (max_atoms <= 0) max_atoms = rows;
  max_atoms = std::min(max_atoms, std::min(rows, n));

  EstimatorOutput out;
  out.h_b_hat = Mat::Zero(n, num_k);

  Mat residual = y;           // T_j
  double e_prev = 0.0;        // ||T_0||_F^2
  double e_cur = y.squaredNorm();
  Mat h_ls;                   // restricted LS, |A| x K
  std::vector<int> selected;

  while (std::abs(e_prev - e_cur) >= eps0 &&
         static_cast<int>(selected.size()) < max_atoms) {
    // identification: correlation summed across subcarriers
    RVec score = RVec::Zero(n);
    for (int k = 0; k < num_k; ++k)
      score += (xi.slab[k].adjoint() * residual.col(k)).cwiseAbs2().real();
    int pick = 0;
    score.maxCoeff(&pick);
    if (std::find(selected.begin(), selected.end(), pick) != selected.end())
      break;  // stalled: strongest correlation already selected
    selected.push_back(pick);

    // augmentation: per-subcarrier restricted least squares
    const int j_atoms = static_cast<int>(selected.size());
    h_ls.resize(j_atoms, num_k);
    bool degenerate = false;
    for (int k = 0; k < num_k; ++k) {
      Mat xa(rows, j_atoms);
      for (int a = 0; a < j_atoms; ++a) xa.col(a) = xi.slab[k].col(selected[a]);
      Eigen::ColPivHouseholderQR<Mat> qr(xa);
      if (qr.rank() < j_atoms) {
        degenerate = true;
        break;
      }
      h_ls.col(k) = qr.solve(y.col(k));
      residual.col(k) = y.col(k) - xa * h_ls.col(k);
    }
    if (degenerate) {
      selected.pop_back();
      out.degenerate = true;
      break;
    }
    residual /= static_cast<double>(num_k);  // Step-12 division

    e_prev = e_cur;
    e_cur = residual.squaredNorm();
    out.trace.push_back(e_cur);
    ++out.iterations;
  }

  for (std::size_t a = 0; a < selected.size(); ++a)
    out.h_b_hat.row(selected[a]) = h_ls.row(a);
  out.support = std::move(selected);
  out.wall_time_s = seconds_since(t0);
  return out;
}

Vec omp_per_subcarrier(const Mat& xi_k, const Vec& y_k, int max_atoms,
                       double tol, std::vector<int>* support) {
  const int rows = static_cast<int>(xi_k.rows());
  const int n = static_cast<int>(xi_k.cols());
  if (max_atoms > rows)
    throw std::invalid_argument("max_atoms cannot exceed measurement rows");
  Vec h = Vec::Zero(n);
  std::vector<int> sel;
  Vec residual = y_k;
  Vec coeffs;
  while (static_cast<int>(sel.size()) < max_atoms &&
         residual.squaredNorm() > tol) {
    RVec score = (xi_k.adjoint() * residual).cwiseAbs2().real();
    for (int s : sel) score(s) = -1.0;  // never reselect
    int pick = 0;
    if (score.maxCoeff(&pick) <= 0.0) break;
    sel.push_back(pick);
    Mat xa(rows, sel.size());
    for (std::size_t a = 0; a < sel.size(); ++a) xa.col(a) = xi_k.col(sel[a]);
    Eigen::ColPivHouseholderQR<Mat> qr(xa);
    if (qr.rank() < static_cast<Eigen::Index>(sel.size())) {
      sel.pop_back();
      break;
    }
    coeffs = qr.solve(y_k);
    residual = y_k - xa * coeffs;
  }
  for (std::size_t a = 0; a < sel.size(); ++a) h(sel[a]) = coeffs(a);
  if (support) *support = std::move(sel);
  return h;
}

EstimatorOutput omp_estimate(const SensingTensor& xi, const Mat& y,
                             const BlockDiagCov& c_w, int max_atoms) {
  const auto t0 = Clock::now();
  const int num_k = xi.num_subcarriers();
  EstimatorOutput out;
  out.h_b_hat = Mat::Zero(xi.atoms(), num_k);
  // expected residual noise energy per subcarrier
  const double tol = c_w.dense().trace().real();
  for (int k = 0; k < num_k; ++k)
    out.h_b_hat.col(k) =
        omp_per_subcarrier(xi.slab[k], y.col(k), max_atoms, tol, nullptr);
  out.wall_time_s = seconds_since(t0);
  return out;
}

Vec smv_sbl(const Mat& xi_k, const Vec& y_k, const BlockDiagCov& c_w,
            const BgsrOptions& opt, int* iterations) {
  SensingTensor single;
  single.slab = {xi_k};
  const EstimatorOutput res = bgsr_estimate(single, y_k, c_w, opt);
  if (iterations) *iterations = res.iterations;
  return res.h_b_hat.col(0);
}

EstimatorOutput sbl_estimate(const SensingTensor& xi, const Mat& y,
                             const BlockDiagCov& c_w, const BgsrOptions& opt) {
  const auto t0 = Clock::now();
  const int num_k = xi.num_subcarriers();
  EstimatorOutput out;
  out.h_b_hat = Mat::Zero(xi.atoms(), num_k);
  for (int k = 0; k < num_k; ++k) {
    int iters = 0;
    out.h_b_hat.col(k) = smv_sbl(xi.slab[k], y.col(k), c_w, opt, &iters);
    out.iterations = std::max(out.iterations, iters);
  }
  out.wall_time_s = seconds_since(t0);
  return out;
}

std::vector<Mat> reconstruct_channel(const Mat& h_b_hat,
                                     const SparsifyingDictionary& dict) {
  if (h_b_hat.rows() != dict.total_atoms())
    throw std::invalid_argument(
        "beamspace estimate length does not match the dictionary mode");
  const int num_k = dict.num_subcarriers();
  if (h_b_hat.cols() != num_k)
    throw std::invalid_argument("beamspace estimate subcarrier mismatch");
  const int apu = dict.atoms_per_user();
  std::vector<Mat> cfr(num_k);
  for (int k = 0; k < num_k; ++k) {
    const Mat& ar = dict.a_r[k];
    const Mat& at = dict.a_t[k];
    const int g_r = static_cast<int>(ar.cols());
    const int g_t = static_cast<int>(at.cols());
    Mat h(ar.rows(), at.rows() * dict.num_users);
    for (int u = 0; u < dict.num_users; ++u) {
      const Eigen::Map<const Mat> hb(h_b_hat.col(k).data() + u * apu, g_r,
                                     g_t);
      h.middleCols(u * at.rows(), at.rows()).noalias() = ar * hb * at.adjoint();
    }
    cfr[k] = std::move(h);
  }
  return cfr;
}

double bgsr_log_likelihood(const SensingTensor& xi, const Mat& y,
                           const BlockDiagCov& c_w, const RVec& gamma) {
  const int num_k = xi.num_subcarriers();
  const int rows = xi.rows();
  const Mat c_dense = c_w.dense();
  double ll = 0.0;
  for (int k = 0; k < num_k; ++k) {
    Mat cov = c_dense;
    cov.noalias() +=
        xi.slab[k] * gamma.cast<cxd>().asDiagonal() * xi.slab[k].adjoint();
    Eigen::LLT<Mat> llt(cov);
    if (llt.info() != Eigen::Success)
      throw NumericalError("marginal covariance is not positive definite");
    double logdet = 0.0;
    for (int i = 0; i < rows; ++i)
      logdet += 2.0 * std::log(std::real(llt.matrixL()(i, i)));
    const Vec w = llt.solve(y.col(k));
    ll += -rows * std::log(constants::pi) - logdet -
          std::real(y.col(k).dot(w));
  }
  return ll;
}

}  // namespace thzest
