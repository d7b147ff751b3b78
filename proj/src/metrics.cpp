// SPDX-License-Identifier: Apache-2.0
#include "thzest/metrics.hpp"

#include <Eigen/Cholesky>
#include <cmath>

namespace thzest {

using constants::pi;

double nmse(const std::vector<Mat>& h_hat, const std::vector<Mat>& h_true) {
  if (h_hat.size() != h_true.size())
    throw std::invalid_argument("nmse: subcarrier count mismatch");
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < h_true.size(); ++k) {
    if (h_hat[k].rows() != h_true[k].rows() ||
        h_hat[k].cols() != h_true[k].cols())
      throw std::invalid_argument("nmse: shape mismatch");
    num += (h_hat[k] - h_true[k]).squaredNorm();
    den += h_true[k].squaredNorm();
  }
  if (den <= 0.0)
    throw std::invalid_argument("nmse: reference channel has zero energy");
  return num / den;
}

BCRBResult bcrb_with_gram(const SensingTensor& xi, const BlockDiagCov& c_w,
                          const RVec& gamma_hat, const Mat& psi_gram,
                          double mean_channel_energy) {
  const int n = xi.atoms();
  if (gamma_hat.size() != n)
    throw std::invalid_argument("bcrb: gamma size mismatch");
  if (gamma_hat.minCoeff() <= 0.0)
    throw std::invalid_argument("bcrb: gamma_hat must be positive elementwise");
  const int num_k = xi.num_subcarriers();

  BCRBResult res;
  Mat fim = Mat::Zero(n, n);
  for (int k = 0; k < num_k; ++k) {
    const Mat cinv_x = c_w.solve(xi.slab[k]);
    fim.noalias() += xi.slab[k].adjoint() * cinv_x;
  }
  fim += gamma_hat.cwiseInverse().cast<cxd>().asDiagonal();
  fim = 0.5 * (fim + fim.adjoint().eval());  // enforce Hermitian symmetry
  res.fim = fim;

  Eigen::LLT<Mat> llt(fim);
  if (llt.info() != Eigen::Success)
    throw NumericalError("Bayesian FIM is numerically singular");
  const Mat fim_inv = llt.solve(Mat::Identity(n, n));

  // bound = sum_k Tr(Psi_k I^{-1} Psi_k^H) = Tr(I^{-1} sum_k Psi_k^H Psi_k)
  res.bound = std::real(fim_inv.cwiseProduct(psi_gram.transpose()).sum());
  if (mean_channel_energy > 0.0)
    res.bound_nmse = res.bound / mean_channel_energy;
  return res;
}

BCRBResult bcrb(const SensingTensor& xi, const BlockDiagCov& c_w,
                const RVec& gamma_hat, const SparsifyingDictionary& dict,
                double mean_channel_energy) {
  const int n = xi.atoms();
  Mat gram = Mat::Zero(n, n);
  for (int k = 0; k < xi.num_subcarriers(); ++k) {
    const Mat psi = dict.psi(k);
    gram.noalias() += psi.adjoint() * psi;
  }
  return bcrb_with_gram(xi, c_w, gamma_hat, gram, mean_channel_energy);
}

std::vector<cxd> psk_constellation(int order) {
  if (order < 2 || (order & (order - 1)) != 0)
    throw std::invalid_argument("PSK order must be a power of two");
  std::vector<cxd> points(order);
  for (int v = 0; v < order; ++v) {
    const int gray = v ^ (v >> 1);  // Gray-coded phase index for bits v
    points[v] = std::polar(1.0, 2.0 * pi * gray / order);
  }
  return points;
}

BerResult mmse_equalize_detect(const ScenarioConfig& cfg,
                               const MultiUserChannel& channel,
                               const std::vector<Mat>& h_hat,
                               const RFCodebook& codebooks,
                               const QuantizationModel& quant,
                               const BlockDiagCov& c_w_true, Rng& rng) {
  const int num_k = cfg.subcarriers;
  const int n_p = cfg.pilots_per_block;
  const int n_tu = cfg.tx_antennas_per_user;
  // one data stream per user: the dominant LoS component makes each user's
  // channel effectively rank one, so extra spatial streams are unusable
  const int streams = cfg.num_users;
  const int order = cfg.psk_order;
  const int bits_per_symbol = static_cast<int>(std::log2(order));
  const auto constellation = psk_constellation(order);
  const double eps = quant.epsilon;

  // data phase reuses the first pilot block's RF codebooks, with the user's
  // RF chains combined by a fixed uniform baseband vector
  const Mat dwh = eps * codebooks.w_rf[0].adjoint();
  Mat f_blk = Mat::Zero(cfg.total_tx_antennas(), streams);
  const double bb = 1.0 / std::sqrt(static_cast<double>(cfg.tx_rf_chains));
  for (int u = 0; u < cfg.num_users; ++u)
    f_blk.block(u * n_tu, u, n_tu, 1) =
        codebooks.f_rf[0][u] * (bb * Vec::Ones(cfg.tx_rf_chains));

  // effective true and estimated per-subcarrier channels
  std::vector<Mat> he_true(num_k), w_eq(num_k);
  const double sigma2 = cfg.noise_var;
  for (int k = 0; k < num_k; ++k) {
    he_true[k] = dwh * channel.cfr[k] * f_blk;
    const Mat he_est = dwh * h_hat[k] * f_blk;
    const Mat a = he_est.adjoint() * he_est +
                  sigma2 * Mat::Identity(streams, streams);
    w_eq[k] = a.ldlt().solve(he_est.adjoint());
  }

  Eigen::LLT<Mat> noise_llt(c_w_true.blocks[0]);
  if (noise_llt.info() != Eigen::Success)
    throw NumericalError("data-phase noise covariance is not PD");

  std::uniform_int_distribution<int> sym(0, order - 1);
  BerResult res;
  int remaining = cfg.data_vectors;
  while (remaining > 0) {
    const int use = std::min(remaining, n_p);
    // time-domain Gray-PSK data block, zero-padded to K
    Eigen::MatrixXi tx_sym = Eigen::MatrixXi::Zero(streams, n_p);
    Mat x_time = Mat::Zero(streams, num_k);
    for (int q = 0; q < n_p; ++q)
      for (int s = 0; s < streams; ++s) {
        tx_sym(s, q) = sym(rng);
        x_time(s, q) = constellation[tx_sym(s, q)];
      }
    // frequency-domain product model with the Bussgang-linearized front end
    Mat x_hat_time = Mat::Zero(streams, num_k);
    for (int bin = 0; bin < num_k; ++bin) {
      Vec x_f = Vec::Zero(streams);
      for (int q = 0; q < num_k; ++q)
        x_f += x_time.col(q) * std::polar(1.0, -2.0 * pi * bin * q / num_k);
      Vec y = he_true[bin] * x_f +
              noise_llt.matrixL() * randn_cvec(rng, cfg.rx_rf_chains);
      const Vec x_eq = w_eq[bin] * y;
      // accumulate the inverse transform on the fly
      for (int q = 0; q < num_k; ++q)
        x_hat_time.col(q) +=
            x_eq * std::polar(1.0 / num_k, 2.0 * pi * bin * q / num_k);
    }
    for (int q = 0; q < use; ++q)
      for (int s = 0; s < streams; ++s) {
        // nearest-neighbor PSK demap
        int best = 0;
        double best_d = std::numeric_limits<double>::max();
        for (int v = 0; v < order; ++v) {
          const double d = std::norm(x_hat_time(s, q) - constellation[v]);
          if (d < best_d) {
            best_d = d;
            best = v;
          }
        }
        const int diff = best ^ tx_sym(s, q);
        res.bit_errors += __builtin_popcount(static_cast<unsigned>(diff));
        res.bits += bits_per_symbol;
      }
    remaining -= use;
  }
  res.ber = res.bits > 0 ? static_cast<double>(res.bit_errors) / res.bits : 0.0;
  return res;
}

}  // namespace thzest
