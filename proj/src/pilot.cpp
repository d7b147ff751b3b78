// SPDX-License-Identifier: Apache-2.0
#include "thzest/pilot.hpp"

#include <Eigen/Cholesky>
#include <cmath>

namespace thzest {

using constants::pi;

QuantizationModel bussgang_epsilon(int bits) {
  QuantizationModel q;
  q.bits = bits;
  if (bits == kInfiniteBits) {
    q.upsilon = 0.0;
    q.epsilon = 1.0;
    return q;
  }
  if (bits < 1)
    throw std::invalid_argument("ADC resolution must be >= 1 bit");
  static const double table[5] = {0.3634, 0.1175, 0.03454, 0.009497,
                                  0.002499};
  q.upsilon = bits <= 5 ? table[bits - 1]
                        : pi * std::sqrt(3.0) / 2.0 * std::pow(2.0, -2.0 * bits);
  q.epsilon = 1.0 - q.upsilon;
  return q;
}

Mat draw_quantized_phasebook(int rows, int cols, int phase_bits, double scale,
                             Rng& rng) {
  if (phase_bits < 1) throw std::invalid_argument("phase_bits must be >= 1");
  const int levels = 1 << phase_bits;
  std::uniform_int_distribution<int> pick(0, levels - 1);
  Mat m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i)
      m(i, j) = std::polar(scale, 2.0 * pi * pick(rng) / levels);
  return m;
}

RFCodebook draw_codebooks(const ScenarioConfig& cfg, Rng& rng) {
  RFCodebook cb;
  cb.w_rf.reserve(cfg.pilot_blocks);
  cb.f_rf.resize(cfg.pilot_blocks);
  const double w_scale = 1.0 / std::sqrt(static_cast<double>(cfg.rx_antennas));
  const double f_scale =
      1.0 / std::sqrt(static_cast<double>(cfg.tx_antennas_per_user));
  for (int m = 0; m < cfg.pilot_blocks; ++m) {
    cb.w_rf.push_back(draw_quantized_phasebook(
        cfg.rx_antennas, cfg.rx_rf_chains, cfg.phase_bits, w_scale, rng));
    cb.f_rf[m].reserve(cfg.num_users);
    for (int u = 0; u < cfg.num_users; ++u)
      cb.f_rf[m].push_back(draw_quantized_phasebook(
          cfg.tx_antennas_per_user, cfg.tx_rf_chains, cfg.phase_bits, f_scale,
          rng));
  }
  return cb;
}

PilotFrame draw_pilots(const ScenarioConfig& cfg, Rng& rng) {
  PilotFrame pf;
  pf.pilots.resize(cfg.pilot_blocks);
  pf.freq.resize(cfg.pilot_blocks);
  const double amp = std::sqrt(cfg.pilot_power);
  std::uniform_int_distribution<int> qpsk(0, 3);
  const int num_k = cfg.subcarriers;
  for (int m = 0; m < cfg.pilot_blocks; ++m) {
    pf.pilots[m].resize(cfg.num_users);
    pf.freq[m].resize(cfg.num_users);
    for (int u = 0; u < cfg.num_users; ++u) {
      Mat p(cfg.tx_rf_chains, cfg.pilots_per_block);
      for (int q = 0; q < cfg.pilots_per_block; ++q)
        for (int i = 0; i < cfg.tx_rf_chains; ++i)
          p(i, q) = std::polar(amp, pi / 4.0 + pi / 2.0 * qpsk(rng));
      pf.pilots[m][u] = p;
      // K-point DFT of the zero-padded block
      Mat fq = Mat::Zero(cfg.tx_rf_chains, num_k);
      for (int bin = 0; bin < num_k; ++bin)
        for (int q = 0; q < cfg.pilots_per_block; ++q)
          fq.col(bin) += p.col(q) * std::polar(1.0, -2.0 * pi * bin * q / num_k);
      pf.freq[m][u] = fq;
    }
  }
  return pf;
}

Mat BlockDiagCov::dense() const {
  const int b = block_dim();
  const int n = dim();
  Mat out = Mat::Zero(n, n);
  for (std::size_t m = 0; m < blocks.size(); ++m)
    out.block(m * b, m * b, b, b) = blocks[m];
  return out;
}

Mat BlockDiagCov::inverse() const {
  const int b = block_dim();
  const int n = dim();
  Mat out = Mat::Zero(n, n);
  for (std::size_t m = 0; m < blocks.size(); ++m)
    out.block(m * b, m * b, b, b) =
        blocks[m].llt().solve(Mat::Identity(b, b));
  return out;
}

Mat BlockDiagCov::solve(const Mat& rhs) const {
  const int b = block_dim();
  if (rhs.rows() != dim())
    throw std::invalid_argument("BlockDiagCov::solve: dimension mismatch");
  Mat out(rhs.rows(), rhs.cols());
  for (std::size_t m = 0; m < blocks.size(); ++m)
    out.middleRows(m * b, b) = blocks[m].llt().solve(rhs.middleRows(m * b, b));
  return out;
}

Vec BlockDiagCov::sample(Rng& rng) const {
  const int b = block_dim();
  Vec v(dim());
  for (std::size_t m = 0; m < blocks.size(); ++m) {
    Eigen::LLT<Mat> llt(blocks[m]);
    if (llt.info() != Eigen::Success)
      throw NumericalError("noise covariance block is not positive definite");
    v.segment(m * b, b) = llt.matrixL() * randn_cvec(rng, b);
  }
  return v;
}

double BlockDiagCov::log_det() const {
  double acc = 0.0;
  for (const auto& blk : blocks) {
    Eigen::LLT<Mat> llt(blk);
    if (llt.info() != Eigen::Success)
      throw NumericalError("noise covariance block is not positive definite");
    for (int i = 0; i < blk.rows(); ++i)
      acc += 2.0 * std::log(std::real(llt.matrixL()(i, i)));
  }
  return acc;
}

Mat signal_covariance_Q(const std::vector<std::vector<Mat>>& taps_per_user,
                        const std::vector<Mat>& r_xx_per_user) {
  if (taps_per_user.empty())
    throw std::invalid_argument("signal_covariance_Q: no users");
  if (taps_per_user.size() != r_xx_per_user.size())
    throw std::invalid_argument(
        "signal_covariance_Q: users of taps and R_xx differ");
  const Eigen::Index n_r = taps_per_user[0].empty()
                               ? 0
                               : taps_per_user[0][0].rows();
  if (n_r == 0) throw std::invalid_argument("signal_covariance_Q: empty taps");
  Mat q = Mat::Zero(n_r, n_r);
  for (std::size_t u = 0; u < taps_per_user.size(); ++u) {
    const Mat& r_xx = r_xx_per_user[u];
    for (const Mat& h : taps_per_user[u]) {
      if (h.rows() != n_r || h.cols() != r_xx.rows())
        throw std::invalid_argument(
            "signal_covariance_Q: tap/R_xx dimension mismatch");
      q.noalias() += h * r_xx * h.adjoint();
    }
  }
  return q;
}

Mat quantizer_noise_covariance(const Mat& w_rf, const Mat& q_m,
                               double sigma_n2, double eps) {
  if (eps <= 0.0 || eps > 1.0)
    throw std::invalid_argument("epsilon must lie in (0, 1]");
  const Mat inner = w_rf.adjoint() * q_m * w_rf +
                    sigma_n2 * (w_rf.adjoint() * w_rf);
  return (eps * (1.0 - eps)) *
         inner.diagonal().real().asDiagonal().toDenseMatrix().cast<cxd>();
}

Mat effective_noise_covariance(const Mat& w_rf, const Mat& c_m, double eps,
                               double sigma_n2) {
  if ((c_m - c_m.adjoint()).norm() > 1e-9 * std::max(1.0, c_m.norm()))
    throw std::invalid_argument("C_m must be Hermitian");
  if (c_m.diagonal().real().minCoeff() < -1e-12)
    throw std::invalid_argument("C_m must be positive semidefinite");
  return eps * eps * sigma_n2 * (w_rf.adjoint() * w_rf) + c_m;
}

Mat MeasurementOperators::lambda(int block, int k) const {
  const Mat& w = w_rf.at(block);
  const Mat dwh = eps * w.adjoint();  // N_RF_R x N_R
  const Eigen::Index n_rf = dwh.rows(), n_r = dwh.cols();
  const Eigen::Index n_t = s.at(block).rows();
  Mat lam(n_rf, n_r * n_t);
  for (Eigen::Index j = 0; j < n_t; ++j)
    lam.middleCols(j * n_r, n_r) = s.at(block)(j, k) * dwh;
  return lam;
}

MeasurementSet synthesize_measurements(const ScenarioConfig& cfg,
                                       const MultiUserChannel& channel,
                                       const RFCodebook& codebooks,
                                       const PilotFrame& pilots, Rng& rng,
                                       double noise_scale) {
  if (cfg.subcarriers != cfg.pilots_per_block + cfg.delay_taps - 1)
    throw ConfigError(
        "zero-padding structure requires subcarriers = pilots_per_block + "
        "delay_taps - 1");
  if (channel.num_subcarriers() != cfg.subcarriers)
    throw std::invalid_argument("channel/config subcarrier mismatch");
  const int num_k = cfg.subcarriers;
  const int n_t = cfg.total_tx_antennas();
  const int n_tu = cfg.tx_antennas_per_user;
  const int n_rf = cfg.rx_rf_chains;
  const int m_blocks = cfg.pilot_blocks;

  MeasurementSet out;
  out.quant = bussgang_epsilon(cfg.adc_bits);
  const double eps = out.quant.epsilon;

  out.lambda.eps = eps;
  out.lambda.w_rf = codebooks.w_rf;
  out.lambda.s.resize(m_blocks);
  for (int m = 0; m < m_blocks; ++m) {
    Mat s = Mat::Zero(n_t, num_k);
    for (int u = 0; u < cfg.num_users; ++u)
      s.middleRows(u * n_tu, n_tu) = codebooks.f_rf[m][u] * pilots.freq[m][u];
    out.lambda.s[m] = std::move(s);
  }

  // per-user tap lists and pilot covariances for the Appendix noise model
  std::vector<std::vector<Mat>> taps_u(cfg.num_users);
  for (int u = 0; u < cfg.num_users; ++u) {
    taps_u[u].reserve(num_k);
    for (int l = 0; l < num_k; ++l)
      taps_u[u].push_back(channel.taps[l].middleCols(u * n_tu, n_tu));
  }

  out.c_w_true.blocks.resize(m_blocks);
  for (int m = 0; m < m_blocks; ++m) {
    std::vector<Mat> r_xx(cfg.num_users);
    for (int u = 0; u < cfg.num_users; ++u)
      r_xx[u] = cfg.pilot_power * codebooks.f_rf[m][u] *
                codebooks.f_rf[m][u].adjoint();
    const Mat q_m = signal_covariance_Q(taps_u, r_xx);
    const Mat c_m =
        quantizer_noise_covariance(codebooks.w_rf[m], q_m, cfg.noise_var, eps);
    out.c_w_true.blocks[m] = effective_noise_covariance(
        codebooks.w_rf[m], c_m, eps, cfg.noise_var);
  }

  out.y = Mat::Zero(m_blocks * n_rf, num_k);
  for (int m = 0; m < m_blocks; ++m) {
    const Mat dwh = eps * codebooks.w_rf[m].adjoint();
    Eigen::LLT<Mat> llt(out.c_w_true.blocks[m]);
    if (llt.info() != Eigen::Success)
      throw NumericalError("effective noise covariance is not PD");
    for (int bin = 0; bin < num_k; ++bin) {
      Vec y = dwh * channel.cfr[bin] * out.lambda.s[m].col(bin);
      if (noise_scale != 0.0) {
        const Vec v = llt.matrixL() * randn_cvec(rng, n_rf);
        y += noise_scale * v;
      }
      out.y.block(m * n_rf, bin, n_rf, 1) = y;
    }
  }

  if (cfg.noise_cov_mode == NoiseCovMode::Sample) {
    // covariance handed to the estimators comes from a sample estimate
    const int num_samples = 200;
    out.c_w.blocks.resize(m_blocks);
    for (int m = 0; m < m_blocks; ++m) {
      Eigen::LLT<Mat> llt(out.c_w_true.blocks[m]);
      Mat acc = Mat::Zero(n_rf, n_rf);
      for (int s = 0; s < num_samples; ++s) {
        const Vec v = llt.matrixL() * randn_cvec(rng, n_rf);
        acc.noalias() += v * v.adjoint();
      }
      acc /= static_cast<double>(num_samples);
      // symmetrize and regularize so the Cholesky downstream succeeds
      acc = 0.5 * (acc + acc.adjoint());
      acc += 1e-10 * acc.trace().real() / n_rf * Mat::Identity(n_rf, n_rf);
      out.c_w.blocks[m] = acc;
    }
  } else {
    out.c_w = out.c_w_true;
  }
  return out;
}

void build_sensing_tensor(MeasurementSet& meas,
                          const SparsifyingDictionary& dict,
                          const std::vector<Mat>* psi_cache) {
  const int num_k = static_cast<int>(meas.y.cols());
  if (dict.num_subcarriers() != num_k)
    throw std::invalid_argument("dictionary/measurement subcarrier mismatch");
  const int m_blocks = meas.lambda.blocks();
  const int n_rf = static_cast<int>(meas.lambda.w_rf.front().cols());
  meas.xi.slab.assign(num_k, Mat());
  for (int bin = 0; bin < num_k; ++bin) {
    const Mat psi_local =
        psi_cache ? Mat() : dict.psi(bin);
    const Mat& psi = psi_cache ? (*psi_cache)[bin] : psi_local;
    Mat slab(m_blocks * n_rf, psi.cols());
    for (int m = 0; m < m_blocks; ++m)
      slab.middleRows(m * n_rf, n_rf).noalias() =
          meas.lambda.lambda(m, bin) * psi;
    meas.xi.slab[bin] = std::move(slab);
  }
}

Vec uniform_quantizer(const Vec& x, int bits) {
  if (bits == kInfiniteBits) return x;
  if (bits < 1) throw std::invalid_argument("quantizer needs bits >= 1");
  // optimal uniform midrise step for a unit-variance Gaussian input
  static const double step_table[5] = {1.5956, 0.9957, 0.5860, 0.3352,
                                       0.1881};
  const double upsilon = bussgang_epsilon(bits).upsilon;
  const double step_unit =
      bits <= 5 ? step_table[bits - 1] : std::sqrt(12.0 * upsilon);
  const auto n = x.size();
  double var_re = 0.0, var_im = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    var_re += x(i).real() * x(i).real();
    var_im += x(i).imag() * x(i).imag();
  }
  var_re /= std::max<Eigen::Index>(n, 1);
  var_im /= std::max<Eigen::Index>(n, 1);
  const int half_levels = 1 << (bits - 1);
  auto quantize = [&](double v, double sigma) {
    if (sigma <= 0.0) return 0.0;
    const double d = step_unit * sigma;
    double idx = std::floor(v / d);
    idx = std::clamp(idx, static_cast<double>(-half_levels),
                     static_cast<double>(half_levels - 1));
    return d * (idx + 0.5);
  };
  Vec out(n);
  const double s_re = std::sqrt(var_re), s_im = std::sqrt(var_im);
  for (Eigen::Index i = 0; i < n; ++i)
    out(i) = cxd(quantize(x(i).real(), s_re), quantize(x(i).imag(), s_im));
  return out;
}

Mat time_domain_block_output(const ScenarioConfig& cfg,
                             const MultiUserChannel& channel,
                             const RFCodebook& codebooks,
                             const PilotFrame& pilots, int block) {
  const int num_k = cfg.subcarriers;
  const int n_tu = cfg.tx_antennas_per_user;
  const int n_t = cfg.total_tx_antennas();
  const double eps = bussgang_epsilon(cfg.adc_bits).epsilon;

  // zero-padded time-domain inputs stacked across users: N_T x K
  Mat x = Mat::Zero(n_t, num_k);
  for (int u = 0; u < cfg.num_users; ++u)
    x.block(u * n_tu, 0, n_tu, cfg.pilots_per_block) =
        codebooks.f_rf[block][u] * pilots.pilots[block][u];

  const Mat dwh = eps * codebooks.w_rf[block].adjoint();
  Mat r = Mat::Zero(cfg.rx_rf_chains, num_k);
  for (int q = 0; q < num_k; ++q) {
    Vec acc = Vec::Zero(cfg.rx_antennas);
    for (int l = 0; l < num_k; ++l) {
      const int idx = ((q - l) % num_k + num_k) % num_k;
      acc.noalias() += channel.taps[l] * x.col(idx);
    }
    r.col(q) = dwh * acc;
  }
  return r;
}

}  // namespace thzest
