// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "thzest/channel.hpp"
#include "thzest/common.hpp"
#include "thzest/config.hpp"
#include "thzest/dictionary.hpp"

namespace thzest {

/// Quantized ADC linearization constants: upsilon (distortion-to-signal
/// power) and epsilon = 1 - upsilon.  Tabulated for b <= 5, closed form
/// (pi sqrt(3)/2) 2^{-2b} above, and (0, 1) for infinite resolution.
struct QuantizationModel {
  int bits = kInfiniteBits;
  double upsilon = 0.0;
  double epsilon = 1.0;
};

QuantizationModel bussgang_epsilon(int bits);

/// Random phase-shifter matrix: entries scale * exp(j theta) with theta
/// drawn uniformly from the N_Q-bit phase set.
Mat draw_quantized_phasebook(int rows, int cols, int phase_bits, double scale,
                             Rng& rng);

/// Per-block RF combiner/precoders with constant-modulus quantized phases.
struct RFCodebook {
  std::vector<Mat> w_rf;               // per block: N_R x N_RF_R
  std::vector<std::vector<Mat>> f_rf;  // per block, per user: N_Tu x N_RFu_T
};

RFCodebook draw_codebooks(const ScenarioConfig& cfg, Rng& rng);

/// Per-block QPSK pilot symbols (power sigma_b^2) with their zero-padded
/// frequency-domain transforms.
struct PilotFrame {
  // pilots[m][u]: N_RFu_T x N_p time-domain symbols
  std::vector<std::vector<Mat>> pilots;
  // freq[m][u]: N_RFu_T x K, K-point DFT of the zero-padded block
  std::vector<std::vector<Mat>> freq;
};

PilotFrame draw_pilots(const ScenarioConfig& cfg, Rng& rng);

/// Block-diagonal Hermitian-PD covariance blkdiag(R_vv,1 ... R_vv,M).
struct BlockDiagCov {
  std::vector<Mat> blocks;

  int block_dim() const { return static_cast<int>(blocks.front().rows()); }
  int dim() const { return block_dim() * static_cast<int>(blocks.size()); }
  Mat dense() const;
  Mat inverse() const;
  /// x = C^{-1} b, block by block.
  Mat solve(const Mat& rhs) const;
  /// Draw v ~ CN(0, C) via per-block Cholesky factors.
  Vec sample(Rng& rng) const;
  double log_det() const;
};

/// Signal covariance before the ADC: Q_m = sum_u sum_n H_u(n) R_xx,u H_u^H(n)
/// with R_xx,u = sigma_b^2 F_u F_u^H.
Mat signal_covariance_Q(const std::vector<std::vector<Mat>>& taps_per_user,
                        const std::vector<Mat>& r_xx_per_user);

/// Quantizer distortion covariance
/// C_m = eps (1-eps) diag(W^H Q_m W + sigma_n^2 W^H W).
Mat quantizer_noise_covariance(const Mat& w_rf, const Mat& q_m,
                               double sigma_n2, double eps);

/// Equivalent noise covariance R_vv = eps^2 sigma_n^2 W^H W + C_m.
Mat effective_noise_covariance(const Mat& w_rf, const Mat& c_m, double eps,
                               double sigma_n2);

/// Per-block per-subcarrier measurement operators
/// Lambda_m[k] = (s_m[k]^T (x) eps W_m^H).
struct MeasurementOperators {
  std::vector<Mat> w_rf;           // per block
  std::vector<Mat> s;              // per block: N_T x K stacked F_u a_u[k]
  double eps = 1.0;

  int blocks() const { return static_cast<int>(w_rf.size()); }
  Mat lambda(int block, int k) const;  // N_RF_R x (N_R N_T)
};

/// Stacked pilot observation: outputs, sensing tensor, noise covariance and
/// the measurement operators used to build them.
struct MeasurementSet {
  Mat y;               // (M N_RF_R) x K
  SensingTensor xi;    // filled by build_sensing_tensor
  BlockDiagCov c_w;    // used by the estimators (analytic or sample mode)
  BlockDiagCov c_w_true;  // analytic covariance the noise was drawn from
  MeasurementOperators lambda;
  QuantizationModel quant;
};

/// Synthesize the Bussgang-linearized frequency-domain pilot observation.
/// noise_scale = 0 produces the noiseless linear model.
MeasurementSet synthesize_measurements(const ScenarioConfig& cfg,
                                       const MultiUserChannel& channel,
                                       const RFCodebook& codebooks,
                                       const PilotFrame& pilots, Rng& rng,
                                       double noise_scale = 1.0);

/// Fill meas.xi with Omega_m[k] = Lambda_m[k] Psi_MU[k] stacked over blocks.
/// psi_cache, when given, holds precomputed Psi_MU[k] slices.
void build_sensing_tensor(MeasurementSet& meas,
                          const SparsifyingDictionary& dict,
                          const std::vector<Mat>* psi_cache = nullptr);

/// Element-wise b-bit midrise quantization of real and imaginary parts,
/// step scaled to the per-component standard deviation of the input.
/// Validation-only path; never feeds the estimators.
Vec uniform_quantizer(const Vec& x, int bits);

/// Time-domain pilot output via length-K circular convolution of the tap
/// sequence with the precoded pilots (no noise).  Used to validate the
/// frequency-domain product model.
Mat time_domain_block_output(const ScenarioConfig& cfg,
                             const MultiUserChannel& channel,
                             const RFCodebook& codebooks,
                             const PilotFrame& pilots, int block);

}  // namespace thzest
