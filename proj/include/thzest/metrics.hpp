// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "thzest/common.hpp"
#include "thzest/dictionary.hpp"
#include "thzest/estimators.hpp"
#include "thzest/pilot.hpp"

namespace thzest {

/// sum_k ||H_hat[k] - H[k]||_F^2 / sum_k ||H[k]||_F^2.
double nmse(const std::vector<Mat>& h_hat, const std::vector<Mat>& h_true);

struct BCRBResult {
  Mat fim;             // total_atoms x total_atoms Bayesian FIM
  double bound = 0.0;  // MSE lower bound Tr(Delta I^{-1} Delta^H)
  double bound_nmse = 0.0;  // bound / E||H||_F^2
};

/// Bayesian bound with plug-in prior Gamma_hat:
/// I = sum_k Xi_k^H C_w^{-1} Xi_k + Gamma_hat^{-1},
/// bound = sum_k Tr(Psi[k] I^{-1} Psi[k]^H).
BCRBResult bcrb(const SensingTensor& xi, const BlockDiagCov& c_w,
                const RVec& gamma_hat, const SparsifyingDictionary& dict,
                double mean_channel_energy);

/// Same bound with a precomputed dictionary Gram sum_k Psi_k^H Psi_k.
BCRBResult bcrb_with_gram(const SensingTensor& xi, const BlockDiagCov& c_w,
                          const RVec& gamma_hat, const Mat& psi_gram,
                          double mean_channel_energy);

/// Gray-coded PSK constellation (modulus 1).
std::vector<cxd> psk_constellation(int order);

struct BerResult {
  double ber = 0.0;
  long bit_errors = 0;
  long bits = 0;
};

/// Simulate SC-FDE data transmission through the true channel and the hybrid
/// front end, equalize per subcarrier with W = (He^H He + sigma^2 I)^{-1} He^H
/// built from the channel estimate, and hard-detect Gray-coded PSK symbols.
BerResult mmse_equalize_detect(const ScenarioConfig& cfg,
                               const MultiUserChannel& channel,
                               const std::vector<Mat>& h_hat,
                               const RFCodebook& codebooks,
                               const QuantizationModel& quant,
                               const BlockDiagCov& c_w_true, Rng& rng);

}  // namespace thzest
