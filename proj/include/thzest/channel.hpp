// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <utility>
#include <vector>

#include "thzest/absorption.hpp"
#include "thzest/common.hpp"
#include "thzest/config.hpp"

namespace thzest {

// ---------------------------------------------------------------------------
// Dual-wideband geometry primitives
// ---------------------------------------------------------------------------

/// Frequency of the k-th subcarrier, k in 1..K:  f_c + (k - (K+1)/2) B / K.
double subcarrier_frequency(int k, const ScenarioConfig& cfg);
double subcarrier_frequency(int k, double carrier_hz, double bandwidth_hz,
                            int num_subcarriers);

/// Effective spatial angle at relative frequency rho_k = f_k/f_c:
/// arccos(clamp(rho_k cos(phi), -1, 1)).
double effective_aoa(double phi_rad, double rho_k);

/// Frequency-dependent ULA steering vector: entry n = exp(-j pi n rho_k
/// cos(phi)) / sqrt(N).  Unit Euclidean norm by construction.
Vec steering_vector(double phi_rad, double f_hz, int num_antennas,
                    double carrier_hz);

/// Derivative of the steering vector with respect to the angle.
Vec steering_vector_derivative(double phi_rad, double f_hz, int num_antennas,
                               double carrier_hz);

/// Free-space power gain (c / (4 pi f d))^2.
double free_space_loss(double f_hz, double distance_m);

/// Molecular absorption power gain exp(-k_abs(f) d).
double molecular_absorption_loss(double f_hz, double distance_m,
                                 const AbsorptionModel& kabs);

/// First-order reflection coefficient: Fresnel quotient with the complex
/// characteristic impedance of the medium, times the Rayleigh roughness
/// factor.  The refraction angle uses the principal complex arcsin branch.
cxd reflection_coefficient(double f_hz, const MaterialProps& mat,
                           double incidence_rad);

/// Rayleigh roughness factor exp(-(4 pi f sigma_r cos(nu_i) / c)^2 / 2).
double rayleigh_roughness_factor(double f_hz, double sigma_r_m,
                                 double incidence_rad);

/// Pulse-shaping spectral coefficient for DFT bin k (0-based):
/// beta_tau[k] = sum_{l=0}^{K-1} p(l T_s - tau) e^{-j 2 pi k l / K}.
cxd pulse_shaping_coefficient(int bin, double tau_s, PulseShape psf,
                              const ScenarioConfig& cfg);

/// beta_tau for all K bins at once (same sum, evaluated per bin).
Vec pulse_shaping_spectrum(double tau_s, PulseShape psf,
                           const ScenarioConfig& cfg);

/// Root-raised-cosine impulse response, unit symbol time, at t/T_s = x.
double rrc_impulse(double x, double rolloff);

// ---------------------------------------------------------------------------
// Path-level channel description
// ---------------------------------------------------------------------------

struct PathComponent {
  enum class Kind { LoS, NLoS };
  Kind kind = Kind::LoS;
  int cluster_index = 0;  // z (NLoS)
  int ray_index = 0;      // j (NLoS)
  double aoa_deg = 0.0;
  double aod_deg = 0.0;
  double delay_s = 0.0;
  double distance_m = 0.0;
  MaterialProps material;       // NLoS only
  double incidence_deg = 0.0;   // NLoS only
  double gain_phase_rad = 0.0;  // uniform on (-pi, pi]
};

struct MultiUserChannel {
  std::vector<Mat> cfr;   // K slices, each N_R x (U N_Tu)
  std::vector<Mat> taps;  // K-point inverse transform of cfr along k
  std::vector<std::vector<PathComponent>> paths;  // per user
  double scale = 1.0;     // applied energy-normalization factor

  int num_subcarriers() const { return static_cast<int>(cfr.size()); }
};

/// Two-component GMM used to draw per-user AoA/AoD sets.
struct UserAngleGmm {
  double mean_aoa_deg[2];
  double mean_aod_deg[2];
  double weight_aoa[2];  // sums to 1
  double weight_aod[2];  // sums to 1
};

struct GmmAngles {
  std::vector<UserAngleGmm> gmm;  // per user
  // per user, per path: (aoa_deg, aod_deg); entry 0 is the LoS path,
  // followed by nlos_clusters * diffuse_rays NLoS entries.
  std::vector<std::vector<std::pair<double, double>>> path_angles;
};

/// Draw per-user angle sets from two-component GMMs with user mean
/// separation >= min_separation_deg (rejection resampling, bounded budget).
GmmAngles draw_gmm_angles(const ScenarioConfig& cfg, Rng& rng);

/// Expand drawn angles into full path descriptions (delays, materials,
/// incidence angles, phases).
std::vector<std::vector<PathComponent>> draw_paths(
    const ScenarioConfig& cfg, const GmmAngles& angles, Rng& rng,
    const std::vector<MaterialProps>& materials = default_materials());

/// Assemble the per-subcarrier multi-user CFR from path descriptions:
/// LoS rank-one term plus the normalized double sum over clusters and rays.
MultiUserChannel build_mu_cfr(const ScenarioConfig& cfg,
                              const std::vector<std::vector<PathComponent>>& paths,
                              const AbsorptionModel& kabs);

/// Convenience: angles -> paths -> CFR with the config's absorption model.
MultiUserChannel generate_channel(const ScenarioConfig& cfg, Rng& rng);

/// Absorption model selected by the config (CSV table or constant).
AbsorptionModel make_absorption_model(const ScenarioConfig& cfg);

}  // namespace thzest
