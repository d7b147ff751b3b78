// SPDX-License-Identifier: Apache-2.0
#include "thzest/channel.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

namespace thzest {

using constants::c_light;
using constants::pi;
using constants::z0_free_space;

double subcarrier_frequency(int k, double carrier_hz, double bandwidth_hz,
                            int num_subcarriers) {
  if (k < 1 || k > num_subcarriers)
    throw std::invalid_argument("subcarrier index out of range 1..K");
  return carrier_hz +
         (k - (num_subcarriers + 1) / 2.0) * bandwidth_hz / num_subcarriers;
}

double subcarrier_frequency(int k, const ScenarioConfig& cfg) {
  return subcarrier_frequency(k, cfg.carrier_hz, cfg.bandwidth_hz,
                              cfg.subcarriers);
}

double effective_aoa(double phi_rad, double rho_k) {
  const double x = std::clamp(rho_k * std::cos(phi_rad), -1.0, 1.0);
  return std::acos(x);
}

Vec steering_vector(double phi_rad, double f_hz, int num_antennas,
                    double carrier_hz) {
  if (num_antennas < 1)
    throw std::invalid_argument("steering vector needs N >= 1");
  const double rho = f_hz / carrier_hz;
  const double psi = pi * rho * std::cos(phi_rad);
  const double norm = 1.0 / std::sqrt(static_cast<double>(num_antennas));
  Vec a(num_antennas);
  for (int n = 0; n < num_antennas; ++n)
    a(n) = std::polar(norm, -psi * n);
  return a;
}

Vec steering_vector_derivative(double phi_rad, double f_hz, int num_antennas,
                               double carrier_hz) {
  if (num_antennas < 1)
    throw std::invalid_argument("steering vector needs N >= 1");
  const double rho = f_hz / carrier_hz;
  const double psi = pi * rho * std::cos(phi_rad);
  const double norm = 1.0 / std::sqrt(static_cast<double>(num_antennas));
  const double dpsi = pi * rho * std::sin(phi_rad);  // -d(psi)/d(phi)
  Vec b(num_antennas);
  for (int n = 0; n < num_antennas; ++n) {
    // d/dphi exp(-j n pi rho cos phi) = j n pi rho sin(phi) exp(...)
    b(n) = cxd(0.0, n * dpsi) * std::polar(norm, -psi * n);
  }
  return b;
}

double free_space_loss(double f_hz, double distance_m) {
  if (f_hz <= 0.0 || distance_m <= 0.0)
    throw std::invalid_argument("free_space_loss needs f > 0 and d > 0");
  const double x = c_light / (4.0 * pi * f_hz * distance_m);
  return x * x;
}

double molecular_absorption_loss(double f_hz, double distance_m,
                                 const AbsorptionModel& kabs) {
  if (f_hz <= 0.0 || distance_m <= 0.0)
    throw std::invalid_argument(
        "molecular_absorption_loss needs f > 0 and d > 0");
  return std::exp(-kabs.kabs(f_hz) * distance_m);
}

double rayleigh_roughness_factor(double f_hz, double sigma_r_m,
                                 double incidence_rad) {
  const double g =
      4.0 * pi * f_hz * sigma_r_m * std::cos(incidence_rad) / c_light;
  return std::exp(-0.5 * g * g);
}

cxd reflection_coefficient(double f_hz, const MaterialProps& mat,
                           double incidence_rad) {
  if (incidence_rad < 0.0 || incidence_rad >= pi / 2.0)
    throw std::invalid_argument("incidence angle must lie in [0, pi/2)");
  const double kappa_per_m = mat.kappa_per_cm * 100.0;
  const double q = kappa_per_m * c_light / (4.0 * pi * f_hz);
  // characteristic impedance of the reflecting medium
  const cxd denom = cxd(mat.eta * mat.eta - q, -2.0 * mat.eta * q);
  const cxd z = std::sqrt(cxd(constants::mu0, 0.0) /
                          (cxd(constants::eps0, 0.0) * denom));
  const cxd z0 = cxd(z0_free_space, 0.0);
  // principal-branch complex refraction angle
  const cxd nu_r = std::asin(std::sin(incidence_rad) * z / z0);
  const double cos_i = std::cos(incidence_rad);
  const cxd cos_r = std::cos(nu_r);
  const cxd fresnel = (z * cos_i - z0 * cos_r) / (z * cos_i + z0 * cos_r);
  const cxd upsilon =
      fresnel * rayleigh_roughness_factor(f_hz, mat.sigma_r_mm * 1e-3,
                                          incidence_rad);
  if (std::abs(upsilon) > 1.0 + 1e-9) {
    static bool warned = false;
    if (!warned) {
      std::cerr << "warning: |reflection coefficient| = " << std::abs(upsilon)
                << " > 1 for material '" << mat.name << "'\n";
      warned = true;
    }
  }
  return upsilon;
}

double rrc_impulse(double x, double rolloff) {
  const double a = rolloff;
  if (a <= 0.0) {
    if (std::abs(x) < 1e-12) return 1.0;
    return std::sin(pi * x) / (pi * x);
  }
  if (std::abs(x) < 1e-12) return 1.0 - a + 4.0 * a / pi;
  const double singular = 1.0 / (4.0 * a);
  if (std::abs(std::abs(x) - singular) < 1e-9) {
    return a / std::sqrt(2.0) *
           ((1.0 + 2.0 / pi) * std::sin(pi / (4.0 * a)) +
            (1.0 - 2.0 / pi) * std::cos(pi / (4.0 * a)));
  }
  const double num =
      std::sin(pi * x * (1.0 - a)) + 4.0 * a * x * std::cos(pi * x * (1.0 + a));
  const double den = pi * x * (1.0 - std::pow(4.0 * a * x, 2.0));
  return num / den;
}

namespace {

double pulse_sample(double t_over_ts, PulseShape psf, double rolloff) {
  if (psf == PulseShape::Rect)
    return (t_over_ts >= 0.0 && t_over_ts < 1.0) ? 1.0 : 0.0;
  return rrc_impulse(t_over_ts, rolloff);
}

}  // namespace

cxd pulse_shaping_coefficient(int bin, double tau_s, PulseShape psf,
                              const ScenarioConfig& cfg) {
  const int k_total = cfg.subcarriers;
  const double ts = cfg.sample_time();
  cxd beta(0.0, 0.0);
  for (int l = 0; l < k_total; ++l) {
    const double p = pulse_sample((l * ts - tau_s) / ts, psf, cfg.rrc_rolloff);
    beta += p * std::polar(1.0, -2.0 * pi * bin * l / k_total);
  }
  return beta;
}

Vec pulse_shaping_spectrum(double tau_s, PulseShape psf,
                           const ScenarioConfig& cfg) {
  const int k_total = cfg.subcarriers;
  const double ts = cfg.sample_time();
  Eigen::VectorXd samples(k_total);
  for (int l = 0; l < k_total; ++l)
    samples(l) = pulse_sample((l * ts - tau_s) / ts, psf, cfg.rrc_rolloff);
  Vec beta = Vec::Zero(k_total);
  for (int bin = 0; bin < k_total; ++bin) {
    cxd acc(0.0, 0.0);
    for (int l = 0; l < k_total; ++l)
      acc += samples(l) * std::polar(1.0, -2.0 * pi * bin * l / k_total);
    beta(bin) = acc;
  }
  return beta;
}

namespace {

double circular_distance_deg(double a, double b) {
  double d = std::fmod(std::abs(a - b), 360.0);
  return std::min(d, 360.0 - d);
}

double draw_gmm_sample(const double mean[2], const double weight[2],
                       double sigma_deg, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int comp = u(rng) < weight[0] ? 0 : 1;
  if (sigma_deg <= 0.0) return mean[comp];
  std::normal_distribution<double> n(mean[comp], sigma_deg);
  return n(rng);
}

}  // namespace

GmmAngles draw_gmm_angles(const ScenarioConfig& cfg, Rng& rng) {
  if (cfg.num_users < 1) throw std::invalid_argument("need at least one user");
  const int num_paths = 1 + cfg.nlos_clusters * cfg.diffuse_rays;
  std::uniform_real_distribution<double> mean_dist(-180.0, 180.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  GmmAngles out;
  out.gmm.resize(cfg.num_users);

  // Component means per user, rejection-resampled until every pair of means
  // belonging to distinct users is separated by at least d_min.
  constexpr int kRetryBudget = 1000;
  for (int side = 0; side < 2; ++side) {
    bool ok = false;
    for (int attempt = 0; attempt < kRetryBudget && !ok; ++attempt) {
      for (auto& g : out.gmm) {
        double* m = side == 0 ? g.mean_aoa_deg : g.mean_aod_deg;
        m[0] = mean_dist(rng);
        m[1] = mean_dist(rng);
      }
      ok = true;
      for (int u = 0; u < cfg.num_users && ok; ++u)
        for (int v = u + 1; v < cfg.num_users && ok; ++v) {
          const double* mu = side == 0 ? out.gmm[u].mean_aoa_deg
                                       : out.gmm[u].mean_aod_deg;
          const double* mv = side == 0 ? out.gmm[v].mean_aoa_deg
                                       : out.gmm[v].mean_aod_deg;
          for (int i = 0; i < 2 && ok; ++i)
            for (int j = 0; j < 2 && ok; ++j)
              if (circular_distance_deg(mu[i], mv[j]) <
                  cfg.min_separation_deg)
                ok = false;
        }
    }
    if (!ok)
      throw ConfigError(
          "could not satisfy min_separation between user mean angles within "
          "the retry budget; reduce min_separation or num_users");
  }
  for (auto& g : out.gmm) {
    g.weight_aoa[0] = unit(rng);
    g.weight_aoa[1] = 1.0 - g.weight_aoa[0];
    g.weight_aod[0] = unit(rng);
    g.weight_aod[1] = 1.0 - g.weight_aod[0];
  }

  out.path_angles.resize(cfg.num_users);
  for (int u = 0; u < cfg.num_users; ++u) {
    auto& g = out.gmm[u];
    out.path_angles[u].reserve(num_paths);
    for (int p = 0; p < num_paths; ++p) {
      const double aoa = draw_gmm_sample(g.mean_aoa_deg, g.weight_aoa,
                                         cfg.angle_spread_deg, rng);
      const double aod = draw_gmm_sample(g.mean_aod_deg, g.weight_aod,
                                         cfg.angle_spread_deg, rng);
      out.path_angles[u].emplace_back(aoa, aod);
    }
  }
  return out;
}

std::vector<std::vector<PathComponent>> draw_paths(
    const ScenarioConfig& cfg, const GmmAngles& angles, Rng& rng,
    const std::vector<MaterialProps>& materials) {
  if (static_cast<int>(angles.path_angles.size()) != cfg.num_users)
    throw std::invalid_argument("angle set does not match num_users");
  if (materials.empty())
    throw std::invalid_argument("material table is empty");

  const double ts = cfg.sample_time();
  std::uniform_real_distribution<double> phase(-pi, pi);
  std::uniform_real_distribution<double> delay(0.0,
                                               (cfg.delay_taps - 1) * ts);
  std::uniform_real_distribution<double> incidence(20.0, 70.0);
  std::uniform_int_distribution<int> mat_pick(0,
                                              static_cast<int>(materials.size()) - 1);

  std::vector<std::vector<PathComponent>> paths(cfg.num_users);
  for (int u = 0; u < cfg.num_users; ++u) {
    const auto& ua = angles.path_angles[u];
    PathComponent los;
    los.kind = PathComponent::Kind::LoS;
    los.aoa_deg = ua[0].first;
    los.aod_deg = ua[0].second;
    los.delay_s = 0.0;  // frame-aligned
    los.distance_m = cfg.distance_m;
    los.gain_phase_rad = -phase(rng);  // uniform on (-pi, pi]
    paths[u].push_back(los);

    int idx = 1;
    for (int z = 0; z < cfg.nlos_clusters; ++z) {
      const MaterialProps mat = materials[mat_pick(rng)];
      const double nu_i = incidence(rng);
      for (int j = 0; j < cfg.diffuse_rays; ++j, ++idx) {
        PathComponent p;
        p.kind = PathComponent::Kind::NLoS;
        p.cluster_index = z;
        p.ray_index = j;
        p.aoa_deg = ua[idx].first;
        p.aod_deg = ua[idx].second;
        p.delay_s = delay(rng);
        p.distance_m = cfg.distance_m + c_light * p.delay_s;
        p.material = mat;
        p.incidence_deg = nu_i;
        p.gain_phase_rad = -phase(rng);
        paths[u].push_back(p);
      }
    }
  }
  return paths;
}

AbsorptionModel make_absorption_model(const ScenarioConfig& cfg) {
  if (!cfg.absorption_csv.empty())
    return AbsorptionModel::from_csv(cfg.absorption_csv);
  return AbsorptionModel::constant(cfg.absorption_kabs);
}

MultiUserChannel build_mu_cfr(const ScenarioConfig& cfg,
                              const std::vector<std::vector<PathComponent>>& paths,
                              const AbsorptionModel& kabs) {
  if (static_cast<int>(paths.size()) != cfg.num_users)
    throw std::invalid_argument("paths size does not match num_users");
  for (const auto& pu : paths)
    if (pu.empty())
      throw std::invalid_argument("every user needs at least one path");

  const int num_k = cfg.subcarriers;
  const int n_r = cfg.rx_antennas;
  const int n_tu = cfg.tx_antennas_per_user;
  const int n_t = cfg.total_tx_antennas();
  const double gain_tx_user = cfg.tx_gain / cfg.num_users;
  const double gain_rx = cfg.rx_gain;
  const double deg = pi / 180.0;

  MultiUserChannel ch;
  ch.cfr.assign(num_k, Mat::Zero(n_r, n_t));
  ch.paths = paths;

  const double los_scale = std::sqrt(static_cast<double>(n_tu) * n_r) *
                           gain_tx_user * gain_rx;
  const double nlos_scale =
      cfg.nlos_clusters > 0
          ? std::sqrt(static_cast<double>(n_tu) * n_r /
                      (cfg.nlos_clusters * cfg.diffuse_rays)) *
                gain_tx_user * gain_rx
          : 0.0;

  for (int u = 0; u < cfg.num_users; ++u) {
    for (const auto& p : paths[u]) {
      const Vec beta = pulse_shaping_spectrum(p.delay_s, cfg.psf_kind, cfg);
      const cxd phase = std::polar(1.0, p.gain_phase_rad);
      for (int bin = 0; bin < num_k; ++bin) {
        const double f = subcarrier_frequency(bin + 1, cfg);
        const double amp = std::sqrt(free_space_loss(f, p.distance_m) *
                                     molecular_absorption_loss(f, p.distance_m,
                                                               kabs));
        cxd alpha = amp * phase;
        double scale = los_scale;
        if (p.kind == PathComponent::Kind::NLoS) {
          alpha *= reflection_coefficient(f, p.material,
                                          p.incidence_deg * deg);
          scale = nlos_scale;
        }
        const Vec a_r = steering_vector(p.aoa_deg * deg, f, n_r,
                                        cfg.carrier_hz);
        const Vec a_t = steering_vector(p.aod_deg * deg, f, n_tu,
                                        cfg.carrier_hz);
        ch.cfr[bin].block(0, u * n_tu, n_r, n_tu).noalias() +=
            (scale * alpha * beta(bin)) * (a_r * a_t.adjoint());
      }
    }
  }

  if (cfg.normalize_channel) {
    double energy = 0.0;
    for (const auto& h : ch.cfr) energy += h.squaredNorm();
    if (energy > 0.0) {
      ch.scale = std::sqrt(static_cast<double>(n_r) * n_t * num_k / energy);
      for (auto& h : ch.cfr) h *= ch.scale;
    }
  }

  // K-point inverse transform along the subcarrier axis
  ch.taps.assign(num_k, Mat::Zero(n_r, n_t));
  for (int l = 0; l < num_k; ++l) {
    for (int bin = 0; bin < num_k; ++bin) {
      const cxd w = std::polar(1.0 / num_k, 2.0 * pi * bin * l / num_k);
      ch.taps[l].noalias() += w * ch.cfr[bin];
    }
  }
  return ch;
}

MultiUserChannel generate_channel(const ScenarioConfig& cfg, Rng& rng) {
  const auto materials = cfg.materials_csv.empty()
                             ? default_materials()
                             : load_materials_csv(cfg.materials_csv);
  const auto angles = draw_gmm_angles(cfg, rng);
  const auto paths = draw_paths(cfg, angles, rng, materials);
  return build_mu_cfr(cfg, paths, make_absorption_model(cfg));
}

}  // namespace thzest
