// SPDX-License-Identifier: Apache-2.0
#include "thzest/config.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#ifndef THZEST_REVISION
#define THZEST_REVISION "unknown"
#endif

namespace thzest {

using nlohmann::json;

void MaterialProps::validate() const {
  if (sigma_r_mm < 0.0)
    throw ConfigError("material '" + name + "': sigma_r_mm must be >= 0");
  if (kappa_per_cm < 0.0)
    throw ConfigError("material '" + name + "': kappa_per_cm must be >= 0");
  if (eta < 1.0)
    throw ConfigError("material '" + name + "': eta must be >= 1");
}

const std::vector<MaterialProps>& default_materials() {
  static const std::vector<MaterialProps> table = {
      {"Polycarbonate", 0.0, 23.0, 1.52},
      {"Polystyrene", 0.002, 2.0, 1.6},
      {"PVC", 0.028, 19.0, 1.68},
      {"Plaster s1", 0.05, 10.0, 2.0},
      {"Gypsum plaster", 0.13, 38.0, 1.4},
      {"Plaster s2", 0.15, 10.0, 2.0},
  };
  return table;
}

std::vector<MaterialProps> load_materials_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open materials CSV: " + path);
  std::string line;
  if (!std::getline(in, line))
    throw ConfigError("materials CSV is empty: " + path);
  // header: name,sigma_r_mm,kappa_per_cm,eta
  std::vector<MaterialProps> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    MaterialProps m;
    std::string field;
    if (!std::getline(ss, m.name, ',')) continue;
    if (!std::getline(ss, field, ','))
      throw ConfigError("materials CSV: missing sigma_r_mm in line: " + line);
    m.sigma_r_mm = std::stod(field);
    if (!std::getline(ss, field, ','))
      throw ConfigError("materials CSV: missing kappa_per_cm in line: " + line);
    m.kappa_per_cm = std::stod(field);
    if (!std::getline(ss, field, ','))
      throw ConfigError("materials CSV: missing eta in line: " + line);
    m.eta = std::stod(field);
    m.validate();
    out.push_back(std::move(m));
  }
  if (out.empty()) throw ConfigError("materials CSV has no rows: " + path);
  return out;
}

double ScenarioConfig::gsmp_threshold() const {
  if (gsmp_eps0) return *gsmp_eps0;
  // Published threshold 2 at M=20, N_RF_R=8, K=64, rescaled to the
  // configured problem size.
  const double full = 20.0 * 8.0 * 64.0;
  const double here = static_cast<double>(pilot_blocks) * rx_rf_chains *
                      subcarriers;
  return 2.0 * here / full;
}

void ScenarioConfig::validate() const {
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
  };
  require(num_users >= 1, "num_users must be >= 1");
  require(tx_antennas_per_user >= 1, "tx_antennas_per_user must be >= 1");
  require(rx_antennas >= 1, "rx_antennas must be >= 1");
  require(rx_rf_chains >= 1 && rx_rf_chains <= rx_antennas,
          "hybrid constraint violated: rx_rf_chains must satisfy 1 <= "
          "rx_rf_chains <= rx_antennas");
  require(tx_rf_chains >= 1 && tx_rf_chains <= tx_antennas_per_user,
          "hybrid constraint violated: tx_rf_chains must satisfy 1 <= "
          "tx_rf_chains <= tx_antennas_per_user");
  require(subcarriers == pilots_per_block + delay_taps - 1,
          "zero-padding structure requires subcarriers = pilots_per_block + "
          "delay_taps - 1 (keys: subcarriers, pilots_per_block, delay_taps)");
  require(pilot_blocks >= 1, "pilot_blocks must be >= 1");
  require(delay_taps >= 1, "delay_taps must be >= 1");
  require(grid_G_R >= rx_antennas,
          "grid_G_R must be >= rx_antennas");
  require(grid_G_Tu >= tx_antennas_per_user,
          "grid_G_Tu must be >= tx_antennas_per_user");
  require(nlos_clusters >= 0, "nlos_clusters must be >= 0");
  require(diffuse_rays >= 1, "diffuse_rays must be >= 1");
  require(carrier_hz > 0, "carrier_hz must be > 0");
  require(bandwidth_hz > 0, "bandwidth_hz must be > 0");
  require(distance_m > 0, "distance_m must be > 0");
  require(adc_bits == kInfiniteBits || adc_bits >= 1,
          "adc_bits must be >= 1 or \"inf\"");
  require(phase_bits >= 1, "phase_bits must be >= 1");
  require(rrc_rolloff >= 0.0 && rrc_rolloff <= 1.0,
          "rrc_rolloff must lie in [0, 1]");
  require(pilot_power > 0, "pilot_power must be > 0");
  require(noise_var > 0, "noise_var must be > 0");
  require(angle_spread_deg >= 0, "angle_spread must be >= 0");
  require(min_separation_deg >= 0, "min_separation must be >= 0");
  require(absorption_kabs >= 0, "absorption_kabs must be >= 0");
  require(bgsr_eps > 0, "bgsr_eps must be > 0");
  require(bgsr_kmax >= 1, "bgsr_kmax must be >= 1");
  require(psk_order == 8 || psk_order == 16 || psk_order == 64,
          "psk_order must be one of 8, 16, 64");
  require(data_vectors >= 1, "data_vectors must be >= 1");
}

ScenarioConfig desk_preset() { return ScenarioConfig{}; }

ScenarioConfig paper_preset() {
  ScenarioConfig cfg;
  cfg.num_users = 3;
  cfg.tx_antennas_per_user = 4;
  cfg.rx_antennas = 48;
  cfg.tx_rf_chains = 2;
  cfg.rx_rf_chains = 8;
  cfg.subcarriers = 64;
  cfg.pilot_blocks = 20;
  cfg.pilots_per_block = 62;
  cfg.delay_taps = 3;
  cfg.nlos_clusters = 3;
  cfg.diffuse_rays = 3;
  cfg.grid_G_R = 96;
  cfg.grid_G_Tu = 8;
  cfg.pilot_power = 1.0;
  cfg.bgsr_eps = 1.0;  // published thresholds at full scale
  cfg.bgsr_kmax = 20;
  return cfg;
}

void SweepSpec::validate() const {
  if (trials < 1) throw ConfigError("trials must be >= 1");
  if (algorithms.empty()) throw ConfigError("algorithms must be nonempty");
  static const std::set<std::string> known_algos = {"bgsr", "gsmp", "omp",
                                                    "sbl", "genie"};
  for (const auto& a : algorithms)
    if (!known_algos.count(a))
      throw ConfigError("unknown algorithm: " + a);
  static const std::set<std::string> known_axes = {
      "snr", "pilot_blocks", "users", "adc_bits", "subcarriers",
      "diffuse_rays"};
  if (!known_axes.count(sweep_axis))
    throw ConfigError("unknown sweep_axis: " + sweep_axis);
  if (axis_values().empty())
    throw ConfigError(sweep_axis == "snr"
                          ? "snr_db_list must be nonempty"
                          : "sweep_values must be nonempty for axis " +
                                sweep_axis);
}

namespace {

int parse_adc_bits(const json& v) {
  if (v.is_string()) {
    if (v.get<std::string>() == "inf") return kInfiniteBits;
    throw ConfigError("adc_bits: expected integer or \"inf\"");
  }
  return v.get<int>();
}

PulseShape parse_psf(const std::string& s) {
  if (s == "RRC" || s == "rrc") return PulseShape::RRC;
  if (s == "Rect" || s == "rect") return PulseShape::Rect;
  throw ConfigError("psf_kind: expected \"rrc\" or \"rect\", got " + s);
}

DictionaryMode parse_dict_mode(const std::string& s) {
  if (s == "on_grid") return DictionaryMode::OnGrid;
  if (s == "tbod") return DictionaryMode::TBoD;
  throw ConfigError("dictionary_mode: expected \"on_grid\" or \"tbod\", got " +
                    s);
}

NoiseCovMode parse_noise_mode(const std::string& s) {
  if (s == "analytic") return NoiseCovMode::Analytic;
  if (s == "sample") return NoiseCovMode::Sample;
  throw ConfigError("noise_cov_mode: expected \"analytic\" or \"sample\"");
}

}  // namespace

LoadedConfig parse_config_json(const std::string& text) {
  json j;
  std::string trimmed = text;
  trimmed.erase(0, trimmed.find_first_not_of(" \t\r\n"));
  if (trimmed.empty()) {
    j = json::object();
  } else {
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
  }
  if (!j.is_object()) throw ConfigError("config root must be a JSON object");

  LoadedConfig out;
  if (j.contains("preset")) {
    const std::string p = j.at("preset").get<std::string>();
    if (p == "desk")
      out.scenario = desk_preset();
    else if (p == "paper")
      out.scenario = paper_preset();
    else
      throw ConfigError("unknown preset: " + p);
  }
  ScenarioConfig& c = out.scenario;
  SweepSpec& s = out.sweep;

  bool k_set = false, np_set = false;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    const json& v = it.value();
    try {
      if (key == "preset") continue;
      else if (key == "num_users") c.num_users = v.get<int>();
      else if (key == "tx_antennas_per_user") c.tx_antennas_per_user = v.get<int>();
      else if (key == "rx_antennas") c.rx_antennas = v.get<int>();
      else if (key == "tx_rf_chains") c.tx_rf_chains = v.get<int>();
      else if (key == "rx_rf_chains") c.rx_rf_chains = v.get<int>();
      else if (key == "subcarriers") { c.subcarriers = v.get<int>(); k_set = true; }
      else if (key == "pilot_blocks") c.pilot_blocks = v.get<int>();
      else if (key == "pilots_per_block") { c.pilots_per_block = v.get<int>(); np_set = true; }
      else if (key == "delay_taps") c.delay_taps = v.get<int>();
      else if (key == "nlos_clusters") c.nlos_clusters = v.get<int>();
      else if (key == "diffuse_rays") c.diffuse_rays = v.get<int>();
      else if (key == "carrier_hz") c.carrier_hz = v.get<double>();
      else if (key == "bandwidth_hz") c.bandwidth_hz = v.get<double>();
      else if (key == "distance_m") c.distance_m = v.get<double>();
      else if (key == "tx_gain") c.tx_gain = v.get<double>();
      else if (key == "rx_gain") c.rx_gain = v.get<double>();
      else if (key == "grid_G_R") c.grid_G_R = v.get<int>();
      else if (key == "grid_G_Tu") c.grid_G_Tu = v.get<int>();
      else if (key == "adc_bits") c.adc_bits = parse_adc_bits(v);
      else if (key == "phase_bits") c.phase_bits = v.get<int>();
      else if (key == "psf_kind") c.psf_kind = parse_psf(v.get<std::string>());
      else if (key == "rrc_rolloff") c.rrc_rolloff = v.get<double>();
      else if (key == "pilot_power") c.pilot_power = v.get<double>();
      else if (key == "noise_var") c.noise_var = v.get<double>();
      else if (key == "angle_spread") c.angle_spread_deg = v.get<double>();
      else if (key == "min_separation") c.min_separation_deg = v.get<double>();
      else if (key == "rng_seed") c.rng_seed = v.get<std::uint64_t>();
      else if (key == "normalize_channel") c.normalize_channel = v.get<bool>();
      else if (key == "noise_cov_mode") c.noise_cov_mode = parse_noise_mode(v.get<std::string>());
      else if (key == "absorption_kabs") c.absorption_kabs = v.get<double>();
      else if (key == "absorption_csv") c.absorption_csv = v.get<std::string>();
      else if (key == "materials_csv") c.materials_csv = v.get<std::string>();
      else if (key == "bgsr_eps") c.bgsr_eps = v.get<double>();
      else if (key == "bgsr_kmax") c.bgsr_kmax = v.get<int>();
      else if (key == "gsmp_eps0") c.gsmp_eps0 = v.get<double>();
      else if (key == "omp_max_atoms") c.omp_max_atoms = v.get<int>();
      else if (key == "data_vectors") c.data_vectors = v.get<int>();
      else if (key == "psk_order") c.psk_order = v.get<int>();
      // sweep
      else if (key == "snr_db_list") s.snr_db_list = v.get<std::vector<double>>();
      else if (key == "trials") s.trials = v.get<int>();
      else if (key == "algorithms") s.algorithms = v.get<std::vector<std::string>>();
      else if (key == "sweep_axis") s.sweep_axis = v.get<std::string>();
      else if (key == "sweep_values") s.sweep_values = v.get<std::vector<double>>();
      else if (key == "dictionary_mode") s.dictionary_mode = parse_dict_mode(v.get<std::string>());
      else if (key == "output_path") s.output_path = v.get<std::string>();
      else throw ConfigError("unknown config key: " + key);
    } catch (const json::exception& e) {
      throw ConfigError("config key '" + key + "': " + e.what());
    }
  }
  // keep K = N_p + L - 1 when only one of the pair was given
  if (k_set && !np_set)
    c.pilots_per_block = c.subcarriers - c.delay_taps + 1;
  else if (np_set && !k_set)
    c.subcarriers = c.pilots_per_block + c.delay_taps - 1;

  c.validate();
  s.validate();
  return out;
}

LoadedConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_json(ss.str());
}

namespace {

json to_json(const ScenarioConfig& c, const SweepSpec& s) {
  json j;
  j["num_users"] = c.num_users;
  j["tx_antennas_per_user"] = c.tx_antennas_per_user;
  j["rx_antennas"] = c.rx_antennas;
  j["tx_rf_chains"] = c.tx_rf_chains;
  j["rx_rf_chains"] = c.rx_rf_chains;
  j["subcarriers"] = c.subcarriers;
  j["pilot_blocks"] = c.pilot_blocks;
  j["pilots_per_block"] = c.pilots_per_block;
  j["delay_taps"] = c.delay_taps;
  j["nlos_clusters"] = c.nlos_clusters;
  j["diffuse_rays"] = c.diffuse_rays;
  j["carrier_hz"] = c.carrier_hz;
  j["bandwidth_hz"] = c.bandwidth_hz;
  j["distance_m"] = c.distance_m;
  j["tx_gain"] = c.tx_gain;
  j["rx_gain"] = c.rx_gain;
  j["grid_G_R"] = c.grid_G_R;
  j["grid_G_Tu"] = c.grid_G_Tu;
  j["adc_bits"] = c.adc_bits;
  j["phase_bits"] = c.phase_bits;
  j["psf_kind"] = to_string(c.psf_kind);
  j["rrc_rolloff"] = c.rrc_rolloff;
  j["pilot_power"] = c.pilot_power;
  j["noise_var"] = c.noise_var;
  j["angle_spread"] = c.angle_spread_deg;
  j["min_separation"] = c.min_separation_deg;
  j["rng_seed"] = c.rng_seed;
  j["normalize_channel"] = c.normalize_channel;
  j["noise_cov_mode"] = c.noise_cov_mode == NoiseCovMode::Analytic ? "analytic" : "sample";
  j["absorption_kabs"] = c.absorption_kabs;
  j["absorption_csv"] = c.absorption_csv;
  j["materials_csv"] = c.materials_csv;
  j["bgsr_eps"] = c.bgsr_eps;
  j["bgsr_kmax"] = c.bgsr_kmax;
  j["gsmp_eps0"] = c.gsmp_eps0 ? json(*c.gsmp_eps0) : json();
  j["omp_max_atoms"] = c.omp_max_atoms;
  j["data_vectors"] = c.data_vectors;
  j["psk_order"] = c.psk_order;
  j["snr_db_list"] = s.snr_db_list;
  j["trials"] = s.trials;
  j["algorithms"] = s.algorithms;
  j["sweep_axis"] = s.sweep_axis;
  j["sweep_values"] = s.sweep_values;
  j["dictionary_mode"] = to_string(s.dictionary_mode);
  return j;
}

}  // namespace

std::string config_hash(const ScenarioConfig& cfg, const SweepSpec& sweep) {
  const std::string dump = to_json(cfg, sweep).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char ch : dump) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return std::string(buf);
}

const char* revision_tag() { return THZEST_REVISION; }

const char* to_string(PulseShape p) {
  return p == PulseShape::RRC ? "rrc" : "rect";
}
const char* to_string(DictionaryMode m) {
  return m == DictionaryMode::OnGrid ? "on_grid" : "tbod";
}

}  // namespace thzest
