// SPDX-License-Identifier: Apache-2.0
//
// Monte Carlo driver for the dual-wideband THz channel-estimation library.
//
//   thzest run      --config cfg.json --out results.csv [...]
//   thzest validate --config cfg.json
//   thzest bcrb     --config cfg.json --out bound.csv

#include <CLI11.hpp>

#include <iostream>
#include <sstream>

#include "thzest/config.hpp"
#include "thzest/sweep.hpp"

namespace {

std::vector<double> parse_list(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) out.push_back(std::stod(tok));
  }
  return out;
}

std::vector<std::string> parse_names(const std::string& csv) {
  std::vector<std::string> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) out.push_back(tok);
  }
  return out;
}

struct CommonArgs {
  std::string config_path;
  std::string preset;
  std::string out_path;
  std::string snr_list;
  std::string algorithms;
  std::string adc_bits;
  std::string psf;
  std::string dict_mode;
  int trials = -1;
  long long seed = -1;
  int threads = 0;
};

thzest::LoadedConfig resolve(const CommonArgs& a) {
  thzest::LoadedConfig lc;
  if (!a.config_path.empty()) {
    lc = thzest::load_config(a.config_path);
  } else if (!a.preset.empty()) {
    lc.scenario = a.preset == "paper" ? thzest::paper_preset()
                                      : thzest::desk_preset();
  }
  if (!a.preset.empty() && !a.config_path.empty()) {
    // preset flag overrides the scenario block but keeps sweep settings
    thzest::SweepSpec sweep = lc.sweep;
    lc.scenario = a.preset == "paper" ? thzest::paper_preset()
                                      : thzest::desk_preset();
    lc.sweep = sweep;
  }
  if (!a.snr_list.empty()) lc.sweep.snr_db_list = parse_list(a.snr_list);
  if (a.trials > 0) lc.sweep.trials = a.trials;
  if (a.seed >= 0) lc.scenario.rng_seed = static_cast<std::uint64_t>(a.seed);
  if (!a.algorithms.empty()) lc.sweep.algorithms = parse_names(a.algorithms);
  if (!a.adc_bits.empty()) {
    lc.scenario.adc_bits = a.adc_bits == "inf" ? thzest::kInfiniteBits
                                               : std::stoi(a.adc_bits);
  }
  if (!a.psf.empty()) {
    if (a.psf == "rrc") lc.scenario.psf_kind = thzest::PulseShape::RRC;
    else if (a.psf == "rect") lc.scenario.psf_kind = thzest::PulseShape::Rect;
    else throw thzest::ConfigError("--psf expects rrc or rect");
  }
  if (!a.dict_mode.empty()) {
    if (a.dict_mode == "on_grid")
      lc.sweep.dictionary_mode = thzest::DictionaryMode::OnGrid;
    else if (a.dict_mode == "tbod")
      lc.sweep.dictionary_mode = thzest::DictionaryMode::TBoD;
    else throw thzest::ConfigError("--dict expects on_grid or tbod");
  }
  lc.scenario.validate();
  lc.sweep.validate();
  return lc;
}

void add_common(CLI::App* cmd, CommonArgs& a, bool needs_out) {
  cmd->add_option("--config", a.config_path, "JSON scenario/sweep config");
  cmd->add_option("--preset", a.preset, "desk|paper")
      ->check(CLI::IsMember({"desk", "paper"}));
  cmd->add_option("--snr", a.snr_list, "comma-separated SNR list in dB");
  cmd->add_option("--trials", a.trials, "Monte Carlo trials per point");
  cmd->add_option("--seed", a.seed, "master RNG seed");
  cmd->add_option("--algorithms", a.algorithms,
                  "comma-separated subset of bgsr,gsmp,omp,sbl,genie");
  cmd->add_option("--adc-bits", a.adc_bits, "ADC resolution (integer or inf)");
  cmd->add_option("--psf", a.psf, "pulse shape: rrc|rect");
  cmd->add_option("--dict", a.dict_mode, "dictionary mode: on_grid|tbod");
  cmd->add_option("--threads", a.threads, "worker threads (0 = hardware)");
  auto* out = cmd->add_option("--out", a.out_path, "output CSV path");
  if (needs_out) out->required();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dual-wideband THz channel estimation Monte Carlo driver"};
  app.require_subcommand(1);

  CommonArgs run_args, val_args, bcrb_args;
  auto* cmd_run = app.add_subcommand("run", "run a Monte Carlo sweep");
  add_common(cmd_run, run_args, true);
  auto* cmd_val =
      app.add_subcommand("validate", "validate a config and print it");
  add_common(cmd_val, val_args, false);
  auto* cmd_bcrb =
      app.add_subcommand("bcrb", "evaluate the Bayesian bound per SNR point");
  add_common(cmd_bcrb, bcrb_args, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (cmd_run->parsed()) {
      auto lc = resolve(run_args);
      const auto result =
          thzest::run_sweep(lc.scenario, lc.sweep, run_args.threads);
      thzest::write_csv(result, run_args.out_path);
      std::cout << "wrote " << result.rows.size() << " rows to "
                << run_args.out_path << "\n";
    } else if (cmd_val->parsed()) {
      if (val_args.config_path.empty())
        throw thzest::ConfigError("validate requires --config");
      auto lc = resolve(val_args);
      std::cout << "config ok (hash "
                << thzest::config_hash(lc.scenario, lc.sweep) << ")\n";
    } else if (cmd_bcrb->parsed()) {
      auto lc = resolve(bcrb_args);
      lc.sweep.algorithms = {"bgsr"};
      const auto result =
          thzest::run_sweep(lc.scenario, lc.sweep, bcrb_args.threads);
      thzest::SweepResult bound_only;
      bound_only.seed = result.seed;
      bound_only.config_hash = result.config_hash;
      bound_only.revision = result.revision;
      for (const auto& row : result.rows)
        if (row.algorithm == "bcrb") bound_only.rows.push_back(row);
      thzest::write_csv(bound_only, bcrb_args.out_path);
      std::cout << "wrote " << bound_only.rows.size() << " rows to "
                << bcrb_args.out_path << "\n";
    }
  } catch (const thzest::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const thzest::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
