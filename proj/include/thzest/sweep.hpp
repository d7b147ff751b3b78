// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <string>
#include <vector>

#include "thzest/common.hpp"
#include "thzest/config.hpp"

namespace thzest {

struct SweepRow {
  double sweep_value = 0.0;
  std::string algorithm;
  std::string metric;
  double mean = 0.0;
  double stderr_ = 0.0;
  int trials = 0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string revision;

  std::string to_csv() const;
  /// Mean for (sweep_value, algorithm, metric); throws if absent.
  double mean_of(double sweep_value, const std::string& algorithm,
                 const std::string& metric) const;
  double stderr_of(double sweep_value, const std::string& algorithm,
                   const std::string& metric) const;
};

/// Per-trial raw metric values, retained for paired comparisons in tests.
struct TrialTable {
  // key: (algorithm, metric) -> per-trial values, aligned across algorithms
  std::map<std::pair<std::string, std::string>, std::vector<double>> values;
};

/// Run the Monte Carlo sweep: for each sweep point and trial, draw angles,
/// build the channel, synthesize measurements, run the selected algorithms
/// and aggregate NMSE/BER/BCRB rows.  Deterministic given the seed, for any
/// thread count.
SweepResult run_sweep(const ScenarioConfig& cfg, const SweepSpec& sweep,
                      int num_threads = 0,
                      std::vector<TrialTable>* per_point_trials = nullptr);

/// Apply one sweep-axis value to a copy of the config.
ScenarioConfig apply_sweep_value(const ScenarioConfig& cfg,
                                 const std::string& axis, double value);

void write_csv(const SweepResult& result, const std::string& path);

}  // namespace thzest
