// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "thzest/common.hpp"

namespace thzest {

/// Molecular-absorption coefficient k_abs(f) [1/m].  Either a constant or a
/// table ingested from CSV (`freq_hz,kabs_per_m`, header required) with
/// linear interpolation; queries outside the table support are input errors.
class AbsorptionModel {
 public:
  static AbsorptionModel constant(double kabs_per_m);
  static AbsorptionModel from_csv(const std::string& path);

  double kabs(double freq_hz) const;

  bool is_constant() const { return freqs_.empty(); }

 private:
  double constant_ = 0.0;
  std::vector<double> freqs_;   // ascending
  std::vector<double> values_;  // k_abs at freqs_
};

}  // namespace thzest
