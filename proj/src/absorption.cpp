// SPDX-License-Identifier: Apache-2.0
#include "thzest/absorption.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace thzest {

AbsorptionModel AbsorptionModel::constant(double kabs_per_m) {
  if (kabs_per_m < 0.0)
    throw std::invalid_argument("absorption coefficient must be >= 0");
  AbsorptionModel m;
  m.constant_ = kabs_per_m;
  return m;
}

AbsorptionModel AbsorptionModel::from_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open absorption CSV: " + path);
  std::string line;
  if (!std::getline(in, line))
    throw ConfigError("absorption CSV is empty: " + path);
  AbsorptionModel m;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string f_str, k_str;
    if (!std::getline(ss, f_str, ',') || !std::getline(ss, k_str, ','))
      throw ConfigError("absorption CSV: bad line: " + line);
    m.freqs_.push_back(std::stod(f_str));
    m.values_.push_back(std::stod(k_str));
  }
  if (m.freqs_.size() < 2)
    throw ConfigError("absorption CSV needs at least two rows: " + path);
  if (!std::is_sorted(m.freqs_.begin(), m.freqs_.end()))
    throw ConfigError("absorption CSV frequencies must be ascending: " + path);
  for (double v : m.values_)
    if (v < 0.0)
      throw ConfigError("absorption CSV has a negative coefficient: " + path);
  return m;
}

double AbsorptionModel::kabs(double freq_hz) const {
  if (is_constant()) return constant_;
  if (freq_hz < freqs_.front() || freq_hz > freqs_.back()) {
    std::ostringstream msg;
    msg << "absorption table does not cover " << freq_hz
        << " Hz (support [" << freqs_.front() << ", " << freqs_.back()
        << "] Hz)";
    throw std::invalid_argument(msg.str());
  }
  auto it = std::upper_bound(freqs_.begin(), freqs_.end(), freq_hz);
  if (it == freqs_.end()) return values_.back();
  const std::size_t hi = static_cast<std::size_t>(it - freqs_.begin());
  if (hi == 0) return values_.front();
  const std::size_t lo = hi - 1;
  const double t = (freq_hz - freqs_[lo]) / (freqs_[hi] - freqs_[lo]);
  return values_[lo] + t * (values_[hi] - values_[lo]);
}

}  // namespace thzest
