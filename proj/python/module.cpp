// SPDX-License-Identifier: Apache-2.0
//
// Python bindings for the main library operations: scenario presets, channel
// generation, pilot synthesis, the estimators, bounds and the sweep driver.

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "thzest/channel.hpp"
#include "thzest/config.hpp"
#include "thzest/dictionary.hpp"
#include "thzest/estimators.hpp"
#include "thzest/metrics.hpp"
#include "thzest/pilot.hpp"
#include "thzest/sweep.hpp"

namespace py = pybind11;
using namespace thzest;

namespace {

/// One-call pipeline: channel + measurements + estimates for a config.
py::dict run_trial_py(const ScenarioConfig& cfg,
                      const std::vector<std::string>& algorithms,
                      const std::string& dict_mode, std::uint64_t seed) {
  Rng rng_channel = make_stream(seed, 0, 1);
  Rng rng_frontend = make_stream(seed, 0, 2);
  const auto channel = generate_channel(cfg, rng_channel);
  const auto codebooks = draw_codebooks(cfg, rng_frontend);
  const auto pilots = draw_pilots(cfg, rng_frontend);
  auto meas = synthesize_measurements(cfg, channel, codebooks, pilots,
                                      rng_frontend);
  const auto mode = dict_mode == "tbod" ? DictionaryMode::TBoD
                                        : DictionaryMode::OnGrid;
  const auto dict = build_mu_dictionary(cfg, mode);
  build_sensing_tensor(meas, dict);

  py::dict out;
  for (const auto& algo : algorithms) {
    EstimatorOutput est;
    if (algo == "bgsr")
      est = bgsr_estimate(meas.xi, meas.y, meas.c_w,
                          {cfg.bgsr_eps, cfg.bgsr_kmax});
    else if (algo == "gsmp")
      est = gsmp_estimate(meas.xi, meas.y, cfg.gsmp_threshold());
    else if (algo == "omp")
      est = omp_estimate(meas.xi, meas.y, meas.c_w, cfg.omp_atom_budget());
    else if (algo == "sbl")
      est = sbl_estimate(meas.xi, meas.y, meas.c_w,
                         {cfg.bgsr_eps, cfg.bgsr_kmax});
    else
      throw std::invalid_argument("unknown algorithm: " + algo);
    est.h_hat = reconstruct_channel(est.h_b_hat, dict);
    py::dict entry;
    entry["nmse"] = nmse(est.h_hat, channel.cfr);
    entry["iterations"] = est.iterations;
    out[py::str(algo)] = entry;
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_thzest, m) {
  m.doc() = "dual-wideband THz channel estimation core";

  py::register_exception<ConfigError>(m, "ConfigError");
  py::register_exception<NumericalError>(m, "NumericalError");

  py::class_<ScenarioConfig>(m, "ScenarioConfig")
      .def(py::init<>())
      .def_readwrite("num_users", &ScenarioConfig::num_users)
      .def_readwrite("tx_antennas_per_user",
                     &ScenarioConfig::tx_antennas_per_user)
      .def_readwrite("rx_antennas", &ScenarioConfig::rx_antennas)
      .def_readwrite("tx_rf_chains", &ScenarioConfig::tx_rf_chains)
      .def_readwrite("rx_rf_chains", &ScenarioConfig::rx_rf_chains)
      .def_readwrite("subcarriers", &ScenarioConfig::subcarriers)
      .def_readwrite("pilot_blocks", &ScenarioConfig::pilot_blocks)
      .def_readwrite("pilots_per_block", &ScenarioConfig::pilots_per_block)
      .def_readwrite("delay_taps", &ScenarioConfig::delay_taps)
      .def_readwrite("nlos_clusters", &ScenarioConfig::nlos_clusters)
      .def_readwrite("diffuse_rays", &ScenarioConfig::diffuse_rays)
      .def_readwrite("carrier_hz", &ScenarioConfig::carrier_hz)
      .def_readwrite("bandwidth_hz", &ScenarioConfig::bandwidth_hz)
      .def_readwrite("distance_m", &ScenarioConfig::distance_m)
      .def_readwrite("grid_G_R", &ScenarioConfig::grid_G_R)
      .def_readwrite("grid_G_Tu", &ScenarioConfig::grid_G_Tu)
      .def_readwrite("adc_bits", &ScenarioConfig::adc_bits)
      .def_readwrite("phase_bits", &ScenarioConfig::phase_bits)
      .def_readwrite("noise_var", &ScenarioConfig::noise_var)
      .def_readwrite("pilot_power", &ScenarioConfig::pilot_power)
      .def_readwrite("rng_seed", &ScenarioConfig::rng_seed)
      .def("validate", &ScenarioConfig::validate);

  py::class_<SweepSpec>(m, "SweepSpec")
      .def(py::init<>())
      .def_readwrite("snr_db_list", &SweepSpec::snr_db_list)
      .def_readwrite("trials", &SweepSpec::trials)
      .def_readwrite("algorithms", &SweepSpec::algorithms)
      .def_readwrite("sweep_axis", &SweepSpec::sweep_axis)
      .def_readwrite("sweep_values", &SweepSpec::sweep_values)
      .def_readwrite("output_path", &SweepSpec::output_path);

  m.attr("INFINITE_BITS") = kInfiniteBits;
  m.def("desk_preset", &desk_preset);
  m.def("paper_preset", &paper_preset);
  m.def("revision_tag", &revision_tag);

  m.def("subcarrier_frequency",
        py::overload_cast<int, double, double, int>(&subcarrier_frequency),
        py::arg("k"), py::arg("carrier_hz"), py::arg("bandwidth_hz"),
        py::arg("subcarriers"));
  m.def("effective_aoa", &effective_aoa);
  m.def("steering_vector", &steering_vector, py::arg("phi_rad"),
        py::arg("f_hz"), py::arg("num_antennas"), py::arg("carrier_hz"));
  m.def("free_space_loss", &free_space_loss);
  m.def(
      "molecular_absorption_loss",
      [](double f_hz, double d_m, double kabs) {
        return molecular_absorption_loss(f_hz, d_m,
                                         AbsorptionModel::constant(kabs));
      },
      py::arg("f_hz"), py::arg("distance_m"), py::arg("kabs_per_m"));
  m.def(
      "bussgang_epsilon",
      [](int bits) {
        const auto q = bussgang_epsilon(bits);
        return py::make_tuple(q.upsilon, q.epsilon);
      },
      py::arg("bits"));
  m.def(
      "nmse",
      [](const std::vector<Mat>& h_hat, const std::vector<Mat>& h_true) {
        return nmse(h_hat, h_true);
      },
      py::arg("h_hat"), py::arg("h_true"));

  m.def(
      "generate_channel",
      [](const ScenarioConfig& cfg, std::uint64_t seed) {
        Rng rng = make_stream(seed, 0, 1);
        const auto ch = generate_channel(cfg, rng);
        return py::make_tuple(ch.cfr, ch.taps);
      },
      py::arg("cfg"), py::arg("seed"));

  m.def("run_trial", &run_trial_py, py::arg("cfg"), py::arg("algorithms"),
        py::arg("dict_mode") = "on_grid", py::arg("seed") = 1234);

  m.def(
      "run_sweep_csv",
      [](const ScenarioConfig& cfg, const SweepSpec& sweep, int threads) {
        return run_sweep(cfg, sweep, threads).to_csv();
      },
      py::arg("cfg"), py::arg("sweep"), py::arg("threads") = 0);
}
