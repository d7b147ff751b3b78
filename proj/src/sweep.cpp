// SPDX-License-Identifier: Apache-2.0
#include "thzest/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include "thzest/channel.hpp"
#include "thzest/estimators.hpp"
#include "thzest/metrics.hpp"

namespace thzest {

namespace {

struct TrialRecord {
  // (algorithm, metric) -> value, in deterministic emission order
  std::vector<std::tuple<std::string, std::string, double>> values;
  std::string error;
};

struct PointContext {
  ScenarioConfig cfg;
  SparsifyingDictionary dict;
  std::vector<Mat> psi;  // cached Psi_MU[k]
  Mat psi_gram;          // sum_k Psi^H Psi (for the BCRB)
};

void run_trial(const PointContext& ctx, const SweepSpec& sweep,
               std::uint64_t master_seed, int trial, TrialRecord& rec) {
  const ScenarioConfig& cfg = ctx.cfg;
  // salted by trial only: sweep points share channel/noise randomness, so
  // curves across the sweep axis are paired (common random numbers)
  const std::uint64_t salt = static_cast<std::uint64_t>(trial);

  Rng rng_channel = make_stream(master_seed, salt, 1);
  Rng rng_frontend = make_stream(master_seed, salt, 2);

  const MultiUserChannel channel = generate_channel(cfg, rng_channel);
  const RFCodebook codebooks = draw_codebooks(cfg, rng_frontend);
  const PilotFrame pilots = draw_pilots(cfg, rng_frontend);
  MeasurementSet meas =
      synthesize_measurements(cfg, channel, codebooks, pilots, rng_frontend);
  build_sensing_tensor(meas, ctx.dict, &ctx.psi);

  const double channel_energy = [&] {
    double e = 0.0;
    for (const auto& h : channel.cfr) e += h.squaredNorm();
    return e;
  }();

  auto emit = [&rec](const std::string& algo, const std::string& metric,
                     double v) { rec.values.emplace_back(algo, metric, v); };

  auto run_ber = [&](const std::vector<Mat>& h_hat) {
    // identical data/noise stream per algorithm: paired BER comparisons
    Rng rng_ber = make_stream(master_seed, salt, 3);
    return mmse_equalize_detect(cfg, channel, h_hat, codebooks, meas.quant,
                                meas.c_w_true, rng_ber)
        .ber;
  };

  RVec bgsr_gamma;
  for (const std::string& algo : sweep.algorithms) {
    if (algo == "genie") {
      emit(algo, "ber", run_ber(channel.cfr));
      continue;
    }
    EstimatorOutput est;
    if (algo == "bgsr") {
      est = bgsr_estimate(meas.xi, meas.y, meas.c_w,
                          {cfg.bgsr_eps, cfg.bgsr_kmax});
      bgsr_gamma = est.gamma;
    } else if (algo == "gsmp") {
      est = gsmp_estimate(meas.xi, meas.y, cfg.gsmp_threshold());
    } else if (algo == "omp") {
      est = omp_estimate(meas.xi, meas.y, meas.c_w, cfg.omp_atom_budget());
    } else if (algo == "sbl") {
      est = sbl_estimate(meas.xi, meas.y, meas.c_w,
                         {cfg.bgsr_eps, cfg.bgsr_kmax});
    } else {
      throw ConfigError("unknown algorithm: " + algo);
    }
    est.h_hat = reconstruct_channel(est.h_b_hat, ctx.dict);
    emit(algo, "nmse", nmse(est.h_hat, channel.cfr));
    emit(algo, "ber", run_ber(est.h_hat));
    if (algo == "bgsr") emit(algo, "iterations", est.iterations);
  }

  if (bgsr_gamma.size() > 0) {
    // plug-in prior from the converged hyperparameters; pruned zeros are
    // floored so the prior FIM stays finite
    RVec gamma = bgsr_gamma;
    const double floor = std::max(1e-12 * gamma.maxCoeff(), 1e-300);
    for (Eigen::Index i = 0; i < gamma.size(); ++i)
      gamma(i) = std::max(gamma(i), floor);
    const BCRBResult b =
        bcrb_with_gram(meas.xi, meas.c_w, gamma, ctx.psi_gram, channel_energy);
    emit("bcrb", "bound_nmse", b.bound_nmse);
  }
}

}  // namespace

ScenarioConfig apply_sweep_value(const ScenarioConfig& cfg,
                                 const std::string& axis, double value) {
  ScenarioConfig out = cfg;
  if (axis == "snr") {
    out.noise_var = from_db10(-value);
  } else if (axis == "pilot_blocks") {
    out.pilot_blocks = static_cast<int>(value);
  } else if (axis == "users") {
    out.num_users = static_cast<int>(value);
  } else if (axis == "adc_bits") {
    out.adc_bits = value < 0 ? kInfiniteBits : static_cast<int>(value);
  } else if (axis == "subcarriers") {
    out.subcarriers = static_cast<int>(value);
    out.pilots_per_block = out.subcarriers - out.delay_taps + 1;
  } else if (axis == "diffuse_rays") {
    out.diffuse_rays = static_cast<int>(value);
  } else {
    throw ConfigError("unknown sweep_axis: " + axis);
  }
  return out;
}

SweepResult run_sweep(const ScenarioConfig& cfg, const SweepSpec& sweep,
                      int num_threads,
                      std::vector<TrialTable>* per_point_trials) {
  cfg.validate();
  sweep.validate();
  const std::vector<double> values = sweep.axis_values();

  // resolve every sweep point up front so config violations surface before
  // any trial runs
  std::vector<PointContext> points;
  points.reserve(values.size());
  for (double v : values) {
    PointContext ctx;
    ctx.cfg = apply_sweep_value(cfg, sweep.sweep_axis, v);
    ctx.cfg.validate();
    points.push_back(std::move(ctx));
  }

  if (num_threads <= 0) {
    const unsigned hw = std::thread::hardware_concurrency();
    num_threads = hw == 0 ? 1 : static_cast<int>(hw);
  }

  SweepResult result;
  result.seed = cfg.rng_seed;
  result.config_hash = config_hash(cfg, sweep);
  result.revision = revision_tag();
  if (per_point_trials) per_point_trials->clear();

  for (std::size_t p = 0; p < points.size(); ++p) {
    PointContext& ctx = points[p];
    ctx.dict = build_mu_dictionary(ctx.cfg, sweep.dictionary_mode);
    ctx.psi.resize(ctx.cfg.subcarriers);
    ctx.psi_gram = Mat::Zero(ctx.dict.total_atoms(), ctx.dict.total_atoms());
    for (int k = 0; k < ctx.cfg.subcarriers; ++k) {
      ctx.psi[k] = ctx.dict.psi(k);
      ctx.psi_gram.noalias() += ctx.psi[k].adjoint() * ctx.psi[k];
    }

    std::vector<TrialRecord> records(sweep.trials);
    std::atomic<int> next{0};
    auto worker = [&] {
      for (;;) {
        const int t = next.fetch_add(1);
        if (t >= sweep.trials) break;
        try {
          run_trial(ctx, sweep, cfg.rng_seed, t, records[t]);
        } catch (const std::exception& e) {
          records[t].error = e.what();
        }
      }
    };
    if (num_threads == 1 || sweep.trials == 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      for (int i = 0; i < std::min(num_threads, sweep.trials); ++i)
        pool.emplace_back(worker);
      for (auto& th : pool) th.join();
    }
    for (const auto& rec : records)
      if (!rec.error.empty())
        throw NumericalError("trial failed at sweep point " +
                             std::to_string(values[p]) + ": " + rec.error);

    // deterministic reduction in trial order
    TrialTable table;
    for (const auto& rec : records)
      for (const auto& [algo, metric, v] : rec.values)
        table.values[{algo, metric}].push_back(v);
    for (const auto& [key, vals] : table.values) {
      SweepRow row;
      row.sweep_value = values[p];
      row.algorithm = key.first;
      row.metric = key.second;
      row.trials = static_cast<int>(vals.size());
      double mean = 0.0;
      for (double v : vals) mean += v;
      mean /= vals.size();
      double var = 0.0;
      for (double v : vals) var += (v - mean) * (v - mean);
      var = vals.size() > 1 ? var / (vals.size() - 1) : 0.0;
      row.mean = mean;
      row.stderr_ = std::sqrt(var / vals.size());
      result.rows.push_back(row);
    }
    if (per_point_trials) per_point_trials->push_back(std::move(table));
  }
  return result;
}

std::string SweepResult::to_csv() const {
  std::ostringstream out;
  out << "# revision=" << revision << "\n";
  out << "sweep_value,algorithm,metric,mean,stderr,trials,config_hash,seed\n";
  char buf[512];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%.10g,%s,%s,%.10g,%.10g,%d,%s,%llu\n",
                  r.sweep_value, r.algorithm.c_str(), r.metric.c_str(), r.mean,
                  r.stderr_, r.trials, config_hash.c_str(),
                  static_cast<unsigned long long>(seed));
    out << buf;
  }
  return out.str();
}

double SweepResult::mean_of(double sweep_value, const std::string& algorithm,
                            const std::string& metric) const {
  for (const auto& r : rows)
    if (r.sweep_value == sweep_value && r.algorithm == algorithm &&
        r.metric == metric)
      return r.mean;
  throw std::invalid_argument("no row for " + algorithm + "/" + metric);
}

double SweepResult::stderr_of(double sweep_value, const std::string& algorithm,
                              const std::string& metric) const {
  for (const auto& r : rows)
    if (r.sweep_value == sweep_value && r.algorithm == algorithm &&
        r.metric == metric)
      return r.stderr_;
  throw std::invalid_argument("no row for " + algorithm + "/" + metric);
}

void write_csv(const SweepResult& result, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open output file: " + path);
  out << result.to_csv();
}

}  // namespace thzest
