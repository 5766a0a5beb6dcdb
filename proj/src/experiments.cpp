#include "fcm/experiments.hpp"

#include <algorithm>
#include <fstream>

#include "fcm/estimation.hpp"
#include "fcm/reduction.hpp"

namespace fcm {

namespace {

using nlohmann::json;

// Random streams; every Monte-Carlo run r draws from make_rng(seed, stream, r).
constexpr std::uint64_t kAdmittanceNoiseStream = 1;
constexpr std::uint64_t kAdmittanceSampleStream = 2;
constexpr std::uint64_t kBatchStreamBase = 100;
constexpr std::uint64_t kOnlineStream = 3;
constexpr std::uint64_t kReductionStream = 4;

LineImpedance impedance(const std::array<double, kPhaseCount>& r, const std::array<double, kPhaseCount>& x) {
  return LineImpedance{r, x};
}

std::vector<Line> example_lines(const ExampleNetworkParameters& params) {
  return {Line{1, 2, impedance(params.r12, params.x12)}, Line{1, 3, impedance(params.r13, params.x13)}};
}

double admittance_error(const HarmonicAdmittance& est, const HarmonicAdmittance& truth) {
  const auto& cfg = truth.config();
  double num = 0.0;
  double den = 0.0;
  for (int k = 0; k <= cfg.K; ++k)
    for (int ph = 0; ph < kPhaseCount; ++ph) {
      num += (truth.block(k, ph) - est.block(k, ph)).squaredNorm();
      den += truth.block(k, ph).squaredNorm();
    }
  if (den == 0.0) throw ValidationError("admittance error: reference admittance is zero");
  return num / den;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

json rng_description(json streams) {
  return {{"engine", "mt19937_64"}, {"seeding", "seed_seq(seed, stream, run)"}, {"streams", std::move(streams)}};
}

// --- configuration documents ------------------------------------------------

template <typename T>
void read_into(const json& doc, const char* key, T& target) {
  if (doc.contains(key)) target = doc.at(key).get<T>();
}

ExampleNetworkParameters example_parameters_from(const json& doc, ExampleNetworkParameters p) {
  if (!doc.is_object()) return p;
  read_into(doc, "dc_currents", p.dc_currents);
  read_into(doc, "r12", p.r12);
  read_into(doc, "r13", p.r13);
  read_into(doc, "x12", p.x12);
  read_into(doc, "x13", p.x13);
  return p;
}

json example_parameters_json(const ExampleNetworkParameters& p) {
  return {{"dc_currents", p.dc_currents}, {"r12", p.r12}, {"r13", p.r13}, {"x12", p.x12}, {"x13", p.x13}};
}

ConverterExperimentSetup setup_from(const json& doc, ConverterExperimentSetup s) {
  if (!doc.is_object()) return s;
  read_into(doc, "fundamental_magnitude", s.fundamental_magnitude);
  read_into(doc, "dc_mean", s.dc.mean);
  read_into(doc, "dc_std", s.dc.std);
  if (doc.contains("converter")) {
    const auto& c = doc.at("converter");
    read_into(c, "seed", s.converter.seed);
    read_into(c, "switching_length", s.converter.switching_length);
    read_into(c, "series_r", s.converter.series_r);
    read_into(c, "series_x", s.converter.series_x);
    read_into(c, "dc_r", s.converter.dc_r);
    read_into(c, "dc_cap_x", s.converter.dc_cap_x);
    read_into(c, "normalize", s.converter.normalize);
  }
  return s;
}

json setup_json(const ConverterExperimentSetup& s) {
  const auto& c = s.converter;
  return {{"fundamental_magnitude", s.fundamental_magnitude},
          {"dc_mean", s.dc.mean},
          {"dc_std", s.dc.std},
          {"converter",
           {{"seed", c.seed},
            {"switching_length", c.switching_length},
            {"series_r", c.series_r},
            {"series_x", c.series_x},
            {"dc_r", c.dc_r},
            {"dc_cap_x", c.dc_cap_x},
            {"normalize", c.normalize}}}};
}

void check_common(int K, int runs) {
  if (K < 0) throw ValidationError("K must be non-negative");
  if (runs < 1) throw ValidationError("runs must be at least 1");
}

void check_noise(double noise) {
  if (!(noise >= 0.0)) throw ValidationError("noise levels must be non-negative");
}

json require_object(const json& doc) {
  if (doc.is_null()) return json::object();
  if (!doc.is_object()) throw ValidationError("experiment configuration must be a JSON object");
  return doc;
}

template <typename F>
auto parse_config(F&& body) {
  try {
    return body();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("experiment configuration: ") + e.what());
  }
}

}  // namespace

// ---------------------------------------------------------------------------

HarmonicNetwork example_network(const HarmonicConfig& cfg, const ExampleNetworkParameters& params, const std::array<Fcm, 4>& fcms) {
  const std::array<int, 4> nodes{1, 2, 3, 1};
  std::vector<Converter> converters;
  for (std::size_t i = 0; i < 4; ++i)
    converters.push_back(Converter{"F" + std::to_string(i + 1), nodes[i], fcms[i], params.dc_currents[i]});
  return HarmonicNetwork(cfg, {1, 2, 3}, 1, example_lines(params), std::move(converters));
}

HarmonicNetwork example_line_network(const HarmonicConfig& cfg, const ExampleNetworkParameters& params) {
  return HarmonicNetwork(cfg, {1, 2, 3}, 1, example_lines(params), {});
}

void write_experiment(const ExperimentResult& result, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw ValidationError("cannot create output directory '" + out_dir.string() + "': " + ec.message());
  for (const auto& table : result.tables)
    io::write_table_csv(out_dir / (result.name + "_" + table.name + ".csv"), table);
  std::ofstream out(out_dir / (result.name + ".json"));
  out << result.sidecar.dump(2) << "\n";
  if (!out) throw ValidationError("failed writing sidecar for '" + result.name + "'");
}

// --- admittance sweep ---------------------------------------------------------

AdmittanceSweepResult run_admittance_sweep(const AdmittanceSweepConfig& config) {
  check_common(config.K, config.runs);
  const HarmonicConfig cfg(config.K);
  const HarmonicNetwork net = example_line_network(cfg, config.network);
  const HarmonicAdmittance truth = assemble_harmonic_admittance(net);
  const Topology topology = Topology::of(net);
  const VoltageSamplingSpec spec = example_voltage_spec();
  const Eigen::VectorXcd mean_v = mean_bus_voltage(spec, cfg);
  const double ref_v = mean_component_magnitude(mean_v);
  const double ref_i = mean_component_magnitude(Eigen::VectorXcd(truth.apply(mean_v)));

  auto mean_error = [&](int samples, double noise, std::uint64_t stream) {
    if (samples < 1) throw ValidationError("sample sizes must be positive");
    check_noise(noise);
    std::vector<double> errors;
    for (int r = 0; r < config.runs; ++r) {
      Rng rng = make_rng(config.seed, stream, static_cast<std::uint64_t>(r));
      const Eigen::MatrixXcd v = sample_bus_voltages(spec, cfg, samples, rng);
      const Eigen::MatrixXcd i = truth.apply(v);
      NetworkMeasurementBatch batch{add_measurement_noise(i, noise, ref_i, rng), add_measurement_noise(v, noise, ref_v, rng)};
      errors.push_back(admittance_error(estimate_admittance(batch, topology, cfg).admittance, truth));
    }
    return mean_of(errors);
  };

  AdmittanceSweepResult result;
  io::Table by_noise{"noise", {"relative_std", "samples", "mean_error"}, {}};
  for (double noise : config.noise_levels) {
    result.error_vs_noise.push_back(mean_error(config.fixed_samples, noise, kAdmittanceNoiseStream));
    by_noise.rows.push_back({noise, static_cast<double>(config.fixed_samples), result.error_vs_noise.back()});
  }
  io::Table by_samples{"samples", {"samples", "relative_std", "mean_error"}, {}};
  for (int samples : config.sample_sizes) {
    result.error_vs_samples.push_back(mean_error(samples, config.fixed_noise, kAdmittanceSampleStream));
    by_samples.rows.push_back({static_cast<double>(samples), config.fixed_noise, result.error_vs_samples.back()});
  }

  result.output.name = "admittance_sweep";
  result.output.tables = {by_noise, by_samples};
  result.output.sidecar = {{"experiment", "admittance_sweep"},
                           {"config", to_json(config)},
                           {"rng", rng_description({{"noise_sweep", kAdmittanceNoiseStream},
                                                    {"sample_sweep", kAdmittanceSampleStream}})},
                           {"noise_reference", {{"voltage", ref_v}, {"current", ref_i}}}};
  return result;
}

// --- batch FCM sweep ------------------------------------------------------------

FcmBatchSweepResult run_fcm_batch_sweep(const FcmBatchSweepConfig& config) {
  check_common(config.K, config.runs);
  const HarmonicConfig cfg(config.K);
  const int q = cfg.q();
  const Fcm truth = synth_converter_fcm(config.setup.converter, cfg);
  const VoltageSamplingSpec spec = converter_terminal_spec(config.setup.fundamental_magnitude);
  const Eigen::VectorXd mean_v = terminal_mean(spec, cfg, config.setup.dc);
  const double ref_v = mean_component_magnitude(mean_v);
  const double ref_i = mean_component_magnitude(Eigen::VectorXd(truth.matrix() * mean_v));

  FcmBatchSweepResult result;
  result.sample_sizes = config.sample_sizes;
  if (result.sample_sizes.empty()) result.sample_sizes = {q + 1, 2 * q, 3 * q, 4 * q, 5 * q};
  for (int t : result.sample_sizes)
    if (t < 1) throw ValidationError("sample sizes must be positive");
  for (double noise : config.noise_levels) check_noise(noise);

  io::Table table{"errors", {"relative_std", "samples", "samples_over_q", "mean_error", "rank_deficient_runs"}, {}};
  result.mean_error.assign(config.noise_levels.size(), std::vector<double>(result.sample_sizes.size(), 0.0));
  for (std::size_t a = 0; a < config.noise_levels.size(); ++a) {
    const double noise = config.noise_levels[a];
    for (std::size_t b = 0; b < result.sample_sizes.size(); ++b) {
      const int samples = result.sample_sizes[b];
      std::vector<double> errors;
      int deficient = 0;
      for (int r = 0; r < config.runs; ++r) {
        Rng rng = make_rng(config.seed, kBatchStreamBase + b, static_cast<std::uint64_t>(r));
        Eigen::MatrixXd v = sample_terminal_inputs(spec, cfg, config.setup.dc, samples, rng);
        Eigen::MatrixXd i = truth.matrix() * v;
        add_measurement_noise_inplace(v, noise, ref_v, rng);
        add_measurement_noise_inplace(i, noise, ref_i, rng);
        const FcmEstimate est = estimate_fcm_batch(i, v);
        deficient += est.rank_deficient ? 1 : 0;
        errors.push_back(relative_error(est.fcm.matrix(), truth.matrix()));
      }
      result.mean_error[a][b] = mean_of(errors);
      table.rows.push_back({noise, static_cast<double>(samples), static_cast<double>(samples) / q, result.mean_error[a][b],
                            static_cast<double>(deficient)});
    }
  }

  result.output.name = "fcm_batch_sweep";
  result.output.tables = {table};
  json streams = json::object();
  for (std::size_t b = 0; b < result.sample_sizes.size(); ++b)
    streams["samples_" + std::to_string(result.sample_sizes[b])] = kBatchStreamBase + b;
  result.output.sidecar = {{"experiment", "fcm_batch_sweep"},
                           {"config", to_json(config)},
                           {"q", q},
                           {"rng", rng_description(streams)},
                           {"noise_reference", {{"voltage", ref_v}, {"current", ref_i}}}};
  return result;
}

// --- online FCM estimation -----------------------------------------------------

FcmOnlineResult run_fcm_online(const FcmOnlineConfig& config) {
  check_common(config.K, 1);
  check_noise(config.noise);
  if (config.configurations < 1) throw ValidationError("at least one converter configuration is required");
  if (config.steps < 0) throw ValidationError("step count must be non-negative");
  if (config.checkpoint_interval < 1) throw ValidationError("checkpoint interval must be positive");
  const HarmonicConfig cfg(config.K);
  const int q = cfg.q();
  const long window = config.window > 0 ? config.window : static_cast<long>(config.window_factor) * q;

  std::vector<Fcm> truths;
  for (int c = 0; c < config.configurations; ++c) {
    SyntheticConverterSpec spec = config.setup.converter;
    spec.seed = config.setup.converter.seed + static_cast<std::uint64_t>(c);
    truths.push_back(synth_converter_fcm(spec, cfg));
  }
  double denominator = 0.0;
  for (const auto& f : truths) denominator = std::max(denominator, f.matrix().squaredNorm());

  auto schedule = config.schedule;
  std::sort(schedule.begin(), schedule.end());
  for (const auto& [step, c] : schedule)
    if (c < 0 || c >= config.configurations) throw ValidationError("schedule refers to an unknown configuration");
  auto active = [&](long t) {
    int c = 0;
    for (const auto& [step, next] : schedule)
      if (step <= t) c = next;
    return c;
  };

  const VoltageSamplingSpec spec = converter_terminal_spec(config.setup.fundamental_magnitude);
  const Eigen::VectorXd mean_v = terminal_mean(spec, cfg, config.setup.dc);
  const double ref_v = mean_component_magnitude(mean_v);
  std::vector<double> ref_i;
  for (const auto& f : truths) ref_i.push_back(mean_component_magnitude(Eigen::VectorXd(f.matrix() * mean_v)));

  Rng rng = make_rng(config.seed, kOnlineStream, 0);
  auto measure = [&](long samples, int c) {
    Eigen::MatrixXd v = sample_terminal_inputs(spec, cfg, config.setup.dc, static_cast<int>(samples), rng);
    Eigen::MatrixXd i = truths[static_cast<std::size_t>(c)].matrix() * v;
    add_measurement_noise_inplace(v, config.noise, ref_v, rng);
    add_measurement_noise_inplace(i, config.noise, ref_i[static_cast<std::size_t>(c)], rng);
    return MeasurementBatch(std::move(i), std::move(v));
  };

  FcmOnlineResult result;
  result.window = window;
  for (const auto& [step, c] : schedule)
    if (step > 0 && step <= config.steps) result.change_steps.push_back(step);

  OnlineFcmEstimator::Options options;
  options.refresh_interval = config.refresh_interval;
  OnlineFcmEstimator estimator(measure(window, active(0)), options);
  io::Table steps{"steps", {"step", "configuration", "error"}, {}};
  io::Table checkpoints{"checkpoints", {"step", "max_abs_deviation"}, {}};
  for (long t = 0; t <= config.steps; ++t) {
    const int c = active(t);
    if (t > 0) {
      const MeasurementBatch sample = measure(1, c);
      estimator.step(sample.currents.col(0), sample.voltages.col(0));
    }
    const double e = relative_error(estimator.estimate().matrix(), truths[static_cast<std::size_t>(c)].matrix(),
                                    OnlineNormalization{denominator});
    result.configuration.push_back(c);
    result.error.push_back(e);
    steps.rows.push_back({static_cast<double>(t), static_cast<double>(c), e});
    if (t > 0 && t % config.checkpoint_interval == 0) {
      const Eigen::MatrixXd w = estimator.window_voltages();
      Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(q, q);
      gram.selfadjointView<Eigen::Lower>().rankUpdate(w);
      const Eigen::LLT<Eigen::MatrixXd> llt(gram.selfadjointView<Eigen::Lower>());
      const Eigen::MatrixXd fresh = llt.solve(Eigen::MatrixXd::Identity(q, q));
      const double dev = (estimator.gram_inverse() - fresh).cwiseAbs().maxCoeff();
      result.checkpoint_steps.push_back(t);
      result.checkpoint_deviation.push_back(dev);
      checkpoints.rows.push_back({static_cast<double>(t), dev});
    }
  }

  result.output.name = "fcm_online";
  result.output.tables = {steps, checkpoints};
  result.output.sidecar = {{"experiment", "fcm_online"},
                           {"config", to_json(config)},
                           {"q", q},
                           {"window", window},
                           {"error_denominator", denominator},
                           {"refactors", estimator.refactor_count()},
                           {"rng", rng_description({{"stream", kOnlineStream}})}};
  return result;
}

// --- reduction validation ------------------------------------------------------

ReductionValidationResult run_reduction_validation(const ReductionValidationConfig& config) {
  check_common(config.K, config.runs);
  const HarmonicConfig cfg(config.K);
  const int p = cfg.p();
  const int q = cfg.q();
  const int samples = config.samples > 0 ? config.samples : config.sample_factor * q;
  if (samples < 1) throw ValidationError("estimation window must be positive");
  const VoltageSamplingSpec spec = converter_terminal_spec(config.setup.fundamental_magnitude);
  const Eigen::VectorXd mean_v = terminal_mean(spec, cfg, config.setup.dc).head(p);

  std::vector<double> red, est_err, cmp, fcm_err;
  ReductionValidationResult result;
  io::Table runs{"runs", {"run", "eps_reduction", "eps_estimated", "eps_comparison", "fcm_error", "max_condition"}, {}};
  json seeds = json::array();
  for (int r = 0; r < config.runs; ++r) {
    Rng rng = make_rng(config.seed, kReductionStream, static_cast<std::uint64_t>(r));
    std::normal_distribution<double> gauss(0.0, 1.0);

    ExampleNetworkParameters params = config.network;
    for (auto& d : params.dc_currents) d += config.dc_jitter * gauss(rng);
    for (auto* arr : {&params.r12, &params.r13})
      for (auto& v : *arr) v += config.resistance_jitter * gauss(rng);
    for (auto* arr : {&params.x12, &params.x13})
      for (auto& v : *arr) v += config.reactance_jitter * gauss(rng);
    Eigen::VectorXd v_root = mean_v;
    for (int i = 0; i < p; ++i) v_root(i) += config.voltage_jitter * gauss(rng);

    std::array<Fcm, 4> fcms;
    json run_seeds = json::array();
    for (auto& f : fcms) {
      SyntheticConverterSpec conv = config.setup.converter;
      conv.seed = rng();
      run_seeds.push_back(conv.seed);
      f = synth_converter_fcm(conv, cfg);
    }
    seeds.push_back(run_seeds);

    const HarmonicNetwork net = example_network(cfg, params, fcms);
    const NetworkSolver solver(net);
    const Eigen::VectorXd i_exact = solver.solve(v_root).root_current;
    const ReductionReport report = reduce_tree(net);
    Eigen::VectorXd v_virtual(q);
    v_virtual << v_root, 1.0;
    const Eigen::VectorXd i_reduced = report.fcm.matrix() * v_virtual;

    Eigen::MatrixXd v(q, samples);
    for (int t = 0; t < samples; ++t)
      for (int i = 0; i < p; ++i) v(i, t) = v_root(i) + config.sample_std * gauss(rng);
    v.row(p).setOnes();
    const Eigen::MatrixXd i = solver.root_currents(v.topRows(p));
    const FcmEstimate estimate = estimate_fcm_batch(i, v);
    const Eigen::VectorXd i_estimated = estimate.fcm.matrix() * v_virtual;

    double cond = solver.condition_estimate();
    for (const auto& c : report.conditions) cond = std::max(cond, c.condition);
    result.max_condition = std::max(result.max_condition, cond);

    red.push_back((i_exact - i_reduced).norm() / i_exact.norm());
    est_err.push_back((i_exact - i_estimated).norm() / i_exact.norm());
    cmp.push_back((i_reduced - i_estimated).norm() / i_estimated.norm());
    fcm_err.push_back(relative_error(estimate.fcm.matrix(), report.fcm.matrix()));
    runs.rows.push_back({static_cast<double>(r), red.back(), est_err.back(), cmp.back(), fcm_err.back(), cond});
  }

  result.mean_reduction = mean_of(red);
  result.mean_estimated = mean_of(est_err);
  result.mean_comparison = mean_of(cmp);
  result.mean_fcm_error = mean_of(fcm_err);
  io::Table summary{"summary", {"mean_eps_reduction", "mean_eps_estimated", "mean_eps_comparison", "mean_fcm_error"},
                    {{result.mean_reduction, result.mean_estimated, result.mean_comparison, result.mean_fcm_error}}};

  result.output.name = "reduction_validation";
  result.output.tables = {summary, runs};
  result.output.sidecar = {{"experiment", "reduction_validation"},
                           {"config", to_json(config)},
                           {"q", q},
                           {"samples", samples},
                           {"rng", rng_description({{"stream", kReductionStream}})},
                           {"converter_seeds", seeds}};
  return result;
}

// --- configuration ---------------------------------------------------------------

AdmittanceSweepConfig admittance_sweep_config(const json& raw, const ExperimentOverrides& o) {
  return parse_config([&] {
    const json doc = require_object(raw);
    AdmittanceSweepConfig c;
    read_into(doc, "K", c.K);
    read_into(doc, "runs", c.runs);
    read_into(doc, "seed", c.seed);
    read_into(doc, "fixed_samples", c.fixed_samples);
    read_into(doc, "noise_levels", c.noise_levels);
    read_into(doc, "fixed_noise", c.fixed_noise);
    read_into(doc, "sample_sizes", c.sample_sizes);
    if (doc.contains("network")) c.network = example_parameters_from(doc.at("network"), c.network);
    if (o.seed) c.seed = *o.seed;
    if (o.K) c.K = *o.K;
    if (o.runs) c.runs = *o.runs;
    if (o.samples) c.fixed_samples = *o.samples;
    if (o.noise) c.fixed_noise = *o.noise;
    return c;
  });
}

FcmBatchSweepConfig fcm_batch_sweep_config(const json& raw, const ExperimentOverrides& o) {
  return parse_config([&] {
    const json doc = require_object(raw);
    FcmBatchSweepConfig c;
    read_into(doc, "K", c.K);
    read_into(doc, "runs", c.runs);
    read_into(doc, "seed", c.seed);
    read_into(doc, "noise_levels", c.noise_levels);
    read_into(doc, "sample_sizes", c.sample_sizes);
    c.setup = setup_from(doc, c.setup);
    if (o.seed) c.seed = *o.seed;
    if (o.K) c.K = *o.K;
    if (o.runs) c.runs = *o.runs;
    if (o.samples) c.sample_sizes = {*o.samples};
    if (o.noise) c.noise_levels = {*o.noise};
    return c;
  });
}

FcmOnlineConfig fcm_online_config(const json& raw, const ExperimentOverrides& o) {
  return parse_config([&] {
    const json doc = require_object(raw);
    FcmOnlineConfig c;
    read_into(doc, "K", c.K);
    read_into(doc, "seed", c.seed);
    read_into(doc, "steps", c.steps);
    read_into(doc, "window", c.window);
    read_into(doc, "window_factor", c.window_factor);
    read_into(doc, "noise", c.noise);
    read_into(doc, "configurations", c.configurations);
    read_into(doc, "refresh_interval", c.refresh_interval);
    read_into(doc, "checkpoint_interval", c.checkpoint_interval);
    if (doc.contains("schedule")) {
      c.schedule.clear();
      for (const auto& e : doc.at("schedule")) c.schedule.emplace_back(e.at("step").get<long>(), e.at("configuration").get<int>());
    }
    c.setup = setup_from(doc, c.setup);
    if (o.seed) c.seed = *o.seed;
    if (o.K) c.K = *o.K;
    if (o.samples) c.window = *o.samples;
    if (o.noise) c.noise = *o.noise;
    if (o.runs) throw ValidationError("fcm_online is a single run; --runs does not apply");
    return c;
  });
}

ReductionValidationConfig reduction_validation_config(const json& raw, const ExperimentOverrides& o) {
  return parse_config([&] {
    const json doc = require_object(raw);
    ReductionValidationConfig c;
    read_into(doc, "K", c.K);
    read_into(doc, "runs", c.runs);
    read_into(doc, "seed", c.seed);
    read_into(doc, "samples", c.samples);
    read_into(doc, "sample_factor", c.sample_factor);
    read_into(doc, "sample_std", c.sample_std);
    read_into(doc, "dc_jitter", c.dc_jitter);
    read_into(doc, "resistance_jitter", c.resistance_jitter);
    read_into(doc, "reactance_jitter", c.reactance_jitter);
    read_into(doc, "voltage_jitter", c.voltage_jitter);
    if (doc.contains("network")) c.network = example_parameters_from(doc.at("network"), c.network);
    c.setup = setup_from(doc, c.setup);
    if (o.seed) c.seed = *o.seed;
    if (o.K) c.K = *o.K;
    if (o.runs) c.runs = *o.runs;
    if (o.samples) c.samples = *o.samples;
    if (o.noise && *o.noise != 0.0) throw ValidationError("reduction_validation is noiseless; --noise must be 0");
    return c;
  });
}

json to_json(const AdmittanceSweepConfig& c) {
  return {{"K", c.K},
          {"runs", c.runs},
          {"seed", c.seed},
          {"fixed_samples", c.fixed_samples},
          {"noise_levels", c.noise_levels},
          {"fixed_noise", c.fixed_noise},
          {"sample_sizes", c.sample_sizes},
          {"network", example_parameters_json(c.network)}};
}

json to_json(const FcmBatchSweepConfig& c) {
  json out = setup_json(c.setup);
  out.update({{"K", c.K}, {"runs", c.runs}, {"seed", c.seed}, {"noise_levels", c.noise_levels}, {"sample_sizes", c.sample_sizes}});
  return out;
}

json to_json(const FcmOnlineConfig& c) {
  json schedule = json::array();
  for (const auto& [step, conf] : c.schedule) schedule.push_back({{"step", step}, {"configuration", conf}});
  json out = setup_json(c.setup);
  out.update({{"K", c.K},
              {"seed", c.seed},
              {"steps", c.steps},
              {"window", c.window},
              {"window_factor", c.window_factor},
              {"noise", c.noise},
              {"configurations", c.configurations},
              {"schedule", schedule},
              {"refresh_interval", c.refresh_interval},
              {"checkpoint_interval", c.checkpoint_interval}});
  return out;
}

json to_json(const ReductionValidationConfig& c) {
  json out = setup_json(c.setup);
  out.update({{"K", c.K},
              {"runs", c.runs},
              {"seed", c.seed},
              {"samples", c.samples},
              {"sample_factor", c.sample_factor},
              {"sample_std", c.sample_std},
              {"dc_jitter", c.dc_jitter},
              {"resistance_jitter", c.resistance_jitter},
              {"reactance_jitter", c.reactance_jitter},
              {"voltage_jitter", c.voltage_jitter},
              {"network", example_parameters_json(c.network)}});
  return out;
}

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"admittance_sweep", "fcm_batch_sweep", "fcm_online", "reduction_validation"};
  return names;
}

ExperimentResult run_experiment(const std::string& name, const json& config, const ExperimentOverrides& overrides) {
  if (name == "admittance_sweep") return run_admittance_sweep(admittance_sweep_config(config, overrides)).output;
  if (name == "fcm_batch_sweep") return run_fcm_batch_sweep(fcm_batch_sweep_config(config, overrides)).output;
  if (name == "fcm_online") return run_fcm_online(fcm_online_config(config, overrides)).output;
  if (name == "reduction_validation")
    return run_reduction_validation(reduction_validation_config(config, overrides)).output;
  throw ValidationError("unknown experiment '" + name + "'");
}

}  // namespace fcm
