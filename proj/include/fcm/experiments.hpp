#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fcm/io.hpp"
#include "fcm/network.hpp"
#include "fcm/scenario.hpp"

namespace fcm {

/// Parameters of the three-node, four-converter example network.
struct ExampleNetworkParameters {
  std::array<double, 4> dc_currents{0.05, 0.025, 0.075, 0.06};
  std::array<double, kPhaseCount> r12{0.05, 0.06, 0.04};
  std::array<double, kPhaseCount> r13{0.075, 0.08, 0.07};
  std::array<double, kPhaseCount> x12{0.1, 0.95, 0.15};
  std::array<double, kPhaseCount> x13{0.15, 0.145, 0.155};
};

/// Node 1 is the root; lines (1,2) and (1,3); converters 1 and 4 at node 1,
/// converter 2 at node 2 and converter 3 at node 3.
HarmonicNetwork example_network(const HarmonicConfig& cfg, const ExampleNetworkParameters& params, const std::array<Fcm, 4>& fcms);
/// Same topology and line data without converters.
HarmonicNetwork example_line_network(const HarmonicConfig& cfg, const ExampleNetworkParameters& params);

/// Converter model and excitation shared by the FCM experiments.
struct ConverterExperimentSetup {
  SyntheticConverterSpec converter;
  /// Fundamental magnitude of the balanced mean terminal voltage.
  double fundamental_magnitude = 0.4;
  DcCurrentSpec dc;
};

struct ExperimentResult {
  std::string name;
  std::vector<io::Table> tables;
  nlohmann::json sidecar;
};

/// Writes every table as <out_dir>/<name>_<table>.csv and the sidecar as <out_dir>/<name>.json.
void write_experiment(const ExperimentResult& result, const std::filesystem::path& out_dir);

// ---------------------------------------------------------------------------

struct AdmittanceSweepConfig {
  int K = 50;
  int runs = 100;
  std::uint64_t seed = 1;
  int fixed_samples = 10;
  std::vector<double> noise_levels{0.001, 0.005, 0.01, 0.02};
  double fixed_noise = 0.01;
  std::vector<int> sample_sizes{10, 100, 1000};
  ExampleNetworkParameters network;
};

struct AdmittanceSweepResult {
  std::vector<double> error_vs_noise;
  std::vector<double> error_vs_samples;
  ExperimentResult output;
};

AdmittanceSweepResult run_admittance_sweep(const AdmittanceSweepConfig& config);

// ---------------------------------------------------------------------------

struct FcmBatchSweepConfig {
  int K = 50;
  int runs = 100;
  std::uint64_t seed = 1;
  std::vector<double> noise_levels{0.0, 0.001, 0.01};
  /// Window lengths; empty selects {q+1, 2q, 3q, 4q, 5q}.
  std::vector<int> sample_sizes;
  ConverterExperimentSetup setup;
};

struct FcmBatchSweepResult {
  std::vector<int> sample_sizes;
  /// mean_error[noise index][sample-size index]
  std::vector<std::vector<double>> mean_error;
  ExperimentResult output;
};

FcmBatchSweepResult run_fcm_batch_sweep(const FcmBatchSweepConfig& config);

// ---------------------------------------------------------------------------

struct FcmOnlineConfig {
  int K = 50;
  std::uint64_t seed = 1;
  long steps = 10000;
  /// Window length; 0 selects window_factor * q.
  int window = 0;
  int window_factor = 2;
  double noise = 0.001;
  int configurations = 4;
  /// (step, configuration) pairs; configuration 0 is active before the first entry.
  std::vector<std::pair<long, int>> schedule{{2000, 1}, {4000, 2}, {6000, 3}, {8000, 0}};
  int refresh_interval = 1000;
  int checkpoint_interval = 100;
  ConverterExperimentSetup setup;
};

struct FcmOnlineResult {
  long window = 0;
  std::vector<int> configuration;
  std::vector<double> error;
  std::vector<long> change_steps;
  std::vector<long> checkpoint_steps;
  /// Largest entrywise |Vc - inv(V V^T)| at each checkpoint.
  std::vector<double> checkpoint_deviation;
  ExperimentResult output;
};

FcmOnlineResult run_fcm_online(const FcmOnlineConfig& config);

// ---------------------------------------------------------------------------

struct ReductionValidationConfig {
  int K = 50;
  int runs = 250;
  std::uint64_t seed = 1;
  /// Estimation window; 0 selects sample_factor * q.
  int samples = 0;
  int sample_factor = 2;
  /// Per-component std of the voltage samples used for estimation.
  double sample_std = 0.005;
  ExampleNetworkParameters network;
  double dc_jitter = 0.005;
  double resistance_jitter = 0.01;
  double reactance_jitter = 0.01;
  double voltage_jitter = 0.005;
  ConverterExperimentSetup setup;
};

struct ReductionValidationResult {
  double mean_reduction = 0.0;
  double mean_estimated = 0.0;
  double mean_comparison = 0.0;
  double mean_fcm_error = 0.0;
  double max_condition = 0.0;
  ExperimentResult output;
};

ReductionValidationResult run_reduction_validation(const ReductionValidationConfig& config);

// ---------------------------------------------------------------------------

/// Command-line overrides applied on top of a configuration document.
struct ExperimentOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> K;
  std::optional<int> samples;
  std::optional<double> noise;
  std::optional<int> runs;
};

AdmittanceSweepConfig admittance_sweep_config(const nlohmann::json& doc, const ExperimentOverrides& overrides = {});
FcmBatchSweepConfig fcm_batch_sweep_config(const nlohmann::json& doc, const ExperimentOverrides& overrides = {});
FcmOnlineConfig fcm_online_config(const nlohmann::json& doc, const ExperimentOverrides& overrides = {});
ReductionValidationConfig reduction_validation_config(const nlohmann::json& doc, const ExperimentOverrides& overrides = {});

nlohmann::json to_json(const AdmittanceSweepConfig& config);
nlohmann::json to_json(const FcmBatchSweepConfig& config);
nlohmann::json to_json(const FcmOnlineConfig& config);
nlohmann::json to_json(const ReductionValidationConfig& config);

const std::vector<std::string>& experiment_names();
/// Runs the named experiment; unknown names raise ValidationError.
ExperimentResult run_experiment(const std::string& name, const nlohmann::json& config,
                                const ExperimentOverrides& overrides = {});

}  // namespace fcm
