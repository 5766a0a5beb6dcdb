#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>

#include "fcm/estimation.hpp"
#include "fcm/experiments.hpp"
#include "fcm/io.hpp"
#include "fcm/reduction.hpp"
#include "fcm/scenario.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

struct CommonFlags {
  std::uint64_t seed = 1;
  int K = 50;
  int T = 0;
  double noise = 0.0;
  int runs = 0;
  std::string out_dir = ".";
};

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw fcm::ValidationError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw fcm::ValidationError("'" + path + "': " + e.what());
  }
}

fcm::VoltageSamplingSpec voltage_spec_from(const json& doc) {
  fcm::VoltageSamplingSpec spec;
  try {
    for (const auto& node : doc.at("fundamental_mean")) {
      if (node.size() != fcm::kPhaseCount) throw fcm::ValidationError("voltage spec: one [re, im] pair per phase required");
      std::array<std::complex<double>, fcm::kPhaseCount> m{};
      for (int ph = 0; ph < fcm::kPhaseCount; ++ph) m[ph] = {node[ph].at(0).get<double>(), node[ph].at(1).get<double>()};
      spec.fundamental_mean.push_back(m);
    }
    spec.decay = doc.value("decay", spec.decay);
    spec.base_std = doc.value("base_std", spec.base_std);
    spec.std_decays = doc.value("std_decays", spec.std_decays);
    spec.excite_dc_imag = doc.value("excite_dc_imag", spec.excite_dc_imag);
  } catch (const json::exception& e) {
    throw fcm::ValidationError(std::string("voltage spec: ") + e.what());
  }
  if (spec.fundamental_mean.empty()) throw fcm::ValidationError("voltage spec lists no nodes");
  return spec;
}

fcm::NetworkBuildOptions build_options(const CLI::App& sub, const CommonFlags& flags) {
  fcm::NetworkBuildOptions options;
  if (sub.count("--K")) options.force_K = flags.K;
  return options;
}

void check_K(const CLI::App& sub, const CommonFlags& flags, int file_K) {
  if (sub.count("--K") && flags.K != file_K)
    throw fcm::ValidationError("--K " + std::to_string(flags.K) + " does not match the data (K = " + std::to_string(file_K) + ")");
}

// --- simulate ---------------------------------------------------------------

int run_simulate(const CLI::App& sub, const CommonFlags& flags, const std::string& network_path,
                 const std::string& spec_path, bool bus_mode) {
  const fcm::HarmonicNetwork net = fcm::load_network(network_path, build_options(sub, flags));
  const auto& cfg = net.config();
  const int samples = flags.T > 0 ? flags.T : 2 * cfg.q();
  fcm::Rng rng = fcm::make_rng(flags.seed, 0x5131, 0);
  const fs::path out = flags.out_dir;

  if (bus_mode) {
    if (!net.converters().empty())
      throw fcm::ValidationError("bus simulation needs a converter-free network (currents follow from Y_H)");
    fcm::VoltageSamplingSpec spec;
    if (!spec_path.empty()) {
      spec = voltage_spec_from(load_json(spec_path));
    } else if (net.node_count() == 3) {
      spec = fcm::example_voltage_spec();
    } else {
      throw fcm::ValidationError("--voltage-spec is required for networks with other than three nodes");
    }
    if (spec.node_count() != net.node_count()) throw fcm::ValidationError("voltage spec and network differ in node count");
    const fcm::HarmonicAdmittance y = fcm::assemble_harmonic_admittance(net);
    const Eigen::MatrixXcd v = fcm::sample_bus_voltages(spec, cfg, samples, rng);
    const Eigen::MatrixXcd i = y.apply(v);
    const Eigen::VectorXcd mean = fcm::mean_bus_voltage(spec, cfg);
    const double ref_v = fcm::mean_component_magnitude(mean);
    const double ref_i = fcm::mean_component_magnitude(Eigen::VectorXcd(y.apply(mean)));
    fs::create_directories(out);
    fcm::io::write_bus_csv(out / "bus_voltages.csv", fcm::add_measurement_noise(v, flags.noise, ref_v, rng), cfg.K, net.node_count());
    fcm::io::write_bus_csv(out / "bus_currents.csv", fcm::add_measurement_noise(i, flags.noise, ref_i, rng), cfg.K, net.node_count());
    fcm::io::write_admittance_file(out / "admittance_true.csv", y);
    std::cout << "wrote " << samples << " bus samples to " << out.string() << "\n";
    return 0;
  }

  fcm::VoltageSamplingSpec spec = fcm::converter_terminal_spec(0.4);
  if (!spec_path.empty()) spec = voltage_spec_from(load_json(spec_path));
  const fcm::DcCurrentSpec dc{1.0, 0.0};
  Eigen::MatrixXd v = fcm::sample_terminal_inputs(spec, cfg, dc, samples, rng);
  const fcm::NetworkSolver solver(net);
  Eigen::MatrixXd i = solver.root_currents(v.topRows(cfg.p()));
  const Eigen::VectorXd mean = fcm::terminal_mean(spec, cfg, dc);
  const double ref_v = fcm::mean_component_magnitude(Eigen::VectorXd(mean.head(cfg.p())));
  const double ref_i = fcm::mean_component_magnitude(Eigen::VectorXd(solver.root_currents(mean.head(cfg.p()))));
  fcm::add_measurement_noise_inplace(v.topRows(cfg.p()), flags.noise, ref_v, rng);
  fcm::add_measurement_noise_inplace(i, flags.noise, ref_i, rng);
  const fcm::ReductionReport report = fcm::reduce_tree(net);
  fs::create_directories(out);
  fcm::io::write_sample_csv(out / "voltages.csv", v, cfg.K, 1);
  fcm::io::write_sample_csv(out / "currents.csv", i, cfg.K, 1);
  fcm::io::write_matrix_file(out / "fcm_true.csv", report.fcm.matrix(), cfg.K);
  std::cout << "wrote " << samples << " root samples to " << out.string() << "\n";
  return 0;
}

// --- estimation -------------------------------------------------------------

std::pair<fcm::io::SampleFile, fcm::io::SampleFile> load_pair(const std::string& currents, const std::string& voltages) {
  auto i = fcm::io::read_sample_csv(currents);
  auto v = fcm::io::read_sample_csv(voltages);
  if (i.K != v.K) throw fcm::ValidationError("current and voltage files disagree on K");
  return {std::move(i), std::move(v)};
}

int run_estimate_fcm(const CLI::App& sub, const CommonFlags& flags, const std::string& currents,
                     const std::string& voltages, const std::string& truth) {
  auto [i, v] = load_pair(currents, voltages);
  check_K(sub, flags, i.K);
  const fcm::FcmEstimate est = fcm::estimate_fcm_batch(fcm::MeasurementBatch(i.samples, v.samples));
  if (est.rank_deficient)
    std::cerr << "warning: V V^T is rank deficient (rank " << est.rank << " of " << v.samples.rows()
              << "); pseudo-inverse used\n";
  fs::create_directories(flags.out_dir);
  const fs::path out = fs::path(flags.out_dir) / "fcm_estimate.csv";
  fcm::io::write_matrix_file(out, est.fcm.matrix(), i.K);
  std::cout << "wrote " << out.string() << "\n";
  if (!truth.empty()) {
    const auto t = fcm::io::read_matrix_file(truth);
    std::cout << "relative_error," << fcm::io::format_number(fcm::relative_error(est.fcm.matrix(), t.matrix)) << "\n";
  }
  return 0;
}

int run_estimate_fcm_online(const CLI::App& sub, const CommonFlags& flags, const std::string& currents,
                            const std::string& voltages, const std::string& truth_path, int refresh) {
  auto [i, v] = load_pair(currents, voltages);
  check_K(sub, flags, i.K);
  const fcm::HarmonicConfig cfg(i.K);
  const Eigen::Index total = i.samples.cols();
  const Eigen::Index window = flags.T > 0 ? flags.T : 2 * cfg.q();
  if (window > total) throw fcm::ValidationError("stream is shorter than the estimation window");
  const auto truth = fcm::io::read_matrix_file(truth_path);
  if (truth.matrix.rows() != cfg.p() || truth.matrix.cols() != cfg.q())
    throw fcm::ValidationError("reference FCM dimensions do not match the data");
  const fcm::OnlineNormalization norm{truth.matrix.squaredNorm()};

  fcm::OnlineFcmEstimator::Options options;
  options.refresh_interval = refresh;
  fcm::OnlineFcmEstimator est(fcm::MeasurementBatch(i.samples.leftCols(window), v.samples.leftCols(window)), options);
  fcm::io::Table table{"online", {"step", "error"}, {}};
  table.rows.push_back({0.0, fcm::relative_error(est.estimate().matrix(), truth.matrix, norm)});
  for (Eigen::Index t = window; t < total; ++t) {
    est.step(i.samples.col(t), v.samples.col(t));
    table.rows.push_back({static_cast<double>(t - window + 1), fcm::relative_error(est.estimate().matrix(), truth.matrix, norm)});
  }
  fs::create_directories(flags.out_dir);
  const fs::path out = fs::path(flags.out_dir) / "online_errors.csv";
  fcm::io::write_table_csv(out, table);
  fcm::io::write_matrix_file(fs::path(flags.out_dir) / "fcm_online_final.csv", est.estimate().matrix(), cfg.K);
  std::cout << "wrote " << out.string() << " (" << table.rows.size() << " rows)\n";
  return 0;
}

int run_estimate_admittance(const CLI::App& sub, const CommonFlags& flags, const std::string& currents,
                            const std::string& voltages, const std::string& network_path) {
  const auto i = fcm::io::read_bus_csv(currents);
  const auto v = fcm::io::read_bus_csv(voltages);
  if (i.K != v.K || i.N != v.N) throw fcm::ValidationError("bus current and voltage files disagree on K or N");
  check_K(sub, flags, i.K);
  fcm::NetworkBuildOptions options;
  options.force_K = i.K;
  const fcm::HarmonicNetwork net = fcm::load_network(network_path, options);
  if (net.node_count() != i.N) throw fcm::ValidationError("network document and bus files differ in node count");
  const fcm::HarmonicConfig cfg(i.K);
  const auto est = fcm::estimate_admittance({i.samples, v.samples}, fcm::Topology::of(net), cfg);
  if (est.rank_deficient) std::cerr << "warning: admittance regression is rank deficient; pseudo-inverse used\n";
  fs::create_directories(flags.out_dir);
  const fs::path out = fs::path(flags.out_dir) / "admittance_estimate.csv";
  fcm::io::write_admittance_file(out, est.admittance);
  std::cout << "wrote " << out.string() << "\n";
  return 0;
}

// --- reduce -----------------------------------------------------------------

int run_reduce(const CLI::App& sub, const CommonFlags& flags, const std::string& network_path) {
  const fcm::HarmonicNetwork net = fcm::load_network(network_path, build_options(sub, flags));
  const fcm::ReductionReport report = fcm::reduce_tree(net);
  fs::create_directories(flags.out_dir);
  const fs::path out = fs::path(flags.out_dir) / "virtual_fcm.csv";
  fcm::io::write_matrix_file(out, report.fcm.matrix(), net.config().K);
  json doc;
  doc["K"] = net.config().K;
  doc["root"] = net.root();
  doc["trace"] = report.trace;
  doc["conditions"] = json::array();
  for (const auto& c : report.conditions)
    doc["conditions"].push_back({{"parent", c.parent}, {"leaf", c.leaf}, {"condition", c.condition}});
  std::ofstream rep(fs::path(flags.out_dir) / "reduction_report.json");
  rep << doc.dump(2) << "\n";
  std::cout << "wrote " << out.string() << "\n";
  return 0;
}

// --- experiment -------------------------------------------------------------

int run_experiment_cmd(const CLI::App& sub, const CommonFlags& flags, const std::string& name, const std::string& config) {
  fcm::ExperimentOverrides o;
  if (sub.count("--seed")) o.seed = flags.seed;
  if (sub.count("--K")) o.K = flags.K;
  if (sub.count("--T")) o.samples = flags.T;
  if (sub.count("--noise")) o.noise = flags.noise;
  if (sub.count("--runs")) o.runs = flags.runs;
  const json doc = config.empty() ? json::object() : load_json(config);
  const fcm::ExperimentResult result = fcm::run_experiment(name, doc, o);
  fcm::write_experiment(result, flags.out_dir);
  for (const auto& t : result.tables)
    std::cout << "wrote " << (fs::path(flags.out_dir) / (result.name + "_" + t.name + ".csv")).string() << "\n";
  return 0;
}

void add_common(CLI::App* sub, CommonFlags& flags, bool with_runs) {
  sub->add_option("--seed", flags.seed, "Random seed")->capture_default_str();
  sub->add_option("--K", flags.K, "Maximum harmonic order")->capture_default_str()->check(CLI::NonNegativeNumber);
  sub->add_option("--T", flags.T, "Number of samples / window length")->check(CLI::NonNegativeNumber);
  sub->add_option("--noise", flags.noise, "Relative measurement noise std (0.01 = 1%)")->check(CLI::NonNegativeNumber);
  if (with_runs) sub->add_option("--runs", flags.runs, "Monte-Carlo runs")->check(CLI::PositiveNumber);
  sub->add_option("--out-dir", flags.out_dir, "Output directory")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Harmonic network simulation, reduction and FCM / admittance estimation"};
  app.require_subcommand(1);
  CommonFlags flags;
  std::string network, voltage_spec, currents, voltages, truth, config, name;
  bool bus = false;
  int refresh = 1000;

  auto* sim = app.add_subcommand("simulate", "Simulate measurements for a network document");
  add_common(sim, flags, false);
  sim->add_option("--network", network, "Network document (JSON)")->required();
  sim->add_option("--voltage-spec", voltage_spec, "Voltage sampling spec (JSON)");
  sim->add_flag("--bus", bus, "Write bus-level measurements of a converter-free network");

  auto* efcm = app.add_subcommand("estimate-fcm", "Batch least-squares FCM estimate from a current/voltage CSV pair");
  add_common(efcm, flags, false);
  efcm->add_option("--currents", currents, "Current samples CSV")->required();
  efcm->add_option("--voltages", voltages, "Voltage-plus-dc samples CSV")->required();
  efcm->add_option("--truth", truth, "Reference FCM file for error reporting");

  auto* eonl = app.add_subcommand("estimate-fcm-online", "Sliding-window FCM estimation over a CSV stream");
  add_common(eonl, flags, false);
  eonl->add_option("--currents", currents, "Current samples CSV")->required();
  eonl->add_option("--voltages", voltages, "Voltage-plus-dc samples CSV")->required();
  eonl->add_option("--truth", truth, "Reference FCM file")->required();
  eonl->add_option("--refresh", refresh, "Steps between full Gram inversions")->capture_default_str()->check(CLI::PositiveNumber);

  auto* eadm = app.add_subcommand("estimate-admittance", "Harmonic admittance estimate from bus CSVs and a topology");
  add_common(eadm, flags, false);
  eadm->add_option("--currents", currents, "Bus current CSV")->required();
  eadm->add_option("--voltages", voltages, "Bus voltage CSV")->required();
  eadm->add_option("--network", network, "Network document providing the topology")->required();

  auto* red = app.add_subcommand("reduce", "Reduce a network to the virtual FCM at its root");
  add_common(red, flags, false);
  red->add_option("--network", network, "Network document (JSON)")->required();

  auto* exp = app.add_subcommand("experiment", "Run a named experiment");
  add_common(exp, flags, true);
  exp->add_option("name", name, "admittance_sweep | fcm_batch_sweep | fcm_online | reduction_validation")->required();
  exp->add_option("--config", config, "Experiment configuration (JSON)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*sim) return run_simulate(*sim, flags, network, voltage_spec, bus);
    if (*efcm) return run_estimate_fcm(*efcm, flags, currents, voltages, truth);
    if (*eonl) return run_estimate_fcm_online(*eonl, flags, currents, voltages, truth, refresh);
    if (*eadm) return run_estimate_admittance(*eadm, flags, currents, voltages, network);
    if (*red) return run_reduce(*red, flags, network);
    if (*exp) return run_experiment_cmd(*exp, flags, name, config);
  } catch (const fcm::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const fcm::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitValidation;
}
