#include "fcm/scenario.hpp"

#include <algorithm>
#include <numbers>

namespace fcm {

Rng make_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t run) {
  auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffu); };
  auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  std::seed_seq seq{lo(seed), hi(seed), lo(stream), hi(stream), lo(run), hi(run)};
  return Rng(seq);
}

double mean_component_magnitude(const Eigen::Ref<const Eigen::VectorXd>& v) {
  return v.size() ? v.cwiseAbs().mean() : 0.0;
}

double mean_component_magnitude(const Eigen::Ref<const Eigen::VectorXcd>& v) {
  return v.size() ? v.cwiseAbs().mean() : 0.0;
}

void add_measurement_noise_inplace(Eigen::Ref<Eigen::MatrixXd> data, double relative_std, double reference, Rng& rng) {
  if (relative_std < 0.0) throw ValidationError("relative noise std must be non-negative");
  const double sd = relative_std * reference;
  if (sd == 0.0) return;
  std::normal_distribution<double> gauss(0.0, sd);
  for (Eigen::Index j = 0; j < data.cols(); ++j)
    for (Eigen::Index i = 0; i < data.rows(); ++i) data(i, j) += gauss(rng);
}

Eigen::MatrixXd add_measurement_noise(const Eigen::MatrixXd& data, double relative_std, double reference, Rng& rng) {
  Eigen::MatrixXd out = data;
  add_measurement_noise_inplace(out, relative_std, reference, rng);
  return out;
}

Eigen::MatrixXd add_measurement_noise(const Eigen::MatrixXd& data, const NoiseModel& model, double reference) {
  Rng rng = make_rng(model.seed);
  return add_measurement_noise(data, model.relative_std, reference, rng);
}

Eigen::MatrixXcd add_measurement_noise(const Eigen::MatrixXcd& data, double relative_std, double reference, Rng& rng) {
  if (relative_std < 0.0) throw ValidationError("relative noise std must be non-negative");
  const double sd = relative_std * reference;
  if (sd == 0.0) return data;
  std::normal_distribution<double> gauss(0.0, sd);
  Eigen::MatrixXcd out = data;
  for (Eigen::Index j = 0; j < out.cols(); ++j)
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
      const double re = gauss(rng);
      const double im = gauss(rng);
      out(i, j) += std::complex<double>(re, im);
    }
  return out;
}

// ---------------------------------------------------------------------------

std::complex<double> VoltageSamplingSpec::mean(int node, int phase, int k) const {
  const auto m1 = fundamental_mean.at(static_cast<std::size_t>(node))[static_cast<std::size_t>(phase)];
  if (k == 0) return {m1.real(), 0.0};
  return m1 / std::pow(decay, k);
}

double VoltageSamplingSpec::std_at(int k) const { return std_decays ? base_std / std::pow(decay, k) : base_std; }

VoltageSamplingSpec example_voltage_spec() {
  using C = std::complex<double>;
  VoltageSamplingSpec spec;
  spec.fundamental_mean = {
      {C(1.25, 0.625), C(1.0, 0.5), C(0.75, 0.375)},
      {C(2.5, 0.125), C(2.0, 0.1), C(1.5, 0.075)},
      {C(0.625, 1.25), C(0.5, 1.0), C(0.375, 0.75)},
  };
  return spec;
}

VoltageSamplingSpec converter_terminal_spec(double fundamental_magnitude) {
  VoltageSamplingSpec spec;
  std::array<std::complex<double>, kPhaseCount> m{};
  for (int ph = 0; ph < kPhaseCount; ++ph)
    m[static_cast<std::size_t>(ph)] = std::polar(fundamental_magnitude, -2.0 * std::numbers::pi * ph / 3.0);
  spec.fundamental_mean = {m};
  spec.std_decays = false;
  spec.excite_dc_imag = true;
  return spec;
}

Eigen::VectorXcd mean_bus_voltage(const VoltageSamplingSpec& spec, const HarmonicConfig& cfg) {
  const int n = spec.node_count();
  Eigen::VectorXcd v(3 * n * cfg.orders());
  for (int k = 0; k <= cfg.K; ++k)
    for (int ph = 0; ph < kPhaseCount; ++ph)
      for (int node = 0; node < n; ++node) v((k * kPhaseCount + ph) * n + node) = spec.mean(node, ph, k);
  return v;
}

Eigen::MatrixXcd sample_bus_voltages(const VoltageSamplingSpec& spec, const HarmonicConfig& cfg, int samples, Rng& rng) {
  if (samples < 1) throw ValidationError("sample count must be at least 1");
  const int n = spec.node_count();
  const Eigen::VectorXcd mean = mean_bus_voltage(spec, cfg);
  Eigen::MatrixXcd out(mean.size(), samples);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int t = 0; t < samples; ++t)
    for (int k = 0; k <= cfg.K; ++k) {
      const double sd = spec.std_at(k);
      for (int ph = 0; ph < kPhaseCount; ++ph)
        for (int node = 0; node < n; ++node) {
          const int i = (k * kPhaseCount + ph) * n + node;
          const double re = sd * gauss(rng);
          const double im = (k != 0 || spec.excite_dc_imag) ? sd * gauss(rng) : 0.0;
          out(i, t) = mean(i) + std::complex<double>(re, im);
        }
    }
  return out;
}

Eigen::VectorXd terminal_real_vector(const Eigen::VectorXcd& bus, const HarmonicConfig& cfg, int node_count, int node) {
  Eigen::VectorXd v(cfg.p());
  for (int ph = 0; ph < kPhaseCount; ++ph)
    for (int k = 0; k <= cfg.K; ++k) {
      const auto x = bus((k * kPhaseCount + ph) * node_count + node);
      v(cfg.real_index(ph, k)) = x.real();
      v(cfg.real_index(ph, k) + 1) = x.imag();
    }
  return v;
}

Eigen::VectorXd terminal_mean(const VoltageSamplingSpec& spec, const HarmonicConfig& cfg, const DcCurrentSpec& dc) {
  if (spec.node_count() != 1) throw ValidationError("terminal spec must describe exactly one node");
  Eigen::VectorXd v(cfg.q());
  v.head(cfg.p()) = terminal_real_vector(mean_bus_voltage(spec, cfg), cfg, 1, 0);
  v(cfg.p()) = dc.mean;
  return v;
}

Eigen::MatrixXd sample_terminal_inputs(const VoltageSamplingSpec& spec, const HarmonicConfig& cfg, const DcCurrentSpec& dc,
                                       int samples, Rng& rng) {
  if (spec.node_count() != 1) throw ValidationError("terminal spec must describe exactly one node");
  const Eigen::MatrixXcd bus = sample_bus_voltages(spec, cfg, samples, rng);
  std::normal_distribution<double> gauss(dc.mean, dc.std);
  Eigen::MatrixXd v(cfg.q(), samples);
  for (int t = 0; t < samples; ++t) {
    v.col(t).head(cfg.p()) = terminal_real_vector(bus.col(t), cfg, 1, 0);
    v(cfg.p(), t) = dc.std > 0.0 ? gauss(rng) : dc.mean;
  }
  return v;
}

// ---------------------------------------------------------------------------

SwitchingPattern sample_switching_pattern(int length, Rng& rng) {
  if (length < 1) throw ValidationError("switching sequence length must be positive");
  std::uniform_real_distribution<double> when(0.0, 2.0 * std::numbers::pi);
  std::bernoulli_distribution state(0.5);
  SwitchingPattern pattern;
  for (int i = 0; i < length; ++i) pattern.times.push_back(when(rng));
  std::sort(pattern.times.begin(), pattern.times.end());
  for (int i = 0; i < length; ++i) pattern.states.push_back(state(rng) ? 1 : 0);
  return pattern;
}

std::complex<double> switching_coefficient(const SwitchingPattern& pattern, int n) {
  const auto count = pattern.times.size();
  if (count == 0 || pattern.states.size() != count) throw ValidationError("switching pattern is empty or inconsistent");
  constexpr double two_pi = 2.0 * std::numbers::pi;
  std::complex<double> sum = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    if (pattern.states[i] == 0) continue;
    const double start = pattern.times[i];
    const double end = i + 1 < count ? pattern.times[i + 1] : pattern.times[0] + two_pi;
    if (n == 0) {
      sum += (end - start) / two_pi;
    } else {
      const double dn = n;
      sum += (std::polar(1.0, -dn * start) - std::polar(1.0, -dn * end)) / std::complex<double>(0.0, two_pi * dn);
    }
  }
  return sum;
}

Fcm synth_converter_fcm(const SyntheticConverterSpec& spec, const HarmonicConfig& cfg) {
  SwitchingPattern pattern;
  if (spec.pattern) {
    pattern = *spec.pattern;
  } else {
    Rng rng = make_rng(spec.seed, 0x5717c4);
    pattern = sample_switching_pattern(spec.switching_length, rng);
  }
  for (std::size_t i = 1; i < pattern.times.size(); ++i)
    if (pattern.times[i] < pattern.times[i - 1]) throw ValidationError("switching times must be sorted");

  const int K = cfg.K;
  const int block = cfg.complex_phase_block();
  const int n = cfg.complex_size();
  using C = std::complex<double>;

  std::vector<C> coeff(static_cast<std::size_t>(4 * K + 1));
  for (int m = -2 * K; m <= 2 * K; ++m) coeff[static_cast<std::size_t>(m + 2 * K)] = switching_coefficient(pattern, m);

  // Stacked phase convolution operators: column block j holds phase j's leg.
  Eigen::MatrixXcd legs(n, block);
  for (int ph = 0; ph < kPhaseCount; ++ph) {
    const double shift = 2.0 * std::numbers::pi * ph / 3.0;
    for (int k = -K; k <= K; ++k)
      for (int m = -K; m <= K; ++m) {
        const int d = k - m;
        legs(cfg.complex_index(ph, k), m + K) = coeff[static_cast<std::size_t>(d + 2 * K)] * std::polar(1.0, -d * shift);
      }
  }

  Eigen::VectorXcd y(n);
  for (int ph = 0; ph < kPhaseCount; ++ph)
    for (int k = -K; k <= K; ++k) y(cfg.complex_index(ph, k)) = 1.0 / C(spec.series_r, k * spec.series_x);
  Eigen::VectorXcd z_dc(block);
  for (int k = -K; k <= K; ++k) z_dc(k + K) = 1.0 / C(1.0 / spec.dc_r, k / spec.dc_cap_x);

  // i = Y (v - legs v_dc),  v_dc = Z_dc (e0 i_dc + legs^H i)
  const Eigen::MatrixXcd y_legs_z = y.asDiagonal() * legs * z_dc.asDiagonal();
  const Eigen::MatrixXcd system = Eigen::MatrixXcd::Identity(n, n) + y_legs_z * legs.adjoint();
  const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(system);
  const Eigen::MatrixXcd fbar = lu.solve(Eigen::MatrixXcd(y.asDiagonal()));
  const Eigen::VectorXcd f = -lu.solve(y_legs_z.col(K));

  Eigen::MatrixXd real = real_from_complex_matrix(cfg, fbar, f);
  if (spec.normalize) {
    const double norm = real.leftCols(cfg.p()).norm();
    if (norm > 0.0) real *= std::sqrt(static_cast<double>(cfg.p())) / norm;
  }
  return Fcm(std::move(real));
}

}  // namespace fcm
