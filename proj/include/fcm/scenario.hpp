#pragma once

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "fcm/harmonic.hpp"

namespace fcm {

using Rng = std::mt19937_64;

/// Deterministic generator for (seed, stream, run); distinct triples give independent streams.
Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0, std::uint64_t run = 0);

struct NoiseModel {
  double relative_std = 0.0;
  std::uint64_t seed = 0;
};

/// Mean absolute value of the entries; the magnitude reference for relative noise.
double mean_component_magnitude(const Eigen::Ref<const Eigen::VectorXd>& v);
double mean_component_magnitude(const Eigen::Ref<const Eigen::VectorXcd>& v);

/// Adds i.i.d. N(0, (relative_std * reference)^2) to every real component.
Eigen::MatrixXd add_measurement_noise(const Eigen::MatrixXd& data, double relative_std, double reference, Rng& rng);
Eigen::MatrixXd add_measurement_noise(const Eigen::MatrixXd& data, const NoiseModel& model, double reference);
/// In-place variant for large sample matrices.
void add_measurement_noise_inplace(Eigen::Ref<Eigen::MatrixXd> data, double relative_std, double reference, Rng& rng);
/// Complex overload: independent noise on real and imaginary parts.
Eigen::MatrixXcd add_measurement_noise(const Eigen::MatrixXcd& data, double relative_std, double reference, Rng& rng);

/// Gaussian phasor sampling around decayed fundamental means.
///
/// The mean at order k is m1 / decay^k; at k = 0 only Re(m1) is used. Each real
/// component is drawn with std base_std / decay^k (or base_std when
/// std_decays is false). Im(x^0) is held at zero unless excite_dc_imag is set.
struct VoltageSamplingSpec {
  /// Fundamental (k = 1) complex mean, one entry per node, per phase.
  std::vector<std::array<std::complex<double>, kPhaseCount>> fundamental_mean;
  double decay = 1.1;
  double base_std = 0.005;
  bool std_decays = true;
  bool excite_dc_imag = false;

  int node_count() const { return static_cast<int>(fundamental_mean.size()); }
  std::complex<double> mean(int node, int phase, int k) const;
  double std_at(int k) const;
};

/// Node voltage means of the three-node admittance example (volts at k = 1).
VoltageSamplingSpec example_voltage_spec();

/// Single-terminal spec used for converter FCM experiments: a balanced
/// positive-sequence fundamental of the given magnitude, constant std per
/// component and an excited Im(v^0).
VoltageSamplingSpec converter_terminal_spec(double fundamental_magnitude);

/// Mean bus voltage vector (length u = 3N(K+1), index ((k*3)+phase)*N + node).
Eigen::VectorXcd mean_bus_voltage(const VoltageSamplingSpec& spec, const HarmonicConfig& cfg);
/// Bus voltage samples, u x T.
Eigen::MatrixXcd sample_bus_voltages(const VoltageSamplingSpec& spec, const HarmonicConfig& cfg, int samples, Rng& rng);

/// Real harmonic vector (length p) of node `node` from a bus vector.
Eigen::VectorXd terminal_real_vector(const Eigen::VectorXcd& bus, const HarmonicConfig& cfg, int node_count, int node);

/// dc-slot statistics for converter input samples.
struct DcCurrentSpec {
  double mean = 0.005;
  double std = 0.005;
};

/// Mean voltage-plus-dc vector (length q) for a single-node spec.
Eigen::VectorXd terminal_mean(const VoltageSamplingSpec& spec, const HarmonicConfig& cfg, const DcCurrentSpec& dc);
/// Converter input samples V (q x T): sampled terminal voltage plus sampled dc current.
Eigen::MatrixXd sample_terminal_inputs(const VoltageSamplingSpec& spec, const HarmonicConfig& cfg, const DcCurrentSpec& dc,
                                       int samples, Rng& rng);

/// Piecewise-constant switching function on one fundamental period.
/// s(t) = states[i] for t in [times[i], times[i+1]), wrapping at 2 pi.
struct SwitchingPattern {
  std::vector<double> times;
  std::vector<int> states;
};

SwitchingPattern sample_switching_pattern(int length, Rng& rng);
/// Fourier coefficient S^n = (1 / 2 pi) * integral of s(t) e^{-j n t} over one period.
std::complex<double> switching_coefficient(const SwitchingPattern& pattern, int n);

/// Parameters of the synthetic converter model. The ac side is a series r + jkx
/// filter per phase; each phase leg connects the filter to a shared dc bus
/// through the switching function; the dc bus is a resistance in parallel with
/// a capacitor and is fed by the dc current.
struct SyntheticConverterSpec {
  int switching_length = 8;
  std::uint64_t seed = 1;
  double series_r = 0.05;
  double series_x = 0.5;
  double dc_r = 0.1;
  double dc_cap_x = 0.2;
  /// Scale F so that ||Fbar||_F^2 = p.
  bool normalize = true;
  /// Overrides the sampled switching pattern (shared by all phases, shifted by 2 pi / 3).
  std::optional<SwitchingPattern> pattern;
};

Fcm synth_converter_fcm(const SyntheticConverterSpec& spec, const HarmonicConfig& cfg);

}  // namespace fcm
