#include "fcm/harmonic.hpp"

namespace fcm {

HarmonicConfig HarmonicConfig::from_real_length(Eigen::Index n) {
  if (n >= 6 && n % 6 == 0) return HarmonicConfig(static_cast<int>(n / 6) - 1);
  if (n >= 7 && (n - 1) % 6 == 0) return HarmonicConfig(static_cast<int>((n - 1) / 6) - 1);
  throw ValidationError("length " + std::to_string(n) + " is neither p = 6(K+1) nor q = p+1");
}

Eigen::MatrixXd LineImpedance::real_matrix(const HarmonicConfig& cfg) const {
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(cfg.p(), cfg.p());
  for (int ph = 0; ph < kPhaseCount; ++ph)
    for (int k = 0; k <= cfg.K; ++k) {
      const int i = cfg.real_index(ph, k);
      const double reactance = static_cast<double>(k) * x[ph];
      z(i, i) = r[ph];
      z(i + 1, i + 1) = r[ph];
      z(i, i + 1) = -reactance;
      z(i + 1, i) = reactance;
    }
  return z;
}

Eigen::VectorXcd LineImpedance::complex_diagonal(const HarmonicConfig& cfg) const {
  Eigen::VectorXcd d(cfg.complex_size());
  for (int ph = 0; ph < kPhaseCount; ++ph)
    for (int k = -cfg.K; k <= cfg.K; ++k) d(cfg.complex_index(ph, k)) = z(ph, k);
  return d;
}

std::string phase_name(int phase) { return std::string(1, kPhaseNames.at(static_cast<std::size_t>(phase))); }

}  // namespace fcm
