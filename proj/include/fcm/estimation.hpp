#pragma once

#include <Eigen/Dense>

#include <utility>
#include <vector>

#include "fcm/harmonic.hpp"
#include "fcm/network.hpp"

namespace fcm {

/// Paired converter measurements: currents (p x T) and voltage-plus-dc (q x T).
struct MeasurementBatch {
  Eigen::MatrixXd currents;
  Eigen::MatrixXd voltages;
  std::vector<double> timestamps;

  MeasurementBatch() = default;
  MeasurementBatch(Eigen::MatrixXd i, Eigen::MatrixXd v, std::vector<double> t = {});

  Eigen::Index samples() const { return currents.cols(); }
};

struct FcmEstimate {
  Fcm fcm;
  /// Set when V V^T was singular (or numerically so) and the pseudo-inverse was used.
  bool rank_deficient = false;
  Eigen::Index rank = 0;
};

/// Least-squares FCM: F = I V^T (V V^T)^-1, or I pinv(V) when V lacks full row rank.
FcmEstimate estimate_fcm_batch(const MeasurementBatch& batch);
FcmEstimate estimate_fcm_batch(const Eigen::MatrixXd& currents, const Eigen::MatrixXd& voltages);

// ---------------------------------------------------------------------------

/// Bus-level complex phasors for all nodes, orders and phases (u x T each).
struct NetworkMeasurementBatch {
  Eigen::MatrixXcd currents;
  Eigen::MatrixXcd voltages;
};

/// Known radial topology by node position (0..N-1).
struct Topology {
  int node_count = 0;
  std::vector<std::pair<int, int>> lines;

  static Topology of(const HarmonicNetwork& net);
};

struct AdmittanceEstimate {
  HarmonicAdmittance admittance;
  bool rank_deficient = false;
};

/// Structured estimator: one symmetric, topology-sparse complex least-squares
/// problem per (order, phase) block.
AdmittanceEstimate estimate_admittance(const NetworkMeasurementBatch& batch, const Topology& topology,
                                       const HarmonicConfig& cfg);

/// Reference estimator built literally from vec(I) = (V^T kron I_u) Q T y.
/// Only available for K <= 2 and N <= 3.
AdmittanceEstimate estimate_admittance_kronecker(const NetworkMeasurementBatch& batch, const Topology& topology,
                                                 const HarmonicConfig& cfg);

// ---------------------------------------------------------------------------

/// Sliding-window FCM estimator keeping (V V^T)^-1 current with two
/// Sherman-Morrison corrections per step.
class OnlineFcmEstimator {
 public:
  struct Options {
    /// Steps between full recomputations of the Gram inverse.
    int refresh_interval = 1000;
    /// Downdate denominators below this trigger a full refactor.
    double downdate_tolerance = 1e-12;
  };

  explicit OnlineFcmEstimator(const MeasurementBatch& preliminary) : OnlineFcmEstimator(preliminary, Options{}) {}
  OnlineFcmEstimator(const MeasurementBatch& preliminary, Options options);

  /// Slides the window by one sample and returns the updated estimate.
  const Fcm& step(const Eigen::VectorXd& current, const Eigen::VectorXd& voltage);

  const Fcm& estimate() const { return fcm_; }
  const Eigen::MatrixXd& gram_inverse() const { return gram_inv_; }
  /// Window contents, oldest sample first.
  Eigen::MatrixXd window_currents() const;
  Eigen::MatrixXd window_voltages() const;
  Eigen::Index window() const { return currents_.cols(); }
  long steps() const { return steps_; }
  long refactor_count() const { return refactors_; }
  int steps_since_refactor() const { return since_refactor_; }

 private:
  void refactor();
  Eigen::MatrixXd chronological(const Eigen::MatrixXd& ring) const;

  Options options_;
  Eigen::MatrixXd currents_;
  Eigen::MatrixXd voltages_;
  Eigen::Index head_ = 0;  // column holding the oldest sample
  Eigen::MatrixXd gram_inv_;
  Eigen::MatrixXd cross_;  // I V^T
  Fcm fcm_;
  long steps_ = 0;
  long refactors_ = 0;
  int since_refactor_ = 0;
};

}  // namespace fcm
