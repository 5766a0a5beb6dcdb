#include "fcm/estimation.hpp"

namespace fcm {

namespace {

// Below this reciprocal condition number the Gram matrix is treated as singular.
constexpr double kGramRcondFloor = 1e-13;

}  // namespace

MeasurementBatch::MeasurementBatch(Eigen::MatrixXd i, Eigen::MatrixXd v, std::vector<double> t)
    : currents(std::move(i)), voltages(std::move(v)), timestamps(std::move(t)) {
  if (currents.cols() != voltages.cols()) throw ValidationError("current and voltage batches differ in sample count");
  if (voltages.rows() != currents.rows() + 1) throw ValidationError("voltage rows must equal current rows + 1 (dc slot)");
  if (!timestamps.empty() && static_cast<Eigen::Index>(timestamps.size()) != currents.cols())
    throw ValidationError("timestamps do not match sample count");
}

FcmEstimate estimate_fcm_batch(const MeasurementBatch& batch) { return estimate_fcm_batch(batch.currents, batch.voltages); }

FcmEstimate estimate_fcm_batch(const Eigen::MatrixXd& currents, const Eigen::MatrixXd& voltages) {
  if (currents.cols() != voltages.cols()) throw ValidationError("current and voltage batches differ in sample count");
  if (voltages.rows() != currents.rows() + 1) throw ValidationError("voltage rows must equal current rows + 1 (dc slot)");
  const Eigen::Index q = voltages.rows();

  FcmEstimate out;
  if (voltages.cols() >= q) {
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(q, q);
    gram.selfadjointView<Eigen::Lower>().rankUpdate(voltages);
    const Eigen::LLT<Eigen::MatrixXd> llt(gram.selfadjointView<Eigen::Lower>());
    if (llt.info() == Eigen::Success && llt.rcond() > kGramRcondFloor) {
      const Eigen::MatrixXd cross_t = voltages * currents.transpose();  // V I^T
      out.fcm = Fcm(llt.solve(cross_t).transpose());
      out.rank = q;
      return out;
    }
  }
  // Minimum-norm solution F = I pinv(V).
  const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(voltages.transpose());
  out.fcm = Fcm(cod.solve(currents.transpose()).transpose());
  out.rank = cod.rank();
  out.rank_deficient = out.rank < q;
  return out;
}

// ---------------------------------------------------------------------------

OnlineFcmEstimator::OnlineFcmEstimator(const MeasurementBatch& preliminary, Options options)
    : options_(options), currents_(preliminary.currents), voltages_(preliminary.voltages) {
  if (voltages_.rows() != currents_.rows() + 1 || currents_.cols() != voltages_.cols())
    throw ValidationError("online estimator: inconsistent preliminary batch");
  if (voltages_.cols() < voltages_.rows())
    throw ValidationError("online estimator: window must hold at least q samples");
  if (options_.refresh_interval < 1) throw ValidationError("online estimator: refresh interval must be positive");
  refactor();
  refactors_ = 0;
}

void OnlineFcmEstimator::refactor() {
  const Eigen::Index q = voltages_.rows();
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(q, q);
  gram.selfadjointView<Eigen::Lower>().rankUpdate(voltages_);
  const Eigen::LLT<Eigen::MatrixXd> llt(gram.selfadjointView<Eigen::Lower>());
  if (llt.info() != Eigen::Success || !(llt.rcond() > kGramRcondFloor))
    throw NumericalError("online estimator: V V^T of the window is singular");
  gram_inv_ = llt.solve(Eigen::MatrixXd::Identity(q, q));
  cross_ = currents_ * voltages_.transpose();
  fcm_ = Fcm(cross_ * gram_inv_);
  since_refactor_ = 0;
  ++refactors_;
}

const Fcm& OnlineFcmEstimator::step(const Eigen::VectorXd& current, const Eigen::VectorXd& voltage) {
  if (current.size() != currents_.rows() || voltage.size() != voltages_.rows())
    throw ValidationError("online estimator: sample dimensions do not match the window");

  const Eigen::VectorXd c = voltages_.col(head_);
  const Eigen::VectorXd old_i = currents_.col(head_);

  // Slide the window: the oldest column is overwritten with the new sample.
  currents_.col(head_) = current;
  voltages_.col(head_) = voltage;
  head_ = (head_ + 1) % currents_.cols();
  ++steps_;

  bool full_refactor = ++since_refactor_ >= options_.refresh_interval;
  if (!full_refactor) {
    // Factor out the oldest sample.
    const Eigen::VectorXd a = gram_inv_ * c;
    const double down = 1.0 - c.dot(a);
    if (std::abs(down) < options_.downdate_tolerance) {
      full_refactor = true;
    } else {
      Eigen::MatrixXd& f = fcm_.matrix();
      gram_inv_.noalias() += (a / down) * a.transpose();
      f.noalias() += (cross_ * (a / down)) * a.transpose();
      // Factor in the new sample.
      const Eigen::VectorXd b = gram_inv_ * voltage;
      const double up = 1.0 + voltage.dot(b);
      gram_inv_.noalias() -= (b / up) * b.transpose();
      f.noalias() -= (cross_ * (b / up)) * b.transpose();
      // Swap the sample in I V^T; F picks up the matching terms against the new inverse.
      cross_.noalias() += current * voltage.transpose();
      cross_.noalias() -= old_i * c.transpose();
      const Eigen::VectorXd vc_c = a / down - b * (b.dot(c) / up);
      f.noalias() += current * (b / up).transpose();
      f.noalias() -= old_i * vc_c.transpose();
    }
  }
  if (full_refactor) refactor();
  return fcm_;
}

Eigen::MatrixXd OnlineFcmEstimator::chronological(const Eigen::MatrixXd& ring) const {
  Eigen::MatrixXd out(ring.rows(), ring.cols());
  const Eigen::Index n = ring.cols();
  out.leftCols(n - head_) = ring.rightCols(n - head_);
  out.rightCols(head_) = ring.leftCols(head_);
  return out;
}

Eigen::MatrixXd OnlineFcmEstimator::window_currents() const { return chronological(currents_); }
Eigen::MatrixXd OnlineFcmEstimator::window_voltages() const { return chronological(voltages_); }

}  // namespace fcm
