#include <doctest.h>

#include <random>

#include "fcm/estimation.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace fcm;
using namespace testing_support;

TEST_CASE("measurement batches validate their shape") {
  CHECK_THROWS_AS(MeasurementBatch(Eigen::MatrixXd::Zero(6, 3), Eigen::MatrixXd::Zero(7, 4)), ValidationError);
  CHECK_THROWS_AS(MeasurementBatch(Eigen::MatrixXd::Zero(6, 3), Eigen::MatrixXd::Zero(6, 3)), ValidationError);
  CHECK_THROWS_AS(MeasurementBatch(Eigen::MatrixXd::Zero(6, 3), Eigen::MatrixXd::Zero(7, 3), {0.0, 1.0}), ValidationError);
  CHECK(MeasurementBatch(Eigen::MatrixXd::Zero(6, 3), Eigen::MatrixXd::Zero(7, 3), {0.0, 1.0, 2.0}).samples() == 3);
}

TEST_CASE("identity voltages return the currents") {
  const HarmonicConfig cfg(1);
  std::mt19937_64 rng(1);
  const Eigen::MatrixXd i = random_matrix(cfg.p(), cfg.q(), rng);
  const FcmEstimate est = estimate_fcm_batch(i, Eigen::MatrixXd::Identity(cfg.q(), cfg.q()));
  CHECK_FALSE(est.rank_deficient);
  CHECK((est.fcm.matrix() - i).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("noiseless batch data recover the generating FCM") {
  const HarmonicConfig cfg(10);
  std::mt19937_64 rng(2);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const Fcm truth = synthetic(cfg, seed);
    const Eigen::MatrixXd v = random_matrix(cfg.q(), cfg.q(), rng);
    const FcmEstimate est = estimate_fcm_batch(truth.matrix() * v, v);
    CHECK(relative_error(est.fcm.matrix(), truth.matrix()) < 1e-10);
    CHECK(est.rank == cfg.q());
  }
}

TEST_CASE("batch estimate agrees with the normal-equation oracle") {
  const HarmonicConfig cfg(2);
  std::mt19937_64 rng(3);
  const Eigen::MatrixXd v = random_matrix(cfg.q(), 3 * cfg.q(), rng);
  const Eigen::MatrixXd i = random_matrix(cfg.p(), 3 * cfg.q(), rng);
  const Eigen::MatrixXd f = estimate_fcm_batch(i, v).fcm.matrix();
  CHECK((f - oracle::least_squares_fcm(i, v)).cwiseAbs().maxCoeff() < 1e-10);
  const Eigen::MatrixXd residual = i - f * v;
  CHECK((residual * v.transpose()).norm() < 1e-9 * (i * v.transpose()).norm());
}

TEST_CASE("least-squares optimality under single-entry perturbations") {
  const HarmonicConfig cfg(1);
  std::mt19937_64 rng(4);
  const Eigen::MatrixXd v = random_matrix(cfg.q(), 2 * cfg.q(), rng);
  const Eigen::MatrixXd i = random_matrix(cfg.p(), 2 * cfg.q(), rng);
  const Eigen::MatrixXd f = estimate_fcm_batch(i, v).fcm.matrix();
  const double best = (i - f * v).squaredNorm();
  for (Eigen::Index r = 0; r < f.rows(); ++r)
    for (Eigen::Index c = 0; c < f.cols(); ++c)
      for (double delta : {1e-4, -1e-4}) {
        Eigen::MatrixXd g = f;
        g(r, c) += delta;
        CHECK((i - g * v).squaredNorm() >= best);
      }
}

TEST_CASE("rank-deficient voltages fall back to the pseudo-inverse") {
  const HarmonicConfig cfg(1);
  std::mt19937_64 rng(5);
  Eigen::MatrixXd v = random_matrix(cfg.q(), 2 * cfg.q(), rng);
  v.row(3) = v.row(2);
  const Eigen::MatrixXd i = random_matrix(cfg.p(), 2 * cfg.q(), rng);
  const FcmEstimate est = estimate_fcm_batch(i, v);
  CHECK(est.rank_deficient);
  CHECK(est.rank == cfg.q() - 1);
  const Eigen::MatrixXd residual = i - est.fcm.matrix() * v;
  CHECK((residual * v.transpose()).norm() < 1e-9 * (i * v.transpose()).norm());
  // The minimum-norm solution splits weight evenly across the duplicated rows.
  CHECK((est.fcm.matrix().col(2) - est.fcm.matrix().col(3)).cwiseAbs().maxCoeff() < 1e-10);

  const FcmEstimate short_batch = estimate_fcm_batch(i.leftCols(5), v.leftCols(5));
  CHECK(short_batch.rank_deficient);
}

// --- admittance -----------------------------------------------------------------

namespace {

NetworkMeasurementBatch noiseless_bus_batch(const HarmonicNetwork& net, int samples, std::uint64_t seed) {
  const HarmonicAdmittance y = assemble_harmonic_admittance(net);
  VoltageSamplingSpec spec = example_voltage_spec();
  spec.fundamental_mean.resize(static_cast<std::size_t>(net.node_count()), spec.fundamental_mean.front());
  Rng rng = make_rng(seed);
  const Eigen::MatrixXcd v = sample_bus_voltages(spec, net.config(), samples, rng);
  return {y.apply(v), v};
}

double max_block_difference(const HarmonicAdmittance& a, const HarmonicAdmittance& b) {
  double worst = 0.0;
  for (int k = 0; k <= a.config().K; ++k)
    for (int ph = 0; ph < kPhaseCount; ++ph)
      worst = std::max(worst, (a.block(k, ph) - b.block(k, ph)).cwiseAbs().maxCoeff());
  return worst;
}

}  // namespace

TEST_CASE("two samples identify the example line admittances") {
  const HarmonicConfig cfg(5);
  const HarmonicNetwork net(cfg, {1, 2, 3}, 1, {{1, 2, line12()}, {1, 3, line13()}}, {});
  const auto batch = noiseless_bus_batch(net, 2, 1);
  const auto est = estimate_admittance(batch, Topology::of(net), cfg);
  CHECK_FALSE(est.rank_deficient);
  CHECK(max_block_difference(est.admittance, assemble_harmonic_admittance(net)) < 1e-8);
  for (int k = 0; k <= cfg.K; ++k)
    for (int ph = 0; ph < kPhaseCount; ++ph) {
      const auto& b = est.admittance.block(k, ph);
      CHECK(b(1, 2) == std::complex<double>(0.0, 0.0));
      CHECK(b(2, 1) == std::complex<double>(0.0, 0.0));
      CHECK((b - b.transpose()).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("single sample suffices without lines") {
  const HarmonicConfig cfg(3);
  const Topology topo{3, {}};
  std::mt19937_64 rng(6);
  HarmonicAdmittance truth(cfg, 3);
  std::normal_distribution<double> g;
  for (int k = 0; k <= cfg.K; ++k)
    for (int ph = 0; ph < kPhaseCount; ++ph)
      for (int n = 0; n < 3; ++n) truth.block(k, ph)(n, n) = {g(rng), g(rng)};
  Eigen::MatrixXcd v(truth.dimension(), 1);
  for (Eigen::Index i = 0; i < v.rows(); ++i) v(i, 0) = {1.0 + g(rng), g(rng)};
  const auto est = estimate_admittance({truth.apply(v), v}, topo, cfg);
  CHECK_FALSE(est.rank_deficient);
  CHECK(max_block_difference(est.admittance, truth) < 1e-12);
}

TEST_CASE("structured and Kronecker estimators agree") {
  const HarmonicConfig cfg(1);
  std::mt19937_64 rng(7);
  const HarmonicNetwork net(cfg, {1, 2, 3}, 2, {{1, 2, line12()}, {2, 3, line13()}}, {});
  const Topology topo = Topology::of(net);
  const HarmonicAdmittance truth = assemble_harmonic_admittance(net);
  Eigen::MatrixXcd v(truth.dimension(), 4);
  std::normal_distribution<double> g;
  for (Eigen::Index i = 0; i < v.size(); ++i) v.data()[i] = {g(rng), g(rng)};
  Eigen::MatrixXcd i = truth.apply(v);
  for (Eigen::Index j = 0; j < i.size(); ++j) i.data()[j] += std::complex<double>(0.01 * g(rng), 0.01 * g(rng));
  const auto fast = estimate_admittance({i, v}, topo, cfg);
  const auto slow = estimate_admittance_kronecker({i, v}, topo, cfg);
  CHECK(max_block_difference(fast.admittance, slow.admittance) < 1e-9);
  CHECK(max_block_difference(fast.admittance, truth) > 0.0);
}

TEST_CASE("Kronecker reference is limited to small problems") {
  const HarmonicConfig cfg(3);
  const Topology topo{2, {{0, 1}}};
  const Eigen::MatrixXcd z = Eigen::MatrixXcd::Zero(3 * 2 * cfg.orders(), 2);
  CHECK_THROWS_AS(estimate_admittance_kronecker({z, z}, topo, cfg), ValidationError);
  CHECK_THROWS_AS(estimate_admittance_kronecker({z, z}, Topology{4, {}}, HarmonicConfig(1)), ValidationError);
}

TEST_CASE("admittance input validation and rank deficiency") {
  const HarmonicConfig cfg(2);
  const HarmonicNetwork net(cfg, {1, 2, 3}, 1, {{1, 2, line12()}, {1, 3, line13()}}, {});
  const auto batch = noiseless_bus_batch(net, 1, 3);
  const auto est = estimate_admittance(batch, Topology::of(net), cfg);
  CHECK(est.rank_deficient);
  CHECK_THROWS_AS(estimate_admittance({batch.currents.topRows(3), batch.voltages}, Topology::of(net), cfg), ValidationError);
  CHECK_THROWS_AS(estimate_admittance(batch, Topology{3, {{0, 3}}}, cfg), ValidationError);
}
