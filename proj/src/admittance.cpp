#include <unsupported/Eigen/KroneckerProduct>

#include "fcm/estimation.hpp"

namespace fcm {

namespace {

void check_batch(const NetworkMeasurementBatch& batch, const Topology& topology, const HarmonicConfig& cfg) {
  const Eigen::Index u = 3 * static_cast<Eigen::Index>(topology.node_count) * cfg.orders();
  if (topology.node_count < 1) throw ValidationError("admittance estimation needs at least one node");
  if (batch.currents.rows() != u || batch.voltages.rows() != u)
    throw ValidationError("bus measurements must have u = 3N(K+1) = " + std::to_string(u) + " rows");
  if (batch.currents.cols() != batch.voltages.cols())
    throw ValidationError("bus current and voltage batches differ in sample count");
  if (batch.currents.cols() < 1) throw ValidationError("admittance estimation needs at least one sample");
  for (const auto& [a, b] : topology.lines)
    if (a < 0 || b < 0 || a >= topology.node_count || b >= topology.node_count || a == b)
      throw ValidationError("topology line refers to an invalid node position");
}

// Fills the (k, phase) block of y from its parameter vector: N diagonals then one value per line.
void scatter_block(Eigen::MatrixXcd& block, const Eigen::VectorXcd& g, const Topology& topology) {
  const int n = topology.node_count;
  block.setZero(n, n);
  for (int i = 0; i < n; ++i) block(i, i) = g(i);
  for (std::size_t l = 0; l < topology.lines.size(); ++l) {
    const auto [a, b] = topology.lines[l];
    block(a, b) = block(b, a) = g(n + static_cast<Eigen::Index>(l));
  }
}

}  // namespace

Topology Topology::of(const HarmonicNetwork& net) {
  Topology t;
  t.node_count = net.node_count();
  for (const auto& line : net.lines()) t.lines.emplace_back(net.position(line.from), net.position(line.to));
  return t;
}

AdmittanceEstimate estimate_admittance(const NetworkMeasurementBatch& batch, const Topology& topology,
                                       const HarmonicConfig& cfg) {
  check_batch(batch, topology, cfg);
  const int n = topology.node_count;
  const Eigen::Index lines = static_cast<Eigen::Index>(topology.lines.size());
  const Eigen::Index samples = batch.currents.cols();
  const Eigen::Index unknowns = n + lines;

  AdmittanceEstimate out{HarmonicAdmittance(cfg, n), false};
  Eigen::MatrixXcd a(samples * n, unknowns);
  Eigen::VectorXcd rhs(samples * n);
  for (int k = 0; k <= cfg.K; ++k)
    for (int ph = 0; ph < kPhaseCount; ++ph) {
      const Eigen::Index base = (k * kPhaseCount + ph) * n;
      a.setZero();
      for (Eigen::Index t = 0; t < samples; ++t) {
        for (int i = 0; i < n; ++i) {
          a(t * n + i, i) = batch.voltages(base + i, t);
          rhs(t * n + i) = batch.currents(base + i, t);
        }
        for (Eigen::Index l = 0; l < lines; ++l) {
          const auto [x, y] = topology.lines[static_cast<std::size_t>(l)];
          a(t * n + x, n + l) = batch.voltages(base + y, t);
          a(t * n + y, n + l) = batch.voltages(base + x, t);
        }
      }
      const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd> cod(a);
      if (cod.rank() < unknowns) out.rank_deficient = true;
      scatter_block(out.admittance.block(k, ph), cod.solve(rhs), topology);
    }
  return out;
}

AdmittanceEstimate estimate_admittance_kronecker(const NetworkMeasurementBatch& batch, const Topology& topology,
                                                 const HarmonicConfig& cfg) {
  if (cfg.K > 2 || topology.node_count > 3)
    throw ValidationError("Kronecker reference estimator is limited to K <= 2 and N <= 3");
  check_batch(batch, topology, cfg);
  const int n = topology.node_count;
  const Eigen::Index u = batch.voltages.rows();
  const Eigen::Index vech = u * (u + 1) / 2;
  const Eigen::Index per_block = n + static_cast<Eigen::Index>(topology.lines.size());
  const Eigen::Index s = 3 * cfg.orders() * per_block;

  // Position of (row, col), row >= col, in the column-major lower-triangular half-vectorization.
  auto vech_index = [u](Eigen::Index row, Eigen::Index col) { return col * u - col * (col - 1) / 2 + (row - col); };

  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(u * u, vech);
  for (Eigen::Index c = 0; c < u; ++c)
    for (Eigen::Index r = 0; r < u; ++r) q(c * u + r, vech_index(std::max(r, c), std::min(r, c))) = 1.0;

  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(vech, s);
  for (int k = 0; k <= cfg.K; ++k)
    for (int ph = 0; ph < kPhaseCount; ++ph) {
      const Eigen::Index block = k * kPhaseCount + ph;
      const Eigen::Index base = block * n;
      const Eigen::Index col0 = block * per_block;
      for (int i = 0; i < n; ++i) t(vech_index(base + i, base + i), col0 + i) = 1.0;
      for (std::size_t l = 0; l < topology.lines.size(); ++l) {
        const auto [a, b] = topology.lines[l];
        t(vech_index(base + std::max(a, b), base + std::min(a, b)), col0 + n + static_cast<Eigen::Index>(l)) = 1.0;
      }
    }

  const Eigen::MatrixXcd kron =
      Eigen::kroneckerProduct(Eigen::MatrixXcd(batch.voltages.transpose()), Eigen::MatrixXcd::Identity(u, u));
  const Eigen::MatrixXcd x = kron * (q * t).cast<std::complex<double>>();
  const Eigen::VectorXcd vec_i = batch.currents.reshaped();

  AdmittanceEstimate out{HarmonicAdmittance(cfg, n), false};
  const Eigen::MatrixXcd normal = x.adjoint() * x;
  const Eigen::VectorXcd moment = x.adjoint() * vec_i;
  Eigen::VectorXcd y;
  const Eigen::FullPivLU<Eigen::MatrixXcd> lu(normal);
  if (lu.isInvertible()) {
    y = lu.solve(moment);
  } else {
    out.rank_deficient = true;
    y = Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd>(x).solve(vec_i);
  }
  for (int k = 0; k <= cfg.K; ++k)
    for (int ph = 0; ph < kPhaseCount; ++ph)
      scatter_block(out.admittance.block(k, ph), y.segment((k * kPhaseCount + ph) * per_block, per_block), topology);
  return out;
}

}  // namespace fcm
