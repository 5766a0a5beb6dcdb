#pragma once

#include <Eigen/Dense>

#include <complex>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "fcm/harmonic.hpp"

namespace fcm {

/// A converter (or a passive load expressed as an FCM with f = 0) attached to a node.
struct Converter {
  std::string name;
  int node = 0;
  Fcm fcm;
  double dc_current = 0.0;
};

/// Line between two adjacent nodes; orientation is fixed by the network root.
struct Line {
  int from = 0;
  int to = 0;
  LineImpedance impedance;
};

/// Radial three-phase harmonic network.
///
/// Construction validates that the lines form a spanning tree over the node set
/// and orients every line from parent to child with respect to the root.
class HarmonicNetwork {
 public:
  HarmonicNetwork(HarmonicConfig cfg, std::vector<int> nodes, int root, std::vector<Line> lines,
                  std::vector<Converter> converters);

  const HarmonicConfig& config() const { return cfg_; }
  const std::vector<int>& nodes() const { return nodes_; }
  int root() const { return root_; }
  const std::vector<Line>& lines() const { return lines_; }
  const std::vector<Converter>& converters() const { return converters_; }
  std::vector<Converter>& converters() { return converters_; }

  int node_count() const { return static_cast<int>(nodes_.size()); }
  /// Position of a node id in nodes(); throws for unknown ids.
  int position(int node_id) const;

  /// Parent node id, or -1 for the root.
  int parent(int node_id) const { return parent_[static_cast<std::size_t>(position(node_id))]; }
  /// Index into lines() connecting the node to its parent, or -1 for the root.
  int parent_line(int node_id) const { return parent_line_[static_cast<std::size_t>(position(node_id))]; }
  const std::vector<int>& children(int node_id) const { return children_[static_cast<std::size_t>(position(node_id))]; }
  /// Parent end of a line.
  int upstream(int line_index) const;
  /// Child end of a line.
  int downstream(int line_index) const;
  std::vector<int> converters_at(int node_id) const;
  /// Node ids in breadth-first order from the root.
  const std::vector<int>& bfs_order() const { return bfs_; }
  int depth() const;

 private:
  HarmonicConfig cfg_;
  std::vector<int> nodes_;
  int root_;
  std::vector<Line> lines_;
  std::vector<Converter> converters_;
  std::vector<int> parent_;
  std::vector<int> parent_line_;
  std::vector<std::vector<int>> children_;
  std::vector<int> bfs_;
};

/// Block-diagonal harmonic admittance Y_H: one N x N complex bus-admittance
/// block per (order k, phase). Dense index is u = ((k * 3) + phase) * N + node.
class HarmonicAdmittance {
 public:
  HarmonicAdmittance(HarmonicConfig cfg, int node_count);

  const HarmonicConfig& config() const { return cfg_; }
  int node_count() const { return n_; }
  int dimension() const { return 3 * n_ * cfg_.orders(); }
  int bus_index(int k, int phase, int node_pos) const { return (k * kPhaseCount + phase) * n_ + node_pos; }

  const Eigen::MatrixXcd& block(int k, int phase) const { return blocks_[static_cast<std::size_t>(k * kPhaseCount + phase)]; }
  Eigen::MatrixXcd& block(int k, int phase) { return blocks_[static_cast<std::size_t>(k * kPhaseCount + phase)]; }

  Eigen::MatrixXcd dense() const;
  /// Y_H v for bus vectors of length u (columns may hold several samples).
  Eigen::MatrixXcd apply(const Eigen::MatrixXcd& v_bus) const;

 private:
  HarmonicConfig cfg_;
  int n_;
  std::vector<Eigen::MatrixXcd> blocks_;
};

HarmonicAdmittance assemble_harmonic_admittance(const HarmonicNetwork& net);

/// Exact steady state of a network driven by a fixed root voltage.
struct NetworkSolution {
  /// Indexed by node position.
  std::vector<Eigen::VectorXd> voltages;
  /// Aligned with net.converters().
  std::vector<Eigen::VectorXd> converter_currents;
  /// Aligned with net.lines(), flowing from the upstream to the downstream end.
  std::vector<Eigen::VectorXd> line_currents;
  /// Current drawn from the source at the root.
  Eigen::VectorXd root_current;
};

struct NetworkResiduals {
  double kcl = 0.0;
  double ohm = 0.0;
  double fcm = 0.0;
};

/// Relative KCL / Ohm / FCM residuals of a solution. KCL is scaled by the
/// largest current in the network, Ohm and FCM by the terms of each equation.
NetworkResiduals network_residuals(const HarmonicNetwork& net, const NetworkSolution& sol,
                                   const Eigen::VectorXd& v_root);

/// Dense block solver for the network equations. Unknowns are every converter
/// current, every line current and every non-root voltage; one FCM equation
/// per converter, one Ohm equation per line and one KCL equation per non-root
/// node. The factorization is computed once and reused across root voltages.
class NetworkSolver {
 public:
  static constexpr double kConditionLimit = 1e12;

  explicit NetworkSolver(const HarmonicNetwork& net);

  NetworkSolution solve(const Eigen::VectorXd& v_root) const;
  /// Root currents for each column of v_roots (p x T), with the converters' own dc currents.
  Eigen::MatrixXd root_currents(const Eigen::MatrixXd& v_roots) const;
  double condition_estimate() const { return condition_; }

 private:
  Eigen::MatrixXd rhs(const Eigen::MatrixXd& v_roots) const;
  std::string describe_unknown(Eigen::Index index) const;

  const HarmonicNetwork* net_;
  int p_;
  int n_conv_;
  int n_line_;
  std::vector<int> voltage_slot_;  // by node position; -1 for root
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
  double condition_ = 0.0;
};

NetworkSolution solve_harmonic_network(const HarmonicNetwork& net, const Eigen::VectorXd& v_root);

/// Options used while resolving converter payloads in a network document.
struct NetworkBuildOptions {
  /// Harmonic order used when the document does not carry "K".
  int default_K = 50;
  /// Overrides the document's "K" when set (>= 0).
  int force_K = -1;
  /// Directory against which relative FCM file references are resolved.
  std::filesystem::path base_dir;
};

/// Builds a network from a JSON document (schema in README).
HarmonicNetwork build_network(const nlohmann::json& doc, const NetworkBuildOptions& options = {});
HarmonicNetwork load_network(const std::filesystem::path& path, NetworkBuildOptions options = {});

/// Passive wye load with series r + jkx per phase, expressed as an FCM (f = 0).
Fcm load_fcm(const HarmonicConfig& cfg, const LineImpedance& load);

}  // namespace fcm
