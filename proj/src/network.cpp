#include "fcm/network.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <numeric>
#include <set>

namespace fcm {

namespace {

std::string line_label(const Line& l) {
  return "(" + std::to_string(l.from) + "," + std::to_string(l.to) + ")";
}

}  // namespace

HarmonicNetwork::HarmonicNetwork(HarmonicConfig cfg, std::vector<int> nodes, int root, std::vector<Line> lines,
                                 std::vector<Converter> converters)
    : cfg_(cfg), nodes_(std::move(nodes)), root_(root), lines_(std::move(lines)), converters_(std::move(converters)) {
  if (nodes_.empty()) throw ValidationError("network has no nodes");
  {
    std::set<int> seen;
    for (int id : nodes_)
      if (!seen.insert(id).second) throw ValidationError("duplicated node id " + std::to_string(id));
  }
  const auto n = nodes_.size();
  parent_.assign(n, -1);
  parent_line_.assign(n, -1);
  children_.assign(n, {});
  (void)position(root_);

  std::set<std::pair<int, int>> seen_edges;
  std::vector<std::vector<std::pair<int, int>>> adjacency(n);  // (neighbour id, line index)
  for (std::size_t li = 0; li < lines_.size(); ++li) {
    const auto& l = lines_[li];
    if (l.from == l.to) throw ValidationError("line " + line_label(l) + " is a self-loop");
    const auto key = std::minmax(l.from, l.to);
    if (!seen_edges.insert(key).second) throw ValidationError("duplicate line " + line_label(l));
    const int a = position(l.from);
    const int b = position(l.to);
    adjacency[static_cast<std::size_t>(a)].emplace_back(l.to, static_cast<int>(li));
    adjacency[static_cast<std::size_t>(b)].emplace_back(l.from, static_cast<int>(li));
  }

  std::vector<bool> visited(n, false);
  std::deque<int> queue{root_};
  visited[static_cast<std::size_t>(position(root_))] = true;
  while (!queue.empty()) {
    const int id = queue.front();
    queue.pop_front();
    bfs_.push_back(id);
    const auto pos = static_cast<std::size_t>(position(id));
    for (auto [nb, li] : adjacency[pos]) {
      if (li == parent_line_[pos]) continue;
      const auto nb_pos = static_cast<std::size_t>(position(nb));
      if (visited[nb_pos]) throw ValidationError("cycle detected through line " + line_label(lines_[static_cast<std::size_t>(li)]));
      visited[nb_pos] = true;
      parent_[nb_pos] = id;
      parent_line_[nb_pos] = li;
      children_[pos].push_back(nb);
      queue.push_back(nb);
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    if (!visited[i]) throw ValidationError("node " + std::to_string(nodes_[i]) + " is not connected to the root");

  for (const auto& c : converters_) {
    (void)position(c.node);
    if (c.fcm.p() != cfg_.p())
      throw ValidationError("converter '" + c.name + "' FCM does not match K = " + std::to_string(cfg_.K));
  }
}

int HarmonicNetwork::position(int node_id) const {
  const auto it = std::find(nodes_.begin(), nodes_.end(), node_id);
  if (it == nodes_.end()) throw ValidationError("unknown node id " + std::to_string(node_id));
  return static_cast<int>(it - nodes_.begin());
}

int HarmonicNetwork::upstream(int line_index) const {
  const auto& l = lines_.at(static_cast<std::size_t>(line_index));
  return parent(l.to) == l.from ? l.from : l.to;
}

int HarmonicNetwork::downstream(int line_index) const {
  const auto& l = lines_.at(static_cast<std::size_t>(line_index));
  return parent(l.to) == l.from ? l.to : l.from;
}

std::vector<int> HarmonicNetwork::converters_at(int node_id) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < converters_.size(); ++i)
    if (converters_[i].node == node_id) out.push_back(static_cast<int>(i));
  return out;
}

int HarmonicNetwork::depth() const {
  int deepest = 0;
  for (int id : bfs_) {
    int d = 0;
    for (int cur = id; parent(cur) != -1; cur = parent(cur)) ++d;
    deepest = std::max(deepest, d);
  }
  return deepest;
}

// ---------------------------------------------------------------------------

HarmonicAdmittance::HarmonicAdmittance(HarmonicConfig cfg, int node_count)
    : cfg_(cfg), n_(node_count),
      blocks_(static_cast<std::size_t>(kPhaseCount * cfg.orders()), Eigen::MatrixXcd::Zero(node_count, node_count)) {}

Eigen::MatrixXcd HarmonicAdmittance::dense() const {
  const int u = dimension();
  Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(u, u);
  for (int k = 0; k <= cfg_.K; ++k)
    for (int ph = 0; ph < kPhaseCount; ++ph) {
      const int off = bus_index(k, ph, 0);
      y.block(off, off, n_, n_) = block(k, ph);
    }
  return y;
}

Eigen::MatrixXcd HarmonicAdmittance::apply(const Eigen::MatrixXcd& v_bus) const {
  if (v_bus.rows() != dimension()) throw ValidationError("bus vector length must be u = 3N(K+1)");
  Eigen::MatrixXcd out(v_bus.rows(), v_bus.cols());
  for (int k = 0; k <= cfg_.K; ++k)
    for (int ph = 0; ph < kPhaseCount; ++ph) {
      const int off = bus_index(k, ph, 0);
      out.middleRows(off, n_).noalias() = block(k, ph) * v_bus.middleRows(off, n_);
    }
  return out;
}

HarmonicAdmittance assemble_harmonic_admittance(const HarmonicNetwork& net) {
  const auto& cfg = net.config();
  HarmonicAdmittance y(cfg, net.node_count());
  for (const auto& line : net.lines()) {
    const int a = net.position(line.from);
    const int b = net.position(line.to);
    for (int k = 0; k <= cfg.K; ++k)
      for (int ph = 0; ph < kPhaseCount; ++ph) {
        const auto z = line.impedance.z(ph, k);
        if (z == std::complex<double>(0.0, 0.0))
          throw ValidationError("line " + line_label(line) + " has zero impedance at order " + std::to_string(k) +
                                ", phase " + phase_name(ph));
        const auto branch = 1.0 / z;
        auto& blk = y.block(k, ph);
        blk(a, a) += branch;
        blk(b, b) += branch;
        blk(a, b) -= branch;
        blk(b, a) -= branch;
      }
  }
  return y;
}

Fcm load_fcm(const HarmonicConfig& cfg, const LineImpedance& load) {
  Eigen::VectorXcd z = load.complex_diagonal(cfg);
  for (Eigen::Index i = 0; i < z.size(); ++i)
    if (z(i) == std::complex<double>(0.0, 0.0)) throw ValidationError("load has zero impedance");
  const Eigen::MatrixXcd y = z.cwiseInverse().asDiagonal();
  return Fcm(real_from_complex_matrix(cfg, y, Eigen::VectorXcd::Zero(cfg.complex_size())));
}

// ---------------------------------------------------------------------------

NetworkSolver::NetworkSolver(const HarmonicNetwork& net)
    : net_(&net), p_(net.config().p()), n_conv_(static_cast<int>(net.converters().size())),
      n_line_(static_cast<int>(net.lines().size())) {
  const int n_nodes = net.node_count();
  voltage_slot_.assign(static_cast<std::size_t>(n_nodes), -1);
  int slot = 0;
  for (int pos = 0; pos < n_nodes; ++pos)
    if (net.nodes()[static_cast<std::size_t>(pos)] != net.root()) voltage_slot_[static_cast<std::size_t>(pos)] = slot++;

  const int blocks = n_conv_ + n_line_ + slot;
  if (blocks == 0) return;
  const Eigen::Index dim = static_cast<Eigen::Index>(blocks) * p_;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(dim, dim);
  const auto eye = Eigen::MatrixXd::Identity(p_, p_);
  auto at = [&](int row_block, int col_block) { return a.block(Eigen::Index(row_block) * p_, Eigen::Index(col_block) * p_, p_, p_); };
  auto vslot = [&](int node_id) { return voltage_slot_[static_cast<std::size_t>(net.position(node_id))]; };
  const int line0 = n_conv_;
  const int volt0 = n_conv_ + n_line_;

  // FCM: i_c - Fbar_c v_node = f_c i_dc (+ Fbar_c v_root when node is the root)
  for (int c = 0; c < n_conv_; ++c) {
    const auto& conv = net.converters()[static_cast<std::size_t>(c)];
    at(c, c) = eye;
    if (const int s = vslot(conv.node); s >= 0) at(c, volt0 + s) = -conv.fcm.bar();
  }
  // Ohm: v_up - v_down - Z i_l = 0
  for (int l = 0; l < n_line_; ++l) {
    const int row = line0 + l;
    at(row, line0 + l) = -net.lines()[static_cast<std::size_t>(l)].impedance.real_matrix(net.config());
    at(row, volt0 + vslot(net.downstream(l))) = -eye;
    if (const int s = vslot(net.upstream(l)); s >= 0) at(row, volt0 + s) = eye;
  }
  // KCL at non-root nodes: converters + child lines - parent line = 0
  for (int pos = 0; pos < n_nodes; ++pos) {
    const int s = voltage_slot_[static_cast<std::size_t>(pos)];
    if (s < 0) continue;
    const int id = net.nodes()[static_cast<std::size_t>(pos)];
    const int row = volt0 + s;
    for (int c : net.converters_at(id)) at(row, c) = eye;
    for (int child : net.children(id)) at(row, line0 + net.parent_line(child)) = eye;
    at(row, line0 + net.parent_line(id)) = -eye;
  }

  lu_.compute(a);
  const double rcond = lu_.rcond();
  condition_ = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
  if (!(condition_ < kConditionLimit)) {
    Eigen::Index worst = 0;
    lu_.matrixLU().diagonal().cwiseAbs().minCoeff(&worst);
    throw NumericalError("network system is singular or ill-conditioned (condition estimate " +
                         std::to_string(condition_) + "); offending block: " + describe_unknown(worst));
  }
}

std::string NetworkSolver::describe_unknown(Eigen::Index index) const {
  const int block = static_cast<int>(index / p_);
  if (block < n_conv_) return "current of converter '" + net_->converters()[static_cast<std::size_t>(block)].name + "'";
  if (block < n_conv_ + n_line_) return "current of line " + line_label(net_->lines()[static_cast<std::size_t>(block - n_conv_)]);
  const int slot = block - n_conv_ - n_line_;
  for (std::size_t pos = 0; pos < voltage_slot_.size(); ++pos)
    if (voltage_slot_[pos] == slot) return "voltage of node " + std::to_string(net_->nodes()[pos]);
  return "block " + std::to_string(block);
}

Eigen::MatrixXd NetworkSolver::rhs(const Eigen::MatrixXd& v_roots) const {
  if (v_roots.rows() != p_) throw ValidationError("root voltage must have length p");
  const auto& net = *net_;
  const Eigen::Index dim = lu_.rows();
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(dim, v_roots.cols());
  for (int c = 0; c < n_conv_; ++c) {
    const auto& conv = net.converters()[static_cast<std::size_t>(c)];
    auto rows = b.middleRows(Eigen::Index(c) * p_, p_);
    rows.colwise() = (conv.fcm.f() * conv.dc_current).eval();
    if (conv.node == net.root()) rows.noalias() += conv.fcm.bar() * v_roots;
  }
  for (int l = 0; l < n_line_; ++l)
    if (net.upstream(l) == net.root()) b.middleRows(Eigen::Index(n_conv_ + l) * p_, p_) = -v_roots;
  return b;
}

NetworkSolution NetworkSolver::solve(const Eigen::VectorXd& v_root) const {
  const auto& net = *net_;
  NetworkSolution sol;
  const Eigen::VectorXd x = lu_.rows() ? Eigen::VectorXd(lu_.solve(rhs(v_root))) : Eigen::VectorXd();
  for (int c = 0; c < n_conv_; ++c) sol.converter_currents.push_back(x.segment(Eigen::Index(c) * p_, p_));
  for (int l = 0; l < n_line_; ++l) sol.line_currents.push_back(x.segment(Eigen::Index(n_conv_ + l) * p_, p_));
  sol.voltages.resize(static_cast<std::size_t>(net.node_count()));
  for (std::size_t pos = 0; pos < voltage_slot_.size(); ++pos) {
    const int s = voltage_slot_[pos];
    sol.voltages[pos] = s < 0 ? v_root : Eigen::VectorXd(x.segment(Eigen::Index(n_conv_ + n_line_ + s) * p_, p_));
  }
  sol.root_current = Eigen::VectorXd::Zero(p_);
  for (int c : net.converters_at(net.root())) sol.root_current += sol.converter_currents[static_cast<std::size_t>(c)];
  for (int child : net.children(net.root())) sol.root_current += sol.line_currents[static_cast<std::size_t>(net.parent_line(child))];
  return sol;
}

Eigen::MatrixXd NetworkSolver::root_currents(const Eigen::MatrixXd& v_roots) const {
  const auto& net = *net_;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(p_, v_roots.cols());
  if (lu_.rows() == 0) return out;
  const Eigen::MatrixXd x = lu_.solve(rhs(v_roots));
  for (int c : net.converters_at(net.root())) out += x.middleRows(Eigen::Index(c) * p_, p_);
  for (int child : net.children(net.root())) out += x.middleRows(Eigen::Index(n_conv_ + net.parent_line(child)) * p_, p_);
  return out;
}

NetworkSolution solve_harmonic_network(const HarmonicNetwork& net, const Eigen::VectorXd& v_root) {
  return NetworkSolver(net).solve(v_root);
}

NetworkResiduals network_residuals(const HarmonicNetwork& net, const NetworkSolution& sol, const Eigen::VectorXd& v_root) {
  NetworkResiduals r;
  auto rel = [](double residual, double scale) { return scale > 0.0 ? residual / scale : residual; };
  const auto& cfg = net.config();

  double current_scale = sol.root_current.norm();
  for (const auto& i : sol.converter_currents) current_scale = std::max(current_scale, i.norm());
  for (const auto& i : sol.line_currents) current_scale = std::max(current_scale, i.norm());
  for (const int id : net.nodes()) {
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(cfg.p());
    for (int c : net.converters_at(id)) sum += sol.converter_currents[static_cast<std::size_t>(c)];
    for (int child : net.children(id)) sum += sol.line_currents[static_cast<std::size_t>(net.parent_line(child))];
    if (id == net.root())
      sum -= sol.root_current;
    else
      sum -= sol.line_currents[static_cast<std::size_t>(net.parent_line(id))];
    r.kcl = std::max(r.kcl, rel(sum.norm(), current_scale));
  }

  for (int l = 0; l < static_cast<int>(net.lines().size()); ++l) {
    const auto& vu = sol.voltages[static_cast<std::size_t>(net.position(net.upstream(l)))];
    const auto& vd = sol.voltages[static_cast<std::size_t>(net.position(net.downstream(l)))];
    const Eigen::VectorXd drop = net.lines()[static_cast<std::size_t>(l)].impedance.real_matrix(cfg) * sol.line_currents[static_cast<std::size_t>(l)];
    const double scale = std::max({vu.norm(), vd.norm(), drop.norm()});
    r.ohm = std::max(r.ohm, rel((vu - vd - drop).norm(), scale));
  }

  for (std::size_t c = 0; c < net.converters().size(); ++c) {
    const auto& conv = net.converters()[c];
    const Eigen::VectorXd& v = net.position(conv.node) == net.position(net.root())
                                   ? v_root
                                   : sol.voltages[static_cast<std::size_t>(net.position(conv.node))];
    const Eigen::VectorXd lin = conv.fcm.bar() * v;
    const Eigen::VectorXd dc = conv.fcm.f() * conv.dc_current;
    const auto& i = sol.converter_currents[c];
    const double scale = std::max({i.norm(), lin.norm(), dc.norm()});
    r.fcm = std::max(r.fcm, rel((i - lin - dc).norm(), scale));
  }
  return r;
}

}  // namespace fcm
