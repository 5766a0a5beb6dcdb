#include "fcm/reduction.hpp"

#include <algorithm>
#include <map>

namespace fcm {

Fcm merge_parallel_converters(std::span<const ConverterInput> converters) {
  if (converters.empty()) throw ValidationError("merge_parallel_converters: no converters");
  const auto p = converters.front().fcm.p();
  Eigen::MatrixXd bar = Eigen::MatrixXd::Zero(p, p);
  Eigen::VectorXd f = Eigen::VectorXd::Zero(p);
  for (const auto& c : converters) {
    if (c.fcm.p() != p) throw ValidationError("merge_parallel_converters: FCM dimensions differ");
    bar += c.fcm.bar();
    f += c.fcm.f() * c.dc_current;
  }
  return Fcm::from_parts(bar, f);
}

ReductionReport reduce_depth_one(std::span<const ReductionLeaf> leaves, std::span<const ConverterInput> root_converters,
                                 const std::string& root_label) {
  if (leaves.empty() && root_converters.empty()) throw ValidationError("reduce_depth_one: empty subtree");
  const auto p = leaves.empty() ? root_converters.front().fcm.p() : leaves.front().fcm.p();

  ReductionReport report;
  Fcm merged = root_converters.empty() ? Fcm::zero(HarmonicConfig::from_real_length(p))
                                       : merge_parallel_converters(root_converters);
  if (merged.p() != p) throw ValidationError("reduce_depth_one: FCM dimensions differ");
  Eigen::MatrixXd bar = merged.bar();
  Eigen::VectorXd f = merged.f();

  for (const auto& leaf : leaves) {
    if (leaf.fcm.p() != p || leaf.impedance.rows() != p || leaf.impedance.cols() != p)
      throw ValidationError("reduce_depth_one: leaf '" + leaf.label + "' has mismatched dimensions");
    // M = Z Fbar_n + I; Fbar_n M^-1 and M^-1 Z f_n come from solves against M.
    const Eigen::MatrixXd m = leaf.impedance * leaf.fcm.bar() + Eigen::MatrixXd::Identity(p, p);
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(m);
    const double rcond = lu.rcond();
    const double condition = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
    if (!(condition < kInvertibilityLimit))
      throw NumericalError("M = Z Fbar + I is not invertible for leaf '" + leaf.label + "' (condition estimate " +
                           std::to_string(condition) + ")");
    report.conditions.push_back({root_label, leaf.label, condition});

    const Eigen::MatrixXd bar_t = leaf.fcm.bar().transpose();
    const Eigen::MatrixXd minv_t_bar_t = lu.transpose().solve(bar_t);
    const Eigen::MatrixXd bar_minv = minv_t_bar_t.transpose();
    bar += bar_minv;
    f += (leaf.fcm.f() - bar_minv * (leaf.impedance * leaf.fcm.f())) * leaf.dc_current;
  }
  report.fcm = Fcm::from_parts(bar, f);
  return report;
}

namespace {

std::string node_label(int id) { return "node " + std::to_string(id); }

}  // namespace

ReductionReport reduce_tree(const HarmonicNetwork& net, const ReductionOptions& options) {
  const auto& cfg = net.config();
  std::map<int, std::vector<ConverterInput>> attached;
  std::map<int, std::vector<int>> children;
  for (int id : net.nodes()) {
    attached[id];
    children[id] = net.children(id);
  }
  for (const auto& c : net.converters()) attached[c.node].push_back({c.fcm, c.dc_current});

  std::vector<int> order = net.bfs_order();
  if (options.reverse_order) std::reverse(order.begin(), order.end());

  ReductionReport report;
  auto alive = [&](int id) { return attached.count(id) != 0; };
  auto is_leaf = [&](int id) { return children[id].empty(); };

  while (!children[net.root()].empty()) {
    // Step 1: leaves with several converters become a single virtual converter.
    for (int id : order) {
      if (!alive(id) || !is_leaf(id) || attached[id].size() <= 1) continue;
      const std::size_t count = attached[id].size();
      attached[id] = {ConverterInput{merge_parallel_converters(attached[id]), 1.0}};
      report.trace.push_back("merge " + node_label(id) + " (" + std::to_string(count) + " converters)");
    }

    // Step 2: reduce every depth-one subtree whose children are all leaves.
    std::vector<int> eligible;
    for (int id : order)
      if (alive(id) && !children[id].empty() &&
          std::all_of(children[id].begin(), children[id].end(), [&](int c) { return is_leaf(c); }))
        eligible.push_back(id);
    if (options.one_subtree_per_pass) eligible.resize(1);

    for (int id : eligible) {
      std::vector<ReductionLeaf> leaves;
      std::string names;
      for (int child : children[id]) {
        const auto& line = net.lines()[static_cast<std::size_t>(net.parent_line(child))];
        const auto& conv = attached[child];
        ReductionLeaf leaf{line.impedance.real_matrix(cfg), Fcm::zero(cfg), 0.0, node_label(child)};
        if (!conv.empty()) {
          leaf.fcm = conv.front().fcm;
          leaf.dc_current = conv.front().dc_current;
        }
        leaves.push_back(std::move(leaf));
        names += (names.empty() ? "" : ",") + std::to_string(child);
      }
      auto sub = reduce_depth_one(leaves, attached[id], node_label(id));
      report.conditions.insert(report.conditions.end(), sub.conditions.begin(), sub.conditions.end());
      report.trace.push_back("reduce " + node_label(id) + " <- leaves {" + names + "}");
      attached[id] = {ConverterInput{std::move(sub.fcm), 1.0}};
      // Step 3: the reduced children disappear from the tree.
      for (int child : children[id]) attached.erase(child);
      children[id].clear();
    }
  }

  const auto& root_conv = attached[net.root()];
  if (root_conv.empty()) {
    report.fcm = Fcm::zero(cfg);
  } else if (root_conv.size() == 1 && root_conv.front().dc_current == 1.0) {
    report.fcm = root_conv.front().fcm;
  } else {
    report.fcm = merge_parallel_converters(root_conv);
    report.trace.push_back("merge " + node_label(net.root()) + " (" + std::to_string(root_conv.size()) + " converters)");
  }
  return report;
}

}  // namespace fcm
