#pragma once

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

#include "fcm/harmonic.hpp"
#include "fcm/network.hpp"

namespace fcm {

/// An FCM together with the dc current that drives its last input slot.
struct ConverterInput {
  Fcm fcm;
  double dc_current = 1.0;
};

/// Leaf of a depth-one subtree: the line to the subtree root and the leaf's single FCM.
struct ReductionLeaf {
  Eigen::MatrixXd impedance;  // real p x p line impedance
  Fcm fcm;
  double dc_current = 1.0;
  std::string label;
};

struct LeafCondition {
  std::string parent;
  std::string leaf;
  /// Condition estimate of M = Z Fbar + I.
  double condition = 0.0;
};

struct ReductionReport {
  /// Virtual FCM; its dc slot is driven by the constant 1.
  Fcm fcm;
  std::vector<LeafCondition> conditions;
  std::vector<std::string> trace;
};

inline constexpr double kInvertibilityLimit = 1e12;

/// Parallel converters on one bus: Fbar_P = sum Fbar, f_P = sum f * i_dc.
Fcm merge_parallel_converters(std::span<const ConverterInput> converters);

/// Collapses a subtree of depth one (root converters plus leaves behind
/// lines) into a single virtual FCM.
ReductionReport reduce_depth_one(std::span<const ReductionLeaf> leaves, std::span<const ConverterInput> root_converters,
                                 const std::string& root_label = "root");

struct ReductionOptions {
  /// Process eligible nodes in reverse of breadth-first order.
  bool reverse_order = false;
  /// Reduce a single depth-one subtree per pass instead of all eligible ones.
  bool one_subtree_per_pass = false;
};

/// Iterated reduction of a whole radial network to its root's virtual FCM.
ReductionReport reduce_tree(const HarmonicNetwork& net, const ReductionOptions& options = {});

}  // namespace fcm
