#pragma once

#include <random>
#include <vector>

#include "fcm/network.hpp"
#include "fcm/scenario.hpp"

namespace testing_support {

/// Line data of the three-node example network.
inline fcm::LineImpedance line12(double x12b = 0.95) { return {{0.05, 0.06, 0.04}, {0.1, x12b, 0.15}}; }
inline fcm::LineImpedance line13() { return {{0.075, 0.08, 0.07}, {0.15, 0.145, 0.155}}; }

inline fcm::Fcm synthetic(const fcm::HarmonicConfig& cfg, std::uint64_t seed) {
  fcm::SyntheticConverterSpec spec;
  spec.seed = seed;
  return fcm::synth_converter_fcm(spec, cfg);
}

inline fcm::HarmonicNetwork example_net(const fcm::HarmonicConfig& cfg, double x12b = 0.95) {
  std::vector<fcm::Converter> conv{{"F1", 1, synthetic(cfg, 11), 0.05},
                                   {"F2", 2, synthetic(cfg, 12), 0.025},
                                   {"F3", 3, synthetic(cfg, 13), 0.075},
                                   {"F4", 1, synthetic(cfg, 14), 0.06}};
  return fcm::HarmonicNetwork(cfg, {1, 2, 3}, 1, {{1, 2, line12(x12b)}, {1, 3, line13()}}, std::move(conv));
}

inline Eigen::VectorXd random_vector(Eigen::Index n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = g(rng);
  return v;
}

inline Eigen::MatrixXd random_matrix(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
  return m;
}

/// Random radial network with up to max_nodes nodes and depth at most max_depth.
/// Every node carries zero to two converters (synthetic FCMs or passive loads).
inline fcm::HarmonicNetwork random_tree(const fcm::HarmonicConfig& cfg, std::mt19937_64& rng, int max_nodes = 8,
                                        int max_depth = 3) {
  std::uniform_int_distribution<int> count(2, max_nodes);
  const int n = count(rng);
  std::vector<int> nodes, depth{0};
  std::vector<fcm::Line> lines;
  std::uniform_real_distribution<double> r(0.02, 0.1), x(0.05, 0.2), dc(0.0, 0.1);
  nodes.push_back(10);
  for (int i = 1; i < n; ++i) {
    std::vector<int> candidates;
    for (int j = 0; j < i; ++j)
      if (depth[static_cast<std::size_t>(j)] < max_depth) candidates.push_back(j);
    std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
    const int parent = candidates[pick(rng)];
    nodes.push_back(10 + i);
    depth.push_back(depth[static_cast<std::size_t>(parent)] + 1);
    fcm::LineImpedance z{{r(rng), r(rng), r(rng)}, {x(rng), x(rng), x(rng)}};
    // Random orientation: the network orients lines from the root itself.
    if (rng() % 2)
      lines.push_back({nodes[static_cast<std::size_t>(parent)], 10 + i, z});
    else
      lines.push_back({10 + i, nodes[static_cast<std::size_t>(parent)], z});
  }
  std::vector<fcm::Converter> conv;
  for (int id : nodes) {
    const int k = static_cast<int>(rng() % 3);
    for (int c = 0; c < k; ++c) {
      if (rng() % 4 == 0)
        conv.push_back({"load", id, fcm::load_fcm(cfg, {{1.0 + r(rng), 1.0, 1.0}, {x(rng), x(rng), x(rng)}}), 0.0});
      else
        conv.push_back({"conv", id, synthetic(cfg, rng()), dc(rng)});
    }
  }
  if (conv.empty()) conv.push_back({"conv", nodes.back(), synthetic(cfg, rng()), dc(rng)});
  return fcm::HarmonicNetwork(cfg, nodes, nodes.front(), lines, std::move(conv));
}

}  // namespace testing_support
