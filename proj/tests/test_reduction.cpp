#include <doctest.h>

#include <random>

#include "fcm/reduction.hpp"
#include "helpers.hpp"

using namespace fcm;
using namespace testing_support;

namespace {

double rel(const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return (a - b).norm() / b.norm(); }

Eigen::VectorXd with_unit_dc(const Eigen::VectorXd& v) {
  Eigen::VectorXd out(v.size() + 1);
  out << v, 1.0;
  return out;
}

}  // namespace

TEST_CASE("merging a single converter with unit dc is the identity") {
  const HarmonicConfig cfg(2);
  const Fcm f = synthetic(cfg, 3);
  const std::vector<ConverterInput> one{{f, 1.0}};
  CHECK((merge_parallel_converters(one).matrix() == f.matrix()));
  CHECK_THROWS_AS(merge_parallel_converters(std::vector<ConverterInput>{}), ValidationError);
  const std::vector<ConverterInput> mixed{{f, 1.0}, {synthetic(HarmonicConfig(1), 3), 1.0}};
  CHECK_THROWS_AS(merge_parallel_converters(mixed), ValidationError);
}

TEST_CASE("merging identity converters with the example dc currents") {
  const HarmonicConfig cfg(1);
  const int p = cfg.p();
  const Eigen::VectorXd e1 = Eigen::VectorXd::Unit(p, 0);
  const Fcm f = Fcm::from_parts(Eigen::MatrixXd::Identity(p, p), e1);
  const std::vector<ConverterInput> two{{f, 0.05}, {f, 0.025}};
  const Fcm merged = merge_parallel_converters(two);
  CHECK((merged.bar() == 2.0 * Eigen::MatrixXd::Identity(p, p)));
  CHECK((merged.f() - 0.075 * e1).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("merged converter reproduces the summed currents") {
  const HarmonicConfig cfg(3);
  std::mt19937_64 rng(4);
  const std::vector<ConverterInput> pair{{synthetic(cfg, 1), 0.05}, {synthetic(cfg, 2), 0.075}};
  const Fcm merged = merge_parallel_converters(pair);
  for (int t = 0; t < 100; ++t) {
    const Eigen::VectorXd v = random_vector(cfg.p(), rng);
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(cfg.p());
    for (const auto& c : pair) {
      Eigen::VectorXd vq(cfg.q());
      vq << v, c.dc_current;
      sum += apply_fcm(c.fcm, vq);
    }
    CHECK(rel(apply_fcm(merged, with_unit_dc(v)), sum) < 1e-12);
  }
}

TEST_CASE("depth-one reduction degenerate cases") {
  const HarmonicConfig cfg(2);
  const int p = cfg.p();
  const Fcm a = synthetic(cfg, 5), b = synthetic(cfg, 6), c = synthetic(cfg, 7);
  const std::vector<ReductionLeaf> leaves{{Eigen::MatrixXd::Zero(p, p), b, 0.03, "b"},
                                          {Eigen::MatrixXd::Zero(p, p), c, 0.04, "c"}};
  const std::vector<ConverterInput> root{{a, 0.02}};
  const auto report = reduce_depth_one(leaves, root);
  const std::vector<ConverterInput> all{{a, 0.02}, {b, 0.03}, {c, 0.04}};
  CHECK((report.fcm.matrix() - merge_parallel_converters(all).matrix()).cwiseAbs().maxCoeff() < 1e-13);
  CHECK(report.conditions.size() == 2);

  const auto no_leaves = reduce_depth_one(std::vector<ReductionLeaf>{}, root);
  CHECK((no_leaves.fcm.matrix() == merge_parallel_converters(root).matrix()));
  CHECK_THROWS_AS(reduce_depth_one(std::vector<ReductionLeaf>{}, std::vector<ConverterInput>{}), ValidationError);
}

TEST_CASE("near-singular leaf is reported by name") {
  const HarmonicConfig cfg(1);
  const int p = cfg.p();
  const LineImpedance z{{0.05, 0.05, 0.05}, {0.1, 0.1, 0.1}};
  const LineImpedance neg{{-0.05, -0.05, -0.05}, {-0.1, -0.1, -0.1}};
  const std::vector<ReductionLeaf> leaves{{z.real_matrix(cfg), load_fcm(cfg, neg), 0.0, "node 9"}};
  try {
    reduce_depth_one(leaves, std::vector<ConverterInput>{{synthetic(cfg, 1), 1.0}});
    FAIL("expected an invertibility error");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("node 9") != std::string::npos);
  }
  (void)p;
}

TEST_CASE("example subtree reduction reproduces the network solve") {
  const HarmonicConfig cfg(5);
  const HarmonicNetwork net = example_net(cfg);
  const std::vector<ReductionLeaf> leaves{
      {line12().real_matrix(cfg), net.converters()[1].fcm, 0.025, "node 2"},
      {line13().real_matrix(cfg), net.converters()[2].fcm, 0.075, "node 3"}};
  const std::vector<ConverterInput> root{{net.converters()[0].fcm, 0.05}, {net.converters()[3].fcm, 0.06}};
  const auto report = reduce_depth_one(leaves, root, "node 1");
  const auto tree = reduce_tree(net);
  CHECK((report.fcm.matrix() - tree.fcm.matrix()).cwiseAbs().maxCoeff() < 1e-12);
  std::mt19937_64 rng(8);
  const NetworkSolver solver(net);
  for (int t = 0; t < 10; ++t) {
    const Eigen::VectorXd v = random_vector(cfg.p(), rng);
    CHECK(rel(apply_fcm(report.fcm, with_unit_dc(v)), solver.solve(v).root_current) <= 1e-12);
  }
  for (const auto& c : report.conditions) CHECK(c.condition < kInvertibilityLimit);
}

TEST_CASE("two-level tree reduction reproduces the network solve") {
  const HarmonicConfig cfg(3);
  const LineImpedance z{{0.05, 0.06, 0.07}, {0.1, 0.12, 0.14}};
  std::vector<Converter> conv;
  std::uint64_t seed = 40;
  for (int id : {1, 2, 3, 4, 5, 6, 7}) conv.push_back({"c" + std::to_string(id), id, synthetic(cfg, seed++), 0.01 * id});
  const HarmonicNetwork net(cfg, {1, 2, 3, 4, 5, 6, 7}, 1,
                            {{1, 2, z}, {1, 3, z}, {2, 4, z}, {2, 5, z}, {3, 6, z}, {3, 7, z}}, conv);
  const auto report = reduce_tree(net);
  std::mt19937_64 rng(2);
  const NetworkSolver solver(net);
  for (int t = 0; t < 5; ++t) {
    const Eigen::VectorXd v = random_vector(cfg.p(), rng);
    CHECK(rel(apply_fcm(report.fcm, with_unit_dc(v)), solver.solve(v).root_current) < 1e-10);
  }
  CHECK(report.trace.size() >= 3);
}

TEST_CASE("reduction is independent of processing order") {
  const HarmonicConfig cfg(2);
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    HarmonicNetwork net = random_tree(cfg, rng);
    const Eigen::MatrixXd base = reduce_tree(net).fcm.matrix();
    const double scale = std::max(1.0, base.cwiseAbs().maxCoeff());
    for (const ReductionOptions opt : {ReductionOptions{true, false}, ReductionOptions{false, true}, ReductionOptions{true, true}})
      CHECK((reduce_tree(net, opt).fcm.matrix() - base).cwiseAbs().maxCoeff() < 1e-12 * scale);
    std::reverse(net.converters().begin(), net.converters().end());
    const HarmonicNetwork permuted(cfg, net.nodes(), net.root(), net.lines(), net.converters());
    CHECK((reduce_tree(permuted).fcm.matrix() - base).cwiseAbs().maxCoeff() < 1e-12 * scale);
  }
}

TEST_CASE("random trees: reduction matches simulation") {
  const HarmonicConfig cfg(2);
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const HarmonicNetwork net = random_tree(cfg, rng, 8, 3);
    const Fcm reduced = reduce_tree(net).fcm;
    const NetworkSolver solver(net);
    for (int t = 0; t < 20; ++t) {
      const Eigen::VectorXd v = random_vector(cfg.p(), rng);
      CHECK(rel(apply_fcm(reduced, with_unit_dc(v)), solver.solve(v).root_current) < 1e-10);
    }
  }
}

TEST_CASE("converter-free subtree reduces to its load admittance") {
  const HarmonicConfig cfg(4);
  const LineImpedance line{{0.05, 0.06, 0.04}, {0.1, 0.2, 0.15}};
  const LineImpedance load{{2.0, 1.5, 1.8}, {0.4, 0.3, 0.5}};
  const HarmonicNetwork net(cfg, {1, 2}, 1, {{1, 2, line}}, {{"load", 2, load_fcm(cfg, load), 0.0}});
  const Fcm reduced = reduce_tree(net).fcm;
  CHECK(reduced.f().cwiseAbs().maxCoeff() < 1e-15);
  LineImpedance series;
  for (int ph = 0; ph < kPhaseCount; ++ph) {
    series.r[ph] = line.r[ph] + load.r[ph];
    series.x[ph] = line.x[ph] + load.x[ph];
  }
  CHECK((reduced.bar() - load_fcm(cfg, series).bar()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("depth-one tree: reduce_tree equals reduce_depth_one") {
  const HarmonicConfig cfg(2);
  const HarmonicNetwork net(cfg, {1, 2}, 1, {{1, 2, line12()}}, {{"a", 2, synthetic(cfg, 1), 0.3}});
  const std::vector<ReductionLeaf> leaves{{line12().real_matrix(cfg), synthetic(cfg, 1), 0.3, "node 2"}};
  const auto direct = reduce_depth_one(leaves, std::vector<ConverterInput>{});
  CHECK((reduce_tree(net).fcm.matrix() - direct.fcm.matrix()).cwiseAbs().maxCoeff() < 1e-14);
}
