#include <doctest.h>

#include <random>

#include "fcm/harmonic.hpp"
#include "oracles.hpp"

using namespace fcm;

TEST_CASE("derived dimensions follow K") {
  CHECK(HarmonicConfig(50).p() == 306);
  CHECK(HarmonicConfig(50).q() == 307);
  CHECK(HarmonicConfig(3).phase_block() == 8);
  CHECK(HarmonicConfig().K == 50);
  CHECK(HarmonicConfig::from_real_length(307).K == 50);
  CHECK(HarmonicConfig::from_real_length(12).K == 1);
  CHECK_THROWS_AS(HarmonicConfig::from_real_length(10), ValidationError);
  CHECK_THROWS_AS(HarmonicConfig(-1), ValidationError);
}

TEST_CASE("real layout is phase-major with Re before Im") {
  const HarmonicConfig cfg(1);
  ComplexSpectrum x(cfg);
  x.set(0, 0, 2.0);
  x.set(0, 1, {1.0, 0.5});
  const Eigen::VectorXd v = real_from_complex_vector(x);
  REQUIRE(v.size() == 12);
  CHECK(v(0) == 2.0);
  CHECK(v(1) == 0.0);
  CHECK(v(2) == 1.0);
  CHECK(v(3) == 0.5);
  CHECK(v.tail(8).isZero(0.0));
  CHECK(real_from_complex_vector(ComplexSpectrum(HarmonicConfig(4))).isZero(0.0));
}

TEST_CASE("vector round trips agree with the layout oracle") {
  std::mt19937_64 rng(7);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int K = 1 + trial % 9;
    const HarmonicConfig cfg(K);
    const Eigen::VectorXcd x = oracle::random_spectrum(K, rng);
    const Eigen::VectorXd real = real_from_complex_vector(ComplexSpectrum(cfg, x));
    CHECK((real - oracle::to_real(K, x)).cwiseAbs().maxCoeff() == 0.0);
    const auto back = complex_from_real_vector(cfg, real);
    worst = std::max(worst, (back.values() - x).cwiseAbs().maxCoeff());
    worst = std::max(worst, (real_from_complex_vector(back) - real).cwiseAbs().maxCoeff());
  }
  CHECK(worst < 1e-13);
}

TEST_CASE("broken conjugate symmetry is rejected") {
  const HarmonicConfig cfg(2);
  ComplexSpectrum x(cfg);
  x(1, 2) = {1.0, 1.0};
  CHECK_THROWS_AS(real_from_complex_vector(x), ValidationError);
  x(1, -2) = {1.0, -1.0 + 1e-12};
  CHECK_NOTHROW(real_from_complex_vector(x));
}

TEST_CASE("matrix transform: identity and impedance cases") {
  const HarmonicConfig cfg(3);
  const Eigen::MatrixXcd eye = Eigen::MatrixXcd::Identity(cfg.complex_size(), cfg.complex_size());
  CHECK(real_from_complex_matrix(cfg, eye).isIdentity(0.0));

  const LineImpedance z{{0.05, 0.06, 0.04}, {0.1, 0.95, 0.15}};
  const Eigen::MatrixXcd zc = z.complex_diagonal(cfg).asDiagonal();
  const Eigen::MatrixXd zr = real_from_complex_matrix(cfg, zc);
  CHECK((zr - z.real_matrix(cfg)).cwiseAbs().maxCoeff() < 1e-15);
  const int row = cfg.real_index(1, 2);
  CHECK(zr(row, row) == doctest::Approx(0.06));
  CHECK(zr(row, row + 1) == doctest::Approx(-2 * 0.95));
  CHECK(zr(row + 1, row) == doctest::Approx(2 * 0.95));
}

TEST_CASE("matrix transform matches the complex action") {
  std::mt19937_64 rng(11);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int K = 1 + trial % 4;
    const HarmonicConfig cfg(K);
    const Eigen::MatrixXcd a = oracle::random_symmetric_operator(K, rng);
    const Eigen::VectorXcd v = oracle::random_spectrum(K, rng);
    const Eigen::MatrixXd r = real_from_complex_matrix(cfg, a);
    const Eigen::VectorXd lhs = oracle::to_real(K, a * v);
    const Eigen::VectorXd rhs = oracle::naive_matvec(r, oracle::to_real(K, v));
    worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
  }
  CHECK(worst < 1e-11);
}

TEST_CASE("matrix transform is multiplicative on conjugate-symmetric inputs") {
  std::mt19937_64 rng(13);
  const int K = 3;
  const HarmonicConfig cfg(K);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXcd a = oracle::random_symmetric_operator(K, rng);
    const Eigen::MatrixXcd b = oracle::random_symmetric_operator(K, rng);
    const Eigen::MatrixXd rab = real_from_complex_matrix(cfg, Eigen::MatrixXcd(a * b));
    const Eigen::MatrixXd ra_rb = real_from_complex_matrix(cfg, a) * real_from_complex_matrix(cfg, b);
    // Im(x^0) is zero for every conjugate-symmetric input, so those columns are unconstrained.
    for (int col = 0; col < cfg.p(); ++col) {
      bool im_dc = false;
      for (int ph = 0; ph < kPhaseCount; ++ph) im_dc = im_dc || col == cfg.real_index(ph, 0) + 1;
      if (im_dc) continue;
      CHECK((rab.col(col) - ra_rb.col(col)).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
}

TEST_CASE("matrix transform rejects operators that break symmetry") {
  const HarmonicConfig cfg(1);
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Identity(cfg.complex_size(), cfg.complex_size());
  a(cfg.complex_index(0, 1), cfg.complex_index(0, 1)) = {0.0, 1.0};
  CHECK_THROWS_AS(real_from_complex_matrix(cfg, a), ValidationError);
  CHECK_THROWS_AS(real_from_complex_matrix(cfg, Eigen::MatrixXcd::Identity(4, 4)), ValidationError);
}

TEST_CASE("dc column is appended as the last real column") {
  const HarmonicConfig cfg(1);
  const Eigen::MatrixXcd eye = Eigen::MatrixXcd::Identity(cfg.complex_size(), cfg.complex_size());
  Eigen::VectorXcd dc = Eigen::VectorXcd::Zero(cfg.complex_size());
  dc(cfg.complex_index(2, 1)) = {0.3, -0.2};
  dc(cfg.complex_index(2, -1)) = {0.3, 0.2};
  const Fcm f(real_from_complex_matrix(cfg, eye, dc));
  CHECK(f.f()(cfg.real_index(2, 1)) == 0.3);
  CHECK(f.f()(cfg.real_index(2, 1) + 1) == -0.2);
  CHECK(f.bar().isIdentity(0.0));
}

TEST_CASE("FCM partition and application") {
  const HarmonicConfig cfg(2);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  CHECK_THROWS_AS(Fcm(Eigen::MatrixXd::Zero(18, 18)), ValidationError);

  const Fcm identity = Fcm::from_parts(Eigen::MatrixXd::Identity(cfg.p(), cfg.p()), Eigen::VectorXd::Zero(cfg.p()));
  Eigen::VectorXd v(cfg.q());
  for (int i = 0; i < cfg.q(); ++i) v(i) = g(rng);
  CHECK((apply_fcm(identity, v) - v.head(cfg.p())).isZero(0.0));

  Eigen::VectorXd f(cfg.p());
  for (int i = 0; i < cfg.p(); ++i) f(i) = g(rng);
  const Fcm dc_only = Fcm::from_parts(Eigen::MatrixXd::Zero(cfg.p(), cfg.p()), f);
  v(cfg.p()) = 0.05;
  CHECK((apply_fcm(dc_only, v) - 0.05 * f).cwiseAbs().maxCoeff() < 1e-17);

  Eigen::MatrixXd m(cfg.p(), cfg.q());
  for (int i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
  const Fcm random(m);
  CHECK((random.bar() == m.leftCols(cfg.p())));
  CHECK((random.f() == m.col(cfg.p())));
  CHECK((apply_fcm(random, v) - oracle::naive_matvec(m, v)).cwiseAbs().maxCoeff() < 1e-14);
  CHECK_THROWS_AS(apply_fcm(random, Eigen::VectorXd::Zero(cfg.p())), ValidationError);
}

TEST_CASE("line impedance blocks") {
  const HarmonicConfig cfg(4);
  const LineImpedance z{{0.05, 0.06, 0.04}, {0.1, 0.95, 0.15}};
  CHECK(z.z(0, 0) == std::complex<double>(0.05, 0.0));
  CHECK(z.z(2, 3) == std::complex<double>(0.04, 3 * 0.15));
  const Eigen::MatrixXd zr = z.real_matrix(cfg);
  for (int ph = 0; ph < kPhaseCount; ++ph) {
    const int i = cfg.real_index(ph, 0);
    CHECK(zr(i, i + 1) == 0.0);
    CHECK(zr(i + 1, i) == 0.0);
    CHECK(zr(i, i) == z.r[ph]);
    CHECK(zr(i + 1, i + 1) == z.r[ph]);
  }
  Eigen::MatrixXd off = zr;
  for (int b = 0; b < cfg.p(); b += 2) off.block(b, b, 2, 2).setZero();
  CHECK(off.isZero(0.0));
}

TEST_CASE("relative error metrics") {
  const Eigen::Matrix2d eye = Eigen::Matrix2d::Identity();
  CHECK(relative_error(eye, eye) == 0.0);
  CHECK(relative_error(Eigen::Matrix2d::Zero(), eye) == 1.0);
  Eigen::Matrix2d est = eye;
  est(1, 1) = 0.9;
  CHECK(relative_error(est, eye) == doctest::Approx(0.005).epsilon(1e-12));
  CHECK(relative_error(eye, est) > 0.0);
  CHECK_THROWS_AS(relative_error(eye, Eigen::Matrix2d::Zero()), ValidationError);
  CHECK_THROWS_AS(relative_error(Eigen::MatrixXd::Zero(3, 3), Eigen::MatrixXd(eye)), ValidationError);
  CHECK(relative_error(est, eye, OnlineNormalization{4.0}) == doctest::Approx(0.0025));
  CHECK_THROWS_AS(relative_error(est, eye, OnlineNormalization{0.0}), ValidationError);
}
