#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <complex>
#include <string>

#include "fcm/errors.hpp"

namespace fcm {

inline constexpr int kPhaseCount = 3;
inline constexpr std::array<char, kPhaseCount> kPhaseNames{'a', 'b', 'c'};

/// Harmonic bookkeeping for a three-phase system truncated at order K.
///
/// Real layout (length p = 6(K+1)): phase-major, order ascending 0..K within a
/// phase, real part before imaginary part. Voltage-side vectors append the dc
/// current as entry p, giving length q = p + 1.
///
/// Complex layout (length 3(2K+1)): phase-major, order ascending -K..K.
struct HarmonicConfig {
  int K = 50;

  HarmonicConfig() = default;
  explicit HarmonicConfig(int max_order) : K(max_order) {
    if (max_order < 0) throw ValidationError("harmonic order K must be non-negative");
  }

  int orders() const { return K + 1; }
  int phase_block() const { return 2 * (K + 1); }
  int p() const { return 6 * (K + 1); }
  int q() const { return p() + 1; }
  int complex_phase_block() const { return 2 * K + 1; }
  int complex_size() const { return 3 * (2 * K + 1); }

  /// Index of Re(x^k(phase)); the imaginary part sits at +1.
  int real_index(int phase, int k) const { return phase * phase_block() + 2 * k; }
  int complex_index(int phase, int k) const { return phase * complex_phase_block() + k + K; }
  int dc_index() const { return p(); }

  /// Recovers K from a real vector length (p or q); throws if it is neither.
  static HarmonicConfig from_real_length(Eigen::Index n);

  friend bool operator==(const HarmonicConfig&, const HarmonicConfig&) = default;
};

/// Conjugate-symmetric per-phase harmonic phasors x^k, k = -K..K.
template <typename Real>
class BasicComplexSpectrum {
 public:
  using Complex = std::complex<Real>;
  using Vector = Eigen::Matrix<Complex, Eigen::Dynamic, 1>;

  explicit BasicComplexSpectrum(HarmonicConfig cfg)
      : cfg_(cfg), values_(Vector::Zero(cfg.complex_size())) {}

  BasicComplexSpectrum(HarmonicConfig cfg, Vector values) : cfg_(cfg), values_(std::move(values)) {
    if (values_.size() != cfg_.complex_size())
      throw ValidationError("complex spectrum length does not match 3(2K+1)");
  }

  const HarmonicConfig& config() const { return cfg_; }
  const Vector& values() const { return values_; }
  Vector& values() { return values_; }

  Complex operator()(int phase, int k) const { return values_(cfg_.complex_index(phase, k)); }
  Complex& operator()(int phase, int k) { return values_(cfg_.complex_index(phase, k)); }

  /// Sets x^k and its mirror x^-k = conj(x^k).
  void set(int phase, int k, Complex value) {
    (*this)(phase, k) = value;
    if (k != 0) (*this)(phase, -k) = std::conj(value);
  }

  /// Largest |x^-k - conj(x^k)| over all phases and orders.
  Real symmetry_defect() const {
    Real worst = 0;
    for (int ph = 0; ph < kPhaseCount; ++ph)
      for (int k = 0; k <= cfg_.K; ++k)
        worst = std::max(worst, std::abs((*this)(ph, -k) - std::conj((*this)(ph, k))));
    return worst;
  }

 private:
  HarmonicConfig cfg_;
  Vector values_;
};

using ComplexSpectrum = BasicComplexSpectrum<double>;

namespace detail {

template <typename Real>
Real symmetry_tolerance(Real scale) {
  return Real(1e-9) * std::max(Real(1), scale);
}

/// Complex index of order -k given the index of order k (same phase).
inline int mirror_index(const HarmonicConfig& cfg, int i) {
  const int block = cfg.complex_phase_block();
  const int base = (i / block) * block;
  return base + (block - 1 - (i - base));
}

}  // namespace detail

/// Real interleaved form of a conjugate-symmetric spectrum (length p).
template <typename Real>
Eigen::Matrix<Real, Eigen::Dynamic, 1> real_from_complex_vector(const BasicComplexSpectrum<Real>& x) {
  const auto& cfg = x.config();
  const Real scale = x.values().size() ? x.values().cwiseAbs().maxCoeff() : Real(0);
  if (x.symmetry_defect() > detail::symmetry_tolerance(scale))
    throw ValidationError("spectrum is not conjugate-symmetric");
  Eigen::Matrix<Real, Eigen::Dynamic, 1> out(cfg.p());
  for (int ph = 0; ph < kPhaseCount; ++ph)
    for (int k = 0; k <= cfg.K; ++k) {
      const auto v = x(ph, k);
      out(cfg.real_index(ph, k)) = v.real();
      out(cfg.real_index(ph, k) + 1) = v.imag();
    }
  return out;
}

/// Inverse of real_from_complex_vector; accepts length p (any trailing dc
/// entry of a length-q vector is ignored).
template <typename Derived>
BasicComplexSpectrum<typename Derived::Scalar> complex_from_real_vector(
    const HarmonicConfig& cfg, const Eigen::MatrixBase<Derived>& v) {
  using Real = typename Derived::Scalar;
  if (v.size() != cfg.p() && v.size() != cfg.q())
    throw ValidationError("real harmonic vector length must be p or q");
  BasicComplexSpectrum<Real> x(cfg);
  for (int ph = 0; ph < kPhaseCount; ++ph)
    for (int k = 0; k <= cfg.K; ++k) {
      const std::complex<Real> value(v(cfg.real_index(ph, k)), v(cfg.real_index(ph, k) + 1));
      x(ph, k) = value;
      if (k != 0) x(ph, -k) = std::conj(value);
    }
  return x;
}

/// Real form R of a complex operator A on harmonic spectra, such that
/// real(A v) = R real(v) for every conjugate-symmetric v.
///
/// For output order k >= 0 and input order m >= 1 the 2x2 block is
/// [[Re S, -Im D], [Im S, Re D]] with S = A(k,m) + A(k,-m), D = A(k,m) - A(k,-m);
/// for m = 0 it is the complex multiplication block of A(k,0).
///
/// `dc_column`, when non-empty, is appended as a final real column holding the
/// (Re, Im) parts of its orders 0..K.
template <typename Derived, typename DerivedDc>
Eigen::Matrix<typename Derived::Scalar::value_type, Eigen::Dynamic, Eigen::Dynamic>
real_from_complex_matrix(const HarmonicConfig& cfg, const Eigen::MatrixBase<Derived>& a,
                         const Eigen::MatrixBase<DerivedDc>& dc_column) {
  using Real = typename Derived::Scalar::value_type;
  const int n = cfg.complex_size();
  if (a.rows() != n || a.cols() != n)
    throw ValidationError("complex operator must be 3(2K+1) square");
  const bool has_dc = dc_column.size() != 0;
  if (has_dc && dc_column.size() != n)
    throw ValidationError("dc column must have length 3(2K+1)");

  const Real scale = a.cwiseAbs().maxCoeff();
  const Real tol = detail::symmetry_tolerance(scale);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (std::abs(a(detail::mirror_index(cfg, i), detail::mirror_index(cfg, j)) - std::conj(a(i, j))) > tol)
        throw ValidationError("complex operator does not preserve conjugate symmetry");
  if (has_dc) {
    const Real dc_tol = detail::symmetry_tolerance(Real(dc_column.cwiseAbs().maxCoeff()));
    for (int i = 0; i < n; ++i)
      if (std::abs(dc_column(detail::mirror_index(cfg, i)) - std::conj(dc_column(i))) > dc_tol)
        throw ValidationError("dc column is not conjugate-symmetric");
  }

  const int p = cfg.p();
  Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic> r(p, has_dc ? p + 1 : p);
  for (int ph = 0; ph < kPhaseCount; ++ph)
    for (int k = 0; k <= cfg.K; ++k) {
      const int row = cfg.real_index(ph, k);
      const int ai = cfg.complex_index(ph, k);
      for (int ps = 0; ps < kPhaseCount; ++ps) {
        {
          const auto z = a(ai, cfg.complex_index(ps, 0));
          const int col = cfg.real_index(ps, 0);
          r(row, col) = z.real();
          r(row, col + 1) = -z.imag();
          r(row + 1, col) = z.imag();
          r(row + 1, col + 1) = z.real();
        }
        for (int m = 1; m <= cfg.K; ++m) {
          const auto pos = a(ai, cfg.complex_index(ps, m));
          const auto neg = a(ai, cfg.complex_index(ps, -m));
          const auto s = pos + neg;
          const auto d = pos - neg;
          const int col = cfg.real_index(ps, m);
          r(row, col) = s.real();
          r(row, col + 1) = -d.imag();
          r(row + 1, col) = s.imag();
          r(row + 1, col + 1) = d.real();
        }
      }
      if (has_dc) {
        r(row, p) = dc_column(ai).real();
        r(row + 1, p) = dc_column(ai).imag();
      }
    }
  return r;
}

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar::value_type, Eigen::Dynamic, Eigen::Dynamic>
real_from_complex_matrix(const HarmonicConfig& cfg, const Eigen::MatrixBase<Derived>& a) {
  using Complex = typename Derived::Scalar;
  return real_from_complex_matrix(cfg, a, Eigen::Matrix<Complex, Eigen::Dynamic, 1>());
}

/// Frequency coupling matrix F = [Fbar | f] of size p x q, mapping the
/// voltage-plus-dc vector (vbar, i_dc) to the harmonic current vector.
template <typename Real>
class BasicFcm {
 public:
  using Matrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

  BasicFcm() = default;

  explicit BasicFcm(Matrix m) : m_(std::move(m)) {
    if (m_.rows() == 0 || m_.rows() % 6 != 0 || m_.cols() != m_.rows() + 1)
      throw ValidationError("FCM must be p x (p+1) with p = 6(K+1)");
  }

  static BasicFcm zero(const HarmonicConfig& cfg) { return BasicFcm(Matrix::Zero(cfg.p(), cfg.q())); }

  template <typename DerivedBar, typename DerivedF>
  static BasicFcm from_parts(const Eigen::MatrixBase<DerivedBar>& bar, const Eigen::MatrixBase<DerivedF>& f) {
    if (bar.rows() != bar.cols() || f.size() != bar.rows())
      throw ValidationError("FCM parts must be p x p and length p");
    Matrix m(bar.rows(), bar.cols() + 1);
    m << bar, f;
    return BasicFcm(std::move(m));
  }

  HarmonicConfig config() const { return HarmonicConfig(static_cast<int>(m_.rows() / 6) - 1); }
  Eigen::Index p() const { return m_.rows(); }
  Eigen::Index q() const { return m_.cols(); }

  const Matrix& matrix() const { return m_; }
  Matrix& matrix() { return m_; }

  auto bar() const { return m_.leftCols(m_.rows()); }
  auto bar() { return m_.leftCols(m_.rows()); }
  auto f() const { return m_.col(m_.rows()); }
  auto f() { return m_.col(m_.rows()); }

 private:
  Matrix m_;
};

using Fcm = BasicFcm<double>;

/// i = F v for a length-q voltage-plus-dc vector.
template <typename Real, typename Derived>
Eigen::Matrix<Real, Eigen::Dynamic, 1> apply_fcm(const BasicFcm<Real>& fcm, const Eigen::MatrixBase<Derived>& v) {
  if (v.size() != fcm.q()) throw ValidationError("apply_fcm: vector length must equal q");
  return fcm.bar() * v.head(fcm.p()) + fcm.f() * v(fcm.p());
}

/// Series impedance of a three-phase line: z^k = r + j k x per phase.
struct LineImpedance {
  std::array<double, kPhaseCount> r{};
  std::array<double, kPhaseCount> x{};

  std::complex<double> z(int phase, int k) const {
    return {r[phase], static_cast<double>(k) * x[phase]};
  }

  /// Real p x p form: 2x2 blocks [[r, -kx], [kx, r]] on the diagonal.
  Eigen::MatrixXd real_matrix(const HarmonicConfig& cfg) const;
  /// Complex diagonal over orders -K..K.
  Eigen::VectorXcd complex_diagonal(const HarmonicConfig& cfg) const;
};

/// Normalizer for the online error metric: a fixed, externally supplied denominator.
struct OnlineNormalization {
  double denominator;
};

/// ||truth - est||_F^2 / ||truth||_F^2.
template <typename DerivedA, typename DerivedB>
double relative_error(const Eigen::MatrixBase<DerivedA>& est, const Eigen::MatrixBase<DerivedB>& truth) {
  if (est.rows() != truth.rows() || est.cols() != truth.cols())
    throw ValidationError("relative_error: shape mismatch");
  const double den = static_cast<double>(truth.squaredNorm());
  if (den == 0.0) throw ValidationError("relative_error: reference matrix is zero");
  return static_cast<double>((truth - est).squaredNorm()) / den;
}

/// ||truth - est||_F^2 / denominator, with denominator = max_tau ||F*_tau||_F^2.
template <typename DerivedA, typename DerivedB>
double relative_error(const Eigen::MatrixBase<DerivedA>& est, const Eigen::MatrixBase<DerivedB>& truth,
                      OnlineNormalization norm) {
  if (est.rows() != truth.rows() || est.cols() != truth.cols())
    throw ValidationError("relative_error: shape mismatch");
  if (!(norm.denominator > 0.0)) throw ValidationError("relative_error: denominator must be positive");
  return static_cast<double>((truth - est).squaredNorm()) / norm.denominator;
}

std::string phase_name(int phase);

}  // namespace fcm
