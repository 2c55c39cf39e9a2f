#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace rispm {

using cplx = std::complex<double>;

// Shared numerical tolerances. All relative unless noted.
inline constexpr double kHermitianRelTol = 1e-12;  // admissible |M - M^H| vs max|M|
inline constexpr double kEigResidualTol = 1e-9;    // ||Mv - lambda*v|| vs ||M||
inline constexpr double kUnitModulusTol = 1e-12;

/// Dense row-major complex matrix. Sized for the small problems in this
/// project (dimension up to a few dozen); everything is O(n^3) direct math.
class CMat {
 public:
  CMat() : rows_(0), cols_(0) {}
  CMat(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, cplx(0.0, 0.0)) {}

  static CMat identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  cplx& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const cplx& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  CMat adjoint() const;
  CMat transpose() const;

  CMat operator*(const CMat& rhs) const;
  std::vector<cplx> operator*(const std::vector<cplx>& v) const;
  CMat operator+(const CMat& rhs) const;
  CMat operator-(const CMat& rhs) const;
  CMat scaled(cplx factor) const;

  /// Column j as a vector.
  std::vector<cplx> col(std::size_t j) const;
  /// Row i as a vector (not conjugated).
  std::vector<cplx> row(std::size_t i) const;

  cplx trace() const;
  double max_abs() const;
  double frobenius() const;
  bool is_hermitian(double rel_tol = kHermitianRelTol) const;
  /// Returns (M + M^H)/2.
  CMat hermitized() const;

 private:
  std::size_t rows_, cols_;
  std::vector<cplx> data_;
};

// Small vector helpers used throughout.
cplx dot_conj(const std::vector<cplx>& a, const std::vector<cplx>& b);  // a^H b
double vec_norm(const std::vector<cplx>& v);
std::vector<cplx> vec_scaled(const std::vector<cplx>& v, cplx factor);

/// Eigendecomposition of a Hermitian matrix: values ascending, eigenvectors
/// as the matching columns of a unitary matrix.
struct EigResult {
  std::vector<double> values;
  CMat vectors;
};

/// Full Hermitian eigendecomposition by cyclic Jacobi rotations.
/// Throws std::invalid_argument if the input is not Hermitian within
/// kHermitianRelTol (relative to max|M|).
EigResult hermitian_eig(const CMat& m);

/// Largest eigenvalue and a unit-norm eigenvector of a Hermitian matrix.
std::pair<double, std::vector<cplx>> hermitian_eig_max(const CMat& m);

/// n x n DFT matrix with entries exp(-j*2*pi*i*k/n). Throws on n = 0.
CMat dft_matrix(std::size_t n);

/// Gamma function on the positive reals. Throws std::domain_error for x <= 0.
double gamma_fn(double x);

/// Cholesky factor (lower triangular, A = L L^H) of a Hermitian
/// positive-definite matrix. Returns false when a pivot fails.
bool cholesky_factor(const CMat& a, CMat& lower);
/// Solves L y = b (forward) then L^H x = y (backward).
std::vector<cplx> cholesky_solve(const CMat& lower, std::vector<cplx> rhs);
/// Inverse from a Cholesky factor.
CMat cholesky_inverse(const CMat& lower);

/// Reproducible random stream. A stream is fully determined by
/// (master_seed, stream_id); distinct ids give independent sequences.
/// The normal/exponential transforms are implemented explicitly so that
/// sequences are identical across standard-library implementations.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_id);

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  /// Uniform on [0, 1).
  double uniform01();
  /// Standard real normal N(0, 1).
  double normal();
  /// Circularly symmetric complex normal CN(0, 1).
  cplx cnormal();
  /// Phase uniform on (0, 2*pi].
  double phase();

  std::vector<cplx> cnormal_vec(std::size_t n);

 private:
  std::uint64_t master_seed_, stream_id_;
  std::mt19937_64 engine_;
  bool has_cached_normal_ = false;
  double cached_normal_ = 0.0;
};

inline RngStream substream(std::uint64_t master_seed, std::uint64_t stream_id) {
  return RngStream(master_seed, stream_id);
}

}  // namespace rispm
