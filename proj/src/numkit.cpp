#include "rispm/numkit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace rispm {

CMat CMat::identity(std::size_t n) {
  CMat m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

CMat CMat::adjoint() const {
  CMat out(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) out(j, i) = std::conj((*this)(i, j));
  return out;
}

CMat CMat::transpose() const {
  CMat out(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) out(j, i) = (*this)(i, j);
  return out;
}

CMat CMat::operator*(const CMat& rhs) const {
  if (cols_ != rhs.rows_) throw std::invalid_argument("CMat multiply: dimension mismatch");
  CMat out(rows_, rhs.cols_);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t k = 0; k < cols_; ++k) {
      const cplx aik = (*this)(i, k);
      if (aik == cplx(0.0, 0.0)) continue;
      for (std::size_t j = 0; j < rhs.cols_; ++j) out(i, j) += aik * rhs(k, j);
    }
  }
  return out;
}

std::vector<cplx> CMat::operator*(const std::vector<cplx>& v) const {
  if (cols_ != v.size()) throw std::invalid_argument("CMat apply: dimension mismatch");
  std::vector<cplx> out(rows_, cplx(0.0, 0.0));
  for (std::size_t i = 0; i < rows_; ++i) {
    cplx acc(0.0, 0.0);
    for (std::size_t j = 0; j < cols_; ++j) acc += (*this)(i, j) * v[j];
    out[i] = acc;
  }
  return out;
}

CMat CMat::operator+(const CMat& rhs) const {
  if (rows_ != rhs.rows_ || cols_ != rhs.cols_)
    throw std::invalid_argument("CMat add: dimension mismatch");
  CMat out(rows_, cols_);
  for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] = data_[i] + rhs.data_[i];
  return out;
}

CMat CMat::operator-(const CMat& rhs) const {
  if (rows_ != rhs.rows_ || cols_ != rhs.cols_)
    throw std::invalid_argument("CMat subtract: dimension mismatch");
  CMat out(rows_, cols_);
  for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] = data_[i] - rhs.data_[i];
  return out;
}

CMat CMat::scaled(cplx factor) const {
  CMat out(rows_, cols_);
  for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] = data_[i] * factor;
  return out;
}

std::vector<cplx> CMat::col(std::size_t j) const {
  std::vector<cplx> out(rows_);
  for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
  return out;
}

std::vector<cplx> CMat::row(std::size_t i) const {
  std::vector<cplx> out(cols_);
  for (std::size_t j = 0; j < cols_; ++j) out[j] = (*this)(i, j);
  return out;
}

cplx CMat::trace() const {
  cplx acc(0.0, 0.0);
  for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) acc += (*this)(i, i);
  return acc;
}

double CMat::max_abs() const {
  double m = 0.0;
  for (const cplx& v : data_) m = std::max(m, std::abs(v));
  return m;
}

double CMat::frobenius() const {
  double acc = 0.0;
  for (const cplx& v : data_) acc += std::norm(v);
  return std::sqrt(acc);
}

bool CMat::is_hermitian(double rel_tol) const {
  if (rows_ != cols_) return false;
  const double scale = std::max(max_abs(), 1e-300);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = i; j < cols_; ++j)
      if (std::abs((*this)(i, j) - std::conj((*this)(j, i))) > rel_tol * scale) return false;
  return true;
}

CMat CMat::hermitized() const {
  CMat out(rows_, cols_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j)
      out(i, j) = 0.5 * ((*this)(i, j) + std::conj((*this)(j, i)));
  return out;
}

cplx dot_conj(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot_conj: size mismatch");
  cplx acc(0.0, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::conj(a[i]) * b[i];
  return acc;
}

double vec_norm(const std::vector<cplx>& v) {
  double acc = 0.0;
  for (const cplx& x : v) acc += std::norm(x);
  return std::sqrt(acc);
}

std::vector<cplx> vec_scaled(const std::vector<cplx>& v, cplx factor) {
  std::vector<cplx> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] * factor;
  return out;
}

namespace {

// One cyclic Jacobi rotation zeroing A(p,q). A stays Hermitian, V
// accumulates the applied unitary columns.
void jacobi_rotate(CMat& a, CMat& v, std::size_t p, std::size_t q) {
  const cplx apq = a(p, q);
  const double zmag = std::abs(apq);
  if (zmag == 0.0) return;
  const cplx phase = apq / zmag;  // e^{j*beta}
  const double app = a(p, p).real();
  const double aqq = a(q, q).real();
  const double tau = (aqq - app) / (2.0 * zmag);
  const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
  const double c = 1.0 / std::sqrt(1.0 + t * t);
  const double s = t * c;

  // U is identity except rows/cols (p,q):
  //   U(p,p) = c, U(p,q) = s, U(q,p) = -s*conj(phase), U(q,q) = c*conj(phase)
  const cplx upp(c, 0.0), upq(s, 0.0);
  const cplx uqp = -s * std::conj(phase);
  const cplx uqq = c * std::conj(phase);

  const std::size_t n = a.rows();
  // A <- A U (columns p and q change)
  for (std::size_t k = 0; k < n; ++k) {
    const cplx akp = a(k, p), akq = a(k, q);
    a(k, p) = akp * upp + akq * uqp;
    a(k, q) = akp * upq + akq * uqq;
  }
  // A <- U^H A (rows p and q change)
  for (std::size_t k = 0; k < n; ++k) {
    const cplx apk = a(p, k), aqk = a(q, k);
    a(p, k) = std::conj(upp) * apk + std::conj(uqp) * aqk;
    a(q, k) = std::conj(upq) * apk + std::conj(uqq) * aqk;
  }
  a(p, q) = 0.0;
  a(q, p) = 0.0;
  a(p, p) = cplx(a(p, p).real(), 0.0);
  a(q, q) = cplx(a(q, q).real(), 0.0);

  // V <- V U
  for (std::size_t k = 0; k < n; ++k) {
    const cplx vkp = v(k, p), vkq = v(k, q);
    v(k, p) = vkp * upp + vkq * uqp;
    v(k, q) = vkp * upq + vkq * uqq;
  }
}

double offdiag_norm(const CMat& a) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i + 1; j < a.cols(); ++j) acc += std::norm(a(i, j));
  return std::sqrt(2.0 * acc);
}

}  // namespace

EigResult hermitian_eig(const CMat& m) {
  if (m.rows() != m.cols() || m.rows() == 0)
    throw std::invalid_argument("hermitian_eig: matrix must be square and non-empty");
  if (!m.is_hermitian())
    throw std::invalid_argument("hermitian_eig: input is not Hermitian within tolerance");

  const std::size_t n = m.rows();
  CMat a = m.hermitized();
  CMat v = CMat::identity(n);

  const double scale = std::max(a.frobenius(), 1e-300);
  constexpr int kMaxSweeps = 60;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    if (offdiag_norm(a) <= 1e-15 * scale) break;
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q)
        if (std::abs(a(p, q)) > 1e-18 * scale) jacobi_rotate(a, v, p, q);
  }

  EigResult res;
  res.values.resize(n);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) {
    res.values[i] = a(i, i).real();
    order[i] = i;
  }
  std::sort(order.begin(), order.end(),
            [&](std::size_t x, std::size_t y) { return a(x, x).real() < a(y, y).real(); });
  std::sort(res.values.begin(), res.values.end());
  res.vectors = CMat(n, n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) res.vectors(i, j) = v(i, order[j]);
  return res;
}

std::pair<double, std::vector<cplx>> hermitian_eig_max(const CMat& m) {
  EigResult full = hermitian_eig(m);
  const std::size_t last = full.values.size() - 1;
  std::vector<cplx> vec = full.vectors.col(last);
  const double nrm = vec_norm(vec);
  if (nrm > 0.0) vec = vec_scaled(vec, 1.0 / nrm);
  return {full.values[last], vec};
}

CMat dft_matrix(std::size_t n) {
  if (n == 0) throw std::invalid_argument("dft_matrix: size must be positive");
  CMat f(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      // Reduce the index product mod n before forming the angle; keeps the
      // entries exactly periodic for larger n.
      const std::size_t ij = (i * j) % n;
      const double angle = -2.0 * M_PI * static_cast<double>(ij) / static_cast<double>(n);
      f(i, j) = std::polar(1.0, angle);
    }
  }
  return f;
}

double gamma_fn(double x) {
  if (!(x > 0.0)) throw std::domain_error("gamma_fn: argument must be positive");
  return std::tgamma(x);
}

bool cholesky_factor(const CMat& a, CMat& lower) {
  const std::size_t n = a.rows();
  if (a.cols() != n) throw std::invalid_argument("cholesky_factor: matrix must be square");
  lower = CMat(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      cplx acc = a(i, j);
      for (std::size_t k = 0; k < j; ++k) acc -= lower(i, k) * std::conj(lower(j, k));
      if (i == j) {
        const double d = acc.real();
        if (!(d > 0.0) || !std::isfinite(d)) return false;
        lower(i, i) = std::sqrt(d);
      } else {
        lower(i, j) = acc / lower(j, j);
      }
    }
  }
  return true;
}

std::vector<cplx> cholesky_solve(const CMat& lower, std::vector<cplx> rhs) {
  const std::size_t n = lower.rows();
  if (rhs.size() != n) throw std::invalid_argument("cholesky_solve: size mismatch");
  for (std::size_t i = 0; i < n; ++i) {
    cplx acc = rhs[i];
    for (std::size_t k = 0; k < i; ++k) acc -= lower(i, k) * rhs[k];
    rhs[i] = acc / lower(i, i);
  }
  for (std::size_t ii = n; ii-- > 0;) {
    cplx acc = rhs[ii];
    for (std::size_t k = ii + 1; k < n; ++k) acc -= std::conj(lower(k, ii)) * rhs[k];
    rhs[ii] = acc / lower(ii, ii);
  }
  return rhs;
}

CMat cholesky_inverse(const CMat& lower) {
  const std::size_t n = lower.rows();
  CMat inv(n, n);
  std::vector<cplx> e(n, cplx(0.0, 0.0));
  for (std::size_t j = 0; j < n; ++j) {
    e.assign(n, cplx(0.0, 0.0));
    e[j] = 1.0;
    std::vector<cplx> x = cholesky_solve(lower, e);
    for (std::size_t i = 0; i < n; ++i) inv(i, j) = x[i];
  }
  return inv;
}

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t stream_id)
    : master_seed_(master_seed), stream_id_(stream_id) {
  const std::uint32_t words[4] = {
      static_cast<std::uint32_t>(master_seed & 0xffffffffu),
      static_cast<std::uint32_t>(master_seed >> 32),
      static_cast<std::uint32_t>(stream_id & 0xffffffffu),
      static_cast<std::uint32_t>(stream_id >> 32)};
  std::seed_seq seq(words, words + 4);
  engine_.seed(seq);
}

double RngStream::uniform01() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RngStream::normal() {
  if (has_cached_normal_) {
    has_cached_normal_ = false;
    return cached_normal_;
  }
  // Box-Muller on explicitly constructed uniforms (u1 in (0,1]).
  const double u1 = static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
  const double u2 = uniform01();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double th = 2.0 * M_PI * u2;
  cached_normal_ = r * std::sin(th);
  has_cached_normal_ = true;
  return r * std::cos(th);
}

cplx RngStream::cnormal() {
  const double u1 = static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
  const double u2 = uniform01();
  const double r = std::sqrt(-std::log(u1));  // |CN(0,1)| is Rayleigh(1/sqrt(2))
  const double th = 2.0 * M_PI * u2;
  return {r * std::cos(th), r * std::sin(th)};
}

double RngStream::phase() {
  return 2.0 * M_PI * (1.0 - uniform01());
}

std::vector<cplx> RngStream::cnormal_vec(std::size_t n) {
  std::vector<cplx> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = cnormal();
  return out;
}

}  // namespace rispm
