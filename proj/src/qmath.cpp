#include "diqkd/qmath.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace diqkd::qmath {

ComplexMatrix::ComplexMatrix(std::initializer_list<std::initializer_list<Complex>> rows)
    : dim_(rows.size()), a_(rows.size() * rows.size()) {
  std::size_t i = 0;
  for (const auto& row : rows) {
    if (row.size() != dim_) throw std::domain_error("ComplexMatrix: ragged initializer");
    std::size_t j = 0;
    for (Complex z : row) a_[i * dim_ + j++] = z;
    ++i;
  }
}

ComplexMatrix ComplexMatrix::identity(std::size_t dim) {
  ComplexMatrix m(dim);
  for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1.0;
  return m;
}

ComplexMatrix ComplexMatrix::adjoint() const {
  ComplexMatrix m(dim_);
  for (std::size_t i = 0; i < dim_; ++i)
    for (std::size_t j = 0; j < dim_; ++j) m(j, i) = std::conj((*this)(i, j));
  return m;
}

ComplexMatrix ComplexMatrix::conjugate() const {
  ComplexMatrix m(dim_);
  for (std::size_t i = 0; i < dim_ * dim_; ++i) m.a_[i] = std::conj(a_[i]);
  return m;
}

Complex ComplexMatrix::trace() const {
  Complex t = 0.0;
  for (std::size_t i = 0; i < dim_; ++i) t += (*this)(i, i);
  return t;
}

double ComplexMatrix::max_abs() const {
  double m = 0.0;
  for (const Complex& z : a_) m = std::max(m, std::abs(z));
  return m;
}

double ComplexMatrix::hermiticity_defect() const {
  double d = 0.0;
  for (std::size_t i = 0; i < dim_; ++i)
    for (std::size_t j = i; j < dim_; ++j)
      d = std::max(d, std::abs((*this)(i, j) - std::conj((*this)(j, i))));
  return d;
}

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& o) {
  if (o.dim_ != dim_) throw std::domain_error("matrix dimension mismatch");
  for (std::size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator-=(const ComplexMatrix& o) {
  if (o.dim_ != dim_) throw std::domain_error("matrix dimension mismatch");
  for (std::size_t i = 0; i < a_.size(); ++i) a_[i] -= o.a_[i];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator*=(Complex s) {
  for (Complex& z : a_) z *= s;
  return *this;
}

ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.dim_ != b.dim_) throw std::domain_error("matrix dimension mismatch");
  const std::size_t d = a.dim_;
  ComplexMatrix c(d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t k = 0; k < d; ++k) {
      const Complex aik = a(i, k);
      if (aik == Complex{}) continue;
      for (std::size_t j = 0; j < d; ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

ComplexMatrix ComplexMatrix::kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  const std::size_t da = a.dim(), db = b.dim();
  ComplexMatrix c(da * db);
  for (std::size_t i = 0; i < da; ++i)
    for (std::size_t j = 0; j < da; ++j) {
      const Complex aij = a(i, j);
      if (aij == Complex{}) continue;
      for (std::size_t k = 0; k < db; ++k)
        for (std::size_t l = 0; l < db; ++l) c(i * db + k, j * db + l) = aij * b(k, l);
    }
  return c;
}

ComplexMatrix ComplexMatrix::outer(const std::vector<Complex>& u, const std::vector<Complex>& v) {
  if (u.size() != v.size()) throw std::domain_error("outer: length mismatch");
  ComplexMatrix m(u.size());
  for (std::size_t i = 0; i < u.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j) m(i, j) = u[i] * std::conj(v[j]);
  return m;
}

const ComplexMatrix& sigma_x() {
  static const ComplexMatrix m{{0.0, 1.0}, {1.0, 0.0}};
  return m;
}

const ComplexMatrix& sigma_y() {
  static const ComplexMatrix m{{0.0, Complex(0.0, -1.0)}, {Complex(0.0, 1.0), 0.0}};
  return m;
}

const ComplexMatrix& sigma_z() {
  static const ComplexMatrix m{{1.0, 0.0}, {0.0, -1.0}};
  return m;
}

const ComplexMatrix& identity2() {
  static const ComplexMatrix m = ComplexMatrix::identity(2);
  return m;
}

namespace {

// One cyclic Jacobi sweep pass for a Hermitian matrix; rotations accumulate
// into v. Off-diagonal mass strictly decreases each annihilation.
double off_diagonal_norm(const ComplexMatrix& a) {
  double s = 0.0;
  const std::size_t d = a.dim();
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j) s += std::norm(a(i, j));
  return std::sqrt(s);
}

void jacobi_rotate(ComplexMatrix& a, ComplexMatrix& v, std::size_t p, std::size_t q) {
  const Complex apq = a(p, q);
  const double g = std::abs(apq);
  if (g == 0.0) return;
  const double app = a(p, p).real();
  const double aqq = a(q, q).real();
  const Complex phase = apq / g;

  // tan(theta) for the real 2x2 problem [[app, g], [g, aqq]]
  const double zeta = (app - aqq) / (2.0 * g);
  double t;
  if (zeta >= 0.0)
    t = -1.0 / (zeta + std::sqrt(zeta * zeta + 1.0));
  else
    t = 1.0 / (-zeta + std::sqrt(zeta * zeta + 1.0));
  const double c = 1.0 / std::sqrt(1.0 + t * t);
  const Complex s = (t * c) * phase;
  const Complex sc = std::conj(s);

  const std::size_t d = a.dim();
  for (std::size_t k = 0; k < d; ++k) {  // A <- A J  (columns p, q)
    const Complex akp = a(k, p), akq = a(k, q);
    a(k, p) = c * akp - sc * akq;
    a(k, q) = s * akp + c * akq;
  }
  for (std::size_t k = 0; k < d; ++k) {  // A <- J^dag A  (rows p, q)
    const Complex apk = a(p, k), aqk = a(q, k);
    a(p, k) = c * apk - s * aqk;
    a(q, k) = sc * apk + c * aqk;
  }
  for (std::size_t k = 0; k < d; ++k) {  // V <- V J
    const Complex vkp = v(k, p), vkq = v(k, q);
    v(k, p) = c * vkp - sc * vkq;
    v(k, q) = s * vkp + c * vkq;
  }
  a(p, q) = 0.0;
  a(q, p) = 0.0;
}

// Fix the global phase of each eigenvector: largest-magnitude entry real positive.
void fix_phase(ComplexMatrix& v, std::size_t col) {
  const std::size_t d = v.dim();
  std::size_t imax = 0;
  double best = -1.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double m = std::abs(v(i, col));
    if (m > best + 1e-14) {
      best = m;
      imax = i;
    }
  }
  if (best <= 0.0) return;
  const Complex ph = std::conj(v(imax, col)) / best;
  for (std::size_t i = 0; i < d; ++i) v(i, col) *= ph;
}

bool vector_lex_less(const ComplexMatrix& v, std::size_t c1, std::size_t c2) {
  for (std::size_t i = 0; i < v.dim(); ++i) {
    const Complex a = v(i, c1), b = v(i, c2);
    if (a.real() != b.real()) return a.real() < b.real();
    if (a.imag() != b.imag()) return a.imag() < b.imag();
  }
  return false;
}

}  // namespace

Eigensystem hermitian_eigensystem(const ComplexMatrix& m) {
  if (m.dim() == 0) throw std::domain_error("hermitian_eigensystem: empty matrix");
  if (!m.is_hermitian())
    throw std::domain_error("hermitian_eigensystem: input is not Hermitian (defect > 1e-12)");

  const std::size_t d = m.dim();
  ComplexMatrix a = m;
  ComplexMatrix v = ComplexMatrix::identity(d);
  const double scale = std::max(1.0, m.max_abs());

  bool converged = false;
  for (int sweep = 0; sweep < 100; ++sweep) {
    if (off_diagonal_norm(a) <= 1e-14 * scale * static_cast<double>(d)) {
      converged = true;
      break;
    }
    for (std::size_t p = 0; p < d; ++p)
      for (std::size_t q = p + 1; q < d; ++q) jacobi_rotate(a, v, p, q);
  }
  if (!converged && off_diagonal_norm(a) > 1e-11 * scale * static_cast<double>(d))
    throw NumericError("hermitian_eigensystem: Jacobi sweeps did not converge");

  for (std::size_t c = 0; c < d; ++c) fix_phase(v, c);

  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    const double li = a(i, i).real(), lj = a(j, j).real();
    if (li != lj) return li > lj;
    return vector_lex_less(v, i, j);
  });

  Eigensystem es;
  es.values.resize(d);
  es.vectors = ComplexMatrix(d);
  for (std::size_t c = 0; c < d; ++c) {
    es.values[c] = a(order[c], order[c]).real();
    for (std::size_t i = 0; i < d; ++i) es.vectors(i, c) = v(i, order[c]);
  }
  return es;
}

ProbabilityVector::ProbabilityVector(std::vector<double> p) : p_(std::move(p)) {
  double sum = 0.0;
  for (double& x : p_) {
    if (x < -1e-12) throw std::domain_error("ProbabilityVector: negative entry");
    if (x < 0.0) x = 0.0;
    sum += x;
  }
  if (std::abs(sum - 1.0) > kTraceTol)
    throw std::domain_error("ProbabilityVector: entries do not sum to 1");
}

DensityMatrix::DensityMatrix(ComplexMatrix m) : m_(std::move(m)) {
  if (m_.dim() == 0) throw std::domain_error("DensityMatrix: empty matrix");
  if (!m_.is_hermitian()) throw std::domain_error("DensityMatrix: not Hermitian");
  if (std::abs(m_.trace().real() - 1.0) > kTraceTol || std::abs(m_.trace().imag()) > kTraceTol)
    throw std::domain_error("DensityMatrix: trace is not 1");
  const Eigensystem es = hermitian_eigensystem(m_);
  if (es.values.back() < -kPsdSlack)
    throw std::domain_error("DensityMatrix: negative eigenvalue beyond tolerance");
}

DensityMatrix DensityMatrix::pure(const std::vector<Complex>& psi) {
  double n2 = 0.0;
  for (const Complex& z : psi) n2 += std::norm(z);
  if (std::abs(n2 - 1.0) > kTraceTol) throw std::domain_error("pure: vector is not normalized");
  return DensityMatrix(ComplexMatrix::outer(psi, psi));
}

double binary_entropy(double p) {
  if (p < -1e-12 || p > 1.0 + 1e-12) throw std::domain_error("binary_entropy: p outside [0,1]");
  p = std::clamp(p, 0.0, 1.0);
  double h = 0.0;
  if (p > kEntropyClamp) h -= p * std::log2(p);
  if (1.0 - p > kEntropyClamp) h -= (1.0 - p) * std::log2(1.0 - p);
  return h;
}

double shannon_entropy(const ProbabilityVector& p) {
  double h = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p[i] > kEntropyClamp) h -= p[i] * std::log2(p[i]);
  return h;
}

double von_neumann_entropy(const DensityMatrix& rho) {
  Eigensystem es = hermitian_eigensystem(rho.mat());
  double sum = 0.0;
  for (double& l : es.values) {
    if (l < 0.0) l = 0.0;  // PSD slack already enforced at construction
    sum += l;
  }
  double h = 0.0;
  for (double l : es.values) {
    const double p = l / sum;
    if (p > kEntropyClamp) h -= p * std::log2(p);
  }
  return h;
}

DensityMatrix partial_trace(const DensityMatrix& rho, Subsystem traced,
                            std::size_t dim_a, std::size_t dim_b) {
  if (dim_a * dim_b != rho.dim())
    throw std::domain_error("partial_trace: dimensions do not factor the state");
  if (traced == Subsystem::b) return partial_trace_keep(rho, {dim_a, dim_b}, {0});
  return partial_trace_keep(rho, {dim_a, dim_b}, {1});
}

DensityMatrix partial_trace_keep(const DensityMatrix& rho,
                                 const std::vector<std::size_t>& dims,
                                 const std::vector<std::size_t>& keep) {
  std::size_t total = 1;
  for (std::size_t d : dims) total *= d;
  if (total != rho.dim()) throw std::domain_error("partial_trace_keep: dims do not factor state");
  if (keep.empty()) throw std::domain_error("partial_trace_keep: nothing kept");

  std::size_t kept_dim = 1, traced_dim = 1;
  std::vector<bool> kept(dims.size(), false);
  for (std::size_t k : keep) {
    if (k >= dims.size()) throw std::domain_error("partial_trace_keep: bad factor index");
    kept[k] = true;
  }
  for (std::size_t f = 0; f < dims.size(); ++f) {
    if (kept[f])
      kept_dim *= dims[f];
    else
      traced_dim *= dims[f];
  }

  // Stride of each factor in the composite row-major index.
  std::vector<std::size_t> stride(dims.size(), 1);
  for (std::size_t f = dims.size(); f-- > 1;) stride[f - 1] = stride[f] * dims[f];

  // Map a kept (traced) multi-index to its contribution in the composite index.
  auto expand = [&](std::size_t packed, const std::vector<bool>& mask, bool want) {
    std::size_t composite = 0;
    for (std::size_t f = dims.size(); f-- > 0;) {
      if (mask[f] != want) continue;
      composite += (packed % dims[f]) * stride[f];
      packed /= dims[f];
    }
    return composite;
  };

  ComplexMatrix out(kept_dim);
  for (std::size_t i = 0; i < kept_dim; ++i)
    for (std::size_t j = 0; j < kept_dim; ++j) {
      const std::size_t bi = expand(i, kept, true);
      const std::size_t bj = expand(j, kept, true);
      Complex s = 0.0;
      for (std::size_t t = 0; t < traced_dim; ++t) {
        const std::size_t bt = expand(t, kept, false);
        s += rho.mat()(bi + bt, bj + bt);
      }
      out(i, j) = s;
    }
  return DensityMatrix(std::move(out));
}

std::vector<Complex> purify(const DensityMatrix& rho) {
  const Eigensystem es = hermitian_eigensystem(rho.mat());
  std::size_t rank = 0;
  for (double l : es.values)
    if (l > kPsdSlack) ++rank;
  if (rank == 0) throw std::domain_error("purify: zero state");

  const std::size_t d = rho.dim();
  std::vector<Complex> psi(d * rank);
  for (std::size_t k = 0; k < rank; ++k) {
    const double w = std::sqrt(std::max(es.values[k], 0.0));
    for (std::size_t i = 0; i < d; ++i) psi[i * rank + k] += w * es.vectors(i, k);
  }
  return psi;
}

ComplexMatrix random_unitary(std::size_t dim, CounterRng& rng) {
  ComplexMatrix g(dim);
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j < dim; ++j)
      g(i, j) = Complex(rng.next_gaussian(), rng.next_gaussian());

  // Modified Gram-Schmidt on columns, with one re-orthogonalization pass.
  for (std::size_t c = 0; c < dim; ++c) {
    for (int pass = 0; pass < 2; ++pass)
      for (std::size_t p = 0; p < c; ++p) {
        Complex dot = 0.0;
        for (std::size_t i = 0; i < dim; ++i) dot += std::conj(g(i, p)) * g(i, c);
        for (std::size_t i = 0; i < dim; ++i) g(i, c) -= dot * g(i, p);
      }
    double n2 = 0.0;
    for (std::size_t i = 0; i < dim; ++i) n2 += std::norm(g(i, c));
    const double inv = 1.0 / std::sqrt(n2);
    for (std::size_t i = 0; i < dim; ++i) g(i, c) *= inv;
  }
  return g;
}

DensityMatrix random_density_matrix(std::size_t dim, CounterRng& rng) {
  ComplexMatrix g(dim);
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j < dim; ++j)
      g(i, j) = Complex(rng.next_gaussian(), rng.next_gaussian());
  ComplexMatrix rho = g * g.adjoint();
  const double tr = rho.trace().real();
  rho *= Complex(1.0 / tr, 0.0);
  // Symmetrize away the last bits of round-off.
  ComplexMatrix h = rho.adjoint();
  rho += h;
  rho *= Complex(0.5, 0.0);
  return DensityMatrix(std::move(rho));
}

std::string format_complex(Complex z) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g%+.12gi", z.real(), z.imag());
  return buf;
}

}  // namespace diqkd::qmath
