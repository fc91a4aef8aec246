#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

#include "diqkd/rng.hpp"

namespace diqkd::qmath {

using Complex = std::complex<double>;

// Numerical tolerances used across the library.
inline constexpr double kHermitianTol = 1e-12;   // max |M - M^dag| entry
inline constexpr double kPsdSlack = 1e-10;       // eigenvalues >= -kPsdSlack
inline constexpr double kTraceTol = 1e-10;       // |tr - 1| for states
inline constexpr double kEntropyClamp = 1e-15;   // p below this contributes 0 to -p log p

// Raised when an iterative routine fails to converge (maps to CLI exit code 4).
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Dense square complex matrix, row-major storage. Dimensions here are tiny
// (2..64), so everything is plain O(d^2)/O(d^3) loops with no blocking.
class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  explicit ComplexMatrix(std::size_t dim) : dim_(dim), a_(dim * dim) {}
  ComplexMatrix(std::initializer_list<std::initializer_list<Complex>> rows);

  static ComplexMatrix identity(std::size_t dim);

  std::size_t dim() const { return dim_; }

  Complex& operator()(std::size_t i, std::size_t j) { return a_[i * dim_ + j]; }
  const Complex& operator()(std::size_t i, std::size_t j) const { return a_[i * dim_ + j]; }

  ComplexMatrix adjoint() const;
  ComplexMatrix conjugate() const;
  Complex trace() const;
  double max_abs() const;
  double hermiticity_defect() const;  // max entry of |M - M^dag|
  bool is_hermitian(double tol = kHermitianTol) const { return hermiticity_defect() <= tol; }

  ComplexMatrix& operator+=(const ComplexMatrix& o);
  ComplexMatrix& operator-=(const ComplexMatrix& o);
  ComplexMatrix& operator*=(Complex s);

  friend ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
  friend ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
  friend ComplexMatrix operator*(Complex s, ComplexMatrix a) { return a *= s; }
  friend ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b);

  static ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);
  static ComplexMatrix outer(const std::vector<Complex>& u, const std::vector<Complex>& v);

 private:
  std::size_t dim_ = 0;
  std::vector<Complex> a_;
};

// Pauli operators and the 2x2 identity.
const ComplexMatrix& sigma_x();
const ComplexMatrix& sigma_y();
const ComplexMatrix& sigma_z();
const ComplexMatrix& identity2();

// Eigenvalues sorted descending; ties broken by lexicographic order of the
// phase-fixed eigenvector entries so results are deterministic. `vectors`
// holds eigenvectors as columns, matching the order of `values`.
struct Eigensystem {
  std::vector<double> values;
  ComplexMatrix vectors;
};

// Cyclic Jacobi diagonalization for Hermitian input (defect <= kHermitianTol,
// else std::domain_error). Reconstruction residual <= 1e-10 for the dims used
// here. Throws NumericError if sweeps fail to converge.
Eigensystem hermitian_eigensystem(const ComplexMatrix& m);

// Probability vector: entries >= -1e-12 (clamped to 0), sum within kTraceTol of 1.
class ProbabilityVector {
 public:
  explicit ProbabilityVector(std::vector<double> p);
  std::size_t size() const { return p_.size(); }
  double operator[](std::size_t i) const { return p_[i]; }
  const std::vector<double>& values() const { return p_; }

 private:
  std::vector<double> p_;
};

// Density operator: Hermitian within kHermitianTol, unit trace within
// kTraceTol, eigenvalues >= -kPsdSlack. Validation runs at construction.
class DensityMatrix {
 public:
  explicit DensityMatrix(ComplexMatrix m);
  static DensityMatrix pure(const std::vector<Complex>& psi);

  const ComplexMatrix& mat() const { return m_; }
  std::size_t dim() const { return m_.dim(); }

 private:
  ComplexMatrix m_;
};

double binary_entropy(double p);
double shannon_entropy(const ProbabilityVector& p);
double von_neumann_entropy(const DensityMatrix& rho);

enum class Subsystem { a, b };

// Trace out one factor of a bipartite state on C^dim_a (x) C^dim_b
// (index convention i = i_a * dim_b + i_b).
DensityMatrix partial_trace(const DensityMatrix& rho, Subsystem traced,
                            std::size_t dim_a, std::size_t dim_b);

// General partial trace over a tensor factorization: keep the factors listed
// in `keep` (in their original order), trace the rest.
DensityMatrix partial_trace_keep(const DensityMatrix& rho,
                                 const std::vector<std::size_t>& dims,
                                 const std::vector<std::size_t>& keep);

// Purification on system (x) ancilla with ancilla dimension = rank of rho
// (eigenvalues above kPsdSlack); pure input gives ancilla dimension 1.
// Tracing the ancilla recovers rho to within eigensolver accuracy.
std::vector<Complex> purify(const DensityMatrix& rho);

// Haar-ish random unitary (Gram-Schmidt of a Gaussian matrix) and a random
// full-rank density matrix (G G^dag normalized); used by verification sweeps.
ComplexMatrix random_unitary(std::size_t dim, CounterRng& rng);
DensityMatrix random_density_matrix(std::size_t dim, CounterRng& rng);

std::string format_complex(Complex z);

}  // namespace diqkd::qmath
