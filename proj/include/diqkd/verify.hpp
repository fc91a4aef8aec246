#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "diqkd/chsh.hpp"
#include "diqkd/parallel.hpp"
#include "diqkd/qmath.hpp"
#include "diqkd/rng.hpp"

namespace diqkd::verify {

using chsh::BellDiagonalState;
using qmath::Complex;
using qmath::ComplexMatrix;
using qmath::DensityMatrix;

// Pair of +-1 observables on C^d (Hermitian within 1e-12, squares to the
// identity within 1e-10).
struct ObservablePair {
  ComplexMatrix a1, a2;
  ObservablePair(ComplexMatrix m1, ComplexMatrix m2);
  std::size_t dim() const { return a1.dim(); }
};

// Joint block structure of a pair of binary observables: orthogonal subspaces
// of dimension <= 2 preserved by both. On 2-dim blocks the restrictions are
// traceless Bloch observables; 1-dim blocks carry scalars +-1 (there the two
// observables agree up to sign).
struct Block {
  std::size_t rank = 0;                   // 1 or 2
  std::vector<Complex> basis;             // column-major, dim x rank
  std::array<double, 3> a1_bloch{}, a2_bloch{};  // rank 2
  double a1_scalar = 0.0, a2_scalar = 0.0;       // rank 1
};

struct BlockDecomposition {
  std::size_t dim = 0;
  std::vector<Block> blocks;

  ComplexMatrix projector(std::size_t block_index) const;
  // sum_blocks P A_j P; equals A_j within 1e-10 (tested invariant).
  ComplexMatrix reconstruct(int which) const;  // which: 1 or 2
};

BlockDecomposition decompose_observable_pair(const ObservablePair& p);

// Record of the reduction of an arbitrary two-qubit state to an ordered
// Bell-diagonal one by operations that can only help the eavesdropper:
// sigma_y x sigma_y averaging, a y-axis product rotation chosen to make the
// Bell-sector off-diagonals purely imaginary, conjugation averaging, and
// discrete sector relabels.
struct ReductionTrace {
  DensityMatrix input;
  DensityMatrix rho_bar;       // after sigma_y x sigma_y averaging
  double alpha = 0.0, beta = 0.0;
  DensityMatrix rho_diag;      // after rotation + conjugation averaging
  BellDiagonalState final_state;
  std::array<int, 4> permutation{};  // final slot i took input Bell slot permutation[i]
};

ReductionTrace symmetrize_to_belldiag(const DensityMatrix& rho);

// One failed check: parameters as a JSON snippet, the measured value, the
// bound it broke, and the (negative) margin.
struct CheckRow {
  std::string check;
  std::string param_json;
  double value = 0.0;
  double bound = 0.0;
  double margin = 0.0;
};

struct Report {
  std::string suite;
  std::uint64_t samples = 0;
  double worst_margin = 0.0;  // min over samples of bound - value
  std::vector<CheckRow> failures;

  bool ok() const { return failures.empty(); }
  // CSV with header check,param_json,value,bound,margin (failures only).
  void write_csv(std::ostream& os) const;
};

// Uniform sample from the 3-simplex (4 exponential variates, normalized),
// then sector relabels to enforce lambda0 >= lambda1, lambda2 >= lambda3.
BellDiagonalState sample_ordered_simplex(CounterRng& rng);

// F(lambda) = H(lambda) - h(lambda0 + lambda2) <= h((1+sqrt(2R^2-1))/2) where
// R^2 = (lambda0-lambda1)^2 + (lambda2-lambda3)^2, whenever R^2 > 1/2 (else
// F <= 1). Also checks equality on the two-branch family and a strict margin
// at interior points. Slack 1e-9.
Report lemma5_inequality_sweep(std::size_t samples, std::uint64_t seed,
                               Exec exec = Exec::parallel);

// chi_lambda(phi) <= F(S_lambda) + 1e-9 over sampled ordered weights and a phi
// grid, plus the mixture-level chain sum_p chi <= sum_p F(S) <= F(sum_p S) on
// random mixtures of up to 5 branches.
Report theorem1_sweep(std::size_t samples, std::size_t phi_grid, std::uint64_t seed,
                      Exec exec = Exec::parallel);

// Construct dim-8 observable pairs from known 2-dim blocks conjugated by a
// random unitary, decompose, and check recovery (reconstruction residual and
// projector algebra within 1e-10).
Report blocks_roundtrip_sweep(std::size_t samples, std::uint64_t seed,
                              Exec exec = Exec::parallel);

// Random two-qubit states through symmetrize_to_belldiag; checks Bell-basis
// off-diagonals <= 1e-10, state validity at every stage, ordering, and that
// the two averaging steps preserve Bell-basis diagonals within 1e-12.
Report reduction_sweep(std::size_t samples, std::uint64_t seed, Exec exec = Exec::parallel);

// d/d delta of F along the Lemma-5 parameterization at the stationary point
// delta* = (R^2/4)(cos^2 theta - sin^2 theta).
struct DeltaStarReport {
  double r = 0.0, theta = 0.0;
  double delta_star = 0.0;
  double f_at_star = 0.0;
  bool derivative_checked = false;  // false at a degenerate (width-0) domain
  double derivative = 0.0;          // central difference
  double second_difference = 0.0;
};

DeltaStarReport delta_star_maximality_check(double r, double theta);

}  // namespace diqkd::verify
