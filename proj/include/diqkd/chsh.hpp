#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "diqkd/qmath.hpp"

namespace diqkd::chsh {

using qmath::Complex;
using qmath::ComplexMatrix;
using qmath::DensityMatrix;

inline const double tsirelson_bound = 2.0 * std::sqrt(2.0);

// Binary observable in the x-z plane of the Bloch sphere:
// cos(phi) sigma_z + sin(phi) sigma_x. Squares to the identity for any phi.
struct XZMeasurement {
  double phi = 0.0;
  ComplexMatrix observable() const;
  // Projector onto the outcome subspace, outcome in {+1, -1}.
  ComplexMatrix projector(int outcome) const;
};

// The five measurements of the protocol: Alice's key setting A0 plus the CHSH
// settings A1, A2 and Bob's B1 (also the key partner) and B2.
struct MeasurementSet {
  XZMeasurement a0, a1, a2, b1, b2;

  static MeasurementSet from_angles(double a0_phi, double a1_phi, double a2_phi,
                                    double b1_phi, double b2_phi);
  // A0 = B1 = sigma_z, B2 = sigma_x, A1/A2 = (sigma_z +- sigma_x)/sqrt(2):
  // the settings that reach the Tsirelson bound on a singlet-class state.
  static MeasurementSet protocol_ideal();
};

// Mixture of the four Bell projectors. Weight order is global across the
// library: {Phi+, Psi-, Phi-, Psi+} (the sigma_y x sigma_y -1,-1,+1,+1 sectors).
struct BellDiagonalState {
  qmath::ProbabilityVector lambda;

  explicit BellDiagonalState(qmath::ProbabilityVector l);
  // Sector ordering lambda[0] >= lambda[1] and lambda[2] >= lambda[3].
  bool is_ordered(double tol = 1e-12) const;
  DensityMatrix to_density_matrix() const;
};

inline constexpr std::array<const char*, 4> kBellOrderNames{"phi+", "psi-", "phi-", "psi+"};

// Unitary whose columns are the Bell states in the global order.
const ComplexMatrix& bell_basis();

std::vector<Complex> phi_plus();
DensityMatrix werner_state(double p);

// Joint outcome distribution over the protocol's setting pairs:
// X in {0,1,2}, Y in {1,2}; the pair (0,2) is unused and marked uncovered.
// Outcomes are +-1 (index 0 <-> +1). `count` is the number of samples behind a
// pair's frequencies; 0 means the entries are exact Born probabilities.
class CorrelationTable {
 public:
  CorrelationTable();

  static constexpr std::size_t kNumX = 3, kNumY = 2;

  double& p(int x, int y, int a, int b);
  double p(int x, int y, int a, int b) const;
  std::uint64_t& count(int x, int y);
  std::uint64_t count(int x, int y) const;
  bool& covered(int x, int y);
  bool covered(int x, int y) const;

  // Per covered pair, outcome probabilities must sum to 1 within tol.
  void validate(double tol = 1e-9) const;

  double correlator(int x, int y) const;  // <a b> for one setting pair
  double marginal_a(int x) const;         // count-weighted over covered Y
  double marginal_b(int y) const;

  // CSV with header X,Y,a,b,p,count; probabilities with 15 significant digits.
  void write_csv(std::ostream& os) const;
  std::string to_csv() const;

 private:
  static std::size_t idx(int x, int y, int a, int b);
  std::array<double, kNumX * kNumY * 4> p_{};
  std::array<std::uint64_t, kNumX * kNumY> count_{};
  std::array<bool, kNumX * kNumY> covered_{};
};

// Derived statistics of a table: QBER from the key pair (0,1), the CHSH value
// from pairs (1,1),(1,2),(2,1),(2,2), and raw marginal biases. Symmetrization
// policy is left to callers; nothing is re-balanced here.
struct TableStatistics {
  double qber = 0.0;
  double chsh = 0.0;
  std::array<double, 3> bias_a{};  // <a_X>
  std::array<double, 2> bias_b{};  // <b_Y>
};

double correlator(const DensityMatrix& rho, const ComplexMatrix& a, const ComplexMatrix& b);
double correlator(const DensityMatrix& rho, const XZMeasurement& a, const XZMeasurement& b);

// S = <a1 b1> + <a1 b2> + <a2 b1> - <a2 b2>
double chsh_value(const DensityMatrix& rho, const ComplexMatrix& a1, const ComplexMatrix& a2,
                  const ComplexMatrix& b1, const ComplexMatrix& b2);
double chsh_value(const DensityMatrix& rho, const MeasurementSet& m);

// Largest CHSH value over all measurement choices: 2 sqrt(tau1 + tau2) with
// tau1, tau2 the two largest eigenvalues of T^t T.  The returned axes achieve
// it: Alice along the normalized images under T of the two principal
// directions, Bob along their cos/sin mixtures with tan(theta) =
// sqrt(tau2/tau1).
struct ChshMax {
  double s_max = 0.0;
  double tau1 = 0.0, tau2 = 0.0;
  std::array<double, 3> bob_axis1{}, bob_axis2{};
  std::array<double, 3> alice_axis1{}, alice_axis2{};
};

ChshMax chsh_max_horodecki(const DensityMatrix& rho);

// Closed form of the same maximum for an ordered Bell-diagonal state:
// 2 sqrt(2) * sqrt(max of the two sector branch sums). Requires ordering.
double chsh_max_belldiag(const BellDiagonalState& s);

// Observable with Bloch direction n (unit vector, x/y/z components).
ComplexMatrix bloch_observable(const std::array<double, 3>& n);

CorrelationTable table_from_state(const DensityMatrix& rho, const MeasurementSet& m);
TableStatistics table_statistics(const CorrelationTable& t);

// Local deterministic model reaching the BB84 correlations with Eve holding a
// perfect copy: a separable two-ququart state plus its purifying register.
struct Bb84Counterexample {
  DensityMatrix rho_abe;                    // C4 x C4 x C4
  std::array<ComplexMatrix, 2> alice;       // setting 0: sigma_z x I, setting 1: I x sigma_z
  std::array<ComplexMatrix, 2> bob;
  CorrelationTable table;                   // Alice settings at X=0,1; Bob's at Y=1,2
};

Bb84Counterexample bb84_counterexample();

// Max |S| over the CHSH facets (all positions of the minus sign) for a table
// with two settings per side stored at X in {0,1}, Y in {1,2}.
double max_chsh_over_assignments(const CorrelationTable& t);

// H(output | Eve register, setting) in bits, for Alice's or Bob's output.
double bb84_eve_conditional_entropy(const Bb84Counterexample& c, bool alice_side, int setting);

}  // namespace diqkd::chsh
