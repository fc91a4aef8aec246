#pragma once

#include <cstddef>
#include <string>

#include "diqkd/chsh.hpp"
#include "diqkd/qmath.hpp"

namespace diqkd::eve {

using chsh::BellDiagonalState;
using chsh::MeasurementSet;
using qmath::DensityMatrix;

// Eve's side of one Bell-diagonal branch: the branch weights plus the angle
// phi of Bob's key measurement relative to the z axis (phi in [0, pi]).
struct EveView {
  BellDiagonalState lambda;
  double phi = 0.0;

  EveView(BellDiagonalState l, double phi_in);
};

// Eigenvalues of Eve's state conditioned on Bob's key outcome. Both outcomes
// give the same pair {Lambda+, Lambda-}; the conditional states have rank 2.
struct ConditionalSpectrum {
  double lambda_plus = 0.0;
  double lambda_minus = 0.0;
};

ConditionalSpectrum eve_conditional_spectrum(const EveView& v);

// Holevo quantity chi(B1:E) = H(lambda) - h(Lambda+) for one branch.
double chi_lambda(const EveView& v);

// Grid scan of chi over phi in [0, pi]; ties report the smallest phi. For
// sector-ordered weights the maximizer is phi = 0.
struct PhiScan {
  double phi_star = 0.0;
  double chi_star = 0.0;
};

PhiScan optimal_phi_check(const BellDiagonalState& lambda, std::size_t grid);

// The attack saturating the key-rate bound at CHSH value S: a two-branch
// Bell-diagonal state with weights (1+-C)/2 on Phi+/Phi-, measurements
// B1 = sigma_z, B2 = sigma_x, A1/A2 tilted by +-atan(C), and the key setting
// A0 = sigma_z degraded by a classical channel that outputs a fresh random
// bit with probability 2 Q.
struct AttackSpec {
  double s_target = 0.0;
  double concurrence = 0.0;
  double q_target = 0.0;
  BellDiagonalState lambda;
  DensityMatrix state;
  MeasurementSet measurements;
  double a0_prob_sigma_z = 1.0;
  double a0_prob_random = 0.0;

  std::string to_key_value() const;
};

AttackSpec build_attack(double s_target, double q_target = 0.0);

// Concurrence of a Bell-diagonal state: max(0, 2 max(lambda) - 1).
double concurrence_belldiag(const BellDiagonalState& s);

}  // namespace diqkd::eve
