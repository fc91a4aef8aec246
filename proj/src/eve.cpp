#include "diqkd/eve.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace diqkd::eve {

using qmath::binary_entropy;
using qmath::Complex;
using qmath::ComplexMatrix;
using qmath::ProbabilityVector;
using qmath::shannon_entropy;

EveView::EveView(BellDiagonalState l, double phi_in) : lambda(std::move(l)), phi(phi_in) {
  if (!(phi >= 0.0 && phi <= 3.14159265358979323846 + 1e-12))
    throw std::domain_error("EveView: phi outside [0, pi]");
  if (!lambda.is_ordered()) throw std::domain_error("EveView: weights must be sector-ordered");
}

ConditionalSpectrum eve_conditional_spectrum(const EveView& v) {
  const double g1 = v.lambda.lambda[0] - v.lambda.lambda[1];
  const double g2 = v.lambda.lambda[2] - v.lambda.lambda[3];
  double rad = g1 * g1 + g2 * g2 + 2.0 * std::cos(2.0 * v.phi) * g1 * g2;
  rad = std::clamp(rad, 0.0, 1.0);
  const double root = std::sqrt(rad);
  return {0.5 * (1.0 + root), 0.5 * (1.0 - root)};
}

double chi_lambda(const EveView& v) {
  const ConditionalSpectrum cs = eve_conditional_spectrum(v);
  const double h_mix = shannon_entropy(v.lambda.lambda);
  const double chi = h_mix - binary_entropy(cs.lambda_plus);
  // Holevo quantity; tiny negatives are round-off only.
  return std::max(chi, 0.0);
}

PhiScan optimal_phi_check(const BellDiagonalState& lambda, std::size_t grid) {
  if (grid == 0) throw std::domain_error("optimal_phi_check: empty grid");
  const double pi = 4.0 * std::atan(1.0);
  PhiScan best;
  best.phi_star = 0.0;
  best.chi_star = chi_lambda(EveView(lambda, 0.0));
  for (std::size_t i = 1; i <= grid; ++i) {
    const double phi = pi * static_cast<double>(i) / static_cast<double>(grid);
    const double c = chi_lambda(EveView(lambda, phi));
    if (c > best.chi_star + 1e-15) {
      best.chi_star = c;
      best.phi_star = phi;
    }
  }
  return best;
}

namespace {

BellDiagonalState attack_lambda(double c) {
  return BellDiagonalState(
      ProbabilityVector({(1.0 + c) / 2.0, 0.0, (1.0 - c) / 2.0, 0.0}));
}

}  // namespace

AttackSpec build_attack(double s_target, double q_target) {
  if (!(s_target > 2.0))
    throw std::domain_error("build_attack: S must exceed the local bound 2");
  if (s_target > chsh::tsirelson_bound + 1e-9)
    throw std::domain_error("build_attack: S exceeds the Tsirelson bound");
  if (q_target < 0.0 || q_target > 0.5)
    throw std::domain_error("build_attack: Q outside [0, 1/2]");

  const double half = std::min(s_target, chsh::tsirelson_bound) / 2.0;
  const double c = std::sqrt(std::min(std::max(half * half - 1.0, 0.0), 1.0));

  BellDiagonalState lambda = attack_lambda(c);
  DensityMatrix state = lambda.to_density_matrix();
  const double tilt = std::atan(c);
  const double pi = 4.0 * std::atan(1.0);
  MeasurementSet m = MeasurementSet::from_angles(0.0, tilt, -tilt, 0.0, pi / 2.0);

  AttackSpec spec{s_target, c, q_target, std::move(lambda), std::move(state), m,
                  1.0 - 2.0 * q_target, 2.0 * q_target};
  return spec;
}

double concurrence_belldiag(const BellDiagonalState& s) {
  const double m = std::max(std::max(s.lambda[0], s.lambda[1]),
                            std::max(s.lambda[2], s.lambda[3]));
  return std::max(0.0, 2.0 * m - 1.0);
}

std::string AttackSpec::to_key_value() const {
  std::ostringstream os;
  char buf[64];
  auto put = [&](const char* key, double v) {
    std::snprintf(buf, sizeof(buf), "%.15g", v);
    os << key << '=' << buf << '\n';
  };
  put("S", s_target);
  put("C", concurrence);
  put("Q", q_target);
  put("lambda_phi_plus", lambda.lambda[0]);
  put("lambda_psi_minus", lambda.lambda[1]);
  put("lambda_phi_minus", lambda.lambda[2]);
  put("lambda_psi_plus", lambda.lambda[3]);
  put("a0_phi", measurements.a0.phi);
  put("a1_phi", measurements.a1.phi);
  put("a2_phi", measurements.a2.phi);
  put("b1_phi", measurements.b1.phi);
  put("b2_phi", measurements.b2.phi);
  put("a0_prob_sigma_z", a0_prob_sigma_z);
  put("a0_prob_random", a0_prob_random);
  return os.str();
}

}  // namespace diqkd::eve
