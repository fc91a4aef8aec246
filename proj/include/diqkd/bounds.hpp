#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "diqkd/parallel.hpp"

namespace diqkd::bounds {

enum class Scenario { device_independent, standard_qkd, detection_efficiency, partial_knowledge };

const char* scenario_name(Scenario s);

// One evaluated rate point. r_dw = i_ab - chi_bound always holds (1e-12);
// the estimated flag distinguishes exact Born-rule inputs from protocol
// estimates (n > 0, standard errors filled, seed recorded).
struct RateReport {
  Scenario scenario = Scenario::device_independent;
  double q = 0.0;
  double s = 0.0;
  double i_ab = 0.0;
  double chi_bound = 0.0;
  double r_dw = 0.0;
  double eta = 1.0;      // detection_efficiency only
  double q_known = 0.0;  // partial_knowledge only

  bool estimated = false;
  std::uint64_t n_rounds = 0;
  double q_stderr = 0.0;
  double s_stderr = 0.0;
  std::uint64_t seed = 0;

  std::string to_text() const;  // key=value lines
};

// Holevo bound chi(B1:E) <= h((1 + sqrt((S/2)^2 - 1))/2) for S in [2, 2sqrt2].
// Below S = 2 the bound is trivial (1); S in (2sqrt2, 2sqrt2 + 1e-9] clamps to
// the Tsirelson point; anything larger is a domain error.
double holevo_bound_di(double s);

// Entanglement-based bound with characterized qubit devices:
// chi <= h(Q + S / (2 sqrt 2)).
double holevo_bound_standard(double q, double s);

RateReport keyrate(double q, double s, Scenario scenario, double scenario_param = 0.0);

// QBER where the key rate crosses zero, for a scenario and a relation S(Q).
// Bisection on [0, 1/2] to 1e-6; requires r(0) > 0 and r(1/2) <= 0.
double qber_threshold(Scenario scenario, const std::function<double(double)>& s_of_q);

// Photon loss mapped to outcomes: no-click recorded as -1 on each side
// independently, giving Q = eta(1 - eta) and S = 2 sqrt 2 eta^2 + 2 (1-eta)^2.
RateReport detection_efficiency_rate(double eta);

// Eve knows a fraction q of the devices' rounds perfectly; the observed CHSH
// value decomposes as S = 4q + (1-q) S'. Returns the effective Holevo bound
// q + (1-q) F(S'), capped at 1 when S' <= 2 (no security). S' beyond the
// Tsirelson bound (+1e-9) means inconsistent inputs: domain error.
double partial_knowledge_bound(double q_known, double s_observed);

// Generic bisection for a monotone sign change of fn on [lo, hi], tol 1e-6.
double bisect_root(const std::function<double(double)>& fn, double lo, double hi);

enum class SweepVariable { qber_werner_line, efficiency };

struct CurvePoint {
  double x = 0.0, q = 0.0, s = 0.0, chi = 0.0, rate = 0.0;
};

// Tabulate rate curves: steps+1 inclusive rows (a single row when the range
// is degenerate), computed in deterministic order. For qber_werner_line the
// state follows S = 2 sqrt 2 (1 - 2Q); for efficiency, x is eta.
std::vector<CurvePoint> curve(Scenario scenario, SweepVariable var, double lo, double hi,
                              std::size_t steps, double scenario_param = 0.0,
                              Exec exec = Exec::parallel);

// CSV with header x,Q,S,chi,rate; 12 significant digits per value.
void write_curve_csv(std::ostream& os, const std::vector<CurvePoint>& rows);

// x of the sign change of `rate` between consecutive rows, refined by
// bisection on the underlying curve definition; nullopt semantics via NaN.
double curve_zero_crossing(Scenario scenario, SweepVariable var, double lo, double hi,
                           double scenario_param = 0.0);

}  // namespace diqkd::bounds
