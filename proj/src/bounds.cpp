#include "diqkd/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "diqkd/chsh.hpp"
#include "diqkd/qmath.hpp"

namespace diqkd::bounds {

using qmath::binary_entropy;

const char* scenario_name(Scenario s) {
  switch (s) {
    case Scenario::device_independent: return "device_independent";
    case Scenario::standard_qkd: return "standard_qkd";
    case Scenario::detection_efficiency: return "detection_efficiency";
    case Scenario::partial_knowledge: return "partial_knowledge";
  }
  return "unknown";
}

double holevo_bound_di(double s) {
  if (!std::isfinite(s)) throw std::domain_error("holevo_bound_di: S not finite");
  if (s > chsh::tsirelson_bound + 1e-9)
    throw std::domain_error("holevo_bound_di: S exceeds the Tsirelson bound");
  if (s < 2.0) return 1.0;
  const double half = std::min(s, chsh::tsirelson_bound) / 2.0;
  const double rad = std::max(half * half - 1.0, 0.0);
  return binary_entropy((1.0 + std::sqrt(std::min(rad, 1.0))) / 2.0);
}

double holevo_bound_standard(double q, double s) {
  if (q < -1e-12 || q > 0.5 + 1e-12) throw std::domain_error("holevo_bound_standard: bad Q");
  if (s < -1e-12 || s > chsh::tsirelson_bound + 1e-9)
    throw std::domain_error("holevo_bound_standard: bad S");
  const double arg = q + s / chsh::tsirelson_bound;
  if (arg < -1e-12 || arg > 1.0 + 1e-12)
    throw std::domain_error("holevo_bound_standard: Q + S/(2 sqrt 2) outside [0,1]");
  return binary_entropy(std::clamp(arg, 0.0, 1.0));
}

double partial_knowledge_bound(double q_known, double s_observed) {
  if (q_known < 0.0 || q_known >= 1.0)
    throw std::domain_error("partial_knowledge_bound: q must lie in [0,1)");
  if (s_observed > 4.0 + 1e-12)
    throw std::domain_error("partial_knowledge_bound: S exceeds the algebraic maximum 4");
  const double s_prime = (s_observed - 4.0 * q_known) / (1.0 - q_known);
  if (s_prime > chsh::tsirelson_bound + 1e-9)
    throw std::domain_error(
        "partial_knowledge_bound: inferred S' exceeds the Tsirelson bound (inconsistent q, S)");
  if (s_prime <= 2.0) return 1.0;
  return q_known + (1.0 - q_known) * holevo_bound_di(s_prime);
}

RateReport keyrate(double q, double s, Scenario scenario, double scenario_param) {
  if (q < -1e-12 || q > 0.5 + 1e-12) throw std::domain_error("keyrate: Q outside [0, 1/2]");
  q = std::clamp(q, 0.0, 0.5);

  RateReport r;
  r.scenario = scenario;
  r.q = q;
  r.s = s;
  switch (scenario) {
    case Scenario::device_independent:
      r.chi_bound = holevo_bound_di(s);
      break;
    case Scenario::standard_qkd:
      r.chi_bound = holevo_bound_standard(q, s);
      break;
    case Scenario::detection_efficiency:
      r.eta = scenario_param;
      r.chi_bound = holevo_bound_di(s);
      break;
    case Scenario::partial_knowledge:
      r.q_known = scenario_param;
      r.chi_bound = partial_knowledge_bound(scenario_param, s);
      break;
  }
  r.i_ab = 1.0 - binary_entropy(q);
  r.r_dw = r.i_ab - r.chi_bound;
  return r;
}

double bisect_root(const std::function<double(double)>& fn, double lo, double hi) {
  double flo = fn(lo), fhi = fn(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0))
    throw std::domain_error("bisect_root: no sign change on the interval");
  while (hi - lo > 1e-6) {
    const double mid = 0.5 * (lo + hi);
    const double fm = fn(mid);
    if (fm == 0.0) return mid;
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double qber_threshold(Scenario scenario, const std::function<double(double)>& s_of_q) {
  auto rate = [&](double q) { return keyrate(q, s_of_q(q), scenario).r_dw; };
  const double r0 = rate(0.0);
  const double r_half = rate(0.5);
  if (!(r0 > 0.0)) throw std::domain_error("qber_threshold: rate at Q=0 is not positive");
  if (r_half > 0.0) throw std::domain_error("qber_threshold: rate at Q=1/2 is positive");
  if (r_half == 0.0) return 0.5;
  return bisect_root(rate, 0.0, 0.5);
}

RateReport detection_efficiency_rate(double eta) {
  if (eta < 0.0 || eta > 1.0) throw std::domain_error("detection_efficiency_rate: eta outside [0,1]");
  const double q = eta * (1.0 - eta);
  const double s = chsh::tsirelson_bound * eta * eta + 2.0 * (1.0 - eta) * (1.0 - eta);
  return keyrate(q, s, Scenario::detection_efficiency, eta);
}

namespace {

CurvePoint curve_point(Scenario scenario, SweepVariable var, double x, double scenario_param) {
  CurvePoint pt;
  pt.x = x;
  if (var == SweepVariable::efficiency) {
    const RateReport r = detection_efficiency_rate(x);
    pt.q = r.q;
    pt.s = r.s;
    pt.chi = r.chi_bound;
    pt.rate = r.r_dw;
    return pt;
  }
  const double q = x;
  const double s = chsh::tsirelson_bound * (1.0 - 2.0 * q);
  const RateReport r = keyrate(q, s, scenario, scenario_param);
  pt.q = q;
  pt.s = s;
  pt.chi = r.chi_bound;
  pt.rate = r.r_dw;
  return pt;
}

}  // namespace

std::vector<CurvePoint> curve(Scenario scenario, SweepVariable var, double lo, double hi,
                              std::size_t steps, double scenario_param, Exec exec) {
  if (!(hi >= lo)) throw std::domain_error("curve: empty range");
  const std::size_t n = (hi == lo || steps == 0) ? 1 : steps + 1;
  const double width = hi - lo;
  std::vector<CurvePoint> rows(n);
  for_each_index(n, exec, [&](std::size_t i) {
    const double x =
        (n == 1) ? lo : lo + width * static_cast<double>(i) / static_cast<double>(n - 1);
    rows[i] = curve_point(scenario, var, x, scenario_param);
  });
  return rows;
}

void write_curve_csv(std::ostream& os, const std::vector<CurvePoint>& rows) {
  os << "x,Q,S,chi,rate\n";
  char buf[160];
  for (const CurvePoint& r : rows) {
    std::snprintf(buf, sizeof(buf), "%.12g,%.12g,%.12g,%.12g,%.12g\n", r.x, r.q, r.s, r.chi,
                  r.rate);
    os << buf;
  }
}

double curve_zero_crossing(Scenario scenario, SweepVariable var, double lo, double hi,
                           double scenario_param) {
  auto rate = [&](double x) { return curve_point(scenario, var, x, scenario_param).rate; };
  return bisect_root(rate, lo, hi);
}

std::string RateReport::to_text() const {
  std::ostringstream os;
  char buf[64];
  auto put = [&](const char* key, double v) {
    std::snprintf(buf, sizeof(buf), "%.15g", v);
    os << key << '=' << buf << '\n';
  };
  os << "scenario=" << scenario_name(scenario) << '\n';
  put("Q", q);
  put("S", s);
  put("I_AB", i_ab);
  put("chi", chi_bound);
  put("r_DW", r_dw);
  if (scenario == Scenario::detection_efficiency) put("eta", eta);
  if (scenario == Scenario::partial_knowledge) put("q_known", q_known);
  if (estimated) {
    os << "estimated=1\n";
    os << "n=" << n_rounds << '\n';
    put("se_Q", q_stderr);
    put("se_S", s_stderr);
    os << "seed=" << seed << '\n';
  } else {
    os << "estimated=0\n";
  }
  return os.str();
}

}  // namespace diqkd::bounds
