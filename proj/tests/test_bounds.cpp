#include <doctest.h>

#include <cmath>
#include <cstring>
#include <sstream>

#include "diqkd/bounds.hpp"
#include "diqkd/chsh.hpp"
#include "diqkd/qmath.hpp"

using namespace diqkd;
using bounds::Scenario;
using bounds::SweepVariable;

namespace {

double werner_s(double q) { return chsh::tsirelson_bound * (1.0 - 2.0 * q); }

}  // namespace

TEST_CASE("holevo bound endpoints and frozen values") {
  CHECK(std::abs(bounds::holevo_bound_di(chsh::tsirelson_bound)) <= 1e-12);
  CHECK(bounds::holevo_bound_di(2.0) == 1.0);
  CHECK(bounds::holevo_bound_di(1.2) == 1.0);  // trivial below the local bound
  CHECK(bounds::holevo_bound_di(0.0) == 1.0);
  CHECK(bounds::holevo_bound_di(2.2) == doctest::Approx(0.84271199928653321).epsilon(1e-14));
  CHECK(bounds::holevo_bound_di(2.4) == doctest::Approx(0.65388756420546128).epsilon(1e-14));
  CHECK(bounds::holevo_bound_di(2.5) == doctest::Approx(0.54356444319959641).epsilon(1e-14));
  CHECK(bounds::holevo_bound_di(2.6) == doctest::Approx(0.41842006909911876).epsilon(1e-14));
  // slack just above the quantum maximum clamps; beyond it is an error
  CHECK(bounds::holevo_bound_di(chsh::tsirelson_bound + 0.9e-9) ==
        doctest::Approx(0.0).epsilon(1e-12));
  CHECK_THROWS_AS(bounds::holevo_bound_di(chsh::tsirelson_bound + 1e-6), std::domain_error);
  CHECK_THROWS_AS(bounds::holevo_bound_di(std::nan("")), std::domain_error);
}

TEST_CASE("holevo bound is nonincreasing and concave in S") {
  const int n = 400;
  double prev = 1.0 + 1e-15;
  for (int i = 0; i <= n; ++i) {
    const double s = 2.0 + (chsh::tsirelson_bound - 2.0) * i / n;
    const double f = bounds::holevo_bound_di(s);
    CHECK(f <= prev + 1e-12);
    prev = f;
  }
  for (int i = 1; i < n; ++i) {
    const double s0 = 2.0 + (chsh::tsirelson_bound - 2.0) * (i - 1) / n;
    const double s1 = 2.0 + (chsh::tsirelson_bound - 2.0) * i / n;
    const double s2 = 2.0 + (chsh::tsirelson_bound - 2.0) * (i + 1) / n;
    const double mid = bounds::holevo_bound_di(s1);
    const double avg =
        0.5 * (bounds::holevo_bound_di(s0) + bounds::holevo_bound_di(s2));
    CHECK(mid >= avg - 1e-12);
  }
}

TEST_CASE("characterized-device bound") {
  // on the isotropic line Q + S/(2 sqrt 2) = 1 - Q, so the bound is h(Q)
  for (double q : {0.0, 0.02, 0.071, 0.11, 0.2}) {
    CHECK(bounds::holevo_bound_standard(q, werner_s(q)) ==
          doctest::Approx(qmath::binary_entropy(q)).epsilon(1e-13));
  }
  CHECK_THROWS_AS(bounds::holevo_bound_standard(0.6, 2.0), std::domain_error);
  CHECK_THROWS_AS(bounds::holevo_bound_standard(-0.01, 2.0), std::domain_error);
  CHECK_THROWS_AS(bounds::holevo_bound_standard(0.1, 2.9), std::domain_error);
  CHECK_THROWS_AS(bounds::holevo_bound_standard(0.5, chsh::tsirelson_bound),
                  std::domain_error);  // argument above 1
}

TEST_CASE("keyrate reports") {
  const bounds::RateReport di = bounds::keyrate(0.05, 2.5455844122715711,
                                                Scenario::device_independent);
  CHECK(di.chi_bound == doctest::Approx(0.48865255288437767).epsilon(1e-13));
  CHECK(di.r_dw == doctest::Approx(0.2249504899996662).epsilon(1e-12));
  CHECK(di.i_ab - di.chi_bound == doctest::Approx(di.r_dw).epsilon(1e-15));

  const bounds::RateReport w = bounds::keyrate(0.02, werner_s(0.02),
                                               Scenario::device_independent);
  CHECK(w.r_dw == doctest::Approx(0.61229070224875295).epsilon(1e-12));

  const bounds::RateReport std_r = bounds::keyrate(0.071, werner_s(0.071),
                                                   Scenario::standard_qkd);
  CHECK(std_r.r_dw == doctest::Approx(0.26071115474445986).epsilon(1e-12));

  // a losing rate is reported as-is, not clamped
  const bounds::RateReport bad = bounds::keyrate(0.1, 2.2, Scenario::device_independent);
  CHECK(bad.r_dw < 0.0);
  CHECK(std::isfinite(bad.r_dw));

  CHECK_THROWS_AS(bounds::keyrate(-0.01, 2.5, Scenario::device_independent),
                  std::domain_error);
  CHECK_THROWS_AS(bounds::keyrate(0.51, 2.5, Scenario::device_independent),
                  std::domain_error);
  CHECK_NOTHROW(bounds::keyrate(0.5 + 1e-13, 2.0, Scenario::device_independent));
}

TEST_CASE("report rendering") {
  bounds::RateReport r = bounds::keyrate(0.05, 2.5, Scenario::device_independent);
  std::string text = r.to_text();
  CHECK(text.find("scenario=device_independent") != std::string::npos);
  CHECK(text.find("r_DW=") != std::string::npos);
  CHECK(text.find("estimated=0") != std::string::npos);

  r.estimated = true;
  r.n_rounds = 100000;
  r.q_stderr = 0.001;
  r.s_stderr = 0.01;
  r.seed = 42;
  text = r.to_text();
  CHECK(text.find("estimated=1") != std::string::npos);
  CHECK(text.find("n=100000") != std::string::npos);
  CHECK(text.find("se_Q=0.001") != std::string::npos);
  CHECK(text.find("seed=42") != std::string::npos);

  const bounds::RateReport eff = bounds::detection_efficiency_rate(0.95);
  CHECK(eff.to_text().find("eta=0.95") != std::string::npos);
}

TEST_CASE("qber thresholds on the isotropic line") {
  const double q_di = bounds::qber_threshold(Scenario::device_independent, werner_s);
  CHECK(std::abs(q_di - 0.0714917588444857) <= 2e-6);
  const double q_std = bounds::qber_threshold(Scenario::standard_qkd, werner_s);
  CHECK(std::abs(q_std - 0.11002786443835955) <= 2e-6);
  // the untrusted-device threshold is strictly the smaller one
  CHECK(q_di < q_std);
  CHECK_THROWS_AS(bounds::qber_threshold(Scenario::device_independent,
                                         [](double) { return 2.0; }),
                  std::domain_error);
}

TEST_CASE("detection efficiency model") {
  const bounds::RateReport r = bounds::detection_efficiency_rate(0.95);
  CHECK(r.q == doctest::Approx(0.0475).epsilon(1e-15));
  CHECK(r.s == doctest::Approx(2.5576554800834366).epsilon(1e-14));
  CHECK(r.r_dw == doctest::Approx(0.25077567013171056).epsilon(1e-12));
  CHECK(r.eta == 0.95);

  const bounds::RateReport perfect = bounds::detection_efficiency_rate(1.0);
  CHECK(perfect.q == 0.0);
  CHECK(perfect.r_dw == doctest::Approx(1.0).epsilon(1e-12));

  const double eta_star = bounds::bisect_root(
      [](double e) { return bounds::detection_efficiency_rate(e).r_dw; }, 0.85, 1.0);
  CHECK(std::abs(eta_star - 0.92313676603498032) <= 2e-6);

  CHECK_THROWS_AS(bounds::detection_efficiency_rate(1.2), std::domain_error);
  CHECK_THROWS_AS(bounds::detection_efficiency_rate(-0.1), std::domain_error);
}

TEST_CASE("partial knowledge bound") {
  for (double s : {2.1, 2.5, 2.7}) {
    CHECK(bounds::partial_knowledge_bound(0.0, s) ==
          doctest::Approx(bounds::holevo_bound_di(s)).epsilon(1e-15));
  }
  CHECK(bounds::partial_knowledge_bound(0.1, 2.6) ==
        doctest::Approx(0.64577428964344706).epsilon(1e-13));
  // fully compromised fraction soaks up all the violation: S' = 2 exactly
  const double q_edge = std::sqrt(2.0) - 1.0;
  CHECK(std::abs(bounds::partial_knowledge_bound(q_edge, chsh::tsirelson_bound) - 1.0) <= 1e-9);
  // a larger known fraction would need S' above the quantum maximum
  CHECK_THROWS_AS(bounds::partial_knowledge_bound(0.4, 4.0), std::domain_error);
  CHECK_THROWS_AS(bounds::partial_knowledge_bound(1.0, 2.5), std::domain_error);
  CHECK_THROWS_AS(bounds::partial_knowledge_bound(-0.1, 2.5), std::domain_error);
  CHECK_THROWS_AS(bounds::partial_knowledge_bound(0.0, 4.1), std::domain_error);

  const bounds::RateReport r = bounds::keyrate(0.1, 2.6, Scenario::partial_knowledge, 0.1);
  CHECK(r.q_known == 0.1);
  CHECK(r.chi_bound == doctest::Approx(bounds::partial_knowledge_bound(0.1, 2.6)));
}

TEST_CASE("untrusted devices never beat characterized ones") {
  for (int i = 0; i <= 50; ++i) {
    const double q = 0.11 * i / 50.0;
    const double s = werner_s(q);
    const double r_di = bounds::keyrate(q, s, Scenario::device_independent).r_dw;
    const double r_std = bounds::keyrate(q, s, Scenario::standard_qkd).r_dw;
    CHECK(r_di <= r_std + 1e-12);
  }
}

TEST_CASE("curve tabulation") {
  const auto rows = bounds::curve(Scenario::device_independent,
                                  SweepVariable::qber_werner_line, 0.0, 0.12, 60);
  REQUIRE(rows.size() == 61);
  CHECK(rows.front().x == 0.0);
  CHECK(rows.back().x == doctest::Approx(0.12).epsilon(1e-15));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const bounds::RateReport r =
        bounds::keyrate(rows[i].q, rows[i].s, Scenario::device_independent);
    CHECK(rows[i].chi == r.chi_bound);
    CHECK(rows[i].rate == r.r_dw);
    if (i > 0) CHECK(rows[i].x > rows[i - 1].x);
  }

  const auto serial = bounds::curve(Scenario::device_independent,
                                    SweepVariable::qber_werner_line, 0.0, 0.12, 60, 0.0,
                                    Exec::serial);
  REQUIRE(serial.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(std::memcmp(&serial[i], &rows[i], sizeof rows[i]) == 0);
  }

  CHECK(bounds::curve(Scenario::device_independent, SweepVariable::qber_werner_line, 0.05,
                      0.05, 60)
            .size() == 1);
  CHECK(bounds::curve(Scenario::device_independent, SweepVariable::qber_werner_line, 0.0,
                      0.1, 0)
            .size() == 1);
  CHECK_THROWS_AS(bounds::curve(Scenario::device_independent,
                                SweepVariable::qber_werner_line, 0.2, 0.1, 10),
                  std::domain_error);

  const auto eff = bounds::curve(Scenario::detection_efficiency, SweepVariable::efficiency,
                                 0.9, 1.0, 20);
  REQUIRE(eff.size() == 21);
  CHECK(eff.back().rate == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(eff.front().rate < 0.0);
}

TEST_CASE("curve csv") {
  const auto rows = bounds::curve(Scenario::device_independent,
                                  SweepVariable::qber_werner_line, 0.0, 0.1, 4);
  std::ostringstream os;
  bounds::write_curve_csv(os, rows);
  const std::string text = os.str();
  CHECK(text.rfind("x,Q,S,chi,rate\n", 0) == 0);
  std::size_t lines = 0;
  for (char c : text)
    if (c == '\n') ++lines;
  CHECK(lines == rows.size() + 1);
  CHECK(text.find("0.025,0.025,") != std::string::npos);
}

TEST_CASE("curve zero crossings") {
  const double q_star = bounds::curve_zero_crossing(
      Scenario::device_independent, SweepVariable::qber_werner_line, 0.0, 0.12);
  CHECK(std::abs(q_star - 0.0714917588444857) <= 2e-6);
  const double eta_star = bounds::curve_zero_crossing(
      Scenario::detection_efficiency, SweepVariable::efficiency, 0.9, 1.0);
  CHECK(std::abs(eta_star - 0.92313676603498032) <= 2e-6);
  CHECK_THROWS_AS(bounds::curve_zero_crossing(Scenario::device_independent,
                                              SweepVariable::qber_werner_line, 0.0, 0.02),
                  std::domain_error);
}
