#include "diqkd/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

#include "diqkd/rng.hpp"

namespace diqkd::protocol {

namespace {

struct SettingPair {
  int x, y;
};
constexpr std::array<SettingPair, 5> kPairs{{{0, 1}, {1, 1}, {1, 2}, {2, 1}, {2, 2}}};

std::array<double, 5> pair_fractions(const ProtocolConfig& cfg) {
  return {cfg.key_fraction, cfg.chsh_fractions[0], cfg.chsh_fractions[1], cfg.chsh_fractions[2],
          cfg.chsh_fractions[3]};
}

std::string pair_name(const SettingPair& p) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "(X=%d,Y=%d)", p.x, p.y);
  return buf;
}

// Outcome index: 0 (+1,+1), 1 (+1,-1), 2 (-1,+1), 3 (-1,-1).
int outcome_a(std::size_t j) { return j < 2 ? 1 : -1; }
int outcome_b(std::size_t j) { return (j & 1) == 0 ? 1 : -1; }

}  // namespace

void ProtocolConfig::validate() const {
  if (n_rounds == 0) throw std::domain_error("ProtocolConfig: n_rounds must be positive");
  if (eta < 0.0 || eta > 1.0) throw std::domain_error("ProtocolConfig: eta outside [0,1]");
  double sum = key_fraction;
  if (key_fraction < 0.0) throw std::domain_error("ProtocolConfig: negative fraction");
  for (double f : chsh_fractions) {
    if (f < 0.0) throw std::domain_error("ProtocolConfig: negative fraction");
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw std::domain_error("ProtocolConfig: fractions must sum to 1");
}

void RoundLog::write_csv(std::ostream& os) const {
  os << "round,X,Y,a_raw,b_raw,a,b,flip\n";
  char buf[64];
  for (std::size_t i = 0; i < rounds.size(); ++i) {
    const Round& r = rounds[i];
    std::snprintf(buf, sizeof(buf), "%zu,%d,%d,%d,%d,%d,%d,%d\n", i, int(r.x), int(r.y),
                  int(r.a_raw), int(r.b_raw), int(r.a), int(r.b), int(r.flip));
    os << buf;
  }
}

RunResult run_protocol(const DensityMatrix& source, const MeasurementSet& m,
                       const ProtocolConfig& cfg, double a0_random_prob, Exec exec) {
  cfg.validate();
  if (a0_random_prob < 0.0 || a0_random_prob > 1.0)
    throw std::domain_error("run_protocol: a0_random_prob outside [0,1]");
  if (source.dim() != 4) throw std::domain_error("run_protocol: source must be a two-qubit state");

  const CorrelationTable born = chsh::table_from_state(source, m);
  const std::array<double, 5> frac = pair_fractions(cfg);

  // Cumulative tables for the categorical draws.
  std::array<double, 5> pair_cum{};
  double acc = 0.0;
  for (std::size_t k = 0; k < 5; ++k) {
    acc += frac[k];
    pair_cum[k] = acc;
  }
  std::array<std::array<double, 4>, 5> out_cum{};
  for (std::size_t k = 0; k < 5; ++k) {
    double c = 0.0;
    for (std::size_t j = 0; j < 4; ++j) {
      c += born.p(kPairs[k].x, kPairs[k].y, outcome_a(j), outcome_b(j));
      out_cum[k][j] = c;
    }
  }

  RunResult res;
  res.log.rounds.resize(cfg.n_rounds);
  const double eta = cfg.eta;
  const bool symmetrize = cfg.symmetrize_marginals;

  for_each_index(cfg.n_rounds, exec, [&](std::size_t i) {
    CounterRng rng(cfg.seed, i);

    // Fixed draw order per round, every variate consumed unconditionally, so
    // paired runs with different eta / symmetrization share their streams.
    const double u_pair = rng.next_double();
    const double u_out = rng.next_double();
    const double u_subst = rng.next_double();
    const int coin = rng.next_below(2) == 0 ? 1 : -1;
    const bool det_a = rng.next_double() < eta;
    const bool det_b = rng.next_double() < eta;
    const std::uint8_t flip = static_cast<std::uint8_t>(rng.next_below(2));

    std::size_t k = 4;
    for (std::size_t c = 0; c < 5; ++c)
      if (u_pair < pair_cum[c]) {
        k = c;
        break;
      }
    std::size_t j = 3;
    for (std::size_t c = 0; c < 4; ++c)
      if (u_out < out_cum[k][c]) {
        j = c;
        break;
      }

    int a = outcome_a(j), b = outcome_b(j);
    if (kPairs[k].x == 0 && u_subst < a0_random_prob) a = coin;

    Round& r = res.log.rounds[i];
    r.x = static_cast<std::int8_t>(kPairs[k].x);
    r.y = static_cast<std::int8_t>(kPairs[k].y);
    r.a_raw = static_cast<std::int8_t>(det_a ? a : 0);
    r.b_raw = static_cast<std::int8_t>(det_b ? b : 0);
    int am = det_a ? a : -1;
    int bm = det_b ? b : -1;
    if (symmetrize && flip) {
      am = -am;
      bm = -bm;
    }
    r.a = static_cast<std::int8_t>(am);
    r.b = static_cast<std::int8_t>(bm);
    r.flip = flip;
  });

  std::array<std::array<std::uint64_t, 4>, 5> counts{};
  for (const Round& r : res.log.rounds) {
    std::size_t k = 0;
    while (r.x != kPairs[k].x || r.y != kPairs[k].y) ++k;
    counts[k][(r.a == 1 ? 0u : 2u) + (r.b == 1 ? 0u : 1u)] += 1;
  }

  for (std::size_t k = 0; k < 5; ++k) {
    const std::uint64_t n = counts[k][0] + counts[k][1] + counts[k][2] + counts[k][3];
    if (n == 0)
      throw std::domain_error("run_protocol: no rounds on setting pair " + pair_name(kPairs[k]));
    res.table.covered(kPairs[k].x, kPairs[k].y) = true;
    res.table.count(kPairs[k].x, kPairs[k].y) = n;
    for (std::size_t j = 0; j < 4; ++j)
      res.table.p(kPairs[k].x, kPairs[k].y, outcome_a(j), outcome_b(j)) =
          static_cast<double>(counts[k][j]) / static_cast<double>(n);
  }
  res.table.validate();

  const chsh::TableStatistics stats = chsh::table_statistics(res.table);
  const double q_hat = stats.qber;
  const double s_hat = stats.chsh;
  const auto n_of = [&](std::size_t k) {
    return static_cast<double>(res.table.count(kPairs[k].x, kPairs[k].y));
  };
  const double q_se = std::sqrt(std::max(q_hat * (1.0 - q_hat), 0.0) / n_of(0));
  double s_var = 0.0;
  for (std::size_t k = 1; k < 5; ++k) {
    const double e = res.table.correlator(kPairs[k].x, kPairs[k].y);
    s_var += std::max(1.0 - e * e, 0.0) / n_of(k);
  }
  const double s_se = std::sqrt(s_var);

  const double q_bound = std::min(q_hat, 1.0 - q_hat);
  const double s_bound = std::min(s_hat, chsh::tsirelson_bound);
  res.report = bounds::keyrate(q_bound, s_bound, bounds::Scenario::device_independent);
  res.report.q = q_hat;
  res.report.s = s_hat;
  res.report.estimated = true;
  res.report.n_rounds = cfg.n_rounds;
  res.report.q_stderr = q_se;
  res.report.s_stderr = s_se;
  res.report.seed = cfg.seed;
  return res;
}

SymmetrizationCheck symmetrization_effect_check(const DensityMatrix& source,
                                                const MeasurementSet& m, ProtocolConfig cfg,
                                                double a0_random_prob, Exec exec) {
  cfg.symmetrize_marginals = true;
  const RunResult on = run_protocol(source, m, cfg, a0_random_prob, exec);
  cfg.symmetrize_marginals = false;
  const RunResult off = run_protocol(source, m, cfg, a0_random_prob, exec);

  SymmetrizationCheck chk;
  chk.q_on = on.report.q;
  chk.q_off = off.report.q;
  chk.s_on = on.report.s;
  chk.s_off = off.report.s;
  chk.q_diff = std::abs(chk.q_on - chk.q_off);
  chk.s_diff = std::abs(chk.s_on - chk.s_off);
  chk.combined_q_err = std::hypot(on.report.q_stderr, off.report.q_stderr);
  chk.combined_s_err = std::hypot(on.report.s_stderr, off.report.s_stderr);

  const chsh::TableStatistics st_on = chsh::table_statistics(on.table);
  const chsh::TableStatistics st_off = chsh::table_statistics(off.table);
  chk.bias_a_on = st_on.bias_a;
  chk.bias_a_off = st_off.bias_a;
  chk.bias_b_on = st_on.bias_b;
  chk.bias_b_off = st_off.bias_b;

  chk.raw_streams_match = on.log.rounds.size() == off.log.rounds.size();
  for (std::size_t i = 0; chk.raw_streams_match && i < on.log.rounds.size(); ++i) {
    const Round& u = on.log.rounds[i];
    const Round& v = off.log.rounds[i];
    chk.raw_streams_match = u.x == v.x && u.y == v.y && u.a_raw == v.a_raw &&
                            u.b_raw == v.b_raw && u.flip == v.flip;
  }
  return chk;
}

AttackRun attack_end_to_end(double s_target, double q_target, const ProtocolConfig& cfg,
                            Exec exec) {
  AttackRun run{eve::build_attack(s_target, q_target), RunResult{}, 0, 0, 0, 0, 0};
  run.result =
      run_protocol(run.attack.state, run.attack.measurements, cfg, run.attack.a0_prob_random, exec);

  const bounds::RateReport& rep = run.result.report;
  auto pull = [](double est, double target, double se) {
    const double d = std::abs(est - target);
    if (se > 0.0) return d / se;
    return d == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  };
  run.q_pull = pull(rep.q, q_target, rep.q_stderr);
  run.s_pull = pull(rep.s, s_target, rep.s_stderr);

  run.chi_target = bounds::holevo_bound_di(s_target);
  run.chi_dev = std::abs(rep.chi_bound - run.chi_target);
  const double s_lo = std::min(rep.s - rep.s_stderr, chsh::tsirelson_bound);
  const double s_hi = std::min(rep.s + rep.s_stderr, chsh::tsirelson_bound);
  run.chi_err =
      0.5 * std::abs(bounds::holevo_bound_di(s_hi) - bounds::holevo_bound_di(s_lo));
  return run;
}

}  // namespace diqkd::protocol
