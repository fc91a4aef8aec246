#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "diqkd/bounds.hpp"
#include "diqkd/chsh.hpp"
#include "diqkd/eve.hpp"
#include "diqkd/parallel.hpp"
#include "diqkd/qmath.hpp"

namespace diqkd::protocol {

using chsh::CorrelationTable;
using chsh::MeasurementSet;
using qmath::DensityMatrix;

// Round scheduling and channel parameters. The five fractions are the
// sampling probabilities of the used setting pairs and must sum to 1.
struct ProtocolConfig {
  std::uint64_t n_rounds = 0;
  double key_fraction = 0.5;  // pair (A0, B1)
  std::array<double, 4> chsh_fractions{0.125, 0.125, 0.125,
                                       0.125};  // (1,1), (1,2), (2,1), (2,2)
  double eta = 1.0;
  bool symmetrize_marginals = true;
  std::uint64_t seed = 0;

  void validate() const;
};

// One simulated round. Raw outcomes live in {+1, -1, 0}, 0 recording a missed
// detection (only possible when eta < 1); a and b fold 0 into -1 and apply
// the shared flip bit when symmetrization is on.
struct Round {
  std::int8_t x = 0;
  std::int8_t y = 1;
  std::int8_t a_raw = 0, b_raw = 0;
  std::int8_t a = 0, b = 0;
  std::uint8_t flip = 0;
};

struct RoundLog {
  std::vector<Round> rounds;

  // CSV with header round,X,Y,a_raw,b_raw,a,b,flip.
  void write_csv(std::ostream& os) const;
};

struct RunResult {
  RoundLog log;
  CorrelationTable table;       // empirical frequencies of the logged outcomes
  bounds::RateReport report;    // rate at (Q hat, S hat), S clamped to 2 sqrt 2
                                // for the bound; report.s keeps the raw estimate
};

// Simulate cfg.n_rounds collective rounds of (source, m): inputs drawn from
// the configured fractions, outcomes from the exact Born distribution of the
// chosen pair, detection losses applied independently per side, then loss
// binning and optional symmetrization. a0_random_prob is the classical
// degradation of the key setting (the outcome is replaced by a fresh fair bit
// with that probability), as used by the saturating attack.
//
// Deterministic for fixed (cfg, source, m): each round consumes only its own
// counter-based stream, so results are identical for any thread count.
// Throws std::domain_error naming the setting pair if any required pair ends
// up with zero rounds.
RunResult run_protocol(const DensityMatrix& source, const MeasurementSet& m,
                       const ProtocolConfig& cfg, double a0_random_prob = 0.0,
                       Exec exec = Exec::parallel);

// Paired-seed comparison of symmetrization on vs off. The flip bit is drawn
// either way, so the raw streams coincide and the joint flip preserves
// products exactly: q_diff and s_diff are zero up to floating point, while
// the marginal biases differ.
struct SymmetrizationCheck {
  double q_on = 0.0, q_off = 0.0;
  double s_on = 0.0, s_off = 0.0;
  double q_diff = 0.0, s_diff = 0.0;
  double combined_q_err = 0.0, combined_s_err = 0.0;
  std::array<double, 3> bias_a_on{}, bias_a_off{};
  std::array<double, 2> bias_b_on{}, bias_b_off{};
  bool raw_streams_match = false;
};

SymmetrizationCheck symmetrization_effect_check(const DensityMatrix& source,
                                                const MeasurementSet& m, ProtocolConfig cfg,
                                                double a0_random_prob = 0.0,
                                                Exec exec = Exec::parallel);

// Build the saturating attack for (s_target, q_target), run the protocol on
// it, and report how far the estimates sit from the targets in units of
// their standard errors, plus the gap between the reported Holevo bound and
// its target value with a one-sigma propagation through the bound.
struct AttackRun {
  eve::AttackSpec attack;
  RunResult result;
  double q_pull = 0.0;     // |q_hat - q_target| / se(q_hat)
  double s_pull = 0.0;     // |s_hat - s_target| / se(s_hat)
  double chi_target = 0.0; // Holevo bound at s_target
  double chi_dev = 0.0;    // |reported bound - chi_target|
  double chi_err = 0.0;    // bound swing across s_hat +- se
};

AttackRun attack_end_to_end(double s_target, double q_target, const ProtocolConfig& cfg,
                            Exec exec = Exec::parallel);

}  // namespace diqkd::protocol
