// Command-line front end: key rates, trade-off curves, the saturating attack,
// the numerical verification sweeps, protocol simulation, and the classical
// BB84 counterexample. Exit codes: 0 success, 2 usage error, 3 verification
// violation, 4 numeric failure.
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "diqkd/bounds.hpp"
#include "diqkd/chsh.hpp"
#include "diqkd/eve.hpp"
#include "diqkd/protocol.hpp"
#include "diqkd/qmath.hpp"
#include "diqkd/verify.hpp"

namespace {

using namespace diqkd;

std::string g15(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.15g", v);
  return buf;
}

bounds::Scenario scenario_from_name(const std::string& name) {
  if (name == "device_independent") return bounds::Scenario::device_independent;
  if (name == "standard_qkd") return bounds::Scenario::standard_qkd;
  if (name == "detection_efficiency") return bounds::Scenario::detection_efficiency;
  if (name == "partial_knowledge") return bounds::Scenario::partial_knowledge;
  throw std::domain_error("unknown scenario: " + name);
}

std::string default_out_dir() {
  const char* dir = std::getenv("DIQKD_OUT_DIR");
  return (dir && *dir) ? dir : ".";
}

// figure2.csv -> figure2_standard.csv / figure2.gp
std::string sibling(const std::string& path, const std::string& stem_suffix,
                    const std::string& new_ext) {
  const std::size_t slash = path.find_last_of('/');
  const std::size_t dot = path.find_last_of('.');
  std::string stem = path, ext = "";
  if (dot != std::string::npos && (slash == std::string::npos || dot > slash)) {
    stem = path.substr(0, dot);
    ext = path.substr(dot);
  }
  if (!new_ext.empty()) ext = new_ext;
  return stem + stem_suffix + ext;
}

void write_file(const std::string& path, const std::string& body) {
  std::ofstream os(path);
  if (!os) throw std::domain_error("cannot open for writing: " + path);
  os << body;
  if (!os.flush()) throw std::domain_error("write failed: " + path);
  std::cout << "wrote " << path << "\n";
}

struct StateSpec {
  qmath::DensityMatrix source;
  chsh::MeasurementSet measurements;
  double a0_random_prob = 0.0;
};

qmath::DensityMatrix phi_state() { return qmath::DensityMatrix::pure(chsh::phi_plus()); }

StateSpec parse_state(const std::string& text) {
  if (text == "phiplus")
    return {phi_state(), chsh::MeasurementSet::protocol_ideal(), 0.0};
  if (text.rfind("werner:", 0) == 0) {
    const double p = std::stod(text.substr(7));
    return {chsh::werner_state(p), chsh::MeasurementSet::protocol_ideal(), 0.0};
  }
  if (text.rfind("attack:", 0) == 0) {
    const std::string args = text.substr(7);
    const std::size_t comma = args.find(',');
    const double s = std::stod(args.substr(0, comma));
    const double q = comma == std::string::npos ? 0.0 : std::stod(args.substr(comma + 1));
    eve::AttackSpec atk = eve::build_attack(s, q);
    return {atk.state, atk.measurements, atk.a0_prob_random};
  }
  throw std::domain_error("unknown state spec: " + text +
                          " (expected phiplus, werner:p, or attack:S[,Q])");
}

std::string gnuplot_script(const std::vector<std::pair<std::string, std::string>>& series,
                           const std::string& xlabel, const std::string& png) {
  std::ostringstream os;
  os << "set datafile separator ','\n";
  os << "set terminal pngcairo size 900,600\n";
  os << "set output '" << png << "'\n";
  os << "set xlabel '" << xlabel << "'\n";
  os << "set ylabel 'key rate'\n";
  os << "set yrange [0:1]\n";
  os << "set grid\n";
  os << "plot ";
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (i) os << ", ";
    os << "'" << series[i].first << "' using 1:5 with lines title '" << series[i].second
       << "'";
  }
  os << "\n";
  return os.str();
}

int run_rate(const std::string& scenario_name, double q, double s, double eta, double q_known,
             bool have_eta) {
  const bounds::Scenario sc = scenario_from_name(scenario_name);
  bounds::RateReport rep;
  if (sc == bounds::Scenario::detection_efficiency) {
    if (!have_eta)
      throw std::domain_error("rate: --eta is required for the detection_efficiency scenario");
    rep = bounds::detection_efficiency_rate(eta);
  } else if (sc == bounds::Scenario::partial_knowledge) {
    rep = bounds::keyrate(q, s, sc, q_known);
  } else {
    rep = bounds::keyrate(q, s, sc);
  }
  std::cout << rep.to_text();
  return 0;
}

int run_curve(int figure, std::string out, std::size_t steps, bool gnuplot) {
  if (out.empty())
    out = default_out_dir() + (figure == 2 ? "/figure2.csv" : "/figure3.csv");

  std::vector<std::pair<std::string, std::string>> series;
  if (figure == 2) {
    if (steps == 0) steps = 120;
    const auto di = bounds::curve(bounds::Scenario::device_independent,
                                  bounds::SweepVariable::qber_werner_line, 0.0, 0.12, steps);
    const auto std_rows = bounds::curve(bounds::Scenario::standard_qkd,
                                        bounds::SweepVariable::qber_werner_line, 0.0, 0.12,
                                        steps);
    std::ostringstream a, b;
    bounds::write_curve_csv(a, di);
    bounds::write_curve_csv(b, std_rows);
    const std::string std_path = sibling(out, "_standard", "");
    write_file(out, a.str());
    write_file(std_path, b.str());
    series = {{out, "untrusted devices"}, {std_path, "characterized devices"}};
    std::cout << "zero_crossing_device_independent="
              << g15(bounds::curve_zero_crossing(bounds::Scenario::device_independent,
                                                 bounds::SweepVariable::qber_werner_line, 0.0,
                                                 0.12))
              << "\n";
    std::cout << "zero_crossing_standard_qkd="
              << g15(bounds::curve_zero_crossing(bounds::Scenario::standard_qkd,
                                                 bounds::SweepVariable::qber_werner_line, 0.0,
                                                 0.12))
              << "\n";
  } else {
    if (steps == 0) steps = 100;
    const auto rows = bounds::curve(bounds::Scenario::detection_efficiency,
                                    bounds::SweepVariable::efficiency, 0.9, 1.0, steps);
    std::ostringstream a;
    bounds::write_curve_csv(a, rows);
    write_file(out, a.str());
    series = {{out, "detection efficiency"}};
    std::cout << "zero_crossing_efficiency="
              << g15(bounds::curve_zero_crossing(bounds::Scenario::detection_efficiency,
                                                 bounds::SweepVariable::efficiency, 0.9, 1.0))
              << "\n";
  }

  if (gnuplot) {
    const std::string gp = sibling(out, "", ".gp");
    const std::string png = sibling(out, "", ".png");
    write_file(gp, gnuplot_script(series, figure == 2 ? "QBER" : "detection efficiency", png));
  }
  return 0;
}

int run_attack(double s, double q) {
  const eve::AttackSpec atk = eve::build_attack(s, q);
  std::cout << atk.to_key_value();
  const bounds::RateReport rep =
      bounds::keyrate(q, s, bounds::Scenario::device_independent);
  std::cout << "chi_bound=" << g15(rep.chi_bound) << "\n";
  std::cout << "r_DW=" << g15(rep.r_dw) << "\n";
  return 0;
}

int run_verify(const std::string& suite, std::size_t samples, std::uint64_t seed,
               std::size_t phi_grid, const std::string& csv) {
  verify::Report rep;
  if (suite == "lemma5")
    rep = verify::lemma5_inequality_sweep(samples, seed);
  else if (suite == "theorem1")
    rep = verify::theorem1_sweep(samples, phi_grid, seed);
  else if (suite == "blocks")
    rep = verify::blocks_roundtrip_sweep(samples, seed);
  else
    rep = verify::reduction_sweep(samples, seed);

  std::cout << "suite=" << rep.suite << "\n";
  std::cout << "samples=" << rep.samples << "\n";
  std::cout << "worst_margin=" << g15(rep.worst_margin) << "\n";
  std::cout << "failures=" << rep.failures.size() << "\n";
  if (!csv.empty()) {
    std::ostringstream os;
    rep.write_csv(os);
    write_file(csv, os.str());
  }
  if (!rep.ok()) {
    std::cerr << "verification violation: " << rep.failures.size() << " failed checks in "
              << rep.suite << "\n";
    return 3;
  }
  return 0;
}

int run_simulate(const std::string& state, std::uint64_t n, double eta, std::uint64_t seed,
                 double key_fraction, bool no_symmetrize, const std::string& log_path) {
  const StateSpec spec = parse_state(state);
  protocol::ProtocolConfig cfg;
  cfg.n_rounds = n;
  cfg.eta = eta;
  cfg.seed = seed;
  cfg.key_fraction = key_fraction;
  const double rest = (1.0 - key_fraction) / 4.0;
  cfg.chsh_fractions = {rest, rest, rest, rest};
  cfg.symmetrize_marginals = !no_symmetrize;

  const protocol::RunResult res =
      protocol::run_protocol(spec.source, spec.measurements, cfg, spec.a0_random_prob);
  std::cout << res.report.to_text();
  if (!log_path.empty()) {
    std::ostringstream os;
    res.log.write_csv(os);
    write_file(log_path, os.str());
  }
  return 0;
}

int run_bb84_demo() {
  const chsh::Bb84Counterexample c = chsh::bb84_counterexample();
  std::cout << c.table.to_csv();
  std::cout << "max_chsh_over_assignments=" << g15(chsh::max_chsh_over_assignments(c.table))
            << "\n";
  for (int setting = 0; setting < 2; ++setting) {
    std::cout << "eve_entropy_alice_" << setting << "="
              << g15(chsh::bb84_eve_conditional_entropy(c, true, setting)) << "\n";
    std::cout << "eve_entropy_bob_" << setting << "="
              << g15(chsh::bb84_eve_conditional_entropy(c, false, setting)) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Numerical laboratory for CHSH-based key rates against collective attacks"};
  app.require_subcommand(1);

  // rate
  auto* rate = app.add_subcommand("rate", "Key rate r = I(A:B) - chi at given Q, S");
  std::string rate_scenario = "device_independent";
  double rate_q = 0.0, rate_s = 0.0, rate_eta = 1.0, rate_qknown = 0.0;
  rate->add_option("--scenario", rate_scenario, "Adversary scenario")
      ->check(CLI::IsMember({"device_independent", "standard_qkd", "detection_efficiency",
                             "partial_knowledge"}));
  auto* rate_q_opt = rate->add_option("--Q", rate_q, "Quantum bit error rate");
  auto* rate_s_opt = rate->add_option("--S", rate_s, "CHSH value");
  auto* rate_eta_opt =
      rate->add_option("--eta", rate_eta, "Detection efficiency (detection_efficiency)");
  rate->add_option("--q-known", rate_qknown,
                   "Fraction of rounds known to the adversary (partial_knowledge)");

  // curve
  auto* curve = app.add_subcommand("curve", "Tabulate rate curves to CSV");
  int curve_figure = 2;
  std::string curve_out;
  std::size_t curve_steps = 0;
  bool curve_gnuplot = false;
  curve->add_option("--figure", curve_figure, "2: rate vs QBER, 3: rate vs efficiency")
      ->required()
      ->check(CLI::IsMember({2, 3}));
  curve->add_option("--out", curve_out,
                    "Output CSV (default: $DIQKD_OUT_DIR/figureN.csv or ./figureN.csv)");
  curve->add_option("--steps", curve_steps, "Grid steps (default 120 / 100)");
  curve->add_flag("--gnuplot", curve_gnuplot, "Also write a gnuplot script next to the CSV");

  // attack
  auto* attack = app.add_subcommand("attack", "Collective attack saturating the bound");
  double attack_s = 0.0, attack_q = 0.0;
  attack->add_option("--S", attack_s, "Target CHSH value in (2, 2 sqrt 2]")->required();
  attack->add_option("--Q", attack_q, "Target QBER in [0, 1/2]");

  // verify
  auto* ver = app.add_subcommand("verify", "Randomized verification sweeps");
  std::string ver_suite;
  std::size_t ver_samples = 10000, ver_grid = 10;
  std::uint64_t ver_seed = 1;
  std::string ver_csv;
  ver->add_option("--suite", ver_suite, "Which sweep to run")
      ->required()
      ->check(CLI::IsMember({"lemma5", "theorem1", "blocks", "reduction"}));
  ver->add_option("--samples", ver_samples, "Sample count");
  ver->add_option("--seed", ver_seed, "Stream seed");
  ver->add_option("--phi-grid", ver_grid, "Angle grid size (theorem1)");
  ver->add_option("--csv", ver_csv, "Write failing checks to this CSV");

  // simulate
  auto* sim = app.add_subcommand("simulate", "Monte Carlo protocol run");
  std::string sim_state = "phiplus";
  std::uint64_t sim_n = 100000, sim_seed = 0;
  double sim_eta = 1.0, sim_keyfrac = 0.5;
  bool sim_nosym = false;
  std::string sim_log;
  sim->add_option("--state", sim_state, "phiplus | werner:p | attack:S[,Q]");
  sim->add_option("--n", sim_n, "Number of rounds");
  sim->add_option("--eta", sim_eta, "Detection efficiency");
  sim->add_option("--seed", sim_seed, "Stream seed");
  sim->add_option("--key-fraction", sim_keyfrac, "Fraction of rounds on the key pair");
  sim->add_flag("--no-symmetrize", sim_nosym, "Skip the joint-flip symmetrization");
  sim->add_option("--log", sim_log, "Write the per-round log to this CSV");

  // bb84-demo
  auto* bb84 = app.add_subcommand(
      "bb84-demo", "Classical model reaching the BB84 correlations (no CHSH violation)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (rate->parsed()) {
      const bool needs_qs = rate_scenario != "detection_efficiency";
      if (needs_qs && (!rate_q_opt->count() || !rate_s_opt->count()))
        throw std::domain_error("rate: --Q and --S are required for this scenario");
      return run_rate(rate_scenario, rate_q, rate_s, rate_eta, rate_qknown,
                      rate_eta_opt->count() > 0);
    }
    if (curve->parsed()) return run_curve(curve_figure, curve_out, curve_steps, curve_gnuplot);
    if (attack->parsed()) return run_attack(attack_s, attack_q);
    if (ver->parsed()) return run_verify(ver_suite, ver_samples, ver_seed, ver_grid, ver_csv);
    if (sim->parsed())
      return run_simulate(sim_state, sim_n, sim_eta, sim_seed, sim_keyfrac, sim_nosym, sim_log);
    if (bb84->parsed()) return run_bb84_demo();
  } catch (const qmath::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
