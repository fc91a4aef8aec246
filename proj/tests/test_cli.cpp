#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

namespace {

namespace fs = std::filesystem;

struct CliResult {
  int code = -1;
  std::string out;
};

// Runs the installed binary through the shell, capturing stdout; stderr is
// dropped (usage errors are asserted through the exit code).
CliResult run_cli(const std::string& args, const std::string& env_prefix = "") {
  const char* bin = std::getenv("DIQKD_BIN");
  if (!bin) return {};
  std::string cmd = env_prefix + "\"" + bin + "\" " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return {};
  CliResult res;
  char buf[4096];
  std::size_t got;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) res.out.append(buf, got);
  const int status = pclose(pipe);
  res.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return res;
}

fs::path scratch_dir() {
  const fs::path dir =
      fs::temp_directory_path() / ("diqkd_cli_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir;
}

std::string first_line(const fs::path& p) {
  std::ifstream is(p);
  std::string line;
  std::getline(is, line);
  return line;
}

bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("cli binary is wired into the test environment") {
  REQUIRE(std::getenv("DIQKD_BIN") != nullptr);
  REQUIRE(fs::exists(std::getenv("DIQKD_BIN")));
}

TEST_CASE("cli rate") {
  const CliResult ok = run_cli("rate --Q 0.05 --S 2.5");
  CHECK(ok.code == 0);
  CHECK(contains(ok.out, "scenario=device_independent"));
  CHECK(contains(ok.out, "r_DW=0.170038599684447"));

  CHECK(run_cli("rate --Q 0.9 --S 2.5").code == 2);
  CHECK(run_cli("rate --S 2.5").code == 2);
  CHECK(run_cli("rate --Q 0.05 --S 2.9").code == 2);
  CHECK(run_cli("rate --Q 0.05 --S 2.5 --scenario bogus").code == 2);

  const CliResult eff = run_cli("rate --scenario detection_efficiency --eta 0.95");
  CHECK(eff.code == 0);
  CHECK(contains(eff.out, "eta=0.95"));
  CHECK(contains(eff.out, "r_DW=0.2507756701317"));
  CHECK(run_cli("rate --scenario detection_efficiency").code == 2);

  const CliResult pk =
      run_cli("rate --scenario partial_knowledge --Q 0.1 --S 2.6 --q-known 0.1");
  CHECK(pk.code == 0);
  CHECK(contains(pk.out, "q_known=0.1"));
  CHECK(contains(pk.out, "chi=0.645774289643447"));
}

TEST_CASE("cli usage errors") {
  CHECK(run_cli("").code == 2);
  CHECK(run_cli("frobnicate").code == 2);
  CHECK(run_cli("--help").code == 0);
  CHECK(run_cli("rate --help").code == 0);
}

TEST_CASE("cli attack") {
  const CliResult r = run_cli("attack --S 2.5 --Q 0.05");
  CHECK(r.code == 0);
  CHECK(contains(r.out, "lambda_phi_plus=0.875"));
  CHECK(contains(r.out, "a0_prob_random=0.1"));
  CHECK(contains(r.out, "chi_bound=0.543564443199596"));
  CHECK(run_cli("attack --S 2.9").code == 2);
  CHECK(run_cli("attack").code == 2);
}

TEST_CASE("cli verify") {
  const CliResult l5 = run_cli("verify --suite lemma5 --samples 2000 --seed 5");
  CHECK(l5.code == 0);
  CHECK(contains(l5.out, "suite=lemma5"));
  CHECK(contains(l5.out, "failures=0"));

  CHECK(run_cli("verify --suite theorem1 --samples 200 --phi-grid 5").code == 0);
  CHECK(run_cli("verify --suite blocks --samples 10").code == 0);
  CHECK(run_cli("verify --suite bogus").code == 2);
  CHECK(run_cli("verify").code == 2);

  const fs::path csv = scratch_dir() / "reduction.csv";
  const CliResult red =
      run_cli("verify --suite reduction --samples 50 --csv \"" + csv.string() + "\"");
  CHECK(red.code == 0);
  REQUIRE(fs::exists(csv));
  CHECK(first_line(csv) == "check,param_json,value,bound,margin");
}

TEST_CASE("cli simulate") {
  const CliResult w = run_cli("simulate --state werner:0.9 --n 20000 --seed 3");
  CHECK(w.code == 0);
  CHECK(contains(w.out, "estimated=1"));
  CHECK(contains(w.out, "n=20000"));

  CHECK(run_cli("simulate --state attack:2.5,0.05 --n 20000 --seed 4").code == 0);
  CHECK(run_cli("simulate --state bogus --n 1000").code == 2);
  CHECK(run_cli("simulate --state werner:1.5 --n 1000").code == 2);

  const fs::path log = scratch_dir() / "rounds.csv";
  const CliResult lg =
      run_cli("simulate --state phiplus --n 2000 --log \"" + log.string() + "\"");
  CHECK(lg.code == 0);
  REQUIRE(fs::exists(log));
  CHECK(first_line(log) == "round,X,Y,a_raw,b_raw,a,b,flip");
}

TEST_CASE("cli curve") {
  const fs::path dir = scratch_dir();
  const fs::path fig2 = dir / "fig2.csv";
  const CliResult r2 =
      run_cli("curve --figure 2 --out \"" + fig2.string() + "\" --steps 30");
  CHECK(r2.code == 0);
  REQUIRE(fs::exists(fig2));
  REQUIRE(fs::exists(dir / "fig2_standard.csv"));
  CHECK(first_line(fig2) == "x,Q,S,chi,rate");
  CHECK(contains(r2.out, "zero_crossing_device_independent=0.0714"));
  CHECK(contains(r2.out, "zero_crossing_standard_qkd=0.1100"));

  const fs::path fig3 = dir / "fig3.csv";
  const CliResult r3 =
      run_cli("curve --figure 3 --out \"" + fig3.string() + "\" --steps 20 --gnuplot");
  CHECK(r3.code == 0);
  REQUIRE(fs::exists(fig3));
  REQUIRE(fs::exists(dir / "fig3.gp"));
  CHECK(contains(r3.out, "zero_crossing_efficiency=0.923"));
  std::ifstream gp(dir / "fig3.gp");
  std::string script((std::istreambuf_iterator<char>(gp)), std::istreambuf_iterator<char>());
  CHECK(contains(script, "plot"));
  CHECK(contains(script, fig3.string()));

  CHECK(run_cli("curve --figure 4").code == 2);

  const fs::path envdir = dir / "envout";
  fs::create_directories(envdir);
  const CliResult env = run_cli("curve --figure 2 --steps 10",
                                "DIQKD_OUT_DIR=\"" + envdir.string() + "\" ");
  CHECK(env.code == 0);
  CHECK(fs::exists(envdir / "figure2.csv"));
  CHECK(fs::exists(envdir / "figure2_standard.csv"));
}

TEST_CASE("cli bb84 demo") {
  const CliResult r = run_cli("bb84-demo");
  CHECK(r.code == 0);
  CHECK(contains(r.out, "X,Y,a,b,p,count"));
  CHECK(contains(r.out, "max_chsh_over_assignments=2\n"));
  CHECK(contains(r.out, "eve_entropy_alice_0=0\n"));
  CHECK(contains(r.out, "eve_entropy_alice_1=0\n"));
  CHECK(contains(r.out, "eve_entropy_bob_0=0\n"));
  CHECK(contains(r.out, "eve_entropy_bob_1=0\n"));
}
