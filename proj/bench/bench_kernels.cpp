// Serial-vs-parallel comparison of the sweep and simulation kernels. Both
// paths draw per-index counter streams, so outputs are identical; the point
// of the benchmark is the scaling.
#include <cstdint>

#include "diqkd/bounds.hpp"
#include "diqkd/chsh.hpp"
#include "diqkd/protocol.hpp"
#include "diqkd/verify.hpp"

namespace {

using namespace diqkd;

double kernel_lemma5(Exec exec) {
  return verify::lemma5_inequality_sweep(200000, 1, exec).worst_margin;
}

double kernel_theorem1(Exec exec) {
  return verify::theorem1_sweep(5000, 10, 1, exec).worst_margin;
}

double kernel_blocks(Exec exec) {
  return verify::blocks_roundtrip_sweep(40, 1, exec).worst_margin;
}

double kernel_reduction(Exec exec) {
  return verify::reduction_sweep(2000, 1, exec).worst_margin;
}

double kernel_protocol(Exec exec) {
  protocol::ProtocolConfig cfg;
  cfg.n_rounds = 200000;
  cfg.seed = 1;
  return protocol::run_protocol(chsh::werner_state(0.9),
                                chsh::MeasurementSet::protocol_ideal(), cfg, 0.0, exec)
      .report.s;
}

double kernel_curve(Exec exec) {
  return bounds::curve(bounds::Scenario::device_independent,
                       bounds::SweepVariable::qber_werner_line, 0.0, 0.12, 20000, 0.0, exec)
      .back()
      .rate;
}

using Kernel = double (*)(Exec);

struct Entry {
  const char* name;
  Kernel fn;
};

constexpr Entry kKernels[] = {
    {"entropy_inequality_sweep", kernel_lemma5}, {"branch_bound_sweep", kernel_theorem1},
    {"block_decomposition_sweep", kernel_blocks}, {"reduction_sweep", kernel_reduction},
    {"protocol_simulation", kernel_protocol},     {"rate_curve", kernel_curve},
};

}  // namespace

#ifndef DIQKD_BENCH_SELF_TIMED

#include <benchmark/benchmark.h>

namespace {

void run_kernel(benchmark::State& state, Kernel fn) {
  const Exec exec = state.range(0) ? Exec::parallel : Exec::serial;
  for (auto _ : state) {
    double v = fn(exec);
    benchmark::DoNotOptimize(v);
  }
}

}  // namespace

BENCHMARK_CAPTURE(run_kernel, entropy_inequality_sweep, kernel_lemma5)
    ->Arg(0)
    ->Arg(1)
    ->ArgName("parallel")
    ->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(run_kernel, branch_bound_sweep, kernel_theorem1)
    ->Arg(0)
    ->Arg(1)
    ->ArgName("parallel")
    ->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(run_kernel, block_decomposition_sweep, kernel_blocks)
    ->Arg(0)
    ->Arg(1)
    ->ArgName("parallel")
    ->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(run_kernel, reduction_sweep, kernel_reduction)
    ->Arg(0)
    ->Arg(1)
    ->ArgName("parallel")
    ->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(run_kernel, protocol_simulation, kernel_protocol)
    ->Arg(0)
    ->Arg(1)
    ->ArgName("parallel")
    ->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(run_kernel, rate_curve, kernel_curve)
    ->Arg(0)
    ->Arg(1)
    ->ArgName("parallel")
    ->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

#else  // fallback when Google Benchmark is unavailable

#include <chrono>
#include <cmath>
#include <cstdio>

int main() {
  std::printf("%-28s %12s %12s %8s  %s\n", "kernel", "serial_ms", "parallel_ms", "speedup",
              "outputs");
  int mismatches = 0;
  for (const auto& entry : kKernels) {
    const auto time_one = [&](Exec exec, double& out) {
      const auto t0 = std::chrono::steady_clock::now();
      out = entry.fn(exec);
      return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
          .count();
    };
    double out_s = 0.0, out_p = 0.0;
    const double ms_s = time_one(Exec::serial, out_s);
    const double ms_p = time_one(Exec::parallel, out_p);
    const bool match = out_s == out_p;
    if (!match) ++mismatches;
    std::printf("%-28s %12.2f %12.2f %8.2fx  %s\n", entry.name, ms_s, ms_p, ms_s / ms_p,
                match ? "identical" : "MISMATCH");
  }
  return mismatches == 0 ? 0 : 1;
}

#endif
