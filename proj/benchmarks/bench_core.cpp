#include <benchmark/benchmark.h>

#include <cmath>
#include <span>
#include <vector>

#include "ramankit/constants.hpp"
#include "ramankit/dressed_mc.hpp"
#include "ramankit/dsh.hpp"
#include "ramankit/optim.hpp"
#include "ramankit/phys.hpp"
#include "ramankit/rng.hpp"

// Hot paths of the Monte Carlo and spectral pipelines. The motion and rate
// kernels dominate ensemble sweeps; FFT-backed synthesis and Welch dominate
// the heterodyne fits.

namespace {

using namespace ramankit;
using constants::boltzmann_kB;
using constants::two_pi;

mc::DressedField test_field(double s, double offset_from_bottom) {
  const auto lat = phys::LatticeParams::make(434e-9, boltzmann_kB * 0.5e-3, -0.59);
  const auto atom = phys::AtomSpecies::rb87();
  const double detuning =
      lat.depth_U0 * (1.0 - lat.chi) / constants::hbar + offset_from_bottom;
  return mc::DressedField::make(
      lat, phys::RepumperField::from_saturation(s, atom, detuning, lat), atom);
}

void BM_transition_rates(benchmark::State& state) {
  const auto f = test_field(0.36, two_pi * -5e6);
  double x = -0.4 * f.lattice.period_a;
  const double dx = 1e-11;
  for (auto _ : state) {
    benchmark::DoNotOptimize(f.transition_rates(x));
    x += dx;
  }
}
BENCHMARK(BM_transition_rates);

void BM_step_motion(benchmark::State& state) {
  const auto f = test_field(0.36, two_pi * 10e6);
  const auto cfg = mc::MCConfig::defaults_for(f);
  const auto trap = phys::trap_oscillator(f.lattice, f.atom);
  mc::AtomTrajectoryState st;
  st.x = 0.1 * f.lattice.period_a;
  st.branch = mc::Branch::plus;
  const double chunk = two_pi / trap.nu;  // one trap period per iteration
  for (auto _ : state) {
    mc::step_motion(st, f, chunk, cfg.dt_max, cfg.boundary_x);
    benchmark::DoNotOptimize(st);
  }
  state.SetItemsProcessed(state.iterations() *
                          static_cast<long>(std::ceil(chunk / cfg.dt_max)));
}
BENCHMARK(BM_step_motion);

void BM_run_atom(benchmark::State& state) {
  const auto f = test_field(0.36, two_pi * -5e6);
  auto cfg = mc::MCConfig::defaults_for(f);
  cfg.t_max = 0.5e-3;
  std::uint64_t i = 0;
  for (auto _ : state) {
    rng::Stream stream(rng::mix(42, i++));
    benchmark::DoNotOptimize(mc::run_atom(cfg, f, stream));
  }
}
BENCHMARK(BM_run_atom)->Unit(benchmark::kMillisecond);

void BM_nelder_mead(benchmark::State& state) {
  const auto rosenbrock = [](std::span<const double> p) {
    double v = 0.0;
    for (std::size_t i = 0; i + 1 < p.size(); ++i) {
      const double a = p[i + 1] - p[i] * p[i];
      const double b = 1.0 - p[i];
      v += 100.0 * a * a + b * b;
    }
    return v;
  };
  const std::vector<double> x0 = {-1.2, 1.0, -1.2, 1.0};
  const std::vector<double> scale = {0.5, 0.5, 0.5, 0.5};
  for (auto _ : state)
    benchmark::DoNotOptimize(
        optim::nelder_mead(rosenbrock, x0, scale, {1e-10, 20000}));
}
BENCHMARK(BM_nelder_mead)->Unit(benchmark::kMillisecond);

void BM_gen_phase_noise(benchmark::State& state) {
  const dsh::NoiseAmplitudes amps{12.6, 5.0, 1.0};
  const std::size_t n = std::size_t{1} << static_cast<int>(state.range(0));
  std::uint64_t i = 0;
  for (auto _ : state) {
    rng::Stream stream(rng::mix(7, i++));
    benchmark::DoNotOptimize(dsh::gen_phase_noise(amps, n, 12.5e6, stream));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(n));
}
BENCHMARK(BM_gen_phase_noise)->Arg(16)->Arg(18)->Unit(benchmark::kMillisecond);

void BM_welch_psd(benchmark::State& state) {
  rng::Stream stream(3);
  const std::size_t n = std::size_t{1} << 18;
  std::vector<double> signal(n);
  for (double& v : signal) v = stream.normal();
  const std::size_t seg = std::size_t{1} << static_cast<int>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(dsh::psd_welch(signal, 12.5e6, seg, seg / 2));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(n));
}
BENCHMARK(BM_welch_psd)->Arg(12)->Arg(14)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
