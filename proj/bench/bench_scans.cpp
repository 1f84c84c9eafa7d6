// Serial reference vs OpenMP kernels on the grid scans.
//
//   bench_scans --benchmark_counters_tabular=true

#include "mirrorless/dynamics.hpp"
#include "mirrorless/parallel.hpp"
#include "mirrorless/propagation.hpp"
#include "mirrorless/spectra.hpp"

#include <benchmark/benchmark.h>

#include <cmath>

using namespace mirrorless;
using angular::AngMom;
using levels::LevelScheme;

namespace {

std::vector<double> linspace(double a, double b, int n)
{
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        v[static_cast<std::size_t>(i)] = a + (b - a) * i / (n - 1);
    return v;
}

Execution policy(const benchmark::State& state) { return state.range(0) ? Execution::Parallel : Execution::Serial; }

void label(benchmark::State& state)
{
    state.SetLabel(state.range(0) ? "parallel x" + std::to_string(thread_count()) : "serial");
}

void BM_InversionScan(benchmark::State& state)
{
    const LevelScheme s(AngMom::integer(1), AngMom::integer(2));
    std::vector<double> grid;
    for (int k = 0; k <= 120; ++k)
        grid.push_back(std::pow(10.0, -1.0 + 0.025 * k));
    dynamics::InversionOptions o;
    o.execution = policy(state);
    for (auto _ : state)
        benchmark::DoNotOptimize(dynamics::inversion_scan(s, 0.0, grid, o));
    label(state);
}

void BM_MinAbsorptionScan(benchmark::State& state)
{
    const LevelScheme s(AngMom::integer(2), AngMom::integer(3));
    const auto omegas = linspace(0.5, 6.0, 8);
    const auto deltas = linspace(-10.0, 10.0, 101);
    spectra::MinAbsorptionOptions o;
    o.execution = policy(state);
    for (auto _ : state)
        benchmark::DoNotOptimize(spectra::min_absorption_scan(s, 0.75, omegas, deltas, o));
    label(state);
}

void BM_RegressionSpectrum(benchmark::State& state)
{
    const LevelScheme s(AngMom::integer(2), AngMom::integer(3));
    levels::FieldConfig f;
    f.omega_p = 4.0;
    f.delta_p = f.delta_pr = 2.0;
    const auto grid = linspace(-8.0, 8.0, 321);
    spectra::CorrelationOptions o;
    o.execution = policy(state);
    for (auto _ : state)
        benchmark::DoNotOptimize(spectra::probe_spectrum(s, f, spectra::Polarization::Parallel, grid, o));
    label(state);
}

void BM_OutputCurve(benchmark::State& state)
{
    const LevelScheme s(AngMom::integer(1), AngMom::integer(2));
    const propagation::CellConfig cell;
    std::vector<double> grid;
    for (int k = 0; k <= 60; ++k)
        grid.push_back(std::pow(10.0, -1.0 + 0.1 * k));
    propagation::OutputCurveOptions o;
    o.execution = policy(state);
    for (auto _ : state)
        benchmark::DoNotOptimize(propagation::output_curve(s, cell, grid, 0.75, o));
    label(state);
}

} // namespace

BENCHMARK(BM_InversionScan)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_MinAbsorptionScan)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_RegressionSpectrum)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_OutputCurve)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
