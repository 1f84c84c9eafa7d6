#include "mirrorless/dynamics.hpp"
#include "mirrorless/parallel.hpp"
#include "mirrorless/propagation.hpp"
#include "mirrorless/spectra.hpp"

#include <doctest.h>

#include <cmath>
#include <stdexcept>

using namespace mirrorless;
using angular::AngMom;
using levels::LevelScheme;

namespace {

AngMom j(int v) { return AngMom::integer(v); }

std::vector<double> linspace(double a, double b, int n)
{
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        v[static_cast<std::size_t>(i)] = a + (b - a) * i / (n - 1);
    return v;
}

struct Threads {
    Threads() { set_thread_count(4); }
};

} // namespace

TEST_CASE_FIXTURE(Threads, "map_indices keeps index order and propagates the first error")
{
    const auto out = map_indices(100, [](std::size_t i) { return i * i; }, Execution::Parallel);
    for (std::size_t i = 0; i < out.size(); ++i)
        CHECK(out[i] == i * i);
    CHECK_THROWS_AS(map_indices(
                        10,
                        [](std::size_t i) {
                            if (i == 7)
                                throw std::runtime_error("boom");
                            return i;
                        },
                        Execution::Parallel),
                    std::runtime_error);
}

TEST_CASE_FIXTURE(Threads, "inversion scan is bitwise identical in parallel")
{
    const LevelScheme s(j(1), j(2));
    std::vector<double> grid;
    for (int k = 0; k <= 30; ++k)
        grid.push_back(std::pow(10.0, -1.0 + 0.1 * k));
    dynamics::InversionOptions o;
    const auto a = dynamics::inversion_scan(s, 0.0, grid, o);
    o.execution = Execution::Parallel;
    const auto b = dynamics::inversion_scan(s, 0.0, grid, o);
    REQUIRE(a.points.size() == b.points.size());
    for (std::size_t i = 0; i < a.points.size(); ++i) {
        CHECK(a.points[i].inversion == b.points[i].inversion);
        CHECK(a.points[i].populations == b.points[i].populations);
    }
    REQUIRE(a.threshold.has_value());
    CHECK(*a.threshold == *b.threshold);
}

TEST_CASE_FIXTURE(Threads, "minimum-absorption scan is bitwise identical in parallel")
{
    const LevelScheme s(j(2), j(3));
    spectra::MinAbsorptionOptions o;
    const auto omegas = linspace(1.0, 4.0, 6);
    const auto deltas = linspace(-6.0, 6.0, 61);
    const auto a = spectra::min_absorption_scan(s, 0.75, omegas, deltas, o);
    o.execution = Execution::Parallel;
    const auto b = spectra::min_absorption_scan(s, 0.75, omegas, deltas, o);
    REQUIRE(a.points.size() == b.points.size());
    for (std::size_t i = 0; i < a.points.size(); ++i) {
        CHECK(a.points[i].min_absorption == b.points[i].min_absorption);
        CHECK(a.points[i].delta_at_min == b.points[i].delta_at_min);
    }
    CHECK(a.gain_ranges == b.gain_ranges);
}

TEST_CASE_FIXTURE(Threads, "regression spectrum is bitwise identical in parallel")
{
    const LevelScheme s(j(1), j(2));
    levels::FieldConfig f;
    f.omega_p = 3.0;
    f.delta_p = f.delta_pr = 1.0;
    const auto grid = linspace(-6.0, 6.0, 41);
    spectra::CorrelationOptions o;
    const auto a = spectra::probe_spectrum(s, f, spectra::Polarization::Perpendicular, grid, o);
    o.execution = Execution::Parallel;
    const auto b = spectra::probe_spectrum(s, f, spectra::Polarization::Perpendicular, grid, o);
    CHECK(a.absorption == b.absorption);
    CHECK(a.window == b.window);
}

TEST_CASE_FIXTURE(Threads, "output curve is bitwise identical in parallel")
{
    const LevelScheme s(j(1), j(2));
    const propagation::CellConfig cell;
    std::vector<double> grid;
    for (int k = 0; k <= 12; ++k)
        grid.push_back(std::pow(10.0, -1.0 + 0.5 * k));
    propagation::OutputCurveOptions o;
    const auto a = propagation::output_curve(s, cell, grid, 0.75, o);
    o.execution = Execution::Parallel;
    const auto b = propagation::output_curve(s, cell, grid, 0.75, o);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].output_x == b[i].output_x);
        CHECK(a[i].output_z == b[i].output_z);
        CHECK(a[i].coefficients.alpha_x == b[i].coefficients.alpha_x);
    }
}
