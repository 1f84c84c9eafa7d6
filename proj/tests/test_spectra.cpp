#include "mirrorless/dynamics.hpp"
#include "mirrorless/levels.hpp"
#include "mirrorless/propagation.hpp"
#include "mirrorless/spectra.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace mirrorless;
using namespace mirrorless::spectra;
using levels::FieldConfig;
using levels::LevelScheme;
using angular::AngMom;

namespace {

AngMom j(int v) { return AngMom::integer(v); }

FieldConfig pump(double omega_p, double delta_p)
{
    FieldConfig f;
    f.omega_p = omega_p;
    f.delta_p = delta_p;
    f.delta_pr = delta_p;
    return f;
}

std::vector<double> linspace(double a, double b, int n)
{
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        v[static_cast<std::size_t>(i)] = a + (b - a) * i / (n - 1);
    return v;
}

CorrelationOptions with_reality()
{
    CorrelationOptions o;
    o.reality_check = true;
    return o;
}

} // namespace

TEST_CASE("undriven two-level line is a unit Lorentzian of width Γ")
{
    const LevelScheme s(j(0), j(1));
    const std::vector<double> grid{-1.0, -0.5, 0.0, 0.5, 1.0, 3.0};
    const auto r = probe_spectrum(s, pump(0.0, 0.0), Polarization::Parallel, grid, with_reality());
    for (std::size_t i = 0; i < grid.size(); ++i)
        CHECK(r.absorption[i] == doctest::Approx(1.0 / (1.0 + 4.0 * grid[i] * grid[i])).epsilon(1e-9));
    REQUIRE(r.imag_residue.has_value());
    CHECK(*r.imag_residue < 1e-10);
}

TEST_CASE("regression spectra match the frozen resolvent oracle")
{
    // tests/oracles/master_equation_oracle.py, direct resolvent -(L + iν)⁻¹.
    const std::vector<double> grid{-5.0, -2.0, -0.5, 0.5, 2.0, 5.0};
    struct Case {
        int Fg, Fe;
        double omega, delta;
        Polarization pol;
        std::array<double, 6> expected;
    };
    const Case cases[] = {
        {1, 2, 3.0, 0.0, Polarization::Perpendicular,
         {1.129605124205921e-02, 3.738571671213030e-02, 8.126167911577896e-02, 8.126167911577896e-02,
          3.738571671213028e-02, 1.129605124205921e-02}},
        {1, 2, 3.0, 10.0, Polarization::Perpendicular,
         {8.955554822246208e-03, 3.648498801652746e-03, 2.764631756234412e-03, 1.994662132412815e-03,
          1.608700624622626e-03, 1.044456871977681e-03}},
        {2, 3, 4.0, 2.0, Polarization::Parallel,
         {9.309832811499658e-02, 5.217437632809300e-02, 6.691620854878193e-03, 2.077200393487337e-02,
          1.656762964073761e-03, 4.918071682151453e-04}},
    };
    for (const auto& c : cases) {
        const LevelScheme s(j(c.Fg), j(c.Fe));
        const auto r = probe_spectrum(s, pump(c.omega, c.delta), c.pol, grid);
        const WeakProbe wp(s, pump(c.omega, c.delta), c.pol);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            CHECK(std::abs(r.absorption[i] - c.expected[i]) < 1e-8);
            CHECK(std::abs(wp.absorption(grid[i]) - c.expected[i]) < 1e-5 * std::abs(c.expected[i]) + 1e-8);
        }
    }
}

TEST_CASE("resonant pumping gives a symmetric perpendicular spectrum")
{
    const LevelScheme s(j(1), j(2));
    const auto grid = linspace(-8.0, 8.0, 81);
    const auto r = probe_spectrum(s, pump(3.0, 0.0), Polarization::Perpendicular, grid, with_reality());
    for (std::size_t i = 0; i < grid.size(); ++i)
        CHECK(r.absorption[i] == doctest::Approx(r.absorption[grid.size() - 1 - i]).epsilon(1e-9));
    CHECK(*r.imag_residue < 1e-10);
    CHECK(*std::min_element(r.absorption.begin(), r.absorption.end()) > 0);
}

TEST_CASE("both routes agree for the perpendicular spectrum")
{
    const LevelScheme s(j(1), j(2));
    PerpendicularOptions opts;
    opts.correlation.reality_check = true;
    const auto grid = linspace(-6.0, 6.0, 61);
    for (double dp : {0.0, 1.75}) {
        const auto r = perpendicular_gain_spectrum(s, pump(3.0, dp), grid, opts);
        double peak = 0.0, diff = 0.0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            peak = std::max(peak, std::abs(r.regression.absorption[i]));
            diff = std::max(diff, std::abs(r.regression.absorption[i] - r.weak_probe.absorption[i]));
            if (std::abs(r.regression.absorption[i]) > 1e-3 * peak)
                CHECK((r.regression.absorption[i] > 0) == (r.weak_probe.absorption[i] > 0));
        }
        CHECK(diff / peak < 1e-4);
        CHECK(r.linearity_change < 1e-3);
        CHECK(*r.regression.imag_residue < 1e-10);
    }
}

TEST_CASE("two-level Mollow sidebands sit at the dressed-state offsets")
{
    const LevelScheme s(j(0), j(1));
    const double omega = 4.0, delta = 3.0;
    const auto ladder = dressed_ladder(s, levels::build_hamiltonian(s, pump(omega, 0.0 + delta)));
    REQUIRE(ladder.pairs.size() == 1);
    CHECK(ladder.pairs[0].generalized_rabi == doctest::Approx(5.0));
    CHECK(ladder.pairs[0].absorption_offset == doctest::Approx(-5.0));
    CHECK(ladder.pairs[0].gain_offset == doctest::Approx(5.0));

    const auto grid = linspace(-8.0, 8.0, 161);
    const auto r = probe_spectrum(s, pump(omega, delta), Polarization::Parallel, grid);
    const auto mx = std::max_element(r.absorption.begin(), r.absorption.end()) - r.absorption.begin();
    const auto mn = std::min_element(r.absorption.begin(), r.absorption.end()) - r.absorption.begin();
    CHECK(std::abs(grid[static_cast<std::size_t>(mx)] - ladder.pairs[0].absorption_offset) <= 0.1 + 1e-12);
    CHECK(std::abs(grid[static_cast<std::size_t>(mn)] - ladder.pairs[0].gain_offset) <= 0.2 + 1e-12);
    CHECK(r.absorption[static_cast<std::size_t>(mn)] < 0);
}

TEST_CASE("half-line Fourier quadrature of a damped exponential")
{
    // ∫₀^∞ e^{iντ} e^{(−1/2 + 2i)τ} dτ = 1 / (1/2 − i(ν + 2))
    const Complex lambda(-0.5, 2.0);
    const double h = 0.01;
    std::vector<Complex> c;
    for (int k = 0; k * h < 60.0; ++k)
        c.push_back(std::exp(lambda * (k * h)));
    const std::array<Complex, 3> dc{lambda, lambda * lambda, lambda * lambda * lambda};
    for (double nu : {-3.0, 0.0, 1.5}) {
        const Complex exact = 1.0 / (-lambda - kI * nu);
        CHECK(std::abs(fourier_half_line(c, dc, h, nu) - exact) < 1e-10);
    }
}

TEST_CASE("correlation window is bounded")
{
    const LevelScheme s(j(1), j(2));
    CorrelationOptions o;
    o.max_window = 1.0;
    CHECK_THROWS_AS(probe_spectrum(s, pump(3.0, 10.0), Polarization::Perpendicular, {0.0, 1.0}, o), WindowExhausted);
}

TEST_CASE("gain windows are located by interpolated zero crossings")
{
    const std::vector<double> x{-2, -1, 0, 1, 2, 3};
    const std::vector<double> y{1, -1, -3, 1, -1, 1};
    const auto w = gain_windows(x, y);
    REQUIRE(w.size() == 2);
    CHECK(w[0].lower == doctest::Approx(-1.5));
    CHECK(w[0].upper == doctest::Approx(0.75));
    CHECK(w[0].depth == doctest::Approx(-3.0));
    CHECK(w[0].delta_at_min == doctest::Approx(0.0));
    CHECK(w[1].center() == doctest::Approx(2.0));
    CHECK(gain_windows(x, y, 2.0).size() == 1);
}

TEST_CASE("resonant steady-state coherences are real and mirror-symmetric")
{
    // Static weak x probe at δ = 0 on top of the Ω_p = 3 pump.
    const LevelScheme s(j(1), j(2));
    FieldConfig f = pump(3.0, 0.0);
    f.omega_pr = 3e-3;
    const dynamics::Liouvillian L(levels::build_hamiltonian(s, f), levels::build_collapse(s));
    const auto rho = dynamics::steady_state(L);
    // 1-based labels: ρ12 = (0, 1), ρ34 = (2, 3), ρ56 = (4, 5).
    CHECK(std::abs(rho(0, 1).imag()) < 1e-8);
    CHECK(std::abs(rho(2, 3).imag()) < 1e-8);
    CHECK(std::abs(rho(4, 5).imag()) < 1e-8);
    CHECK(std::abs(rho(1, 0) - rho(5, 7)) < 1e-10); // ρ21 = ρ68
    CHECK(std::abs(rho(1, 4) - rho(5, 4)) < 1e-10); // ρ25 = ρ65
    CHECK(std::abs(rho(3, 2) - rho(3, 6)) < 1e-10); // ρ43 = ρ47
    CHECK(std::abs(rho(0, 1)) > 1e-8);

    // Away from resonance the imaginary parts appear.
    FieldConfig g = f;
    g.delta_p = g.delta_pr = 0.1;
    const dynamics::Liouvillian Ld(levels::build_hamiltonian(s, g), levels::build_collapse(s));
    const auto rd = dynamics::steady_state(Ld);
    CHECK(std::abs(rd(4, 5).imag()) > 1e-8);
}
