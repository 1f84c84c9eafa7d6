#include "mirrorless/dynamics.hpp"
#include "mirrorless/levels.hpp"
#include "mirrorless/propagation.hpp"
#include "mirrorless/units.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <type_traits>

using namespace mirrorless;
using namespace mirrorless::propagation;
using levels::FieldConfig;
using levels::LevelScheme;
using angular::AngMom;

namespace {

AngMom j(int v) { return AngMom::integer(v); }

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

} // namespace

namespace units_check {
using namespace mirrorless::units;
// dI/dy = −αI + (Φ/4π) n ħω Γ
static_assert(std::is_same_v<decltype(InverseLength{} * Intensity{}), PowerDensity>);
static_assert(std::is_same_v<decltype(NumberDensity{} * Energy{} * Rate{}), PowerDensity>);
static_assert(std::is_same_v<decltype(PowerDensity{} * Length{}), Intensity>);
static_assert(std::is_same_v<decltype(Energy{} * Rate{} / (Length{} * Length{})), Intensity>);
static_assert(std::is_same_v<decltype(NumberDensity{} * Length{} * Length{}), InverseLength>);
} // namespace units_check

TEST_CASE("cell-derived scales")
{
    const CellConfig cell;
    const double c = 299792458.0, hbar = 1.054571817e-34;
    const double omega = 2 * std::numbers::pi * c / 780.241e-9;
    const double gamma = 2 * std::numbers::pi * 5.6e6;
    CHECK(rel(cell.saturation(), hbar * std::pow(omega, 3) * gamma / (12 * std::numbers::pi * c * c)) < 1e-13);
    CHECK(cell.saturation() == doctest::Approx(15.41).epsilon(1e-3));
    CHECK(rel(cell.alpha_scale(), 3 * 1.16e16 * std::pow(780.241e-9, 2) / (8 * std::numbers::pi)) < 1e-13);
    CHECK(rel(cell.capture_solid_angle(), std::numbers::pi * 1e-6 / 0.01) < 1e-13);
    CHECK(rabi_from_intensity(intensity_from_rabi(0.4, cell), cell) == doctest::Approx(0.4).epsilon(1e-14));
    CHECK(rabi_from_intensity(2 * cell.saturation(), cell) == doctest::Approx(1.0).epsilon(1e-14));

    CellConfig bad = cell;
    bad.length = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = cell;
    bad.solid_angle = 20;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("closed form reduces to linear growth as α → 0")
{
    const double I0 = 2.0, s = 3.5, y = 0.1;
    for (double alpha : {0.0, 1e-12, 1e-9, -1e-9})
        CHECK(rel(closed_form(I0, alpha, s, y), I0 + s * y - alpha * y * (I0 + 0.5 * s * y)) < 1e-10);
    CHECK(rel(closed_form(0.0, 1e-12, s, y), s * y) < 1e-10);
    // Both branches agree across the switch.
    const double a = 1e-6 / y;
    CHECK(rel(closed_form(I0, a * 0.999999, s, y), closed_form(I0, a * 1.000001, s, y)) < 1e-10);
    CHECK(rel(closed_form(I0, 30.0, s, y), I0 * std::exp(-3.0) + s * (1 - std::exp(-3.0)) / 30.0) < 1e-14);
}

TEST_CASE("closed-form and numeric frozen-coefficient profiles agree")
{
    const LevelScheme s(j(1), j(2));
    const CellConfig cell;
    for (double omega : {0.4, 2.0}) {
        const double I = intensity_from_rabi(omega, cell);
        EntryState entry{I, 0.0, local_coefficients(s, 0.75, I, cell)};
        const auto a = propagate(cell, entry, PropagationMode::ClosedForm);
        const auto b = propagate(cell, entry, PropagationMode::Numeric);
        REQUIRE(a.y.size() == b.y.size());
        for (std::size_t k = 1; k < a.y.size(); ++k) {
            CHECK(rel(b.I_z[k], a.I_z[k]) < 1e-8);
            CHECK(rel(b.I_x[k], a.I_x[k]) < 1e-8);
        }
    }
}

TEST_CASE("spontaneous sources split by branching ratio")
{
    const LevelScheme s(j(1), j(2));
    // Pure e(0) (level 5): b54 = 2/3 into π, b52 + b56 = 1/3 into σ.
    const auto [gz, gx] = spontaneous_sources(dynamics::DensityMatrix::pure_state(8, 4), s, 1.0);
    CHECK(gz == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    CHECK(gx == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    const auto [gz2, gx2] = spontaneous_sources(dynamics::DensityMatrix::pure_state(8, 0), s, 2.0);
    CHECK(gz2 == 0.0);
    CHECK(gx2 == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("reduced coherence sum equals the full commutator sum")
{
    const LevelScheme s(j(1), j(2));
    const Matrix mu_x = levels::dipole_x(s);
    for (double dp : {0.0, 0.1, 0.75}) {
        FieldConfig f;
        f.omega_p = 3.0;
        f.omega_pr = 0.05;
        f.delta_p = f.delta_pr = dp;
        const dynamics::Liouvillian L(levels::build_hamiltonian(s, f), levels::build_collapse(s));
        const auto rho = dynamics::steady_state(L);
        const double full = commutator_sum(mu_x, rho.matrix(), s);
        CHECK(std::abs(full - reduced_coherence_sum(rho.matrix(), s)) < 1e-12);
        CHECK(std::abs(full) > 1e-6);
    }
}

TEST_CASE("zero pump gives zero output")
{
    const LevelScheme s(j(1), j(2));
    const CellConfig cell;
    const auto pts = output_curve(s, cell, {0.0}, 0.75);
    CHECK(pts[0].output_x == 0.0);
    CHECK(pts[0].output_z == 0.0);
    CHECK(pts[0].coefficients.gamma_x == 0.0);
    CHECK(pts[0].coefficients.alpha_z > 0);
}

TEST_CASE("output grows monotonically and saturates")
{
    const LevelScheme s(j(1), j(2));
    const CellConfig cell;
    std::vector<double> grid;
    for (int k = 0; k <= 12; ++k)
        grid.push_back(std::pow(10.0, -1.0 + 0.5 * k));
    const auto pts = output_curve(s, cell, grid, 0.75);
    for (std::size_t k = 1; k < pts.size(); ++k)
        CHECK(pts[k].output_x > pts[k - 1].output_x);
    // Linear at low pump: doubling the input doubles the output to 1%.
    const double low = pts[1].output_x / pts[0].output_x;
    CHECK(low == doctest::Approx(grid[1] / grid[0]).epsilon(1e-2));
    // Saturated at high pump: log-log slope below 0.1 over the last half-decade.
    CHECK(std::log(pts.back().output_x / pts[pts.size() - 2].output_x) / std::log(std::sqrt(10.0)) < 0.1);
    // Bounded by the fully saturated source over the cell length.
    const double cap = source_term(cell, cell.gamma * 0.5) * cell.length;
    CHECK(pts.back().output_x < cap);
}

TEST_CASE("self-consistent mode depletes the pump faster than frozen coefficients")
{
    const LevelScheme s(j(1), j(2));
    CellConfig cell;
    cell.grid = 200;
    const double I = intensity_from_rabi(2.0, cell);
    const CoefficientModel model = [&](double Iz) { return local_coefficients(s, 0.75, Iz, cell); };
    EntryState entry{I, 0.0, model(I)};
    const auto frozen = propagate(cell, entry, PropagationMode::ClosedForm);
    const auto self = propagate(cell, entry, PropagationMode::SelfConsistent, model);
    CHECK(self.I_z.front() == doctest::Approx(I));
    for (std::size_t k = 1; k < self.I_z.size(); ++k)
        CHECK(self.I_z[k] <= self.I_z[k - 1] * (1 + 1e-12));
    CHECK(self.alpha_z.back() >= self.alpha_z.front());
    CHECK_THROWS_AS(propagate(cell, entry, PropagationMode::SelfConsistent), std::invalid_argument);
    (void)frozen;
}
