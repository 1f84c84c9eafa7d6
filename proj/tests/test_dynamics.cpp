#include "mirrorless/dynamics.hpp"
#include "mirrorless/levels.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>

using namespace mirrorless;
using namespace mirrorless::dynamics;
using namespace mirrorless::levels;
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

Liouvillian pumped(const LevelScheme& s, double omega_p, double delta_p)
{
    return Liouvillian(build_hamiltonian(s, pump(omega_p, delta_p)), build_collapse(s));
}

// Element-by-element master equation, no matrix products.
Matrix naive_rhs(const Matrix& H, const CollapseChannels& ch, double gamma, const Matrix& rho)
{
    const Eigen::Index d = rho.rows();
    Matrix out = Matrix::Zero(d, d);
    for (Eigen::Index a = 0; a < d; ++a)
        for (Eigen::Index b = 0; b < d; ++b) {
            Complex v = 0.0;
            for (Eigen::Index k = 0; k < d; ++k)
                v += -kI * (H(a, k) * rho(k, b) - rho(a, k) * H(k, b));
            for (const Matrix& c : ch.lowering)
                for (Eigen::Index k = 0; k < d; ++k)
                    for (Eigen::Index l = 0; l < d; ++l) {
                        v += gamma * c(a, k) * rho(k, l) * std::conj(c(b, l));
                        v -= 0.5 * gamma * std::conj(c(k, a)) * c(k, l) * rho(l, b);
                        v -= 0.5 * gamma * rho(a, k) * std::conj(c(l, k)) * c(l, b);
                    }
            out(a, b) = v;
        }
    return out;
}

Matrix random_density(Eigen::Index d, std::mt19937_64& rng)
{
    std::normal_distribution<double> n;
    Matrix A(d, d);
    for (Eigen::Index a = 0; a < d; ++a)
        for (Eigen::Index b = 0; b < d; ++b)
            A(a, b) = Complex(n(rng), n(rng));
    Matrix rho = A * A.adjoint();
    return rho / rho.trace();
}

} // namespace

TEST_CASE("superoperator agrees with the element-wise master equation")
{
    std::mt19937_64 rng(7);
    for (const auto& [Fg, Fe] : {std::pair{j(1), j(2)}, std::pair{j(2), j(3)}, std::pair{j(1), j(1)}}) {
        const LevelScheme s(Fg, Fe);
        FieldConfig f = pump(1.3, -0.4);
        f.omega_pr = 0.7;
        const Matrix H = build_hamiltonian(s, f);
        const auto ch = build_collapse(s);
        const Liouvillian L(H, ch, 1.0);
        for (int trial = 0; trial < 3; ++trial) {
            const Matrix rho = random_density(L.dim(), rng);
            const Matrix diff = L.apply(rho) - naive_rhs(H, ch, 1.0, rho);
            CHECK(diff.cwiseAbs().maxCoeff() < 1e-12);
        }
        CHECK(L.trace_row_residual() < 1e-14);
    }
}

TEST_CASE("two-level steady state matches the optical Bloch closed form")
{
    // F=0 -> F'=1 with a π pump is a two-level atom with Rabi frequency Ω.
    const LevelScheme s(j(0), j(1));
    const auto e = static_cast<Eigen::Index>(s.index(Manifold::Excited, j(0)));
    for (const auto& [omega, delta] : {std::pair{0.5, 0.0}, std::pair{2.0, 1.0}, std::pair{4.0, -3.0}}) {
        SteadyStateOptions opts;
        opts.mode = SteadyStateMode::Projected; // e(±1) decouple and leave a degenerate null space
        const auto rho = steady_state(pumped(s, omega, delta), s, opts);
        const double expected = (omega * omega / 4) / (delta * delta + 0.25 + omega * omega / 2);
        CHECK(rho.populations()(e) == doctest::Approx(expected).epsilon(1e-10));
    }
}

TEST_CASE("pure spontaneous decay")
{
    const LevelScheme s(j(1), j(2));
    const Liouvillian L = pumped(s, 0.0, 0.0);
    const auto ts = evolve(L, DensityMatrix::pure_state(8, 0), 3.0, 1e-11, {0.5, 1.0, 2.0, 3.0});
    for (std::size_t k = 0; k < ts.t.size(); ++k) {
        const RealVector p = ts.rho[k].populations();
        CHECK(p(0) == doctest::Approx(std::exp(-ts.t[k])).epsilon(1e-9));
        CHECK(p(1) == doctest::Approx(1 - std::exp(-ts.t[k])).epsilon(1e-9)); // b12 = 1
        CHECK(ts.rho[k].trace_error() < 1e-12);
    }
}

TEST_CASE("undriven system has a degenerate steady state")
{
    for (const auto& [Fg, Fe] : {std::pair{j(1), j(2)}, std::pair{j(2), j(3)}}) {
        const LevelScheme s(Fg, Fe);
        const Liouvillian L = pumped(s, 0.0, 0.0);
        const std::size_t ng = static_cast<std::size_t>(Fg.twice + 1);
        CHECK(null_space_dimension(L) >= ng * ng);
        CHECK_THROWS_AS(steady_state(L), DegenerateSteadyState);
        SteadyStateOptions opts;
        opts.mode = SteadyStateMode::Projected;
        const auto rho = steady_state(L, s, opts);
        CHECK((rho.matrix() - DensityMatrix::uniform_ground(s).matrix()).norm() < 1e-12);
    }
}

TEST_CASE("steady-state modes agree and satisfy the invariants")
{
    const LevelScheme s(j(1), j(2));
    const Liouvillian L = pumped(s, 3.0, 0.6);
    const auto direct = steady_state(L);
    CHECK(L.apply(direct.matrix()).norm() < 1e-12);
    direct.check();
    for (auto mode : {SteadyStateMode::Projected, SteadyStateMode::FixedHorizon, SteadyStateMode::Residual}) {
        SteadyStateOptions opts;
        opts.mode = mode;
        opts.horizon = 400.0;
        const auto rho = steady_state(L, s, opts);
        CHECK((rho.matrix() - direct.matrix()).cwiseAbs().maxCoeff() < 1e-8);
    }
    const auto ts = evolve(L, DensityMatrix::uniform_ground(s), 200.0, 1e-10, {200.0});
    CHECK((ts.rho.back().matrix() - direct.matrix()).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("evolution preserves trace, Hermiticity and positivity")
{
    const LevelScheme s(j(2), j(3));
    FieldConfig f = pump(5.0, 1.5);
    f.omega_pr = 1.0;
    const Liouvillian L(build_hamiltonian(s, f), build_collapse(s));
    const auto ts = evolve(L, DensityMatrix::uniform_ground(s), 20.0, 1e-10);
    for (const auto& rho : ts.rho) {
        CHECK(rho.trace_error() < 1e-10);
        CHECK(rho.hermiticity_error() < 1e-12);
        CHECK(rho.min_eigenvalue() >= -1e-8);
    }
}

TEST_CASE("Liouvillian spectrum lies in the closed left half plane")
{
    const LevelScheme s(j(1), j(2));
    const Liouvillian L = pumped(s, 2.0, 1.0);
    const Eigen::VectorXcd ev = Eigen::ComplexEigenSolver<Matrix>(L.superop()).eigenvalues();
    CHECK(ev.real().maxCoeff() <= 1e-10);
}

TEST_CASE("saturation parameter is a bijection at fixed detuning")
{
    for (double dp : {0.0, 0.75, 10.0})
        for (double S : {0.1, 4.0, 36.0}) {
            const double omega = rabi_from_saturation(S, dp);
            CHECK(saturation_parameter(omega, dp) == doctest::Approx(S).epsilon(1e-14));
        }
    CHECK(rabi_from_saturation(36.0, 0.0) == doctest::Approx(3.0).epsilon(1e-15));
}

TEST_CASE("excited population grows monotonically with S")
{
    const LevelScheme s(j(1), j(2));
    double previous = -1.0;
    for (double S : {0.1, 0.5, 1.0, 4.0, 10.0, 36.0, 100.0}) {
        const auto pt = saturation_point(s, 0.0, S);
        double excited = 0.0;
        for (std::size_t e : s.excited_indices())
            excited += pt.populations(static_cast<Eigen::Index>(e));
        CHECK(excited > previous);
        previous = excited;
    }
}

TEST_CASE("S = 36 steady state shows the |m_g| = 1 to m_e = 0 inversion")
{
    const LevelScheme s(j(1), j(2));
    const auto pt = saturation_point(s, 0.0, 36.0);
    const RealVector& p = pt.populations;
    // Frozen from the independent Python prototype of the same master
    // equation; the populations are (22, 18, 63, 54, 22, 18) / 197.
    CHECK(p(1) == doctest::Approx(22.0 / 197).epsilon(1e-10));
    CHECK(p(2) == doctest::Approx(18.0 / 197).epsilon(1e-10));
    CHECK(p(3) == doctest::Approx(63.0 / 197).epsilon(1e-10));
    CHECK(p(4) == doctest::Approx(54.0 / 197).epsilon(1e-10));
    CHECK(p(5) == doctest::Approx(22.0 / 197).epsilon(1e-10));
    CHECK(p(6) == doctest::Approx(18.0 / 197).epsilon(1e-10));
    CHECK(pt.inversion > 0);
    CHECK(std::abs(p(0)) < 1e-10);
    CHECK(std::abs(p(7)) < 1e-10);
    CHECK(p(3) > p(4)); // no inversion between m_g = 0 and m_e = 0
}
