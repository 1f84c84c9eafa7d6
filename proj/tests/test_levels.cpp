#include "mirrorless/angular.hpp"
#include "mirrorless/levels.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>

using namespace mirrorless;
using namespace mirrorless::levels;
using angular::AngMom;

namespace {

AngMom j(int v) { return AngMom::integer(v); }

FieldConfig pump(double omega_p, double delta_p, double omega_pr = 0.0)
{
    FieldConfig f;
    f.omega_p = omega_p;
    f.delta_p = delta_p;
    f.omega_pr = omega_pr;
    f.delta_pr = delta_p;
    return f;
}

} // namespace

TEST_CASE("F=1 -> F'=2 ordering follows the level diagram numbering")
{
    const LevelScheme s(j(1), j(2));
    REQUIRE(s.dimension() == 8);
    const char* expected[] = {"e(-2)", "g(-1)", "e(-1)", "g(0)", "e(0)", "g(1)", "e(1)", "e(2)"};
    for (std::size_t i = 0; i < 8; ++i)
        CHECK(label(s.sublevel(i)) == expected[i]);
    CHECK(s.ground_indices() == std::vector<std::size_t>{1, 3, 5});
    CHECK(s.excited_indices() == std::vector<std::size_t>{0, 2, 4, 6, 7});
    CHECK(s.index(Manifold::Excited, j(0)) == 4);
    CHECK_FALSE(s.find(Manifold::Ground, j(2)).has_value());
    CHECK_THROWS_AS(s.index(Manifold::Ground, j(2)), std::out_of_range);
    CHECK(s.mirror_permutation() == std::vector<std::size_t>{7, 5, 6, 3, 4, 1, 2, 0});
    CHECK(LevelScheme(j(2), j(3)).dimension() == 12);
}

TEST_CASE("pump and probe couple only their selection-rule pairs")
{
    const LevelScheme s(j(1), j(2));
    const Matrix Hp = build_hamiltonian(s, pump(2.0, 0.5));
    const Matrix Hx = build_hamiltonian(s, pump(0.0, 0.5, 2.0));
    CHECK((Hp - Hp.adjoint()).norm() == 0.0);
    CHECK((Hx - Hx.adjoint()).norm() == 0.0);
    for (std::size_t a = 0; a < 8; ++a)
        for (std::size_t b = 0; b < 8; ++b) {
            if (a == b)
                continue;
            const auto ia = static_cast<Eigen::Index>(a), ib = static_cast<Eigen::Index>(b);
            const bool cross = s.is_excited(a) != s.is_excited(b);
            const int dm = (s.sublevel(a).m.twice - s.sublevel(b).m.twice) / 2;
            const bool pi = cross && dm == 0;
            const bool sigma = cross && std::abs(dm) == 1;
            CHECK((Hp(ia, ib) != 0.0) == pi);
            CHECK((Hx(ia, ib) != 0.0) == sigma);
        }
    // π couplings are real; σ couplings are imaginary with the i(σ₋ + σ₊)/√2 phase.
    const Matrix detuning = Matrix(Hx.diagonal().asDiagonal());
    CHECK(Hp.imag().norm() == 0.0);
    CHECK((Hx - detuning).real().norm() == 0.0);
    // |m_e| = 2 has no π partner: e(-2) and e(+2) are dark to the pump.
    CHECK(Hp.row(0).norm() == doctest::Approx(0.5));
    CHECK(Hp(0, 0) == Complex(0.5));
}

TEST_CASE("pump couplings are the signed Rabi weights")
{
    const LevelScheme s(j(1), j(2));
    const Matrix H = build_hamiltonian(s, pump(1.0, 0.0));
    // Ω·√(5/3)·w with w² = (2/5, 3/10) for m = 0, ±1 → squared couplings 2/3, 1/2.
    CHECK(std::norm(2.0 * H(3, 4)) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    CHECK(std::norm(2.0 * H(1, 2)) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(std::norm(2.0 * H(5, 6)) == doctest::Approx(0.5).epsilon(1e-14));
    // Gauge: each excited π coupling is positive.
    CHECK(H(3, 4).real() > 0);
    CHECK(H(1, 2).real() > 0);
    CHECK(H(5, 6).real() > 0);

    const Matrix Hg = build_hamiltonian(s, pump(1.0, 0.0), {RabiConvention::GroundReduced, RotatingFrame::Pump});
    CHECK(std::norm(2.0 * Hg(3, 4)) == doctest::Approx(2.0 / 5.0).epsilon(1e-14));
}

TEST_CASE("mirror symmetry of the pump Hamiltonian and the collapse rates")
{
    for (const auto& [Fg, Fe] : {std::pair{j(1), j(2)}, std::pair{j(2), j(3)}}) {
        const LevelScheme s(Fg, Fe);
        const auto perm = s.mirror_permutation();
        const Matrix H = build_hamiltonian(s, pump(1.7, 0.4));
        const Matrix R = build_collapse(s).total_rate();
        for (std::size_t a = 0; a < perm.size(); ++a)
            for (std::size_t b = 0; b < perm.size(); ++b) {
                const auto ia = static_cast<Eigen::Index>(a), ib = static_cast<Eigen::Index>(b);
                const auto pa = static_cast<Eigen::Index>(perm[a]), pb = static_cast<Eigen::Index>(perm[b]);
                CHECK(std::abs(H(ia, ib) - H(pa, pb)) < 1e-15);
                CHECK(std::abs(R(ia, ib) - R(pa, pb)) < 1e-15);
            }
    }
}

TEST_CASE("collapse operators carry the branching ratios")
{
    const LevelScheme s(j(1), j(2));
    const auto c = build_collapse(s);
    const Matrix R = c.total_rate();
    const double diag[] = {1, 0, 1, 0, 1, 0, 1, 1};
    for (Eigen::Index i = 0; i < 8; ++i)
        CHECK(R(i, i).real() == doctest::Approx(diag[i]).epsilon(1e-15).scale(1.0));
    CHECK((R - Matrix(R.diagonal().asDiagonal())).norm() < 1e-15);

    const auto b = angular::branching_ratios(j(1), j(2));
    for (const auto& [key, ratio] : b.entries()) {
        const auto e = static_cast<Eigen::Index>(s.index(Manifold::Excited, key.first));
        const auto g = static_cast<Eigen::Index>(s.index(Manifold::Ground, key.second));
        const int k = key.first == key.second ? 0 : (key.second.twice < key.first.twice ? 1 : 2);
        CHECK(std::norm(c.lowering[static_cast<std::size_t>(k)](g, e)) ==
              doctest::Approx(static_cast<double>(ratio)).epsilon(1e-14));
    }
}

TEST_CASE("a single π pair diagonalizes like a two-level atom")
{
    // F=0 -> F'=1: only g(0)-e(0) is pumped, with coupling Ω·w·√3 = Ω.
    const LevelScheme s(j(0), j(1));
    const double omega = 2.3, delta = 0.8;
    const Matrix H = build_hamiltonian(s, pump(omega, delta));
    const auto g = static_cast<Eigen::Index>(s.index(Manifold::Ground, j(0)));
    const auto e = static_cast<Eigen::Index>(s.index(Manifold::Excited, j(0)));
    Eigen::Matrix2cd block;
    block << H(g, g), H(g, e), H(e, g), H(e, e);
    const Eigen::Vector2d ev = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd>(block).eigenvalues();
    const double root = std::sqrt(omega * omega + delta * delta);
    CHECK(ev(0) == doctest::Approx(0.5 * (delta - root)).epsilon(1e-14));
    CHECK(ev(1) == doctest::Approx(0.5 * (delta + root)).epsilon(1e-14));
}

TEST_CASE("rotating frames and field validation")
{
    const LevelScheme s(j(1), j(2));
    FieldConfig f = pump(1.0, 0.5, 0.1);
    f.delta_pr = 0.7;
    CHECK_THROWS_AS(build_hamiltonian(s, f), std::invalid_argument);
    const Matrix P = build_hamiltonian(s, f, {RabiConvention::ExcitedReduced, RotatingFrame::Printed});
    CHECK(P(0, 0).real() == doctest::Approx(0.7));       // no π partner
    CHECK(P(4, 4).real() == doctest::Approx(0.5 + 0.7)); // π coupled
    f.omega_p = -1.0;
    CHECK_THROWS_AS(f.validate(), std::invalid_argument);
    CHECK_THROWS_AS(LevelScheme(j(1), j(3)), std::invalid_argument);
}
