#pragma once

// Angular-momentum algebra for F_g -> F_e dipole transitions.
//
// Half-integers are carried as doubled integers (AngMom{3} is 3/2) so that
// selection rules are exact integer comparisons.

#include <boost/multiprecision/cpp_int.hpp>

#include <compare>
#include <map>
#include <string>
#include <utility>

namespace mirrorless::angular {

using Rational = boost::multiprecision::cpp_rational;

/// A half-integer quantum number stored as twice its value.
struct AngMom {
    int twice = 0;

    static constexpr AngMom integer(int v) { return AngMom{2 * v}; }
    constexpr double value() const { return 0.5 * twice; }
    constexpr bool is_integer() const { return twice % 2 == 0; }
    auto operator<=>(const AngMom&) const = default;
};

constexpr AngMom operator-(AngMom a) { return AngMom{-a.twice}; }

/// Parses "2", "-1", "3/2" or "-1/2".
AngMom parse_angmom(const std::string& text);
std::string to_string(AngMom a);

/// Arguments of a Wigner 3-j symbol (j1 j2 j3; m1 m2 m3).
struct ThreeJArgs {
    AngMom j1, j2, j3;
    AngMom m1, m2, m3;
};

/// An exact value of the form sign * sqrt(square).
struct SignedSqrt {
    int sign = 0;    // -1, 0 or +1
    Rational square; // nonnegative

    double value() const;
};

/// Exact 3-j symbol from the Racah single-sum formula, evaluated with integer
/// factorials. Returns zero when m1+m2+m3 != 0, the triangle rule fails or
/// some |m_i| > j_i.
/// Throws std::invalid_argument when some m_i and j_i differ in
/// integer/half-integer character, or a j is negative.
SignedSqrt wigner3j_exact(const ThreeJArgs& args);

double wigner3j(const ThreeJArgs& args);

/// <F_g m_g| e r_q |F_e m_e> / <F_g||e r||F_e>
///   = (-1)^(F_e - 1 + m_g) sqrt(2 F_g + 1) (F_e 1 F_g; m_e q -m_g).
/// Nonzero only for m_e + q - m_g = 0.
SignedSqrt dipole_weight_exact(AngMom Fg, AngMom mg, AngMom Fe, AngMom me, int q);
double dipole_weight(AngMom Fg, AngMom mg, AngMom Fe, AngMom me, int q);

/// Validates an F_g -> F_e dipole pair: |F_g - F_e| <= 1, F_g + F_e >= 1 and
/// matching integer character. Throws std::invalid_argument otherwise.
void check_dipole_pair(AngMom Fg, AngMom Fe);

/// Spontaneous-decay branching ratios within the modeled F_g/F_e pair, keyed
/// by (m_e, m_g). Each excited row sums to one.
class BranchingTable {
public:
    using Key = std::pair<AngMom, AngMom>; // (m_e, m_g)

    BranchingTable(AngMom Fg, AngMom Fe, std::map<Key, Rational> entries);

    AngMom ground_F() const { return Fg_; }
    AngMom excited_F() const { return Fe_; }

    /// Zero for forbidden pairs.
    Rational exact(AngMom me, AngMom mg) const;
    double operator()(AngMom me, AngMom mg) const;

    const std::map<Key, Rational>& entries() const { return entries_; }

private:
    AngMom Fg_, Fe_;
    std::map<Key, Rational> entries_;
};

BranchingTable branching_ratios(AngMom Fg, AngMom Fe);

} // namespace mirrorless::angular
