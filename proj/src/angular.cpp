#include "mirrorless/angular.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace mirrorless::angular {

namespace {

using boost::multiprecision::cpp_int;

cpp_int factorial(int n)
{
    if (n < 0)
        throw std::logic_error("factorial of negative argument");
    cpp_int result = 1;
    for (int i = 2; i <= n; ++i)
        result *= i;
    return result;
}

// Doubled sum/difference to plain integer; callers guarantee evenness.
int half_of(int twice)
{
    if (twice % 2 != 0)
        throw std::logic_error("odd doubled value where an integer was expected");
    return twice / 2;
}

bool same_character(AngMom j, AngMom m)
{
    return ((j.twice - m.twice) % 2) == 0;
}

int parity_sign(int n) { return (n % 2 == 0) ? 1 : -1; }

} // namespace

AngMom parse_angmom(const std::string& text)
{
    const auto slash = text.find('/');
    try {
        std::size_t used = 0;
        if (slash == std::string::npos) {
            const int v = std::stoi(text, &used);
            if (used != text.size())
                throw std::invalid_argument(text);
            return AngMom::integer(v);
        }
        const std::string num = text.substr(0, slash);
        const std::string den = text.substr(slash + 1);
        const int n = std::stoi(num, &used);
        if (used != num.size() || den != "2")
            throw std::invalid_argument(text);
        if (n % 2 == 0)
            throw std::invalid_argument(text);
        return AngMom{n};
    } catch (const std::exception&) {
        throw std::invalid_argument("not an integer or half-integer: '" + text + "'");
    }
}

std::string to_string(AngMom a)
{
    if (a.is_integer())
        return std::to_string(a.twice / 2);
    return std::to_string(a.twice) + "/2";
}

double SignedSqrt::value() const
{
    if (sign == 0)
        return 0.0;
    return sign * std::sqrt(static_cast<double>(square));
}

SignedSqrt wigner3j_exact(const ThreeJArgs& a)
{
    const AngMom js[3] = {a.j1, a.j2, a.j3};
    const AngMom ms[3] = {a.m1, a.m2, a.m3};
    for (int i = 0; i < 3; ++i) {
        if (js[i].twice < 0)
            throw std::invalid_argument("negative angular momentum in 3-j symbol");
        if (!same_character(js[i], ms[i]))
            throw std::invalid_argument("3-j argument m" + std::to_string(i + 1) +
                                        " does not match the integer character of j" +
                                        std::to_string(i + 1));
    }

    const SignedSqrt zero{0, 0};
    if (a.m1.twice + a.m2.twice + a.m3.twice != 0)
        return zero;
    for (int i = 0; i < 3; ++i)
        if (std::abs(ms[i].twice) > js[i].twice)
            return zero;
    const int J = a.j1.twice + a.j2.twice + a.j3.twice;
    if (J % 2 != 0)
        return zero;
    if (a.j3.twice < std::abs(a.j1.twice - a.j2.twice) || a.j3.twice > a.j1.twice + a.j2.twice)
        return zero;

    const int j1 = a.j1.twice, j2 = a.j2.twice, j3 = a.j3.twice;
    const int m1 = a.m1.twice, m2 = a.m2.twice, m3 = a.m3.twice;

    const Rational triangle(factorial(half_of(j1 + j2 - j3)) * factorial(half_of(j1 - j2 + j3)) *
                                factorial(half_of(-j1 + j2 + j3)),
                            factorial(half_of(J) + 1));
    const cpp_int projections = factorial(half_of(j1 + m1)) * factorial(half_of(j1 - m1)) *
                                factorial(half_of(j2 + m2)) * factorial(half_of(j2 - m2)) *
                                factorial(half_of(j3 + m3)) * factorial(half_of(j3 - m3));

    const int k_min = std::max({0, half_of(j2 - j3 - m1), half_of(j1 - j3 + m2)});
    const int k_max = std::min({half_of(j1 + j2 - j3), half_of(j1 - m1), half_of(j2 + m2)});

    Rational sum = 0;
    for (int k = k_min; k <= k_max; ++k) {
        const cpp_int denom = factorial(k) * factorial(half_of(j3 - j2 + m1) + k) *
                              factorial(half_of(j3 - j1 - m2) + k) *
                              factorial(half_of(j1 + j2 - j3) - k) * factorial(half_of(j1 - m1) - k) *
                              factorial(half_of(j2 + m2) - k);
        sum += Rational(parity_sign(k), denom);
    }
    if (sum == 0)
        return zero;

    const int phase = parity_sign(half_of(j1 - j2 - m3));
    SignedSqrt out;
    out.sign = phase * (sum > 0 ? 1 : -1);
    out.square = triangle * Rational(projections) * sum * sum;
    return out;
}

double wigner3j(const ThreeJArgs& args) { return wigner3j_exact(args).value(); }

SignedSqrt dipole_weight_exact(AngMom Fg, AngMom mg, AngMom Fe, AngMom me, int q)
{
    if (q < -1 || q > 1)
        throw std::invalid_argument("spherical index q must be -1, 0 or +1");
    if (!same_character(Fg, mg) || !same_character(Fe, me))
        throw std::invalid_argument("projection does not match angular momentum character");
    const AngMom qq = AngMom::integer(q);
    if (me.twice + qq.twice - mg.twice != 0)
        return {0, 0};
    const SignedSqrt tj = wigner3j_exact({Fe, AngMom::integer(1), Fg, me, qq, -mg});
    if (tj.sign == 0)
        return {0, 0};
    // Fe - 1 + mg is an integer whenever Fe and Fg share character.
    const int phase = parity_sign(half_of(Fe.twice - 2 + mg.twice));
    return {phase * tj.sign, tj.square * (Fg.twice + 1)};
}

double dipole_weight(AngMom Fg, AngMom mg, AngMom Fe, AngMom me, int q)
{
    return dipole_weight_exact(Fg, mg, Fe, me, q).value();
}

void check_dipole_pair(AngMom Fg, AngMom Fe)
{
    if (Fg.twice < 0 || Fe.twice < 0)
        throw std::invalid_argument("angular momenta must be nonnegative");
    if ((Fg.twice - Fe.twice) % 2 != 0)
        throw std::invalid_argument("F_g and F_e must both be integer or both half-integer");
    if (std::abs(Fg.twice - Fe.twice) > 2)
        throw std::invalid_argument("dipole transition requires |F_g - F_e| <= 1");
    if (Fg.twice + Fe.twice < 2)
        throw std::invalid_argument("dipole transition requires F_g + F_e >= 1");
}

BranchingTable::BranchingTable(AngMom Fg, AngMom Fe, std::map<Key, Rational> entries)
    : Fg_(Fg), Fe_(Fe), entries_(std::move(entries))
{
}

Rational BranchingTable::exact(AngMom me, AngMom mg) const
{
    const auto it = entries_.find({me, mg});
    return it == entries_.end() ? Rational(0) : it->second;
}

double BranchingTable::operator()(AngMom me, AngMom mg) const
{
    return static_cast<double>(exact(me, mg));
}

BranchingTable branching_ratios(AngMom Fg, AngMom Fe)
{
    check_dipole_pair(Fg, Fe);
    std::map<BranchingTable::Key, Rational> entries;
    for (int me = -Fe.twice; me <= Fe.twice; me += 2) {
        std::vector<std::pair<AngMom, Rational>> row;
        Rational total = 0;
        for (int mg = -Fg.twice; mg <= Fg.twice; mg += 2) {
            const int q2 = mg - me;
            if (std::abs(q2) > 2)
                continue;
            const SignedSqrt w = dipole_weight_exact(Fg, AngMom{mg}, Fe, AngMom{me}, q2 / 2);
            if (w.sign == 0)
                continue;
            row.emplace_back(AngMom{mg}, w.square);
            total += w.square;
        }
        for (const auto& [mg, strength] : row)
            entries.emplace(BranchingTable::Key{AngMom{me}, mg}, strength / total);
    }
    return BranchingTable(Fg, Fe, std::move(entries));
}

} // namespace mirrorless::angular
