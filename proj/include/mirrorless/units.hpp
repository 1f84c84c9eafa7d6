#pragma once

// Minimal compile-time dimensional analysis over (mass, length, time).

#include <cmath>

namespace mirrorless::units {

template <int M, int L, int T>
struct Quantity {
    double value = 0.0;

    constexpr Quantity() = default;
    constexpr explicit Quantity(double v) : value(v) {}

    constexpr Quantity operator+(Quantity o) const { return Quantity(value + o.value); }
    constexpr Quantity operator-(Quantity o) const { return Quantity(value - o.value); }
    constexpr Quantity operator-() const { return Quantity(-value); }
};

template <int M1, int L1, int T1, int M2, int L2, int T2>
constexpr Quantity<M1 + M2, L1 + L2, T1 + T2> operator*(Quantity<M1, L1, T1> a, Quantity<M2, L2, T2> b)
{
    return Quantity<M1 + M2, L1 + L2, T1 + T2>(a.value * b.value);
}

template <int M1, int L1, int T1, int M2, int L2, int T2>
constexpr Quantity<M1 - M2, L1 - L2, T1 - T2> operator/(Quantity<M1, L1, T1> a, Quantity<M2, L2, T2> b)
{
    return Quantity<M1 - M2, L1 - L2, T1 - T2>(a.value / b.value);
}

template <int M, int L, int T>
constexpr Quantity<M, L, T> operator*(double s, Quantity<M, L, T> q)
{
    return Quantity<M, L, T>(s * q.value);
}

using Dimensionless = Quantity<0, 0, 0>;
using Length = Quantity<0, 1, 0>;
using Time = Quantity<0, 0, 1>;
using Rate = Quantity<0, 0, -1>;            // 1/s
using Energy = Quantity<1, 2, -2>;          // J
using NumberDensity = Quantity<0, -3, 0>;   // 1/m³
using InverseLength = Quantity<0, -1, 0>;   // 1/m
using Intensity = Quantity<1, 0, -3>;       // W/m²
using PowerDensity = Quantity<1, -1, -3>;   // W/m³

} // namespace mirrorless::units
