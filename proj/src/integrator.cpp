#include "mirrorless/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mirrorless::integrator {

namespace {

// Dormand & Prince (1980) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
// Continuous extension.
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

constexpr double kSafety = 0.9;
constexpr double kFacMin = 0.2;
constexpr double kFacMax = 10.0;

} // namespace

Complex interpolate(const std::array<Complex, 5>& c, double th)
{
    const double th1 = 1.0 - th;
    return c[0] + th * (c[1] + th1 * (c[2] + th * (c[3] + th1 * c[4])));
}

Vector DenseStep::at(double t) const
{
    const double th = (t - t0) / h;
    const double th1 = 1.0 - th;
    return *r[0] + th * (*r[1] + th1 * (*r[2] + th * (*r[3] + th1 * *r[4])));
}

std::array<Complex, 5> DenseStep::project_coefficients(const Eigen::RowVectorXcd& p) const
{
    std::array<Complex, 5> c;
    for (int k = 0; k < 5; ++k)
        c[k] = (p * *r[k])(0);
    return c;
}

Complex DenseStep::project(const Eigen::RowVectorXcd& p, double t) const
{
    return interpolate(project_coefficients(p), (t - t0) / h);
}

DormandPrince::DormandPrince(Rhs rhs, StepControl control)
    : rhs_(std::move(rhs)), control_(control)
{
}

double DormandPrince::error_norm(const Vector& err, const Vector& y0, const Vector& y1) const
{
    double acc = 0.0;
    for (Eigen::Index i = 0; i < err.size(); ++i) {
        const double sc = control_.atol + control_.rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
        const double v = std::abs(err[i]) / sc;
        acc += v * v;
    }
    return std::sqrt(acc / double(std::max<Eigen::Index>(err.size(), 1)));
}

double DormandPrince::initial_step(double t0, const Vector& y, const Vector& f0, double span) const
{
    if (control_.h_initial > 0)
        return std::min(control_.h_initial, span);
    // Hairer, Nørsett & Wanner, Sec. II.4.
    double d0 = 0, d1n = 0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double s = control_.atol + control_.rtol * std::abs(y[i]);
        d0 += std::norm(y[i]) / (s * s);
        d1n += std::norm(f0[i]) / (s * s);
    }
    const double n = double(std::max<Eigen::Index>(y.size(), 1));
    d0 = std::sqrt(d0 / n);
    d1n = std::sqrt(d1n / n);
    double h0 = (d0 < 1e-5 || d1n < 1e-5) ? 1e-6 : 0.01 * d0 / d1n;
    h0 = std::min(h0, span);
    Vector y1 = y + h0 * f0;
    Vector f1(y.size());
    rhs_(t0 + h0, y1, f1);
    double d2 = 0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double s = control_.atol + control_.rtol * std::abs(y[i]);
        d2 += std::norm(f1[i] - f0[i]) / (s * s);
    }
    d2 = std::sqrt(d2 / n) / h0;
    const double h1 = (std::max(d1n, d2) <= 1e-15) ? std::max(1e-6, h0 * 1e-3)
                                                     : std::pow(0.01 / std::max(d1n, d2), 0.2);
    return std::min({100 * h0, h1, span});
}

double DormandPrince::integrate(double t0, double t1, Vector& y, const Observer& observer)
{
    const Eigen::Index n = y.size();
    Vector k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n), err(n);
    Vector r1(n), r2(n), r3(n), r4(n), r5(n);
    DenseStep dense;
    dense.r = {&r1, &r2, &r3, &r4, &r5};

    double t = t0;
    if (t1 <= t0)
        return t0;
    rhs_(t, y, k1);
    ++stats_.rhs_evaluations;
    double h = initial_step(t, y, k1, t1 - t0);
    if (control_.h_max > 0)
        h = std::min(h, control_.h_max);
    bool last_rejected = false;
    std::size_t steps = 0;

    while (t < t1) {
        if (++steps > control_.max_steps)
            throw IntegrationFailure("maximum number of steps exceeded", t);
        if (h < control_.h_min * std::max(1.0, std::abs(t)))
            throw IntegrationFailure("step size underflow at t = " + std::to_string(t), t);
        bool final_step = false;
        if (t + h >= t1) {
            h = t1 - t;
            final_step = true;
        }

        ytmp = y + h * a21 * k1;
        rhs_(t + c2 * h, ytmp, k2);
        ytmp = y + h * (a31 * k1 + a32 * k2);
        rhs_(t + c3 * h, ytmp, k3);
        ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
        rhs_(t + c4 * h, ytmp, k4);
        ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        rhs_(t + c5 * h, ytmp, k5);
        ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        rhs_(t + h, ytmp, k6);
        ynew = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
        rhs_(t + h, ynew, k7);
        stats_.rhs_evaluations += 6;

        err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        const double en = error_norm(err, y, ynew);
        if (!std::isfinite(en))
            throw IntegrationFailure("non-finite state at t = " + std::to_string(t), t);

        if (en <= 1.0) {
            r1 = y;
            r2 = ynew - y;
            r3 = h * k1 - r2;
            r4 = r2 - h * k7 - r3;
            r5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
            dense.t0 = t;
            dense.h = h;

            t = final_step ? t1 : t + h;
            y.swap(ynew);
            k1.swap(k7);
            ++stats_.accepted;

            if (observer) {
                const StepAction act = observer(dense, y);
                if (act == StepAction::Stop)
                    return t;
                if (act == StepAction::ContinueModified) {
                    rhs_(t, y, k1);
                    ++stats_.rhs_evaluations;
                }
            }

            double fac = (en == 0.0) ? kFacMax : kSafety * std::pow(en, -0.2);
            fac = std::clamp(fac, kFacMin, kFacMax);
            if (last_rejected)
                fac = std::min(fac, 1.0);
            h *= fac;
            if (control_.h_max > 0)
                h = std::min(h, control_.h_max);
            last_rejected = false;
        } else {
            ++stats_.rejected;
            h *= std::max(kFacMin, kSafety * std::pow(en, -0.2));
            last_rejected = true;
        }
    }
    return t;
}

} // namespace mirrorless::integrator
