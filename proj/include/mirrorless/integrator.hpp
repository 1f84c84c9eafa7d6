#pragma once

// Dormand–Prince 5(4) with Hairer's continuous extension, for linear and
// nonlinear complex systems y' = f(t, y).

#include "mirrorless/common.hpp"

#include <array>
#include <cstddef>
#include <functional>

namespace mirrorless::integrator {

class IntegrationFailure : public NumericalError {
public:
    IntegrationFailure(const std::string& what, double t) : NumericalError(what), t_(t) {}
    double time() const { return t_; }

private:
    double t_;
};

using Rhs = std::function<void(double t, const Vector& y, Vector& dydt)>;

struct StepControl {
    double rtol = 1e-10;
    double atol = 1e-10;
    double h_initial = 0.0; // 0 picks a starting step from the local derivative
    double h_max = 0.0;     // 0 means unbounded
    double h_min = 1e-14;
    std::size_t max_steps = 50'000'000;
};

/// One accepted step [t0, t0 + h] with its interpolation coefficients:
///   y(t0 + θh) = r1 + θ(r2 + (1−θ)(r3 + θ(r4 + (1−θ) r5))),  θ ∈ [0, 1].
struct DenseStep {
    double t0 = 0.0;
    double h = 0.0;
    std::array<const Vector*, 5> r{};

    Vector at(double t) const;
    /// Evaluates p·y(t) without forming y(t). p is a row of coefficients.
    Complex project(const Eigen::RowVectorXcd& p, double t) const;
    /// p·r_k for k = 1..5, for repeated scalar interpolation.
    std::array<Complex, 5> project_coefficients(const Eigen::RowVectorXcd& p) const;
};

Complex interpolate(const std::array<Complex, 5>& c, double theta);

enum class StepAction {
    Continue,
    ContinueModified, // observer changed y; the FSAL stage is recomputed
    Stop,
};

using Observer = std::function<StepAction(const DenseStep& step, Vector& y)>;

struct Stats {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t rhs_evaluations = 0;
};

class DormandPrince {
public:
    DormandPrince(Rhs rhs, StepControl control = {});

    /// Advances y from t0 towards t1 and returns the final time reached
    /// (t1, or earlier if the observer stopped). Throws IntegrationFailure on
    /// step-size underflow, non-finite values or too many steps.
    double integrate(double t0, double t1, Vector& y, const Observer& observer = {});

    const Stats& stats() const { return stats_; }

private:
    double initial_step(double t0, const Vector& y, const Vector& f0, double span) const;
    double error_norm(const Vector& err, const Vector& y0, const Vector& y1) const;

    Rhs rhs_;
    StepControl control_;
    Stats stats_;
};

} // namespace mirrorless::integrator
