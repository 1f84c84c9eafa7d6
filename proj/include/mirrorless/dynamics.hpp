#pragma once

// Lindblad dynamics over a level scheme: superoperator construction, time
// evolution, steady states and the saturation/inversion study.

#include "mirrorless/common.hpp"
#include "mirrorless/integrator.hpp"
#include "mirrorless/levels.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace mirrorless::dynamics {

/// Column-stacking vectorization: vec(A X B) = (Bᵀ ⊗ A) vec(X).
Vector vec(const Matrix& m);
Matrix unvec(const Vector& v, Eigen::Index dim);

class DensityMatrix {
public:
    DensityMatrix() = default;
    explicit DensityMatrix(Matrix rho);

    /// Equal populations across the ground sublevels.
    static DensityMatrix uniform_ground(const levels::LevelScheme& scheme);
    /// All population in sublevel i.
    static DensityMatrix pure_state(std::size_t dim, std::size_t i);

    const Matrix& matrix() const { return rho_; }
    Eigen::Index dim() const { return rho_.rows(); }
    Complex operator()(std::size_t i, std::size_t j) const { return rho_(i, j); }

    double trace_error() const;       // |Tr ρ − 1|
    double hermiticity_error() const; // max |ρ − ρ†|
    double min_eigenvalue() const;    // of the Hermitian part
    RealVector populations() const;

    /// Throws NumericalError when any invariant exceeds its tolerance.
    void check(double trace_tol = 1e-10, double herm_tol = 1e-12, double eig_tol = 1e-8) const;

private:
    Matrix rho_;
};

class Liouvillian {
public:
    /// dρ/dt = −i[H, ρ] + γ Σ_k (c_k ρ c_k† − ½{c_k† c_k, ρ}).
    /// Throws std::invalid_argument on dimension mismatch.
    Liouvillian(const Matrix& H, const levels::CollapseChannels& channels, double gamma = 1.0);
    Liouvillian(Matrix superop, Eigen::Index dim);

    const Matrix& superop() const { return L_; }
    Eigen::Index dim() const { return dim_; }
    double gamma() const { return gamma_; }

    Vector apply(const Vector& x) const { return L_ * x; }
    Matrix apply(const Matrix& rho) const;

    /// max |vec(I)ᵀ L|, zero for a trace-preserving generator.
    double trace_row_residual() const;

private:
    Matrix L_;
    Eigen::Index dim_ = 0;
    double gamma_ = 1.0;
};

Liouvillian build_liouvillian(const Matrix& H, const levels::CollapseChannels& channels,
                              double gamma = 1.0);

struct TimeSeries {
    std::vector<double> t;
    std::vector<DensityMatrix> rho;
    integrator::Stats stats;
};

/// Integrates dρ/dt = L[ρ] from 0 to t_final with local error below tol.
/// The state is re-Hermitized after each accepted step; the trace is left
/// alone. Samples are taken at sample_times (dense output) or, if that is
/// empty, at every accepted step. Throws integrator::IntegrationFailure.
TimeSeries evolve(const Liouvillian& L, const DensityMatrix& rho0, double t_final, double tol = 1e-10,
                  const std::vector<double>& sample_times = {});

class DegenerateSteadyState : public NumericalError {
public:
    explicit DegenerateSteadyState(std::size_t null_dim);
    std::size_t null_dimension() const { return null_dim_; }

private:
    std::size_t null_dim_;
};

/// Number of singular values of L below tol · max(1, σ_max).
std::size_t null_space_dimension(const Liouvillian& L, double tol = 1e-9);

enum class SteadyStateMode {
    Direct,       // bordered least squares; degenerate null space is an error
    Projected,    // spectral projection of rho0 onto the null space
    FixedHorizon, // evolve rho0 to a fixed time
    Residual,     // evolve rho0 until ‖L[ρ]‖_max < residual_tol
};

struct SteadyStateOptions {
    SteadyStateMode mode = SteadyStateMode::Direct;
    std::optional<DensityMatrix> rho0; // uniform ground when absent
    double null_tol = 1e-9;
    double horizon = 200.0;
    double residual_tol = 1e-10;
    double max_time = 1e6;
    double tol = 1e-10;                // integrator tolerance; Residual mode uses at most residual_tol/100
};

/// Throws DegenerateSteadyState in Direct mode when the null space is not
/// one-dimensional.
DensityMatrix steady_state(const Liouvillian& L, const SteadyStateOptions& options = {});
DensityMatrix steady_state(const Liouvillian& L, const levels::LevelScheme& scheme,
                           const SteadyStateOptions& options);

/// Solves L x = b with vec(I)ᵀ x = trace in the least-squares sense.
Vector bordered_solve(const Matrix& L, const Vector& b, Complex trace, Eigen::Index dim);

double saturation_parameter(double omega_p, double delta_p);
double rabi_from_saturation(double S, double delta_p);

struct SaturationPoint {
    double S = 0.0;
    double omega_p = 0.0;
    RealVector populations;
    double inversion = 0.0; // ρ(m_e = 0) − ρ(m_g = +1)
};

struct InversionScan {
    std::vector<SaturationPoint> points;
    std::optional<double> threshold; // S* where the inversion changes sign
};

struct InversionOptions {
    levels::RabiConvention convention = levels::RabiConvention::ExcitedReduced;
    double threshold_rtol = 1e-3;
    Execution execution = Execution::Serial;
};

/// ρ(e, m=0) − ρ(g, m=+1). Throws std::invalid_argument when the scheme
/// lacks either sublevel.
double inversion(const levels::LevelScheme& scheme, const RealVector& populations);

SaturationPoint saturation_point(const levels::LevelScheme& scheme, double delta_p, double S,
                                 levels::RabiConvention convention = levels::RabiConvention::ExcitedReduced);

/// Pump-only steady states over S_grid and the inversion threshold located by
/// bisection in log S between the first bracketing grid points.
InversionScan inversion_scan(const levels::LevelScheme& scheme, double delta_p,
                             const std::vector<double>& S_grid, const InversionOptions& options = {});

} // namespace mirrorless::dynamics
