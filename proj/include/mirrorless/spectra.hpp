#pragma once

// Weak-probe absorption spectra. Two independent routes:
//  (a) quantum regression: two-time dipole correlations propagated under the
//      pump-only Liouvillian and Fourier transformed;
//  (b) explicit weak probe: Floquet harmonics of the pump-frame density matrix
//      with a small but finite probe, solved self-consistently.
// Spectra are normalized so an undriven atom with equal ground populations
// peaks at 1; negative values mean gain. The scan variable is
// δ = ω_p − ω_pr in units of Γ.

#include "mirrorless/common.hpp"
#include "mirrorless/dynamics.hpp"
#include "mirrorless/levels.hpp"

#include <array>
#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

namespace mirrorless::spectra {

enum class Polarization { Parallel, Perpendicular };

struct DipoleOperator {
    Polarization polarization = Polarization::Perpendicular;
    Matrix d_plus; // raising part, nonzero only on (e, g) entries

    Matrix d_minus() const { return d_plus.adjoint(); }
};

DipoleOperator make_dipole(const levels::LevelScheme& scheme, Polarization polarization,
                           levels::RabiConvention convention = levels::RabiConvention::ExcitedReduced);

/// Peak of the undriven absorption line for equal ground populations:
/// 2 Σ_g p_g Σ_e |d⁺_eg|².
double undriven_peak(const levels::LevelScheme& scheme, const DipoleOperator& dipole);

struct SpectrumResult {
    std::vector<double> delta;
    std::vector<double> absorption;
    levels::FieldConfig fields;
    /// max |Im g| / max |g| from the independently propagated reverse
    /// correlator; absent unless requested.
    std::optional<double> imag_residue;
    double window = 0.0;      // correlation time window actually used (1/Γ)
    double sample_step = 0.0; // quadrature spacing (1/Γ)
};

class WindowExhausted : public NumericalError {
public:
    WindowExhausted(double window, double achieved);
    double window() const { return window_; }
    double achieved_decay() const { return achieved_; }

private:
    double window_;
    double achieved_;
};

struct CorrelationOptions {
    double tol = 1e-10;             // integrator tolerance
    double decay_threshold = 1e-8;  // stop when ‖X(τ)‖ < threshold · ‖X(0)‖
    double max_window = 2e5;        // give up beyond this τ
    double frequency_spread = 0.0;  // eigenvalue spread of the pump-dressed H
    double normalization = 1.0;     // divide the spectrum by this
    bool reality_check = false;
    Execution execution = Execution::Serial;
};

/// Sampled commutator correlation C(τ) = Tr[d⁻ e^{Lτ}(d⁺ρ − ρd⁺)] on a uniform grid.
struct CorrelationTrace {
    double step = 0.0;
    std::vector<Complex> c;                 // C(k·step)
    std::array<Complex, 3> derivatives{};   // C', C'', C''' at τ = 0
    std::vector<Complex> reverse;           // D(τ) = Tr[d⁺ e^{Lτ}(ρd⁻ − d⁻ρ)], optional
    std::array<Complex, 3> reverse_derivatives{};
    double achieved_decay = 0.0;
};

/// Maximum sample spacing for a given spread and largest |δ|.
double sample_step(double frequency_spread, double max_abs_delta);

CorrelationTrace correlation_trace(const dynamics::Liouvillian& L, const dynamics::DensityMatrix& rho_ss,
                                   const DipoleOperator& dipole, double step, const CorrelationOptions& options);

/// ∫₀^∞ e^{iντ} C(τ) dτ by the trapezoid rule with Euler–Maclaurin endpoint
/// corrections through h⁴. The samples must have decayed at the far end.
Complex fourier_half_line(const std::vector<Complex>& c, const std::array<Complex, 3>& derivatives,
                          double step, double nu);

SpectrumResult correlation_spectrum(const dynamics::Liouvillian& L, const dynamics::DensityMatrix& rho_ss,
                                    const DipoleOperator& dipole, const std::vector<double>& delta_grid,
                                    const CorrelationOptions& options);

/// Regression spectrum for a pump-only configuration (fields.omega_pr ignored).
SpectrumResult probe_spectrum(const levels::LevelScheme& scheme, const levels::FieldConfig& fields,
                              Polarization polarization, const std::vector<double>& delta_grid,
                              CorrelationOptions options = {},
                              levels::RabiConvention convention = levels::RabiConvention::ExcitedReduced);

struct WeakProbeOptions {
    double probe_ratio = 1e-3; // Ω_pr = probe_ratio · Ω_p
    int harmonics = 2;
    double tol = 1e-12;        // Gauss–Seidel stopping criterion on harmonic updates
    int max_sweeps = 100;
    levels::RabiConvention convention = levels::RabiConvention::ExcitedReduced;
};

/// Weak-probe solver for one pump configuration, reusable across δ.
class WeakProbe {
public:
    WeakProbe(const levels::LevelScheme& scheme, const levels::FieldConfig& pump, Polarization polarization,
              WeakProbeOptions options = {});

    /// Normalized absorption at offset δ for probe Rabi frequency omega_pr
    /// (defaults to probe_ratio · Ω_p).
    double absorption(double delta, std::optional<double> omega_pr = std::nullopt) const;

    /// Harmonics ρ_0 … ρ_N at offset δ, for diagnostics.
    std::vector<Matrix> harmonics(double delta, double omega_pr) const;

    const dynamics::DensityMatrix& pump_steady_state() const { return rho_ss_; }
    double probe_rabi() const { return omega_pr_; }

private:
    std::vector<Matrix> solve(double delta, double omega_pr) const;
    double rate(const std::vector<Matrix>& rho, double omega_pr) const;

    Eigen::Index dim_;
    Matrix L0_;
    Matrix P_;
    std::vector<std::size_t> excited_;
    dynamics::DensityMatrix rho_ss_;
    double omega_pr_;
    double norm_;
    WeakProbeOptions options_;
    Eigen::CompleteOrthogonalDecomposition<Matrix> bordered_;
};

struct PerpendicularSpectrum {
    SpectrumResult regression; // route (a)
    SpectrumResult weak_probe; // route (b)
    /// max relative change of route (b) when Ω_pr is halved, over points with
    /// |absorption| above 1e-3 of the peak.
    double linearity_change = 0.0;
};

struct PerpendicularOptions {
    CorrelationOptions correlation;
    WeakProbeOptions weak_probe;
    bool check_linearity = true;
};

PerpendicularSpectrum perpendicular_gain_spectrum(const levels::LevelScheme& scheme,
                                                  const levels::FieldConfig& fields,
                                                  const std::vector<double>& delta_grid,
                                                  const PerpendicularOptions& options = {});

struct GainWindow {
    double lower = 0.0; // δ where the spectrum crosses below zero
    double upper = 0.0;
    double center() const { return 0.5 * (lower + upper); }
    double depth = 0.0;        // most negative value inside
    double delta_at_min = 0.0;
};

/// Contiguous δ intervals with negative absorption; crossings are linearly
/// interpolated. Values above −floor are treated as zero.
std::vector<GainWindow> gain_windows(const std::vector<double>& delta, const std::vector<double>& absorption,
                                     double floor = 0.0);

struct MinAbsorptionPoint {
    double omega_p = 0.0;
    double min_absorption = 0.0;
    double delta_at_min = 0.0;
};

struct MinAbsorptionScan {
    std::vector<MinAbsorptionPoint> points;
    /// Ω_p intervals (grid endpoints) whose minima are negative.
    std::vector<std::pair<double, double>> gain_ranges;
};

struct MinAbsorptionOptions {
    WeakProbeOptions weak_probe;
    bool refine = true; // Brent refinement around the grid minimum
    Execution execution = Execution::Serial;
};

/// Minimum over δ of the perpendicular weak-probe spectrum for each Ω_p.
MinAbsorptionScan min_absorption_scan(const levels::LevelScheme& scheme, double delta_p,
                                      const std::vector<double>& omega_p_grid,
                                      const std::vector<double>& delta_grid,
                                      const MinAbsorptionOptions& options = {});

struct PairSideband {
    std::size_t g = 0;
    std::size_t e = 0;
    double rabi = 0.0;              // Ω_ij
    double generalized_rabi = 0.0;  // √(Ω_ij² + Δ²)
    double absorption_offset = 0.0; // δ of the absorptive sideband
    double gain_offset = 0.0;       // δ of the three-photon partner, from ω_G = 2ω_p − ω_A
};

struct DressedLadder {
    RealVector eigenvalues;
    std::vector<PairSideband> pairs;
};

/// Eigenvalues of a pump-only Hamiltonian and the Mollow sidebands of each
/// coupled two-level pair. The absorptive sideband sits at
/// δ_A = −sign(Δ_p)·√(Ω_ij² + Δ_p²); with Δ_p = 0 it is reported at −Ω_ij and
/// the spectrum is symmetric.
DressedLadder dressed_ladder(const levels::LevelScheme& scheme, const Matrix& H_pump_only);

} // namespace mirrorless::spectra
