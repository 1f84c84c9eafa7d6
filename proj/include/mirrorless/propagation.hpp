#pragma once

// Transport of the pump (z) and orthogonal (x) intensities along a pencil
// cell:  dI/dy = −α I + (Φ/4π) n ħω Γ_src.
// SI units throughout; the atomic response is evaluated in units of Γ.

#include "mirrorless/common.hpp"
#include "mirrorless/dynamics.hpp"
#include "mirrorless/levels.hpp"

#include <functional>
#include <numbers>
#include <vector>

namespace mirrorless::propagation {

namespace constants {
inline constexpr double c = 299792458.0;
inline constexpr double hbar = 1.054571817e-34;
inline constexpr double epsilon0 = 8.8541878128e-12;
} // namespace constants

struct CellConfig {
    double length = 0.1;                                 // m
    double density = 1.16e16;                            // 1/m³
    double gamma = 2.0 * std::numbers::pi * 5.6e6;       // rad/s
    double wavelength = 780.241e-9;                      // m
    double beam_radius = 1e-3;                           // m, sets the default Φ
    double solid_angle = 0.0;                            // sr; 0 means πr²/L²
    int grid = 1000;                                     // spatial steps
    double saturation_intensity = 0.0;                   // W/m²; 0 means derived from the dipole

    double omega() const { return 2.0 * std::numbers::pi * constants::c / wavelength; }
    double photon_energy() const { return constants::hbar * omega(); }
    double capture_solid_angle() const;
    /// I_sat = ħω³Γ/(12πc²), the two-level value for the reduced dipole.
    double saturation() const;
    /// α0 = nωd²/(2cε₀ħΓ) = 3nλ²/(8π), the scale of α in 1/m.
    double alpha_scale() const;
    /// Throws ConfigError for nonpositive values or Φ > 4π.
    void validate() const;
};

/// Ω_p/Γ = √(I/(2 I_sat)) and its inverse.
double rabi_from_intensity(double intensity, const CellConfig& cell);
double intensity_from_rabi(double omega_p, const CellConfig& cell);

struct Coefficients {
    double alpha_z = 0.0; // 1/m, positive means attenuation
    double alpha_x = 0.0;
    double gamma_z = 0.0; // 1/s
    double gamma_x = 0.0;
};

/// Σ_e i[μ, ρ]_ee for the dimensionless dipole matrix μ.
double commutator_sum(const Matrix& mu, const Matrix& rho, const levels::LevelScheme& scheme);

/// 4(μ21 Re ρ12 + μ43 Re ρ34 + μ65 Re ρ56) with μ_ab the real amplitude of
/// the x dipole on that pair. Defined for F_g = 1 → F_e = 2 only.
double reduced_coherence_sum(const Matrix& rho, const levels::LevelScheme& scheme,
                             levels::RabiConvention convention = levels::RabiConvention::ExcitedReduced);

/// First-order response of the pump steady state to a co-rotating static
/// x field, per unit Ω_pr: solves L0 ρ' = i/2 [μ_x, ρ_ss] with Tr ρ' = 0.
Matrix static_probe_response(const dynamics::Liouvillian& L0, const Matrix& rho_ss, const Matrix& mu);

/// α_z from the pump steady state; α_x from the linear response to a weak x
/// field at the pump frequency, averaged over its phase relative to the pump
/// (in-phase and quadrature responses). α_z falls back to linear response
/// when Ω_p = 0.
std::pair<double, double> absorption_coefficients(const dynamics::DensityMatrix& rho_ss,
                                                  const levels::LevelScheme& scheme,
                                                  const levels::FieldConfig& fields, const CellConfig& cell,
                                                  levels::RabiConvention convention =
                                                      levels::RabiConvention::ExcitedReduced);

/// Γ_z = γ Σ_e b_π ρ_ee and Γ_x = γ Σ_e Σ_σ b ρ_ee.
std::pair<double, double> spontaneous_sources(const dynamics::DensityMatrix& rho,
                                              const levels::LevelScheme& scheme, double gamma = 1.0);

/// Pump-only steady state and all four coefficients for one pump intensity.
Coefficients local_coefficients(const levels::LevelScheme& scheme, double delta_p, double pump_intensity,
                                const CellConfig& cell,
                                levels::RabiConvention convention = levels::RabiConvention::ExcitedReduced);

struct PropagationProfile {
    std::vector<double> y;
    std::vector<double> I_z;
    std::vector<double> I_x;
    std::vector<double> alpha_z, alpha_x;
    std::vector<double> gamma_z, gamma_x;
    bool clamped = false; // a negative intensity was clamped to zero
};

enum class PropagationMode {
    ClosedForm,     // coefficients frozen at the entry steady state
    Numeric,        // same equations integrated numerically
    SelfConsistent, // coefficients recomputed from the local pump intensity
};

struct EntryState {
    double I_z = 0.0; // W/m²
    double I_x = 0.0;
    Coefficients coefficients;
};

/// Source term (Φ/4π) n ħω Γ_src in W/m³.
double source_term(const CellConfig& cell, double gamma_src);

/// I(y) = I₀e^{−αy} + s(1 − e^{−αy})/α, with the series y(1 − αy/2 + (αy)²/6)
/// for |αy| < 1e-6.
double closed_form(double I0, double alpha, double source, double y);

using CoefficientModel = std::function<Coefficients(double pump_intensity)>;

/// SelfConsistent mode requires a model; the others ignore it.
PropagationProfile propagate(const CellConfig& cell, const EntryState& entry, PropagationMode mode,
                             const CoefficientModel& model = {});

struct OutputPoint {
    double pump_intensity = 0.0; // W/m²
    double omega_p = 0.0;        // Γ
    double output_x = 0.0;       // W/m² at y = L
    double output_z = 0.0;
    Coefficients coefficients;
};

struct OutputCurveOptions {
    PropagationMode mode = PropagationMode::ClosedForm;
    levels::RabiConvention convention = levels::RabiConvention::ExcitedReduced;
    Execution execution = Execution::Serial;
};

std::vector<OutputPoint> output_curve(const levels::LevelScheme& scheme, const CellConfig& cell,
                                      const std::vector<double>& pump_grid, double delta_p,
                                      const OutputCurveOptions& options = {});

} // namespace mirrorless::propagation
