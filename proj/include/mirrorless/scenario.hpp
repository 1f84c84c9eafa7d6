#pragma once

// INI scenario files for the simulate tool.
//
//   workflow = spectrum
//   [transition]  Fg, Fe, convention
//   [fields]      S | omega_p, delta_p, omega_pr, polarization
//   [scan]        S, omega_p, delta, time, pump_intensity   (grids)
//   [cell]        SI cell parameters (propagate / output-curve only)
//   [numerics]    tolerances and solver choices
//   [output]      path, format
//
// Grids are linspace(a, b, n), logspace(a, b, n) (decades) or a comma list.
// Everything outside [cell] is in units of Γ.

#include "mirrorless/angular.hpp"
#include "mirrorless/levels.hpp"
#include "mirrorless/propagation.hpp"
#include "mirrorless/spectra.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mirrorless::cli {

enum class Workflow { Populations, InversionScan, Spectrum, MinAbsorptionScan, Propagate, OutputCurve };
enum class Format { Csv, Json };
enum class SpectrumRoute { Regression, WeakProbe, Both };

std::string_view to_string(Workflow w);
std::string_view to_string(Format f);

/// A scan axis; keeps the written form so serialization is canonical.
struct Grid {
    enum class Kind { List, Linspace, Logspace };
    Kind kind = Kind::List;
    double a = 0.0, b = 0.0;
    int n = 0;
    std::vector<double> list;

    std::vector<double> values() const;
    std::string to_string() const;
    bool operator==(const Grid&) const = default;
};

/// Accepts "a, b, c" (optionally bracketed), linspace(a, b, n) or logspace(p, q, n).
/// Throws ConfigError naming `key` for malformed, empty or non-increasing grids.
Grid parse_grid(std::string_view text, std::string_view key);

struct Numerics {
    double tol = 1e-10;             // ODE tolerance (evolution, regression)
    double decay_threshold = 1e-8;  // regression window cut
    double max_window = 2e5;
    double probe_ratio = 1e-3;      // weak-probe route
    int harmonics = 2;
    double threshold_rtol = 1e-3;   // inversion threshold bisection
    bool refine = true;             // Brent refinement in min-absorption scans
    SpectrumRoute route = SpectrumRoute::Both;
    propagation::PropagationMode propagation = propagation::PropagationMode::ClosedForm;

    bool operator==(const Numerics&) const = default;
};

struct ScenarioConfig {
    Workflow workflow = Workflow::Populations;

    angular::AngMom Fg{2};
    angular::AngMom Fe{4};
    levels::RabiConvention convention = levels::RabiConvention::ExcitedReduced;

    std::optional<double> S;
    std::optional<double> omega_p;
    double delta_p = 0.0;
    double omega_pr = 0.0; // static probe at δ = 0 (populations only)
    spectra::Polarization polarization = spectra::Polarization::Perpendicular;

    std::optional<Grid> S_grid;
    std::optional<Grid> omega_p_grid;
    std::optional<Grid> delta_grid;
    std::optional<Grid> time_grid;
    std::optional<Grid> intensity_grid;

    std::optional<propagation::CellConfig> cell;
    double pump_intensity = 0.0; // W/m², propagate
    double probe_intensity = 0.0;

    Numerics numerics;

    std::string output_path; // empty means stdout
    Format format = Format::Csv;

    /// Ω_p from either S or omega_p.
    double pump_rabi() const;

    bool operator==(const ScenarioConfig&) const;
};

ScenarioConfig parse_config(std::istream& in, std::string_view source = "<config>");
ScenarioConfig parse_config(const std::filesystem::path& path);
ScenarioConfig parse_config_string(std::string_view text);

/// Canonical INI text: fixed section and key order, shortest round-trip
/// numbers, only keys the workflow uses. parse_config_string(serialize(c)) == c.
std::string serialize(const ScenarioConfig& config, bool include_output_path = true);

} // namespace mirrorless::cli
