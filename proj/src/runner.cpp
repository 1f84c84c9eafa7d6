#include "mirrorless/runner.hpp"

#include "mirrorless/dynamics.hpp"
#include "mirrorless/levels.hpp"
#include "mirrorless/parallel.hpp"
#include "mirrorless/propagation.hpp"
#include "mirrorless/spectra.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#ifndef MIRRORLESS_VERSION
#define MIRRORLESS_VERSION "unknown"
#endif

namespace mirrorless::cli {

namespace {

using levels::LevelScheme;
using report::Column;
using report::ResultTable;

std::string_view module_of(Workflow w)
{
    switch (w) {
    case Workflow::Populations:
    case Workflow::InversionScan:
        return "dynamics";
    case Workflow::Spectrum:
    case Workflow::MinAbsorptionScan:
        return "spectra";
    case Workflow::Propagate:
    case Workflow::OutputCurve:
        return "propagation";
    }
    return "?";
}

// Ground sublevels first, then excited, each in ascending m.
std::vector<std::size_t> population_order(const LevelScheme& scheme)
{
    std::vector<std::size_t> order = scheme.ground_indices();
    order.insert(order.end(), scheme.excited_indices().begin(), scheme.excited_indices().end());
    return order;
}

std::vector<Column> population_columns(const LevelScheme& scheme)
{
    std::vector<Column> cols;
    for (std::size_t i : population_order(scheme))
        cols.push_back({"rho_" + levels::label(scheme.sublevel(i)), "1"});
    return cols;
}

std::optional<double> try_inversion(const LevelScheme& scheme, const RealVector& pop)
{
    try {
        return dynamics::inversion(scheme, pop);
    } catch (const std::invalid_argument&) {
        return std::nullopt;
    }
}

dynamics::DensityMatrix pump_steady_state(const dynamics::Liouvillian& L, const LevelScheme& scheme)
{
    try {
        return dynamics::steady_state(L);
    } catch (const dynamics::DegenerateSteadyState&) {
        dynamics::SteadyStateOptions ss;
        ss.mode = dynamics::SteadyStateMode::Projected;
        return dynamics::steady_state(L, scheme, ss);
    }
}

ResultTable populations(const ScenarioConfig& c, const LevelScheme& scheme)
{
    levels::FieldConfig f;
    f.omega_p = c.pump_rabi();
    f.delta_p = c.delta_p;
    f.omega_pr = c.omega_pr;
    f.delta_pr = c.delta_p;
    const Matrix H = levels::build_hamiltonian(scheme, f, {c.convention, levels::RotatingFrame::Pump});
    const dynamics::Liouvillian L(H, levels::build_collapse(scheme, c.convention));

    const auto times = c.time_grid->values();
    const auto series =
        dynamics::evolve(L, dynamics::DensityMatrix::uniform_ground(scheme), times.back(), c.numerics.tol, times);
    const auto steady = pump_steady_state(L, scheme);
    const bool has_inv = try_inversion(scheme, steady.populations()).has_value();

    std::vector<Column> cols{{"t", "1/Gamma"}};
    for (auto& col : population_columns(scheme))
        cols.push_back(std::move(col));
    if (has_inv)
        cols.push_back({"inversion", "1"});
    ResultTable table(std::move(cols));
    const auto order = population_order(scheme);
    for (std::size_t k = 0; k < series.t.size(); ++k) {
        const RealVector pop = series.rho[k].populations();
        std::vector<double> row{series.t[k]};
        for (std::size_t i : order)
            row.push_back(pop(static_cast<Eigen::Index>(i)));
        if (has_inv)
            row.push_back(*try_inversion(scheme, pop));
        table.add_row(std::move(row));
    }

    table.add_result("omega_p", f.omega_p);
    table.add_result("S", dynamics::saturation_parameter(f.omega_p, f.delta_p));
    const RealVector pop = steady.populations();
    for (std::size_t i : order)
        table.add_result("steady.rho_" + levels::label(scheme.sublevel(i)), pop(static_cast<Eigen::Index>(i)));
    if (const auto inv = try_inversion(scheme, pop)) {
        table.add_result("steady.inversion", *inv);
        table.add_result("steady.inverted", *inv > 0 ? "true" : "false");
    }
    table.add_result("steady.min_eigenvalue", steady.min_eigenvalue());
    return table;
}

ResultTable inversion_scan(const ScenarioConfig& c, const LevelScheme& scheme, Execution exec)
{
    dynamics::InversionOptions opts;
    opts.convention = c.convention;
    opts.threshold_rtol = c.numerics.threshold_rtol;
    opts.execution = exec;
    const auto scan = dynamics::inversion_scan(scheme, c.delta_p, c.S_grid->values(), opts);

    std::vector<Column> cols{{"S", "1"}, {"omega_p", "Gamma"}};
    for (auto& col : population_columns(scheme))
        cols.push_back(std::move(col));
    cols.push_back({"inversion", "1"});
    cols.push_back({"inverted", "bool"});
    ResultTable table(std::move(cols));
    const auto order = population_order(scheme);
    for (const auto& p : scan.points) {
        std::vector<double> row{p.S, p.omega_p};
        for (std::size_t i : order)
            row.push_back(p.populations(static_cast<Eigen::Index>(i)));
        row.push_back(p.inversion);
        row.push_back(p.inversion > 0 ? 1.0 : 0.0);
        table.add_row(std::move(row));
    }
    if (scan.threshold)
        table.add_result("S_star", *scan.threshold);
    else
        table.add_result("S_star", "none");
    return table;
}

ResultTable spectrum(const ScenarioConfig& c, const LevelScheme& scheme, Execution exec)
{
    levels::FieldConfig f;
    f.omega_p = c.pump_rabi();
    f.delta_p = c.delta_p;
    f.delta_pr = c.delta_p;
    const auto grid = c.delta_grid->values();
    const auto route = c.numerics.route;
    const bool regression = route != SpectrumRoute::WeakProbe;
    const bool weak = route != SpectrumRoute::Regression;

    std::vector<Column> cols{{"delta", "Gamma"}, {"absorption", "1"}};
    if (regression && weak)
        cols.push_back({"absorption_weak_probe", "1"});
    ResultTable table(std::move(cols));

    std::vector<double> primary, secondary;
    if (regression) {
        spectra::CorrelationOptions opts;
        opts.tol = c.numerics.tol;
        opts.decay_threshold = c.numerics.decay_threshold;
        opts.max_window = c.numerics.max_window;
        opts.reality_check = true;
        opts.execution = exec;
        const auto r = spectra::probe_spectrum(scheme, f, c.polarization, grid, opts, c.convention);
        primary = r.absorption;
        table.add_result("window", r.window);
        table.add_result("sample_step", r.sample_step);
        if (r.imag_residue)
            table.add_result("imag_residue", *r.imag_residue);
    }
    if (weak) {
        if (!(f.omega_p > 0))
            throw ConfigError("numerics.route: the weak-probe route needs a nonzero pump");
        spectra::WeakProbeOptions wopt;
        wopt.probe_ratio = c.numerics.probe_ratio;
        wopt.harmonics = c.numerics.harmonics;
        wopt.convention = c.convention;
        const spectra::WeakProbe wp(scheme, f, c.polarization, wopt);
        const auto vals = map_indices(
            grid.size(),
            [&](std::size_t i) {
                return std::pair{wp.absorption(grid[i]), wp.absorption(grid[i], 0.5 * wp.probe_rabi())};
            },
            exec);
        double peak = 0.0, lin = 0.0;
        for (const auto& v : vals)
            peak = std::max(peak, std::abs(v.first));
        for (const auto& v : vals) {
            (regression ? secondary : primary).push_back(v.first);
            if (std::abs(v.first) > 1e-3 * peak)
                lin = std::max(lin, std::abs(v.second - v.first) / std::abs(v.first));
        }
        table.add_result("probe_rabi", wp.probe_rabi());
        table.add_result("linearity_change", lin);
    }
    for (std::size_t i = 0; i < grid.size(); ++i) {
        std::vector<double> row{grid[i], primary[i]};
        if (!secondary.empty())
            row.push_back(secondary[i]);
        table.add_row(std::move(row));
    }
    if (!secondary.empty()) {
        double peak = 0.0, diff = 0.0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            peak = std::max(peak, std::abs(primary[i]));
            diff = std::max(diff, std::abs(primary[i] - secondary[i]));
        }
        table.add_result("route_difference", peak > 0 ? diff / peak : diff);
    }

    table.add_result("omega_p", f.omega_p);
    const auto windows = spectra::gain_windows(grid, primary);
    table.add_result("gain_windows", static_cast<double>(windows.size()));
    for (std::size_t k = 0; k < windows.size(); ++k) {
        const std::string key = "gain_window." + std::to_string(k + 1);
        table.add_result(key + ".lower", windows[k].lower);
        table.add_result(key + ".upper", windows[k].upper);
        table.add_result(key + ".depth", windows[k].depth);
    }
    return table;
}

ResultTable min_absorption(const ScenarioConfig& c, const LevelScheme& scheme, Execution exec)
{
    spectra::MinAbsorptionOptions opts;
    opts.weak_probe.probe_ratio = c.numerics.probe_ratio;
    opts.weak_probe.harmonics = c.numerics.harmonics;
    opts.weak_probe.convention = c.convention;
    opts.refine = c.numerics.refine;
    opts.execution = exec;
    const auto scan =
        spectra::min_absorption_scan(scheme, c.delta_p, c.omega_p_grid->values(), c.delta_grid->values(), opts);

    ResultTable table({{"omega_p", "Gamma"}, {"min_absorption", "1"}, {"delta_at_min", "Gamma"}, {"gain", "bool"}});
    double lowest = INFINITY;
    for (const auto& p : scan.points) {
        table.add_row({p.omega_p, p.min_absorption, p.delta_at_min, p.min_absorption < 0 ? 1.0 : 0.0});
        lowest = std::min(lowest, p.min_absorption);
    }
    table.add_result("min_absorption", lowest);
    table.add_result("gain_ranges", static_cast<double>(scan.gain_ranges.size()));
    for (std::size_t k = 0; k < scan.gain_ranges.size(); ++k) {
        const std::string key = "gain_range." + std::to_string(k + 1);
        table.add_result(key + ".lower", scan.gain_ranges[k].first);
        table.add_result(key + ".upper", scan.gain_ranges[k].second);
    }
    return table;
}

void add_cell_results(ResultTable& table, const propagation::CellConfig& cell)
{
    table.add_result("saturation_intensity", cell.saturation());
    table.add_result("alpha_scale", cell.alpha_scale());
    table.add_result("solid_angle", cell.capture_solid_angle());
}

ResultTable propagate(const ScenarioConfig& c, const LevelScheme& scheme)
{
    const auto& cell = *c.cell;
    propagation::EntryState entry;
    entry.I_z = c.pump_intensity;
    entry.I_x = c.probe_intensity;
    entry.coefficients = propagation::local_coefficients(scheme, c.delta_p, c.pump_intensity, cell, c.convention);
    const propagation::CoefficientModel model = [&](double Iz) {
        return propagation::local_coefficients(scheme, c.delta_p, Iz, cell, c.convention);
    };
    const auto prof = propagation::propagate(cell, entry, c.numerics.propagation, model);

    ResultTable table({{"y", "m"},
                       {"I_z", "W/m^2"},
                       {"I_x", "W/m^2"},
                       {"alpha_z", "1/m"},
                       {"alpha_x", "1/m"},
                       {"Gamma_z", "1/s"},
                       {"Gamma_x", "1/s"}});
    for (std::size_t k = 0; k < prof.y.size(); ++k)
        table.add_row({prof.y[k], prof.I_z[k], prof.I_x[k], prof.alpha_z[k], prof.alpha_x[k], prof.gamma_z[k],
                       prof.gamma_x[k]});
    table.add_result("omega_p", propagation::rabi_from_intensity(c.pump_intensity, cell));
    table.add_result("output_z", prof.I_z.back());
    table.add_result("output_x", prof.I_x.back());
    table.add_result("clamped", prof.clamped ? "true" : "false");
    add_cell_results(table, cell);
    return table;
}

ResultTable output_curve(const ScenarioConfig& c, const LevelScheme& scheme, Execution exec)
{
    propagation::OutputCurveOptions opts;
    opts.mode = c.numerics.propagation;
    opts.convention = c.convention;
    opts.execution = exec;
    const auto pts = propagation::output_curve(scheme, *c.cell, c.intensity_grid->values(), c.delta_p, opts);

    ResultTable table({{"pump_intensity", "W/m^2"},
                       {"omega_p", "Gamma"},
                       {"output_x", "W/m^2"},
                       {"output_z", "W/m^2"},
                       {"alpha_z", "1/m"},
                       {"alpha_x", "1/m"},
                       {"Gamma_z", "1/s"},
                       {"Gamma_x", "1/s"}});
    for (const auto& p : pts)
        table.add_row({p.pump_intensity, p.omega_p, p.output_x, p.output_z, p.coefficients.alpha_z,
                       p.coefficients.alpha_x, p.coefficients.gamma_z, p.coefficients.gamma_x});
    add_cell_results(table, *c.cell);
    return table;
}

} // namespace

report::ResultTable execute(const ScenarioConfig& c, Execution exec)
{
    const LevelScheme scheme(c.Fg, c.Fe);
    switch (c.workflow) {
    case Workflow::Populations:
        return populations(c, scheme);
    case Workflow::InversionScan:
        return inversion_scan(c, scheme, exec);
    case Workflow::Spectrum:
        return spectrum(c, scheme, exec);
    case Workflow::MinAbsorptionScan:
        return min_absorption(c, scheme, exec);
    case Workflow::Propagate:
        return propagate(c, scheme);
    case Workflow::OutputCurve:
        return output_curve(c, scheme, exec);
    }
    throw ConfigError("unknown workflow");
}

int run(const ScenarioConfig& c, std::ostream& out, std::ostream& diag, const RunOptions& options)
{
    const auto start = std::chrono::steady_clock::now();
    try {
        const auto table = execute(c, options.execution);
        report::Provenance p;
        p.version = MIRRORLESS_VERSION;
        p.workflow = std::string(to_string(c.workflow));
        p.config = serialize(c, false);
        p.config_sha256 = report::sha256_hex(p.config);
        if (options.record_wall_time)
            p.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

        std::ostringstream buf;
        if (c.format == Format::Json)
            report::write_json(buf, table, p);
        else
            report::write_csv(buf, table, p);
        out << buf.str();
        out.flush();
        if (!out) {
            diag << "error: failed to write output\n";
            return kInternalError;
        }
        return kSuccess;
    } catch (const ConfigError& e) {
        diag << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::invalid_argument& e) {
        diag << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const NumericalError& e) {
        diag << "numerical failure [" << module_of(c.workflow) << "]: " << e.what() << "\n";
        return kNumericalFailure;
    } catch (const std::exception& e) {
        diag << "internal error: " << e.what() << "\n";
        return kInternalError;
    }
}

} // namespace mirrorless::cli
