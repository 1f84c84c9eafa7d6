#include "mirrorless/propagation.hpp"

#include "mirrorless/integrator.hpp"
#include "mirrorless/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mirrorless::propagation {

using dynamics::DensityMatrix;
using dynamics::Liouvillian;
using levels::FieldConfig;
using levels::LevelScheme;
using levels::RabiConvention;

double CellConfig::capture_solid_angle() const
{
    if (solid_angle > 0)
        return solid_angle;
    return std::numbers::pi * beam_radius * beam_radius / (length * length);
}

double CellConfig::saturation() const
{
    if (saturation_intensity > 0)
        return saturation_intensity;
    const double w = omega();
    return constants::hbar * w * w * w * gamma / (12.0 * std::numbers::pi * constants::c * constants::c);
}

double CellConfig::alpha_scale() const
{
    return 3.0 * density * wavelength * wavelength / (8.0 * std::numbers::pi);
}

void CellConfig::validate() const
{
    auto positive = [](double v, const char* name) {
        if (!(v > 0) || !std::isfinite(v))
            throw ConfigError(std::string("cell parameter '") + name + "' must be positive");
    };
    positive(length, "length");
    positive(density, "density");
    positive(gamma, "gamma");
    positive(wavelength, "wavelength");
    positive(beam_radius, "beam_radius");
    if (solid_angle < 0 || saturation_intensity < 0)
        throw ConfigError("cell parameters 'solid_angle' and 'saturation_intensity' must be nonnegative");
    if (grid < 1)
        throw ConfigError("cell parameter 'grid' must be at least 1");
    if (capture_solid_angle() > 4.0 * std::numbers::pi)
        throw ConfigError("solid angle exceeds 4π");
}

double rabi_from_intensity(double intensity, const CellConfig& cell)
{
    if (!(intensity >= 0))
        throw std::invalid_argument("intensity must be nonnegative");
    return std::sqrt(intensity / (2.0 * cell.saturation()));
}

double intensity_from_rabi(double omega_p, const CellConfig& cell)
{
    return 2.0 * cell.saturation() * omega_p * omega_p;
}

double commutator_sum(const Matrix& mu, const Matrix& rho, const LevelScheme& scheme)
{
    const Matrix c = mu * rho - rho * mu;
    Complex s = 0.0;
    for (std::size_t e : scheme.excited_indices())
        s += kI * c(e, e);
    return s.real();
}

double reduced_coherence_sum(const Matrix& rho, const LevelScheme& scheme, RabiConvention convention)
{
    if (scheme.ground_F().twice != 2 || scheme.excited_F().twice != 4)
        throw std::invalid_argument("the reduced coherence sum is defined for F_g = 1 -> F_e = 2");
    const Matrix mu = levels::dipole_x(scheme, convention);
    // 1-based pairs (a, b) = (2,1), (4,3), (6,5): ground a, excited b.
    double s = 0.0;
    for (auto [a, b] : {std::pair{1, 0}, std::pair{3, 2}, std::pair{5, 4}})
        s += mu(a, b).imag() * rho(b, a).real();
    return 4.0 * s;
}

Matrix static_probe_response(const Liouvillian& L0, const Matrix& rho_ss, const Matrix& mu)
{
    const Matrix b = 0.5 * kI * (mu * rho_ss - rho_ss * mu);
    const Vector x = dynamics::bordered_solve(L0.superop(), dynamics::vec(b), 0.0, L0.dim());
    const Matrix r = dynamics::unvec(x, L0.dim());
    return 0.5 * (r + r.adjoint());
}

std::pair<double, double> absorption_coefficients(const DensityMatrix& rho_ss, const LevelScheme& scheme,
                                                  const FieldConfig& fields, const CellConfig& cell,
                                                  RabiConvention convention)
{
    FieldConfig pump = fields;
    pump.omega_pr = 0.0;
    pump.delta_pr = pump.delta_p;
    const Matrix H = levels::build_hamiltonian(scheme, pump, {convention, levels::RotatingFrame::Pump});
    const Liouvillian L0(H, levels::build_collapse(scheme, convention));
    const Matrix mu_z = levels::dipole_z(scheme, convention);
    const double a0 = cell.alpha_scale();

    double sz;
    if (pump.omega_p > 0)
        sz = commutator_sum(mu_z, rho_ss.matrix(), scheme) / pump.omega_p;
    else
        sz = commutator_sum(mu_z, static_probe_response(L0, rho_ss.matrix(), mu_z), scheme);

    // The x field grows from spontaneous emission and carries no fixed phase
    // relative to the pump. Averaging the in-phase and quadrature responses
    // removes the phase-sensitive part exactly.
    const Matrix Px = levels::raising_x(scheme, convention);
    double sx = 0.0;
    for (const Complex phase : {Complex(1.0), kI}) {
        const Matrix mu = phase * Px + std::conj(phase) * Px.adjoint();
        sx += 0.5 * commutator_sum(mu, static_probe_response(L0, rho_ss.matrix(), mu), scheme);
    }
    return {-a0 * sz, -a0 * sx};
}

std::pair<double, double> spontaneous_sources(const DensityMatrix& rho, const LevelScheme& scheme, double gamma)
{
    const auto c = levels::build_collapse(scheme);
    double gz = 0.0, gx = 0.0;
    for (std::size_t e : scheme.excited_indices()) {
        const double pe = rho(e, e).real();
        for (std::size_t g : scheme.ground_indices()) {
            gz += std::norm(c.lowering[0](g, e)) * pe;
            gx += (std::norm(c.lowering[1](g, e)) + std::norm(c.lowering[2](g, e))) * pe;
        }
    }
    return {gamma * gz, gamma * gx};
}

Coefficients local_coefficients(const LevelScheme& scheme, double delta_p, double pump_intensity,
                                const CellConfig& cell, RabiConvention convention)
{
    FieldConfig f;
    f.omega_p = rabi_from_intensity(pump_intensity, cell);
    f.delta_p = delta_p;
    f.delta_pr = delta_p;
    const Matrix H = levels::build_hamiltonian(scheme, f, {convention, levels::RotatingFrame::Pump});
    const Liouvillian L(H, levels::build_collapse(scheme, convention));
    // A vanishing pump (including a fully depleted one) leaves the ground
    // manifold dark; the atoms then stay in their initial distribution.
    DensityMatrix rho;
    try {
        rho = f.omega_p == 0.0 ? DensityMatrix::uniform_ground(scheme) : dynamics::steady_state(L);
    } catch (const dynamics::DegenerateSteadyState&) {
        dynamics::SteadyStateOptions ss;
        ss.mode = dynamics::SteadyStateMode::Projected;
        rho = dynamics::steady_state(L, scheme, ss);
    }
    Coefficients c;
    std::tie(c.alpha_z, c.alpha_x) = absorption_coefficients(rho, scheme, f, cell, convention);
    std::tie(c.gamma_z, c.gamma_x) = spontaneous_sources(rho, scheme, cell.gamma);
    return c;
}

double source_term(const CellConfig& cell, double gamma_src)
{
    return cell.capture_solid_angle() / (4.0 * std::numbers::pi) * cell.density * cell.photon_energy() * gamma_src;
}

double closed_form(double I0, double alpha, double source, double y)
{
    const double x = alpha * y;
    const double decay = std::exp(-x);
    const double growth = std::abs(x) < 1e-6 ? y * (1.0 - x / 2.0 + x * x / 6.0) : -std::expm1(-x) / alpha;
    return I0 * decay + source * growth;
}

PropagationProfile propagate(const CellConfig& cell, const EntryState& entry, PropagationMode mode,
                             const CoefficientModel& model)
{
    cell.validate();
    if (!(entry.I_z >= 0) || !(entry.I_x >= 0))
        throw std::invalid_argument("entry intensities must be nonnegative");
    if (mode == PropagationMode::SelfConsistent && !model)
        throw std::invalid_argument("self-consistent propagation needs a coefficient model");

    const int N = cell.grid;
    const double dy = cell.length / N;
    PropagationProfile p;
    p.y.resize(N + 1);
    for (int k = 0; k <= N; ++k)
        p.y[k] = k == N ? cell.length : k * dy;

    const Coefficients& c = entry.coefficients;
    auto record = [&p](double Iz, double Ix, const Coefficients& k) {
        if (Iz < 0 || Ix < 0)
            p.clamped = true;
        p.I_z.push_back(std::max(0.0, Iz));
        p.I_x.push_back(std::max(0.0, Ix));
        p.alpha_z.push_back(k.alpha_z);
        p.alpha_x.push_back(k.alpha_x);
        p.gamma_z.push_back(k.gamma_z);
        p.gamma_x.push_back(k.gamma_x);
    };

    if (mode == PropagationMode::ClosedForm) {
        const double sz = source_term(cell, c.gamma_z), sx = source_term(cell, c.gamma_x);
        for (double y : p.y)
            record(closed_form(entry.I_z, c.alpha_z, sz, y), closed_form(entry.I_x, c.alpha_x, sx, y), c);
        return p;
    }

    if (mode == PropagationMode::Numeric) {
        const double sz = source_term(cell, c.gamma_z), sx = source_term(cell, c.gamma_x);
        integrator::StepControl ctl;
        ctl.rtol = 1e-13;
        ctl.atol = 1e-13 * std::max({entry.I_z, entry.I_x, sz * cell.length, sx * cell.length, 1e-300});
        integrator::DormandPrince dp(
            [&](double, const Vector& I, Vector& dI) {
                dI(0) = -c.alpha_z * I(0) + sz;
                dI(1) = -c.alpha_x * I(1) + sx;
            },
            ctl);
        Vector I(2);
        I << entry.I_z, entry.I_x;
        record(entry.I_z, entry.I_x, c);
        std::size_t next = 1;
        dp.integrate(0.0, cell.length, I, [&](const integrator::DenseStep& st, Vector& state) {
            const double t_end = st.t0 + st.h;
            while (next < p.y.size() && p.y[next] <= t_end) {
                const Vector v = p.y[next] == t_end ? state : st.at(p.y[next]);
                record(v(0).real(), v(1).real(), c);
                ++next;
            }
            return integrator::StepAction::Continue;
        });
        while (next < p.y.size()) {
            record(I(0).real(), I(1).real(), c);
            ++next;
        }
        return p;
    }

    // Self-consistent: classical RK4 on the grid, coefficients from the local pump.
    auto rhs = [&](double Iz, double Ix, Coefficients& k) {
        k = model(std::max(0.0, Iz));
        return std::pair{-k.alpha_z * Iz + source_term(cell, k.gamma_z),
                         -k.alpha_x * Ix + source_term(cell, k.gamma_x)};
    };
    double Iz = entry.I_z, Ix = entry.I_x;
    Coefficients k0;
    for (int s = 0; s < N; ++s) {
        Coefficients kk;
        const auto [a1, b1] = rhs(Iz, Ix, k0);
        record(Iz, Ix, k0);
        const auto [a2, b2] = rhs(Iz + 0.5 * dy * a1, Ix + 0.5 * dy * b1, kk);
        const auto [a3, b3] = rhs(Iz + 0.5 * dy * a2, Ix + 0.5 * dy * b2, kk);
        const auto [a4, b4] = rhs(Iz + dy * a3, Ix + dy * b3, kk);
        Iz += dy / 6.0 * (a1 + 2 * a2 + 2 * a3 + a4);
        Ix += dy / 6.0 * (b1 + 2 * b2 + 2 * b3 + b4);
    }
    rhs(Iz, Ix, k0);
    record(Iz, Ix, k0);
    return p;
}

std::vector<OutputPoint> output_curve(const LevelScheme& scheme, const CellConfig& cell,
                                      const std::vector<double>& pump_grid, double delta_p,
                                      const OutputCurveOptions& options)
{
    cell.validate();
    if (pump_grid.empty())
        throw std::invalid_argument("pump intensity grid is empty");
    for (std::size_t i = 0; i < pump_grid.size(); ++i)
        if (!(pump_grid[i] >= 0) || (i > 0 && !(pump_grid[i] > pump_grid[i - 1])))
            throw std::invalid_argument("pump intensity grid must be nonnegative and strictly increasing");

    return map_indices(
        pump_grid.size(),
        [&](std::size_t i) {
            OutputPoint pt;
            pt.pump_intensity = pump_grid[i];
            pt.omega_p = rabi_from_intensity(pump_grid[i], cell);
            pt.coefficients = local_coefficients(scheme, delta_p, pump_grid[i], cell, options.convention);
            EntryState entry{pump_grid[i], 0.0, pt.coefficients};
            const CoefficientModel model = [&](double Iz) {
                return local_coefficients(scheme, delta_p, Iz, cell, options.convention);
            };
            const PropagationProfile prof = propagate(cell, entry, options.mode, model);
            pt.output_x = prof.I_x.back();
            pt.output_z = prof.I_z.back();
            return pt;
        },
        options.execution);
}

} // namespace mirrorless::propagation
