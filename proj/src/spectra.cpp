#include "mirrorless/spectra.hpp"

#include "mirrorless/integrator.hpp"
#include "mirrorless/parallel.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace mirrorless::spectra {

using dynamics::DensityMatrix;
using dynamics::Liouvillian;
using dynamics::unvec;
using dynamics::vec;
using levels::FieldConfig;
using levels::LevelScheme;

DipoleOperator make_dipole(const LevelScheme& scheme, Polarization polarization,
                           levels::RabiConvention convention)
{
    DipoleOperator d;
    d.polarization = polarization;
    d.d_plus = polarization == Polarization::Parallel ? levels::raising_z(scheme, convention)
                                                      : levels::raising_x(scheme, convention);
    return d;
}

double undriven_peak(const LevelScheme& scheme, const DipoleOperator& dipole)
{
    const double p = 1.0 / double(scheme.ground_indices().size());
    double s = 0.0;
    for (std::size_t g : scheme.ground_indices())
        for (std::size_t e : scheme.excited_indices())
            s += p * std::norm(dipole.d_plus(e, g));
    return 2.0 * s;
}

WindowExhausted::WindowExhausted(double window, double achieved)
    : NumericalError("correlation did not decay within tau = " + std::to_string(window) +
                     " (reached " + std::to_string(achieved) + " of its initial magnitude)"),
      window_(window), achieved_(achieved)
{
}

double sample_step(double spread, double max_abs_delta)
{
    double h = 0.2 / (spread + max_abs_delta + 0.5);
    if (spread > 0)
        h = std::min(h, 2.0 * std::numbers::pi / (20.0 * spread));
    return h;
}

namespace {

Eigen::RowVectorXcd trace_row(const Matrix& A) { return vec(A.transpose()).transpose(); }

double max_abs(const auto& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

double hamiltonian_spread(const Matrix& H)
{
    Eigen::SelfAdjointEigenSolver<Matrix> es(H, Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff() - es.eigenvalues().minCoeff();
}

} // namespace

CorrelationTrace correlation_trace(const Liouvillian& L, const DensityMatrix& rho_ss, const DipoleOperator& dipole,
                                   double step, const CorrelationOptions& options)
{
    if (!(step > 0))
        throw std::invalid_argument("sample step must be positive");
    const Eigen::Index d = L.dim();
    const Eigen::Index n = d * d;
    const Matrix& S = L.superop();
    const Matrix& rho = rho_ss.matrix();
    const Matrix Dp = dipole.d_plus;
    const Matrix Dm = dipole.d_minus();
    const int cols = options.reality_check ? 4 : 2;

    // Columns: d⁺ρ, ρd⁺ (forward ordering pair); ρd⁻, d⁻ρ (reverse pair).
    Matrix Y0(n, cols);
    Y0.col(0) = vec(Dp * rho);
    Y0.col(1) = vec(rho * Dp);
    if (cols == 4) {
        Y0.col(2) = vec(rho * Dm);
        Y0.col(3) = vec(Dm * rho);
    }
    const Eigen::RowVectorXcd pm = trace_row(Dm);
    const Eigen::RowVectorXcd pp = trace_row(Dp);

    CorrelationTrace tr;
    tr.step = step;
    const Vector x0 = Y0.col(0) - Y0.col(1);
    const double x0_norm = max_abs(x0);
    {
        Vector x = x0;
        for (int k = 0; k < 3; ++k) {
            x = S * x;
            tr.derivatives[k] = (pm * x)(0);
        }
        if (cols == 4) {
            Vector z = Y0.col(2) - Y0.col(3);
            for (int k = 0; k < 3; ++k) {
                z = S * z;
                tr.reverse_derivatives[k] = (pp * z)(0);
            }
        }
    }
    tr.c.push_back((pm * x0)(0));
    if (cols == 4)
        tr.reverse.push_back((pp * (Y0.col(2) - Y0.col(3)))(0));
    if (x0_norm == 0.0) {
        tr.achieved_decay = 0.0;
        return tr;
    }

    integrator::StepControl ctl;
    ctl.rtol = options.tol;
    ctl.atol = options.tol * x0_norm;
    integrator::DormandPrince dp(
        [&S, n, cols](double, const Vector& y, Vector& dy) {
            Eigen::Map<const Matrix> Yin(y.data(), n, cols);
            Eigen::Map<Matrix> dY(dy.data(), n, cols);
            dY.noalias() = S * Yin;
        },
        ctl);

    Vector y = Eigen::Map<const Vector>(Y0.data(), Y0.size());
    bool decayed = false;
    double achieved = 1.0;
    std::size_t next = 1;
    dp.integrate(0.0, options.max_window, y, [&](const integrator::DenseStep& st, Vector& state) {
        const double t_end = st.t0 + st.h;
        if (double(next) * step <= t_end) {
            std::array<Complex, 5> cf, cr;
            for (int k = 0; k < 5; ++k) {
                Eigen::Map<const Matrix> R(st.r[k]->data(), n, cols);
                cf[k] = (pm * (R.col(0) - R.col(1)))(0);
                if (cols == 4)
                    cr[k] = (pp * (R.col(2) - R.col(3)))(0);
            }
            while (double(next) * step <= t_end) {
                const double theta = (double(next) * step - st.t0) / st.h;
                tr.c.push_back(integrator::interpolate(cf, theta));
                if (cols == 4)
                    tr.reverse.push_back(integrator::interpolate(cr, theta));
                ++next;
            }
        }
        Eigen::Map<const Matrix> Y(state.data(), n, cols);
        achieved = max_abs(Y.col(0) - Y.col(1)) / x0_norm;
        if (achieved < options.decay_threshold) {
            decayed = true;
            return integrator::StepAction::Stop;
        }
        return integrator::StepAction::Continue;
    });
    if (!decayed)
        throw WindowExhausted(options.max_window, achieved);
    tr.achieved_decay = achieved;
    return tr;
}

Complex fourier_half_line(const std::vector<Complex>& c, const std::array<Complex, 3>& dc, double h, double nu)
{
    if (c.empty())
        return 0.0;
    // f(τ) = e^{iντ} C(τ); derivatives at 0 from those of C.
    const Complex inu(0.0, nu);
    const Complex f1 = inu * c[0] + dc[0];
    const Complex f3 = inu * inu * inu * c[0] + 3.0 * inu * inu * dc[0] + 3.0 * inu * dc[1] + dc[2];

    Complex sum = 0.5 * c[0];
    const Complex z = std::polar(1.0, nu * h);
    Complex ph = 1.0;
    for (std::size_t k = 1; k < c.size(); ++k) {
        if (k % 256 == 0)
            ph = std::polar(1.0, nu * h * double(k));
        else
            ph *= z;
        sum += (k + 1 == c.size() ? 0.5 : 1.0) * ph * c[k];
    }
    return h * sum + h * h / 12.0 * f1 - h * h * h * h / 720.0 * f3;
}

SpectrumResult correlation_spectrum(const Liouvillian& L, const DensityMatrix& rho_ss, const DipoleOperator& dipole,
                                    const std::vector<double>& delta_grid, const CorrelationOptions& options)
{
    if (delta_grid.empty())
        throw std::invalid_argument("delta grid is empty");
    for (std::size_t i = 1; i < delta_grid.size(); ++i)
        if (!(delta_grid[i] > delta_grid[i - 1]))
            throw std::invalid_argument("delta grid must be strictly increasing");
    if (!(options.normalization > 0))
        throw std::invalid_argument("spectrum normalization must be positive");

    const double max_delta = std::max(std::abs(delta_grid.front()), std::abs(delta_grid.back()));
    const double h = sample_step(options.frequency_spread, max_delta);
    const CorrelationTrace tr = correlation_trace(L, rho_ss, dipole, h, options);

    struct Point {
        double g;
        double imag_full;
        double real_full;
    };
    const auto pts = map_indices(
        delta_grid.size(),
        [&](std::size_t i) {
            const double nu = -delta_grid[i];
            const Complex forward = fourier_half_line(tr.c, tr.derivatives, h, nu);
            Point p{forward.real() / options.normalization, 0.0, 0.0};
            if (options.reality_check) {
                const Complex full = forward + fourier_half_line(tr.reverse, tr.reverse_derivatives, h, -nu);
                p.imag_full = full.imag();
                p.real_full = full.real();
            }
            return p;
        },
        options.execution);

    SpectrumResult out;
    out.delta = delta_grid;
    out.window = h * double(tr.c.size() - 1);
    out.sample_step = h;
    out.absorption.reserve(pts.size());
    double max_re = 0.0, max_im = 0.0;
    for (const auto& p : pts) {
        out.absorption.push_back(p.g);
        max_re = std::max(max_re, std::abs(p.real_full));
        max_im = std::max(max_im, std::abs(p.imag_full));
    }
    if (options.reality_check)
        out.imag_residue = max_re > 0 ? max_im / max_re : max_im;
    return out;
}

SpectrumResult probe_spectrum(const LevelScheme& scheme, const FieldConfig& fields, Polarization polarization,
                              const std::vector<double>& delta_grid, CorrelationOptions options,
                              levels::RabiConvention convention)
{
    FieldConfig pump = fields;
    pump.omega_pr = 0.0;
    pump.delta_pr = pump.delta_p;
    const Matrix H = levels::build_hamiltonian(scheme, pump, {convention, levels::RotatingFrame::Pump});
    const Liouvillian L(H, levels::build_collapse(scheme, convention));
    const DipoleOperator d = make_dipole(scheme, polarization, convention);
    dynamics::SteadyStateOptions ss;
    if (pump.omega_p == 0.0)
        ss.mode = dynamics::SteadyStateMode::Projected;
    const DensityMatrix rho = dynamics::steady_state(L, scheme, ss);
    options.frequency_spread = std::max(options.frequency_spread, hamiltonian_spread(H));
    options.normalization = undriven_peak(scheme, d);
    SpectrumResult r = correlation_spectrum(L, rho, d, delta_grid, options);
    r.fields = fields;
    return r;
}

WeakProbe::WeakProbe(const LevelScheme& scheme, const FieldConfig& pump, Polarization polarization,
                     WeakProbeOptions options)
    : dim_(static_cast<Eigen::Index>(scheme.dimension())), excited_(scheme.excited_indices()),
      options_(options)
{
    if (options_.harmonics < 1)
        throw std::invalid_argument("weak-probe solver needs at least one harmonic");
    if (!(options_.probe_ratio > 0))
        throw std::invalid_argument("probe ratio must be positive");
    FieldConfig f = pump;
    f.omega_pr = 0.0;
    f.delta_pr = f.delta_p;
    const Matrix H = levels::build_hamiltonian(scheme, f, {options_.convention, levels::RotatingFrame::Pump});
    const Liouvillian L(H, levels::build_collapse(scheme, options_.convention));
    L0_ = L.superop();
    rho_ss_ = dynamics::steady_state(L);
    const DipoleOperator d = make_dipole(scheme, polarization, options_.convention);
    P_ = d.d_plus;
    norm_ = undriven_peak(scheme, d);
    omega_pr_ = options_.probe_ratio * f.omega_p;

    const Eigen::Index n = dim_ * dim_;
    Matrix A(n + 1, n);
    A.topRows(n) = L0_;
    A.row(n) = vec(Matrix::Identity(dim_, dim_)).transpose();
    bordered_.compute(A);
}

std::vector<Matrix> WeakProbe::solve(double delta, double omega_pr) const
{
    const int N = options_.harmonics;
    const Eigen::Index n = dim_ * dim_;
    const Matrix Pd = P_.adjoint();
    const Complex half = -kI * 0.5 * omega_pr;
    auto vplus = [&](const Matrix& X) -> Matrix { return half * (P_ * X - X * P_); };
    auto vminus = [&](const Matrix& X) -> Matrix { return half * (Pd * X - X * Pd); };

    std::vector<Eigen::PartialPivLU<Matrix>> lu;
    const bool static_offset = delta == 0.0;
    if (!static_offset)
        for (int k = 1; k <= N; ++k)
            lu.emplace_back(Complex(0.0, k * delta) * Matrix::Identity(n, n) - L0_);

    auto bordered = [&](const Vector& b, Complex trace) {
        Vector rhs(n + 1);
        rhs.head(n) = b;
        rhs(n) = trace;
        return Vector(bordered_.solve(rhs));
    };

    std::vector<Matrix> rho(N + 2, Matrix::Zero(dim_, dim_));
    rho[0] = rho_ss_.matrix();
    for (int sweep = 0; sweep < options_.max_sweeps; ++sweep) {
        double change = 0.0, scale = 0.0;
        for (int k = 1; k <= N; ++k) {
            const Matrix b = vplus(rho[k - 1]) + vminus(rho[k + 1]);
            Matrix next;
            if (static_offset)
                next = unvec(bordered(-vec(b), 0.0), dim_);
            else
                next = unvec(lu[k - 1].solve(vec(b)), dim_);
            change = std::max(change, (next - rho[k]).cwiseAbs().maxCoeff() / std::pow(omega_pr, k));
            scale = std::max(scale, next.cwiseAbs().maxCoeff() / std::pow(omega_pr, k));
            rho[k] = std::move(next);
        }
        const Matrix rm1 = rho[1].adjoint();
        const Matrix b0 = vplus(rm1) + vminus(rho[1]);
        Matrix r0 = unvec(bordered(-vec(b0), 1.0), dim_);
        r0 = 0.5 * (r0 + r0.adjoint());
        change = std::max(change, (r0 - rho[0]).cwiseAbs().maxCoeff());
        rho[0] = std::move(r0);
        if (sweep > 0 && change <= options_.tol * std::max(1.0, scale)) {
            rho.pop_back();
            return rho;
        }
    }
    throw NumericalError("weak-probe harmonic iteration did not converge at delta = " + std::to_string(delta));
}

std::vector<Matrix> WeakProbe::harmonics(double delta, double omega_pr) const { return solve(delta, omega_pr); }

double WeakProbe::rate(const std::vector<Matrix>& rho, double omega_pr) const
{
    // Probe-driven excitation rate, averaged over the beat period.
    const Matrix Pd = P_.adjoint();
    const Matrix rm1 = rho[1].adjoint();
    const Matrix c = (P_ * rm1 - rm1 * P_) + (Pd * rho[1] - rho[1] * Pd);
    Complex s = 0.0;
    for (std::size_t e : excited_)
        s += c(e, e);
    return (-kI * 0.5 * omega_pr * s).real();
}

double WeakProbe::absorption(double delta, std::optional<double> omega_pr) const
{
    const double w = omega_pr.value_or(omega_pr_);
    if (!(w > 0))
        throw std::invalid_argument("probe Rabi frequency must be positive");
    return 2.0 * rate(solve(delta, w), w) / (w * w * norm_);
}

PerpendicularSpectrum perpendicular_gain_spectrum(const LevelScheme& scheme, const FieldConfig& fields,
                                                  const std::vector<double>& delta_grid,
                                                  const PerpendicularOptions& options)
{
    PerpendicularSpectrum out;
    out.regression = probe_spectrum(scheme, fields, Polarization::Perpendicular, delta_grid, options.correlation,
                                    options.weak_probe.convention);

    const WeakProbe wp(scheme, fields, Polarization::Perpendicular, options.weak_probe);
    struct Pair {
        double full;
        double half;
    };
    const bool lin = options.check_linearity;
    const auto vals = map_indices(
        delta_grid.size(),
        [&](std::size_t i) {
            Pair p{wp.absorption(delta_grid[i]), 0.0};
            if (lin)
                p.half = wp.absorption(delta_grid[i], 0.5 * wp.probe_rabi());
            return p;
        },
        options.correlation.execution);

    out.weak_probe.delta = delta_grid;
    out.weak_probe.fields = fields;
    out.weak_probe.fields.omega_pr = wp.probe_rabi();
    double peak = 0.0;
    for (const auto& v : vals) {
        out.weak_probe.absorption.push_back(v.full);
        peak = std::max(peak, std::abs(v.full));
    }
    if (lin)
        for (const auto& v : vals)
            if (std::abs(v.full) > 1e-3 * peak)
                out.linearity_change = std::max(out.linearity_change, std::abs(v.half - v.full) / std::abs(v.full));
    return out;
}

std::vector<GainWindow> gain_windows(const std::vector<double>& x, const std::vector<double>& y, double floor)
{
    if (x.size() != y.size())
        throw std::invalid_argument("gain_windows: size mismatch");
    auto crossing = [&](std::size_t i, std::size_t j) {
        // zero of the chord through (x_i, y_i), (x_j, y_j)
        return x[i] + (x[j] - x[i]) * (y[i] / (y[i] - y[j]));
    };
    std::vector<GainWindow> out;
    std::size_t i = 0;
    while (i < y.size()) {
        if (!(y[i] < -floor)) {
            ++i;
            continue;
        }
        GainWindow w;
        w.lower = i == 0 ? x[0] : crossing(i - 1, i);
        w.depth = y[i];
        w.delta_at_min = x[i];
        std::size_t j = i;
        while (j + 1 < y.size() && y[j + 1] < -floor) {
            ++j;
            if (y[j] < w.depth) {
                w.depth = y[j];
                w.delta_at_min = x[j];
            }
        }
        w.upper = j + 1 == y.size() ? x[j] : crossing(j, j + 1);
        out.push_back(w);
        i = j + 1;
    }
    return out;
}

MinAbsorptionScan min_absorption_scan(const LevelScheme& scheme, double delta_p,
                                      const std::vector<double>& omega_grid, const std::vector<double>& delta_grid,
                                      const MinAbsorptionOptions& options)
{
    if (omega_grid.empty())
        throw std::invalid_argument("omega_p grid is empty");
    if (delta_grid.empty())
        throw std::invalid_argument("delta grid is empty");
    for (std::size_t i = 0; i < omega_grid.size(); ++i)
        if (!(omega_grid[i] > 0) || (i > 0 && !(omega_grid[i] > omega_grid[i - 1])))
            throw std::invalid_argument("omega_p grid must be positive and strictly increasing");

    MinAbsorptionScan scan;
    scan.points = map_indices(
        omega_grid.size(),
        [&](std::size_t i) {
            FieldConfig f;
            f.omega_p = omega_grid[i];
            f.delta_p = delta_p;
            f.delta_pr = delta_p;
            const WeakProbe wp(scheme, f, Polarization::Perpendicular, options.weak_probe);
            std::size_t best = 0;
            std::vector<double> vals(delta_grid.size());
            for (std::size_t k = 0; k < delta_grid.size(); ++k) {
                vals[k] = wp.absorption(delta_grid[k]);
                if (vals[k] < vals[best])
                    best = k;
            }
            MinAbsorptionPoint p{omega_grid[i], vals[best], delta_grid[best]};
            if (options.refine && delta_grid.size() >= 3) {
                const double lo = delta_grid[best == 0 ? 0 : best - 1];
                const double hi = delta_grid[std::min(best + 1, delta_grid.size() - 1)];
                std::uintmax_t iters = 60;
                const auto r = boost::math::tools::brent_find_minima(
                    [&wp](double x) { return wp.absorption(x); }, lo, hi, 40, iters);
                if (r.second < p.min_absorption) {
                    p.min_absorption = r.second;
                    p.delta_at_min = r.first;
                }
            }
            return p;
        },
        options.execution);

    for (std::size_t i = 0; i < scan.points.size(); ++i) {
        if (!(scan.points[i].min_absorption < 0))
            continue;
        std::size_t j = i;
        while (j + 1 < scan.points.size() && scan.points[j + 1].min_absorption < 0)
            ++j;
        scan.gain_ranges.emplace_back(scan.points[i].omega_p, scan.points[j].omega_p);
        i = j;
    }
    return scan;
}

DressedLadder dressed_ladder(const LevelScheme& scheme, const Matrix& H)
{
    const auto d = static_cast<Eigen::Index>(scheme.dimension());
    if (H.rows() != d || H.cols() != d)
        throw std::invalid_argument("Hamiltonian dimension does not match the scheme");
    DressedLadder out;
    Eigen::SelfAdjointEigenSolver<Matrix> es(H, Eigen::EigenvaluesOnly);
    out.eigenvalues = es.eigenvalues();
    for (std::size_t e : scheme.excited_indices())
        for (std::size_t g : scheme.ground_indices()) {
            const double coupling = 2.0 * std::abs(H(g, e));
            if (coupling == 0.0)
                continue;
            const double detuning = (H(e, e) - H(g, g)).real();
            PairSideband p;
            p.g = g;
            p.e = e;
            p.rabi = coupling;
            p.generalized_rabi = std::hypot(coupling, detuning);
            p.absorption_offset = detuning < 0 ? p.generalized_rabi : -p.generalized_rabi;
            p.gain_offset = -p.absorption_offset;
            out.pairs.push_back(p);
        }
    return out;
}

} // namespace mirrorless::spectra
