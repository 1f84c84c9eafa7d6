#include "mirrorless/dynamics.hpp"

#include "mirrorless/parallel.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mirrorless::dynamics {

using levels::LevelScheme;
using levels::Manifold;

Vector vec(const Matrix& m) { return Eigen::Map<const Vector>(m.data(), m.size()); }

Matrix unvec(const Vector& v, Eigen::Index dim)
{
    if (v.size() != dim * dim)
        throw std::invalid_argument("unvec: size mismatch");
    return Eigen::Map<const Matrix>(v.data(), dim, dim);
}

namespace {

void hermitize_in_place(Vector& y, Eigen::Index dim)
{
    Eigen::Map<Matrix> m(y.data(), dim, dim);
    const Matrix h = 0.5 * (m + m.adjoint());
    m = h;
}

} // namespace

DensityMatrix::DensityMatrix(Matrix rho) : rho_(std::move(rho))
{
    if (rho_.rows() != rho_.cols())
        throw std::invalid_argument("density matrix must be square");
}

DensityMatrix DensityMatrix::uniform_ground(const LevelScheme& scheme)
{
    const auto d = static_cast<Eigen::Index>(scheme.dimension());
    Matrix rho = Matrix::Zero(d, d);
    const double p = 1.0 / double(scheme.ground_indices().size());
    for (std::size_t g : scheme.ground_indices())
        rho(g, g) = p;
    return DensityMatrix(std::move(rho));
}

DensityMatrix DensityMatrix::pure_state(std::size_t dim, std::size_t i)
{
    Matrix rho = Matrix::Zero(dim, dim);
    rho(i, i) = 1.0;
    return DensityMatrix(std::move(rho));
}

double DensityMatrix::trace_error() const { return std::abs(rho_.trace() - Complex(1.0)); }

double DensityMatrix::hermiticity_error() const { return (rho_ - rho_.adjoint()).cwiseAbs().maxCoeff(); }

double DensityMatrix::min_eigenvalue() const
{
    const Matrix h = 0.5 * (rho_ + rho_.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

RealVector DensityMatrix::populations() const { return rho_.diagonal().real(); }

void DensityMatrix::check(double trace_tol, double herm_tol, double eig_tol) const
{
    if (trace_error() > trace_tol)
        throw NumericalError("density matrix trace error " + std::to_string(trace_error()));
    if (hermiticity_error() > herm_tol)
        throw NumericalError("density matrix not Hermitian: " + std::to_string(hermiticity_error()));
    if (min_eigenvalue() < -eig_tol)
        throw NumericalError("density matrix has negative eigenvalue " +
                             std::to_string(min_eigenvalue()));
}

Liouvillian::Liouvillian(const Matrix& H, const levels::CollapseChannels& channels, double gamma)
    : dim_(H.rows()), gamma_(gamma)
{
    if (H.rows() != H.cols())
        throw std::invalid_argument("Hamiltonian must be square");
    for (const auto& c : channels.lowering)
        if (c.rows() != dim_ || c.cols() != dim_)
            throw std::invalid_argument("collapse operator dimension does not match the Hamiltonian");

    const Matrix I = Matrix::Identity(dim_, dim_);
    L_ = -kI * (Matrix(Eigen::kroneckerProduct(I, H)) - Matrix(Eigen::kroneckerProduct(H.transpose(), I)));
    for (const auto& c : channels.lowering) {
        const Matrix cdc = c.adjoint() * c;
        L_ += gamma * (Matrix(Eigen::kroneckerProduct(c.conjugate(), c)) -
                       0.5 * Matrix(Eigen::kroneckerProduct(I, cdc)) -
                       0.5 * Matrix(Eigen::kroneckerProduct(cdc.transpose(), I)));
    }
}

Liouvillian::Liouvillian(Matrix superop, Eigen::Index dim) : L_(std::move(superop)), dim_(dim)
{
    if (L_.rows() != dim * dim || L_.cols() != dim * dim)
        throw std::invalid_argument("superoperator dimension mismatch");
}

Matrix Liouvillian::apply(const Matrix& rho) const { return unvec(L_ * vec(rho), dim_); }

double Liouvillian::trace_row_residual() const
{
    const Vector t = vec(Matrix::Identity(dim_, dim_));
    return (t.transpose() * L_).cwiseAbs().maxCoeff();
}

Liouvillian build_liouvillian(const Matrix& H, const levels::CollapseChannels& channels, double gamma)
{
    return Liouvillian(H, channels, gamma);
}

TimeSeries evolve(const Liouvillian& L, const DensityMatrix& rho0, double t_final, double tol,
                  const std::vector<double>& sample_times)
{
    const Eigen::Index d = L.dim();
    if (rho0.dim() != d)
        throw std::invalid_argument("initial state dimension does not match the Liouvillian");
    if (!(t_final >= 0))
        throw std::invalid_argument("t_final must be nonnegative");
    if (!std::is_sorted(sample_times.begin(), sample_times.end()) ||
        (!sample_times.empty() && (sample_times.front() < 0 || sample_times.back() > t_final)))
        throw std::invalid_argument("sample times must be sorted and inside [0, t_final]");

    const Matrix& S = L.superop();
    integrator::StepControl ctl;
    ctl.rtol = tol;
    ctl.atol = tol;
    integrator::DormandPrince dp([&S](double, const Vector& y, Vector& dy) { dy.noalias() = S * y; }, ctl);

    TimeSeries out;
    std::size_t next = 0;
    const bool every_step = sample_times.empty();
    if (every_step) {
        out.t.push_back(0.0);
        out.rho.push_back(rho0);
    } else {
        while (next < sample_times.size() && sample_times[next] <= 0.0) {
            out.t.push_back(sample_times[next++]);
            out.rho.push_back(rho0);
        }
    }

    Vector y = vec(rho0.matrix());
    dp.integrate(0.0, t_final, y, [&](const integrator::DenseStep& step, Vector& state) {
        hermitize_in_place(state, d);
        const double t_end = step.t0 + step.h;
        if (every_step) {
            out.t.push_back(t_end);
            out.rho.emplace_back(unvec(state, d));
        } else {
            while (next < sample_times.size() && sample_times[next] <= t_end) {
                const double ts = sample_times[next++];
                Vector s = (ts == t_end) ? state : step.at(ts);
                hermitize_in_place(s, d);
                out.t.push_back(ts);
                out.rho.emplace_back(unvec(s, d));
            }
        }
        return integrator::StepAction::ContinueModified;
    });
    out.stats = dp.stats();
    return out;
}

DegenerateSteadyState::DegenerateSteadyState(std::size_t null_dim)
    : NumericalError("steady state is not unique: null space of the Liouvillian has dimension " +
                     std::to_string(null_dim) + "; use the projected or evolution mode"),
      null_dim_(null_dim)
{
}

std::size_t null_space_dimension(const Liouvillian& L, double tol)
{
    Eigen::BDCSVD<Matrix> svd(L.superop());
    const auto& s = svd.singularValues();
    const double cut = tol * std::max(1.0, s(0));
    return static_cast<std::size_t>((s.array() < cut).count());
}

Vector bordered_solve(const Matrix& L, const Vector& b, Complex trace, Eigen::Index dim)
{
    const Eigen::Index n = L.rows();
    Matrix A(n + 1, L.cols());
    A.topRows(n) = L;
    A.row(n) = vec(Matrix::Identity(dim, dim)).transpose();
    Vector rhs(n + 1);
    rhs.head(n) = b;
    rhs(n) = trace;
    return A.completeOrthogonalDecomposition().solve(rhs);
}

namespace {

DensityMatrix hermitian_result(const Vector& x, Eigen::Index d)
{
    Matrix m = unvec(x, d);
    return DensityMatrix(0.5 * (m + m.adjoint()));
}

DensityMatrix projected(const Liouvillian& L, const DensityMatrix& rho0, double tol)
{
    Eigen::JacobiSVD<Matrix> svd(L.superop(), Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    const double cut = tol * std::max(1.0, s(0));
    const Eigen::Index n = s.size();
    Eigen::Index k = 0;
    while (k < n && s(n - 1 - k) < cut)
        ++k;
    if (k == 0)
        throw NumericalError("Liouvillian has no null space");
    const Matrix R = svd.matrixV().rightCols(k);
    const Matrix W = svd.matrixU().rightCols(k);
    const Matrix G = W.adjoint() * R;
    const Vector x = R * G.partialPivLu().solve(W.adjoint() * vec(rho0.matrix()));
    return hermitian_result(x, L.dim());
}

DensityMatrix evolved(const Liouvillian& L, const DensityMatrix& rho0, const SteadyStateOptions& o)
{
    const Eigen::Index d = L.dim();
    const Matrix& S = L.superop();
    integrator::StepControl ctl;
    // Local errors of size tol leave a residual of order ‖L‖·tol, so the
    // residual stopping rule needs a tighter integrator.
    const double tol = o.mode == SteadyStateMode::Residual ? std::min(o.tol, 1e-2 * o.residual_tol) : o.tol;
    ctl.rtol = tol;
    ctl.atol = tol;
    integrator::DormandPrince dp([&S](double, const Vector& y, Vector& dy) { dy.noalias() = S * y; }, ctl);
    Vector y = vec(rho0.matrix());
    if (o.mode == SteadyStateMode::FixedHorizon) {
        dp.integrate(0.0, o.horizon, y, [d](const integrator::DenseStep&, Vector& state) {
            hermitize_in_place(state, d);
            return integrator::StepAction::ContinueModified;
        });
        return DensityMatrix(unvec(y, d));
    }
    bool converged = false;
    dp.integrate(0.0, o.max_time, y, [&](const integrator::DenseStep&, Vector& state) {
        hermitize_in_place(state, d);
        if ((S * state).cwiseAbs().maxCoeff() < o.residual_tol) {
            converged = true;
            return integrator::StepAction::Stop;
        }
        return integrator::StepAction::ContinueModified;
    });
    if (!converged)
        throw NumericalError("steady-state residual did not fall below " + std::to_string(o.residual_tol) +
                             " before t = " + std::to_string(o.max_time));
    return DensityMatrix(unvec(y, d));
}

} // namespace

DensityMatrix steady_state(const Liouvillian& L, const SteadyStateOptions& options)
{
    const Eigen::Index d = L.dim();
    if (options.mode == SteadyStateMode::Direct) {
        const std::size_t k = null_space_dimension(L, options.null_tol);
        if (k != 1)
            throw DegenerateSteadyState(k);
        const Vector zero = Vector::Zero(L.superop().rows());
        return hermitian_result(bordered_solve(L.superop(), zero, 1.0, d), d);
    }
    if (!options.rho0)
        throw std::invalid_argument("this steady-state mode needs an initial state");
    if (options.rho0->dim() != d)
        throw std::invalid_argument("initial state dimension does not match the Liouvillian");
    if (options.mode == SteadyStateMode::Projected)
        return projected(L, *options.rho0, options.null_tol);
    return evolved(L, *options.rho0, options);
}

DensityMatrix steady_state(const Liouvillian& L, const LevelScheme& scheme, const SteadyStateOptions& options)
{
    if (options.mode == SteadyStateMode::Direct || options.rho0)
        return steady_state(L, options);
    SteadyStateOptions o = options;
    o.rho0 = DensityMatrix::uniform_ground(scheme);
    return steady_state(L, o);
}

double saturation_parameter(double omega_p, double delta_p)
{
    return omega_p * omega_p / (0.25 + delta_p * delta_p);
}

double rabi_from_saturation(double S, double delta_p)
{
    if (!(S >= 0))
        throw std::invalid_argument("saturation parameter must be nonnegative");
    return std::sqrt(S * (0.25 + delta_p * delta_p));
}

double inversion(const LevelScheme& scheme, const RealVector& pop)
{
    const auto e0 = scheme.find(Manifold::Excited, angular::AngMom{0});
    const auto g1 = scheme.find(Manifold::Ground, angular::AngMom{2});
    if (!e0 || !g1)
        throw std::invalid_argument("inversion needs sublevels m_e = 0 and m_g = +1");
    return pop(*e0) - pop(*g1);
}

SaturationPoint saturation_point(const LevelScheme& scheme, double delta_p, double S,
                                 levels::RabiConvention convention)
{
    levels::FieldConfig f;
    f.omega_p = rabi_from_saturation(S, delta_p);
    f.delta_p = delta_p;
    f.delta_pr = delta_p;
    const Matrix H = levels::build_hamiltonian(scheme, f, {convention, levels::RotatingFrame::Pump});
    const Liouvillian L(H, levels::build_collapse(scheme, convention));
    const DensityMatrix rho = steady_state(L);
    SaturationPoint p;
    p.S = S;
    p.omega_p = f.omega_p;
    p.populations = rho.populations();
    p.inversion = inversion(scheme, p.populations);
    return p;
}

InversionScan inversion_scan(const LevelScheme& scheme, double delta_p, const std::vector<double>& S_grid,
                             const InversionOptions& options)
{
    if (S_grid.empty())
        throw std::invalid_argument("S grid is empty");
    for (std::size_t i = 0; i < S_grid.size(); ++i)
        if (!(S_grid[i] > 0) || (i > 0 && !(S_grid[i] > S_grid[i - 1])))
            throw std::invalid_argument("S grid must be positive and strictly increasing");

    InversionScan scan;
    scan.points = map_indices(
        S_grid.size(),
        [&](std::size_t i) { return saturation_point(scheme, delta_p, S_grid[i], options.convention); },
        options.execution);

    for (std::size_t i = 0; i + 1 < scan.points.size(); ++i) {
        const double a = scan.points[i].inversion, b = scan.points[i + 1].inversion;
        if ((a < 0) == (b < 0))
            continue;
        double lo = std::log(scan.points[i].S), hi = std::log(scan.points[i + 1].S);
        const bool lo_negative = a < 0;
        while (std::exp(hi - lo) - 1.0 > options.threshold_rtol) {
            const double mid = 0.5 * (lo + hi);
            const double v = saturation_point(scheme, delta_p, std::exp(mid), options.convention).inversion;
            if ((v < 0) == lo_negative)
                lo = mid;
            else
                hi = mid;
        }
        scan.threshold = std::exp(0.5 * (lo + hi));
        break;
    }
    return scan;
}

} // namespace mirrorless::dynamics
