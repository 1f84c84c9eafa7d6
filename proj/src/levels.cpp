#include "mirrorless/levels.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace mirrorless::levels {

std::string label(const Sublevel& s)
{
    return std::string(s.manifold == Manifold::Ground ? "g(" : "e(") + angular::to_string(s.m) + ")";
}

LevelScheme::LevelScheme(AngMom Fg, AngMom Fe) : Fg_(Fg), Fe_(Fe)
{
    angular::check_dipole_pair(Fg, Fe);
    const int top = std::max(Fg.twice, Fe.twice);
    for (int m = -top; m <= top; m += 2) {
        if (std::abs(m) <= Fg.twice && (Fg.twice - m) % 2 == 0)
            sublevels_.push_back({Manifold::Ground, AngMom{m}});
        if (std::abs(m) <= Fe.twice && (Fe.twice - m) % 2 == 0)
            sublevels_.push_back({Manifold::Excited, AngMom{m}});
    }
    for (std::size_t i = 0; i < sublevels_.size(); ++i)
        (sublevels_[i].manifold == Manifold::Ground ? ground_ : excited_).push_back(i);
}

std::optional<std::size_t> LevelScheme::find(Manifold manifold, AngMom m) const
{
    const auto it = std::find(sublevels_.begin(), sublevels_.end(), Sublevel{manifold, m});
    if (it == sublevels_.end())
        return std::nullopt;
    return static_cast<std::size_t>(it - sublevels_.begin());
}

std::size_t LevelScheme::index(Manifold manifold, AngMom m) const
{
    if (auto i = find(manifold, m))
        return *i;
    throw std::out_of_range("no sublevel " + label({manifold, m}) + " in this scheme");
}

std::vector<std::size_t> LevelScheme::mirror_permutation() const
{
    std::vector<std::size_t> perm(dimension());
    for (std::size_t i = 0; i < dimension(); ++i)
        perm[i] = index(sublevels_[i].manifold, -sublevels_[i].m);
    return perm;
}

LevelScheme build_scheme(AngMom Fg, AngMom Fe) { return LevelScheme(Fg, Fe); }

std::vector<Transition> transitions(const LevelScheme& scheme, RabiConvention convention)
{
    const AngMom Fg = scheme.ground_F(), Fe = scheme.excited_F();
    const double scale = convention == RabiConvention::ExcitedReduced
                             ? std::sqrt(double(Fe.twice + 1) / double(Fg.twice + 1))
                             : 1.0;
    std::vector<Transition> out;
    for (std::size_t e : scheme.excited_indices()) {
        const AngMom me = scheme.sublevel(e).m;
        std::vector<Transition> row;
        for (std::size_t g : scheme.ground_indices()) {
            const AngMom mg = scheme.sublevel(g).m;
            const int q2 = mg.twice - me.twice;
            if (std::abs(q2) > 2)
                continue;
            const double w = angular::dipole_weight(Fg, mg, Fe, me, q2 / 2);
            if (w != 0.0)
                row.push_back({g, e, q2 / 2, scale * w});
        }
        if (row.empty())
            continue;
        // Gauge: π coupling positive; otherwise the first one in ascending m_g.
        auto ref = std::find_if(row.begin(), row.end(), [](const Transition& t) { return t.q == 0; });
        if (ref == row.end())
            ref = row.begin();
        if (ref->weight < 0)
            for (auto& t : row)
                t.weight = -t.weight;
        out.insert(out.end(), row.begin(), row.end());
    }
    return out;
}

void FieldConfig::validate() const
{
    for (double v : {omega_p, omega_pr, delta_p, delta_pr})
        if (!std::isfinite(v))
            throw std::invalid_argument("field parameters must be finite");
    if (omega_p < 0 || omega_pr < 0)
        throw std::invalid_argument("Rabi frequencies must be nonnegative");
}

Matrix raising_z(const LevelScheme& scheme, RabiConvention convention)
{
    const auto d = static_cast<Eigen::Index>(scheme.dimension());
    Matrix P = Matrix::Zero(d, d);
    for (const auto& t : transitions(scheme, convention))
        if (t.q == 0)
            P(t.e, t.g) = t.weight;
    return P;
}

Matrix raising_x(const LevelScheme& scheme, RabiConvention convention)
{
    const auto d = static_cast<Eigen::Index>(scheme.dimension());
    Matrix P = Matrix::Zero(d, d);
    for (const auto& t : transitions(scheme, convention))
        if (t.q != 0)
            P(t.e, t.g) = -kI * t.weight / std::sqrt(2.0);
    return P;
}

Matrix dipole_z(const LevelScheme& scheme, RabiConvention convention)
{
    const Matrix P = raising_z(scheme, convention);
    return P + P.adjoint();
}

Matrix dipole_x(const LevelScheme& scheme, RabiConvention convention)
{
    const Matrix P = raising_x(scheme, convention);
    return P + P.adjoint();
}

Matrix build_hamiltonian(const LevelScheme& scheme, const FieldConfig& fields,
                         const HamiltonianOptions& options)
{
    fields.validate();
    if (options.frame == RotatingFrame::Pump && fields.omega_pr != 0.0 && fields.offset() != 0.0)
        throw std::invalid_argument(
            "a static probe term in the pump frame requires delta_pr == delta_p");

    const auto d = static_cast<Eigen::Index>(scheme.dimension());
    const auto trans = transitions(scheme, options.convention);
    Matrix H = Matrix::Zero(d, d);

    std::vector<bool> pi_coupled(scheme.dimension(), false);
    for (const auto& t : trans)
        if (t.q == 0)
            pi_coupled[t.e] = true;
    for (std::size_t e : scheme.excited_indices()) {
        double diag = fields.delta_p;
        if (options.frame == RotatingFrame::Printed)
            diag = pi_coupled[e] ? fields.delta_p + fields.delta_pr : fields.delta_pr;
        H(e, e) = diag;
    }

    for (const auto& t : trans) {
        Complex v;
        if (t.q == 0)
            v = 0.5 * fields.omega_p * t.weight;
        else
            v = 0.5 * fields.omega_pr * kI * t.weight / std::sqrt(2.0);
        H(t.g, t.e) = v;
        H(t.e, t.g) = std::conj(v);
    }
    return H;
}

Matrix CollapseChannels::total_rate() const
{
    Matrix total = Matrix::Zero(lowering[0].rows(), lowering[0].cols());
    for (const auto& c : lowering)
        total += c.adjoint() * c;
    return total;
}

CollapseChannels build_collapse(const LevelScheme& scheme, RabiConvention convention)
{
    const auto d = static_cast<Eigen::Index>(scheme.dimension());
    const auto trans = transitions(scheme, convention);
    std::map<std::size_t, double> row_norm;
    for (const auto& t : trans)
        row_norm[t.e] += t.weight * t.weight;

    CollapseChannels c;
    for (auto& m : c.lowering)
        m = Matrix::Zero(d, d);
    for (const auto& t : trans) {
        const int k = t.q == 0 ? 0 : (t.q < 0 ? 1 : 2);
        c.lowering[k](t.g, t.e) = t.weight / std::sqrt(row_norm[t.e]);
    }
    return c;
}

} // namespace mirrorless::levels
