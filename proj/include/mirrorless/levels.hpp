#pragma once

// Sublevel ladder, field couplings, Hamiltonian and decay channels for one
// F_g -> F_e line driven by a z-polarized pump and an x-polarized probe.
//
// Frequencies are in units of Γ, times in 1/Γ. Detunings follow Δ = ω_0 − ω.

#include "mirrorless/angular.hpp"
#include "mirrorless/common.hpp"

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace mirrorless::levels {

using angular::AngMom;

enum class Manifold { Ground, Excited };

struct Sublevel {
    Manifold manifold;
    AngMom m;

    bool operator==(const Sublevel&) const = default;
};

std::string label(const Sublevel& s); // "g(-1)", "e(3/2)"

/// How the reduced Rabi frequency Ω_p is attached to the sublevel couplings.
///  ExcitedReduced: Ω_ij = Ω_p √((2F_e+1)/(2F_g+1)) · dipole_weight. The squared
///    couplings of each excited sublevel sum to one, so for a cycling transition
///    they equal the branching ratios and the two-level limit has Rabi Ω_p.
///  GroundReduced:  Ω_ij = Ω_p · dipole_weight.
enum class RabiConvention { ExcitedReduced, GroundReduced };

/// Diagonal of the rotating-frame Hamiltonian.
///  Pump:    every excited sublevel sits at Δ_p (frame of the pump). A static
///           probe term is then only consistent when δ = 0.
///  Printed: Δ_pr on excited sublevels without a π partner and Δ_p + Δ_pr on the
///           π-coupled ones. Kept for structural comparison.
enum class RotatingFrame { Pump, Printed };

class LevelScheme {
public:
    /// Orders sublevels by m ascending, ground before excited at equal m.
    /// Throws std::invalid_argument for a non-dipole F pair.
    LevelScheme(AngMom Fg, AngMom Fe);

    AngMom ground_F() const { return Fg_; }
    AngMom excited_F() const { return Fe_; }
    std::size_t dimension() const { return sublevels_.size(); }

    const std::vector<Sublevel>& sublevels() const { return sublevels_; }
    const Sublevel& sublevel(std::size_t i) const { return sublevels_.at(i); }
    bool is_excited(std::size_t i) const { return sublevels_.at(i).manifold == Manifold::Excited; }

    std::optional<std::size_t> find(Manifold manifold, AngMom m) const;
    /// Throws std::out_of_range for an absent sublevel.
    std::size_t index(Manifold manifold, AngMom m) const;

    const std::vector<std::size_t>& ground_indices() const { return ground_; }
    const std::vector<std::size_t>& excited_indices() const { return excited_; }

    /// perm[i] is the index of the sublevel with m -> -m.
    std::vector<std::size_t> mirror_permutation() const;

private:
    AngMom Fg_, Fe_;
    std::vector<Sublevel> sublevels_;
    std::vector<std::size_t> ground_, excited_;
};

LevelScheme build_scheme(AngMom Fg, AngMom Fe);

/// One allowed g <-> e dipole pair with its gauge-fixed signed weight.
struct Transition {
    std::size_t g = 0;
    std::size_t e = 0;
    int q = 0; // m_g - m_e
    double weight = 0.0;
};

/// All allowed transitions under the given convention. Each excited sublevel
/// carries a sign chosen so that its π coupling is positive, or, without a
/// π partner, its lowest-m_g coupling. The choice commutes with m -> -m.
std::vector<Transition> transitions(const LevelScheme& scheme,
                                    RabiConvention convention = RabiConvention::ExcitedReduced);

struct FieldConfig {
    double omega_p = 0.0;
    double omega_pr = 0.0;
    double delta_p = 0.0;
    double delta_pr = 0.0;

    /// δ = ω_p − ω_pr = Δ_pr − Δ_p.
    double offset() const { return delta_pr - delta_p; }

    /// Throws std::invalid_argument for negative or non-finite values.
    void validate() const;
};

struct HamiltonianOptions {
    RabiConvention convention = RabiConvention::ExcitedReduced;
    RotatingFrame frame = RotatingFrame::Pump;
};

/// Raising part of the z (π) and x (σ±) dipole operators, with
///   μ_z = Pz + Pz†,  μ_x = Px + Px†,
///   (Pz)_eg = w,  (Px)_eg = −i w/√2  for the signed weights w.
Matrix raising_z(const LevelScheme& scheme, RabiConvention convention = RabiConvention::ExcitedReduced);
Matrix raising_x(const LevelScheme& scheme, RabiConvention convention = RabiConvention::ExcitedReduced);
Matrix dipole_z(const LevelScheme& scheme, RabiConvention convention = RabiConvention::ExcitedReduced);
Matrix dipole_x(const LevelScheme& scheme, RabiConvention convention = RabiConvention::ExcitedReduced);

/// H/ħ = diag + (Ω_p/2) μ_z + (Ω_pr/2) μ_x.
/// In the Pump frame a nonzero probe with δ ≠ 0 is rejected with
/// std::invalid_argument, since that Hamiltonian is time dependent.
Matrix build_hamiltonian(const LevelScheme& scheme, const FieldConfig& fields,
                         const HamiltonianOptions& options = {});

/// σ_k^− for k = 0 (Δm = 0), 1 (m_g = m_e − 1), 2 (m_g = m_e + 1).
/// (σ_k^−)_ge is the signed weight normalized over its excited row, so that
/// |entry|² = b_eg.
struct CollapseChannels {
    std::array<Matrix, 3> lowering;

    /// Σ_k σ_k^+ σ_k^−.
    Matrix total_rate() const;
};

CollapseChannels build_collapse(const LevelScheme& scheme,
                                RabiConvention convention = RabiConvention::ExcitedReduced);

} // namespace mirrorless::levels
