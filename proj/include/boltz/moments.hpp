#pragma once

#include <array>
#include <vector>

#include "boltz/model.hpp"
#include "boltz/phase_space.hpp"

namespace boltz {

/**
 * Discrete macroscopic moments of a set of species distributions on a cube
 * velocity grid (rectangle rule, w ≡ 1, factor Δv³).
 *
 * Species temperatures are taken about the mixture hydrodynamic velocity V;
 * pressure is Dalton's law p = Σ n_i k_B T_i; the viscous stress is
 * τ = Σ_i m_i Σ_k (v−V)⊗(v−V) f_i Δv³ − p I; the heat flux carries the
 * internal energy term (½ m_i |v−V|² + E_i).
 */
struct MomentSet {
    std::vector<double> rho_i;                  ///< species mass densities
    std::vector<double> n_i;                    ///< species number densities
    double rho = 0.0;
    double n = 0.0;
    std::array<double, 3> V{};                  ///< mixture hydrodynamic velocity
    std::vector<std::array<double, 3>> V_diff;  ///< species diffusion velocities
    std::vector<std::array<double, 3>> T_i_ax;  ///< species directional temperatures
    std::vector<double> T_i;                    ///< species translational temperatures
    std::array<double, 3> T_ax{};               ///< mixture directional temperatures
    double T = 0.0;                             ///< mixture translational temperature
    double T_int = 0.0;                         ///< internal temperature (0 if undefined)
    bool t_int_defined = false;
    bool t_int_bracket_hit = false;             ///< solver pinned at a bracket end
    double p = 0.0;
    std::array<std::array<double, 3>, 3> tau{};
    std::array<double, 3> q{};
    double e_total = 0.0;                       ///< volumetric energy ρe_tr+ρe_int+ρV²/2
};

/**
 * Compute the full moment set.  `f[i]` points at the Nv³ node values of
 * species i.  Throws EmptyCell when the total density is not positive.
 */
MomentSet compute_moments(const GasModel& model, const VelocityGrid& grid,
                          const std::vector<const double*>& f);

/** Equilibrium specific internal energy e_int^eq(T) [J/kg] (Boltzmann weights). */
double internal_energy_eq(const GasModel& model, double T);

/** Mean internal energy per particle at equilibrium [J] (Boltzmann weights). */
double internal_energy_per_particle_eq(const GasModel& model, double T);

/**
 * Invert Σ n_i E_i = ρ e_int^eq(T_int) for T_int on [t_lo, t_hi]
 * (bisection + Newton polish to 1e-10 relative).  When the target sits outside
 * the bracket the nearer endpoint is returned and *bracket_hit set; when the
 * model has no internal structure (all E_i equal) the sentinel 0 is returned
 * and *defined cleared.
 */
double solve_internal_temperature(const GasModel& model, double e_int_target_per_particle,
                                  double t_lo, double t_hi, bool* defined, bool* bracket_hit);

}  // namespace boltz
