#pragma once

#include <array>
#include <vector>

#include "boltz/model.hpp"
#include "boltz/phase_space.hpp"

namespace boltz {

/**
 * Maxwellian node values for species i:
 *   f_i(v) = (ρ_i/m_i) (m_i / 2π k_B T)^{3/2} exp(−m_i |v−V|² / 2 k_B T).
 */
void maxwellian(const GasModel& model, const VelocityGrid& grid, int i, double rho_i,
                const std::array<double, 3>& V, double T, double* f);

/** Boltzmann level population fractions n_i/n at temperature T. */
std::vector<double> boltzmann_fractions(const GasModel& model, double T);

/**
 * Equilibrium temperature of an isochoric system: solves
 *   (3/2) n k_B T + n ē_int(T) = E  (energy density about V, J/m³)
 * by bisection + Newton to 1e-8 relative.  `n` is the total number density.
 */
double equilibrium_temperature(const GasModel& model, double n, double energy_density);

/** Primitive state of a 1-D equilibrium stream. */
struct FlowState {
    double rho = 0.0;
    double T = 0.0;
    double vx = 0.0;
};

/**
 * Post-shock equilibrium state from mass/momentum/energy flux conservation.
 *
 * `mass_fractions` fixes the species composition for an inert mixture
 * (common-mass multi-level gases instead repopulate levels by the Boltzmann
 * law at the local temperature, which feeds back into the energy flux).
 * Solved by damped Newton on the three flux residuals (relative tolerance
 * 1e-10), initialized from the calorically-perfect γ = 5/3 jump.
 */
FlowState rankine_hugoniot_downstream(const GasModel& model,
                                      const std::vector<double>& mass_fractions,
                                      const FlowState& upstream);

/** Calorically-perfect monatomic (γ = 5/3) jump used as the Newton seed. */
FlowState perfect_gas_jump(const GasModel& model, const std::vector<double>& mass_fractions,
                           const FlowState& upstream);

}  // namespace boltz
