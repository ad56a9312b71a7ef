#pragma once

#include <functional>
#include <vector>

#include "boltz/collision.hpp"
#include "boltz/equilibrium.hpp"
#include "boltz/moments.hpp"
#include "boltz/phase_space.hpp"

namespace boltz {

enum class Limiter { VanAlbada, Minmod };

/**
 * Space-homogeneous relaxation: forward-Euler integration of df_i/dt = Q_i
 * with the fixed collision time step Δt.  Throws BlowUp on NaN or runaway
 * norms.
 */
class RelaxationSolver {
  public:
    RelaxationSolver(const GasModel& model, const VelocityGrid& grid, CollisionKernel& kernel,
                     double dt);

    void set_state(std::vector<Distribution> f);
    const std::vector<Distribution>& state() const { return f_; }
    std::vector<Distribution>& state() { return f_; }

    /** One forward-Euler step; returns the relative state change Σ|Δf|/Σ|f|. */
    double step();

    MomentSet moments() const;
    double time() const { return t_; }

  private:
    const GasModel& model_;
    VelocityGrid grid_;
    CollisionKernel& kernel_;
    double dt_;
    double t_ = 0.0;
    std::vector<Distribution> f_;
    std::vector<Distribution> q_;
};

/** Per-species inflow stream: level densities plus a common (T, vx). */
struct StreamSpec {
    std::vector<double> rho_i;
    double T = 0.0;
    double vx = 0.0;
};

struct ShockOptions {
    double cfl = 0.5;
    double dt_collision = 1e-8;
    Limiter limiter = Limiter::VanAlbada;
    double blowup_ceiling = 1e60;   ///< max |f| before BlowUp
    /// When positive, collisions are evaluated only inside the contiguous
    /// window of cells that deviate from both pinned far-field states by more
    /// than this relative max-norm tolerance (padded by two cells each side).
    /// Far-field cells are in local equilibrium, where the collision operator
    /// vanishes identically; skipping them avoids the dominant cost and keeps
    /// the plateaus free of spectral quadrature drift.  0 disables.
    double active_tol = 0.0;
};

/**
 * 1-D (x) finite-volume transport coupled to the spectral collision operator:
 * MUSCL-reconstructed upwind fluxes (van Albada or minmod limiter), two
 * Dirichlet ghost layers per side holding the upstream/downstream equilibrium
 * Maxwellians, forward-Euler in time with
 *   Δt = min_s CFL / (1/Δt_c + Lv/Δx_s).
 */
class ShockSolver {
  public:
    ShockSolver(const GasModel& model, const VelocityGrid& vgrid, const SpatialGrid& xgrid,
                CollisionKernel& kernel, const ShockOptions& options);

    /** Fill cells (split at x_jump) and ghosts with stream Maxwellians. */
    void initialize(const StreamSpec& upstream, const StreamSpec& downstream,
                    double x_jump = 0.0);

    struct StepInfo {
        double dt = 0.0;
        double residual = 0.0;    ///< Σ|Δf| / Σ|f| over all cells/species
        int active_cells = 0;     ///< cells whose collision term was evaluated
    };
    StepInfo step();

    /** March until `max_steps` or residual < steady_tol; returns steps taken. */
    int run(int max_steps, double steady_tol,
            const std::function<void(int, const StepInfo&)>& monitor = {});

    int cells() const { return xgrid_.cells(); }
    const Distribution& distribution(int cell, int species) const;
    MomentSet cell_moments(int cell) const;
    const SpatialGrid& spatial_grid() const { return xgrid_; }
    double time() const { return t_; }

  private:
    const GasModel& model_;
    VelocityGrid vgrid_;
    SpatialGrid xgrid_;
    CollisionKernel& kernel_;
    ShockOptions opt_;
    double t_ = 0.0;
    int ns_ = 0;
    // state[cell][species], cells indexed −2 … cells()+1 via offset 2 (ghosts)
    std::vector<std::vector<Distribution>> state_;
    std::vector<std::vector<Distribution>> next_;
    std::vector<double> vx_pos_, vx_neg_;   // per-node upwind splits
    std::vector<Distribution> flux_;        // per-interface workspace (one species at a time)
    std::vector<Distribution> qwork_;       // per-species collision workspace
    std::array<std::vector<double>, 2> far_scale_;   // max|f_ghost| per species

    void apply_transport(double dt);
};

}  // namespace boltz
