#include "boltz/transport.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "boltz/errors.hpp"

namespace boltz {

namespace {

// Slope limiter φ(r).  Both choices vanish for r ≤ 0 (first-order fallback at
// extrema) and equal 1 at r = 1 (second-order on smooth data).
double limiter_value(Limiter lim, double r) {
    if (lim == Limiter::VanAlbada) return r > 0.0 ? (r * r + r) / (r * r + 1.0) : 0.0;
    return std::max(0.0, std::min(1.0, r));  // minmod
}

// Ratio of consecutive differences with a flat-field guard: a vanishing
// denominator means a locally flat stencil, where the limited correction must
// vanish as well.
double ratio(double num, double den) { return std::abs(den) < 1e-300 ? 0.0 : num / den; }

}  // namespace

// ---------------------------------------------------------------------------
// RelaxationSolver
// ---------------------------------------------------------------------------

RelaxationSolver::RelaxationSolver(const GasModel& model, const VelocityGrid& grid,
                                   CollisionKernel& kernel, double dt)
    : model_(model), grid_(grid), kernel_(kernel), dt_(dt) {
    if (!(dt > 0.0)) throw ValidationError("time.dt_collision", "must be positive");
    if (kernel.grid().nv != grid.nv || kernel.grid().lv != grid.lv)
        throw ValidationError("grid", "collision kernel grid does not match");
    f_.assign(model.count(), Distribution(grid.size(), 0.0));
    q_.assign(model.count(), Distribution(grid.size(), 0.0));
}

void RelaxationSolver::set_state(std::vector<Distribution> f) {
    if (static_cast<int>(f.size()) != model_.count())
        throw ValidationError("initial", "species count does not match the model");
    for (const Distribution& fi : f)
        if (fi.size() != grid_.size())
            throw ValidationError("initial", "distribution size does not match the grid");
    f_ = std::move(f);
}

double RelaxationSolver::step() {
    std::vector<const double*> fv(f_.size());
    std::vector<double*> qv(f_.size());
    for (std::size_t i = 0; i < f_.size(); ++i) {
        fv[i] = f_[i].data();
        qv[i] = q_[i].data();
    }
    kernel_.evaluate(fv, qv);
    long double change = 0.0L, norm = 0.0L;
    double fmax = 0.0;
    for (std::size_t i = 0; i < f_.size(); ++i) {
        double* fi = f_[i].data();
        const double* qi = q_[i].data();
        for (std::size_t k = 0; k < grid_.size(); ++k) {
            const double df = dt_ * qi[k];
            norm += std::abs(fi[k]);
            change += std::abs(df);
            fi[k] += df;
            fmax = std::max(fmax, std::abs(fi[k]));
        }
    }
    if (!std::isfinite(fmax) || fmax > 1e60)
        throw BlowUp("relaxation state left the representable range");
    t_ += dt_;
    return norm > 0.0L ? static_cast<double>(change / norm) : 0.0;
}

MomentSet RelaxationSolver::moments() const {
    std::vector<const double*> fv(f_.size());
    for (std::size_t i = 0; i < f_.size(); ++i) fv[i] = f_[i].data();
    return compute_moments(model_, grid_, fv);
}

// ---------------------------------------------------------------------------
// ShockSolver
// ---------------------------------------------------------------------------

ShockSolver::ShockSolver(const GasModel& model, const VelocityGrid& vgrid,
                         const SpatialGrid& xgrid, CollisionKernel& kernel,
                         const ShockOptions& options)
    : model_(model), vgrid_(vgrid), xgrid_(xgrid), kernel_(kernel), opt_(options),
      ns_(model.count()) {
    if (kernel.grid().nv != vgrid.nv || kernel.grid().lv != vgrid.lv)
        throw ValidationError("grid", "collision kernel grid does not match");
    if (xgrid.cells() < 1) throw ValidationError("shock.nx", "needs at least one cell");
    if (!(opt_.dt_collision > 0.0))
        throw ValidationError("time.dt_collision", "must be positive");
    if (!(opt_.cfl > 0.0) || opt_.cfl > 1.0)
        throw ValidationError("time.cfl", "must lie in (0, 1]");
    const int total = xgrid.cells() + 4;  // two ghost layers per side
    state_.assign(total, std::vector<Distribution>(ns_, Distribution(vgrid.size(), 0.0)));
    next_ = state_;
    flux_.assign(xgrid.cells() + 1, Distribution(vgrid.size(), 0.0));
    qwork_.assign(ns_, Distribution(vgrid.size(), 0.0));
    vx_pos_.resize(vgrid.size());
    vx_neg_.resize(vgrid.size());
    std::size_t k = 0;
    for (int kx = 0; kx < vgrid.nv; ++kx) {
        const double vx = vgrid.velocity(kx);
        for (int r = 0; r < vgrid.nv * vgrid.nv; ++r, ++k) {
            vx_pos_[k] = std::max(vx, 0.0);
            vx_neg_[k] = std::min(vx, 0.0);
        }
    }
}

void ShockSolver::initialize(const StreamSpec& upstream, const StreamSpec& downstream,
                             double x_jump) {
    for (const StreamSpec* s : {&upstream, &downstream})
        if (static_cast<int>(s->rho_i.size()) != ns_)
            throw ValidationError("shock", "stream species count does not match the model");
    const int total = xgrid_.cells() + 4;
    for (int a = 0; a < total; ++a) {
        const StreamSpec* s;
        if (a < 2) {
            s = &upstream;  // left Dirichlet ghosts
        } else if (a >= xgrid_.cells() + 2) {
            s = &downstream;  // right Dirichlet ghosts
        } else {
            s = xgrid_.centroid(a - 2) <= x_jump ? &upstream : &downstream;
        }
        for (int i = 0; i < ns_; ++i)
            maxwellian(model_, vgrid_, i, s->rho_i[i], {s->vx, 0.0, 0.0}, s->T,
                       state_[a][i].data());
    }
    next_ = state_;  // ghosts in particular are never rewritten by stepping
    for (int side = 0; side < 2; ++side) {
        far_scale_[side].assign(ns_, 0.0);
        const auto& ghost = state_[side == 0 ? 0 : xgrid_.cells() + 3];
        for (int i = 0; i < ns_; ++i)
            for (const double v : ghost[i])
                far_scale_[side][i] = std::max(far_scale_[side][i], std::abs(v));
    }
    t_ = 0.0;
}

bool ShockSolver::at_far_field(int cell, int side) const {
    const auto& ghost = state_[side == 0 ? 0 : xgrid_.cells() + 3];
    for (int i = 0; i < ns_; ++i) {
        const double* f = state_[cell + 2][i].data();
        const double* g = ghost[i].data();
        const double bound = opt_.active_tol * far_scale_[side][i];
        for (std::size_t k = 0; k < vgrid_.size(); ++k)
            if (std::abs(f[k] - g[k]) > bound) return false;
    }
    return true;
}

void ShockSolver::apply_transport(double dt) {
    const int c = xgrid_.cells();
    const std::size_t n = vgrid_.size();
    const double lam = dt / xgrid_.dx();
    for (int i = 0; i < ns_; ++i) {
        // Interface j sits between cells j−1 and j; the MUSCL stencil spans
        // array entries j … j+3 (ghosts included at both ends).
        for (int j = 0; j <= c; ++j) {
            const double* f0 = state_[j][i].data();
            const double* f1 = state_[j + 1][i].data();
            const double* f2 = state_[j + 2][i].data();
            const double* f3 = state_[j + 3][i].data();
            double* flx = flux_[j].data();
            for (std::size_t k = 0; k < n; ++k) {
                const double d1 = f1[k] - f0[k];
                const double d2 = f2[k] - f1[k];
                const double d3 = f3[k] - f2[k];
                const double fl =
                    f1[k] + 0.5 * limiter_value(opt_.limiter, ratio(d2, d1)) * d1;
                const double fr =
                    f2[k] - 0.5 * limiter_value(opt_.limiter, ratio(d2, d3)) * d3;
                flx[k] = vx_pos_[k] * fl + vx_neg_[k] * fr;
            }
        }
        for (int s = 0; s < c; ++s) {
            const double* fc = state_[s + 2][i].data();
            const double* fp = flux_[s + 1].data();
            const double* fm = flux_[s].data();
            double* out = next_[s + 2][i].data();
            for (std::size_t k = 0; k < n; ++k) out[k] = fc[k] - lam * (fp[k] - fm[k]);
        }
    }
}

ShockSolver::StepInfo ShockSolver::step() {
    const double dt = opt_.cfl / (1.0 / opt_.dt_collision + vgrid_.lv / xgrid_.dx());
    apply_transport(dt);

    // Collision activity window (whole domain when the option is off).
    const int c = xgrid_.cells();
    int lo = 0, hi = c - 1;
    if (opt_.active_tol > 0.0) {
        int first = c, last = -1;
        for (int s = 0; s < c; ++s)
            if (!at_far_field(s, 0) && !at_far_field(s, 1)) {
                first = std::min(first, s);
                last = std::max(last, s);
            }
        lo = std::max(0, first - 2);
        hi = std::min(c - 1, last + 2);
    }

    std::vector<const double*> fv(ns_);
    std::vector<double*> qv(ns_);
    int active = 0;
    for (int s = lo; s <= hi; ++s, ++active) {
        for (int i = 0; i < ns_; ++i) {
            fv[i] = state_[s + 2][i].data();
            qv[i] = qwork_[i].data();
        }
        kernel_.evaluate(fv, qv);
        for (int i = 0; i < ns_; ++i) {
            double* out = next_[s + 2][i].data();
            const double* qi = qwork_[i].data();
            for (std::size_t k = 0; k < vgrid_.size(); ++k) out[k] += dt * qi[k];
        }
    }

    long double change = 0.0L, norm = 0.0L;
    double fmax = 0.0;
    for (int s = 0; s < c; ++s)
        for (int i = 0; i < ns_; ++i) {
            const double* fn = next_[s + 2][i].data();
            const double* fo = state_[s + 2][i].data();
            for (std::size_t k = 0; k < vgrid_.size(); ++k) {
                change += std::abs(fn[k] - fo[k]);
                norm += std::abs(fo[k]);
                fmax = std::max(fmax, std::abs(fn[k]));
            }
        }
    if (!std::isfinite(fmax) || fmax > opt_.blowup_ceiling)
        throw BlowUp("shock state left the representable range");
    std::swap(state_, next_);
    t_ += dt;
    StepInfo info;
    info.dt = dt;
    info.residual = norm > 0.0L ? static_cast<double>(change / norm) : 0.0;
    return info;
}

int ShockSolver::run(int max_steps, double steady_tol,
                     const std::function<void(int, const StepInfo&)>& monitor) {
    for (int step_no = 1; step_no <= max_steps; ++step_no) {
        const StepInfo info = step();
        if (monitor) monitor(step_no, info);
        if (info.residual < steady_tol) return step_no;
    }
    return max_steps;
}

const Distribution& ShockSolver::distribution(int cell, int species) const {
    return state_[cell + 2][species];
}

MomentSet ShockSolver::cell_moments(int cell) const {
    std::vector<const double*> fv(ns_);
    for (int i = 0; i < ns_; ++i) fv[i] = state_[cell + 2][i].data();
    return compute_moments(model_, vgrid_, fv);
}

}  // namespace boltz
