#include <array>
#include <cmath>
#include <memory>
#include <vector>

#include "boltz/collision.hpp"
#include "boltz/constants.hpp"
#include "boltz/equilibrium.hpp"
#include "boltz/errors.hpp"
#include "boltz/moments.hpp"
#include "boltz/transport.hpp"
#include "boltz/weights.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace boltz;

namespace {

struct Setup {
    GasModel model;
    CollisionCatalog catalog;
    VelocityGrid grid;
    std::shared_ptr<const WeightTables> tables;
    std::unique_ptr<CollisionKernel> kernel;
};

Setup make_setup(GasModel model, int nv, double lv) {
    Setup s;
    s.model = std::move(model);
    s.catalog = CollisionCatalog::build(s.model);
    s.grid = VelocityGrid::make(nv, lv);
    s.tables = std::make_shared<WeightTables>(
        WeightTables::precompute(s.model, s.catalog, s.grid));
    s.kernel = std::make_unique<CollisionKernel>(s.model, s.catalog, s.grid, s.tables);
    return s;
}

/// Collisionless stand-in: zero diameters make every cross section vanish, so
/// the transport scheme can be observed in isolation.
GasModel collisionless_pair() {
    GasModel m = testutil::neon_argon();
    for (Level& lv : m.levels) lv.diameter = 0.0;
    return m;
}

}  // namespace

TEST_CASE("time step follows the collision/advection bound") {
    Setup s = make_setup(collisionless_pair(), 8, 3200.0);
    const SpatialGrid xg = SpatialGrid::make(201, -2e-2, 2e-2);
    ShockOptions opt;
    opt.cfl = 0.5;
    opt.dt_collision = 1e-8;
    ShockSolver solver(s.model, s.grid, xg, *s.kernel, opt);
    StreamSpec stream{{5e-3, 2e-3}, 300.0, 800.0};
    solver.initialize(stream, stream);
    const auto info = solver.step();
    // CFL / (1/Δt_c + Lv/Δx) with Δx = 2e-4 m.
    CHECK(info.dt == doctest::Approx(0.5 / (1e8 + 3200.0 / 2e-4)).epsilon(1e-14));
    CHECK(info.dt == doctest::Approx(4.3103448e-9).epsilon(1e-7));
}

TEST_CASE("uniform stream is an exact fixed point of the transport scheme") {
    Setup s = make_setup(collisionless_pair(), 8, 2000.0);
    const SpatialGrid xg = SpatialGrid::make(17, -1e-2, 1e-2);
    ShockOptions opt;
    for (Limiter lim : {Limiter::VanAlbada, Limiter::Minmod}) {
        opt.limiter = lim;
        ShockSolver solver(s.model, s.grid, xg, *s.kernel, opt);
        const StreamSpec stream{{5e-3, 2e-3}, 350.0, 450.0};
        solver.initialize(stream, stream);  // identical on both sides: uniform field
        std::vector<std::vector<double>> before(2);
        for (int i = 0; i < 2; ++i) before[i] = solver.distribution(3, i);
        double residual = 0.0;
        for (int n = 0; n < 100; ++n) residual = solver.step().residual;
        CHECK(residual == 0.0);
        for (int i = 0; i < 2; ++i) {
            const Distribution& after = solver.distribution(3, i);
            double worst = 0.0;
            for (std::size_t k = 0; k < after.size(); ++k)
                worst = std::max(worst, std::abs(after[k] - before[i][k]));
            CHECK(worst == 0.0);  // free-stream preservation is exact
        }
    }
}

TEST_CASE("linear profiles advect exactly (second-order reconstruction)") {
    // With data linear in x, both limiters see r = 1, φ = 1, and the scheme
    // reduces to exact characteristic transport of the slope.
    Setup s = make_setup(collisionless_pair(), 8, 2000.0);
    const SpatialGrid xg = SpatialGrid::make(11, 0.0, 1e-2);
    for (Limiter lim : {Limiter::VanAlbada, Limiter::Minmod}) {
        ShockOptions opt;
        opt.limiter = lim;
        opt.dt_collision = 1e-6;  // advection-dominated step
        ShockSolver solver(s.model, s.grid, xg, *s.kernel, opt);
        StreamSpec stream{{5e-3, 2e-3}, 300.0, 0.0};
        solver.initialize(stream, stream);

        // Overwrite the state with f(x, v) = g(v)·(1 + β x), ghosts included:
        // mimic by exploiting initialize's uniform fill, then scaling per cell.
        const double beta = 30.0;  // 1 + βx stays positive on the domain
        std::vector<Distribution> base(2);
        for (int i = 0; i < 2; ++i) base[i] = solver.distribution(0, i);
        // Rebuild a solver-independent expectation while patching the state.
        struct Patch {
            ShockSolver* solver;
        };
        // Directly scale each stored cell (including ghosts) via initialize-like
        // access: re-initialize with per-cell writes through the public API is
        // not available, so scale through const_cast of the accessor.
        for (int cell = -2; cell < solver.cells() + 2; ++cell) {
            const double x = (cell >= 0 && cell < solver.cells())
                                 ? xg.centroid(cell)
                                 : xg.x_lo + (cell + 0.5) * xg.dx();
            for (int i = 0; i < 2; ++i) {
                auto& f = const_cast<Distribution&>(solver.distribution(cell, i));
                for (std::size_t k = 0; k < f.size(); ++k)
                    f[k] = base[i][k] * (1.0 + beta * x);
            }
        }
        const auto info = solver.step();
        // Expectation: f^{n+1} = f − Δt v_x ∂f/∂x = base·(1 + βx − Δt v_x β).
        double worst = 0.0, scale = 0.0;
        for (int cell = 1; cell < solver.cells() - 1; ++cell) {
            const double x = xg.centroid(cell);
            for (int i = 0; i < 2; ++i) {
                const Distribution& f = solver.distribution(cell, i);
                std::size_t k = 0;
                for (int kx = 0; kx < s.grid.nv; ++kx) {
                    const double vx = s.grid.velocity(kx);
                    for (int r = 0; r < s.grid.nv * s.grid.nv; ++r, ++k) {
                        const double expect =
                            base[i][k] * (1.0 + beta * (x - info.dt * vx));
                        worst = std::max(worst, std::abs(f[k] - expect));
                        scale = std::max(scale, std::abs(expect));
                    }
                }
            }
        }
        CHECK(worst <= 1e-12 * scale);
    }
}

TEST_CASE("limited reconstruction keeps a step profile inside its initial range") {
    Setup s = make_setup(collisionless_pair(), 8, 2000.0);
    const SpatialGrid xg = SpatialGrid::make(41, -1e-2, 1e-2);
    for (Limiter lim : {Limiter::VanAlbada, Limiter::Minmod}) {
        ShockOptions opt;
        opt.limiter = lim;
        opt.dt_collision = 1e-6;
        ShockSolver solver(s.model, s.grid, xg, *s.kernel, opt);
        const StreamSpec hi{{5e-3, 2e-3}, 300.0, 0.0};
        const StreamSpec lo{{1e-3, 4e-4}, 300.0, 0.0};
        solver.initialize(hi, lo);
        double fmin = 1e300, fmax = -1e300;
        for (int cell = 0; cell < solver.cells(); ++cell)
            for (int i = 0; i < 2; ++i)
                for (double x : solver.distribution(cell, i)) {
                    fmin = std::min(fmin, x);
                    fmax = std::max(fmax, x);
                }
        for (int n = 0; n < 25; ++n) solver.step();
        for (int cell = 0; cell < solver.cells(); ++cell)
            for (int i = 0; i < 2; ++i)
                for (double x : solver.distribution(cell, i)) {
                    CHECK(x >= fmin - 1e-12 * fmax);
                    CHECK(x <= fmax * (1.0 + 1e-12));
                }
    }
}

TEST_CASE("interior mass change balances the boundary fluxes") {
    Setup s = make_setup(collisionless_pair(), 8, 2000.0);
    const SpatialGrid xg = SpatialGrid::make(21, -1e-2, 1e-2);
    ShockOptions opt;
    opt.dt_collision = 1e-6;
    ShockSolver solver(s.model, s.grid, xg, *s.kernel, opt);
    const StreamSpec left{{5e-3, 2e-3}, 320.0, 400.0};
    const StreamSpec right{{2.5e-3, 1e-3}, 450.0, 200.0};
    // Jump placed mid-domain: boundary-adjacent stencils stay uniform for the
    // first steps, so the boundary fluxes are exactly the stream fluxes ρ·Vx.
    solver.initialize(left, right, 0.0);

    const double dx = xg.dx();
    double mass0 = 0.0;
    for (int cell = 0; cell < solver.cells(); ++cell)
        mass0 += solver.cell_moments(cell).rho * dx;
    const auto info = solver.step();
    double mass1 = 0.0;
    for (int cell = 0; cell < solver.cells(); ++cell)
        mass1 += solver.cell_moments(cell).rho * dx;

    // Stream mass fluxes from the same quadrature that moments use.
    const auto stream_flux = [&](const StreamSpec& sp) {
        double fl = 0.0;
        std::vector<double> f(s.grid.size());
        for (int i = 0; i < 2; ++i) {
            maxwellian(s.model, s.grid, i, sp.rho_i[i], {sp.vx, 0.0, 0.0}, sp.T, f.data());
            std::size_t k = 0;
            long double acc = 0.0L;
            for (int kx = 0; kx < s.grid.nv; ++kx) {
                const double vx = s.grid.velocity(kx);
                for (int r = 0; r < s.grid.nv * s.grid.nv; ++r, ++k) acc += vx * f[k];
            }
            fl += s.model.levels[i].mass * static_cast<double>(acc) * s.grid.dv * s.grid.dv *
                  s.grid.dv;
        }
        return fl;
    };
    const double expected = mass0 - info.dt * (stream_flux(right) - stream_flux(left));
    CHECK(mass1 == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("homogeneous relaxation drives the species temperatures together") {
    // 40 steps of the early decay phase: here the argon distribution is still
    // wide enough for the Nv = 16 grid (it narrows as the gas cools, and near
    // equality the residual exchange rate falls below the spectral truncation
    // error of the narrower species, so late-time behavior needs Nv = 24; the
    // full 300-step benchmark at that resolution lives in the acceptance run).
    Setup s = make_setup(testutil::neon_argon(), 16, 3000.0);
    RelaxationSolver solver(s.model, s.grid, *s.kernel, 1e-9);
    std::vector<Distribution> f(2, Distribution(s.grid.size()));
    maxwellian(s.model, s.grid, 0, 5e-3, {0.0, 0.0, 0.0}, 300.0, f[0].data());
    maxwellian(s.model, s.grid, 1, 2e-3, {0.0, 0.0, 0.0}, 500.0, f[1].data());
    solver.set_state(std::move(f));

    const MomentSet m0 = solver.moments();
    const double gap0 = m0.T_i[1] - m0.T_i[0];
    double t_ne_prev = m0.T_i[0], t_ar_prev = m0.T_i[1];
    for (int n = 0; n < 40; ++n) {
        solver.step();
        if ((n + 1) % 10 == 0) {
            const MomentSet m = solver.moments();
            CHECK(m.T_i[0] > t_ne_prev);  // cold species heats up
            CHECK(m.T_i[1] < t_ar_prev);  // hot species cools down
            t_ne_prev = m.T_i[0];
            t_ar_prev = m.T_i[1];
        }
    }
    const MomentSet m1 = solver.moments();

    // Species densities and the mixture temperature are invariants.
    CHECK(m1.rho_i[0] == doctest::Approx(m0.rho_i[0]).epsilon(1e-10));
    CHECK(m1.rho_i[1] == doctest::Approx(m0.rho_i[1]).epsilon(1e-10));
    CHECK(m1.T == doctest::Approx(m0.T).epsilon(1e-6));
    // 40 ns ≈ 1.5 exchange e-foldings: the gap must shrink but not vanish.
    const double gap1 = m1.T_i[1] - m1.T_i[0];
    CHECK(gap1 > 0.05 * gap0);
    CHECK(gap1 < 0.45 * gap0);
}

TEST_CASE("blow-up detection throws instead of overflowing") {
    Setup s = make_setup(collisionless_pair(), 8, 2000.0);
    const SpatialGrid xg = SpatialGrid::make(9, -1e-2, 1e-2);
    ShockOptions opt;
    opt.blowup_ceiling = 1e-30;  // absurdly low ceiling: first step must trip it
    ShockSolver solver(s.model, s.grid, xg, *s.kernel, opt);
    const StreamSpec stream{{5e-3, 2e-3}, 300.0, 500.0};
    solver.initialize(stream, stream);
    CHECK_THROWS_AS(solver.step(), BlowUp);
}
