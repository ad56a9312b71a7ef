#include "boltz/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "boltz/constants.hpp"
#include "boltz/errors.hpp"
#include "boltz/moments.hpp"

namespace boltz {

namespace {

bool has_internal_spread(const GasModel& model) {
    double lo = model.levels[0].energy, hi = lo;
    for (const Level& lv : model.levels) {
        lo = std::min(lo, lv.energy);
        hi = std::max(hi, lv.energy);
    }
    return hi - lo > 0.0;
}

/// Specific gas constant k_B Σ y_i/m_i [J/(kg·K)]; an empty composition is
/// allowed for common-mass gases, where it reduces to k_B/m.
double specific_gas_constant(const GasModel& model, const std::vector<double>& mass_fractions) {
    if (mass_fractions.empty()) {
        if (!model.common_mass())
            throw ValidationError("shock.mass_fractions",
                                  "required for a mixture of unequal masses");
        return kB / model.levels[0].mass;
    }
    if (static_cast<int>(mass_fractions.size()) != model.count())
        throw ValidationError("shock.mass_fractions", "size must match the number of species");
    double sum = 0.0, r = 0.0;
    for (int i = 0; i < model.count(); ++i) {
        sum += mass_fractions[i];
        r += mass_fractions[i] / model.levels[i].mass;
    }
    return kB * r / sum;
}

}  // namespace

void maxwellian(const GasModel& model, const VelocityGrid& grid, int i, double rho_i,
                const std::array<double, 3>& V, double T, double* f) {
    if (!(T > 0.0) || !(rho_i >= 0.0))
        throw ValidationError("maxwellian", "requires T > 0 and rho >= 0");
    const double mass = model.levels[i].mass;
    const double pref =
        rho_i / mass * std::pow(mass / (2.0 * std::numbers::pi * kB * T), 1.5);
    const double a = mass / (2.0 * kB * T);
    std::vector<double> gx(grid.nv), gy(grid.nv), gz(grid.nv);
    for (int k = 0; k < grid.nv; ++k) {
        const double v = grid.velocity(k);
        gx[k] = std::exp(-a * (v - V[0]) * (v - V[0]));
        gy[k] = std::exp(-a * (v - V[1]) * (v - V[1]));
        gz[k] = std::exp(-a * (v - V[2]) * (v - V[2]));
    }
    std::size_t idx = 0;
    for (int kx = 0; kx < grid.nv; ++kx)
        for (int ky = 0; ky < grid.nv; ++ky) {
            const double pxy = pref * gx[kx] * gy[ky];
            for (int kz = 0; kz < grid.nv; ++kz, ++idx) f[idx] = pxy * gz[kz];
        }
}

std::vector<double> boltzmann_fractions(const GasModel& model, double T) {
    if (!(T > 0.0)) throw ValidationError("boltzmann_fractions", "requires T > 0");
    double e_min = model.levels[0].energy;
    for (const Level& lv : model.levels) e_min = std::min(e_min, lv.energy);
    std::vector<double> frac(model.count());
    double z = 0.0;
    for (int i = 0; i < model.count(); ++i) {
        frac[i] = model.levels[i].degeneracy *
                  std::exp(-(model.levels[i].energy - e_min) / (kB * T));
        z += frac[i];
    }
    for (double& x : frac) x /= z;
    return frac;
}

double equilibrium_temperature(const GasModel& model, double n, double energy_density) {
    if (!(n > 0.0)) throw ValidationError("equilibrium_temperature", "requires n > 0");
    const double target = energy_density / n;  // energy per particle
    const auto g = [&](double T) {
        return 1.5 * kB * T + internal_energy_per_particle_eq(model, T) - target;
    };
    double lo = 1.0, hi = 1e6;
    if (g(lo) > 0.0 || g(hi) < 0.0)
        throw OutOfBracket("equilibrium temperature outside [1 K, 1e6 K]");
    // Bisection to a stable interval, then safeguarded Newton with a
    // finite-difference slope (g is smooth and strictly increasing).
    double t = 0.5 * (lo + hi);
    for (int it = 0; it < 60 && (hi - lo) > 1e-3 * lo; ++it) {
        t = 0.5 * (lo + hi);
        (g(t) > 0.0 ? hi : lo) = t;
    }
    t = 0.5 * (lo + hi);
    for (int it = 0; it < 60; ++it) {
        const double f = g(t);
        const double h = 1e-6 * t;
        const double slope = (g(t + h) - g(t - h)) / (2.0 * h);
        if (!(slope > 0.0)) break;
        double t_next = t - f / slope;
        if (!(t_next > lo && t_next < hi)) t_next = 0.5 * (lo + hi);
        (g(t_next) > 0.0 ? hi : lo) = t_next;
        const bool converged = std::abs(t_next - t) <= 1e-8 * t;
        t = t_next;
        if (converged) break;
    }
    return t;
}

FlowState perfect_gas_jump(const GasModel& model, const std::vector<double>& mass_fractions,
                           const FlowState& upstream) {
    const double r = specific_gas_constant(model, mass_fractions);
    const double gamma = 5.0 / 3.0;
    const double a1 = std::sqrt(gamma * r * upstream.T);
    const double mach2 = upstream.vx * upstream.vx / (a1 * a1);
    if (!(mach2 > 1.0))
        throw ValidationError("shock.vx", "upstream flow must be supersonic");
    const double p1 = upstream.rho * r * upstream.T;
    FlowState down;
    down.rho = upstream.rho * ((gamma + 1.0) * mach2) / ((gamma - 1.0) * mach2 + 2.0);
    const double p2 = p1 * (1.0 + 2.0 * gamma / (gamma + 1.0) * (mach2 - 1.0));
    down.vx = upstream.rho * upstream.vx / down.rho;
    down.T = p2 / (down.rho * r);
    return down;
}

FlowState rankine_hugoniot_downstream(const GasModel& model,
                                      const std::vector<double>& mass_fractions,
                                      const FlowState& upstream) {
    const FlowState seed = perfect_gas_jump(model, mass_fractions, upstream);
    if (!has_internal_spread(model)) return seed;  // closed form is exact

    // Level gas: common particle mass, downstream levels Boltzmann-populated
    // at the downstream temperature, which feeds the energy flux.
    const double r = specific_gas_constant(model, mass_fractions);
    const double mass = model.levels[0].mass;
    const auto fluxes = [&](double rho, double T, double vx, double out[3]) {
        const double p = rho * r * T;
        const double e_tot =
            1.5 * r * T + internal_energy_per_particle_eq(model, T) / mass + 0.5 * vx * vx;
        out[0] = rho * vx;
        out[1] = rho * vx * vx + p;
        out[2] = vx * (rho * e_tot + p);
    };
    double f1[3];
    fluxes(upstream.rho, upstream.T, upstream.vx, f1);

    // Damped Newton on the scaled unknowns x = (ρ/ρ₁, V/V₁, T/T₁) with
    // residuals normalized by the upstream fluxes.
    const auto residual = [&](const double x[3], double out[3]) {
        double f2[3];
        fluxes(x[0] * upstream.rho, x[2] * upstream.T, x[1] * upstream.vx, f2);
        for (int c = 0; c < 3; ++c) out[c] = (f2[c] - f1[c]) / f1[c];
    };
    double x[3] = {seed.rho / upstream.rho, seed.vx / upstream.vx, seed.T / upstream.T};
    double fx[3];
    residual(x, fx);
    const auto norm2 = [](const double v[3]) {
        return v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
    };
    for (int it = 0; it < 100; ++it) {
        if (std::max({std::abs(fx[0]), std::abs(fx[1]), std::abs(fx[2])}) < 1e-13)
            return {x[0] * upstream.rho, x[2] * upstream.T, x[1] * upstream.vx};
        double jac[3][3];
        for (int j = 0; j < 3; ++j) {
            const double h = 1e-7 * std::max(1.0, std::abs(x[j]));
            double xp[3] = {x[0], x[1], x[2]}, xm[3] = {x[0], x[1], x[2]};
            xp[j] += h;
            xm[j] -= h;
            double fp[3], fm[3];
            residual(xp, fp);
            residual(xm, fm);
            for (int c = 0; c < 3; ++c) jac[c][j] = (fp[c] - fm[c]) / (2.0 * h);
        }
        // Solve jac · Δ = fx by Gaussian elimination with partial pivoting.
        double a[3][4];
        for (int c = 0; c < 3; ++c) {
            for (int j = 0; j < 3; ++j) a[c][j] = jac[c][j];
            a[c][3] = fx[c];
        }
        for (int col = 0; col < 3; ++col) {
            int piv = col;
            for (int row = col + 1; row < 3; ++row)
                if (std::abs(a[row][col]) > std::abs(a[piv][col])) piv = row;
            std::swap(a[col], a[piv]);
            if (a[col][col] == 0.0) throw NoConvergence("singular shock-jump Jacobian");
            for (int row = 0; row < 3; ++row) {
                if (row == col) continue;
                const double fac = a[row][col] / a[col][col];
                for (int j = col; j < 4; ++j) a[row][j] -= fac * a[col][j];
            }
        }
        const double delta[3] = {a[0][3] / a[0][0], a[1][3] / a[1][1], a[2][3] / a[2][2]};
        const double base = norm2(fx);
        double lambda = 1.0;
        double xt[3], ft[3];
        while (true) {
            for (int j = 0; j < 3; ++j) xt[j] = x[j] - lambda * delta[j];
            if (xt[0] > 0.0 && xt[1] > 0.0 && xt[2] > 0.0) {
                residual(xt, ft);
                if (norm2(ft) <= (1.0 - 1e-4 * lambda) * base) break;
            }
            lambda *= 0.5;
            if (lambda < 1e-10) throw NoConvergence("shock-jump line search stalled");
        }
        for (int j = 0; j < 3; ++j) x[j] = xt[j];
        for (int c = 0; c < 3; ++c) fx[c] = ft[c];
    }
    throw NoConvergence("shock-jump Newton iteration budget exhausted");
}

}  // namespace boltz
