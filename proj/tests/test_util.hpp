#pragma once

#include <random>
#include <vector>

#include "boltz/model.hpp"
#include "boltz/phase_space.hpp"

namespace testutil {

/** Neon/argon hard-sphere mixture (two ground-state species). */
inline boltz::GasModel neon_argon() {
    boltz::GasModel m;
    m.cross_section = boltz::CrossSectionModel::HardSphereElastic;
    m.levels.push_back({"Ne", 3.35e-26, 0.0, 1.0, 2.77e-10});
    m.levels.push_back({"Ar", 6.63e-26, 0.0, 1.0, 4.17e-10});
    return m;
}

/** Five-level argon-mass gas with equally spaced-ish level energies. */
inline boltz::GasModel five_level() {
    boltz::GasModel m;
    m.cross_section = boltz::CrossSectionModel::AndersonMultiLevel;
    const double e[5] = {0.0, 8.3e-21, 1.66e-20, 2.5e-20, 3.3e-20};
    for (int i = 0; i < 5; ++i)
        m.levels.push_back({"L" + std::to_string(i + 1), 6.63e-26, e[i], 1.0, 3.0e-10});
    return m;
}

/** Two-level gas (argon mass), used by the reduced multilevel tests. */
inline boltz::GasModel two_level(double e2 = 4.14e-21, double g2 = 1.0) {
    boltz::GasModel m;
    m.cross_section = boltz::CrossSectionModel::AndersonMultiLevel;
    m.levels.push_back({"G", 6.63e-26, 0.0, 1.0, 3.0e-10});
    m.levels.push_back({"X", 6.63e-26, e2, g2, 3.0e-10});
    return m;
}

/** Smooth positive distribution with O(1) anisotropy, decaying inside the box. */
inline std::vector<double> random_state(const boltz::VelocityGrid& grid, unsigned seed,
                                        double vth) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    const double vx0 = 0.3 * vth * uni(rng), vy0 = 0.3 * vth * uni(rng),
                 vz0 = 0.3 * vth * uni(rng);
    const double amp2 = 0.5 + 0.4 * uni(rng);
    const double vth2 = vth * (0.7 + 0.2 * uni(rng));
    std::vector<double> f(grid.size());
    for (int kx = 0; kx < grid.nv; ++kx)
        for (int ky = 0; ky < grid.nv; ++ky)
            for (int kz = 0; kz < grid.nv; ++kz) {
                const double vx = grid.velocity(kx), vy = grid.velocity(ky),
                             vz = grid.velocity(kz);
                const double r1 = ((vx - vx0) * (vx - vx0) + (vy - vy0) * (vy - vy0) +
                                   (vz - vz0) * (vz - vz0)) /
                                  (vth * vth);
                const double r2 = (vx * vx + vy * vy + vz * vz) / (vth2 * vth2);
                f[grid.index(kx, ky, kz)] = std::exp(-r1) + amp2 * std::exp(-r2);
            }
    return f;
}

}  // namespace testutil
