#include "boltz/phase_space.hpp"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <numbers>

#include "boltz/errors.hpp"

namespace boltz {

VelocityGrid VelocityGrid::make(int nv, double lv) {
    if (nv < 4 || nv % 2 != 0) throw InvalidGrid("grid.nv: must be even and >= 4");
    if (!(lv > 0.0)) throw InvalidGrid("grid.lv: must be positive");
    VelocityGrid g;
    g.nv = nv;
    g.lv = lv;
    g.dv = 2.0 * lv / nv;
    g.lzeta = std::numbers::pi * nv / (2.0 * lv);   // makes Δζ Δv = 2π/Nv exact
    g.dzeta = 2.0 * g.lzeta / nv;
    return g;
}

double VelocityGrid::umax() const { return lv; }

std::uint64_t VelocityGrid::hash() const {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](std::uint64_t bits) {
        for (int k = 0; k < 8; ++k) {
            h ^= (bits >> (8 * k)) & 0xff;
            h *= 1099511628211ull;
        }
    };
    mix(static_cast<std::uint64_t>(nv));
    std::uint64_t lvbits;
    std::memcpy(&lvbits, &lv, sizeof lvbits);
    mix(lvbits);
    return h;
}

SpatialGrid SpatialGrid::make(int nx, double x_lo, double x_hi) {
    if (nx < 2) throw InvalidGrid("shock.nx: at least two nodes required");
    if (!(x_hi > x_lo)) throw InvalidGrid("shock.x_hi: domain must have positive width");
    return SpatialGrid{nx, x_lo, x_hi};
}

}  // namespace boltz
