#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace boltz {

/**
 * Uniform cube velocity grid and its dual frequency grid.
 *
 * Velocity nodes   v_k = −Lv + k Δv   (k = 0 … Nv−1 per axis, half-open cube
 * [−Lv, Lv)³), Δv = 2 Lv / Nv.  Frequency nodes ζ_ε = −Lζ + ε Δζ with
 * Lζ = π Nv / (2 Lv), so that Δζ Δv = 2π / Nv exactly and the shifted
 * transforms below are unitary round trips.  Quadrature weights are the plain
 * rectangle rule (w ≡ 1, factor Δv³ applied by the callers).
 */
struct VelocityGrid {
    int nv = 0;
    double lv = 0.0;
    double dv = 0.0;
    double lzeta = 0.0;
    double dzeta = 0.0;

    /** Build a grid; throws InvalidGrid unless nv is even and ≥ 4, lv > 0. */
    static VelocityGrid make(int nv, double lv);

    std::size_t size() const { return static_cast<std::size_t>(nv) * nv * nv; }
    std::size_t index(int kx, int ky, int kz) const {
        return (static_cast<std::size_t>(kx) * nv + ky) * nv + kz;
    }
    double velocity(int k) const { return -lv + k * dv; }
    double frequency(int e) const { return -lzeta + e * dzeta; }
    std::array<double, 3> velocity3(int kx, int ky, int kz) const {
        return {velocity(kx), velocity(ky), velocity(kz)};
    }
    std::array<double, 3> frequency3(int ex, int ey, int ez) const {
        return {frequency(ex), frequency(ey), frequency(ez)};
    }
    /// Truncation radius of the relative-speed integrals in the convolution
    /// weights, u_max = Lv = π/Δζ.  The discrete frequency lattice periodizes
    /// the relative-velocity kernel with period 2 Lv per axis, so a kernel
    /// supported beyond Lv both exceeds the lattice Nyquist rate and folds its
    /// replicas back onto physical relative velocities; Lv is the largest
    /// radius free of either artifact.
    double umax() const;
    /// Stable fingerprint (nv, lv) for cache validation.
    std::uint64_t hash() const;
};

/**
 * 1-D spatial grid for the shock scenarios: `nx` nodes spanning
 * [x_lo, x_hi]; finite-volume cells are the nx−1 intervals between nodes,
 * centroids at the midpoints.
 */
struct SpatialGrid {
    int nx = 0;
    double x_lo = 0.0;
    double x_hi = 0.0;

    static SpatialGrid make(int nx, double x_lo, double x_hi);

    int cells() const { return nx - 1; }
    double node(int s) const { return x_lo + s * (x_hi - x_lo) / (nx - 1); }
    double dx() const { return (x_hi - x_lo) / (nx - 1); }
    double centroid(int c) const { return 0.5 * (node(c) + node(c + 1)); }
};

/** Per-species distribution values on a VelocityGrid, flat row-major (z fastest). */
using Distribution = std::vector<double>;

}  // namespace boltz
