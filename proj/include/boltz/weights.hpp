#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "boltz/model.hpp"
#include "boltz/phase_space.hpp"

namespace boltz {

/** Adaptive Gauss-Legendre settings for the radial weight integrals. */
struct QuadratureSpec {
    int order = 64;           ///< points per panel
    double abs_tol = 1e-10;   ///< absolute tolerance of the adaptive bisection
    int max_depth = 28;       ///< bisection depth before QuadratureFailure
};

/**
 * Canonical identity of one radial weight integral ("weight class").
 *
 * A-parts (2-D, gain and elastic):
 *   A(ζ, b) = 4√(2π) ∫_{u*}^{umax} σ(u) j0(r ζ √(u² + cshift)) j0(b u) u³ du
 * 1-D parts (loss and the elastic ξ-only term):
 *   L(ξ)   = 4√(2π) ∫_{u*}^{umax} σ(u) j0(ξ u) u³ du
 *
 * σ is either a hard-sphere constant (params = {σ_const}) or a multi-level
 * transition cross section identified by (s_from, s_to, g_to): the pair
 * internal-energy sums of the pre/post pairs and the degeneracy product of
 * the post pair; the level set of the gas model supplies the shared
 * denominator.  Channels sharing a key share the numerical table bit-for-bit.
 */
struct WeightClassKey {
    enum Kind : std::int32_t { HardSphere = 0, Transition = 1 };
    Kind sigma_kind = HardSphere;
    double r = 0.0;        ///< μ/m_i factor on ζ (A-parts; 0 for 1-D classes)
    double mu = 0.0;       ///< reduced mass of the colliding pair
    double cshift = 0.0;   ///< 2(s_from − s_to)/μ inside the first j0 (A-parts)
    double ustar = 0.0;    ///< lower integration limit (threshold)
    double p0 = 0.0;       ///< σ_const | s_from
    double p1 = 0.0;       ///< unused  | s_to
    double p2 = 0.0;       ///< unused  | g_to
    double dref = 0.0;     ///< collision diameter entering σ = P d²/4 (Transition)

    friend bool operator==(const WeightClassKey&, const WeightClassKey&) = default;
    bool operator<(const WeightClassKey& o) const;
};

/**
 * Integer-lattice norm index shared by all tables over one velocity grid.
 *
 * With h = Nv/2 the frequency nodes are ζ_ε = Δζ(ε − h); |ζ_ε|² = Δζ²·Z with
 * integer Z = |ε − h|² ≤ 3h².  For equal-mass pairs (r = 1/2) the second j0
 * argument satisfies |ξ_κ − ζ_ε/2|² = (Δζ/2)²·t with integer
 * t = |2(κ − h) − (ε − h)|², and the clipped convolution box keeps the
 * per-axis offset in [−(Nv−1), Nv−2], so t ≤ 3(Nv−1)².  A-tables are stored
 * as dense rows A[rank(Z)][t].
 */
struct NormIndex {
    int nv = 0;
    int h = 0;
    int zmax = 0;                       ///< 3h²
    int tmax = 0;                       ///< 3(Nv−1)²
    int n_rank = 0;
    std::vector<std::int32_t> rank;     ///< [0..zmax] → rank or −1
    std::vector<double> sq_of_rank;     ///< realized Z per rank (ascending)

    static NormIndex build(const VelocityGrid& grid);
    int rank_of(int e0, int e1, int e2) const {
        const int a = e0 - h, b = e1 - h, c = e2 - h;
        return rank[a * a + b * b + c * c];
    }
};

/** Dense A-part rows for one weight class: value at (rank(Z), t), holes = 0. */
struct ATable {
    WeightClassKey key;
    std::vector<double> rows;   ///< n_rank × (tmax + 1)
};

/** 1-D radial table (loss / elastic ξ-term) on the |κ − h|² rank set. */
struct RTable {
    WeightClassKey key;
    std::vector<double> v;      ///< n_rank entries
};

/** Per elastic pair: how its weight is evaluated. */
struct ElasticRef {
    bool lattice = false;   ///< A-part on the integer lattice (equal masses)
    int a_class = -1;       ///< index into `atables` when lattice
    int b_class = -1;       ///< index into `rtables` (always)
    WeightClassKey key;     ///< closed-form evaluation key when !lattice
};

/** Per inelastic channel: gain A-class and loss 1-D class. */
struct InelasticRef {
    int gain_class = -1;
    int loss_class = -1;
};

/**
 * Precomputed convolution weight tables for one (model, catalog, grid).
 *
 * Values are identical to the per-channel (ε, κ) weight definitions at every
 * node pair inside the clipped convolution box; storage is deduplicated by
 * weight class.  Hard-sphere integrals are filled with the exact closed form
 * of ∫ j0(au) j0(bu) u³ du; multi-level transition integrals use adaptive
 * Gauss-Legendre with panel splits at the cross-section thresholds.
 */
struct WeightTables {
    VelocityGrid grid;
    double umax = 0.0;
    std::uint64_t model_hash = 0;
    NormIndex norms;
    std::vector<ATable> atables;
    std::vector<RTable> rtables;
    std::vector<ElasticRef> elastic_refs;              // catalog elastic order
    std::vector<std::vector<InelasticRef>> inelastic_refs;  // [i][channel]

    static WeightTables precompute(const GasModel& model, const CollisionCatalog& catalog,
                                   const VelocityGrid& grid, const QuadratureSpec& quad = {});

    /** Elastic weight Ĝ_el(ζ_ε, ξ_κ) = A − B for catalog pair `pair_index`. */
    double elastic(int pair_index, const int e[3], const int k[3]) const;
    /** Gain weight Ĝ^{ij}_{hl}(ζ_ε, ξ_κ) for channel `c` of species i. */
    double inelastic_gain(int i, int c, const int e[3], const int k[3]) const;
    /** Loss weight L̂^{hl}_{ij}(ξ_κ) for channel `c` of species i. */
    double inelastic_loss(int i, int c, const int k[3]) const;

    void save(const std::string& path) const;
    /** Load and validate against (model, catalog, grid); throws CacheMismatch. */
    static WeightTables load(const std::string& path, const GasModel& model,
                             const CollisionCatalog& catalog, const VelocityGrid& grid);
};

/**
 * Exact hard-sphere radial integral ∫₀^L j0(a u) j0(b u) u³ du, stable at
 * a ≈ b, a ≈ 0, b ≈ 0 (series branches).  Exposed for tests.
 */
double hs_radial_integral(double a, double b, double L);

/**
 * Adaptive-quadrature evaluation of one weight-class integrand (A-part at
 * (zeta, b), or 1-D at (0, b) with r = 0); used for table fill and as the
 * slow reference path in tests.
 */
double quadrature_weight(const GasModel& model, const WeightClassKey& key, double zeta,
                         double b, double umax, const QuadratureSpec& quad);

}  // namespace boltz
