#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace boltz {

/**
 * One internal energy level, treated as a pseudo-species.
 *
 * `mass` [kg], `energy` [J] (internal energy carried by a particle in this
 * level), `degeneracy` (statistical weight g_i), `diameter` [m] (hard-sphere
 * diameter used by the elastic cross section).
 */
struct Level {
    std::string name;
    double mass = 0.0;
    double energy = 0.0;
    double degeneracy = 1.0;
    double diameter = 0.0;
};

/** Cross-section closure for the collision operators. */
enum class CrossSectionModel {
    /// Isotropic hard spheres, elastic collisions only (inert mixtures).
    HardSphereElastic,
    /// Equiprobability-based transition probabilities for a single-mass gas
    /// with internal levels; covers both the elastic (identity) and the
    /// inelastic channels.
    AndersonMultiLevel,
};

struct GasModel {
    std::vector<Level> levels;
    CrossSectionModel cross_section = CrossSectionModel::HardSphereElastic;

    int count() const { return static_cast<int>(levels.size()); }
    /// Pair sum of internal energies E_i + E_j.
    double pair_energy(int i, int j) const { return levels[i].energy + levels[j].energy; }
    /// Reduced mass m_i m_j / (m_i + m_j).
    double reduced_mass(int i, int j) const;
    /// True when every level carries the same particle mass.
    bool common_mass() const;
    /// Internal energy jump ΔE^{hl}_{ij} = E_h + E_l − E_i − E_j.
    double delta_energy(int i, int j, int h, int l) const {
        return pair_energy(h, l) - pair_energy(i, j);
    }
    /// Stable fingerprint of the physical content (levels + closure).
    std::uint64_t hash() const;
};

/** Elastic binary channel (i, j): species i colliding with species j. */
struct ElasticChannel {
    int i = 0, j = 0;
};

/**
 * Inelastic partial-operator channel for species i: partner j, post-collision
 * pair (h, l) of the forward transition (i, j) → (h, l).  The gain term of the
 * partial operator counts the inverse transitions (h, l) → (i, j).
 */
struct InelasticChannel {
    int i = 0, j = 0, h = 0, l = 0;
};

/**
 * Complete set of binary collision channels for a gas model: all Ns² elastic
 * pairs, and for each species i every triplet (j, h, l) except the identity
 * transitions (h, l) = (i, j), i.e. Ns³ − Ns inelastic channels per species.
 */
struct CollisionCatalog {
    int ns = 0;
    std::vector<ElasticChannel> elastic;                     // lexicographic (i, j)
    std::vector<std::vector<InelasticChannel>> inelastic;    // [i] → lexicographic (j, h, l)

    static CollisionCatalog build(const GasModel& model);

    std::size_t inelastic_count(int i) const { return inelastic[i].size(); }
    std::size_t inelastic_total() const;
};

/**
 * Elastic differential cross section σ_el [m²/sr], isotropic, for pair (i, j)
 * at relative speed u.
 *
 * Hard spheres: σ = (d_i + d_j)² / 16, independent of u.  The multi-level
 * closure uses the identity-channel transition probability, so σ depends on u.
 */
double sigma_elastic(const GasModel& model, int i, int j, double u);

/**
 * Inelastic differential cross section σ^{hl}_{ij}(u) [m²/sr] for the forward
 * transition (i, j) → (h, l) at pre-collision relative speed u.  Zero below
 * the energy threshold.  Only defined for the multi-level closure.
 */
double sigma_inelastic(const GasModel& model, int i, int j, int h, int l, double u);

}  // namespace boltz
