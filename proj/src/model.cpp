#include "boltz/model.hpp"

#include <cmath>
#include <cstring>

#include "boltz/errors.hpp"

namespace boltz {

namespace {

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t k = 0; k < n; ++k) {
        h ^= p[k];
        h *= 1099511628211ull;
    }
    return h;
}

std::uint64_t fnv1a(std::uint64_t h, double x) {
    std::uint64_t bits;
    std::memcpy(&bits, &x, sizeof bits);
    return fnv1a(h, &bits, sizeof bits);
}

/**
 * Transition probability of the equiprobability closure for the collision
 * (i, j) → (h, l) at total collision energy E_tot = μu²/2 + E_i + E_j:
 *
 *   P = g_h g_l max(E_tot − E_h − E_l, 0) / Σ_{m,n} g_m g_n max(E_tot − E_m − E_n, 0)
 *
 * (the factor 2 of the paper form μu² − 2ΔE = 2(E_tot − E_h − E_l) cancels).
 * The denominator runs over every ordered level pair, so Σ_{h,l} P = 1 and
 * σ = P d²/4 satisfies micro-reversibility exactly:
 * g_i g_j u² σ^{hl}_{ij}(u) = g_h g_l u′² σ^{ij}_{hl}(u′).
 */
double transition_probability(const GasModel& model, double e_tot, int h, int l) {
    const auto& lv = model.levels;
    const int ns = model.count();
    double den = 0.0;
    for (int m = 0; m < ns; ++m)
        for (int n = 0; n < ns; ++n) {
            const double a = e_tot - lv[m].energy - lv[n].energy;
            if (a > 0.0) den += lv[m].degeneracy * lv[n].degeneracy * a;
        }
    if (den <= 0.0) return 0.0;   // degenerate u → 0 limit handled by caller
    const double a = e_tot - lv[h].energy - lv[l].energy;
    if (a <= 0.0) return 0.0;
    return lv[h].degeneracy * lv[l].degeneracy * a / den;
}

}  // namespace

double GasModel::reduced_mass(int i, int j) const {
    const double mi = levels[i].mass, mj = levels[j].mass;
    return mi * mj / (mi + mj);
}

bool GasModel::common_mass() const {
    for (const auto& l : levels)
        if (l.mass != levels.front().mass) return false;
    return true;
}

std::uint64_t GasModel::hash() const {
    std::uint64_t h = 1469598103934665603ull;
    const std::uint64_t kind = static_cast<std::uint64_t>(cross_section);
    h = fnv1a(h, &kind, sizeof kind);
    for (const auto& l : levels) {
        h = fnv1a(h, l.mass);
        h = fnv1a(h, l.energy);
        h = fnv1a(h, l.degeneracy);
        h = fnv1a(h, l.diameter);
    }
    return h;
}

CollisionCatalog CollisionCatalog::build(const GasModel& model) {
    CollisionCatalog cat;
    cat.ns = model.count();
    if (cat.ns < 1) throw ValidationError("model.levels", "at least one level required");
    cat.elastic.reserve(static_cast<std::size_t>(cat.ns) * cat.ns);
    for (int i = 0; i < cat.ns; ++i)
        for (int j = 0; j < cat.ns; ++j) cat.elastic.push_back({i, j});
    cat.inelastic.resize(cat.ns);
    if (model.cross_section == CrossSectionModel::AndersonMultiLevel) {
        if (!model.common_mass())
            throw ValidationError("model.levels.mass",
                                  "multi-level closure requires a common particle mass");
        for (int i = 0; i < cat.ns; ++i) {
            auto& list = cat.inelastic[i];
            list.reserve(static_cast<std::size_t>(cat.ns) * cat.ns * cat.ns - cat.ns);
            for (int j = 0; j < cat.ns; ++j)
                for (int h = 0; h < cat.ns; ++h)
                    for (int l = 0; l < cat.ns; ++l) {
                        if (h == i && l == j) continue;   // identity transition is elastic
                        list.push_back({i, j, h, l});
                    }
        }
    }
    return cat;
}

std::size_t CollisionCatalog::inelastic_total() const {
    std::size_t total = 0;
    for (const auto& list : inelastic) total += list.size();
    return total;
}

double sigma_elastic(const GasModel& model, int i, int j, double u) {
    const double d = 0.5 * (model.levels[i].diameter + model.levels[j].diameter);
    if (model.cross_section == CrossSectionModel::HardSphereElastic) {
        return d * d / 4.0;   // (d_i + d_j)² / 16, isotropic, per steradian
    }
    // Multi-level closure: the identity channel of the transition model.
    if (u == 0.0) return d * d / 4.0;   // degenerate limit: P(identity) → 1
    const double mu = model.reduced_mass(i, j);
    const double e_tot = 0.5 * mu * u * u + model.pair_energy(i, j);
    return transition_probability(model, e_tot, i, j) * d * d / 4.0;
}

double sigma_inelastic(const GasModel& model, int i, int j, int h, int l, double u) {
    if (model.cross_section != CrossSectionModel::AndersonMultiLevel)
        throw ValidationError("model.cross_section",
                              "inelastic cross sections require the multi-level closure");
    if (u == 0.0) return 0.0;   // degenerate limit: only the identity channel survives
    const double d = 0.5 * (model.levels[i].diameter + model.levels[j].diameter);
    const double mu = model.reduced_mass(i, j);
    const double e_tot = 0.5 * mu * u * u + model.pair_energy(i, j);
    return transition_probability(model, e_tot, h, l) * d * d / 4.0;
}

}  // namespace boltz
