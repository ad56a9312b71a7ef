#include "boltz/weights.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>

#include "boltz/errors.hpp"

namespace boltz {

namespace {

constexpr double four_sqrt_2pi = 10.026513098524001;   // 4√(2π)

double j0s(double x) {
    const double ax = std::abs(x);
    if (ax < 1e-8) return 1.0 - x * x / 6.0;
    return std::sin(x) / x;
}

/** ∫₀^L j0(b u) u³ du, exact; x = bL branches: series below 0.5. */
double quadj3(double b, double L) {
    const double x = b * L;
    const double L4 = L * L * L * L;
    if (std::abs(x) < 0.5) {
        const double x2 = x * x;
        return L4 * (0.25 +
                     x2 * (-1.0 / 36.0 +
                           x2 * (1.0 / 960.0 +
                                 x2 * (-1.0 / 50400.0 +
                                       x2 * (1.0 / 4354560.0 - x2 / 558835200.0)))));
    }
    const double c = std::cos(x), s = std::sin(x);
    return L4 * (((2.0 - x * x) * c + 2.0 * x * s - 2.0) / (x * x * x * x));
}

/** ∫₀^L j0(b u) u⁵ du (used by the small-a expansion of the product integral). */
double quadj5(double b, double L) {
    const double x = b * L;
    const double L6 = std::pow(L, 6);
    const double x2 = x * x;
    if (std::abs(x) < 0.5) {
        // Σ (−1)^k x^{2k} / ((2k+6)(2k+1)!)
        return L6 * (1.0 / 6.0 +
                     x2 * (-1.0 / 48.0 +
                           x2 * (1.0 / 1200.0 + x2 * (-1.0 / 60480.0 + x2 / 5080320.0))));
    }
    const double c = std::cos(x), s = std::sin(x);
    return L6 * (((-x2 * x2 + 12.0 * x2 - 24.0) * c + (4.0 * x2 - 24.0) * x * s + 24.0) /
                 (x2 * x2 * x2));
}

/** ∫₀^L j0(b u) u⁷ du. */
double quadj7(double b, double L) {
    const double x = b * L;
    const double L8 = std::pow(L, 8);
    const double x2 = x * x;
    if (std::abs(x) < 0.5) {
        // Σ (−1)^k x^{2k} / ((2k+8)(2k+1)!)
        return L8 * (1.0 / 8.0 +
                     x2 * (-1.0 / 60.0 +
                           x2 * (1.0 / 1440.0 + x2 * (-1.0 / 70560.0 + x2 / 5806080.0))));
    }
    const double c = std::cos(x), s = std::sin(x);
    const double x4 = x2 * x2;
    return L8 * (((-x4 * x2 + 30.0 * x4 - 360.0 * x2 + 720.0) * c +
                  (6.0 * x4 - 120.0 * x2 + 720.0) * x * s - 720.0) /
                 (x4 * x4));
}

}  // namespace

double hs_radial_integral(double a, double b, double L) {
    double s = std::abs(a) * L, t = std::abs(b) * L;
    if (s > t) {
        std::swap(s, t);
        std::swap(a, b);
    }
    const double L4 = L * L * L * L;
    if (t < 0.35) {
        // bivariate Taylor of [Φ(s−t) − Φ(s+t)]/(2 s t) through 8th order
        const double s2 = s * s, t2 = t * t;
        const double s4 = s2 * s2, t4 = t2 * t2;
        return L4 * (0.25 - (s2 + t2) / 36.0 + (s4 + t4) / 960.0 + s2 * t2 / 288.0 -
                     (s2 * s4 + t2 * t4) / 50400.0 - (s4 * t2 + s2 * t4) / 7200.0 +
                     (s4 * s4 + t4 * t4) / 4354560.0 + (s2 * s4 * t2 + s2 * t2 * t4) / 362880.0 +
                     s4 * t4 / 172800.0);
    }
    if (s < 1e-3) {
        // one argument (near-)degenerate: expand j0(a u) = 1 − (au)²/6 + (au)⁴/120
        const double a2 = a * a;
        return quadj3(b, L) - a2 / 6.0 * quadj5(b, L) + a2 * a2 / 120.0 * quadj7(b, L);
    }
    // product-to-difference: j0(au) j0(bu) u³ = u [cos((a−b)u) − cos((a+b)u)]/(2ab)
    // with ∫₀^L u cos(cu) du = L² [j0(x) − ½ j0²(x/2)], x = cL (stable at c → 0)
    auto R = [L](double c) {
        const double x = c * L;
        const double half = j0s(0.5 * x);
        return L * L * (j0s(x) - 0.5 * half * half);
    };
    return (R(a - b) - R(a + b)) / (2.0 * a * b);
}

bool WeightClassKey::operator<(const WeightClassKey& o) const {
    return std::tie(sigma_kind, r, mu, cshift, ustar, p0, p1, p2, dref) <
           std::tie(o.sigma_kind, o.r, o.mu, o.cshift, o.ustar, o.p0, o.p1, o.p2, o.dref);
}

NormIndex NormIndex::build(const VelocityGrid& grid) {
    NormIndex n;
    n.nv = grid.nv;
    n.h = grid.nv / 2;
    n.zmax = 3 * n.h * n.h;
    n.tmax = 3 * (grid.nv - 1) * (grid.nv - 1);
    n.rank.assign(n.zmax + 1, -1);
    // realized |ε−h|² values: components of ε−h span [−h, h−1], so the set of
    // absolute component values is exactly {0, …, h}
    std::vector<char> seen(n.zmax + 1, 0);
    for (int x = 0; x <= n.h; ++x)
        for (int y = 0; y <= n.h; ++y)
            for (int z = 0; z <= n.h; ++z) seen[x * x + y * y + z * z] = 1;
    for (int q = 0; q <= n.zmax; ++q)
        if (seen[q]) {
            n.rank[q] = n.n_rank++;
            n.sq_of_rank.push_back(q);
        }
    return n;
}

namespace {

// ---------------------------------------------------------------------------
// Gauss-Legendre panels
// ---------------------------------------------------------------------------

struct GLRule {
    std::vector<double> x;   // nodes on (−1, 1)
    std::vector<double> w;
};

/** Nodes/weights by Newton iteration on the Legendre polynomial. */
GLRule make_gl(int order) {
    GLRule r;
    r.x.resize(order);
    r.w.resize(order);
    const int m = (order + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < order; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
            }
            pp = order * (x * p0 - p1) / (x * x - 1.0);
            const double dx = p0 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        r.x[i] = -x;
        r.x[order - 1 - i] = x;
        r.w[i] = 2.0 / ((1.0 - x * x) * pp * pp);
        r.w[order - 1 - i] = r.w[i];
    }
    return r;
}

const GLRule& gl_rule(int order) {
    static std::map<int, GLRule> cache;
    static std::mutex mtx;
    std::lock_guard lock(mtx);
    auto it = cache.find(order);
    if (it == cache.end()) it = cache.emplace(order, make_gl(order)).first;
    return it->second;
}

template <class F>
double gl_panel(const F& f, double lo, double hi, const GLRule& rule) {
    const double c = 0.5 * (lo + hi), hw = 0.5 * (hi - lo);
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.x.size(); ++i) acc += rule.w[i] * f(c + hw * rule.x[i]);
    return acc * hw;
}

template <class F>
double adaptive_panel(const F& f, double lo, double hi, const GLRule& rule, double tol,
                      int depth) {
    const double whole = gl_panel(f, lo, hi, rule);
    const double mid = 0.5 * (lo + hi);
    const double split = gl_panel(f, lo, mid, rule) + gl_panel(f, mid, hi, rule);
    if (std::abs(split - whole) <= tol) return split;
    if (depth <= 0)
        throw QuadratureFailure("adaptive bisection exhausted before reaching tolerance");
    return adaptive_panel(f, lo, mid, rule, 0.5 * tol, depth - 1) +
           adaptive_panel(f, mid, hi, rule, 0.5 * tol, depth - 1);
}

/** σ(u) of a weight class (constant, or transition probability × d²/4). */
struct SigmaEval {
    const GasModel* model = nullptr;
    WeightClassKey key;

    double operator()(double u) const {
        if (key.sigma_kind == WeightClassKey::HardSphere) return key.p0;
        const double e_tot = 0.5 * key.mu * u * u + key.p0;   // p0 = s_from
        const auto& lv = model->levels;
        const int ns = static_cast<int>(lv.size());
        double den = 0.0;
        for (int m = 0; m < ns; ++m)
            for (int n = 0; n < ns; ++n) {
                const double a = e_tot - lv[m].energy - lv[n].energy;
                if (a > 0.0) den += lv[m].degeneracy * lv[n].degeneracy * a;
            }
        if (den <= 0.0) return 0.0;
        const double a = e_tot - key.p1;   // p1 = s_to
        if (a <= 0.0) return 0.0;
        return key.p2 * a / den * key.dref * key.dref / 4.0;   // p2 = g_to
    }

    /** Kink locations of the piecewise-smooth transition probability. */
    std::vector<double> kinks(double lo, double hi) const {
        std::vector<double> k;
        if (key.sigma_kind != WeightClassKey::Transition) return k;
        const auto& lv = model->levels;
        const int ns = static_cast<int>(lv.size());
        for (int m = 0; m < ns; ++m)
            for (int n = 0; n < ns; ++n) {
                const double smn = lv[m].energy + lv[n].energy;
                const double arg = 2.0 * (smn - key.p0) / key.mu;
                if (arg <= 0.0) continue;
                const double u = std::sqrt(arg);
                if (u > lo && u < hi) k.push_back(u);
            }
        std::sort(k.begin(), k.end());
        k.erase(std::unique(k.begin(), k.end()), k.end());
        return k;
    }
};

}  // namespace

double quadrature_weight(const GasModel& model, const WeightClassKey& key, double zeta, double b,
                         double umax, const QuadratureSpec& quad) {
    const SigmaEval sigma{&model, key};
    const double lo = key.ustar;
    if (!(umax > lo)) return 0.0;
    auto integrand = [&](double u) {
        const double arg2 = u * u + key.cshift;
        const double post = arg2 > 0.0 ? std::sqrt(arg2) : 0.0;
        return sigma(u) * j0s(key.r * zeta * post) * j0s(b * u) * u * u * u;
    };
    std::vector<double> edges{lo};
    for (double u : sigma.kinks(lo, umax)) edges.push_back(u);
    edges.push_back(umax);
    const GLRule& rule = gl_rule(quad.order);
    const double tol = quad.abs_tol / four_sqrt_2pi / static_cast<double>(edges.size() - 1);
    double acc = 0.0;
    for (std::size_t p = 0; p + 1 < edges.size(); ++p)
        acc += adaptive_panel(integrand, edges[p], edges[p + 1], rule, tol, quad.max_depth);
    return four_sqrt_2pi * acc;
}

namespace {

/** Closed-form hard-sphere A-part: 4√(2π) σ ∫ j0(rζu) j0(bu) u³ du. */
double hs_apart(const WeightClassKey& key, double zeta, double b, double umax) {
    return four_sqrt_2pi * key.p0 * hs_radial_integral(key.r * zeta, b, umax);
}

/** Realized (rank, t) occupancy of the clipped convolution box. */
std::vector<std::vector<std::int32_t>> realized_t_by_rank(const NormIndex& norms) {
    const int nv = norms.nv, h = norms.h;
    std::vector<char> hit(static_cast<std::size_t>(norms.n_rank) * (norms.tmax + 1), 0);
    for (int zx = -h; zx < h; ++zx)
        for (int zy = -h; zy < h; ++zy)
            for (int zz = -h; zz < h; ++zz) {
                const int rank = norms.rank[zx * zx + zy * zy + zz * zz];
                char* row = hit.data() + static_cast<std::size_t>(rank) * (norms.tmax + 1);
                // per-axis realized d = 2c − z over the clipped range of c = κ−h
                auto bounds = [h](int z) {
                    return std::pair<int, int>{std::max(-h, z - h + 1), std::min(h - 1, z + h - 1)};
                };
                const auto [xlo, xhi] = bounds(zx);
                const auto [ylo, yhi] = bounds(zy);
                const auto [zlo, zhi] = bounds(zz);
                for (int cx = xlo; cx <= xhi; ++cx) {
                    const int dx = 2 * cx - zx;
                    for (int cy = ylo; cy <= yhi; ++cy) {
                        const int dy = 2 * cy - zy;
                        const int txy = dx * dx + dy * dy;
                        for (int cz = zlo; cz <= zhi; ++cz) {
                            const int dz = 2 * cz - zz;
                            row[txy + dz * dz] = 1;
                        }
                    }
                }
            }
    (void)nv;
    std::vector<std::vector<std::int32_t>> out(norms.n_rank);
    for (int r = 0; r < norms.n_rank; ++r) {
        const char* row = hit.data() + static_cast<std::size_t>(r) * (norms.tmax + 1);
        for (int t = 0; t <= norms.tmax; ++t)
            if (row[t]) out[r].push_back(t);
    }
    return out;
}

WeightClassKey elastic_a_key(const GasModel& model, int i, int j) {
    WeightClassKey key;
    key.mu = model.reduced_mass(i, j);
    key.r = key.mu / model.levels[i].mass;
    key.cshift = 0.0;
    key.ustar = 0.0;
    const double d = 0.5 * (model.levels[i].diameter + model.levels[j].diameter);
    if (model.cross_section == CrossSectionModel::HardSphereElastic) {
        key.sigma_kind = WeightClassKey::HardSphere;
        key.p0 = d * d / 4.0;
    } else {
        key.sigma_kind = WeightClassKey::Transition;
        key.p0 = model.pair_energy(i, j);   // s_from
        key.p1 = model.pair_energy(i, j);   // s_to
        key.p2 = model.levels[i].degeneracy * model.levels[j].degeneracy;
        key.dref = d;
    }
    return key;
}

WeightClassKey radial_1d_key(WeightClassKey a) {
    a.r = 0.0;
    a.cshift = 0.0;
    return a;
}

/** Gain A-part key of channel (i,j,h,l): σ of the inverse transition (h,l)→(i,j). */
WeightClassKey gain_key(const GasModel& model, const InelasticChannel& c) {
    WeightClassKey key;
    key.mu = model.reduced_mass(c.i, c.j);
    key.r = key.mu / model.levels[c.i].mass;
    const double s_ij = model.pair_energy(c.i, c.j);
    const double s_hl = model.pair_energy(c.h, c.l);
    key.cshift = 2.0 * (s_hl - s_ij) / key.mu;            // + 2ΔE^{hl}_{ij}/μ
    key.ustar = std::sqrt(std::max(-key.cshift, 0.0));    // threshold of σ^{ij}_{hl}
    key.sigma_kind = WeightClassKey::Transition;
    key.p0 = s_hl;                                        // s_from
    key.p1 = s_ij;                                        // s_to
    key.p2 = model.levels[c.i].degeneracy * model.levels[c.j].degeneracy;
    // diameter of the inverse transition's pre-collision pair (h, l)
    key.dref = 0.5 * (model.levels[c.h].diameter + model.levels[c.l].diameter);
    return key;
}

/** Loss key of channel (i,j,h,l): σ of the forward transition (i,j)→(h,l). */
WeightClassKey loss_key(const GasModel& model, const InelasticChannel& c) {
    WeightClassKey key;
    key.mu = model.reduced_mass(c.i, c.j);
    key.r = 0.0;
    key.cshift = 0.0;
    const double s_ij = model.pair_energy(c.i, c.j);
    const double s_hl = model.pair_energy(c.h, c.l);
    key.ustar = std::sqrt(std::max(2.0 * (s_hl - s_ij) / key.mu, 0.0));
    key.sigma_kind = WeightClassKey::Transition;
    key.p0 = s_ij;
    key.p1 = s_hl;
    key.p2 = model.levels[c.h].degeneracy * model.levels[c.l].degeneracy;
    key.dref = 0.5 * (model.levels[c.i].diameter + model.levels[c.j].diameter);
    return key;
}

}  // namespace

WeightTables WeightTables::precompute(const GasModel& model, const CollisionCatalog& catalog,
                                      const VelocityGrid& grid, const QuadratureSpec& quad) {
    WeightTables wt;
    wt.grid = grid;
    wt.umax = grid.umax();
    wt.model_hash = model.hash();
    wt.norms = NormIndex::build(grid);

    std::map<WeightClassKey, int> a_index, r_index;
    auto a_class = [&](const WeightClassKey& key) {
        auto [it, inserted] = a_index.try_emplace(key, static_cast<int>(wt.atables.size()));
        if (inserted) wt.atables.push_back({key, {}});
        return it->second;
    };
    auto r_class = [&](const WeightClassKey& key) {
        auto [it, inserted] = r_index.try_emplace(key, static_cast<int>(wt.rtables.size()));
        if (inserted) wt.rtables.push_back({key, {}});
        return it->second;
    };

    for (const auto& ch : catalog.elastic) {
        ElasticRef ref;
        ref.key = elastic_a_key(model, ch.i, ch.j);
        ref.lattice = model.levels[ch.i].mass == model.levels[ch.j].mass;
        if (ref.lattice) ref.a_class = a_class(ref.key);
        ref.b_class = r_class(radial_1d_key(ref.key));
        wt.elastic_refs.push_back(ref);
    }
    wt.inelastic_refs.resize(catalog.ns);
    for (int i = 0; i < catalog.ns; ++i)
        for (const auto& ch : catalog.inelastic[i]) {
            InelasticRef ref;
            ref.gain_class = a_class(gain_key(model, ch));
            ref.loss_class = r_class(loss_key(model, ch));
            wt.inelastic_refs[i].push_back(ref);
        }

    // ---- fill ----------------------------------------------------------------
    const auto realized = realized_t_by_rank(wt.norms);
    const double dz = grid.dzeta;
    for (auto& at : wt.atables) {
        at.rows.assign(static_cast<std::size_t>(wt.norms.n_rank) * (wt.norms.tmax + 1), 0.0);
        const bool hs = at.key.sigma_kind == WeightClassKey::HardSphere;
#pragma omp parallel for schedule(dynamic)
        for (int rank = 0; rank < wt.norms.n_rank; ++rank) {
            const double zeta = dz * std::sqrt(wt.norms.sq_of_rank[rank]);
            double* row = at.rows.data() + static_cast<std::size_t>(rank) * (wt.norms.tmax + 1);
            for (const int t : realized[rank]) {
                const double b = 0.5 * dz * std::sqrt(static_cast<double>(t));
                row[t] = hs ? hs_apart(at.key, zeta, b, wt.umax)
                            : quadrature_weight(model, at.key, zeta, b, wt.umax, quad);
            }
        }
    }
    for (auto& rt : wt.rtables) {
        rt.v.assign(wt.norms.n_rank, 0.0);
        const bool hs = rt.key.sigma_kind == WeightClassKey::HardSphere;
#pragma omp parallel for schedule(dynamic)
        for (int rank = 0; rank < wt.norms.n_rank; ++rank) {
            const double xi = dz * std::sqrt(wt.norms.sq_of_rank[rank]);
            rt.v[rank] = hs ? four_sqrt_2pi * rt.key.p0 * quadj3(xi, wt.umax)
                            : quadrature_weight(model, rt.key, 0.0, xi, wt.umax, quad);
        }
    }
    return wt;
}

namespace {

/** integer t = |2(κ−h) − (ε−h)|² of a node pair (clipped-box invariant). */
inline int t_of(const int e[3], const int k[3], int h) {
    int t = 0;
    for (int s = 0; s < 3; ++s) {
        const int d = 2 * k[s] - e[s] - h;
        t += d * d;
    }
    return t;
}

inline int zsq_of(const int e[3], int h) {
    int z = 0;
    for (int s = 0; s < 3; ++s) {
        const int d = e[s] - h;
        z += d * d;
    }
    return z;
}

}  // namespace

double WeightTables::elastic(int pair_index, const int e[3], const int k[3]) const {
    const ElasticRef& ref = elastic_refs[pair_index];
    const int h = norms.h;
    const double b_part = rtables[ref.b_class].v[norms.rank[zsq_of(k, h)]];
    double a_part;
    if (ref.lattice) {
        const int rank = norms.rank[zsq_of(e, h)];
        a_part = atables[ref.a_class]
                     .rows[static_cast<std::size_t>(rank) * (norms.tmax + 1) + t_of(e, k, h)];
    } else {
        // unequal masses: evaluate b = |ξ − rζ| directly (hard-sphere closed form)
        const double r = ref.key.r;
        double b2 = 0.0;
        for (int s = 0; s < 3; ++s) {
            const double d = grid.dzeta * ((k[s] - h) - r * (e[s] - h));
            b2 += d * d;
        }
        const double zeta = grid.dzeta * std::sqrt(static_cast<double>(zsq_of(e, h)));
        a_part = hs_apart(ref.key, zeta, std::sqrt(b2), umax);
    }
    return a_part - b_part;
}

double WeightTables::inelastic_gain(int i, int c, const int e[3], const int k[3]) const {
    const InelasticRef& ref = inelastic_refs[i][c];
    const int rank = norms.rank[zsq_of(e, norms.h)];
    return atables[ref.gain_class]
        .rows[static_cast<std::size_t>(rank) * (norms.tmax + 1) + t_of(e, k, norms.h)];
}

double WeightTables::inelastic_loss(int i, int c, const int k[3]) const {
    const InelasticRef& ref = inelastic_refs[i][c];
    return rtables[ref.loss_class].v[norms.rank[zsq_of(k, norms.h)]];
}

// ---------------------------------------------------------------------------
// binary cache
// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'B', 'W', 'T', 'A', 'B', 'L', 'E', '1'};

template <class T>
void put(std::ofstream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
void get(std::ifstream& is, T& v) {
    is.read(reinterpret_cast<char*>(&v), sizeof v);
}

void put_key(std::ofstream& os, const WeightClassKey& k) {
    const std::int32_t kind = k.sigma_kind;
    put(os, kind);
    put(os, k.r);
    put(os, k.mu);
    put(os, k.cshift);
    put(os, k.ustar);
    put(os, k.p0);
    put(os, k.p1);
    put(os, k.p2);
    put(os, k.dref);
}

WeightClassKey get_key(std::ifstream& is) {
    WeightClassKey k;
    std::int32_t kind = 0;
    get(is, kind);
    k.sigma_kind = static_cast<WeightClassKey::Kind>(kind);
    get(is, k.r);
    get(is, k.mu);
    get(is, k.cshift);
    get(is, k.ustar);
    get(is, k.p0);
    get(is, k.p1);
    get(is, k.p2);
    get(is, k.dref);
    return k;
}

}  // namespace

void WeightTables::save(const std::string& path) const {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw SolverError("cannot open weight cache for writing: " + path);
    os.write(kMagic, sizeof kMagic);
    put(os, std::uint32_t{1});
    put(os, model_hash);
    put(os, grid.hash());
    put(os, umax);
    put(os, std::int32_t{norms.n_rank});
    put(os, std::int32_t{norms.tmax});
    put(os, static_cast<std::int32_t>(atables.size()));
    put(os, static_cast<std::int32_t>(rtables.size()));
    put(os, static_cast<std::int32_t>(elastic_refs.size()));
    put(os, static_cast<std::int32_t>(inelastic_refs.size()));
    for (const auto& at : atables) {
        put_key(os, at.key);
        os.write(reinterpret_cast<const char*>(at.rows.data()),
                 static_cast<std::streamsize>(at.rows.size() * sizeof(double)));
    }
    for (const auto& rt : rtables) {
        put_key(os, rt.key);
        os.write(reinterpret_cast<const char*>(rt.v.data()),
                 static_cast<std::streamsize>(rt.v.size() * sizeof(double)));
    }
    for (const auto& ref : elastic_refs) {
        put(os, static_cast<std::int8_t>(ref.lattice));
        put(os, std::int32_t{ref.a_class});
        put(os, std::int32_t{ref.b_class});
        put_key(os, ref.key);
    }
    for (const auto& list : inelastic_refs) {
        put(os, static_cast<std::int64_t>(list.size()));
        for (const auto& ref : list) {
            put(os, std::int32_t{ref.gain_class});
            put(os, std::int32_t{ref.loss_class});
        }
    }
    if (!os) throw SolverError("failed writing weight cache: " + path);
}

WeightTables WeightTables::load(const std::string& path, const GasModel& model,
                                const CollisionCatalog& catalog, const VelocityGrid& grid) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw CacheMismatch("weight cache not readable: " + path);
    char magic[8];
    is.read(magic, sizeof magic);
    if (!is || std::memcmp(magic, kMagic, sizeof magic) != 0)
        throw CacheMismatch("weight cache has wrong magic: " + path);
    std::uint32_t version = 0;
    get(is, version);
    if (version != 1) throw CacheMismatch("weight cache has unsupported version");
    WeightTables wt;
    wt.grid = grid;
    std::uint64_t mh = 0, gh = 0;
    get(is, mh);
    get(is, gh);
    if (mh != model.hash() || gh != grid.hash())
        throw CacheMismatch("weight cache was built for a different model/grid");
    wt.model_hash = mh;
    get(is, wt.umax);
    wt.norms = NormIndex::build(grid);
    std::int32_t n_rank = 0, tmax = 0, na = 0, nr = 0, nel = 0, nsp = 0;
    get(is, n_rank);
    get(is, tmax);
    get(is, na);
    get(is, nr);
    get(is, nel);
    get(is, nsp);
    if (n_rank != wt.norms.n_rank || tmax != wt.norms.tmax ||
        nel != static_cast<std::int32_t>(catalog.elastic.size()) || nsp != catalog.ns)
        throw CacheMismatch("weight cache layout does not match the catalog/grid");
    wt.atables.resize(na);
    for (auto& at : wt.atables) {
        at.key = get_key(is);
        at.rows.resize(static_cast<std::size_t>(n_rank) * (tmax + 1));
        is.read(reinterpret_cast<char*>(at.rows.data()),
                static_cast<std::streamsize>(at.rows.size() * sizeof(double)));
    }
    wt.rtables.resize(nr);
    for (auto& rt : wt.rtables) {
        rt.key = get_key(is);
        rt.v.resize(n_rank);
        is.read(reinterpret_cast<char*>(rt.v.data()),
                static_cast<std::streamsize>(rt.v.size() * sizeof(double)));
    }
    wt.elastic_refs.resize(nel);
    for (auto& ref : wt.elastic_refs) {
        std::int8_t lat = 0;
        get(is, lat);
        ref.lattice = lat != 0;
        std::int32_t a = 0, b = 0;
        get(is, a);
        get(is, b);
        ref.a_class = a;
        ref.b_class = b;
        ref.key = get_key(is);
    }
    wt.inelastic_refs.resize(nsp);
    for (int i = 0; i < nsp; ++i) {
        std::int64_t cnt = 0;
        get(is, cnt);
        if (cnt != static_cast<std::int64_t>(catalog.inelastic[i].size()))
            throw CacheMismatch("weight cache channel counts do not match the catalog");
        wt.inelastic_refs[i].resize(cnt);
        for (auto& ref : wt.inelastic_refs[i]) {
            std::int32_t g = 0, l = 0;
            get(is, g);
            get(is, l);
            ref.gain_class = g;
            ref.loss_class = l;
        }
    }
    if (!is) throw CacheMismatch("weight cache truncated: " + path);
    return wt;
}

}  // namespace boltz
