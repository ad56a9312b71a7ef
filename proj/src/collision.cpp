#include "boltz/collision.hpp"

#include <fftw3.h>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <numeric>
#include <tuple>

#include "boltz/errors.hpp"

namespace boltz {

namespace {

constexpr double four_sqrt_2pi = 10.026513098524001;          // 4√(2π)

/** Closed-form hard-sphere A-part (same integral as the table fill). */
double hs_apart(const WeightClassKey& key, double zeta, double b, double umax) {
    return four_sqrt_2pi * key.p0 * hs_radial_integral(key.r * zeta, b, umax);
}

}  // namespace

// ===========================================================================
// Conservation projector
// ===========================================================================

struct ConservationProjector::Impl {
    // The whole moment/solve path runs in extended precision so the projection
    // is idempotent at the 1e-14 level; corrections are applied in double.
    using XVec = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
    using XMat = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;

    GasModel model;
    VelocityGrid grid;
    int ns = 0;
    double mbar = 0.0;   // mean mass, used only as a row scale

    // row-scaled constraint Grams (row scaling leaves the projector invariant)
    Eigen::LLT<XMat> llt_el;
    Eigen::LLT<XMat> llt_in;
    bool has_inelastic = false;

    Impl(const GasModel& m, const VelocityGrid& g) : model(m), grid(g), ns(m.count()) {
        for (const auto& lv : model.levels) mbar += lv.mass;
        mbar /= ns;

        const int rows_el = ns + 4;
        XMat gram_el = XMat::Zero(rows_el, rows_el);
        XMat gram_in = XMat::Zero(5, 5);
        Eigen::VectorXd cel(rows_el), cin(5);
        for (int i = 0; i < ns; ++i)
            for (int kx = 0; kx < grid.nv; ++kx)
                for (int ky = 0; ky < grid.nv; ++ky)
                    for (int kz = 0; kz < grid.nv; ++kz) {
                        const double vx = grid.velocity(kx), vy = grid.velocity(ky),
                                     vz = grid.velocity(kz);
                        cel.setZero();
                        invariants_elastic(i, vx, vy, vz, cel.data());
                        gram_el.selfadjointView<Eigen::Lower>().rankUpdate(
                            cel.cast<long double>().eval());
                        invariants_inelastic(i, vx, vy, vz, cin.data());
                        gram_in.selfadjointView<Eigen::Lower>().rankUpdate(
                            cin.cast<long double>().eval());
                    }
        gram_el = gram_el.selfadjointView<Eigen::Lower>();
        gram_in = gram_in.selfadjointView<Eigen::Lower>();

        llt_el.compute((long double)(ns)*gram_el);
        if (llt_el.info() != Eigen::Success)
            throw SingularGram("elastic constraint Gram matrix is not positive definite");
        const long double n_in = (long double)(ns)*ns * ns - ns;
        if (n_in > 0) {
            llt_in.compute(n_in * gram_in);
            if (llt_in.info() != Eigen::Success)
                throw SingularGram("inelastic constraint Gram matrix is not positive definite");
            has_inelastic = true;
        }
    }

    /** Scaled elastic invariants of species i at velocity v (Ns+4 values). */
    void invariants_elastic(int i, double vx, double vy, double vz, double* c) const {
        // mass rows are scaled by 1/m_row, momentum by 1/(m̄ Lv), energy by 1/(m̄ Lv²)
        for (int r = 0; r < ns; ++r) c[r] = (r == i) ? 1.0 : 0.0;
        const double pm = model.levels[i].mass / (mbar * grid.lv);
        c[ns + 0] = pm * vx;
        c[ns + 1] = pm * vy;
        c[ns + 2] = pm * vz;
        c[ns + 3] = 0.5 * model.levels[i].mass * (vx * vx + vy * vy + vz * vz) /
                    (mbar * grid.lv * grid.lv);
    }

    /** Scaled inelastic invariants of species i at velocity v (5 values). */
    void invariants_inelastic(int i, double vx, double vy, double vz, double* c) const {
        const double m = model.levels[i].mass;
        c[0] = m / mbar;
        const double pm = m / (mbar * grid.lv);
        c[1] = pm * vx;
        c[2] = pm * vy;
        c[3] = pm * vz;
        c[4] = (0.5 * m * (vx * vx + vy * vy + vz * vz) + model.levels[i].energy) /
               (mbar * grid.lv * grid.lv);
    }

    /** Qsum += C_i q over the velocity grid (scaled rows). */
    template <bool Elastic>
    void accumulate(int i, const double* q, long double* qsum) const {
        long double s0l = 0.0, sxl = 0.0, syl = 0.0, szl = 0.0, sel = 0.0;
        std::size_t idx = 0;
        for (int kx = 0; kx < grid.nv; ++kx) {
            const double vx = grid.velocity(kx);
            for (int ky = 0; ky < grid.nv; ++ky) {
                const double vy = grid.velocity(ky);
                for (int kz = 0; kz < grid.nv; ++kz, ++idx) {
                    const double vz = grid.velocity(kz);
                    const long double val = q[idx];
                    s0l += val;
                    sxl += val * vx;
                    syl += val * vy;
                    szl += val * vz;
                    sel += val * (vx * vx + vy * vy + vz * vz);
                }
            }
        }
        const long double m = model.levels[i].mass;
        if constexpr (Elastic) {
            qsum[i] += s0l;   // scaled: m_i/m_i
            const long double pm = m / (mbar * grid.lv);
            qsum[ns + 0] += pm * sxl;
            qsum[ns + 1] += pm * syl;
            qsum[ns + 2] += pm * szl;
            qsum[ns + 3] += 0.5L * m * sel / ((long double)mbar * grid.lv * grid.lv);
        } else {
            qsum[0] += m / mbar * s0l;
            const long double pm = m / (mbar * grid.lv);
            qsum[1] += pm * sxl;
            qsum[2] += pm * syl;
            qsum[3] += pm * szl;
            qsum[4] += (0.5L * m * sel + (long double)model.levels[i].energy * s0l) /
                       ((long double)mbar * grid.lv * grid.lv);
        }
    }

    /** q −= factor · C_iᵀ α over the velocity grid. */
    template <bool Elastic>
    void correct(int i, double factor, const double* alpha, double* q) const {
        const double m = model.levels[i].mass;
        double a0, ax, ay, az, ae, e0 = 0.0;
        if constexpr (Elastic) {
            a0 = alpha[i];
            ax = alpha[ns + 0];
            ay = alpha[ns + 1];
            az = alpha[ns + 2];
            ae = alpha[ns + 3];
        } else {
            a0 = alpha[0] * (m / mbar);
            ax = alpha[1];
            ay = alpha[2];
            az = alpha[3];
            ae = alpha[4];
            e0 = model.levels[i].energy;
        }
        const double pm = m / (mbar * grid.lv);
        const double pe = 1.0 / (mbar * grid.lv * grid.lv);
        std::size_t idx = 0;
        for (int kx = 0; kx < grid.nv; ++kx) {
            const double vx = grid.velocity(kx);
            for (int ky = 0; ky < grid.nv; ++ky) {
                const double vy = grid.velocity(ky);
                for (int kz = 0; kz < grid.nv; ++kz, ++idx) {
                    const double vz = grid.velocity(kz);
                    const double v2 = vx * vx + vy * vy + vz * vz;
                    double corr = a0 + pm * (ax * vx + ay * vy + az * vz);
                    if constexpr (Elastic) {
                        corr += ae * 0.5 * m * v2 * pe;
                    } else {
                        corr += ae * (0.5 * m * v2 + e0) * pe;
                    }
                    q[idx] -= factor * corr;
                }
            }
        }
    }
};

ConservationProjector::ConservationProjector(const GasModel& model, const VelocityGrid& grid)
    : impl_(std::make_unique<Impl>(model, grid)) {}
ConservationProjector::~ConservationProjector() = default;

void ConservationProjector::project_elastic(const CollisionCatalog& catalog,
                                            std::vector<std::vector<double>>& q) const {
    const int ns = impl_->ns;
    ConservationProjector::Impl::XVec qsum = ConservationProjector::Impl::XVec::Zero(ns + 4);
    for (std::size_t c = 0; c < catalog.elastic.size(); ++c)
        impl_->accumulate<true>(catalog.elastic[c].i, q[c].data(), qsum.data());
    const Eigen::VectorXd alpha = impl_->llt_el.solve(qsum).cast<double>();
    for (std::size_t c = 0; c < catalog.elastic.size(); ++c)
        impl_->correct<true>(catalog.elastic[c].i, 1.0, alpha.data(), q[c].data());
}

void ConservationProjector::project_inelastic(
    const CollisionCatalog& catalog, std::vector<std::vector<std::vector<double>>>& q) const {
    if (!impl_->has_inelastic) return;
    ConservationProjector::Impl::XVec qsum = ConservationProjector::Impl::XVec::Zero(5);
    for (int i = 0; i < catalog.ns; ++i)
        for (std::size_t c = 0; c < catalog.inelastic[i].size(); ++c)
            impl_->accumulate<false>(i, q[i][c].data(), qsum.data());
    const Eigen::VectorXd alpha = impl_->llt_in.solve(qsum).cast<double>();
    for (int i = 0; i < catalog.ns; ++i)
        for (std::size_t c = 0; c < catalog.inelastic[i].size(); ++c)
            impl_->correct<false>(i, 1.0, alpha.data(), q[i][c].data());
}

void ConservationProjector::project_elastic_sum(const CollisionCatalog& catalog,
                                                std::vector<std::vector<double>>& q) const {
    const int ns = impl_->ns;
    ConservationProjector::Impl::XVec qsum = ConservationProjector::Impl::XVec::Zero(ns + 4);
    for (int i = 0; i < ns; ++i) impl_->accumulate<true>(i, q[i].data(), qsum.data());
    const Eigen::VectorXd alpha = impl_->llt_el.solve(qsum).cast<double>();
    // each species sums Ns elastic channels, whose corrections are identical
    for (int i = 0; i < ns; ++i)
        impl_->correct<true>(i, double(ns), alpha.data(), q[i].data());
    (void)catalog;
}

void ConservationProjector::project_inelastic_sum(const CollisionCatalog& catalog,
                                                  std::vector<std::vector<double>>& q) const {
    if (!impl_->has_inelastic) return;
    const int ns = impl_->ns;
    ConservationProjector::Impl::XVec qsum = ConservationProjector::Impl::XVec::Zero(5);
    for (int i = 0; i < ns; ++i) impl_->accumulate<false>(i, q[i].data(), qsum.data());
    const Eigen::VectorXd alpha = impl_->llt_in.solve(qsum).cast<double>();
    const double n_in = double(ns) * ns * ns - ns;   // channels per species
    for (int i = 0; i < ns; ++i)
        impl_->correct<false>(i, n_in, alpha.data(), q[i].data());
    (void)catalog;
}

// ===========================================================================
// Collision kernel
// ===========================================================================

namespace {

/** One deduplicated weighted convolution: conv(f̂_first, Σ mix) under a weight class. */
struct AJob {
    int first = 0;                                   ///< species of f̂(ζ_{ε−κ+h})
    std::vector<std::pair<int, double>> mix;         ///< second factor Σ coeff·f̂_j(ξ_κ)
    int a_class = -1;                                ///< lattice table id; −1 = closed form
    WeightClassKey key;                              ///< closed-form identity (a_class < 0)
    std::vector<std::pair<int, double>> targets;     ///< (species, multiplicity)
    bool elastic = false;                            ///< accumulate into the elastic part
    int expanded = -1;                               ///< id into expanded weight lines
};

/** Zero-padded (2Nv)³ FFT convolution workspace: exact linear convolution. */
struct PaddedConv {
    int nv = 0, n2 = 0;
    std::size_t total = 0;
    fftw_complex* a = nullptr;
    fftw_complex* b = nullptr;
    fftw_complex* first_hat = nullptr;   // cached spectrum of the padded first factor
    fftw_plan fwd_a = nullptr, fwd_b = nullptr, bwd_a = nullptr;

    explicit PaddedConv(int nv_) : nv(nv_), n2(2 * nv_) {
        total = static_cast<std::size_t>(n2) * n2 * n2;
        a = fftw_alloc_complex(total);
        b = fftw_alloc_complex(total);
        first_hat = fftw_alloc_complex(total);
        std::lock_guard lock(fftw_planner_mutex());
        fwd_a = fftw_plan_dft_3d(n2, n2, n2, a, a, FFTW_FORWARD, FFTW_ESTIMATE);
        fwd_b = fftw_plan_dft_3d(n2, n2, n2, b, b, FFTW_FORWARD, FFTW_ESTIMATE);
        bwd_a = fftw_plan_dft_3d(n2, n2, n2, a, a, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    ~PaddedConv() {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_destroy_plan(fwd_a);
        fftw_destroy_plan(fwd_b);
        fftw_destroy_plan(bwd_a);
        fftw_free(a);
        fftw_free(b);
        fftw_free(first_hat);
    }
    PaddedConv(const PaddedConv&) = delete;
    PaddedConv& operator=(const PaddedConv&) = delete;

    std::size_t pidx(int x, int y, int z) const {
        return (static_cast<std::size_t>(x) * n2 + y) * n2 + z;
    }

    /** Load the first factor f̂ restricted to indices [1, Nv−1]³ and cache its FFT. */
    void load_first(const Complex* fhat) {
        std::memset(a, 0, total * sizeof(fftw_complex));
        for (int x = 1; x < nv; ++x)
            for (int y = 1; y < nv; ++y)
                for (int z = 1; z < nv; ++z) {
                    const std::size_t src = (static_cast<std::size_t>(x) * nv + y) * nv + z;
                    const std::size_t dst = pidx(x, y, z);
                    a[dst][0] = fhat[src].real();
                    a[dst][1] = fhat[src].imag();
                }
        fftw_execute(fwd_a);
        std::memcpy(first_hat, a, total * sizeof(fftw_complex));
    }

    /**
     * Convolve the cached first factor with `g2` (full [0, Nv−1]³ support) and
     * accumulate coeff · conv(ε) into `out`: out(ε) += coeff · Σ_κ f̂(ε−κ+h) g2(κ).
     */
    void convolve_into(const Complex* g2, double coeff, Complex* out) {
        std::memset(b, 0, total * sizeof(fftw_complex));
        for (int x = 0; x < nv; ++x)
            for (int y = 0; y < nv; ++y)
                for (int z = 0; z < nv; ++z) {
                    const std::size_t src = (static_cast<std::size_t>(x) * nv + y) * nv + z;
                    const std::size_t dst = pidx(x, y, z);
                    b[dst][0] = g2[src].real();
                    b[dst][1] = g2[src].imag();
                }
        fftw_execute(fwd_b);
        const double norm = 1.0 / static_cast<double>(total);
        for (std::size_t q = 0; q < total; ++q) {
            const double ar = first_hat[q][0], ai = first_hat[q][1];
            const double br = b[q][0], bi = b[q][1];
            a[q][0] = (ar * br - ai * bi) * norm;
            a[q][1] = (ar * bi + ai * br) * norm;
        }
        fftw_execute(bwd_a);
        const int h = nv / 2;
        for (int x = 0; x < nv; ++x)
            for (int y = 0; y < nv; ++y)
                for (int z = 0; z < nv; ++z) {
                    const std::size_t dst = (static_cast<std::size_t>(x) * nv + y) * nv + z;
                    const std::size_t src = pidx(x + h, y + h, z + h);
                    out[dst] += coeff * Complex(a[src][0], a[src][1]);
                }
    }
};

}  // namespace

struct CollisionKernel::Impl {
    const GasModel& model;
    const CollisionCatalog& catalog;
    VelocityGrid grid;
    const WeightTables& wt;
    KernelOptions opt;

    SpectralTransform transform;
    PaddedConv padded;

    int ns = 0, nv = 0, h = 0;
    double conv_scale = 0.0;   // Δζ³ (the isotropic weight already carries the transform norm)

    // ---- job plan -----------------------------------------------------------
    std::vector<AJob> jobs;
    // per (i, j): summed loss tables Σ_{(h,l)} L̂^{hl}_{ij} on the rank index
    std::vector<std::vector<std::vector<double>>> loss_eff;   // [i][j][rank], empty if none
    bool any_loss = false;

    // ---- ε iteration order (grouped by |ε−h|² rank for row-cache residency) --
    struct EpsInfo {
        std::int32_t flat;                 // row-major index of ε
        std::int32_t rank;                 // rank of |ε−h|²
        std::int16_t e[3];                 // ε components
        std::int16_t klo[3], khi[3];       // clipped κ bounds
    };
    std::vector<EpsInfo> eps_order;
    std::vector<std::size_t> eps_off;      // start of each ε's block in expanded lines
    std::size_t box_total = 0;             // Σ_ε box(ε)

    // expanded box-major weight lines, by expansion id
    std::vector<std::vector<double>> expanded;

    // ---- scratch ------------------------------------------------------------
    std::vector<std::vector<Complex>> fhat;           // [i] spectra
    std::vector<std::vector<Complex>> qel_hat, qin_hat;
    std::vector<Complex> job_out, premix;
    std::vector<std::vector<double>> qel, qin;        // real-space parts
    ConservationProjector projector;

    Impl(const GasModel& m, const CollisionCatalog& cat, const VelocityGrid& g,
         const WeightTables& tables, const KernelOptions& o)
        : model(m),
          catalog(cat),
          grid(g),
          wt(tables),
          opt(o),
          transform(g),
          padded(g.nv),
          ns(m.count()),
          nv(g.nv),
          h(g.nv / 2),
          projector(m, g) {
        conv_scale = g.dzeta * g.dzeta * g.dzeta;
        build_eps_order();
        plan_jobs();
        maybe_expand();
        const std::size_t n3 = static_cast<std::size_t>(nv) * nv * nv;
        fhat.assign(ns, std::vector<Complex>(n3));
        qel_hat.assign(ns, std::vector<Complex>(n3));
        qin_hat.assign(ns, std::vector<Complex>(n3));
        job_out.assign(n3, Complex{});
        premix.assign(n3, Complex{});
        qel.assign(ns, std::vector<double>(n3));
        qin.assign(ns, std::vector<double>(n3));
    }

    std::size_t flat(int x, int y, int z) const {
        return (static_cast<std::size_t>(x) * nv + y) * nv + z;
    }

    void build_eps_order() {
        eps_order.reserve(static_cast<std::size_t>(nv) * nv * nv);
        for (int ex = 0; ex < nv; ++ex)
            for (int ey = 0; ey < nv; ++ey)
                for (int ez = 0; ez < nv; ++ez) {
                    EpsInfo info;
                    info.flat = static_cast<std::int32_t>(flat(ex, ey, ez));
                    info.rank = wt.norms.rank_of(ex, ey, ez);
                    const int e[3] = {ex, ey, ez};
                    for (int s = 0; s < 3; ++s) {
                        info.e[s] = static_cast<std::int16_t>(e[s]);
                        info.klo[s] = static_cast<std::int16_t>(std::max(0, e[s] - h + 1));
                        info.khi[s] = static_cast<std::int16_t>(std::min(nv - 1, e[s] + h - 1));
                    }
                    eps_order.push_back(info);
                }
        std::stable_sort(eps_order.begin(), eps_order.end(),
                         [](const EpsInfo& a, const EpsInfo& b) { return a.rank < b.rank; });
        eps_off.resize(eps_order.size() + 1);
        std::size_t off = 0;
        for (std::size_t p = 0; p < eps_order.size(); ++p) {
            eps_off[p] = off;
            const auto& i = eps_order[p];
            std::size_t box = 1;
            for (int s = 0; s < 3; ++s) box *= static_cast<std::size_t>(i.khi[s] - i.klo[s] + 1);
            off += box;
        }
        eps_off[eps_order.size()] = off;
        box_total = off;
    }

    void plan_jobs() {
        // elastic: per species, lattice classes merge partner species
        for (int i = 0; i < ns; ++i) {
            std::map<int, std::size_t> by_class;
            for (int j = 0; j < ns; ++j) {
                const int p = i * ns + j;   // catalog order is lexicographic (i, j)
                const ElasticRef& ref = wt.elastic_refs[p];
                if (ref.lattice) {
                    auto it = by_class.find(ref.a_class);
                    if (it == by_class.end()) {
                        AJob job;
                        job.first = i;
                        job.a_class = ref.a_class;
                        job.elastic = true;
                        job.mix = {{j, 1.0}};
                        job.targets = {{i, 1.0}};
                        by_class.emplace(ref.a_class, jobs.size());
                        jobs.push_back(std::move(job));
                    } else {
                        jobs[it->second].mix.emplace_back(j, 1.0);
                    }
                } else {
                    AJob job;   // cross-mass pair: closed-form weight
                    job.first = i;
                    job.a_class = -1;
                    job.key = ref.key;
                    job.elastic = true;
                    job.mix = {{j, 1.0}};
                    job.targets = {{i, 1.0}};
                    jobs.push_back(std::move(job));
                }
            }
        }
        // gain: dedup by (class, h, l); scatter with per-species multiplicity
        std::map<std::tuple<int, int, int>, std::size_t> gain_jobs;
        for (int i = 0; i < ns; ++i)
            for (std::size_t c = 0; c < catalog.inelastic[i].size(); ++c) {
                const auto& ch = catalog.inelastic[i][c];
                const int cls = wt.inelastic_refs[i][c].gain_class;
                const auto key = std::make_tuple(cls, ch.h, ch.l);
                auto it = gain_jobs.find(key);
                if (it == gain_jobs.end()) {
                    AJob job;
                    job.first = ch.h;
                    job.a_class = cls;
                    job.elastic = false;
                    job.mix = {{ch.l, 1.0}};
                    job.targets = {{i, 1.0}};
                    gain_jobs.emplace(key, jobs.size());
                    jobs.push_back(std::move(job));
                } else {
                    auto& tg = jobs[it->second].targets;
                    auto t = std::find_if(tg.begin(), tg.end(),
                                          [i](const auto& pr) { return pr.first == i; });
                    if (t == tg.end())
                        tg.emplace_back(i, 1.0);
                    else
                        t->second += 1.0;
                }
            }
        // loss: per (i, j) summed 1-D tables
        loss_eff.assign(ns, std::vector<std::vector<double>>(ns));
        for (int i = 0; i < ns; ++i)
            for (std::size_t c = 0; c < catalog.inelastic[i].size(); ++c) {
                const auto& ch = catalog.inelastic[i][c];
                const auto& tab = wt.rtables[wt.inelastic_refs[i][c].loss_class].v;
                auto& eff = loss_eff[i][ch.j];
                if (eff.empty()) eff.assign(tab.size(), 0.0);
                for (std::size_t r = 0; r < tab.size(); ++r) eff[r] += tab[r];
                any_loss = true;
            }
    }

    void maybe_expand() {
        if (opt.force_compact) return;
        // distinct weight sources: lattice classes and per-job closed forms
        std::map<int, std::vector<std::size_t>> lattice_users;
        std::vector<std::size_t> closed_jobs;
        for (std::size_t jid = 0; jid < jobs.size(); ++jid) {
            if (jobs[jid].a_class >= 0)
                lattice_users[jobs[jid].a_class].push_back(jid);
            else
                closed_jobs.push_back(jid);
        }
        const std::size_t n_sources = lattice_users.size() + closed_jobs.size();
        const std::size_t bytes = n_sources * box_total * sizeof(double);
        if (bytes > opt.expanded_bytes_cap) return;

        expanded.reserve(n_sources);
        for (const auto& [cls, users] : lattice_users) {
            const int id = static_cast<int>(expanded.size());
            expanded.push_back(expand_lattice(cls));
            for (std::size_t jid : users) jobs[jid].expanded = id;
        }
        for (std::size_t jid : closed_jobs) {
            const int id = static_cast<int>(expanded.size());
            expanded.push_back(expand_closed(jobs[jid].key));
            jobs[jid].expanded = id;
        }
    }

    std::vector<double> expand_lattice(int cls) const {
        std::vector<double> w(box_total);
        const auto& at = wt.atables[cls];
        const int tmax1 = wt.norms.tmax + 1;
#pragma omp parallel for schedule(static) num_threads(std::max(1, opt.threads))
        for (std::size_t p = 0; p < eps_order.size(); ++p) {
            const EpsInfo& ei = eps_order[p];
            const double* row = at.rows.data() + static_cast<std::size_t>(ei.rank) * tmax1;
            std::size_t pos = eps_off[p];
            for (int kx = ei.klo[0]; kx <= ei.khi[0]; ++kx) {
                const int dx = 2 * kx - ei.e[0] - h;
                for (int ky = ei.klo[1]; ky <= ei.khi[1]; ++ky) {
                    const int dy = 2 * ky - ei.e[1] - h;
                    const int txy = dx * dx + dy * dy;
                    int dz = 2 * ei.klo[2] - ei.e[2] - h;
                    for (int kz = ei.klo[2]; kz <= ei.khi[2]; ++kz, dz += 2)
                        w[pos++] = row[txy + dz * dz];
                }
            }
        }
        return w;
    }

    std::vector<double> expand_closed(const WeightClassKey& key) const {
        std::vector<double> w(box_total);
        const double dz0 = grid.dzeta, umax = wt.umax, r = key.r;
#pragma omp parallel for schedule(static) num_threads(std::max(1, opt.threads))
        for (std::size_t p = 0; p < eps_order.size(); ++p) {
            const EpsInfo& ei = eps_order[p];
            const double zx = dz0 * (ei.e[0] - h), zy = dz0 * (ei.e[1] - h),
                         zz = dz0 * (ei.e[2] - h);
            const double zeta = std::sqrt(zx * zx + zy * zy + zz * zz);
            std::size_t pos = eps_off[p];
            for (int kx = ei.klo[0]; kx <= ei.khi[0]; ++kx) {
                const double bx = dz0 * (kx - h) - r * zx;
                for (int ky = ei.klo[1]; ky <= ei.khi[1]; ++ky) {
                    const double by = dz0 * (ky - h) - r * zy;
                    const double bxy = bx * bx + by * by;
                    for (int kz = ei.klo[2]; kz <= ei.khi[2]; ++kz) {
                        const double bz = dz0 * (kz - h) - r * zz;
                        w[pos++] = hs_apart(key, zeta, std::sqrt(bxy + bz * bz), umax);
                    }
                }
            }
        }
        return w;
    }

    // ---- convolution cores ----------------------------------------------------

    /** out(ε) = Σ_κ f1(ε−κ+h) g2(κ) W(ε,κ) with expanded weight lines. */
    void conv_expanded(const Complex* f1, const Complex* g2, const double* w, Complex* out) {
#pragma omp parallel for schedule(static) num_threads(std::max(1, opt.threads))
        for (std::size_t p = 0; p < eps_order.size(); ++p) {
            const EpsInfo& ei = eps_order[p];
            std::size_t pos = eps_off[p];
            double acc_re = 0.0, acc_im = 0.0;
            for (int kx = ei.klo[0]; kx <= ei.khi[0]; ++kx) {
                const int mx = ei.e[0] - kx + h;
                for (int ky = ei.klo[1]; ky <= ei.khi[1]; ++ky) {
                    const int my = ei.e[1] - ky + h;
                    const Complex* f1p = f1 + flat(mx, my, ei.e[2] - ei.klo[2] + h);
                    const Complex* g2p = g2 + flat(kx, ky, ei.klo[2]);
                    const int len = ei.khi[2] - ei.klo[2] + 1;
                    for (int q = 0; q < len; ++q) {
                        const Complex a = f1p[-q];
                        const Complex bv = g2p[q];
                        const double wv = w[pos++];
                        acc_re += wv * (a.real() * bv.real() - a.imag() * bv.imag());
                        acc_im += wv * (a.real() * bv.imag() + a.imag() * bv.real());
                    }
                }
            }
            out[ei.flat] = Complex(acc_re, acc_im);
        }
    }

    /** Same sum with weights gathered from a lattice class table. */
    void conv_lattice(const Complex* f1, const Complex* g2, int cls, Complex* out) {
        const auto& at = wt.atables[cls];
        const int tmax1 = wt.norms.tmax + 1;
#pragma omp parallel for schedule(static) num_threads(std::max(1, opt.threads))
        for (std::size_t p = 0; p < eps_order.size(); ++p) {
            const EpsInfo& ei = eps_order[p];
            const double* row = at.rows.data() + static_cast<std::size_t>(ei.rank) * tmax1;
            double acc_re = 0.0, acc_im = 0.0;
            for (int kx = ei.klo[0]; kx <= ei.khi[0]; ++kx) {
                const int dx = 2 * kx - ei.e[0] - h;
                const int mx = ei.e[0] - kx + h;
                for (int ky = ei.klo[1]; ky <= ei.khi[1]; ++ky) {
                    const int dy = 2 * ky - ei.e[1] - h;
                    const int txy = dx * dx + dy * dy;
                    const Complex* f1p = f1 + flat(mx, ei.e[1] - ky + h, ei.e[2] - ei.klo[2] + h);
                    const Complex* g2p = g2 + flat(kx, ky, ei.klo[2]);
                    const int len = ei.khi[2] - ei.klo[2] + 1;
                    int dz = 2 * ei.klo[2] - ei.e[2] - h;
                    for (int q = 0; q < len; ++q, dz += 2) {
                        const Complex a = f1p[-q];
                        const Complex bv = g2p[q];
                        const double wv = row[txy + dz * dz];
                        acc_re += wv * (a.real() * bv.real() - a.imag() * bv.imag());
                        acc_im += wv * (a.real() * bv.imag() + a.imag() * bv.real());
                    }
                }
            }
            out[ei.flat] = Complex(acc_re, acc_im);
        }
    }

    /** Same sum with closed-form hard-sphere weights evaluated on the fly. */
    void conv_closed(const Complex* f1, const Complex* g2, const WeightClassKey& key,
                     Complex* out) {
        const double dz0 = grid.dzeta, umax = wt.umax, r = key.r;
#pragma omp parallel for schedule(static) num_threads(std::max(1, opt.threads))
        for (std::size_t p = 0; p < eps_order.size(); ++p) {
            const EpsInfo& ei = eps_order[p];
            const double zx = dz0 * (ei.e[0] - h), zy = dz0 * (ei.e[1] - h),
                         zz = dz0 * (ei.e[2] - h);
            const double zeta = std::sqrt(zx * zx + zy * zy + zz * zz);
            double acc_re = 0.0, acc_im = 0.0;
            for (int kx = ei.klo[0]; kx <= ei.khi[0]; ++kx) {
                const double bx = dz0 * (kx - h) - r * zx;
                const int mx = ei.e[0] - kx + h;
                for (int ky = ei.klo[1]; ky <= ei.khi[1]; ++ky) {
                    const double by = dz0 * (ky - h) - r * zy;
                    const double bxy = bx * bx + by * by;
                    const Complex* f1p = f1 + flat(mx, ei.e[1] - ky + h, ei.e[2] - ei.klo[2] + h);
                    const Complex* g2p = g2 + flat(kx, ky, ei.klo[2]);
                    const int len = ei.khi[2] - ei.klo[2] + 1;
                    for (int q = 0; q < len; ++q) {
                        const double bz = dz0 * (ei.klo[2] + q - h) - r * zz;
                        const double wv =
                            hs_apart(key, zeta, std::sqrt(bxy + bz * bz), umax);
                        const Complex a = f1p[-q];
                        const Complex bv = g2p[q];
                        acc_re += wv * (a.real() * bv.real() - a.imag() * bv.imag());
                        acc_im += wv * (a.real() * bv.imag() + a.imag() * bv.real());
                    }
                }
            }
            out[ei.flat] = Complex(acc_re, acc_im);
        }
    }

    // ---- pipeline ---------------------------------------------------------------

    /** Forward transforms and the spectral accumulation of all channels. */
    void assemble_spectra(const std::vector<const double*>& f) {
        const std::size_t n3 = fhat[0].size();
        for (int i = 0; i < ns; ++i) transform.forward(f[i], fhat[i].data());
        for (int i = 0; i < ns; ++i) {
            std::fill(qel_hat[i].begin(), qel_hat[i].end(), Complex{});
            std::fill(qin_hat[i].begin(), qin_hat[i].end(), Complex{});
        }

        // deduplicated gain / elastic A-part convolutions
        for (const AJob& job : jobs) {
            const Complex* g2;
            if (job.mix.size() == 1 && job.mix[0].second == 1.0) {
                g2 = fhat[job.mix[0].first].data();
            } else {
                std::fill(premix.begin(), premix.end(), Complex{});
                for (const auto& [j, coeff] : job.mix)
                    for (std::size_t q = 0; q < n3; ++q) premix[q] += coeff * fhat[j][q];
                g2 = premix.data();
            }
            if (job.expanded >= 0)
                conv_expanded(fhat[job.first].data(), g2, expanded[job.expanded].data(),
                              job_out.data());
            else if (job.a_class >= 0)
                conv_lattice(fhat[job.first].data(), g2, job.a_class, job_out.data());
            else
                conv_closed(fhat[job.first].data(), g2, job.key, job_out.data());
            for (const auto& [i, coeff] : job.targets) {
                Complex* dst = (job.elastic ? qel_hat : qin_hat)[i].data();
                for (std::size_t q = 0; q < n3; ++q) dst[q] += coeff * job_out[q];
            }
        }

        // ξ-only weighted parts: exact padded-FFT convolutions
        const auto& norms = wt.norms;
        for (int i = 0; i < ns; ++i) {
            padded.load_first(fhat[i].data());
            // elastic B-part: Σ_j f̂_j(κ) B^{ij}(|ξ_κ|)
            std::fill(premix.begin(), premix.end(), Complex{});
            for (int j = 0; j < ns; ++j) {
                const auto& bt = wt.rtables[wt.elastic_refs[i * ns + j].b_class].v;
                std::size_t q = 0;
                for (int kx = 0; kx < nv; ++kx)
                    for (int ky = 0; ky < nv; ++ky)
                        for (int kz = 0; kz < nv; ++kz, ++q)
                            premix[q] += fhat[j][q] * bt[norms.rank_of(kx, ky, kz)];
            }
            padded.convolve_into(premix.data(), -1.0, qel_hat[i].data());
            // inelastic loss: Σ_j f̂_j(κ) Σ_{(h,l)} L̂^{hl}_{ij}(|ξ_κ|)
            if (any_loss) {
                std::fill(premix.begin(), premix.end(), Complex{});
                bool have = false;
                for (int j = 0; j < ns; ++j) {
                    const auto& eff = loss_eff[i][j];
                    if (eff.empty()) continue;
                    have = true;
                    std::size_t q = 0;
                    for (int kx = 0; kx < nv; ++kx)
                        for (int ky = 0; ky < nv; ++ky)
                            for (int kz = 0; kz < nv; ++kz, ++q)
                                premix[q] += fhat[j][q] * eff[norms.rank_of(kx, ky, kz)];
                }
                if (have) padded.convolve_into(premix.data(), -1.0, qin_hat[i].data());
            }
        }
        for (int i = 0; i < ns; ++i)
            for (std::size_t q = 0; q < n3; ++q) {
                qel_hat[i][q] *= conv_scale;
                qin_hat[i][q] *= conv_scale;
            }
    }

    /** Inverse transforms with contamination checks; fills qel/qin. */
    CollisionKernel::Diagnostics invert() {
        CollisionKernel::Diagnostics diag;
        for (int i = 0; i < ns; ++i) {
            for (auto part : {0, 1}) {
                auto& src = part == 0 ? qel_hat[i] : qin_hat[i];
                auto& dst = part == 0 ? qel[i] : qin[i];
                const double resid = transform.backward(src.data(), dst.data());
                double remax = 0.0;
                for (const double v : dst) {
                    if (!std::isfinite(v))
                        throw SolverError("collision operator evaluation is not finite");
                    remax = std::max(remax, std::abs(v));
                }
                // The clipped convolution leaves an imaginary residue at the level
                // of the spectral truncation error of the state; the method takes
                // the real part and the ratio is reported for monitoring.
                const double ratio = resid / std::max(remax, 1e-300);
                diag.max_imag_ratio = std::max(diag.max_imag_ratio, ratio);
            }
        }
        return diag;
    }
};

CollisionKernel::CollisionKernel(const GasModel& model, const CollisionCatalog& catalog,
                                 const VelocityGrid& grid,
                                 std::shared_ptr<const WeightTables> tables,
                                 const KernelOptions& options)
    : model_(model), catalog_(catalog), grid_(grid), tables_(std::move(tables)) {
    if (!tables_) throw SolverError("collision kernel requires weight tables");
    if (tables_->grid.hash() != grid.hash())
        throw CacheMismatch("weight tables were built for a different velocity grid");
    if (tables_->model_hash != model.hash())
        throw CacheMismatch("weight tables were built for a different gas model");
    impl_ = std::make_unique<Impl>(model_, catalog_, grid_, *tables_, options);
}

CollisionKernel::~CollisionKernel() = default;

SpectralTransform& CollisionKernel::transform() { return impl_->transform; }

CollisionKernel::Diagnostics CollisionKernel::evaluate(const std::vector<const double*>& f,
                                                       const std::vector<double*>& q) {
    impl_->assemble_spectra(f);
    const Diagnostics diag = impl_->invert();
    std::vector<std::vector<double>>& qel = impl_->qel;
    std::vector<std::vector<double>>& qin = impl_->qin;
    impl_->projector.project_elastic_sum(catalog_, qel);
    impl_->projector.project_inelastic_sum(catalog_, qin);
    const std::size_t n3 = qel[0].size();
    for (int i = 0; i < impl_->ns; ++i)
        for (std::size_t k = 0; k < n3; ++k) q[i][k] = qel[i][k] + qin[i][k];
    return diag;
}

CollisionKernel::Diagnostics CollisionKernel::evaluate_unprojected(
    const std::vector<const double*>& f, const std::vector<double*>& q_elastic,
    const std::vector<double*>& q_inelastic) {
    impl_->assemble_spectra(f);
    const Diagnostics diag = impl_->invert();
    const std::size_t n3 = impl_->qel[0].size();
    for (int i = 0; i < impl_->ns; ++i)
        for (std::size_t k = 0; k < n3; ++k) {
            q_elastic[i][k] = impl_->qel[i][k];
            q_inelastic[i][k] = impl_->qin[i][k];
        }
    return diag;
}

// ---- single-channel reference routes (direct clipped summation) --------------

namespace {

template <class WeightFn>
void direct_conv(const VelocityGrid& g, const Complex* f1, const Complex* f2,
                 const WeightFn& weight, double scale, Complex* out) {
    const int nv = g.nv, h = nv / 2;
    auto flat = [nv](int x, int y, int z) {
        return (static_cast<std::size_t>(x) * nv + y) * nv + z;
    };
    for (int ex = 0; ex < nv; ++ex)
        for (int ey = 0; ey < nv; ++ey)
            for (int ez = 0; ez < nv; ++ez) {
                const int e[3] = {ex, ey, ez};
                Complex acc{};
                for (int kx = std::max(0, ex - h + 1); kx <= std::min(nv - 1, ex + h - 1); ++kx)
                    for (int ky = std::max(0, ey - h + 1); ky <= std::min(nv - 1, ey + h - 1);
                         ++ky)
                        for (int kz = std::max(0, ez - h + 1);
                             kz <= std::min(nv - 1, ez + h - 1); ++kz) {
                            const int k[3] = {kx, ky, kz};
                            const Complex a = f1[flat(ex - kx + h, ey - ky + h, ez - kz + h)];
                            const Complex b = f2[flat(kx, ky, kz)];
                            acc += a * b * weight(e, k);
                        }
                out[flat(ex, ey, ez)] = scale * acc;
            }
}

}  // namespace

void CollisionKernel::convolve_elastic(int pair_index, const Complex* fi_hat,
                                       const Complex* fj_hat, Complex* qhat) const {
    direct_conv(
        grid_, fi_hat, fj_hat,
        [&](const int* e, const int* k) { return tables_->elastic(pair_index, e, k); },
        impl_->conv_scale, qhat);
}

void CollisionKernel::convolve_gain(int i, int c, const Complex* fh_hat, const Complex* fl_hat,
                                    Complex* qhat) const {
    direct_conv(
        grid_, fh_hat, fl_hat,
        [&](const int* e, const int* k) { return tables_->inelastic_gain(i, c, e, k); },
        impl_->conv_scale, qhat);
}

void CollisionKernel::convolve_loss(int i, int c, const Complex* fi_hat, const Complex* fj_hat,
                                    Complex* qhat) const {
    direct_conv(
        grid_, fi_hat, fj_hat,
        [&](const int* e, const int* k) {
            (void)e;
            return tables_->inelastic_loss(i, c, k);
        },
        impl_->conv_scale, qhat);
}

}  // namespace boltz
