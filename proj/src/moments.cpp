#include "boltz/moments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "boltz/constants.hpp"
#include "boltz/errors.hpp"

namespace boltz {

namespace {

// Mean internal energy per particle at temperature T and its derivative,
// computed about the lowest level for exponent stability.  The derivative is
// Var(E)/(k_B T²) ≥ 0: the mean is monotone in T, strictly so whenever the
// levels are not all degenerate in energy.
struct InternalMean {
    double value = 0.0;
    double slope = 0.0;
};

InternalMean internal_mean(const GasModel& model, double T) {
    double e_min = model.levels[0].energy;
    for (const Level& lv : model.levels) e_min = std::min(e_min, lv.energy);
    long double z = 0.0L, ze = 0.0L, ze2 = 0.0L;
    for (const Level& lv : model.levels) {
        const long double de = lv.energy - e_min;
        const long double w = lv.degeneracy * std::exp(-static_cast<double>(de / (kB * T)));
        z += w;
        ze += w * de;
        ze2 += w * de * de;
    }
    const long double mean = ze / z;
    const long double var = ze2 / z - mean * mean;
    InternalMean out;
    out.value = static_cast<double>(mean + static_cast<long double>(e_min));
    out.slope = static_cast<double>(var) / (kB * T * T);
    return out;
}

bool has_internal_spread(const GasModel& model) {
    double lo = model.levels[0].energy, hi = lo;
    for (const Level& lv : model.levels) {
        lo = std::min(lo, lv.energy);
        hi = std::max(hi, lv.energy);
    }
    return hi - lo > 0.0;
}

}  // namespace

double internal_energy_per_particle_eq(const GasModel& model, double T) {
    return internal_mean(model, T).value;
}

double internal_energy_eq(const GasModel& model, double T) {
    double e_min = model.levels[0].energy;
    for (const Level& lv : model.levels) e_min = std::min(e_min, lv.energy);
    long double z = 0.0L, zem = 0.0L;
    for (const Level& lv : model.levels) {
        const long double w = lv.degeneracy * std::exp(-(lv.energy - e_min) / (kB * T));
        z += w;
        zem += w * (lv.energy / lv.mass);
    }
    return static_cast<double>(zem / z);
}

double solve_internal_temperature(const GasModel& model, double e_int_target_per_particle,
                                  double t_lo, double t_hi, bool* defined, bool* bracket_hit) {
    if (defined) *defined = true;
    if (bracket_hit) *bracket_hit = false;
    if (!has_internal_spread(model)) {
        // A level structure with a single energy stores no information about a
        // temperature: the implicit definition is indeterminate.
        if (defined) *defined = false;
        return 0.0;
    }
    const double f_lo = internal_mean(model, t_lo).value - e_int_target_per_particle;
    const double f_hi = internal_mean(model, t_hi).value - e_int_target_per_particle;
    if (f_lo >= 0.0) {  // colder than the bracket floor (e.g. all mass in the ground level)
        if (bracket_hit) *bracket_hit = true;
        return t_lo;
    }
    if (f_hi <= 0.0) {  // hotter than representable (e.g. inverted populations)
        if (bracket_hit) *bracket_hit = true;
        return t_hi;
    }
    double lo = t_lo, hi = t_hi;
    double t = 0.5 * (lo + hi);
    // Bisection to a loose interval, then Newton polish (the mean is smooth and
    // strictly monotone inside the bracket).
    for (int it = 0; it < 80 && (hi - lo) > 1e-3 * lo; ++it) {
        t = 0.5 * (lo + hi);
        const double f = internal_mean(model, t).value - e_int_target_per_particle;
        (f > 0.0 ? hi : lo) = t;
    }
    t = 0.5 * (lo + hi);
    for (int it = 0; it < 60; ++it) {
        const InternalMean m = internal_mean(model, t);
        const double f = m.value - e_int_target_per_particle;
        if (m.slope <= 0.0) break;
        const double dt = f / m.slope;
        double t_next = t - dt;
        if (!(t_next > lo && t_next < hi)) t_next = 0.5 * (lo + hi);  // safeguarded
        const double f_next = internal_mean(model, t_next).value - e_int_target_per_particle;
        (f_next > 0.0 ? hi : lo) = t_next;
        const bool converged = std::abs(t_next - t) <= 1e-10 * t;
        t = t_next;
        if (converged) break;
    }
    return t;
}

MomentSet compute_moments(const GasModel& model, const VelocityGrid& grid,
                          const std::vector<const double*>& f) {
    const int ns = model.count();
    const int nv = grid.nv;
    const double dv3 = grid.dv * grid.dv * grid.dv;

    // Raw velocity moments per species, one pass per species in fixed node
    // order (z fastest).  s2 is the symmetric second-moment tensor packed as
    // xx yy zz xy xz yz; s3 is Σ v_α |v|² f.
    struct Raw {
        long double s0 = 0.0L;
        long double s1[3] = {0.0L, 0.0L, 0.0L};
        long double s2[6] = {0.0L, 0.0L, 0.0L, 0.0L, 0.0L, 0.0L};
        long double s3[3] = {0.0L, 0.0L, 0.0L};
    };
    std::vector<Raw> raw(ns);
    for (int i = 0; i < ns; ++i) {
        Raw& r = raw[i];
        const double* fi = f[i];
        std::size_t k = 0;
        for (int kx = 0; kx < nv; ++kx) {
            const double vx = grid.velocity(kx);
            for (int ky = 0; ky < nv; ++ky) {
                const double vy = grid.velocity(ky);
                for (int kz = 0; kz < nv; ++kz, ++k) {
                    const double vz = grid.velocity(kz);
                    const long double w = fi[k];
                    r.s0 += w;
                    r.s1[0] += w * vx;
                    r.s1[1] += w * vy;
                    r.s1[2] += w * vz;
                    r.s2[0] += w * vx * vx;
                    r.s2[1] += w * vy * vy;
                    r.s2[2] += w * vz * vz;
                    r.s2[3] += w * vx * vy;
                    r.s2[4] += w * vx * vz;
                    r.s2[5] += w * vy * vz;
                    const double v2 = vx * vx + vy * vy + vz * vz;
                    r.s3[0] += w * vx * v2;
                    r.s3[1] += w * vy * v2;
                    r.s3[2] += w * vz * v2;
                }
            }
        }
    }

    MomentSet m;
    m.rho_i.resize(ns);
    m.n_i.resize(ns);
    m.V_diff.assign(ns, {0.0, 0.0, 0.0});
    m.T_i_ax.assign(ns, {0.0, 0.0, 0.0});
    m.T_i.assign(ns, 0.0);

    long double rho = 0.0L, n = 0.0L, mom[3] = {0.0L, 0.0L, 0.0L};
    for (int i = 0; i < ns; ++i) {
        const long double ni = raw[i].s0 * dv3;
        m.n_i[i] = static_cast<double>(ni);
        m.rho_i[i] = static_cast<double>(ni * model.levels[i].mass);
        n += ni;
        rho += ni * model.levels[i].mass;
        for (int a = 0; a < 3; ++a) mom[a] += model.levels[i].mass * raw[i].s1[a] * dv3;
    }
    m.rho = static_cast<double>(rho);
    m.n = static_cast<double>(n);
    if (!(m.rho > 0.0)) throw EmptyCell("non-positive total density in moment evaluation");

    const long double Vl[3] = {mom[0] / rho, mom[1] / rho, mom[2] / rho};
    for (int a = 0; a < 3; ++a) m.V[a] = static_cast<double>(Vl[a]);

    // Centered moments by exact algebra on the raw sums (the long double carry
    // protects against cancellation at large drift speeds).
    long double t_ax_num[3] = {0.0L, 0.0L, 0.0L};
    long double p_sum = 0.0L;
    long double tau_c[6] = {0.0L, 0.0L, 0.0L, 0.0L, 0.0L, 0.0L};
    long double q_c[3] = {0.0L, 0.0L, 0.0L};
    long double e_total = 0.0L, e_int_density = 0.0L;
    for (int i = 0; i < ns; ++i) {
        const Raw& r = raw[i];
        const double mass = model.levels[i].mass;
        const double ei = model.levels[i].energy;
        const long double ni = r.s0 * dv3;

        // Centered second moments c2[ab] = Σ (v_a−V_a)(v_b−V_b) f  (no Δv³).
        long double c2[6];
        c2[0] = r.s2[0] - 2.0L * Vl[0] * r.s1[0] + Vl[0] * Vl[0] * r.s0;
        c2[1] = r.s2[1] - 2.0L * Vl[1] * r.s1[1] + Vl[1] * Vl[1] * r.s0;
        c2[2] = r.s2[2] - 2.0L * Vl[2] * r.s1[2] + Vl[2] * Vl[2] * r.s0;
        c2[3] = r.s2[3] - Vl[0] * r.s1[1] - Vl[1] * r.s1[0] + Vl[0] * Vl[1] * r.s0;
        c2[4] = r.s2[4] - Vl[0] * r.s1[2] - Vl[2] * r.s1[0] + Vl[0] * Vl[2] * r.s0;
        c2[5] = r.s2[5] - Vl[1] * r.s1[2] - Vl[2] * r.s1[1] + Vl[1] * Vl[2] * r.s0;

        // Centered contracted third moment c3[a] = Σ (v_a−V_a)|v−V|² f.
        const long double v_dot_s1 = Vl[0] * r.s1[0] + Vl[1] * r.s1[1] + Vl[2] * r.s1[2];
        const long double v_sq = Vl[0] * Vl[0] + Vl[1] * Vl[1] + Vl[2] * Vl[2];
        const long double tr_s2 = r.s2[0] + r.s2[1] + r.s2[2];
        long double c3[3];
        for (int a = 0; a < 3; ++a) {
            const long double sv2a =
                (a == 0) ? (Vl[0] * r.s2[0] + Vl[1] * r.s2[3] + Vl[2] * r.s2[4])
                : (a == 1) ? (Vl[0] * r.s2[3] + Vl[1] * r.s2[1] + Vl[2] * r.s2[5])
                           : (Vl[0] * r.s2[4] + Vl[1] * r.s2[5] + Vl[2] * r.s2[2]);
            c3[a] = r.s3[a] - 2.0L * sv2a + v_sq * r.s1[a] - Vl[a] * tr_s2 +
                    2.0L * Vl[a] * v_dot_s1 - Vl[a] * v_sq * r.s0;
        }

        if (ni > 0.0L) {
            for (int a = 0; a < 3; ++a) {
                m.V_diff[i][a] = static_cast<double>(r.s1[a] / r.s0 - Vl[a]);
                m.T_i_ax[i][a] = static_cast<double>(mass / kB * c2[a] / r.s0);
            }
            m.T_i[i] = (m.T_i_ax[i][0] + m.T_i_ax[i][1] + m.T_i_ax[i][2]) / 3.0;
            for (int a = 0; a < 3; ++a) t_ax_num[a] += ni * m.T_i_ax[i][a];
            p_sum += ni * m.T_i[i];
        }
        for (int b = 0; b < 6; ++b) tau_c[b] += mass * c2[b] * dv3;
        for (int a = 0; a < 3; ++a)
            q_c[a] += (0.5L * mass * c3[a] + ei * (r.s1[a] - Vl[a] * r.s0)) * dv3;
        e_total += (0.5L * mass * tr_s2 + static_cast<long double>(ei) * r.s0) * dv3;
        e_int_density += static_cast<long double>(ei) * ni;
    }

    for (int a = 0; a < 3; ++a) m.T_ax[a] = static_cast<double>(t_ax_num[a] / n);
    m.T = (m.T_ax[0] + m.T_ax[1] + m.T_ax[2]) / 3.0;
    m.p = static_cast<double>(kB * p_sum);
    m.tau[0][0] = static_cast<double>(tau_c[0]) - m.p;
    m.tau[1][1] = static_cast<double>(tau_c[1]) - m.p;
    m.tau[2][2] = static_cast<double>(tau_c[2]) - m.p;
    m.tau[0][1] = m.tau[1][0] = static_cast<double>(tau_c[3]);
    m.tau[0][2] = m.tau[2][0] = static_cast<double>(tau_c[4]);
    m.tau[1][2] = m.tau[2][1] = static_cast<double>(tau_c[5]);
    for (int a = 0; a < 3; ++a) m.q[a] = static_cast<double>(q_c[a]);
    m.e_total = static_cast<double>(e_total);

    const double e_per_particle = static_cast<double>(e_int_density / n);
    m.T_int = solve_internal_temperature(model, e_per_particle, 1.0, 1e6, &m.t_int_defined,
                                         &m.t_int_bracket_hit);
    return m;
}

}  // namespace boltz
