#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "boltz/constants.hpp"
#include "boltz/equilibrium.hpp"
#include "boltz/errors.hpp"
#include "boltz/moments.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace boltz;

TEST_CASE("Maxwellian peak value and normalization") {
    const GasModel model = testutil::neon_argon();
    const VelocityGrid g = VelocityGrid::make(24, 3000.0);
    std::vector<double> f(g.size());
    maxwellian(model, g, 0, 5e-3, {0.0, 0.0, 0.0}, 300.0, f.data());

    const double mass = model.levels[0].mass;
    const double peak =
        5e-3 / mass * std::pow(mass / (2.0 * std::numbers::pi * kB * 300.0), 1.5);
    // v = 0 is the node at index Nv/2 on each axis.
    CHECK(f[g.index(12, 12, 12)] == doctest::Approx(peak).epsilon(1e-14));

    double number = 0.0;
    for (double x : f) number += x;
    number *= g.dv * g.dv * g.dv;
    CHECK(mass * number == doctest::Approx(5e-3).epsilon(1e-6));
}

TEST_CASE("Maxwellian obeys the Gaussian width scaling") {
    const GasModel model = testutil::neon_argon();
    const VelocityGrid g = VelocityGrid::make(24, 3000.0);
    std::vector<double> f_hot(g.size()), f_cold(g.size());
    maxwellian(model, g, 1, 2e-3, {0.0, 0.0, 0.0}, 4.0 * 320.0, f_hot.data());
    maxwellian(model, g, 1, 2e-3, {0.0, 0.0, 0.0}, 320.0, f_cold.data());
    // f(c, 4T)/f(0, 4T) = f(c/2, T)/f(0, T): offsets of 2Δv and Δv from center.
    const int c = g.nv / 2;
    const double lhs = f_hot[g.index(c + 2, c, c)] / f_hot[g.index(c, c, c)];
    const double rhs = f_cold[g.index(c + 1, c, c)] / f_cold[g.index(c, c, c)];
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("Boltzmann fractions: limits and published equilibrium row") {
    const GasModel model = testutil::five_level();

    SUBCASE("infinite-temperature limit approaches equal fractions") {
        const std::vector<double> frac = boltzmann_fractions(model, 1e12);
        for (double x : frac) CHECK(x == doctest::Approx(0.2).epsilon(1e-6));
    }

    SUBCASE("fractions sum to one") {
        const std::vector<double> frac = boltzmann_fractions(model, 723.543);
        double sum = 0.0;
        for (double x : frac) sum += x;
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-15));
    }

    SUBCASE("equilibrium populations at the relaxed temperature") {
        const std::vector<double> frac = boltzmann_fractions(model, 723.543);
        // Exact partition-function values at this temperature.
        const double expected[5] = {0.573358, 0.249796, 0.108829, 0.046942, 0.021075};
        for (int i = 0; i < 5; ++i)
            CHECK(frac[i] == doctest::Approx(expected[i]).epsilon(1e-4).scale(0.0));
    }
}

TEST_CASE("equilibrium temperature from an energy balance") {
    const GasModel model = testutil::five_level();
    const double mass = model.levels[0].mass;

    SUBCASE("thermal input returns the input temperature") {
        const double n = 1.0 / mass;
        const double t0 = 400.0;
        const double e = 1.5 * n * kB * t0 + n * internal_energy_per_particle_eq(model, t0);
        CHECK(equilibrium_temperature(model, n, e) == doctest::Approx(t0).epsilon(1e-8));
    }

    SUBCASE("translational 1000 K against internal 100 K relaxes near 723.5 K") {
        const double n = 1.0 / mass;  // ρ = 1 kg/m³
        const std::vector<double> frac = boltzmann_fractions(model, 100.0);
        double e_int = 0.0;
        for (int i = 0; i < 5; ++i) e_int += frac[i] * model.levels[i].energy;
        const double e = 1.5 * n * kB * 1000.0 + n * e_int;
        CHECK(equilibrium_temperature(model, n, e) == doctest::Approx(723.5).epsilon(1e-3));
    }

    SUBCASE("no internal energy returns the translational temperature") {
        GasModel inert = testutil::neon_argon();
        inert.levels.resize(1);
        const double n = 2.5e22;
        const double e = 1.5 * n * kB * 731.25;
        CHECK(equilibrium_temperature(inert, n, e) == doctest::Approx(731.25).epsilon(1e-10));
    }

    SUBCASE("unreachable energy throws") {
        CHECK_THROWS_AS(equilibrium_temperature(model, 1.0, 1e30), OutOfBracket);
    }
}

TEST_CASE("internal-temperature inversion is the inverse of the Boltzmann law") {
    const GasModel model = testutil::two_level();
    const double t0 = 537.3;
    const std::vector<double> frac = boltzmann_fractions(model, t0);
    double target = 0.0;
    for (int i = 0; i < model.count(); ++i) target += frac[i] * model.levels[i].energy;
    bool defined = false, hit = true;
    const double t = solve_internal_temperature(model, target, 1.0, 1e6, &defined, &hit);
    CHECK(defined);
    CHECK(t == doctest::Approx(t0).epsilon(1e-8));
}

TEST_CASE("perfect-gas shock jump") {
    const GasModel model = testutil::neon_argon();
    // Equimolar composition by mass fraction.
    const double m1 = model.levels[0].mass, m2 = model.levels[1].mass;
    const std::vector<double> y = {m1 / (m1 + m2), m2 / (m1 + m2)};

    SUBCASE("published Mach-2 downstream state") {
        const FlowState up{1e-4, 300.0, 744.0};
        const FlowState down = perfect_gas_jump(model, y, up);
        CHECK(down.rho == doctest::Approx(2.29e-4).epsilon(2e-3));
        CHECK(down.T == doctest::Approx(623.44).epsilon(1e-3));
        CHECK(down.vx == doctest::Approx(325.45).epsilon(1e-3));
    }

    SUBCASE("acoustic limit leaves the state unchanged") {
        const double r = kB * (y[0] / m1 + y[1] / m2);
        const double a1 = std::sqrt(5.0 / 3.0 * r * 300.0);
        const FlowState up{1e-4, 300.0, 1.0001 * a1};
        const FlowState down = perfect_gas_jump(model, y, up);
        CHECK(down.rho == doctest::Approx(up.rho).epsilon(1e-3));
        CHECK(down.T == doctest::Approx(up.T).epsilon(1e-3));
        CHECK(down.vx == doctest::Approx(up.vx).epsilon(1e-3));
    }

    SUBCASE("subsonic upstream is rejected") {
        const FlowState up{1e-4, 300.0, 100.0};
        CHECK_THROWS_AS(perfect_gas_jump(model, y, up), ValidationError);
    }

    SUBCASE("flux conservation across the closed-form jump") {
        const FlowState up{1e-4, 300.0, 744.0};
        const FlowState down = rankine_hugoniot_downstream(model, y, up);
        const double r = kB * (y[0] / m1 + y[1] / m2);
        const auto flux = [&](const FlowState& s, double out[3]) {
            const double p = s.rho * r * s.T;
            out[0] = s.rho * s.vx;
            out[1] = s.rho * s.vx * s.vx + p;
            out[2] = s.vx * (s.rho * (1.5 * r * s.T + 0.5 * s.vx * s.vx) + p);
        };
        double f1[3], f2[3];
        flux(up, f1);
        flux(down, f2);
        for (int c = 0; c < 3; ++c)
            CHECK(f2[c] == doctest::Approx(f1[c]).epsilon(1e-10));
    }
}

TEST_CASE("two-level gas shock jump couples the internal energy") {
    const GasModel model = testutil::two_level();
    const FlowState up{1e-4, 300.0, 945.33};
    const FlowState down = rankine_hugoniot_downstream(model, {}, up);

    SUBCASE("published Mach-3 downstream state") {
        CHECK(down.rho == doctest::Approx(3.25e-4).epsilon(2e-3));
        CHECK(down.T == doctest::Approx(1046.2).epsilon(1e-3));
        CHECK(down.vx == doctest::Approx(311.07).epsilon(1e-3));
    }

    SUBCASE("flux residuals vanish to round-off") {
        const double mass = model.levels[0].mass;
        const double r = kB / mass;
        const auto flux = [&](const FlowState& s, double out[3]) {
            const double p = s.rho * r * s.T;
            const double e = 1.5 * r * s.T +
                             internal_energy_per_particle_eq(model, s.T) / mass +
                             0.5 * s.vx * s.vx;
            out[0] = s.rho * s.vx;
            out[1] = s.rho * s.vx * s.vx + p;
            out[2] = s.vx * (s.rho * e + p);
        };
        double f1[3], f2[3];
        flux(up, f1);
        flux(down, f2);
        for (int c = 0; c < 3; ++c)
            CHECK(f2[c] == doctest::Approx(f1[c]).epsilon(1e-10));
    }

    SUBCASE("internal coupling lowers the downstream temperature below frozen") {
        const FlowState frozen = perfect_gas_jump(model, {}, up);
        CHECK(down.T < frozen.T);
        CHECK(down.rho > frozen.rho);
    }
}
