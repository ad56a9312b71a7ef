#include "boltz/phase_space.hpp"

#include <cmath>
#include <numbers>

#include "boltz/errors.hpp"
#include "doctest.h"

using namespace boltz;

TEST_CASE("velocity grid geometry") {
    const auto g = VelocityGrid::make(16, 3000.0);
    CHECK(g.dv == doctest::Approx(2.0 * 3000.0 / 16).epsilon(1e-15));
    // frequency extent chosen so that Δζ·Δv = 2π/Nv (unitary pairing)
    CHECK(g.dzeta * g.dv == doctest::Approx(2.0 * std::numbers::pi / 16).epsilon(1e-14));
    CHECK(g.lzeta * g.dv == doctest::Approx(std::numbers::pi).epsilon(1e-14));
    CHECK(g.lv * g.dzeta == doctest::Approx(std::numbers::pi).epsilon(1e-14));
    CHECK(g.size() == 16 * 16 * 16);
    // kernel truncation radius pinned at the frequency-lattice Nyquist radius pi/dzeta
    CHECK(g.umax() == doctest::Approx(3000.0).epsilon(1e-15));
    CHECK(g.umax() * g.dzeta == doctest::Approx(std::numbers::pi).epsilon(1e-14));

    SUBCASE("node placement") {
        CHECK(g.velocity(0) == -3000.0);
        CHECK(g.velocity(8) == 0.0);
        CHECK(g.velocity(15) == doctest::Approx(3000.0 - g.dv).epsilon(1e-15));
        CHECK(g.frequency(8) == 0.0);
        CHECK(g.frequency(0) == doctest::Approx(-g.lzeta).epsilon(1e-15));
    }

    SUBCASE("row-major indexing, z fastest") {
        CHECK(g.index(0, 0, 0) == 0);
        CHECK(g.index(0, 0, 1) == 1);
        CHECK(g.index(0, 1, 0) == 16);
        CHECK(g.index(1, 0, 0) == 256);
        const auto v = g.velocity3(3, 5, 7);
        CHECK(v[0] == g.velocity(3));
        CHECK(v[1] == g.velocity(5));
        CHECK(v[2] == g.velocity(7));
    }
}

TEST_CASE("velocity grid validation") {
    CHECK_THROWS_AS((void)VelocityGrid::make(15, 3000.0), InvalidGrid);   // odd
    CHECK_THROWS_AS((void)VelocityGrid::make(2, 3000.0), InvalidGrid);    // too small
    CHECK_THROWS_AS((void)VelocityGrid::make(16, 0.0), InvalidGrid);
    CHECK_THROWS_AS((void)VelocityGrid::make(16, -1.0), InvalidGrid);
}

TEST_CASE("grid fingerprint") {
    const auto a = VelocityGrid::make(16, 3000.0);
    CHECK(a.hash() == VelocityGrid::make(16, 3000.0).hash());
    CHECK(a.hash() != VelocityGrid::make(18, 3000.0).hash());
    CHECK(a.hash() != VelocityGrid::make(16, 3200.0).hash());
}

TEST_CASE("spatial grid") {
    const auto x = SpatialGrid::make(201, -2e-2, 2e-2);
    CHECK(x.cells() == 200);
    CHECK(x.dx() == doctest::Approx(4e-2 / 200).epsilon(1e-15));
    CHECK(x.node(0) == -2e-2);
    CHECK(x.node(200) == doctest::Approx(2e-2).epsilon(1e-15));
    CHECK(x.centroid(0) == doctest::Approx(-2e-2 + 0.5 * x.dx()).epsilon(1e-12));
    CHECK_THROWS_AS((void)SpatialGrid::make(1, 0.0, 1.0), InvalidGrid);
    CHECK_THROWS_AS((void)SpatialGrid::make(11, 1.0, -1.0), InvalidGrid);
}
