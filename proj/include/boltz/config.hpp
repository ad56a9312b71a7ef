#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "boltz/model.hpp"
#include "boltz/transport.hpp"

namespace boltz {

/**
 * Parsed run configuration.  The on-disk format is a JSON document with
 * nested sections (model / grid / time / initial / shock / output); unknown
 * keys anywhere are rejected with the full field path.
 */
struct RunConfig {
    std::string scenario;   // "relaxation" | "shock"
    GasModel model;

    // [grid]
    int nv = 0;
    double lv = 0.0;

    // [time]
    double dt_collision = 0.0;
    double cfl = 0.5;
    int steps = 0;
    double steady_tol = 1e-8;

    // [initial] — exactly one style present
    struct SpeciesInit {
        double rho = 0.0;
        double T = 0.0;
        std::array<double, 3> V{};
    };
    std::optional<std::vector<SpeciesInit>> init_species;     // per-species Maxwellians
    struct TwoTemperature {
        double rho = 0.0;
        double t_translational = 0.0;
        double t_internal = 0.0;
        std::array<double, 3> V{};
    };
    std::optional<TwoTemperature> init_two_temperature;       // common-mass level gas

    // [shock]
    struct Shock {
        double rho = 0.0;      // upstream density
        double T = 0.0;        // upstream temperature
        double vx = 0.0;       // upstream speed
        std::vector<double> mass_fractions;   // empty → Boltzmann populations at T
        int nx = 0;
        double x_lo = 0.0, x_hi = 0.0;
        Limiter limiter = Limiter::VanAlbada;
    };
    std::optional<Shock> shock;

    // [output]
    std::string out_dir = "out";
    int history_every = 1;

    int threads = 1;
    std::optional<std::string> weights_cache;   // default: <out_dir>/weights.bin

    std::string source_path;   // where this config was loaded from
};

/** Load + validate a config file; throws ValidationError with a field path. */
RunConfig load_config(const std::string& path);

/** Parse from text (tests); `source` names the origin in error messages. */
RunConfig parse_config(const std::string& json_text, const std::string& source);

/** Apply the --fast transformation: halve Nv (min 8) and cut steps to ≤ 50. */
void apply_fast_mode(RunConfig& config);

}  // namespace boltz
