#pragma once

namespace boltz {

/// Boltzmann constant [J/K] (exact, 2019 SI).
inline constexpr double kB = 1.380649e-23;

}  // namespace boltz
