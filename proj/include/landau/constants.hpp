#pragma once

namespace landau {

inline constexpr double kappa = 5.0 / 3.0;  // monatomic adiabatic exponent
inline constexpr double kappa2 = 5.0 / 6.0; // kappa/2, Gaussian exponent
inline constexpr double pi_const = 3.14159265358979323846;

} // namespace landau
