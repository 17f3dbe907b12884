#pragma once

namespace qmem {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// CODATA 2018 exact values.
inline constexpr double kPlanck = 6.62607015e-34;     // J s
inline constexpr double kBoltzmann = 1.380649e-23;    // J / K

// All user-facing rates and frequencies are in Hz (cycles); dynamics run in
// angular units.
inline constexpr double angular(double hz) { return kTwoPi * hz; }

}  // namespace qmem
