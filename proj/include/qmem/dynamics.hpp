#pragma once

#include <functional>
#include <vector>

#include "qmem/model.hpp"

namespace qmem {

// Complex drive envelope in the rotating frame, evaluable at arbitrary time.
using Envelope = std::function<Complex(double)>;

struct Trajectory {
    TimeGrid grid;
    double frame = 0.0;         // Hz, rotating-frame reference frequency
    double pulse_center = 0.0;  // s, reference time for echo windows
    std::vector<double> time;
    std::vector<Complex> input_field;
    std::vector<Complex> common_amplitude;
    std::vector<std::vector<Complex>> internal_amplitudes;  // [mode][sample]
    std::vector<Complex> output_field;

    double input_energy() const;  // integral of |a_in|^2 dt
};

struct EchoReport {
    int echo_index = 0;
    double window_start = 0.0;        // s, absolute
    double window_end = 0.0;          // s, absolute
    double energy_efficiency = 0.0;   // window energy / input energy
    double peak_time = 0.0;           // s, relative to pulse center
    double peak_power_ratio = 0.0;    // max |a_out|^2 / max |a_in|^2
};

// Propagates the coupled-mode equations in the frame rotating at `frame`:
//   da0/dt = -(i d0~ + (kappa~+gamma0~)/2) a0 - i sum_n g_n~ b_n + sqrt(kappa~) a_in
//   dbn/dt = -(i dn~ + gamma_n~/2) b_n - i g_n~ a0
//   a_out  = a_in - sqrt(kappa~) a0
// d_k~ are angular detunings of the resonators from the frame. The linear
// system is advanced exactly by a per-step matrix exponential; the drive term
// is integrated with 3-point Gauss-Legendre quadrature per step (order 6).
// Initial conditions are vacuum (all amplitudes zero).
Trajectory propagate(const MemoryDevice& device, const Envelope& drive, const TimeGrid& grid,
                     double frame, double pulse_center);

// Pulse convenience overload; the frame defaults to the comb center when NaN.
// Verifies the grid covers the pulse and at least 4/min_spacing after it.
Trajectory propagate(const MemoryDevice& device, const Pulse& pulse, const TimeGrid& grid);
Trajectory propagate(const MemoryDevice& device, const Pulse& pulse, const TimeGrid& grid,
                     double frame);

// Default-grid helper: step 1/(50 kappa), grid sized for the pulse plus `tail`
// seconds of ring-down.
Trajectory simulate_pulse(const MemoryDevice& device, const Pulse& pulse, double tail);

// Constant drive exp(-i 2 pi f t) switched on at grid start; the late-time
// output/input ratio converges to reflection_coefficient(device, frame + f).
Trajectory propagate_cw(const MemoryDevice& device, double probe_detuning, const TimeGrid& grid,
                        double frame);

EchoReport echo_report(const Trajectory& traj, double spacing, int echo_index);

// Output energy up to `horizon` seconds after the pulse center, over input
// energy.
double recovered_energy(const Trajectory& traj, double horizon);

// Integrated energy-balance residual, relative to the input energy:
//   | E_in - E_out - E_dissipated - E_stored(end) | / E_in
double energy_balance_residual(const MemoryDevice& device, const Trajectory& traj);

}  // namespace qmem
