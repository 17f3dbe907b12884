#include "qmem/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "qmem/constants.hpp"
#include "qmem/errors.hpp"

namespace qmem {

namespace {

double trapezoid_abs2(const std::vector<Complex>& v, double h, std::size_t lo, std::size_t hi) {
    if (hi <= lo) return 0.0;
    double s = 0.5 * (std::norm(v[lo]) + std::norm(v[hi]));
    for (std::size_t i = lo + 1; i < hi; ++i) s += std::norm(v[i]);
    return s * h;
}

double trapezoid_abs2(const std::vector<Complex>& v, double h) {
    return trapezoid_abs2(v, h, 0, v.size() - 1);
}

}  // namespace

double Trajectory::input_energy() const {
    return trapezoid_abs2(input_field, grid.step);
}

Trajectory propagate(const MemoryDevice& device, const Envelope& drive, const TimeGrid& grid,
                     double frame, double pulse_center) {
    device.validate();
    grid.validate();

    const std::size_t nmodes = device.internals.size();
    double max_det = 0.0;
    for (const auto& r : device.internals)
        max_det = std::max(max_det, std::abs(r.frequency - frame));
    max_det = std::max(max_det, std::abs(device.common.frequency - frame));
    if (grid.step > 0.1 / (max_det + device.common.external_coupling))
        throw NumericalError("time grid step too coarse for the device bandwidth");

    const double kt = angular(device.common.external_coupling);
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(nmodes) + 1,
                                                static_cast<Eigen::Index>(nmodes) + 1);
    m(0, 0) = Complex(-0.5 * (kt + angular(device.common.internal_decay)),
                      -angular(device.common.frequency - frame));
    for (std::size_t n = 0; n < nmodes; ++n) {
        const auto& r = device.internals[n];
        const Eigen::Index j = static_cast<Eigen::Index>(n) + 1;
        m(0, j) = Complex(0.0, -angular(r.coupling));
        m(j, 0) = Complex(0.0, -angular(r.coupling));
        m(j, j) = Complex(-0.5 * angular(r.decay_rate), -angular(r.frequency - frame));
    }
    Eigen::VectorXcd b = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(nmodes) + 1);
    b(0) = std::sqrt(kt);

    const double h = grid.step;
    const Eigen::MatrixXcd prop = (m * h).exp();

    // 3-point Gauss-Legendre nodes on [0, h]; the propagated source vectors
    // q_i = w_i exp(M (h - tau_i)) b fold the drive into each step exactly to
    // the quadrature order.
    const double r15 = std::sqrt(15.0) / 10.0;
    const double nodes[3] = {(0.5 - r15) * h, 0.5 * h, (0.5 + r15) * h};
    const double weights[3] = {5.0 / 18.0 * h, 8.0 / 18.0 * h, 5.0 / 18.0 * h};
    Eigen::VectorXcd q[3];
    for (int i = 0; i < 3; ++i) q[i] = weights[i] * ((m * (h - nodes[i])).exp() * b);

    const std::size_t npts = grid.size();
    Trajectory traj;
    traj.grid = grid;
    traj.frame = frame;
    traj.pulse_center = pulse_center;
    traj.time.resize(npts);
    traj.input_field.resize(npts);
    traj.common_amplitude.assign(npts, Complex{});
    traj.internal_amplitudes.assign(nmodes, std::vector<Complex>(npts));
    traj.output_field.resize(npts);

    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(nmodes) + 1);
    const double root_kt = std::sqrt(kt);
    for (std::size_t i = 0; i < npts; ++i) {
        const double t = grid.time(i);
        traj.time[i] = t;
        traj.input_field[i] = drive(t);
        traj.common_amplitude[i] = v(0);
        for (std::size_t n = 0; n < nmodes; ++n)
            traj.internal_amplitudes[n][i] = v(static_cast<Eigen::Index>(n) + 1);
        traj.output_field[i] = traj.input_field[i] - root_kt * v(0);
        if (i + 1 < npts) {
            Eigen::VectorXcd next = prop * v;
            for (int k = 0; k < 3; ++k) next += q[k] * drive(t + nodes[k]);
            v = std::move(next);
        }
    }
    return traj;
}

Trajectory propagate(const MemoryDevice& device, const Pulse& pulse, const TimeGrid& grid,
                     double frame) {
    pulse.validate();
    if (grid.start > pulse.center_time - 3.0 * pulse.fwhm)
        throw ValidationError("time grid starts after the pulse support");
    const double dmin = device.min_spacing();
    if (dmin > 0.0 && grid.end < pulse.center_time + 4.0 / dmin)
        throw ValidationError("time grid ends before 4 echo periods after the pulse");
    return propagate(
        device, [&pulse](double t) { return pulse.envelope(t); }, grid, frame,
        pulse.center_time);
}

Trajectory propagate(const MemoryDevice& device, const Pulse& pulse, const TimeGrid& grid) {
    return propagate(device, pulse, grid, device.comb_center());
}

Trajectory simulate_pulse(const MemoryDevice& device, const Pulse& pulse, double tail) {
    TimeGrid grid;
    grid.start = 0.0;
    grid.step = 1.0 / (50.0 * device.common.external_coupling);
    grid.end = pulse.center_time + tail;
    return propagate(device, pulse, grid);
}

Trajectory propagate_cw(const MemoryDevice& device, double probe_detuning, const TimeGrid& grid,
                        double frame) {
    // exp(-i w t) drive matches the sign convention of the reflection formula,
    // so the steady-state ratio a_out/a_in equals S11 at frame + detuning.
    const double wt = angular(probe_detuning);
    return propagate(
        device,
        [wt](double t) { return Complex(std::cos(wt * t), -std::sin(wt * t)); }, grid, frame,
        grid.start);
}

EchoReport echo_report(const Trajectory& traj, double spacing, int echo_index) {
    if (!(spacing > 0.0)) throw ValidationError("echo spacing must be > 0");
    if (echo_index < 1) throw ValidationError("echo index must be >= 1");
    EchoReport rep;
    rep.echo_index = echo_index;
    rep.window_start = traj.pulse_center + (echo_index - 0.5) / spacing;
    rep.window_end = traj.pulse_center + (echo_index + 0.5) / spacing;
    if (rep.window_start < traj.grid.start || rep.window_end > traj.grid.end)
        throw ValidationError("echo window falls outside the simulated grid");

    const double h = traj.grid.step;
    const auto idx = [&](double t) {
        double i = (t - traj.grid.start) / h;
        return static_cast<std::size_t>(std::clamp(
            std::llround(i), 0ll, static_cast<long long>(traj.time.size()) - 1));
    };
    const std::size_t lo = idx(rep.window_start);
    const std::size_t hi = idx(rep.window_end);

    const double ein = traj.input_energy();
    const double ewin = trapezoid_abs2(traj.output_field, h, lo, hi);
    rep.energy_efficiency = ein > 0.0 ? ewin / ein : 0.0;

    std::size_t imax = lo;
    double pmax = 0.0;
    for (std::size_t i = lo; i <= hi; ++i) {
        const double p = std::norm(traj.output_field[i]);
        if (p > pmax) {
            pmax = p;
            imax = i;
        }
    }
    rep.peak_time = traj.time[imax] - traj.pulse_center;
    double pin = 0.0;
    for (const auto& v : traj.input_field) pin = std::max(pin, std::norm(v));
    rep.peak_power_ratio = pin > 0.0 ? pmax / pin : 0.0;
    return rep;
}

double recovered_energy(const Trajectory& traj, double horizon) {
    const double t_end = traj.pulse_center + horizon;
    if (horizon < 0.0 || t_end > traj.grid.end + 0.5 * traj.grid.step)
        throw ValidationError("recovery horizon outside the simulated grid");
    const double h = traj.grid.step;
    const std::size_t hi = std::min(
        traj.time.size() - 1,
        static_cast<std::size_t>(std::llround((t_end - traj.grid.start) / h)));
    const double ein = traj.input_energy();
    if (ein == 0.0) return 0.0;
    return trapezoid_abs2(traj.output_field, h, 0, hi) / ein;
}

double energy_balance_residual(const MemoryDevice& device, const Trajectory& traj) {
    const double h = traj.grid.step;
    const double ein = traj.input_energy();
    const double eout = trapezoid_abs2(traj.output_field, h);

    double ediss = angular(device.common.internal_decay) *
                   trapezoid_abs2(traj.common_amplitude, h);
    for (std::size_t n = 0; n < traj.internal_amplitudes.size(); ++n)
        ediss += angular(device.internals[n].decay_rate) *
                 trapezoid_abs2(traj.internal_amplitudes[n], h);

    double stored = std::norm(traj.common_amplitude.back());
    for (const auto& series : traj.internal_amplitudes) stored += std::norm(series.back());

    return std::abs(ein - eout - ediss - stored) / (ein > 0.0 ? ein : 1.0);
}

}  // namespace qmem
