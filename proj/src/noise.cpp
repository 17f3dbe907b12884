#include "qmem/noise.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <set>
#include <vector>

#include "qmem/constants.hpp"
#include "qmem/dynamics.hpp"
#include "qmem/errors.hpp"

namespace qmem {

void TlsModel::validate() const {
    if (high_power_decay < 0.0 || tls_decay < 0.0)
        throw ValidationError("TLS decay rates must be >= 0");
    if (!(critical_photon_number > 0.0))
        throw ValidationError("TLS critical photon number must be > 0");
    if (!(exponent > 0.0) || exponent > 1.0)
        throw ValidationError("TLS exponent must be in (0, 1]");
}

TlsModel TlsModel::calibrated(double high_power, double single_photon,
                              double critical_photon_number, double exponent) {
    if (single_photon < high_power)
        throw ValidationError("single-photon decay must be >= high-power decay");
    TlsModel m;
    m.high_power_decay = high_power;
    m.critical_photon_number = critical_photon_number;
    m.exponent = exponent;
    m.tls_decay = (single_photon - high_power) *
                  std::pow(1.0 + 1.0 / critical_photon_number, exponent);
    m.validate();
    return m;
}

double effective_decay(const TlsModel& model, double photon_number) {
    model.validate();
    if (photon_number < 0.0) throw ValidationError("photon number must be >= 0");
    return model.high_power_decay +
           model.tls_decay /
               std::pow(1.0 + photon_number / model.critical_photon_number, model.exponent);
}

double thermal_occupation(double frequency, double temperature) {
    if (!(temperature > 0.0)) throw ValidationError("temperature must be > 0");
    const double x = kPlanck * frequency / (kBoltzmann * temperature);
    return 1.0 / std::expm1(x);
}

namespace {

// Adaptive Simpson with an absolute tolerance per segment.
double simpson_segment(const std::function<double(double)>& f, double a, double fa, double b,
                       double fb, double fm, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0) throw NumericalError("noise integral did not converge");
    if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return simpson_segment(f, a, fa, m, fm, flm, left, 0.5 * tol, depth - 1) +
           simpson_segment(f, m, fm, b, fb, frm, right, 0.5 * tol, depth - 1);
}

double integrate(const std::function<double(double)>& f, const std::vector<double>& breaks,
                 double rel_tol) {
    // Coarse pass to fix the magnitude, then refine to a relative tolerance.
    double scale = 0.0;
    for (std::size_t i = 1; i < breaks.size(); ++i) {
        const double a = breaks[i - 1];
        const double b = breaks[i];
        if (!(b > a)) continue;
        scale += std::abs((b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b)));
    }
    const double tol = rel_tol * std::max(scale, std::numeric_limits<double>::min());
    double total = 0.0;
    for (std::size_t i = 1; i < breaks.size(); ++i) {
        const double a = breaks[i - 1];
        const double b = breaks[i];
        if (!(b > a)) continue;
        const double fa = f(a);
        const double fb = f(b);
        const double m = 0.5 * (a + b);
        const double fm = f(m);
        const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        total += simpson_segment(f, a, fa, b, fb, fm, whole, tol, 30);
    }
    return total;
}

}  // namespace

double noise_suppression(const MemoryDevice& device, const FrequencyBand& band) {
    device.validate();
    if (!(band.start < band.end)) throw ValidationError("noise band must be non-degenerate");

    const double kappa = device.common.external_coupling;
    if (kappa == 0.0) return 0.0;

    double span = 0.0;
    for (const auto& r : device.internals)
        span = std::max(span, 2.0 * std::abs(r.frequency - device.comb_center()));
    const double required = span + 10.0 * kappa;
    if (band.end - band.start < required)
        throw NumericalError("noise band too narrow: needs comb span + 10 kappa");

    const double kt = angular(kappa);
    const double g0t = angular(device.common.internal_decay);
    const auto dval = [&](double w) {
        Complex d(0.5 * (kt + g0t), angular(device.common.frequency) - w);
        for (const auto& r : device.internals) {
            const double gt = angular(r.coupling);
            d += gt * gt / Complex(0.5 * angular(r.decay_rate), angular(r.frequency) - w);
        }
        return d;
    };

    // Breakpoints bracketing each resonance so the adaptive rule sees the
    // narrow Lorentzian features inside a multi-GHz band.
    std::set<double> brk{angular(band.start), angular(band.end)};
    const auto add_around = [&](double w, double width) {
        for (const double s : {10.0, 1e3, 1e6}) {
            brk.insert(w - s * width);
            brk.insert(w + s * width);
        }
        brk.insert(w);
    };
    for (const auto& r : device.internals)
        add_around(angular(r.frequency), std::max(angular(r.decay_rate), 1.0));
    add_around(angular(device.common.frequency), kt);
    std::vector<double> breaks;
    for (const double w : brk)
        if (w >= angular(band.start) && w <= angular(band.end)) breaks.push_back(w);

    const double tol = 1e-8;
    double flux = 0.0;
    for (const auto& r : device.internals) {
        const double wn = angular(r.frequency);
        const double gnt = angular(r.decay_rate);
        const double gt = angular(r.coupling);
        if (gnt == 0.0 || gt == 0.0) continue;
        flux += integrate(
            [&](double w) {
                const double chi2 =
                    1.0 / std::norm(Complex(0.5 * gnt, wn - w));
                return kt * gnt * gt * gt * chi2 / std::norm(dval(w)) / kTwoPi;
            },
            breaks, tol);
    }
    if (g0t > 0.0)
        flux += integrate(
            [&](double w) { return kt * g0t / std::norm(dval(w)) / kTwoPi; }, breaks, tol);

    const double spacing = device.mean_spacing();
    const double window = spacing > 0.0 ? 0.5 / spacing
                                        : 0.5 / device.common.external_coupling;
    const double per_mode = flux / static_cast<double>(device.internals.size() + 1);
    return std::clamp(per_mode * window, 0.0, 1.0);
}

NoiseBudget snr_estimate(const MemoryDevice& device, const TlsModel& tls, double temperature,
                         double stored_photons) {
    if (!(stored_photons > 0.0)) throw ValidationError("stored photon number must be > 0");
    const double gamma = effective_decay(tls, stored_photons);

    MemoryDevice dev = device;
    dev.common.internal_decay = gamma;
    for (auto& r : dev.internals) r.decay_rate = gamma;

    Pulse pulse;
    pulse.fwhm = 115e-9;
    pulse.mean_photon_number = stored_photons;
    pulse.center_time = 4.0 * pulse.fwhm;
    const Trajectory traj = simulate_pulse(dev, pulse, 1.6e-6);
    const double eff = echo_report(traj, dev.mean_spacing(), 1).energy_efficiency;

    double span = 0.0;
    for (const auto& r : dev.internals)
        span = std::max(span, 2.0 * std::abs(r.frequency - dev.comb_center()));
    const double half = 0.5 * span + 5.5 * dev.common.external_coupling;
    const double center = dev.comb_center();
    NoiseBudget budget;
    budget.suppression_factor = noise_suppression(dev, {center - half, center + half});
    budget.thermal_occupation = thermal_occupation(center, temperature);
    budget.output_noise_photons = budget.suppression_factor * budget.thermal_occupation;
    budget.snr = budget.output_noise_photons > 0.0
                     ? eff * stored_photons / budget.output_noise_photons
                     : std::numeric_limits<double>::infinity();
    return budget;
}

}  // namespace qmem
