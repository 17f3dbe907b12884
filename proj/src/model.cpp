#include "qmem/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qmem/constants.hpp"
#include "qmem/errors.hpp"

namespace qmem {

void ResonatorParams::validate() const {
    if (!(frequency > 0.0)) throw ValidationError("resonator frequency must be > 0");
    if (decay_rate < 0.0) throw ValidationError("resonator decay_rate must be >= 0");
    if (coupling < 0.0) throw ValidationError("resonator coupling must be >= 0");
}

void CommonResonatorParams::validate() const {
    if (!(external_coupling > 0.0))
        throw ValidationError("common resonator external_coupling must be > 0");
    if (internal_decay < 0.0)
        throw ValidationError("common resonator internal_decay must be >= 0");
}

void MemoryDevice::validate() const {
    common.validate();
    if (internals.empty()) throw ValidationError("device needs at least one internal resonator");
    for (const auto& r : internals) r.validate();
    for (std::size_t i = 0; i < internals.size(); ++i)
        for (std::size_t j = i + 1; j < internals.size(); ++j)
            if (internals[i].frequency == internals[j].frequency)
                throw ValidationError("internal resonator frequencies must be pairwise distinct");
}

double MemoryDevice::comb_center() const {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& r : internals) {
        lo = std::min(lo, r.frequency);
        hi = std::max(hi, r.frequency);
    }
    return 0.5 * (lo + hi);
}

double MemoryDevice::min_spacing() const {
    if (internals.size() < 2) return 0.0;
    std::vector<double> f;
    f.reserve(internals.size());
    for (const auto& r : internals) f.push_back(r.frequency);
    std::sort(f.begin(), f.end());
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < f.size(); ++i) m = std::min(m, f[i] - f[i - 1]);
    return m;
}

double MemoryDevice::mean_spacing() const {
    if (internals.size() < 2) return 0.0;
    std::vector<double> f;
    f.reserve(internals.size());
    for (const auto& r : internals) f.push_back(r.frequency);
    std::sort(f.begin(), f.end());
    return (f.back() - f.front()) / static_cast<double>(f.size() - 1);
}

void CombSpec::validate() const {
    if (count < 1) throw ValidationError("comb count must be >= 1");
    if (!(spacing > 0.0)) throw ValidationError("comb spacing must be > 0");
    if (!(center_frequency > 0.0)) throw ValidationError("comb center_frequency must be > 0");
    if (coupling < 0.0) throw ValidationError("comb coupling must be >= 0");
    if (internal_decay < 0.0) throw ValidationError("comb internal_decay must be >= 0");
}

MemoryDevice build_comb(const CombSpec& spec, const CommonResonatorParams& common) {
    spec.validate();
    common.validate();
    MemoryDevice dev;
    dev.common = common;
    dev.internals.reserve(static_cast<std::size_t>(spec.count));
    for (int k = 0; k < spec.count; ++k) {
        ResonatorParams r;
        r.frequency = spec.center_frequency +
                      (static_cast<double>(k) - (spec.count - 1) / 2.0) * spec.spacing;
        r.decay_rate = spec.internal_decay;
        r.coupling = spec.coupling;
        dev.internals.push_back(r);
    }
    dev.validate();
    return dev;
}

void Pulse::validate() const {
    if (!(fwhm > 0.0)) throw ValidationError("pulse fwhm must be > 0");
    if (mean_photon_number < 0.0)
        throw ValidationError("pulse mean_photon_number must be >= 0");
}

Complex Pulse::envelope(double t) const {
    if (mean_photon_number == 0.0) return {0.0, 0.0};
    const double ln2 = std::log(2.0);
    // integral of exp(-4 ln2 t^2 / fwhm^2) dt = fwhm * sqrt(pi / (4 ln2))
    const double norm = fwhm * std::sqrt(kPi / (4.0 * ln2));
    const double amp = std::sqrt(mean_photon_number / norm);
    const double u = (t - center_time) / fwhm;
    const double mag = amp * std::exp(-2.0 * ln2 * u * u);
    const double arg = kTwoPi * carrier_detuning * t + phase;
    return Complex(mag * std::cos(arg), mag * std::sin(arg));
}

void TimeGrid::validate() const {
    if (!(start < end)) throw ValidationError("time grid start must precede end");
    if (!(step > 0.0)) throw ValidationError("time grid step must be > 0");
    if ((end - start) / step > static_cast<double>(kMaxSamples))
        throw ValidationError("time grid exceeds the sample budget");
}

std::size_t TimeGrid::size() const {
    return static_cast<std::size_t>(std::llround((end - start) / step)) + 1;
}

std::vector<Complex> gaussian_envelope(const Pulse& pulse, const TimeGrid& grid) {
    pulse.validate();
    grid.validate();
    if (pulse.mean_photon_number > 0.0 &&
        (grid.start > pulse.center_time - 3.0 * pulse.fwhm ||
         grid.end < pulse.center_time + 3.0 * pulse.fwhm))
        throw ValidationError("time grid truncates the pulse: need +-3 fwhm around its center");
    std::vector<Complex> out(grid.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = pulse.envelope(grid.time(i));
    return out;
}

}  // namespace qmem
