#include "qmem/spectral.hpp"

#include <cmath>

#include "qmem/constants.hpp"
#include "qmem/errors.hpp"

namespace qmem {

Complex reflection_coefficient(const MemoryDevice& device, double frequency) {
    device.validate();
    const double w = angular(frequency);
    const double kt = angular(device.common.external_coupling);
    const double g0t = angular(device.common.internal_decay);
    Complex d(0.5 * (kt + g0t), angular(device.common.frequency) - w);
    for (const auto& r : device.internals) {
        const double gt = angular(r.coupling);
        const Complex den(0.5 * angular(r.decay_rate), angular(r.frequency) - w);
        d += gt * gt / den;
    }
    return 1.0 - kt / d;
}

SpectrumScan spectrum_scan(const MemoryDevice& device, const FrequencyBand& band, int points) {
    if (!(band.start < band.end)) throw ValidationError("spectrum band start must precede end");
    if (points < 2) throw ValidationError("spectrum scan needs at least 2 points");
    SpectrumScan scan;
    scan.frequencies.resize(static_cast<std::size_t>(points));
    scan.s11.resize(static_cast<std::size_t>(points));
    const double h = (band.end - band.start) / (points - 1);
    for (int i = 0; i < points; ++i) {
        const double f = band.start + h * i;
        scan.frequencies[static_cast<std::size_t>(i)] = f;
        scan.s11[static_cast<std::size_t>(i)] = reflection_coefficient(device, f);
    }
    return scan;
}

int count_absorption_dips(const SpectrumScan& scan, double threshold) {
    int dips = 0;
    bool below = false;
    for (const auto& v : scan.s11) {
        const bool b = std::abs(v) < threshold;
        if (b && !below) ++dips;
        below = b;
    }
    return dips;
}

}  // namespace qmem
