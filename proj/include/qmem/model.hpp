#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace qmem {

using Complex = std::complex<double>;

// One high-Q storage resonator of the comb.
struct ResonatorParams {
    double frequency = 0.0;    // Hz, resonance frequency
    double decay_rate = 0.0;   // Hz, full energy decay rate
    double coupling = 0.0;     // Hz, coupling to the common resonator

    void validate() const;
};

// The bus resonator coupled to the external waveguide.
struct CommonResonatorParams {
    double frequency = 0.0;          // Hz
    double external_coupling = 0.0;  // Hz, waveguide coupling (full energy rate)
    double internal_decay = 0.0;     // Hz

    void validate() const;
};

struct MemoryDevice {
    CommonResonatorParams common;
    std::vector<ResonatorParams> internals;

    void validate() const;

    // Midpoint of the internal frequency range.
    double comb_center() const;
    // Smallest spacing between adjacent internal frequencies; 0 for a single
    // resonator.
    double min_spacing() const;
    // Mean spacing between adjacent internal frequencies; 0 for a single
    // resonator.
    double mean_spacing() const;
};

// Uniform equidistant comb description.
struct CombSpec {
    double center_frequency = 0.0;  // Hz
    double spacing = 0.0;           // Hz
    int count = 0;
    double coupling = 0.0;          // Hz, uniform g
    double internal_decay = 0.0;    // Hz, uniform gamma_n

    void validate() const;
};

MemoryDevice build_comb(const CombSpec& spec, const CommonResonatorParams& common);

// Gaussian input pulse. fwhm is the intensity full width at half maximum;
// the time-integrated photon flux of the envelope equals mean_photon_number.
struct Pulse {
    double carrier_detuning = 0.0;     // Hz, offset from the rotating frame
    double fwhm = 0.0;                 // s
    double mean_photon_number = 1.0;   // |alpha|^2
    double phase = 0.0;                // rad
    double center_time = 0.0;          // s

    void validate() const;

    // Analytic envelope value, evaluable at arbitrary time (the propagator
    // needs off-grid samples for its quadrature nodes).
    Complex envelope(double t) const;
};

struct TimeGrid {
    double start = 0.0;
    double end = 0.0;
    double step = 0.0;

    // Hard cap on (end-start)/step; protects against runaway configs.
    static constexpr std::size_t kMaxSamples = 50'000'000;

    void validate() const;
    std::size_t size() const;                 // number of grid points
    double time(std::size_t i) const { return start + static_cast<double>(i) * step; }
};

std::vector<Complex> gaussian_envelope(const Pulse& pulse, const TimeGrid& grid);

}  // namespace qmem
