#pragma once

#include "qmem/model.hpp"
#include "qmem/spectral.hpp"

namespace qmem {

// Saturable two-level-system loss: gamma(n) = hp + tls / (1 + n/n_c)^beta.
struct TlsModel {
    double high_power_decay = 0.0;       // Hz
    double tls_decay = 0.0;              // Hz, excess decay as n -> 0
    double critical_photon_number = 1.0;
    double exponent = 0.5;

    void validate() const;

    // Model passing through gamma(inf) = high_power and gamma(1) =
    // single_photon.
    static TlsModel calibrated(double high_power, double single_photon,
                               double critical_photon_number = 1.0, double exponent = 0.5);
};

double effective_decay(const TlsModel& model, double photon_number);

// Bose-Einstein occupation at frequency f and temperature T.
double thermal_occupation(double frequency, double temperature);

// Fraction of internal-bath thermal noise flux that reaches the waveguide,
// band-integrated over the device response and normalized per bath mode and
// retrieval half-period; clamped to [0, 1].
double noise_suppression(const MemoryDevice& device, const FrequencyBand& band);

struct NoiseBudget {
    double suppression_factor = 0.0;
    double thermal_occupation = 0.0;
    double output_noise_photons = 0.0;  // per retrieval window
    double snr = 0.0;
};

// snr = echo efficiency at gamma(n) * n / (suppression * nbar). T -> 0 gives
// an infinite snr sentinel.
NoiseBudget snr_estimate(const MemoryDevice& device, const TlsModel& tls, double temperature,
                         double stored_photons);

}  // namespace qmem
