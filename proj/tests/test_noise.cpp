#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qmem/errors.hpp"
#include "qmem/noise.hpp"

using namespace qmem;

namespace {

MemoryDevice matched_comb(double gamma) {
    CombSpec comb{6e9, 3e6, 8, 11.583e6, gamma};
    CommonResonatorParams common{6e9, 281e6, gamma};
    return build_comb(comb, common);
}

}  // namespace

TEST_CASE("saturable decay model") {
    const TlsModel m = TlsModel::calibrated(6e3, 165e3);
    CHECK(effective_decay(m, 1.0) == doctest::Approx(165e3).epsilon(1e-12));
    CHECK(effective_decay(m, 1e12) == doctest::Approx(6e3).epsilon(1e-3));
    // monotone decreasing in the stored photon number
    double prev = effective_decay(m, 0.0);
    for (const double n : {0.5, 1.0, 10.0, 100.0, 1e4}) {
        const double cur = effective_decay(m, n);
        CHECK(cur < prev);
        prev = cur;
    }
    CHECK_THROWS_AS(effective_decay(m, -1.0), ValidationError);
    CHECK_THROWS_AS(TlsModel::calibrated(165e3, 6e3), ValidationError);
}

TEST_CASE("thermal occupation at reference points") {
    // 6 GHz at 100 mK and 600 mK, frozen from the Bose-Einstein formula.
    CHECK(thermal_occupation(6e9, 0.1) == doctest::Approx(0.059502).epsilon(1e-4));
    CHECK(thermal_occupation(6e9, 0.6) == doctest::Approx(1.623503).epsilon(1e-4));
    CHECK(thermal_occupation(6e9, 1e-3) < 1e-100);
    CHECK_THROWS_AS(thermal_occupation(6e9, 0.0), ValidationError);
}

TEST_CASE("noise suppression: frozen values and monotonicity") {
    const FrequencyBand band{6e9 - 3e9, 6e9 + 3e9};
    const double s6 = noise_suppression(matched_comb(6e3), band);
    const double s50 = noise_suppression(matched_comb(50e3), band);
    const double s165 = noise_suppression(matched_comb(165e3), band);
    // Frozen from an independent adaptive-quadrature implementation.
    CHECK(s6 == doctest::Approx(0.00623).epsilon(2e-3));
    CHECK(s50 == doctest::Approx(0.04991).epsilon(2e-3));
    CHECK(s165 == doctest::Approx(0.14948).epsilon(2e-3));
    CHECK(s6 > 0.0);
    CHECK(s165 < 1.0);
    CHECK(s6 < s50);
    CHECK(s50 < s165);
}

TEST_CASE("noise suppression needs a band wide enough for the device response") {
    const MemoryDevice dev = matched_comb(165e3);
    CHECK_THROWS_AS(noise_suppression(dev, {6e9 - 50e6, 6e9 + 50e6}), NumericalError);
    CHECK_THROWS_AS(noise_suppression(dev, {6e9, 6e9}), ValidationError);
}

TEST_CASE("signal-to-noise estimate at the two operating points") {
    const MemoryDevice dev = matched_comb(165e3);

    // single-photon regime at 100 mK
    const TlsModel tls = TlsModel::calibrated(6e3, 165e3);
    const NoiseBudget cold = snr_estimate(dev, tls, 0.1, 1.0);
    CHECK(cold.suppression_factor == doctest::Approx(0.14895).epsilon(5e-3));
    CHECK(cold.thermal_occupation == doctest::Approx(0.059502).epsilon(1e-4));
    CHECK(cold.snr == doctest::Approx(80.186).epsilon(1e-2));
    CHECK(cold.output_noise_photons ==
          doctest::Approx(cold.suppression_factor * cold.thermal_occupation));

    // high-power regime at 600 mK
    const TlsModel high_power{6e3, 0.0, 1.0, 0.5};
    const NoiseBudget warm = snr_estimate(dev, high_power, 0.6, 1.0);
    CHECK(warm.snr == doctest::Approx(97.642).epsilon(1e-2));

    CHECK_THROWS_AS(snr_estimate(dev, tls, 0.1, 0.0), ValidationError);
}

TEST_CASE("zero temperature noise gives an infinite snr sentinel") {
    const MemoryDevice dev = matched_comb(165e3);
    const TlsModel tls = TlsModel::calibrated(6e3, 165e3);
    const NoiseBudget b = snr_estimate(dev, tls, 1e-4, 1.0);
    CHECK(std::isinf(b.snr));
}
