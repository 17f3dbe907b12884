#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qmem/errors.hpp"
#include "qmem/spectral.hpp"

using namespace qmem;

namespace {

MemoryDevice comb_device(double spacing, int count, double g, double gamma, double gamma0,
                         double kappa = 281e6) {
    CombSpec comb{6e9, spacing, count, g, gamma};
    CommonResonatorParams common{6e9, kappa, gamma0};
    return build_comb(comb, common);
}

}  // namespace

TEST_CASE("reflection at comb center matches frozen reference values") {
    // Values frozen from an independent implementation of the closed form.
    CHECK(std::abs(reflection_coefficient(comb_device(3.55e6, 4, 12e6, 6e3, 6e3), 6e9)) ==
          doctest::Approx(0.9956294910908658).epsilon(1e-10));
    CHECK(std::abs(reflection_coefficient(comb_device(3.55e6, 4, 12e6, 165e3, 165e3), 6e9)) ==
          doctest::Approx(0.8865982272461095).epsilon(1e-10));
}

TEST_CASE("lossless device reflects everything") {
    const MemoryDevice dev = comb_device(3e6, 8, 11.583e6, 0.0, 0.0);
    const SpectrumScan scan = spectrum_scan(dev, {6e9 - 50e6, 6e9 + 50e6}, 5001);
    for (const auto& v : scan.s11) CHECK(std::abs(std::abs(v) - 1.0) < 1e-12);
}

TEST_CASE("reflection is passive for any lossy device") {
    const MemoryDevice dev = comb_device(3e6, 8, 11.583e6, 165e3, 165e3);
    const SpectrumScan scan = spectrum_scan(dev, {6e9 - 2e9, 6e9 + 2e9}, 20001);
    for (const auto& v : scan.s11) CHECK(std::abs(v) <= 1.0 + 1e-9);
}

TEST_CASE("reflection approaches unity far from all resonances") {
    const MemoryDevice dev = comb_device(3.55e6, 4, 12e6, 165e3, 165e3);
    CHECK(std::abs(reflection_coefficient(dev, 6e9 + 100e9) - Complex(1.0, 0.0)) < 1e-2);
}

TEST_CASE("scan covers the requested band uniformly") {
    const MemoryDevice dev = comb_device(3.55e6, 4, 12e6, 6e3, 6e3);
    const SpectrumScan scan = spectrum_scan(dev, {5.99e9, 6.01e9}, 101);
    REQUIRE(scan.frequencies.size() == 101);
    REQUIRE(scan.s11.size() == 101);
    CHECK(scan.frequencies.front() == doctest::Approx(5.99e9));
    CHECK(scan.frequencies.back() == doctest::Approx(6.01e9));
    CHECK(scan.frequencies[50] == doctest::Approx(6e9));
    CHECK_THROWS_AS(spectrum_scan(dev, {6e9, 6e9}, 100), ValidationError);
    CHECK_THROWS_AS(spectrum_scan(dev, {5.99e9, 6.01e9}, 1), ValidationError);
}

TEST_CASE("well separated critically coupled teeth show up as distinct dips") {
    // g^2 = kappa gamma / 4 makes each tooth critically coupled; the spacing
    // is far larger than the tooth width so the dips cannot merge.
    const double kappa = 281e6;
    const double gamma = 2e6;
    const double g = std::sqrt(kappa * gamma / 4.0);
    const MemoryDevice dev = comb_device(20e6, 4, g, gamma, 0.0, kappa);
    const SpectrumScan scan = spectrum_scan(dev, {6e9 - 50e6, 6e9 + 50e6}, 20001);
    double min_abs = 2.0;
    for (const auto& v : scan.s11) min_abs = std::min(min_abs, std::abs(v));
    CHECK(min_abs < 0.05);
    CHECK(count_absorption_dips(scan, 0.5) == 4);
    CHECK(count_absorption_dips(scan, min_abs * 0.5) == 0);
}
