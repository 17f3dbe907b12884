#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "qmem/errors.hpp"
#include "qmem/model.hpp"

using namespace qmem;

namespace {

MemoryDevice reference_device() {
    CombSpec comb{6e9, 3.55e6, 4, 12e6, 6e3};
    CommonResonatorParams common{6e9, 281e6, 6e3};
    return build_comb(comb, common);
}

}  // namespace

TEST_CASE("comb frequencies are symmetric around the center") {
    const MemoryDevice dev = reference_device();
    REQUIRE(dev.internals.size() == 4);
    CHECK(dev.internals[0].frequency == doctest::Approx(6e9 - 1.5 * 3.55e6));
    CHECK(dev.internals[1].frequency == doctest::Approx(6e9 - 0.5 * 3.55e6));
    CHECK(dev.internals[2].frequency == doctest::Approx(6e9 + 0.5 * 3.55e6));
    CHECK(dev.internals[3].frequency == doctest::Approx(6e9 + 1.5 * 3.55e6));
    CHECK(dev.comb_center() == doctest::Approx(6e9));
    CHECK(dev.min_spacing() == doctest::Approx(3.55e6));
    CHECK(dev.mean_spacing() == doctest::Approx(3.55e6));
}

TEST_CASE("odd comb places one resonator exactly at the center") {
    CombSpec comb{5e9, 2e6, 5, 8e6, 1e3};
    CommonResonatorParams common{5e9, 200e6, 1e3};
    const MemoryDevice dev = build_comb(comb, common);
    CHECK(dev.internals[2].frequency == doctest::Approx(5e9));
}

TEST_CASE("device validation rejects nonsense parameters") {
    MemoryDevice dev = reference_device();
    CHECK_NOTHROW(dev.validate());

    SUBCASE("negative decay") {
        dev.internals[1].decay_rate = -1.0;
        CHECK_THROWS_AS(dev.validate(), ValidationError);
    }
    SUBCASE("zero external coupling") {
        dev.common.external_coupling = 0.0;
        CHECK_THROWS_AS(dev.validate(), ValidationError);
    }
    SUBCASE("no internal resonators") {
        dev.internals.clear();
        CHECK_THROWS_AS(dev.validate(), ValidationError);
    }
    SUBCASE("comb spec needs positive count") {
        CombSpec comb{6e9, 3e6, 0, 12e6, 6e3};
        CHECK_THROWS_AS(comb.validate(), ValidationError);
    }
}

TEST_CASE("pulse envelope has the documented width and normalization") {
    Pulse p;
    p.fwhm = 115e-9;
    p.mean_photon_number = 1.0;
    p.center_time = 460e-9;

    const double peak = std::norm(p.envelope(p.center_time));
    // fwhm is the full width at half maximum of the intensity profile
    CHECK(std::norm(p.envelope(p.center_time + 0.5 * p.fwhm)) ==
          doctest::Approx(0.5 * peak).epsilon(1e-12));
    CHECK(std::norm(p.envelope(p.center_time - 0.5 * p.fwhm)) ==
          doctest::Approx(0.5 * peak).epsilon(1e-12));

    // time-integrated photon flux equals the mean photon number
    const double h = 1e-10;
    double integral = 0.0;
    for (double t = 0.0; t < 1e-6; t += h) integral += std::norm(p.envelope(t)) * h;
    CHECK(integral == doctest::Approx(1.0).epsilon(1e-6));

    // photon number scales the envelope quadratically
    Pulse p4 = p;
    p4.mean_photon_number = 4.0;
    CHECK(std::abs(p4.envelope(p.center_time)) ==
          doctest::Approx(2.0 * std::abs(p.envelope(p.center_time))).epsilon(1e-12));
}

TEST_CASE("pulse carrier and phase rotate the envelope") {
    Pulse p;
    p.fwhm = 100e-9;
    p.center_time = 400e-9;
    p.carrier_detuning = 5e6;
    p.phase = 0.7;

    const double t = 430e-9;
    const Complex base = [&] {
        Pulse q = p;
        q.carrier_detuning = 0.0;
        q.phase = 0.0;
        return q.envelope(t);
    }();
    const double expected_arg = 2.0 * M_PI * 5e6 * t + 0.7;
    const Complex got = p.envelope(t);
    CHECK(std::abs(got) == doctest::Approx(std::abs(base)).epsilon(1e-12));
    CHECK(std::arg(got / base) ==
          doctest::Approx(std::remainder(expected_arg, 2.0 * M_PI)).epsilon(1e-9));
}

TEST_CASE("pulse validation") {
    Pulse p;
    p.fwhm = 0.0;
    CHECK_THROWS_AS(p.validate(), ValidationError);
    p.fwhm = 115e-9;
    p.mean_photon_number = -1.0;
    CHECK_THROWS_AS(p.validate(), ValidationError);
}

TEST_CASE("time grid basics") {
    TimeGrid g{0.0, 1e-6, 1e-9};
    CHECK_NOTHROW(g.validate());
    CHECK(g.size() == 1001);
    CHECK(g.time(0) == doctest::Approx(0.0));
    CHECK(g.time(1000) == doctest::Approx(1e-6));

    SUBCASE("reversed grid rejected") {
        TimeGrid bad{1e-6, 0.0, 1e-9};
        CHECK_THROWS_AS(bad.validate(), ValidationError);
    }
    SUBCASE("sample cap enforced") {
        TimeGrid bad{0.0, 1.0, 1e-12};
        CHECK_THROWS_AS(bad.validate(), ValidationError);
    }
}

TEST_CASE("sampled envelope requires the grid to cover the pulse") {
    Pulse p;
    p.fwhm = 115e-9;
    p.center_time = 460e-9;

    TimeGrid good{0.0, 2e-6, 1e-9};
    const auto env = gaussian_envelope(p, good);
    REQUIRE(env.size() == good.size());
    CHECK(std::abs(env[460]) == doctest::Approx(std::abs(p.envelope(460e-9))).epsilon(1e-12));

    TimeGrid late{400e-9, 2e-6, 1e-9};  // starts inside the pulse
    CHECK_THROWS_AS(gaussian_envelope(p, late), ValidationError);
}
