#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <string>

#include "qmem/commands.hpp"
#include "qmem/config.hpp"
#include "qmem/errors.hpp"
#include "qmem/io.hpp"

using namespace qmem;

namespace {

const char* kCombConfig = R"(
# four-tooth comb
[device]
mode = comb
center = 6e9
spacing = 3.55e6
count = 4
coupling = 12e6
internal_decay = 6e3
external_coupling = 281e6
common_internal_decay = 6e3
common_detuning = 90e6

[pulse]
fwhm = 115e-9
center_time = 460e-9
mean_photon_number = 1.0

[noise]
high_power_decay = 6e3
single_photon_decay = 165e3
temperature = 0.1

[run]
seed = 42
)";

}  // namespace

TEST_CASE("comb config round trip") {
    const ExperimentConfig cfg = parse_config_text(kCombConfig);
    CHECK(cfg.seed == 42);
    CHECK(cfg.pulse.fwhm == doctest::Approx(115e-9));
    CHECK(cfg.pulse.center_time == doctest::Approx(460e-9));
    CHECK(cfg.noise.temperature == doctest::Approx(0.1));
    // calibrated TLS model reproduces the single-photon value at n = 1
    CHECK(effective_decay(cfg.noise.tls, 1.0) == doctest::Approx(165e3).epsilon(1e-9));

    const MemoryDevice dev = cfg.device.realize();
    CHECK(dev.internals.size() == 4);
    CHECK(dev.comb_center() == doctest::Approx(6e9));
    CHECK(dev.common.frequency == doctest::Approx(6e9 + 90e6));
    CHECK(dev.common.external_coupling == doctest::Approx(281e6));
}

TEST_CASE("defaults are sensible when sections are omitted") {
    const ExperimentConfig cfg = parse_config_text("[device]\nmode = comb\ncenter = 6e9\n"
                                                   "spacing = 3e6\ncount = 8\ncoupling = 12e6\n"
                                                   "internal_decay = 6e3\n"
                                                   "external_coupling = 281e6\n");
    CHECK(cfg.seed == 1);
    CHECK(cfg.pulse.fwhm == doctest::Approx(115e-9));
    CHECK(cfg.pulse.center_time == doctest::Approx(460e-9));
    CHECK(cfg.tomography.protocol.amplitudes.size() == 61);
    CHECK_FALSE(cfg.grid.has_value());
}

TEST_CASE("resolved grid derives its step from the external coupling") {
    const ExperimentConfig cfg = parse_config_text(kCombConfig);
    const TimeGrid grid = cfg.resolved_grid(cfg.device.realize());
    CHECK(grid.step == doctest::Approx(1.0 / (50.0 * 281e6)));
    CHECK(grid.start == doctest::Approx(0.0));
    // 4.2 recall periods at 3.55 MHz exceed the 1.6 us floor
    CHECK(grid.end == doctest::Approx(460e-9 + 4.2 / 3.55e6));
}

TEST_CASE("explicit grid section wins over the derived grid") {
    std::string text = kCombConfig;
    text += "\n[grid]\nstart = 0\nend = 3e-6\nstep = 1e-10\n";
    const ExperimentConfig cfg = parse_config_text(text);
    REQUIRE(cfg.grid.has_value());
    const TimeGrid grid = cfg.resolved_grid(cfg.device.realize());
    CHECK(grid.end == doctest::Approx(3e-6));
    CHECK(grid.step == doctest::Approx(1e-10));
}

TEST_CASE("list mode devices enumerate resonators explicitly") {
    const char* text = R"(
[device]
mode = list
resonator0.frequency = 5.999e9
resonator0.decay_rate = 1e4
resonator0.coupling = 10e6
resonator1.frequency = 6.001e9
resonator1.decay_rate = 1e4
resonator1.coupling = 11e6
external_coupling = 281e6
)";
    const ExperimentConfig cfg = parse_config_text(text);
    const MemoryDevice dev = cfg.device.realize();
    REQUIRE(dev.internals.size() == 2);
    CHECK(dev.internals[0].frequency == doctest::Approx(5.999e9));
    CHECK(dev.internals[1].coupling == doctest::Approx(11e6));
    CHECK(dev.common.frequency == doctest::Approx(6e9));
}

TEST_CASE("tomography amplitude ladder is regenerated from max and step") {
    std::string text = kCombConfig;
    text += "\n[tomography]\namplitude_max = 0.1\namplitude_step = 0.02\ndim = 3\n";
    const ExperimentConfig cfg = parse_config_text(text);
    REQUIRE(cfg.tomography.protocol.amplitudes.size() == 6);
    CHECK(cfg.tomography.protocol.amplitudes[5] == doctest::Approx(0.1));
    CHECK(cfg.tomography.protocol.dim == 3);
}

TEST_CASE("unknown keys are rejected by name") {
    const std::string text = std::string(kCombConfig) + "\n[pulse]\nwidht = 1e-9\n";
    try {
        parse_config_text(text);
        FAIL("expected a validation error");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("pulse.widht") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_config_text("[warp]\nspeed = 9\n"), ValidationError);
    CHECK_THROWS_AS(parse_config_text("stray = 1\n"), ValidationError);
    CHECK_THROWS_AS(parse_config_text("[pulse]\nfwhm = fast\n"), ValidationError);
}

TEST_CASE("missing config file maps to a validation failure") {
    CHECK_THROWS_AS(parse_config_file("/nonexistent/path.ini"), ValidationError);
}

TEST_CASE("command wrapper maps exceptions to exit codes") {
    CHECK(run_command([] { return 0; }) == 0);
    CHECK(run_command([]() -> int { throw ValidationError("bad input"); }) == 2);
    CHECK(run_command([]() -> int { throw NumericalError("diverged"); }) == 3);
    CHECK(run_command([]() -> int { throw std::runtime_error("surprise"); }) == 3);
}

TEST_CASE("doubles survive a csv round trip unchanged") {
    for (const double v : {0.1, 1.0 / 3.0, 2.680427046263e-7, -281e6, 0.0}) {
        CHECK(std::stod(format_double(v)) == v);
    }
}

TEST_CASE("quadrature csv round trip") {
    QuadratureBatch batch;
    batch.phases = {0.0, 0.5, 1.0};
    batch.values = {-0.25, 1.0 / 7.0, 3.25};
    const std::string path = "test_quadratures_tmp.csv";
    write_quadratures_csv(batch, path);
    const QuadratureBatch back = read_quadratures_csv(path);
    CHECK(back.phases == batch.phases);
    CHECK(back.values == batch.values);
    std::remove(path.c_str());
}

TEST_CASE("intensity csv reader tolerates a header and rejects junk") {
    const std::string path = "test_intensity_tmp.csv";
    {
        std::ofstream out(path);
        out << "time_s,abs2_out\n0.0,1.5\n1e-9,2.5\n";
    }
    const auto values = read_intensity_csv(path);
    REQUIRE(values.size() == 2);
    CHECK(values[0] == doctest::Approx(1.5));
    CHECK(values[1] == doctest::Approx(2.5));
    {
        std::ofstream out(path);
        out << "0.0,1.5\nnot a row\n";
    }
    CHECK_THROWS_AS(read_intensity_csv(path), ValidationError);
    std::remove(path.c_str());
}
