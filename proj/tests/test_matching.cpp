#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qmem/dynamics.hpp"
#include "qmem/errors.hpp"
#include "qmem/matching.hpp"

using namespace qmem;

namespace {

MatchingProblem lossy_comb_problem() {
    MatchingProblem p;
    p.comb = {6e9, 3e6, 8, 12e6, 165e3};
    p.common = {6e9, 281e6, 165e3};
    p.free_parameters = {FreeParam::coupling};
    p.bounds = {{2e6, 40e6}};
    return p;
}

}  // namespace

TEST_CASE("analytic matching coupling") {
    const double g = analytic_matching_coupling(3e6, 281e6);
    CHECK(g == doctest::Approx(std::sqrt(281e6 * 3e6 / (2.0 * M_PI))).epsilon(1e-12));
    CHECK(g == doctest::Approx(11.583e6).epsilon(1e-3));
    CHECK_THROWS_AS(analytic_matching_coupling(0.0, 281e6), ValidationError);
    CHECK_THROWS_AS(analytic_matching_coupling(3e6, -1.0), ValidationError);
}

TEST_CASE("matching residual is smallest near the analytic coupling") {
    const MatchingProblem p = lossy_comb_problem();
    const double r_low = matching_residual(p.realize({4e6}), p.resolved_band(p.comb, 0.0));
    const double r_match =
        matching_residual(p.realize({10.3e6}), p.resolved_band(p.comb, 0.0));
    const double r_high = matching_residual(p.realize({30e6}), p.resolved_band(p.comb, 0.0));
    CHECK(r_match < r_low);
    CHECK(r_match < r_high);
    CHECK(r_match > 0.0);
    CHECK(r_match < 1.0);
}

TEST_CASE("default residual band extends two spacings past the comb") {
    const MatchingProblem p = lossy_comb_problem();
    const FrequencyBand band = p.resolved_band(p.comb, 0.0);
    CHECK(band.start == doctest::Approx(6e9 - 16.5e6));
    CHECK(band.end == doctest::Approx(6e9 + 16.5e6));
}

TEST_CASE("simplex minimizer finds the bottom of a smooth bowl") {
    const auto f = [](const std::vector<double>& x) {
        const double a = x[0] - 1.3;
        const double b = x[1] + 0.4;
        return a * a + 2.0 * b * b + 0.5 * a * b;
    };
    const SimplexResult r = nelder_mead(f, {0.0, 0.0}, {{-5.0, 5.0}, {-5.0, 5.0}});
    CHECK(r.converged);
    CHECK(r.x[0] == doctest::Approx(1.3).epsilon(2e-2));
    CHECK(r.x[1] == doctest::Approx(-0.4).epsilon(5e-2));
    CHECK(r.value < 1e-3);
}

TEST_CASE("simplex minimizer respects bounds") {
    const auto f = [](const std::vector<double>& x) { return (x[0] - 10.0) * (x[0] - 10.0); };
    const SimplexResult r = nelder_mead(f, {0.5, }, {{0.0, 2.0}});
    CHECK(r.x[0] >= 0.0);
    CHECK(r.x[0] <= 2.0);
    CHECK(r.x[0] == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("optimized coupling lands within 15% of the analytic value") {
    const FitResult fit = optimize(lossy_comb_problem());
    const double g = fit.parameters.at("coupling");
    const double g_star = analytic_matching_coupling(3e6, 281e6);
    CHECK(std::abs(g - g_star) / g_star < 0.15);
    CHECK(g == doctest::Approx(10.33e6).epsilon(0.05));
    CHECK(fit.converged);
    CHECK(fit.iterations > 0);
    CHECK(fit.device.internals.size() == 8);
    CHECK(fit.device.internals[0].coupling == doctest::Approx(g));
}

TEST_CASE("efficiency objective reports the first-echo efficiency") {
    MatchingProblem p = lossy_comb_problem();
    p.objective = MatchObjective::first_echo_efficiency;
    p.bounds = {{9e6, 13e6}};
    const FitResult fit = optimize(p);
    CHECK(fit.objective_value > 0.65);
    CHECK(fit.objective_value < 0.80);
}

TEST_CASE("trace fit recovers the coupling that generated the data") {
    MatchingProblem p = lossy_comb_problem();
    p.comb.coupling = 9e6;  // start away from the truth
    const Pulse pulse{0.0, 115e-9, 1.0, 0.0, 460e-9};
    const TimeGrid grid{0.0, 2.06e-6, 1.0 / (50.0 * 281e6)};

    const Trajectory truth = propagate(p.realize({12e6}), pulse, grid);
    std::vector<double> measured(truth.output_field.size());
    for (std::size_t i = 0; i < measured.size(); ++i)
        measured[i] = std::norm(truth.output_field[i]);

    const FitResult fit = fit_trace(measured, p, pulse, grid);
    CHECK(fit.parameters.at("coupling") == doctest::Approx(12e6).epsilon(0.01));
    CHECK(fit.objective_value < 1e-4);
}

TEST_CASE("trace fit validates the sample count") {
    const MatchingProblem p = lossy_comb_problem();
    const Pulse pulse{0.0, 115e-9, 1.0, 0.0, 460e-9};
    const TimeGrid grid{0.0, 2.06e-6, 1.0 / (50.0 * 281e6)};
    const std::vector<double> wrong(17, 0.1);
    CHECK_THROWS_AS(fit_trace(wrong, p, pulse, grid), ValidationError);
}

TEST_CASE("problem validation") {
    MatchingProblem p = lossy_comb_problem();
    SUBCASE("no free parameters") {
        p.free_parameters.clear();
        p.bounds.clear();
        CHECK_THROWS_AS(p.validate(), ValidationError);
    }
    SUBCASE("bounds arity mismatch") {
        p.bounds.clear();
        CHECK_THROWS_AS(p.validate(), ValidationError);
    }
    SUBCASE("inverted bounds") {
        p.bounds = {{5e6, 1e6}};
        CHECK_THROWS_AS(p.validate(), ValidationError);
    }
}
