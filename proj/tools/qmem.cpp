#include <CLI11.hpp>

#include "qmem/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"frequency-comb microwave quantum memory toolkit"};
    app.require_subcommand(1);

    int workers = 0;  // reserved; current implementation is single-threaded
    app.add_option("--workers", workers, "cap on worker parallelism");

    const auto add_common = [](CLI::App* sub, qmem::CommonOptions& common) {
        sub->add_option("--config", common.config_path, "experiment config file")->required();
        sub->add_option("--output", common.output_dir, "output directory");
        std::uint64_t seed = 0;
        auto* opt = sub->add_option("--seed", seed, "seed override");
        sub->callback([&common, opt, &seed]() {
            if (opt->count() > 0) common.seed_override = seed;
        });
    };

    qmem::SpectrumOptions spectrum;
    auto* sub_spectrum = app.add_subcommand("spectrum", "stationary reflection scan");
    add_common(sub_spectrum, spectrum.common);
    double band_start = 0.0, band_end = 0.0;
    auto* bs = sub_spectrum->add_option("--band-start", band_start, "scan start, Hz");
    auto* be = sub_spectrum->add_option("--band-end", band_end, "scan end, Hz");
    sub_spectrum->add_option("--points", spectrum.points, "scan points");

    qmem::EchoOptions echo;
    auto* sub_echo = app.add_subcommand("echo", "time-domain echo simulation");
    add_common(sub_echo, echo.common);
    sub_echo->add_option("--echo-index", echo.echo_indices, "echo window indices");
    double horizon = 0.0;
    auto* ho = sub_echo->add_option("--horizon", horizon, "recovered-energy horizon, s");
    sub_echo->add_flag("--verbose-modes", echo.verbose_modes, "per-mode CSV columns");

    qmem::MatchOptions match;
    auto* sub_match = app.add_subcommand("match", "impedance matching optimization");
    add_common(sub_match, match.common);
    sub_match->add_option("--free", match.free_parameters, "free parameters");
    sub_match->add_option("--objective", match.objective,
                          "spectral_residual | first_echo_efficiency");

    qmem::FitOptions fit;
    auto* sub_fit = app.add_subcommand("fit", "fit model parameters to a measured trace");
    add_common(sub_fit, fit.common);
    sub_fit->add_option("--data", fit.data_path, "measured intensity CSV")->required();
    sub_fit->add_option("--free", fit.free_parameters, "free parameters");

    qmem::TomoOptions tomo;
    auto* sub_tomo = app.add_subcommand("tomo", "coherent-state process tomography");
    add_common(sub_tomo, tomo.common);
    sub_tomo->add_option("--mode", tomo.mode, "simulate | reconstruct | end-to-end");
    sub_tomo->add_option("--data-dir", tomo.data_dir, "quadrature CSV directory");

    qmem::NoiseOptions noise;
    auto* sub_noise = app.add_subcommand("noise", "noise budget and temperature sweep");
    add_common(sub_noise, noise.common);
    sub_noise->add_option("--sweep-start", noise.sweep_start, "sweep start, K");
    sub_noise->add_option("--sweep-end", noise.sweep_end, "sweep end, K");
    sub_noise->add_option("--sweep-points", noise.sweep_points, "sweep points");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (bs->count() > 0) spectrum.band_start = band_start;
    if (be->count() > 0) spectrum.band_end = band_end;
    if (ho->count() > 0) echo.horizon = horizon;

    if (sub_spectrum->parsed())
        return qmem::run_command([&] { return qmem::cmd_spectrum(spectrum); });
    if (sub_echo->parsed()) return qmem::run_command([&] { return qmem::cmd_echo(echo); });
    if (sub_match->parsed()) return qmem::run_command([&] { return qmem::cmd_match(match); });
    if (sub_fit->parsed()) return qmem::run_command([&] { return qmem::cmd_fit(fit); });
    if (sub_tomo->parsed()) return qmem::run_command([&] { return qmem::cmd_tomo(tomo); });
    if (sub_noise->parsed()) return qmem::run_command([&] { return qmem::cmd_noise(noise); });
    return 2;
}
