#include "qmem/commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>

#include <json.hpp>

#include "qmem/config.hpp"
#include "qmem/dynamics.hpp"
#include "qmem/errors.hpp"
#include "qmem/io.hpp"
#include "qmem/matching.hpp"
#include "qmem/noise.hpp"
#include "qmem/spectral.hpp"
#include "qmem/tomography.hpp"

namespace qmem {

namespace {

using nlohmann::json;

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

ExperimentConfig load(const CommonOptions& opt) {
    ExperimentConfig cfg = parse_config_file(opt.config_path);
    if (opt.seed_override) cfg.seed = *opt.seed_override;
    return cfg;
}

std::string join(const std::string& dir, const std::string& name) {
    if (dir.empty() || dir == ".") return name;
    return dir + "/" + name;
}

FreeParam parse_free_param(const std::string& name) {
    if (name == "coupling") return FreeParam::coupling;
    if (name == "external_coupling") return FreeParam::external_coupling;
    if (name == "common_detuning") return FreeParam::common_detuning;
    if (name == "spacing") return FreeParam::spacing;
    throw ValidationError("unknown free parameter '" + name + "'");
}

MatchingProblem problem_from_config(const ExperimentConfig& cfg,
                                    const std::vector<std::string>& free_names) {
    if (!cfg.device.comb_mode)
        throw ValidationError("matching commands need a comb-mode device section");
    MatchingProblem p;
    p.comb = cfg.device.comb;
    p.common.external_coupling = cfg.device.external_coupling;
    p.common.internal_decay = cfg.device.common_internal_decay;
    p.common_detuning = cfg.device.common_detuning;
    p.pulse = cfg.pulse;
    for (const auto& name : free_names) {
        const FreeParam fp = parse_free_param(name);
        p.free_parameters.push_back(fp);
        switch (fp) {
            case FreeParam::coupling:
                p.bounds.emplace_back(0.2 * p.comb.coupling, 4.0 * p.comb.coupling);
                break;
            case FreeParam::external_coupling:
                p.bounds.emplace_back(0.25 * p.common.external_coupling,
                                      4.0 * p.common.external_coupling);
                break;
            case FreeParam::common_detuning:
                p.bounds.emplace_back(-p.common.external_coupling, p.common.external_coupling);
                break;
            case FreeParam::spacing:
                p.bounds.emplace_back(0.5 * p.comb.spacing, 2.0 * p.comb.spacing);
                break;
        }
    }
    return p;
}

std::string batch_filename(std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "quadratures_%03zu.csv", index);
    return buf;
}

}  // namespace

int cmd_spectrum(const SpectrumOptions& opt) {
    const Stopwatch clock;
    const ExperimentConfig cfg = load(opt.common);
    const MemoryDevice dev = cfg.device.realize();

    double half_span = 0.0;
    for (const auto& r : dev.internals)
        half_span = std::max(half_span, std::abs(r.frequency - dev.comb_center()));
    FrequencyBand band{opt.band_start.value_or(dev.comb_center() - half_span - 20e6),
                       opt.band_end.value_or(dev.comb_center() + half_span + 20e6)};
    const SpectrumScan scan = spectrum_scan(dev, band, opt.points);
    write_spectrum_csv(scan, join(opt.common.output_dir, "spectrum.csv"));

    double min_abs = 2.0;
    double min_freq = 0.0;
    for (std::size_t i = 0; i < scan.s11.size(); ++i) {
        const double a = std::abs(scan.s11[i]);
        if (a < min_abs) {
            min_abs = a;
            min_freq = scan.frequencies[i];
        }
    }
    json results{{"band_start_hz", band.start},
                 {"band_end_hz", band.end},
                 {"points", opt.points},
                 {"min_abs_s11", min_abs},
                 {"min_abs_s11_frequency_hz", min_freq},
                 {"absorption_dips", count_absorption_dips(scan, 0.5 * (1.0 + min_abs))}};
    write_report(join(opt.common.output_dir, "spectrum_report.json"), "spectrum", cfg, results,
                 clock.seconds());
    return 0;
}

int cmd_echo(const EchoOptions& opt) {
    const Stopwatch clock;
    const ExperimentConfig cfg = load(opt.common);
    const MemoryDevice dev = cfg.device.realize();
    const TimeGrid grid = cfg.resolved_grid(dev);
    const Trajectory traj = propagate(dev, cfg.pulse, grid);
    write_trajectory_csv(traj, join(opt.common.output_dir, "trajectory.csv"), opt.verbose_modes);

    const double spacing = dev.mean_spacing() > 0.0 ? dev.mean_spacing()
                                                    : dev.common.external_coupling;
    json echoes = json::array();
    for (const int idx : opt.echo_indices)
        echoes.push_back(echo_report_json(echo_report(traj, spacing, idx)));
    json results{{"echoes", echoes},
                 {"input_energy", traj.input_energy()},
                 {"energy_balance_residual", energy_balance_residual(dev, traj)}};
    if (opt.horizon) results["recovered_energy"] = recovered_energy(traj, *opt.horizon);
    write_report(join(opt.common.output_dir, "echo_report.json"), "echo", cfg, results,
                 clock.seconds());
    return 0;
}

int cmd_match(const MatchOptions& opt) {
    const Stopwatch clock;
    const ExperimentConfig cfg = load(opt.common);
    MatchingProblem problem = problem_from_config(cfg, opt.free_parameters);
    if (opt.objective == "spectral_residual")
        problem.objective = MatchObjective::spectral_residual;
    else if (opt.objective == "first_echo_efficiency")
        problem.objective = MatchObjective::first_echo_efficiency;
    else
        throw ValidationError("unknown objective '" + opt.objective + "'");

    const FitResult fit = optimize(problem);
    json results = fit_result_json(fit);
    results["analytic_matching_coupling"] =
        analytic_matching_coupling(problem.comb.spacing, problem.common.external_coupling);
    write_report(join(opt.common.output_dir, "match_report.json"), "match", cfg, results,
                 clock.seconds());
    return 0;
}

int cmd_fit(const FitOptions& opt) {
    const Stopwatch clock;
    const ExperimentConfig cfg = load(opt.common);
    const MatchingProblem problem = problem_from_config(cfg, opt.free_parameters);
    const MemoryDevice base = cfg.device.realize();
    const TimeGrid grid = cfg.resolved_grid(base);
    const std::vector<double> measured = read_intensity_csv(opt.data_path);
    const FitResult fit = fit_trace(measured, problem, cfg.pulse, grid);
    write_report(join(opt.common.output_dir, "fit_report.json"), "fit", cfg,
                 fit_result_json(fit), clock.seconds());
    return 0;
}

int cmd_tomo(const TomoOptions& opt) {
    const Stopwatch clock;
    const ExperimentConfig cfg = load(opt.common);
    const TomographyProtocol& protocol = cfg.tomography.protocol;
    protocol.validate();

    const bool simulate = opt.mode == "simulate" || opt.mode == "end-to-end";
    const bool reconstruct = opt.mode == "reconstruct" || opt.mode == "end-to-end";
    if (!simulate && !reconstruct)
        throw ValidationError("tomo mode must be simulate, reconstruct, or end-to-end");

    std::vector<ProcessRun> runs;
    json results{{"mode", opt.mode}};
    if (simulate) {
        for (std::size_t i = 0; i < protocol.amplitudes.size(); ++i) {
            const double a = protocol.amplitudes[i];
            DensityMatrix rho = coherent_state(a, protocol.dim);
            rho = loss_channel(rho, cfg.tomography.transmissivity);
            if (cfg.tomography.rotation != 0.0)
                rho = phase_rotation(rho, cfg.tomography.rotation);
            QuadratureBatch batch =
                sample_quadratures(rho, protocol.phases, protocol.samples_per_amplitude,
                                   substream_seed(cfg.seed, i));
            if (opt.mode == "simulate")
                write_quadratures_csv(batch, join(opt.common.output_dir, batch_filename(i)));
            runs.push_back({a, std::move(batch)});
        }
        results["channel"] = {{"transmissivity", cfg.tomography.transmissivity},
                              {"rotation", cfg.tomography.rotation}};
        results["batches"] = protocol.amplitudes.size();
    }
    if (reconstruct) {
        if (opt.mode == "reconstruct") {
            const std::string dir =
                opt.data_dir.empty() ? opt.common.output_dir : opt.data_dir;
            for (std::size_t i = 0; i < protocol.amplitudes.size(); ++i)
                runs.push_back({protocol.amplitudes[i],
                                read_quadratures_csv(join(dir, batch_filename(i)))});
        }
        MleOptions mle;
        mle.bootstrap_resamples = cfg.tomography.bootstrap_resamples;
        mle.bootstrap_seed = substream_seed(cfg.seed, 0x1000);
        const ProcessTensor tensor =
            mle_process(runs, protocol.dim, cfg.tomography.diagonal, mle);
        results["process_tensor"] = process_tensor_json(tensor);
        const double leak = coherent_state(protocol.amplitudes.back(), protocol.dim)
                                .truncation_leakage;
        results["max_input_truncation_leakage"] = leak;
    }
    write_report(join(opt.common.output_dir, "tomo_report.json"), "tomo", cfg, results,
                 clock.seconds());
    return 0;
}

int cmd_noise(const NoiseOptions& opt) {
    const Stopwatch clock;
    const ExperimentConfig cfg = load(opt.common);
    const MemoryDevice dev = cfg.device.realize();
    if (!(opt.sweep_start > 0.0) || !(opt.sweep_end > opt.sweep_start) || opt.sweep_points < 2)
        throw ValidationError("noise sweep needs 0 < start < end and >= 2 points");

    const NoiseBudget budget =
        snr_estimate(dev, cfg.noise.tls, cfg.noise.temperature, 1.0);
    const double center = dev.comb_center();

    std::vector<TemperatureSweepRow> rows;
    for (int i = 0; i < opt.sweep_points; ++i) {
        TemperatureSweepRow row;
        row.temperature = opt.sweep_start +
                          (opt.sweep_end - opt.sweep_start) * i / (opt.sweep_points - 1);
        row.nbar = thermal_occupation(center, row.temperature);
        row.suppression = budget.suppression_factor;
        row.snr = budget.snr * budget.thermal_occupation / row.nbar;
        rows.push_back(row);
    }
    write_temperature_sweep_csv(rows, join(opt.common.output_dir, "temperature_sweep.csv"));
    write_report(join(opt.common.output_dir, "noise_report.json"), "noise", cfg,
                 noise_budget_json(budget), clock.seconds());
    return 0;
}

int run_command(const std::function<int()>& f) {
    try {
        return f();
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}

}  // namespace qmem
