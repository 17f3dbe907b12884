#include "qmem/io.hpp"

#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "qmem/errors.hpp"

namespace qmem {

namespace {

using nlohmann::json;

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot open output file: " + path);
    return out;
}

}  // namespace

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_spectrum_csv(const SpectrumScan& scan, const std::string& path) {
    auto out = open_out(path);
    out << "frequency_hz,re_s11,im_s11,abs_s11,arg_s11\n";
    for (std::size_t i = 0; i < scan.frequencies.size(); ++i) {
        const Complex v = scan.s11[i];
        out << format_double(scan.frequencies[i]) << ',' << format_double(v.real()) << ','
            << format_double(v.imag()) << ',' << format_double(std::abs(v)) << ','
            << format_double(std::arg(v)) << '\n';
    }
}

void write_trajectory_csv(const Trajectory& traj, const std::string& path, bool verbose) {
    auto out = open_out(path);
    out << "time_s,re_in,im_in,re_out,im_out,abs2_out";
    if (verbose) {
        out << ",re_common,im_common";
        for (std::size_t n = 0; n < traj.internal_amplitudes.size(); ++n)
            out << ",re_mode" << n << ",im_mode" << n;
    }
    out << '\n';
    for (std::size_t i = 0; i < traj.time.size(); ++i) {
        out << format_double(traj.time[i]) << ',' << format_double(traj.input_field[i].real())
            << ',' << format_double(traj.input_field[i].imag()) << ','
            << format_double(traj.output_field[i].real()) << ','
            << format_double(traj.output_field[i].imag()) << ','
            << format_double(std::norm(traj.output_field[i]));
        if (verbose) {
            out << ',' << format_double(traj.common_amplitude[i].real()) << ','
                << format_double(traj.common_amplitude[i].imag());
            for (const auto& series : traj.internal_amplitudes)
                out << ',' << format_double(series[i].real()) << ','
                    << format_double(series[i].imag());
        }
        out << '\n';
    }
}

void write_quadratures_csv(const QuadratureBatch& batch, const std::string& path) {
    auto out = open_out(path);
    out << "theta_rad,x\n";
    for (std::size_t i = 0; i < batch.values.size(); ++i)
        out << format_double(batch.phases[i]) << ',' << format_double(batch.values[i]) << '\n';
}

QuadratureBatch read_quadratures_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open quadrature file: " + path);
    QuadratureBatch batch;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (first && line.rfind("theta_rad", 0) == 0) {
            first = false;
            continue;
        }
        first = false;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw ValidationError("malformed quadrature CSV line: " + line);
        try {
            batch.phases.push_back(std::stod(line.substr(0, comma)));
            batch.values.push_back(std::stod(line.substr(comma + 1)));
        } catch (const std::exception&) {
            throw ValidationError("malformed quadrature CSV line: " + line);
        }
    }
    return batch;
}

void write_temperature_sweep_csv(const std::vector<TemperatureSweepRow>& rows,
                                 const std::string& path) {
    auto out = open_out(path);
    out << "temperature_K,nbar,suppression,snr\n";
    for (const auto& r : rows)
        out << format_double(r.temperature) << ',' << format_double(r.nbar) << ','
            << format_double(r.suppression) << ',' << format_double(r.snr) << '\n';
}

std::vector<double> read_intensity_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open data file: " + path);
    std::vector<double> values;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw ValidationError("malformed intensity CSV line: " + line);
        if (first) {
            first = false;
            try {
                std::stod(line.substr(0, comma));
            } catch (const std::exception&) {
                continue;  // header row
            }
        }
        try {
            values.push_back(std::stod(line.substr(comma + 1)));
        } catch (const std::exception&) {
            throw ValidationError("malformed intensity CSV line: " + line);
        }
    }
    return values;
}

nlohmann::json config_echo(const ExperimentConfig& cfg) {
    json dev;
    dev["mode"] = cfg.device.comb_mode ? "comb" : "list";
    if (cfg.device.comb_mode) {
        dev["center"] = cfg.device.comb.center_frequency;
        dev["spacing"] = cfg.device.comb.spacing;
        dev["count"] = cfg.device.comb.count;
        dev["coupling"] = cfg.device.comb.coupling;
        dev["internal_decay"] = cfg.device.comb.internal_decay;
    } else {
        json rs = json::array();
        for (const auto& r : cfg.device.list)
            rs.push_back({{"frequency", r.frequency},
                          {"decay_rate", r.decay_rate},
                          {"coupling", r.coupling}});
        dev["resonators"] = rs;
    }
    dev["external_coupling"] = cfg.device.external_coupling;
    dev["common_internal_decay"] = cfg.device.common_internal_decay;
    dev["common_detuning"] = cfg.device.common_detuning;
    if (cfg.device.common_frequency) dev["common_frequency"] = *cfg.device.common_frequency;

    json pulse{{"carrier_detuning", cfg.pulse.carrier_detuning},
               {"fwhm", cfg.pulse.fwhm},
               {"mean_photon_number", cfg.pulse.mean_photon_number},
               {"phase", cfg.pulse.phase},
               {"center_time", cfg.pulse.center_time}};

    json noise{{"high_power_decay", cfg.noise.tls.high_power_decay},
               {"tls_decay", cfg.noise.tls.tls_decay},
               {"critical_photon_number", cfg.noise.tls.critical_photon_number},
               {"exponent", cfg.noise.tls.exponent},
               {"temperature", cfg.noise.temperature}};

    json tomo{{"amplitudes", cfg.tomography.protocol.amplitudes},
              {"samples_per_amplitude", cfg.tomography.protocol.samples_per_amplitude},
              {"dim", cfg.tomography.protocol.dim},
              {"phase_strategy",
               cfg.tomography.protocol.phases.strategy == PhaseStrategy::fixed ? "fixed"
                                                                               : "uniform_scan"},
              {"fixed_phase", cfg.tomography.protocol.phases.fixed_phase},
              {"phase_count", cfg.tomography.protocol.phases.scan_count},
              {"transmissivity", cfg.tomography.transmissivity},
              {"rotation", cfg.tomography.rotation},
              {"diagonal", cfg.tomography.diagonal},
              {"bootstrap_resamples", cfg.tomography.bootstrap_resamples}};

    json out{{"device", dev}, {"pulse", pulse}, {"noise", noise}, {"tomography", tomo},
             {"seed", cfg.seed}};
    if (cfg.grid)
        out["grid"] = {{"start", cfg.grid->start}, {"end", cfg.grid->end},
                       {"step", cfg.grid->step}};
    return out;
}

nlohmann::json fit_result_json(const FitResult& fit) {
    json params = json::object();
    for (const auto& [name, value] : fit.parameters) params[name] = value;
    return json{{"parameters", params},
                {"objective_value", fit.objective_value},
                {"iterations", fit.iterations},
                {"converged", fit.converged}};
}

nlohmann::json echo_report_json(const EchoReport& rep) {
    return json{{"echo_index", rep.echo_index},
                {"window_start_s", rep.window_start},
                {"window_end_s", rep.window_end},
                {"energy_efficiency", rep.energy_efficiency},
                {"peak_time_s", rep.peak_time},
                {"peak_power_ratio", rep.peak_power_ratio}};
}

nlohmann::json noise_budget_json(const NoiseBudget& budget) {
    return json{{"suppression_factor", budget.suppression_factor},
                {"thermal_occupation", budget.thermal_occupation},
                {"output_noise_photons", budget.output_noise_photons},
                {"snr", std::isinf(budget.snr) ? json("inf") : json(budget.snr)}};
}

nlohmann::json process_tensor_json(const ProcessTensor& tensor) {
    json diag = json::array();
    json errs = json::array();
    for (int n = 0; n < tensor.dim; ++n) {
        json row = json::array();
        json erow = json::array();
        for (int m = 0; m < tensor.dim; ++m) {
            row.push_back(tensor.diagonal(n, m));
            erow.push_back(tensor.transfer_errors.size() > 0 ? tensor.transfer_errors(n, m) : 0.0);
        }
        diag.push_back(row);
        errs.push_back(erow);
    }
    json out{{"dim", tensor.dim},
             {"diagonal", tensor.diagonal_mode},
             {"transfer", diag},
             {"bootstrap_errors", errs}};
    json deficits = json::array();
    for (int m = 0; m < tensor.dim; ++m) deficits.push_back(tensor.trace_deficit(m));
    out["trace_deficit"] = deficits;
    if (!tensor.diagonal_mode) {
        json choi = json::array();
        for (int i = 0; i < tensor.choi.rows(); ++i) {
            json row = json::array();
            for (int j = 0; j < tensor.choi.cols(); ++j)
                row.push_back({tensor.choi(i, j).real(), tensor.choi(i, j).imag()});
            choi.push_back(row);
        }
        out["choi"] = choi;
    }
    return out;
}

void write_report(const std::string& path, const std::string& command,
                  const ExperimentConfig& cfg, const nlohmann::json& results,
                  double duration_seconds) {
    json report{{"command", command},
                {"config", config_echo(cfg)},
                {"seed", cfg.seed},
                {"results", results},
                {"duration_seconds", duration_seconds},
                {"format_version", 1}};
    auto out = open_out(path);
    out << report.dump(2) << '\n';
}

}  // namespace qmem
