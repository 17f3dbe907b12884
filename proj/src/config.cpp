#include "qmem/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include "qmem/errors.hpp"

namespace qmem {

MemoryDevice DeviceConfig::realize() const {
    if (comb_mode) {
        CommonResonatorParams common;
        common.external_coupling = external_coupling;
        common.internal_decay = common_internal_decay;
        common.frequency =
            common_frequency.value_or(comb.center_frequency + common_detuning);
        return build_comb(comb, common);
    }
    MemoryDevice dev;
    dev.internals = list;
    dev.common.external_coupling = external_coupling;
    dev.common.internal_decay = common_internal_decay;
    dev.common.frequency = common_frequency.value_or(dev.comb_center() + common_detuning);
    dev.validate();
    return dev;
}

TimeGrid ExperimentConfig::resolved_grid(const MemoryDevice& dev) const {
    if (grid) return *grid;
    TimeGrid g;
    g.start = 0.0;
    g.step = 1.0 / (50.0 * dev.common.external_coupling);
    const double dmin = dev.min_spacing();
    const double tail = dmin > 0.0 ? std::max(1.6e-6, 4.2 / dmin) : 1.6e-6;
    g.end = pulse.center_time + tail;
    return g;
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& value) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(value, &pos);
    } catch (const std::exception&) {
        throw ValidationError("config key '" + key + "' has a non-numeric value: " + value);
    }
    if (pos != value.size())
        throw ValidationError("config key '" + key + "' has trailing junk: " + value);
    return v;
}

long long to_int(const std::string& key, const std::string& value) {
    const double v = to_double(key, value);
    const long long i = static_cast<long long>(std::llround(v));
    if (std::abs(v - static_cast<double>(i)) > 1e-9)
        throw ValidationError("config key '" + key + "' must be an integer: " + value);
    return i;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig cfg;
    std::map<int, ResonatorParams> listed;
    double amplitude_max = 1.2;
    double amplitude_step = 0.02;
    bool amplitudes_touched = false;

    std::istringstream in(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find_first_of("#;");
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ValidationError("config line " + std::to_string(lineno) +
                                      ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section != "device" && section != "pulse" && section != "grid" &&
                section != "noise" && section != "tomography" && section != "run")
                throw ValidationError("config line " + std::to_string(lineno) +
                                      ": unknown section '" + section + "'");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ValidationError("config line " + std::to_string(lineno) +
                                  ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (section.empty())
            throw ValidationError("config line " + std::to_string(lineno) +
                                  ": key '" + key + "' outside any section");
        const std::string qkey = section + "." + key;

        if (section == "device") {
            if (key == "mode") {
                if (value == "comb")
                    cfg.device.comb_mode = true;
                else if (value == "list")
                    cfg.device.comb_mode = false;
                else
                    throw ValidationError("config key 'device.mode' must be comb or list");
            } else if (key == "center") {
                cfg.device.comb.center_frequency = to_double(qkey, value);
            } else if (key == "spacing") {
                cfg.device.comb.spacing = to_double(qkey, value);
            } else if (key == "count") {
                cfg.device.comb.count = static_cast<int>(to_int(qkey, value));
            } else if (key == "coupling") {
                cfg.device.comb.coupling = to_double(qkey, value);
            } else if (key == "internal_decay") {
                cfg.device.comb.internal_decay = to_double(qkey, value);
            } else if (key == "external_coupling") {
                cfg.device.external_coupling = to_double(qkey, value);
            } else if (key == "common_internal_decay") {
                cfg.device.common_internal_decay = to_double(qkey, value);
            } else if (key == "common_detuning") {
                cfg.device.common_detuning = to_double(qkey, value);
            } else if (key == "common_frequency") {
                cfg.device.common_frequency = to_double(qkey, value);
            } else if (key.rfind("resonator", 0) == 0) {
                const auto dot = key.find('.');
                if (dot == std::string::npos)
                    throw ValidationError("unknown config key '" + qkey + "'");
                const std::string idx_s = key.substr(9, dot - 9);
                const std::string field = key.substr(dot + 1);
                int idx = 0;
                try {
                    idx = std::stoi(idx_s);
                } catch (const std::exception&) {
                    throw ValidationError("unknown config key '" + qkey + "'");
                }
                auto& r = listed[idx];
                if (field == "frequency")
                    r.frequency = to_double(qkey, value);
                else if (field == "decay_rate")
                    r.decay_rate = to_double(qkey, value);
                else if (field == "coupling")
                    r.coupling = to_double(qkey, value);
                else
                    throw ValidationError("unknown config key '" + qkey + "'");
            } else {
                throw ValidationError("unknown config key '" + qkey + "'");
            }
        } else if (section == "pulse") {
            if (key == "carrier_detuning")
                cfg.pulse.carrier_detuning = to_double(qkey, value);
            else if (key == "fwhm")
                cfg.pulse.fwhm = to_double(qkey, value);
            else if (key == "mean_photon_number")
                cfg.pulse.mean_photon_number = to_double(qkey, value);
            else if (key == "phase")
                cfg.pulse.phase = to_double(qkey, value);
            else if (key == "center_time")
                cfg.pulse.center_time = to_double(qkey, value);
            else
                throw ValidationError("unknown config key '" + qkey + "'");
        } else if (section == "grid") {
            if (!cfg.grid) cfg.grid = TimeGrid{};
            if (key == "start")
                cfg.grid->start = to_double(qkey, value);
            else if (key == "end")
                cfg.grid->end = to_double(qkey, value);
            else if (key == "step")
                cfg.grid->step = to_double(qkey, value);
            else
                throw ValidationError("unknown config key '" + qkey + "'");
        } else if (section == "noise") {
            if (key == "high_power_decay")
                cfg.noise.tls.high_power_decay = to_double(qkey, value);
            else if (key == "tls_decay")
                cfg.noise.tls.tls_decay = to_double(qkey, value);
            else if (key == "single_photon_decay")
                cfg.noise.tls = TlsModel::calibrated(cfg.noise.tls.high_power_decay,
                                                     to_double(qkey, value),
                                                     cfg.noise.tls.critical_photon_number,
                                                     cfg.noise.tls.exponent);
            else if (key == "critical_photon_number")
                cfg.noise.tls.critical_photon_number = to_double(qkey, value);
            else if (key == "exponent")
                cfg.noise.tls.exponent = to_double(qkey, value);
            else if (key == "temperature")
                cfg.noise.temperature = to_double(qkey, value);
            else
                throw ValidationError("unknown config key '" + qkey + "'");
        } else if (section == "tomography") {
            if (key == "amplitude_max") {
                amplitude_max = to_double(qkey, value);
                amplitudes_touched = true;
            } else if (key == "amplitude_step") {
                amplitude_step = to_double(qkey, value);
                amplitudes_touched = true;
            } else if (key == "samples_per_amplitude") {
                cfg.tomography.protocol.samples_per_amplitude =
                    static_cast<int>(to_int(qkey, value));
            } else if (key == "dim") {
                cfg.tomography.protocol.dim = static_cast<int>(to_int(qkey, value));
            } else if (key == "phase_strategy") {
                if (value == "fixed")
                    cfg.tomography.protocol.phases.strategy = PhaseStrategy::fixed;
                else if (value == "uniform_scan")
                    cfg.tomography.protocol.phases.strategy = PhaseStrategy::uniform_scan;
                else
                    throw ValidationError(
                        "config key 'tomography.phase_strategy' must be fixed or uniform_scan");
            } else if (key == "fixed_phase") {
                cfg.tomography.protocol.phases.fixed_phase = to_double(qkey, value);
            } else if (key == "phase_count") {
                cfg.tomography.protocol.phases.scan_count = static_cast<int>(to_int(qkey, value));
            } else if (key == "transmissivity") {
                cfg.tomography.transmissivity = to_double(qkey, value);
            } else if (key == "rotation") {
                cfg.tomography.rotation = to_double(qkey, value);
            } else if (key == "diagonal") {
                cfg.tomography.diagonal = to_int(qkey, value) != 0;
            } else if (key == "bootstrap_resamples") {
                cfg.tomography.bootstrap_resamples = static_cast<int>(to_int(qkey, value));
            } else {
                throw ValidationError("unknown config key '" + qkey + "'");
            }
        } else if (section == "run") {
            if (key == "seed")
                cfg.seed = static_cast<std::uint64_t>(to_int(qkey, value));
            else if (key == "workers")
                static_cast<void>(to_int(qkey, value));
            else
                throw ValidationError("unknown config key '" + qkey + "'");
        }
    }

    if (!listed.empty()) {
        cfg.device.list.clear();
        for (const auto& [idx, r] : listed) cfg.device.list.push_back(r);
    }
    if (amplitudes_touched) {
        if (!(amplitude_step > 0.0) || amplitude_max < 0.0)
            throw ValidationError("config key 'tomography.amplitude_step' must be > 0");
        cfg.tomography.protocol.amplitudes.clear();
        for (int i = 0;; ++i) {
            const double a = amplitude_step * i;
            if (a > amplitude_max + 1e-12) break;
            cfg.tomography.protocol.amplitudes.push_back(a);
        }
    }
    return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

}  // namespace qmem
