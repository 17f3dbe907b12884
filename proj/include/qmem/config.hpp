#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "qmem/model.hpp"
#include "qmem/noise.hpp"
#include "qmem/tomography.hpp"

namespace qmem {

// Device section: either a uniform comb or an explicit resonator list; the
// common resonator sits at comb center + common_detuning unless an absolute
// common_frequency is given.
struct DeviceConfig {
    bool comb_mode = true;
    CombSpec comb;
    std::vector<ResonatorParams> list;
    double external_coupling = 0.0;
    double common_internal_decay = 0.0;
    double common_detuning = 0.0;
    std::optional<double> common_frequency;

    MemoryDevice realize() const;
};

struct NoiseConfig {
    TlsModel tls{6e3, 0.0, 1.0, 0.5};
    double temperature = 0.1;  // K
};

struct TomoConfig {
    TomographyProtocol protocol = TomographyProtocol::standard();
    // Synthetic channel used by the simulate/end-to-end modes.
    double transmissivity = 0.6;
    double rotation = 0.0;  // rad
    bool diagonal = true;
    int bootstrap_resamples = 50;
};

struct ExperimentConfig {
    DeviceConfig device;
    Pulse pulse{0.0, 115e-9, 1.0, 0.0, 460e-9};
    std::optional<TimeGrid> grid;  // defaults derived from device and pulse
    NoiseConfig noise;
    TomoConfig tomography;
    std::uint64_t seed = 1;

    TimeGrid resolved_grid(const MemoryDevice& device) const;
};

// INI-style parser: [section] headers, key = value lines, '#'/';' comments.
// Unknown sections or keys are rejected with the offending name.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

}  // namespace qmem
