#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "qmem/config.hpp"
#include "qmem/dynamics.hpp"
#include "qmem/matching.hpp"
#include "qmem/noise.hpp"
#include "qmem/spectral.hpp"
#include "qmem/tomography.hpp"

namespace qmem {

// Shortest round-trippable decimal representation; keeps outputs
// byte-reproducible across runs.
std::string format_double(double v);

void write_spectrum_csv(const SpectrumScan& scan, const std::string& path);
void write_trajectory_csv(const Trajectory& traj, const std::string& path, bool verbose);
void write_quadratures_csv(const QuadratureBatch& batch, const std::string& path);
QuadratureBatch read_quadratures_csv(const std::string& path);

struct TemperatureSweepRow {
    double temperature = 0.0;
    double nbar = 0.0;
    double suppression = 0.0;
    double snr = 0.0;
};
void write_temperature_sweep_csv(const std::vector<TemperatureSweepRow>& rows,
                                 const std::string& path);

// Intensity trace for fitting: time_s, abs2_out; optional one-line header.
std::vector<double> read_intensity_csv(const std::string& path);

nlohmann::json config_echo(const ExperimentConfig& cfg);
nlohmann::json fit_result_json(const FitResult& fit);
nlohmann::json echo_report_json(const EchoReport& rep);
nlohmann::json noise_budget_json(const NoiseBudget& budget);
nlohmann::json process_tensor_json(const ProcessTensor& tensor);

// Full provenance wrapper written next to every output file.
void write_report(const std::string& path, const std::string& command,
                  const ExperimentConfig& cfg, const nlohmann::json& results,
                  double duration_seconds);

}  // namespace qmem
