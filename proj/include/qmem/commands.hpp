#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace qmem {

// Shared command options; output_dir receives fixed-name CSV/report files.
struct CommonOptions {
    std::string config_path;
    std::string output_dir = ".";
    std::optional<std::uint64_t> seed_override;
};

struct SpectrumOptions {
    CommonOptions common;
    std::optional<double> band_start;  // Hz; defaults to comb span + 20 MHz
    std::optional<double> band_end;
    int points = 2001;
};

struct EchoOptions {
    CommonOptions common;
    std::vector<int> echo_indices = {1};
    std::optional<double> horizon;  // s after pulse center
    bool verbose_modes = false;
};

struct MatchOptions {
    CommonOptions common;
    std::vector<std::string> free_parameters = {"coupling"};
    std::string objective = "spectral_residual";
};

struct FitOptions {
    CommonOptions common;
    std::string data_path;
    std::vector<std::string> free_parameters = {"coupling"};
};

struct TomoOptions {
    CommonOptions common;
    std::string mode = "end-to-end";  // simulate | reconstruct | end-to-end
    std::string data_dir;             // input for reconstruct; default output_dir
};

struct NoiseOptions {
    CommonOptions common;
    double sweep_start = 0.01;  // K
    double sweep_end = 1.0;
    int sweep_points = 25;
};

int cmd_spectrum(const SpectrumOptions& opt);
int cmd_echo(const EchoOptions& opt);
int cmd_match(const MatchOptions& opt);
int cmd_fit(const FitOptions& opt);
int cmd_tomo(const TomoOptions& opt);
int cmd_noise(const NoiseOptions& opt);

// Exception-to-exit-code boundary shared by main() and the tests: runs f and
// maps ValidationError to 2 and NumericalError to 3, printing the message to
// stderr.
int run_command(const std::function<int()>& f);

}  // namespace qmem
