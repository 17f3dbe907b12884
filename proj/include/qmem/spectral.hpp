#pragma once

#include <vector>

#include "qmem/model.hpp"

namespace qmem {

struct FrequencyBand {
    double start = 0.0;  // Hz
    double end = 0.0;    // Hz
};

struct SpectrumScan {
    std::vector<double> frequencies;  // Hz
    std::vector<Complex> s11;
};

// Stationary reflection coefficient at an absolute probe frequency:
//   S11(w) = 1 - kappa~ / D(w),
//   D(w) = i(w0~ - w~) + (kappa~ + gamma0~)/2
//          + sum_n g_n~^2 / (i(wn~ - w~) + gamma_n~/2)
// with ~ marking angular quantities.
Complex reflection_coefficient(const MemoryDevice& device, double frequency);

SpectrumScan spectrum_scan(const MemoryDevice& device, const FrequencyBand& band, int points);

// Count of distinct absorption dips: connected runs of |S11| below threshold.
int count_absorption_dips(const SpectrumScan& scan, double threshold);

}  // namespace qmem
