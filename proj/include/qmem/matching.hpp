#pragma once

#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "qmem/dynamics.hpp"
#include "qmem/model.hpp"
#include "qmem/spectral.hpp"

namespace qmem {

enum class FreeParam { coupling, external_coupling, common_detuning, spacing };

enum class MatchObjective { spectral_residual, first_echo_efficiency };

std::string to_string(FreeParam p);

// Comb-device optimization problem. The device is rebuilt from the comb spec
// for every candidate parameter vector; common_detuning offsets the common
// resonator from the comb center.
struct MatchingProblem {
    CombSpec comb;
    CommonResonatorParams common;
    double common_detuning = 0.0;  // Hz
    std::vector<FreeParam> free_parameters;
    std::vector<std::pair<double, double>> bounds;  // per free parameter
    MatchObjective objective = MatchObjective::spectral_residual;
    // Residual band; when start == end it defaults to the comb span extended
    // by two spacings each side.
    FrequencyBand band{0.0, 0.0};
    // Probe pulse for the efficiency objective.
    Pulse pulse{0.0, 115e-9, 1.0, 0.0, 460e-9};

    void validate() const;
    MemoryDevice realize(const std::vector<double>& values) const;
    std::vector<double> start_values() const;
    FrequencyBand resolved_band(const CombSpec& comb_now, double detuning_now) const;
};

struct FitResult {
    MemoryDevice device;
    std::map<std::string, double> parameters;
    double objective_value = 0.0;
    int iterations = 0;  // objective evaluations spent
    bool converged = false;
};

// Mean of |S11|^2 over a uniform grid on the band, at >= 64 points per
// internal spacing.
double matching_residual(const MemoryDevice& device, const FrequencyBand& band);

// Coupling at which the comb's effective absorption rate 2 pi g^2 / spacing
// equals the external coupling: g* = sqrt(kappa * spacing / (2 pi)).
double analytic_matching_coupling(double spacing, double external_coupling);

FitResult optimize(const MatchingProblem& problem);

// Least-squares fit of |a_out(t)|^2 against a measured intensity series
// sampled on `grid`. The objective is normalized by the measured power so the
// convergence thresholds match the dimensionless optimizer contract.
FitResult fit_trace(const std::vector<double>& measured_abs2, const MatchingProblem& problem,
                    const Pulse& pulse, const TimeGrid& grid);

// Derivative-free bounded simplex minimizer (restarted Nelder-Mead).
// Converged when the objective spread over a refreshed simplex drops below
// 1e-6, or after max_evals objective evaluations.
struct SimplexResult {
    std::vector<double> x;
    double value = 0.0;
    int evaluations = 0;
    bool converged = false;
};
SimplexResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                          std::vector<double> start,
                          const std::vector<std::pair<double, double>>& bounds,
                          int max_evals = 500);

}  // namespace qmem
