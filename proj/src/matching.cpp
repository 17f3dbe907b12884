#include "qmem/matching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qmem/constants.hpp"
#include "qmem/errors.hpp"

namespace qmem {

namespace {

std::vector<double> clip(std::vector<double> x,
                         const std::vector<std::pair<double, double>>& bounds) {
    for (std::size_t i = 0; i < x.size(); ++i)
        x[i] = std::clamp(x[i], bounds[i].first, bounds[i].second);
    return x;
}

}  // namespace

std::string to_string(FreeParam p) {
    switch (p) {
        case FreeParam::coupling: return "coupling";
        case FreeParam::external_coupling: return "external_coupling";
        case FreeParam::common_detuning: return "common_detuning";
        case FreeParam::spacing: return "spacing";
    }
    return "unknown";
}

void MatchingProblem::validate() const {
    comb.validate();
    common.validate();
    if (free_parameters.empty()) throw ValidationError("matching problem needs free parameters");
    if (bounds.size() != free_parameters.size())
        throw ValidationError("matching problem needs one bound pair per free parameter");
    for (const auto& [lo, hi] : bounds) {
        if (!std::isfinite(lo) || !std::isfinite(hi))
            throw ValidationError("matching bounds must be finite");
        if (!(lo < hi)) throw ValidationError("matching bounds must satisfy low < high");
    }
}

MemoryDevice MatchingProblem::realize(const std::vector<double>& values) const {
    CombSpec spec = comb;
    CommonResonatorParams com = common;
    double detuning = common_detuning;
    for (std::size_t i = 0; i < free_parameters.size(); ++i) {
        switch (free_parameters[i]) {
            case FreeParam::coupling: spec.coupling = values[i]; break;
            case FreeParam::external_coupling: com.external_coupling = values[i]; break;
            case FreeParam::common_detuning: detuning = values[i]; break;
            case FreeParam::spacing: spec.spacing = values[i]; break;
        }
    }
    com.frequency = spec.center_frequency + detuning;
    return build_comb(spec, com);
}

std::vector<double> MatchingProblem::start_values() const {
    std::vector<double> v;
    for (const auto p : free_parameters) {
        switch (p) {
            case FreeParam::coupling: v.push_back(comb.coupling); break;
            case FreeParam::external_coupling: v.push_back(common.external_coupling); break;
            case FreeParam::common_detuning: v.push_back(common_detuning); break;
            case FreeParam::spacing: v.push_back(comb.spacing); break;
        }
    }
    return v;
}

FrequencyBand MatchingProblem::resolved_band(const CombSpec& comb_now, double) const {
    if (band.start < band.end) return band;
    const double half = (comb_now.count - 1) / 2.0 * comb_now.spacing + 2.0 * comb_now.spacing;
    return {comb_now.center_frequency - half, comb_now.center_frequency + half};
}

double matching_residual(const MemoryDevice& device, const FrequencyBand& band) {
    if (!(band.start < band.end)) throw ValidationError("matching band must be non-degenerate");
    const double dmin = device.min_spacing();
    int points = 257;
    if (dmin > 0.0)
        points = std::max(points, static_cast<int>(std::ceil(64.0 * (band.end - band.start) / dmin)) + 1);
    const SpectrumScan scan = spectrum_scan(device, band, points);
    double acc = 0.0;
    for (const auto& v : scan.s11) acc += std::norm(v);
    return acc / static_cast<double>(scan.s11.size());
}

double analytic_matching_coupling(double spacing, double external_coupling) {
    if (!(spacing > 0.0) || !(external_coupling > 0.0))
        throw ValidationError("analytic matching needs positive spacing and coupling");
    return std::sqrt(external_coupling * spacing / kTwoPi);
}

SimplexResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                          std::vector<double> start,
                          const std::vector<std::pair<double, double>>& bounds,
                          int max_evals) {
    const std::size_t n = start.size();
    if (n == 0 || bounds.size() != n)
        throw ValidationError("simplex minimizer needs a non-empty bounded start point");

    int evals = 0;
    const auto eval = [&](const std::vector<double>& x) {
        ++evals;
        const double v = f(x);
        if (!std::isfinite(v)) throw NumericalError("objective evaluation failed");
        return v;
    };

    struct Vertex {
        std::vector<double> x;
        double v;
    };

    std::vector<double> best_x = clip(std::move(start), bounds);
    double best_v = eval(best_x);
    bool converged = false;

    double scale = 0.1;  // fraction of the bound range for initial simplex legs
    const int restarts = 3;
    for (int round = 0; round <= restarts && evals < max_evals; ++round) {
        std::vector<Vertex> s;
        s.push_back({best_x, best_v});
        for (std::size_t i = 0; i < n && evals < max_evals; ++i) {
            std::vector<double> x = best_x;
            const double span = bounds[i].second - bounds[i].first;
            x[i] += scale * span;
            if (x[i] > bounds[i].second) x[i] = best_x[i] - scale * span;
            x = clip(std::move(x), bounds);
            s.push_back({x, eval(x)});
        }
        if (s.size() != n + 1) break;

        const auto order = [&] {
            std::sort(s.begin(), s.end(), [](const Vertex& a, const Vertex& b) { return a.v < b.v; });
        };
        order();

        while (evals < max_evals) {
            if (s.back().v - s.front().v < 1e-6) {
                converged = true;
                break;
            }
            std::vector<double> centroid(n, 0.0);
            for (std::size_t k = 0; k < n; ++k)
                for (std::size_t i = 0; i < n; ++i) centroid[i] += s[k].x[i] / static_cast<double>(n);

            const auto blend = [&](double c) {
                std::vector<double> x(n);
                for (std::size_t i = 0; i < n; ++i)
                    x[i] = centroid[i] + c * (centroid[i] - s.back().x[i]);
                return clip(std::move(x), bounds);
            };

            const auto xr = blend(1.0);
            const double vr = eval(xr);
            if (vr < s.front().v) {
                if (evals < max_evals) {
                    const auto xe = blend(2.0);
                    const double ve = eval(xe);
                    s.back() = ve < vr ? Vertex{xe, ve} : Vertex{xr, vr};
                } else {
                    s.back() = {xr, vr};
                }
            } else if (vr < s[n - 1].v) {
                s.back() = {xr, vr};
            } else {
                const auto xc = blend(vr < s.back().v ? 0.5 : -0.5);
                const double vc = eval(xc);
                if (vc < std::min(vr, s.back().v)) {
                    s.back() = {xc, vc};
                } else {
                    // shrink toward the best vertex
                    for (std::size_t k = 1; k <= n && evals < max_evals; ++k) {
                        for (std::size_t i = 0; i < n; ++i)
                            s[k].x[i] = s[0].x[i] + 0.5 * (s[k].x[i] - s[0].x[i]);
                        s[k].v = eval(s[k].x);
                    }
                }
            }
            order();
        }
        if (s.front().v < best_v) {
            best_v = s.front().v;
            best_x = s.front().x;
        }
        scale *= 0.05;  // restart with a tighter simplex around the incumbent
        if (!converged) break;
    }

    return {best_x, best_v, evals, converged};
}

namespace {

FitResult run_problem(const MatchingProblem& problem,
                      const std::function<double(const MemoryDevice&)>& score) {
    problem.validate();
    const bool maximize = problem.objective == MatchObjective::first_echo_efficiency;
    const auto objective = [&](const std::vector<double>& x) {
        const MemoryDevice dev = problem.realize(x);
        const double v = score(dev);
        return maximize ? -v : v;
    };
    const SimplexResult r = nelder_mead(objective, problem.start_values(), problem.bounds);
    FitResult out;
    out.device = problem.realize(r.x);
    for (std::size_t i = 0; i < problem.free_parameters.size(); ++i)
        out.parameters[to_string(problem.free_parameters[i])] = r.x[i];
    out.objective_value = maximize ? -r.value : r.value;
    out.iterations = r.evaluations;
    out.converged = r.converged;
    return out;
}

}  // namespace

FitResult optimize(const MatchingProblem& problem) {
    problem.validate();
    if (problem.objective == MatchObjective::spectral_residual) {
        return run_problem(problem, [&](const MemoryDevice& dev) {
            return matching_residual(dev, problem.resolved_band(problem.comb, problem.common_detuning));
        });
    }
    return run_problem(problem, [&](const MemoryDevice& dev) {
        const Trajectory traj = simulate_pulse(dev, problem.pulse, 1.6e-6);
        return echo_report(traj, dev.mean_spacing(), 1).energy_efficiency;
    });
}

FitResult fit_trace(const std::vector<double>& measured_abs2, const MatchingProblem& problem,
                    const Pulse& pulse, const TimeGrid& grid) {
    problem.validate();
    if (measured_abs2.size() != grid.size())
        throw ValidationError("measured trace length does not match the simulation grid");
    double power = 0.0;
    for (const double v : measured_abs2) power += v * v;
    if (power <= 0.0) throw ValidationError("measured trace carries no power");

    MatchingProblem p = problem;
    p.objective = MatchObjective::spectral_residual;  // run_problem minimizes
    return run_problem(p, [&](const MemoryDevice& dev) {
        const Trajectory traj = propagate(dev, pulse, grid);
        double acc = 0.0;
        for (std::size_t i = 0; i < measured_abs2.size(); ++i) {
            const double d = std::norm(traj.output_field[i]) - measured_abs2[i];
            acc += d * d;
        }
        return acc / power;
    });
}

}  // namespace qmem
