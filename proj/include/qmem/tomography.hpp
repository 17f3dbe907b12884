#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qmem/model.hpp"

namespace qmem {

// Fock-basis state of one mode, truncated at `dim`.
struct DensityMatrix {
    int dim = 0;
    Eigen::MatrixXcd elements;
    // Probability weight beyond the cutoff discarded at construction (only
    // meaningful for states built from analytic amplitudes).
    double truncation_leakage = 0.0;

    void validate() const;
    Eigen::VectorXd populations() const;
};

// Coherent state truncated and renormalized at `dim`; truncation_leakage
// records the discarded weight. Leakage above 5% is allowed but flagged via
// the cutoff_warning flag.
DensityMatrix coherent_state(Complex alpha, int dim);
bool cutoff_warning(const DensityMatrix& rho);

// Pure Fock state |n>.
DensityMatrix fock_state(int n, int dim);

// Generalized beam-splitter loss map (Kraus form). Fock input |m><m| maps to
// binomial populations C(m,n) eta^n (1-eta)^(m-n).
DensityMatrix loss_channel(const DensityMatrix& rho, double transmissivity);

// rho -> U rho U^dag with U = exp(i phi n).
DensityMatrix phase_rotation(const DensityMatrix& rho, double phi);

// Harmonic-oscillator eigenfunctions psi_0..psi_{nmax-1} at x, in the
// convention with vacuum variance <x^2> = 1/2.
void oscillator_wavefunctions(double x, int nmax, double* out);

// p(x | theta) = sum_{mn} rho_mn exp(i(n-m) theta) psi_m(x) psi_n(x).
class QuadraturePdf {
public:
    QuadraturePdf(const DensityMatrix& rho, double phase);
    double operator()(double x) const;

private:
    Eigen::MatrixXcd weighted_;
    int dim_;
};

struct QuadratureBatch {
    std::vector<double> phases;  // rad, per sample
    std::vector<double> values;
    std::string temporal_mode_id;
};

enum class PhaseStrategy { fixed, uniform_scan };

struct PhaseSpec {
    PhaseStrategy strategy = PhaseStrategy::uniform_scan;
    double fixed_phase = 0.0;
    int scan_count = 12;  // uniform phases over [0, pi)
};

struct TomographyProtocol {
    std::vector<double> amplitudes;
    int samples_per_amplitude = 200000;
    int dim = 4;
    PhaseSpec phases;

    void validate() const;
    // Reference protocol: |alpha| = 0..1.2 step 0.02, 2e5 samples, dim 4.
    static TomographyProtocol standard();
};

// Inverse-CDF sampler on a fine fixed grid; deterministic given the seed.
QuadratureBatch sample_quadratures(const DensityMatrix& rho, const PhaseSpec& phases, int count,
                                   std::uint64_t seed);

// Derived per-amplitude substream seed, stable across runs.
std::uint64_t substream_seed(std::uint64_t seed, std::size_t index);

// Maximum-likelihood state reconstruction over binned quadrature projectors
// (R rho R expectation-maximization). Stops when the per-sample likelihood
// gain drops below 1e-10 or after 5000 iterations.
DensityMatrix mle_state(const QuadratureBatch& batch, int dim);

struct ProcessTensor {
    int dim = 0;
    bool diagonal_mode = true;
    // Diagonal mode: column-stochastic transfer matrix, transfer(n, m) =
    // E^{mm}_{nn} = P(out = n | in = m).
    Eigen::MatrixXd transfer;
    Eigen::MatrixXd transfer_errors;  // bootstrap standard errors
    // Full mode: Choi matrix, choi(m*dim+j, n*dim+k) = E^{nm}_{jk}.
    Eigen::MatrixXcd choi;

    void validate() const;
    DensityMatrix apply(const DensityMatrix& rho) const;
    // E^{mm}_{nn} regardless of mode.
    double diagonal(int n, int m) const;
    // 1 - sum_n E^{mm}_{nn} for input column m.
    double trace_deficit(int m) const;
};

struct ProcessRun {
    double amplitude = 0.0;  // input |alpha|, phase 0
    QuadratureBatch batch;
};

struct MleOptions {
    int bootstrap_resamples = 50;
    std::uint64_t bootstrap_seed = 0x9d2c5680u;
    int max_iterations = 200000;
    double tolerance_per_sample = 1e-12;
};

// Joint maximum-likelihood process reconstruction from coherent-state probe
// runs. diagonal=true fits the phase-invariant (diagonal) parametrization via
// accelerated EM on phase-averaged histograms; diagonal=false runs the
// trace-preserving Choi-matrix EM on phase-resolved histograms (validation
// mode).
ProcessTensor mle_process(const std::vector<ProcessRun>& runs, int dim, bool diagonal,
                          const MleOptions& options = {});

struct PhaseShiftEstimate {
    double shift = 0.0;         // rad, circular mean over input phases
    double circular_std = 0.0;  // rad
    std::vector<double> per_phase;
};

// Mean-field argument difference between matched output/input batches, one
// pair per input phase (at least four).
PhaseShiftEstimate phase_shift_estimate(const std::vector<QuadratureBatch>& input_batches,
                                        const std::vector<QuadratureBatch>& output_batches);

}  // namespace qmem
