#include "qmem/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>

#include "qmem/constants.hpp"
#include "qmem/errors.hpp"

namespace qmem {

namespace {

// Quadrature-axis binning for the MLE POVM: width 0.1 on [-8, 8] plus two
// overflow bins.
constexpr double kBinXmax = 8.0;
constexpr double kBinWidth = 0.1;
constexpr int kInteriorBins = 160;
constexpr int kTotalBins = kInteriorBins + 2;

std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
    std::vector<double> x(n), w(n);
    for (int i = 0; i < n; ++i) {
        double t = std::cos(kPi * (i + 0.75) / (n + 0.5));
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = t;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            const double dp = n * (t * p1 - p0) / (t * t - 1.0);
            const double t1 = t - p1 / dp;
            if (std::abs(t1 - t) < 1e-15) {
                t = t1;
                break;
            }
            t = t1;
        }
        x[i] = -t;
        double p0 = 1.0, p1 = t;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        const double dp = n * (t * p1 - p0) / (t * t - 1.0);
        w[i] = 2.0 / ((1.0 - t * t) * dp * dp);
    }
    return {x, w};
}

// Bin-integrated products of oscillator eigenfunctions:
//   full[b](m, n) = integral over bin b of psi_m psi_n dx
// with the residual completeness deficit split evenly between the two
// overflow bins.
struct BinTables {
    Eigen::MatrixXd diag;                 // dim x kTotalBins
    std::vector<Eigen::MatrixXd> full;    // kTotalBins matrices, dim x dim
};

const BinTables& bin_tables(int dim) {
    static std::map<int, BinTables> cache;
    auto it = cache.find(dim);
    if (it != cache.end()) return it->second;

    BinTables t;
    t.diag = Eigen::MatrixXd::Zero(dim, kTotalBins);
    t.full.assign(kTotalBins, Eigen::MatrixXd::Zero(dim, dim));
    const auto [gx, gw] = gauss_legendre(24);
    std::vector<double> psi(static_cast<std::size_t>(dim));
    for (int b = 0; b < kInteriorBins; ++b) {
        const double a = -kBinXmax + b * kBinWidth;
        const double c = a + kBinWidth;
        for (std::size_t q = 0; q < gx.size(); ++q) {
            const double x = 0.5 * (a + c) + 0.5 * (c - a) * gx[q];
            oscillator_wavefunctions(x, dim, psi.data());
            const double wq = 0.5 * (c - a) * gw[q];
            for (int m = 0; m < dim; ++m)
                for (int n = 0; n < dim; ++n) t.full[b](m, n) += wq * psi[m] * psi[n];
        }
    }
    Eigen::MatrixXd resid = Eigen::MatrixXd::Identity(dim, dim);
    for (int b = 0; b < kInteriorBins; ++b) resid -= t.full[b];
    t.full[kInteriorBins] = 0.5 * resid;
    t.full[kInteriorBins + 1] = 0.5 * resid;
    for (int b = 0; b < kTotalBins; ++b)
        for (int m = 0; m < dim; ++m) t.diag(m, b) = t.full[b](m, m);
    return cache.emplace(dim, std::move(t)).first->second;
}

int bin_of(double x) {
    if (x < -kBinXmax) return kInteriorBins;
    if (x >= kBinXmax) return kInteriorBins + 1;
    return std::min(kInteriorBins - 1,
                    static_cast<int>((x + kBinXmax) / kBinWidth));
}

double uniform01(std::mt19937_64& eng) {
    return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

}  // namespace

void DensityMatrix::validate() const {
    if (dim < 1 || elements.rows() != dim || elements.cols() != dim)
        throw ValidationError("density matrix has inconsistent dimension");
    const double herm = (elements - elements.adjoint()).cwiseAbs().maxCoeff();
    if (herm > 1e-10) throw ValidationError("density matrix is not Hermitian");
    const double tr = elements.trace().real();
    if (std::abs(tr - 1.0) > 1e-8) throw ValidationError("density matrix trace differs from 1");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(elements, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-10)
        throw ValidationError("density matrix has a negative eigenvalue");
}

Eigen::VectorXd DensityMatrix::populations() const {
    return elements.diagonal().real();
}

DensityMatrix coherent_state(Complex alpha, int dim) {
    if (dim < 1) throw ValidationError("Fock dimension must be >= 1");
    Eigen::VectorXcd c(dim);
    const double a2 = std::norm(alpha);
    double kept = 0.0;
    for (int n = 0; n < dim; ++n) {
        const double logmag = -0.5 * a2 + 0.5 * (n * std::log(std::max(a2, 1e-300)) -
                                                  std::lgamma(n + 1.0));
        const double mag = a2 > 0.0 ? std::exp(logmag) : (n == 0 ? 1.0 : 0.0);
        const double arg = n * std::arg(alpha);
        c(n) = Complex(mag * std::cos(arg), mag * std::sin(arg));
        kept += mag * mag;
    }
    DensityMatrix rho;
    rho.dim = dim;
    rho.truncation_leakage = std::max(0.0, 1.0 - kept);
    c /= std::sqrt(kept);
    rho.elements = c * c.adjoint();
    return rho;
}

bool cutoff_warning(const DensityMatrix& rho) { return rho.truncation_leakage > 0.05; }

DensityMatrix fock_state(int n, int dim) {
    if (n < 0 || n >= dim) throw ValidationError("Fock index outside the truncated space");
    DensityMatrix rho;
    rho.dim = dim;
    rho.elements = Eigen::MatrixXcd::Zero(dim, dim);
    rho.elements(n, n) = 1.0;
    return rho;
}

DensityMatrix loss_channel(const DensityMatrix& rho, double transmissivity) {
    rho.validate();
    if (transmissivity < 0.0 || transmissivity > 1.0)
        throw ValidationError("transmissivity must lie in [0, 1]");
    const int dim = rho.dim;
    const double eta = transmissivity;
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim, dim);
    Eigen::MatrixXd ak = Eigen::MatrixXd::Zero(dim, dim);
    for (int k = 0; k < dim; ++k) {
        ak.setZero();
        for (int n = k; n < dim; ++n) {
            // sqrt(C(n,k) eta^(n-k) (1-eta)^k), via logs for stability
            double lg = 0.5 * (std::lgamma(n + 1.0) - std::lgamma(k + 1.0) -
                               std::lgamma(n - k + 1.0));
            if (eta > 0.0)
                lg += 0.5 * (n - k) * std::log(eta);
            else if (n != k)
                continue;
            if (eta < 1.0)
                lg += 0.5 * k * std::log(1.0 - eta);
            else if (k != 0)
                continue;
            ak(n - k, n) = std::exp(lg);
        }
        out += ak * rho.elements * ak.transpose();
    }
    DensityMatrix res;
    res.dim = dim;
    res.elements = 0.5 * (out + out.adjoint());
    res.truncation_leakage = rho.truncation_leakage;
    return res;
}

DensityMatrix phase_rotation(const DensityMatrix& rho, double phi) {
    rho.validate();
    DensityMatrix out = rho;
    for (int m = 0; m < rho.dim; ++m)
        for (int n = 0; n < rho.dim; ++n) {
            const double a = phi * (m - n);
            out.elements(m, n) *= Complex(std::cos(a), std::sin(a));
        }
    return out;
}

void oscillator_wavefunctions(double x, int nmax, double* out) {
    out[0] = std::pow(kPi, -0.25) * std::exp(-0.5 * x * x);
    if (nmax > 1) out[1] = std::sqrt(2.0) * x * out[0];
    for (int n = 1; n + 1 < nmax; ++n)
        out[n + 1] = std::sqrt(2.0 / (n + 1.0)) * x * out[n] -
                     std::sqrt(n / (n + 1.0)) * out[n - 1];
}

QuadraturePdf::QuadraturePdf(const DensityMatrix& rho, double phase) : dim_(rho.dim) {
    rho.validate();
    weighted_ = rho.elements;
    for (int m = 0; m < dim_; ++m)
        for (int n = 0; n < dim_; ++n) {
            const double a = phase * (n - m);
            weighted_(m, n) *= Complex(std::cos(a), std::sin(a));
        }
}

double QuadraturePdf::operator()(double x) const {
    std::vector<double> psi(static_cast<std::size_t>(dim_));
    oscillator_wavefunctions(x, dim_, psi.data());
    Complex acc{};
    for (int m = 0; m < dim_; ++m)
        for (int n = 0; n < dim_; ++n) acc += weighted_(m, n) * psi[m] * psi[n];
    return std::max(0.0, acc.real());
}

void TomographyProtocol::validate() const {
    if (amplitudes.empty()) throw ValidationError("tomography protocol needs amplitudes");
    for (std::size_t i = 0; i < amplitudes.size(); ++i) {
        if (amplitudes[i] < 0.0) throw ValidationError("amplitudes must be non-negative");
        if (i > 0 && amplitudes[i] < amplitudes[i - 1])
            throw ValidationError("amplitudes must be sorted ascending");
    }
    if (samples_per_amplitude < 1000)
        throw ValidationError("tomography needs at least 1000 samples per amplitude");
    if (dim < 2) throw ValidationError("tomography dimension must be >= 2");
}

TomographyProtocol TomographyProtocol::standard() {
    TomographyProtocol p;
    for (int i = 0; i <= 60; ++i) p.amplitudes.push_back(0.02 * i);
    p.samples_per_amplitude = 200000;
    p.dim = 4;
    return p;
}

std::uint64_t substream_seed(std::uint64_t seed, std::size_t index) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (static_cast<std::uint64_t>(index) + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

QuadratureBatch sample_quadratures(const DensityMatrix& rho, const PhaseSpec& phases, int count,
                                   std::uint64_t seed) {
    rho.validate();
    if (count < 1) throw ValidationError("sample count must be >= 1");
    if (phases.strategy == PhaseStrategy::uniform_scan && phases.scan_count < 1)
        throw ValidationError("phase scan needs at least one phase");

    std::vector<double> thetas;
    if (phases.strategy == PhaseStrategy::fixed) {
        thetas.push_back(phases.fixed_phase);
    } else {
        for (int k = 0; k < phases.scan_count; ++k)
            thetas.push_back(kPi * k / phases.scan_count);
    }

    // Fixed fine grid; trapezoid CDF keeps the inversion error well below the
    // 1e-6 contract for smooth truncated-Fock densities.
    const double step = 0.004;
    const double xmax = std::ceil((std::sqrt(2.0 * rho.dim) + 6.0) / step) * step;
    const int npts = static_cast<int>(std::lround(2.0 * xmax / step)) + 1;

    std::vector<std::vector<double>> cdfs;
    cdfs.reserve(thetas.size());
    for (const double th : thetas) {
        const QuadraturePdf pdf(rho, th);
        std::vector<double> cdf(static_cast<std::size_t>(npts));
        double prev = pdf(-xmax);
        cdf[0] = 0.0;
        for (int i = 1; i < npts; ++i) {
            const double cur = pdf(-xmax + step * i);
            cdf[static_cast<std::size_t>(i)] =
                cdf[static_cast<std::size_t>(i - 1)] + 0.5 * (prev + cur) * step;
            prev = cur;
        }
        const double total = cdf.back();
        if (!(total > 0.0)) throw NumericalError("quadrature density integrated to zero");
        for (auto& v : cdf) v /= total;
        cdfs.push_back(std::move(cdf));
    }

    std::mt19937_64 eng(seed);
    QuadratureBatch batch;
    batch.phases.resize(static_cast<std::size_t>(count));
    batch.values.resize(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        const std::size_t ti = static_cast<std::size_t>(i) % thetas.size();
        const double u = uniform01(eng);
        const auto& cdf = cdfs[ti];
        const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
        double x;
        if (it == cdf.begin()) {
            x = -xmax;
        } else if (it == cdf.end()) {
            x = xmax;
        } else {
            const std::size_t j = static_cast<std::size_t>(it - cdf.begin());
            const double c0 = cdf[j - 1];
            const double c1 = cdf[j];
            const double frac = c1 > c0 ? (u - c0) / (c1 - c0) : 0.0;
            x = -xmax + step * (static_cast<double>(j - 1) + frac);
        }
        batch.phases[static_cast<std::size_t>(i)] = thetas[ti];
        batch.values[static_cast<std::size_t>(i)] = x;
    }
    return batch;
}

namespace {

// Per-phase binned histograms of a batch.
std::map<double, Eigen::VectorXd> binned_histograms(const QuadratureBatch& batch) {
    std::map<double, Eigen::VectorXd> hists;
    for (std::size_t i = 0; i < batch.values.size(); ++i) {
        auto [it, inserted] =
            hists.try_emplace(batch.phases[i], Eigen::VectorXd::Zero(kTotalBins));
        it->second(bin_of(batch.values[i])) += 1.0;
    }
    return hists;
}

Eigen::MatrixXcd phase_factors(int dim, double theta) {
    Eigen::MatrixXcd f(dim, dim);
    for (int m = 0; m < dim; ++m)
        for (int n = 0; n < dim; ++n) {
            const double a = theta * (m - n);
            f(m, n) = Complex(std::cos(a), std::sin(a));
        }
    return f;
}

}  // namespace

DensityMatrix mle_state(const QuadratureBatch& batch, int dim) {
    if (dim < 1) throw ValidationError("Fock dimension must be >= 1");
    if (batch.values.empty()) throw ValidationError("empty quadrature batch");
    const auto hists = binned_histograms(batch);
    if (hists.size() < 3)
        throw ValidationError("state reconstruction needs >= 3 distinct phases");

    const auto& tables = bin_tables(dim);
    // POVM elements Pi(theta, b)(m, n) = e^{i(m-n)theta} * overlap_b(m, n);
    // tr(Pi rho) is the binned quadrature probability.
    struct Povm {
        Eigen::MatrixXcd pi;
        double counts;
    };
    std::vector<Povm> povm;
    double total = 0.0;
    for (const auto& [theta, h] : hists) {
        const Eigen::MatrixXcd f = phase_factors(dim, theta);
        for (int b = 0; b < kTotalBins; ++b) {
            if (h(b) == 0.0) continue;
            povm.push_back({f.cwiseProduct(tables.full[b].cast<Complex>()), h(b)});
            total += h(b);
        }
    }

    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Identity(dim, dim) / static_cast<double>(dim);
    double prev_ll = -std::numeric_limits<double>::infinity();
    for (int it = 0; it < 5000; ++it) {
        Eigen::MatrixXcd r = Eigen::MatrixXcd::Zero(dim, dim);
        double ll = 0.0;
        for (const auto& e : povm) {
            const double p = std::max(1e-300, (e.pi * rho).trace().real());
            ll += e.counts * std::log(p);
            r += (e.counts / p) * e.pi;
        }
        if (ll - prev_ll < 1e-10 * total && it > 2) break;
        prev_ll = ll;
        Eigen::MatrixXcd next = r * rho * r;
        next = 0.5 * (next + next.adjoint());
        rho = next / next.trace().real();
    }

    // Numerical cleanup to satisfy the density-matrix contract exactly.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho);
    Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
    ev /= ev.sum();
    DensityMatrix out;
    out.dim = dim;
    out.elements = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
    out.elements = 0.5 * (out.elements + out.elements.adjoint());
    out.validate();
    return out;
}

void ProcessTensor::validate() const {
    if (dim < 1) throw ValidationError("process tensor dimension must be >= 1");
    if (diagonal_mode) {
        if (transfer.rows() != dim || transfer.cols() != dim)
            throw ValidationError("diagonal process tensor has wrong shape");
        if (transfer.minCoeff() < -1e-12)
            throw ValidationError("diagonal process tensor has negative entries");
    } else {
        if (choi.rows() != dim * dim || choi.cols() != dim * dim)
            throw ValidationError("process Choi matrix has wrong shape");
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(choi, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -1e-8)
            throw ValidationError("process tensor is not completely positive");
    }
    for (int m = 0; m + 1 < dim; ++m)
        if (std::abs(trace_deficit(m)) > 0.02)
            throw ValidationError("process tensor is not trace preserving");
}

double ProcessTensor::diagonal(int n, int m) const {
    if (diagonal_mode) return transfer(n, m);
    return choi(m * dim + n, m * dim + n).real();
}

double ProcessTensor::trace_deficit(int m) const {
    double s = 0.0;
    for (int n = 0; n < dim; ++n) s += diagonal(n, m);
    return 1.0 - s;
}

DensityMatrix ProcessTensor::apply(const DensityMatrix& rho) const {
    rho.validate();
    if (rho.dim != dim) throw ValidationError("process tensor and state dimensions differ");
    DensityMatrix out;
    out.dim = dim;
    out.elements = Eigen::MatrixXcd::Zero(dim, dim);
    if (diagonal_mode) {
        const Eigen::VectorXd p = transfer * rho.populations();
        for (int n = 0; n < dim; ++n) out.elements(n, n) = p(n);
    } else {
        for (int j = 0; j < dim; ++j)
            for (int k = 0; k < dim; ++k) {
                Complex acc{};
                for (int m = 0; m < dim; ++m)
                    for (int n = 0; n < dim; ++n)
                        acc += rho.elements(n, m) * choi(m * dim + j, n * dim + k);
                out.elements(j, k) = acc;
            }
    }
    // Truncated channels may leak a little trace; renormalize for state use.
    const double tr = out.elements.trace().real();
    if (tr > 0.0) out.elements /= tr;
    out.elements = 0.5 * (out.elements + out.elements.adjoint());
    return out;
}

namespace {

struct DiagonalData {
    std::vector<Eigen::VectorXd> input_pops;   // per run, dim
    std::vector<Eigen::VectorXd> histograms;   // per run, kTotalBins (phase-averaged)
    double total_counts = 0.0;
};

double diag_ll(const Eigen::MatrixXd& p, const DiagonalData& d, const Eigen::MatrixXd& hdiag) {
    double ll = 0.0;
    for (std::size_t a = 0; a < d.input_pops.size(); ++a) {
        const Eigen::VectorXd q = p * d.input_pops[a];
        const Eigen::VectorXd pb = hdiag.transpose() * q;
        for (int b = 0; b < pb.size(); ++b)
            if (d.histograms[a](b) > 0.0)
                ll += d.histograms[a](b) * std::log(std::max(pb(b), 1e-300));
    }
    return ll;
}

Eigen::MatrixXd diag_em_step(const Eigen::MatrixXd& p, const DiagonalData& d,
                             const Eigen::MatrixXd& hdiag) {
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(p.rows(), p.cols());
    for (std::size_t a = 0; a < d.input_pops.size(); ++a) {
        const Eigen::VectorXd q = p * d.input_pops[a];
        Eigen::VectorXd pb = hdiag.transpose() * q;
        Eigen::VectorXd w(pb.size());
        for (int b = 0; b < pb.size(); ++b)
            w(b) = d.histograms[a](b) / std::max(pb(b), 1e-300);
        g += (hdiag * w) * d.input_pops[a].transpose();
    }
    Eigen::MatrixXd next = p.cwiseProduct(g);
    for (int m = 0; m < next.cols(); ++m) {
        const double s = next.col(m).sum();
        if (s > 0.0) next.col(m) /= s;
    }
    return next;
}

Eigen::MatrixXd column_normalized(Eigen::MatrixXd p) {
    p = p.cwiseMax(0.0);
    for (int m = 0; m < p.cols(); ++m) {
        const double s = p.col(m).sum();
        if (s > 0.0)
            p.col(m) /= s;
        else
            p.col(m).setConstant(1.0 / p.rows());
    }
    return p;
}

// Squared-extrapolation accelerated EM on the column-stochastic transfer
// matrix; returns the maximizer and EM-step count.
std::pair<Eigen::MatrixXd, int> diag_mle(const DiagonalData& d, const Eigen::MatrixXd& hdiag,
                                         Eigen::MatrixXd p, double tol_per_sample,
                                         int max_iterations) {
    double prev_ll = -std::numeric_limits<double>::infinity();
    int steps = 0;
    const double tol = tol_per_sample * d.total_counts;
    while (steps < max_iterations) {
        const Eigen::MatrixXd p1 = diag_em_step(p, d, hdiag);
        const Eigen::MatrixXd p2 = diag_em_step(p1, d, hdiag);
        steps += 2;
        const Eigen::MatrixXd r = p1 - p;
        const Eigen::MatrixXd v = p2 - 2.0 * p1 + p;
        const double vn = v.norm();
        Eigen::MatrixXd cand = p2;
        if (vn > 0.0) {
            const double alpha = std::min(-1.0, -r.norm() / vn);
            cand = column_normalized(p - 2.0 * alpha * r + alpha * alpha * v);
            if (diag_ll(cand, d, hdiag) < diag_ll(p2, d, hdiag)) cand = p2;
        }
        p = cand;
        const double ll = diag_ll(p, d, hdiag);
        if (ll - prev_ll < tol && steps > 4) break;
        prev_ll = ll;
    }
    return {p, steps};
}

Eigen::MatrixXcd tp_normalize(const Eigen::MatrixXcd& x, int dim) {
    Eigen::MatrixXcd sym = 0.5 * (x + x.adjoint());
    Eigen::MatrixXcd lam = Eigen::MatrixXcd::Zero(dim, dim);
    for (int m = 0; m < dim; ++m)
        for (int n = 0; n < dim; ++n)
            for (int j = 0; j < dim; ++j) lam(m, n) += sym(m * dim + j, n * dim + j);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(lam);
    const Eigen::VectorXd ev = es.eigenvalues().cwiseMax(1e-300);
    const Eigen::MatrixXcd gi = es.eigenvectors() *
                                ev.cwiseInverse().cwiseSqrt().asDiagonal() *
                                es.eigenvectors().adjoint();
    Eigen::MatrixXcd big = Eigen::MatrixXcd::Zero(dim * dim, dim * dim);
    for (int m = 0; m < dim; ++m)
        for (int n = 0; n < dim; ++n)
            for (int j = 0; j < dim; ++j) big(m * dim + j, n * dim + j) = gi(m, n);
    return big * sym * big.adjoint();
}

}  // namespace

ProcessTensor mle_process(const std::vector<ProcessRun>& runs, int dim, bool diagonal,
                          const MleOptions& options) {
    if (runs.empty()) throw ValidationError("process reconstruction needs probe runs");
    if (dim < 2) throw ValidationError("process dimension must be >= 2");
    const auto& tables = bin_tables(dim);

    double total = 0.0;
    for (const auto& r : runs) total += static_cast<double>(r.batch.values.size());
    if (total == 0.0) throw ValidationError("process reconstruction got empty batches");

    ProcessTensor out;
    out.dim = dim;
    out.diagonal_mode = diagonal;

    if (diagonal) {
        DiagonalData data;
        data.total_counts = total;
        for (const auto& r : runs) {
            data.input_pops.push_back(coherent_state(r.amplitude, dim).populations());
            Eigen::VectorXd h = Eigen::VectorXd::Zero(kTotalBins);
            for (const double x : r.batch.values) h(bin_of(x)) += 1.0;
            data.histograms.push_back(std::move(h));
        }
        Eigen::MatrixXd start = Eigen::MatrixXd::Constant(dim, dim, 1.0 / dim);
        auto [p, steps] = diag_mle(data, tables.diag, start, options.tolerance_per_sample,
                                   options.max_iterations);
        out.transfer = p;

        out.transfer_errors = Eigen::MatrixXd::Zero(dim, dim);
        if (options.bootstrap_resamples > 0) {
            std::mt19937_64 eng(options.bootstrap_seed);
            Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(dim, dim);
            Eigen::MatrixXd m2 = Eigen::MatrixXd::Zero(dim, dim);
            for (int rs = 0; rs < options.bootstrap_resamples; ++rs) {
                DiagonalData boot = data;
                for (auto& h : boot.histograms) {
                    const double n = h.sum();
                    Eigen::VectorXd res = Eigen::VectorXd::Zero(h.size());
                    double remaining_p = 1.0;
                    long long remaining_n = static_cast<long long>(std::llround(n));
                    for (int b = 0; b < h.size() && remaining_n > 0; ++b) {
                        const double pb = h(b) / n;
                        if (pb <= 0.0) continue;
                        const double cond = std::clamp(pb / remaining_p, 0.0, 1.0);
                        std::binomial_distribution<long long> bin(remaining_n, cond);
                        const long long k = bin(eng);
                        res(b) = static_cast<double>(k);
                        remaining_n -= k;
                        remaining_p -= pb;
                    }
                    h = res;
                }
                const auto [pb, st] =
                    diag_mle(boot, tables.diag, p, 100.0 * options.tolerance_per_sample,
                             options.max_iterations / 10);
                mean += pb;
                m2 += pb.cwiseProduct(pb);
            }
            const double nb = options.bootstrap_resamples;
            mean /= nb;
            out.transfer_errors =
                ((m2 / nb - mean.cwiseProduct(mean)).cwiseMax(0.0) * (nb / std::max(1.0, nb - 1.0)))
                    .cwiseSqrt();
        }
        out.validate();
        return out;
    }

    // Full Choi-matrix EM (validation mode): phase-resolved binned likelihood
    // with trace-preserving renormalization each step.
    struct RunData {
        Eigen::MatrixXcd rho_in_t;  // transpose of the input state
        std::vector<std::pair<Eigen::MatrixXcd, double>> povm;  // (Pi, counts)
    };
    std::vector<RunData> data;
    for (const auto& r : runs) {
        RunData rd;
        rd.rho_in_t = coherent_state(r.amplitude, dim).elements.transpose();
        for (const auto& [theta, h] : binned_histograms(r.batch)) {
            const Eigen::MatrixXcd f = phase_factors(dim, theta);
            for (int b = 0; b < kTotalBins; ++b)
                if (h(b) > 0.0)
                    rd.povm.push_back({f.cwiseProduct(tables.full[b].cast<Complex>()), h(b)});
        }
        data.push_back(std::move(rd));
    }

    Eigen::MatrixXcd choi =
        Eigen::MatrixXcd::Identity(dim * dim, dim * dim) / static_cast<double>(dim);
    choi = tp_normalize(choi, dim);
    double prev_ll = -std::numeric_limits<double>::infinity();
    const int max_it = std::min(options.max_iterations, 5000);
    for (int it = 0; it < max_it; ++it) {
        Eigen::MatrixXcd r = Eigen::MatrixXcd::Zero(dim * dim, dim * dim);
        double ll = 0.0;
        for (const auto& rd : data) {
            // rho_out(j,k) = sum_mn rho_in(n,m) choi(m d + j, n d + k)
            Eigen::MatrixXcd rho_out = Eigen::MatrixXcd::Zero(dim, dim);
            for (int m = 0; m < dim; ++m)
                for (int n = 0; n < dim; ++n)
                    rho_out += rd.rho_in_t(m, n) *
                               choi.block(m * dim, n * dim, dim, dim);
            Eigen::MatrixXcd w = Eigen::MatrixXcd::Zero(dim, dim);
            for (const auto& [pi, c] : rd.povm) {
                const double p = std::max(1e-300, (pi * rho_out).trace().real());
                ll += c * std::log(p);
                w += (c / p) * pi;
            }
            for (int m = 0; m < dim; ++m)
                for (int n = 0; n < dim; ++n)
                    r.block(m * dim, n * dim, dim, dim) += rd.rho_in_t(m, n) * w;
        }
        choi = tp_normalize(r * choi * r.adjoint(), dim);
        if (ll - prev_ll < 1e-11 * total && it > 2) break;
        prev_ll = ll;
    }
    out.choi = choi;
    out.transfer = Eigen::MatrixXd::Zero(dim, dim);
    for (int m = 0; m < dim; ++m)
        for (int n = 0; n < dim; ++n) out.transfer(n, m) = out.diagonal(n, m);
    out.transfer_errors = Eigen::MatrixXd::Zero(dim, dim);
    out.validate();
    return out;
}

namespace {

Complex mean_field(const QuadratureBatch& batch) {
    if (batch.values.empty()) throw ValidationError("empty quadrature batch");
    Complex acc{};
    for (std::size_t i = 0; i < batch.values.size(); ++i) {
        const double th = batch.phases[i];
        acc += batch.values[i] * Complex(std::cos(th), std::sin(th));
    }
    acc /= static_cast<double>(batch.values.size());
    // <x_theta> = sqrt(2) |beta| cos(theta - arg beta), so the uniform-phase
    // demodulation recovers beta / sqrt(2).
    const Complex beta = std::sqrt(2.0) * acc;
    const double shot = 3.0 / std::sqrt(static_cast<double>(batch.values.size()));
    if (std::abs(beta) < shot)
        throw NumericalError("mean field below shot noise: phase not estimable");
    return beta;
}

}  // namespace

PhaseShiftEstimate phase_shift_estimate(const std::vector<QuadratureBatch>& input_batches,
                                        const std::vector<QuadratureBatch>& output_batches) {
    if (input_batches.size() != output_batches.size())
        throw ValidationError("need matched input/output batches");
    if (input_batches.size() < 4)
        throw ValidationError("phase shift estimation needs >= 4 input phases");
    PhaseShiftEstimate est;
    Complex resultant{};
    for (std::size_t i = 0; i < input_batches.size(); ++i) {
        const Complex bi = mean_field(input_batches[i]);
        const Complex bo = mean_field(output_batches[i]);
        const double shift = std::arg(bo * std::conj(bi));
        est.per_phase.push_back(shift);
        resultant += Complex(std::cos(shift), std::sin(shift));
    }
    resultant /= static_cast<double>(input_batches.size());
    est.shift = std::arg(resultant);
    const double r = std::min(1.0, std::abs(resultant));
    est.circular_std = std::sqrt(std::max(0.0, -2.0 * std::log(std::max(r, 1e-300))));
    return est;
}

}  // namespace qmem
