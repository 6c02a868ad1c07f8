#pragma once

// Numerical multiplicative ergodic theory for the one-step matrix cocycle of
// an affine IFS: top exponent, full Lyapunov spectrum with multiplicities,
// filtration estimates from backward products, and angle diagnostics between
// the estimated Oseledets blocks.

#include "affdim/ifs.hpp"
#include "affdim/measure.hpp"

#include <cstdint>
#include <vector>

namespace affdim {

struct LyapunovSpectrum {
    std::vector<double> exponents;       // grouped, strictly decreasing; -inf allowed last
    std::vector<int> multiplicities;     // k_i, sum = d
    std::vector<double> stderrs;         // per grouped exponent, across reps
    std::vector<double> raw_exponents;   // d ungrouped values, descending
    double gap_tol = 0.0;
    bool grouping_ambiguous = false;     // some gap fell in [gap_tol, 2 gap_tol)

    int count() const { return static_cast<int>(exponents.size()); }
    int dim() const;
    double top() const { return exponents.front(); }
    /// d_i = k_1 + ... + k_i for i = 0..s.
    std::vector<int> cumulative_multiplicity() const;
};

/// (estimate, stderr) of the top exponent with renormalized products.
std::pair<double, double> top_exponent(const std::vector<Mat>& mats, const ShiftMeasure& mu,
                                       int n_steps, int n_reps, std::uint64_t seed);

/// Full spectrum via the QR orthonormalization recursion; raw exponents whose
/// gaps fall below gap_tol are grouped into one multiplicity. gap_tol <= 0
/// selects the default 0.05 |lambda_1| with floor 1e-3.
LyapunovSpectrum spectrum(const std::vector<Mat>& mats, const ShiftMeasure& mu,
                          int n_steps, int n_reps, double gap_tol, std::uint64_t seed);

struct OseledetsFlag {
    // bases[i] spans the estimated V^{i+1} (i = 0..s-2), the space of vectors
    // contracted at rate <= lambda_{i+2} under the backward products; columns
    // orthonormal, spaces nested.
    std::vector<Mat> bases;
    Word past;
    int depth = 0;
    std::vector<double> cut_ratios;  // singular-value ratio at each cut
    bool low_confidence = false;
};

/// Filtration estimate from one SVD of the backward word product
/// M_{x_{-n}} ... M_{x_{-1}} (past given in time order, oldest first).
OseledetsFlag oseledets_flag(const std::vector<Mat>& mats, const Word& past,
                             const LyapunovSpectrum& spec);

struct AngleReport {
    std::vector<double> samples;  // sin of the smallest inter-block angle, per sampled past
    double min_sine = 0.0;
    double median_sine = 0.0;
    // decay diagnostic along one orbit: least-squares slope of
    // log sin theta(shift^n x) against n; sub-exponential decay means ~0
    std::vector<int> trend_positions;
    std::vector<double> trend_log_sine;
    double trend_slope = 0.0;
};

/// Samples the smallest principal sine between complementary Oseledets blocks
/// (backward SVD for the filtration, forward SVD for the fast spaces).
AngleReport angle_stats(const std::vector<Mat>& mats, const ShiftMeasure& mu,
                        const LyapunovSpectrum& spec, int n_samples, int past_depth,
                        std::uint64_t seed);

}  // namespace affdim
