#pragma once

// Closed-form and semi-analytic dimension quantities: the entropy/exponent
// dimension sum, the piecewise Lyapunov dimension, Falconer's singular value
// function with its level-n pressure, the affinity dimension, and the planar
// carpet oracle used to validate everything else.

#include "affdim/cocycle.hpp"
#include "affdim/linalg.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace affdim {

enum class EntropySource { closed_form_carpet, user_supplied, degenerate };

/// Conditional entropies h_0 >= h_1 >= ... >= h_s >= 0 (nats). h_0 is the
/// measure entropy; h_s = 0 under strong separation.
struct EntropySequence {
    std::vector<double> h;
    EntropySource source = EntropySource::user_supplied;
};

enum class DimKind { lyapunov, affinity, ly_formula, carpet_exact };

struct DimValue {
    double value = 0.0;  // uncapped
    DimKind kind = DimKind::ly_formula;
    std::string inputs_digest;
    std::optional<double> capped;  // min(d, value), set for lyapunov/affinity
};

const char* dim_kind_name(DimKind k);

/// L_0 = 0, L_i = -sum_{l<=i} lambda_l k_l (+inf once an exponent is -inf).
std::vector<double> exponent_partial_sums(const LyapunovSpectrum& spec);

/// Entropy-increment dimension sum  sum_i (h_{i+1} - h_i) / lambda_{i+1};
/// requires |h| = s+1, h monotone nonincreasing, all exponents < 0.
/// Terms with lambda = -inf contribute 0.
DimValue ly_formula(const EntropySequence& h, const LyapunovSpectrum& spec);

/// Piecewise entropy-over-exponent quantity: d_{j-1} + (h0 - L_{j-1})/(-lambda_j)
/// on L_{j-1} <= h0 < L_j, and d h0 / L_s for h0 >= L_s. Uncapped; the capped
/// companion is min(d, value).
DimValue lyapunov_dimension(double h0, const LyapunovSpectrum& spec);

/// Falconer singular value function phi^s(A); for s > d the continuation
/// (alpha_1 ... alpha_d)^{s/d} is used.
double singular_value_function(const Mat& a, double s);

/// Level-n pressure P_n(s) = (1/n) log sum_{|I|=n} phi^s(M_I), evaluated
/// exactly. General systems enumerate all |Lambda|^n products (budget-checked);
/// pairwise commuting families collapse to multinomial counting and stay
/// feasible at much deeper levels.
double pressure(const std::vector<Mat>& mats, double s, int n);

struct AffinityDimension {
    DimValue dim;             // value = root of P_n at the requested level
    double root_at_n = 0.0;
    double root_at_half_n = 0.0;
    double richardson = 0.0;  // 2 s*_n - s*_{n/2}
    double fekete_gap = 0.0;  // s*_{n/2} - s*_n
    int level = 0;
};

/// Bisection zero of the level-n pressure in s, with the level-n/2 root and a
/// Richardson-style extrapolation reported alongside.
AffinityDimension affinity_dimension(const std::vector<Mat>& mats, int n, double tol);

struct CarpetOracle {
    EntropySequence h;
    LyapunovSpectrum spec;
    DimValue dim_measure;            // dimension of the pushed-forward measure
    DimValue dim_attractor;          // closed-form Hausdorff dimension of the carpet
    std::vector<double> row_marginal;  // q: mass per row (weak-contraction coordinate)
};

/// Closed forms for the planar grid carpet S_{(i,j)}(x,y) =
/// (x/n_cols + i/n_cols, y/m_rows + j/m_rows) with digit set `digits` and
/// digit probabilities p. m_rows == n_cols degenerates to the self-similar
/// case (one exponent of multiplicity 2).
CarpetOracle carpet_oracle(int n_cols, int m_rows,
                           const std::vector<std::pair<int, int>>& digits,
                           const std::vector<double>& p);

/// Builds the actual IFS for a carpet (for sampling / empirical validation).
AffineIFS carpet_ifs(int n_cols, int m_rows,
                     const std::vector<std::pair<int, int>>& digits);

enum class Sharpness { equal, strict };

struct SharpnessReport {
    Sharpness result = Sharpness::equal;
    int condition = 0;  // which equality pattern applies (1 or 2)
    int witness = -1;   // first index where the pattern fails (-1 if none)
};

/// Tests the exact equality conditions under which the dimension sum attains
/// min(d, Lyapunov dimension).
SharpnessReport sharpness_check(const EntropySequence& h, const LyapunovSpectrum& spec);

}  // namespace affdim
