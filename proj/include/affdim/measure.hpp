#pragma once

// Ergodic measures on the full shift: Bernoulli products and stationary
// irreducible Markov chains. Both have exact entropies and cylinder masses,
// which is what the validation families need.

#include "affdim/ifs.hpp"
#include "affdim/linalg.hpp"
#include "affdim/rng.hpp"

#include <string>
#include <vector>

namespace affdim {

enum class MeasureKind { bernoulli, markov };

class ShiftMeasure {
public:
    /// Bernoulli product measure with symbol probabilities p.
    static ShiftMeasure bernoulli(std::vector<double> probs);

    /// Stationary Markov measure for an irreducible row-stochastic P; the
    /// stationary vector is computed by power iteration to 1e-13.
    static ShiftMeasure markov(Mat transition);

    MeasureKind kind() const { return kind_; }
    int alphabet_size() const { return size_; }
    const std::vector<double>& probs() const { return probs_; }
    const Mat& transition() const { return transition_; }
    const Vec& stationary() const { return stationary_; }
    std::string digest() const;

    /// One symbol extending the given prefix state (-1 = fresh start).
    int next_symbol(int prev, Rng& rng) const;

private:
    ShiftMeasure() = default;
    MeasureKind kind_ = MeasureKind::bernoulli;
    int size_ = 0;
    std::vector<double> probs_;            // Bernoulli weights
    Mat transition_;                       // Markov rows
    Vec stationary_;
    std::vector<double> start_cdf_;        // stationary / Bernoulli cdf
    std::vector<std::vector<double>> row_cdf_;
};

struct MeasureRegularity {
    bool quasi_bernoulli = false;
    bool submultiplicative = false;
    double constant_c = 1.0;  // meaningful when submultiplicative
};

/// Shannon entropy in nats (0 log 0 := 0).
double entropy(const ShiftMeasure& mu);

/// m([w]_0) for a nonempty word.
double cylinder_prob(const ShiftMeasure& mu, const Word& w);

/// log m([w]_0); safe for words long enough to underflow the direct product.
double log_cylinder_prob(const ShiftMeasure& mu, const Word& w);

/// One-sided marginal sample of the given length; deterministic given rng.
Word sample_word(const ShiftMeasure& mu, int length, Rng& rng);

/// Quasi-Bernoulli / sub-multiplicative certificate with the explicit
/// constant from the one-step cylinder ratio m([IJ]) / (m([I]) m([J])).
MeasureRegularity regularity(const ShiftMeasure& mu);

}  // namespace affdim
