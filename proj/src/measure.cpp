#include "affdim/measure.hpp"

#include "affdim/digest.hpp"
#include "affdim/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace affdim {

namespace {

constexpr double kRowSumTol = 1e-12;

double xlogx(double p) { return p > 0.0 ? p * std::log(p) : 0.0; }

std::vector<double> make_cdf(const std::vector<double>& p) {
    std::vector<double> cdf(p.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        acc += p[i];
        cdf[i] = acc;
    }
    cdf.back() = 1.0;
    return cdf;
}

// strong connectivity of the positive-entry graph via forward+backward reachability
bool irreducible(const Mat& p) {
    const int n = static_cast<int>(p.rows());
    auto reach = [&](bool transpose) {
        std::vector<bool> seen(static_cast<std::size_t>(n), false);
        std::vector<int> stack{0};
        seen[0] = true;
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            for (int w = 0; w < n; ++w) {
                const double e = transpose ? p(w, v) : p(v, w);
                if (e > 0.0 && !seen[static_cast<std::size_t>(w)]) {
                    seen[static_cast<std::size_t>(w)] = true;
                    stack.push_back(w);
                }
            }
        }
        return std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
    };
    return reach(false) && reach(true);
}

}  // namespace

ShiftMeasure ShiftMeasure::bernoulli(std::vector<double> probs) {
    if (probs.empty()) throw ValidationError("bernoulli: empty probability vector");
    double sum = 0.0;
    for (double p : probs) {
        if (!(p >= 0.0) || !std::isfinite(p))
            throw ValidationError("bernoulli: probabilities must be nonnegative finite");
        sum += p;
    }
    if (std::abs(sum - 1.0) > kRowSumTol)
        throw ValidationError("bernoulli: probabilities must sum to 1 (within 1e-12)");
    ShiftMeasure mu;
    mu.kind_ = MeasureKind::bernoulli;
    mu.size_ = static_cast<int>(probs.size());
    mu.probs_ = std::move(probs);
    mu.start_cdf_ = make_cdf(mu.probs_);
    return mu;
}

ShiftMeasure ShiftMeasure::markov(Mat transition) {
    const int n = static_cast<int>(transition.rows());
    if (n < 1 || transition.cols() != n)
        throw ValidationError("markov: transition matrix must be square");
    for (int i = 0; i < n; ++i) {
        double sum = 0.0;
        for (int j = 0; j < n; ++j) {
            const double p = transition(i, j);
            if (!(p >= 0.0) || !std::isfinite(p))
                throw ValidationError("markov: row " + std::to_string(i) +
                                      " has a negative or non-finite entry");
            sum += p;
        }
        if (std::abs(sum - 1.0) > kRowSumTol)
            throw ValidationError("markov: row " + std::to_string(i) +
                                  " must sum to 1 (within 1e-12)");
    }
    if (!irreducible(transition)) throw ValidationError("markov: chain must be irreducible");

    // stationary vector by power iteration
    Vec pi = Vec::Constant(n, 1.0 / n);
    for (int it = 0; it < 100000; ++it) {
        Vec next = transition.transpose() * pi;
        next /= next.sum();
        const double delta = (next - pi).cwiseAbs().maxCoeff();
        pi = next;
        if (delta < 1e-15) break;
    }
    if ((transition.transpose() * pi - pi).cwiseAbs().maxCoeff() > 1e-10)
        throw NumericError("markov: stationary vector did not converge to 1e-10");

    ShiftMeasure mu;
    mu.kind_ = MeasureKind::markov;
    mu.size_ = n;
    mu.transition_ = std::move(transition);
    mu.stationary_ = pi;
    std::vector<double> start(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) start[static_cast<std::size_t>(i)] = pi(i);
    mu.start_cdf_ = make_cdf(start);
    mu.row_cdf_.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        std::vector<double> row(static_cast<std::size_t>(n));
        for (int j = 0; j < n; ++j) row[static_cast<std::size_t>(j)] = mu.transition_(i, j);
        mu.row_cdf_[static_cast<std::size_t>(i)] = make_cdf(row);
    }
    return mu;
}

std::string ShiftMeasure::digest() const {
    Digest dg;
    dg.add(kind_ == MeasureKind::bernoulli ? 0 : 1).add(size_);
    if (kind_ == MeasureKind::bernoulli) {
        dg.add(probs_);
    } else {
        for (int i = 0; i < size_; ++i)
            for (int j = 0; j < size_; ++j) dg.add(transition_(i, j));
    }
    return dg.hex();
}

int ShiftMeasure::next_symbol(int prev, Rng& rng) const {
    if (kind_ == MeasureKind::bernoulli || prev < 0) return rng.from_cdf(start_cdf_);
    return rng.from_cdf(row_cdf_[static_cast<std::size_t>(prev)]);
}

double entropy(const ShiftMeasure& mu) {
    if (mu.kind() == MeasureKind::bernoulli) {
        double h = 0.0;
        for (double p : mu.probs()) h -= xlogx(p);
        return h;
    }
    double h = 0.0;
    const int n = mu.alphabet_size();
    for (int i = 0; i < n; ++i) {
        double row = 0.0;
        for (int j = 0; j < n; ++j) row -= xlogx(mu.transition()(i, j));
        h += mu.stationary()(i) * row;
    }
    return h;
}

double cylinder_prob(const ShiftMeasure& mu, const Word& w) {
    validate_word(w, mu.alphabet_size());
    if (mu.kind() == MeasureKind::bernoulli) {
        double p = 1.0;
        for (int s : w) p *= mu.probs()[static_cast<std::size_t>(s)];
        return p;
    }
    double p = mu.stationary()(w[0]);
    for (std::size_t k = 0; k + 1 < w.size(); ++k) p *= mu.transition()(w[k], w[k + 1]);
    return p;
}

double log_cylinder_prob(const ShiftMeasure& mu, const Word& w) {
    validate_word(w, mu.alphabet_size());
    auto log_or_neg_inf = [](double p) {
        return p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity();
    };
    if (mu.kind() == MeasureKind::bernoulli) {
        double acc = 0.0;
        for (int s : w) acc += log_or_neg_inf(mu.probs()[static_cast<std::size_t>(s)]);
        return acc;
    }
    double acc = log_or_neg_inf(mu.stationary()(w[0]));
    for (std::size_t k = 0; k + 1 < w.size(); ++k)
        acc += log_or_neg_inf(mu.transition()(w[k], w[k + 1]));
    return acc;
}

Word sample_word(const ShiftMeasure& mu, int length, Rng& rng) {
    if (length < 1) throw ValidationError("sample_word: length must be >= 1");
    Word w(static_cast<std::size_t>(length));
    int prev = -1;
    for (int k = 0; k < length; ++k) {
        prev = mu.next_symbol(prev, rng);
        w[static_cast<std::size_t>(k)] = prev;
    }
    return w;
}

MeasureRegularity regularity(const ShiftMeasure& mu) {
    MeasureRegularity reg;
    if (mu.kind() == MeasureKind::bernoulli) {
        // exactly multiplicative
        reg.quasi_bernoulli = true;
        reg.submultiplicative = true;
        reg.constant_c = 1.0;
        return reg;
    }
    // m([IJ]) / (m([I]) m([J])) = P(i_last, j_first) / pi(j_first), so the
    // extreme of that ratio over symbol pairs is the sharp constant
    const int n = mu.alphabet_size();
    double upper = 0.0;
    bool positive = true;
    double two_sided = 1.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double ratio = mu.transition()(i, j) / mu.stationary()(j);
            upper = std::max(upper, ratio);
            if (ratio <= 0.0)
                positive = false;
            else
                two_sided = std::max({two_sided, ratio, 1.0 / ratio});
        }
    reg.submultiplicative = true;
    reg.quasi_bernoulli = positive;
    reg.constant_c = positive ? two_sided : std::max(upper, 1.0);
    return reg;
}

}  // namespace affdim
