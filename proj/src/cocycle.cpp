#include "affdim/cocycle.hpp"

#include "affdim/errors.hpp"
#include "affdim/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace affdim {

namespace {

constexpr int kRenormStride = 16;  // keeps contractive products away from underflow

void validate_cocycle_inputs(const std::vector<Mat>& mats, const ShiftMeasure& mu) {
    if (mats.empty()) throw ValidationError("cocycle: empty matrix family");
    const Eigen::Index d = mats.front().rows();
    for (const auto& m : mats)
        if (m.rows() != d || m.cols() != d || !m.allFinite())
            throw ValidationError("cocycle: matrices must be square, equal-size, finite");
    if (static_cast<int>(mats.size()) != mu.alphabet_size())
        throw ValidationError("cocycle: matrix count must match the measure alphabet");
}

double matrix_scale(const std::vector<Mat>& mats) {
    double s = 0.0;
    for (const auto& m : mats) s = std::max(s, op_norm(m));
    return s;
}

// (1/n) log ||M_{w_0} ... M_{w_{n-1}}|| with periodic renormalization;
// -inf when the product collapses to the zero matrix
double log_norm_rate(const std::vector<Mat>& mats, const Word& w) {
    const Eigen::Index d = mats.front().rows();
    Mat prod = Mat::Identity(d, d);
    double log_scale = 0.0;
    int since_renorm = 0;
    for (int s : w) {
        prod = mats[static_cast<std::size_t>(s)] * prod;
        if (++since_renorm == kRenormStride) {
            const double f = prod.norm();  // Frobenius
            if (f == 0.0) return kNegInf;
            prod /= f;
            log_scale += std::log(f);
            since_renorm = 0;
        }
    }
    const double top = op_norm(prod);
    if (top == 0.0) return kNegInf;
    return (log_scale + std::log(top)) / static_cast<double>(w.size());
}

struct RepSummary {
    std::vector<double> raw;  // descending exponents of one rep
};

std::pair<double, double> mean_stderr(const std::vector<double>& xs) {
    const double n = static_cast<double>(xs.size());
    double mean = 0.0;
    bool has_inf = false;
    for (double x : xs) {
        if (std::isinf(x)) has_inf = true;
        mean += x;
    }
    if (has_inf) return {kNegInf, 0.0};
    mean /= n;
    if (xs.size() < 2) return {mean, 0.0};
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    var /= (n - 1.0);
    return {mean, std::sqrt(var / n)};
}

Mat word_product_renormalized(const std::vector<Mat>& mats, const Word& w) {
    Mat prod = mats[static_cast<std::size_t>(w[0])];
    int since_renorm = 0;
    for (std::size_t k = 1; k < w.size(); ++k) {
        prod = prod * mats[static_cast<std::size_t>(w[k])];
        if (++since_renorm == kRenormStride) {
            const double f = prod.norm();
            if (f > 0.0) prod /= f;
            since_renorm = 0;
        }
    }
    const double f = prod.norm();
    if (f > 0.0) prod /= f;
    return prod;
}

}  // namespace

int LyapunovSpectrum::dim() const {
    return std::accumulate(multiplicities.begin(), multiplicities.end(), 0);
}

std::vector<int> LyapunovSpectrum::cumulative_multiplicity() const {
    std::vector<int> d(multiplicities.size() + 1, 0);
    for (std::size_t i = 0; i < multiplicities.size(); ++i)
        d[i + 1] = d[i] + multiplicities[i];
    return d;
}

std::pair<double, double> top_exponent(const std::vector<Mat>& mats, const ShiftMeasure& mu,
                                       int n_steps, int n_reps, std::uint64_t seed) {
    validate_cocycle_inputs(mats, mu);
    if (n_steps < 1000) throw ValidationError("top_exponent: n_steps must be >= 1000");
    if (n_reps < 1) throw ValidationError("top_exponent: n_reps must be >= 1");

    auto rates = map_chunks<double>(n_reps, [&](int rep) {
        Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(rep));
        Word w = sample_word(mu, n_steps, rng);
        return log_norm_rate(mats, w);
    });
    return mean_stderr(rates);
}

LyapunovSpectrum spectrum(const std::vector<Mat>& mats, const ShiftMeasure& mu,
                          int n_steps, int n_reps, double gap_tol, std::uint64_t seed) {
    validate_cocycle_inputs(mats, mu);
    if (n_steps < 1000) throw ValidationError("spectrum: n_steps must be >= 1000");
    if (n_reps < 1) throw ValidationError("spectrum: n_reps must be >= 1");

    const int d = static_cast<int>(mats.front().rows());
    const double dead_tol = 1e-13 * std::max(matrix_scale(mats), 1e-290);

    auto reps = map_chunks<RepSummary>(n_reps, [&](int rep) {
        Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(rep));
        Word w = sample_word(mu, n_steps, rng);
        Mat q = Mat::Identity(d, d);
        std::vector<double> log_sum(static_cast<std::size_t>(d), 0.0);
        std::vector<int> dead(static_cast<std::size_t>(d), 0);
        for (int s : w) {
            Mat a = mats[static_cast<std::size_t>(s)] * q;
            Eigen::HouseholderQR<Mat> qr(a);
            q = qr.householderQ() * Mat::Identity(d, d);
            Mat r = q.transpose() * a;  // upper triangular up to roundoff
            for (int i = 0; i < d; ++i) {
                const double rii = std::abs(r(i, i));
                if (rii <= dead_tol) {
                    ++dead[static_cast<std::size_t>(i)];
                    log_sum[static_cast<std::size_t>(i)] += std::log(dead_tol);
                } else {
                    log_sum[static_cast<std::size_t>(i)] += std::log(rii);
                }
            }
        }
        RepSummary out;
        out.raw.resize(static_cast<std::size_t>(d));
        for (int i = 0; i < d; ++i) {
            // a direction whose per-step factor keeps collapsing has exponent -inf
            const bool rank_deficient =
                dead[static_cast<std::size_t>(i)] > n_steps / 4;
            out.raw[static_cast<std::size_t>(i)] =
                rank_deficient ? kNegInf
                               : log_sum[static_cast<std::size_t>(i)] / n_steps;
        }
        std::sort(out.raw.begin(), out.raw.end(), std::greater<>());
        return out;
    });

    // mean raw exponent per position across reps
    std::vector<double> raw(static_cast<std::size_t>(d), 0.0);
    for (int i = 0; i < d; ++i) {
        std::vector<double> per_rep(static_cast<std::size_t>(n_reps));
        for (int rphase = 0; rphase < n_reps; ++rphase)
            per_rep[static_cast<std::size_t>(rphase)] =
                reps[static_cast<std::size_t>(rphase)].raw[static_cast<std::size_t>(i)];
        raw[static_cast<std::size_t>(i)] = mean_stderr(per_rep).first;
    }

    LyapunovSpectrum out;
    out.raw_exponents = raw;
    if (gap_tol <= 0.0) {
        const double top = std::isinf(raw[0]) ? 0.0 : std::abs(raw[0]);
        gap_tol = std::max(0.05 * top, 1e-3);
    }
    out.gap_tol = gap_tol;

    // group adjacent raw exponents whose gap is below gap_tol
    std::vector<std::pair<int, int>> groups;  // [begin, end)
    int begin = 0;
    for (int i = 1; i <= d; ++i) {
        const bool boundary =
            i == d || std::isinf(raw[static_cast<std::size_t>(i)]) !=
                          std::isinf(raw[static_cast<std::size_t>(i - 1)]) ||
            (!std::isinf(raw[static_cast<std::size_t>(i)]) &&
             raw[static_cast<std::size_t>(i - 1)] - raw[static_cast<std::size_t>(i)] >= gap_tol);
        if (boundary) {
            groups.emplace_back(begin, i);
            begin = i;
        }
        if (i < d && !std::isinf(raw[static_cast<std::size_t>(i)]) &&
            !std::isinf(raw[static_cast<std::size_t>(i - 1)])) {
            const double gap =
                raw[static_cast<std::size_t>(i - 1)] - raw[static_cast<std::size_t>(i)];
            if (gap >= gap_tol && gap < 2.0 * gap_tol) out.grouping_ambiguous = true;
        }
    }

    for (auto [g0, g1] : groups) {
        std::vector<double> rep_means(static_cast<std::size_t>(n_reps), 0.0);
        for (int rphase = 0; rphase < n_reps; ++rphase) {
            double acc = 0.0;
            for (int i = g0; i < g1; ++i)
                acc += reps[static_cast<std::size_t>(rphase)].raw[static_cast<std::size_t>(i)];
            rep_means[static_cast<std::size_t>(rphase)] = acc / (g1 - g0);
        }
        auto [mean, se] = mean_stderr(rep_means);
        out.exponents.push_back(mean);
        out.multiplicities.push_back(g1 - g0);
        out.stderrs.push_back(se);
    }
    return out;
}

OseledetsFlag oseledets_flag(const std::vector<Mat>& mats, const Word& past,
                             const LyapunovSpectrum& spec) {
    if (mats.empty()) throw ValidationError("oseledets_flag: empty matrix family");
    validate_word(past, static_cast<int>(mats.size()));
    const int n = static_cast<int>(past.size());
    if (n < 50) throw ValidationError("oseledets_flag: past depth must be >= 50");
    const int d = static_cast<int>(mats.front().rows());
    if (spec.dim() != d) throw ValidationError("oseledets_flag: spectrum/matrix dimension mismatch");

    OseledetsFlag flag;
    flag.past = past;
    flag.depth = n;
    const int s = spec.count();
    if (s < 2) return flag;  // trivial flag: R^d > {0}

    // backward word product; scale is irrelevant for the singular directions
    Mat b = word_product_renormalized(mats, past);
    Eigen::JacobiSVD<Mat> svd(b, Eigen::ComputeFullV);
    const Vec sv = svd.singularValues();

    const auto cum = spec.cumulative_multiplicity();
    const double confident_ratio = std::exp(n * spec.gap_tol / 2.0);
    for (int i = 1; i < s; ++i) {
        const int cut = cum[static_cast<std::size_t>(i)];  // d_i largest discarded
        Mat basis = svd.matrixV().rightCols(d - cut);
        flag.bases.push_back(basis);
        const double hi = sv(cut - 1);
        const double lo = sv(cut);
        const double ratio = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
        flag.cut_ratios.push_back(ratio);
        if (!(ratio >= confident_ratio)) flag.low_confidence = true;
    }
    return flag;
}

namespace {

// Oseledets blocks at a point from one backward and one forward window:
// fast spaces from the left singular vectors of the product ending at the
// point, the filtration from the right singular vectors of the backward
// product, blocks as their intersections.
std::vector<Mat> estimate_blocks(const std::vector<Mat>& mats, const Word& past,
                                 const Word& future, const LyapunovSpectrum& spec) {
    const int d = static_cast<int>(mats.front().rows());
    const int s = spec.count();
    const auto cum = spec.cumulative_multiplicity();

    Mat b = word_product_renormalized(mats, past);
    Eigen::JacobiSVD<Mat> back(b, Eigen::ComputeFullV);
    Mat f = word_product_renormalized(mats, future);
    Eigen::JacobiSVD<Mat> fwd(f, Eigen::ComputeFullU);

    std::vector<Mat> blocks;
    blocks.reserve(static_cast<std::size_t>(s));
    for (int i = 1; i <= s; ++i) {
        const int di = cum[static_cast<std::size_t>(i)];
        const int dprev = cum[static_cast<std::size_t>(i - 1)];
        const int ki = di - dprev;
        Mat fast = fwd.matrixU().leftCols(di);  // E^1 + ... + E^i
        if (i == 1) {
            blocks.push_back(fast);
            continue;
        }
        Mat slow = back.matrixV().rightCols(d - dprev);  // V^{i-1}
        // principal directions between the two spans: the ki nearest pairs
        Mat cross = fast.transpose() * slow;
        Eigen::JacobiSVD<Mat> svd(cross, Eigen::ComputeFullU);
        Mat block = fast * svd.matrixU().leftCols(ki);
        blocks.push_back(orthonormalize(block));
    }
    return blocks;
}

double min_block_angle_sine(const std::vector<Mat>& blocks) {
    const int s = static_cast<int>(blocks.size());
    double best = 1.0;
    const int full = (1 << s) - 1;
    for (int mi = 1; mi <= full; ++mi)
        for (int mj = mi + 1; mj <= full; ++mj) {
            if ((mi & mj) != 0) continue;
            auto gather = [&](int mask) {
                Eigen::Index cols = 0;
                for (int i = 0; i < s; ++i)
                    if (mask & (1 << i)) cols += blocks[static_cast<std::size_t>(i)].cols();
                Mat out(blocks.front().rows(), cols);
                Eigen::Index at = 0;
                for (int i = 0; i < s; ++i)
                    if (mask & (1 << i)) {
                        out.middleCols(at, blocks[static_cast<std::size_t>(i)].cols()) =
                            blocks[static_cast<std::size_t>(i)];
                        at += blocks[static_cast<std::size_t>(i)].cols();
                    }
                return orthonormalize(out);
            };
            best = std::min(best, min_angle_sine(gather(mi), gather(mj)));
        }
    return best;
}

}  // namespace

AngleReport angle_stats(const std::vector<Mat>& mats, const ShiftMeasure& mu,
                        const LyapunovSpectrum& spec, int n_samples, int past_depth,
                        std::uint64_t seed) {
    validate_cocycle_inputs(mats, mu);
    if (spec.count() < 2)
        throw ValidationError("angle_stats: spectrum must have s >= 2 distinct exponents");
    if (n_samples < 1 || past_depth < 50)
        throw ValidationError("angle_stats: need n_samples >= 1 and past_depth >= 50");

    AngleReport report;
    report.samples = map_chunks<double>(n_samples, [&](int k) {
        Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(k));
        Word two_sided = sample_word(mu, 2 * past_depth, rng);
        Word past(two_sided.begin(), two_sided.begin() + past_depth);
        Word future(two_sided.begin() + past_depth, two_sided.end());
        return min_block_angle_sine(estimate_blocks(mats, past, future, spec));
    });
    std::vector<double> sorted = report.samples;
    std::sort(sorted.begin(), sorted.end());
    report.min_sine = sorted.front();
    report.median_sine = sorted[sorted.size() / 2];

    // decay diagnostic: one long orbit, window-local angles at shifted positions
    const int n_max = 1000;
    const int n_positions = 16;
    Rng rng = Rng::stream(seed, 0x0EC4117ULL);
    Word orbit = sample_word(mu, n_max + 2 * past_depth, rng);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int t = 0; t < n_positions; ++t) {
        const int p = t * n_max / (n_positions - 1);
        Word past(orbit.begin() + p, orbit.begin() + p + past_depth);
        Word future(orbit.begin() + p + past_depth, orbit.begin() + p + 2 * past_depth);
        const double sine =
            std::max(min_block_angle_sine(estimate_blocks(mats, past, future, spec)), 1e-300);
        report.trend_positions.push_back(p);
        report.trend_log_sine.push_back(std::log(sine));
        sx += p;
        sy += std::log(sine);
        sxx += static_cast<double>(p) * p;
        sxy += p * std::log(sine);
    }
    const double denom = n_positions * sxx - sx * sx;
    report.trend_slope = denom != 0.0 ? (n_positions * sxy - sx * sy) / denom : 0.0;
    return report;
}

}  // namespace affdim
