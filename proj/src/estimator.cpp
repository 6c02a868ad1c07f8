#include "affdim/estimator.hpp"

#include "affdim/digest.hpp"
#include "affdim/errors.hpp"
#include "affdim/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace affdim {

namespace {

constexpr std::int64_t kSampleChunk = 65536;

struct FitResult {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_se = 0.0;  // from fit residuals; picks up curvature/oscillation
};

FitResult fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double denom = n * sxx - sx * sx;
    FitResult fit;
    if (denom == 0.0) return fit;
    fit.slope = (n * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / n;
    if (x.size() > 2) {
        double rss = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double r = y[i] - fit.slope * x[i] - fit.intercept;
            rss += r * r;
        }
        const double sxx_centered = sxx - sx * sx / n;
        if (sxx_centered > 0.0)
            fit.slope_se = std::sqrt(rss / (n - 2.0) / sxx_centered);
    }
    return fit;
}

}  // namespace

double PointCloud::diameter_estimate() const {
    if (points.rows() == 0) return 0.0;
    const Vec lo = points.colwise().minCoeff();
    const Vec hi = points.colwise().maxCoeff();
    return (hi - lo).norm();
}

const char* dim_method_name(DimMethod m) {
    return m == DimMethod::correlation ? "correlation" : "knn";
}

PointCloud sample_points(const AffineIFS& ifs, const ShiftMeasure& mu,
                         std::int64_t n_points, int depth, std::uint64_t seed) {
    if (n_points < 1) throw ValidationError("sample_points: N must be >= 1");
    if (depth < 1) throw ValidationError("sample_points: depth must be >= 1");
    if (mu.alphabet_size() != ifs.alphabet_size())
        throw ValidationError("sample_points: measure alphabet must match the IFS");

    PointCloud cloud;
    cloud.ifs_digest = ifs.digest();
    cloud.measure_digest = mu.digest();
    cloud.depth = depth;
    cloud.seed = seed;

    if (ifs.uniform_contraction_factor() >= 1.0) {
        // only the statistical tail is available; refuse outright when the
        // cocycle is not average contracting
        auto est = average_contraction(ifs, mu, 2000, 8, seed ^ 0xACC0117ULL);
        if (!est.is_contracting)
            throw NumericError("sample_points: system is not average contracting "
                               "(lambda_hat = " + std::to_string(est.lambda_hat) + ")");
        cloud.tail_warning = true;
    }

    const int d = ifs.dimension();
    cloud.points.resize(n_points, d);
    const std::int64_t n_chunks = (n_points + kSampleChunk - 1) / kSampleChunk;

    struct Done { bool ok = true; };
    map_chunks<Done>(static_cast<int>(n_chunks), [&](int chunk) {
        Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(chunk));
        const std::int64_t begin = static_cast<std::int64_t>(chunk) * kSampleChunk;
        const std::int64_t end = std::min(begin + kSampleChunk, n_points);
        Word w;
        for (std::int64_t i = begin; i < end; ++i) {
            w = sample_word(mu, depth, rng);
            // Horner evaluation of the truncated coding map
            Vec pt = ifs.map(w.back()).translation;
            for (int k = depth - 2; k >= 0; --k) {
                const AffineMap& m = ifs.map(w[static_cast<std::size_t>(k)]);
                pt = m.matrix * pt + m.translation;
            }
            cloud.points.row(i) = pt.transpose();
        }
        return Done{};
    });
    return cloud;
}

int recommended_depth(const AffineIFS& ifs, const ShiftMeasure& mu, double r_min,
                      std::uint64_t seed) {
    const double rho = ifs.uniform_contraction_factor();
    int depth = 20;
    if (rho < 1.0 && rho > 0.0) {
        const double max_a = std::max(ifs.max_translation_norm(), 1e-300);
        const double target = std::max(r_min, 1e-12) * (1.0 - rho) / (10.0 * max_a);
        if (target < 1.0)
            depth = static_cast<int>(std::ceil(std::log(target) / std::log(rho)));
    } else if (rho >= 1.0) {
        auto est = average_contraction(ifs, mu, 2000, 8, seed ^ 0xDEB7ULL);
        if (!est.is_contracting)
            throw NumericError("recommended_depth: system is not average contracting");
        depth = static_cast<int>(std::ceil(10.0 * std::log(10.0) / -est.lambda_hat));
    }
    return std::clamp(depth, 20, 20000);
}

namespace {

struct PairCounts {
    // per block: counts per radius bin (last bin = beyond r_max), plus totals
    std::vector<std::vector<std::uint64_t>> bin;
    std::vector<std::uint64_t> total;
};

// one pass of pair sampling with per-block attribution
PairCounts count_pairs(const Mat& pts, const std::vector<double>& radii_sq, int n_blocks,
                       std::uint64_t pair_budget, std::uint64_t seed) {
    const std::int64_t n = pts.rows();
    const int d = static_cast<int>(pts.cols());
    const int n_bins = static_cast<int>(radii_sq.size()) + 1;
    const double max_r_sq = radii_sq.back();

    const std::uint64_t all_pairs =
        static_cast<std::uint64_t>(n) * static_cast<std::uint64_t>(n - 1) / 2;
    const bool exhaustive = all_pairs <= pair_budget;
    const std::uint64_t samples = exhaustive ? all_pairs : pair_budget;

    const int n_chunks = 64;
    auto chunks = map_chunks<PairCounts>(n_chunks, [&](int chunk) {
        PairCounts pc;
        pc.bin.assign(static_cast<std::size_t>(n_blocks),
                      std::vector<std::uint64_t>(static_cast<std::size_t>(n_bins), 0));
        pc.total.assign(static_cast<std::size_t>(n_blocks), 0);
        const double* data = pts.data();  // column-major
        auto classify = [&](std::int64_t i, std::int64_t j) {
            double dist_sq = 0.0;
            for (int c = 0; c < d; ++c) {
                const double diff = data[static_cast<std::size_t>(c) * n + i] -
                                    data[static_cast<std::size_t>(c) * n + j];
                dist_sq += diff * diff;
            }
            int bin = n_bins - 1;
            if (dist_sq <= max_r_sq) {
                bin = static_cast<int>(std::lower_bound(radii_sq.begin(), radii_sq.end(),
                                                        dist_sq) - radii_sq.begin());
            }
            const int block = static_cast<int>(i * n_blocks / n);
            ++pc.bin[static_cast<std::size_t>(block)][static_cast<std::size_t>(bin)];
            ++pc.total[static_cast<std::size_t>(block)];
        };
        if (exhaustive) {
            // strided rows so chunks stay balanced
            for (std::int64_t i = chunk; i < n; i += n_chunks)
                for (std::int64_t j = i + 1; j < n; ++j) classify(i, j);
        } else {
            Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(chunk));
            const std::uint64_t base = samples / n_chunks;
            const std::uint64_t mine =
                base + (static_cast<std::uint64_t>(chunk) < samples % n_chunks ? 1 : 0);
            for (std::uint64_t t = 0; t < mine; ++t) {
                const auto i = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(n)));
                auto j = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(n - 1)));
                if (j >= i) ++j;
                classify(i, j);
            }
        }
        return pc;
    });

    PairCounts out;
    out.bin.assign(static_cast<std::size_t>(n_blocks),
                   std::vector<std::uint64_t>(static_cast<std::size_t>(n_bins), 0));
    out.total.assign(static_cast<std::size_t>(n_blocks), 0);
    for (const auto& pc : chunks)
        for (int g = 0; g < n_blocks; ++g) {
            for (int b = 0; b < n_bins; ++b)
                out.bin[static_cast<std::size_t>(g)][static_cast<std::size_t>(b)] +=
                    pc.bin[static_cast<std::size_t>(g)][static_cast<std::size_t>(b)];
            out.total[static_cast<std::size_t>(g)] += pc.total[static_cast<std::size_t>(g)];
        }
    return out;
}

// correlation-integral slope from (optionally block-reweighted) counts
double slope_from_counts(const PairCounts& pc, const std::vector<double>& radii,
                         const std::vector<std::uint64_t>& weights, int trim, bool* ok,
                         double* slope_se = nullptr) {
    const int n_blocks = static_cast<int>(pc.total.size());
    const int n_radii = static_cast<int>(radii.size());
    std::vector<double> cum(static_cast<std::size_t>(n_radii), 0.0);
    double total = 0.0;
    for (int g = 0; g < n_blocks; ++g) {
        const double w = static_cast<double>(weights[static_cast<std::size_t>(g)]);
        if (w == 0.0) continue;
        double acc = 0.0;
        for (int b = 0; b < n_radii; ++b) {
            acc += static_cast<double>(pc.bin[static_cast<std::size_t>(g)][static_cast<std::size_t>(b)]);
            cum[static_cast<std::size_t>(b)] += w * acc;
        }
        total += w * static_cast<double>(pc.total[static_cast<std::size_t>(g)]);
    }
    std::vector<double> xs, ys;
    for (int b = trim; b < n_radii - trim; ++b) {
        const double c = cum[static_cast<std::size_t>(b)];
        if (c <= 0.0) continue;
        xs.push_back(std::log(radii[static_cast<std::size_t>(b)]));
        ys.push_back(std::log(c / total));
    }
    if (xs.size() < 2) {
        // a cloud collapsed to (near) a single point: every pair sits in every
        // bin or none do; constant C(r) means slope 0
        bool constant = true;
        for (int b = 1; b < n_radii; ++b)
            if (cum[static_cast<std::size_t>(b)] != cum[0]) constant = false;
        if (constant && cum[0] > 0.0) {
            if (ok) *ok = true;
            if (slope_se) *slope_se = 0.0;
            return 0.0;
        }
        if (ok) *ok = false;
        return 0.0;
    }
    if (ok) *ok = true;
    FitResult fit = fit_slope(xs, ys);
    if (slope_se) *slope_se = fit.slope_se;
    return fit.slope;
}

DimEstimate correlation_dimension(const Mat& pts, double r_min, double r_max, int n_radii,
                                  std::uint64_t pair_budget, std::uint64_t seed, int trim,
                                  int n_blocks, int n_bootstrap) {
    const std::int64_t n = pts.rows();
    if (n < 2) throw ValidationError("local_dimension: need at least two points");
    if (!(r_min > 0.0) || !(r_max > r_min))
        throw ValidationError("local_dimension: need 0 < r_min < r_max");
    if (pair_budget > 1000000000ULL)
        throw ValidationError("local_dimension: pair budget capped at 1e9");
    if (n_radii < 4) throw ValidationError("local_dimension: need at least 4 radii");
    if (trim < 0 || n_radii - 2 * trim < 2) trim = std::max(0, (n_radii - 2) / 4);
    n_blocks = std::min<std::int64_t>(n_blocks, n);

    std::vector<double> radii(static_cast<std::size_t>(n_radii));
    std::vector<double> radii_sq(static_cast<std::size_t>(n_radii));
    for (int k = 0; k < n_radii; ++k) {
        radii[static_cast<std::size_t>(k)] =
            r_min * std::pow(r_max / r_min, static_cast<double>(k) / (n_radii - 1));
        radii_sq[static_cast<std::size_t>(k)] = radii[static_cast<std::size_t>(k)] *
                                                radii[static_cast<std::size_t>(k)];
    }

    PairCounts pc = count_pairs(pts, radii_sq, n_blocks, pair_budget, seed);

    std::uint64_t inside = 0, samples = 0;
    for (int g = 0; g < n_blocks; ++g) {
        samples += pc.total[static_cast<std::size_t>(g)];
        for (int b = 0; b < n_radii; ++b)
            inside += pc.bin[static_cast<std::size_t>(g)][static_cast<std::size_t>(b)];
    }
    if (inside < 30)
        throw NumericError("local_dimension: fewer than 30 pairs inside r_max");

    std::vector<std::uint64_t> unit(static_cast<std::size_t>(n_blocks), 1);
    bool ok = false;
    double fit_se = 0.0;
    const double slope = slope_from_counts(pc, radii, unit, trim, &ok, &fit_se);
    if (!ok) throw NumericError("local_dimension: too few populated radii in the fit band");

    // block bootstrap over point blocks for the confidence interval
    Rng boot_rng = Rng::stream(seed, 0xB00Bu);
    std::vector<double> boot;
    boot.reserve(static_cast<std::size_t>(n_bootstrap));
    std::vector<std::uint64_t> weights(static_cast<std::size_t>(n_blocks), 0);
    for (int b = 0; b < n_bootstrap; ++b) {
        std::fill(weights.begin(), weights.end(), 0);
        for (int g = 0; g < n_blocks; ++g)
            ++weights[boot_rng.below(static_cast<std::uint64_t>(n_blocks))];
        bool bok = false;
        const double s = slope_from_counts(pc, radii, weights, trim, &bok);
        if (bok) boot.push_back(s);
    }
    // sampling noise from the block bootstrap plus model error from the
    // log-log fit residuals (lacunarity oscillation, band curvature)
    double boot_var = 0.0;
    if (boot.size() > 1) {
        double mean = std::accumulate(boot.begin(), boot.end(), 0.0) /
                      static_cast<double>(boot.size());
        for (double s : boot) boot_var += (s - mean) * (s - mean);
        boot_var /= static_cast<double>(boot.size() - 1);
    }
    const double ci = 1.96 * std::sqrt(boot_var + fit_se * fit_se);

    DimEstimate est;
    est.value = std::max(slope, 0.0);
    est.ci_half_width = ci;
    est.method = DimMethod::correlation;
    est.r_min = r_min;
    est.r_max = r_max;
    est.n_pairs_or_k = samples;
    return est;
}

// Pooled two-order Levina-Bickel: per query the ratio T_k / T_{k/2} is a
// scale-free local statistic; averaging the log-ratios over queries and
// inverting once avoids the inverse-Jensen inflation a per-point average
// picks up on measures with log-scale oscillations. The normalizer
// psi(k) - psi(k1) is the exact harmonic sum for integer orders.
DimEstimate knn_dimension(const Mat& pts, int k, int n_queries, int n_refs, int n_blocks) {
    const std::int64_t n = pts.rows();
    const int d = static_cast<int>(pts.cols());
    if (n < k + 2) throw ValidationError("local_dimension: need more points than k");
    const int k1 = std::max(2, k / 2);

    const std::int64_t q_count = std::min<std::int64_t>(n_queries, n);
    const std::int64_t r_count = std::min<std::int64_t>(n_refs, n);

    const int n_chunks = 32;
    auto locals = map_chunks<std::vector<double>>(n_chunks, [&](int chunk) {
        std::vector<double> out;
        std::vector<double> dist(static_cast<std::size_t>(r_count));
        const double* data = pts.data();
        for (std::int64_t t = chunk; t < q_count; t += n_chunks) {
            const std::int64_t qi = t * n / q_count;  // deterministic stride subsample
            for (std::int64_t u = 0; u < r_count; ++u) {
                const std::int64_t rj = u * n / r_count;
                double dist_sq = 0.0;
                for (int c = 0; c < d; ++c) {
                    const double diff = data[static_cast<std::size_t>(c) * n + qi] -
                                        data[static_cast<std::size_t>(c) * n + rj];
                    dist_sq += diff * diff;
                }
                dist[static_cast<std::size_t>(u)] = dist_sq;
            }
            const std::size_t hi = std::min<std::size_t>(
                static_cast<std::size_t>(k) + 32, dist.size() - 1);
            const auto kth = dist.begin() + static_cast<std::ptrdiff_t>(hi);
            std::nth_element(dist.begin(), kth, dist.end());
            std::sort(dist.begin(), kth + 1);
            // discard exact zeros: the self-match plus truncation duplicates
            std::size_t z = 0;
            while (z < dist.size() && dist[z] == 0.0) ++z;
            const std::size_t i1 = z + static_cast<std::size_t>(k1) - 1;
            const std::size_t ik = z + static_cast<std::size_t>(k) - 1;
            if (ik > hi || dist[i1] <= 0.0) {
                out.push_back(std::numeric_limits<double>::quiet_NaN());  // point mass
                continue;
            }
            out.push_back(0.5 * std::log(dist[ik] / dist[i1]));
        }
        return out;
    });

    std::vector<double> ratios;
    std::int64_t degenerate = 0;
    for (const auto& chunk : locals)
        for (double v : chunk) {
            if (std::isnan(v)) ++degenerate;
            else ratios.push_back(v);
        }

    DimEstimate est;
    est.method = DimMethod::knn;
    est.n_pairs_or_k = static_cast<std::uint64_t>(k);
    if (ratios.size() < 8 || degenerate > static_cast<std::int64_t>(ratios.size())) {
        est.value = 0.0;  // dominated by coincident points
        est.ci_half_width = 0.0;
        return est;
    }

    double norm = 0.0;  // psi(k) - psi(k1) = sum_{i=k1}^{k-1} 1/i
    for (int i = k1; i < k; ++i) norm += 1.0 / i;
    const double mean_ratio = std::accumulate(ratios.begin(), ratios.end(), 0.0) /
                              static_cast<double>(ratios.size());
    est.value = norm / mean_ratio;

    // block std over query blocks, delta method for the inversion
    n_blocks = std::min<int>(n_blocks, static_cast<int>(ratios.size()));
    std::vector<double> block_means;
    const std::size_t per = ratios.size() / static_cast<std::size_t>(n_blocks);
    for (int g = 0; g < n_blocks && per > 0; ++g) {
        double acc = 0.0;
        for (std::size_t i = 0; i < per; ++i)
            acc += ratios[static_cast<std::size_t>(g) * per + i];
        block_means.push_back(acc / static_cast<double>(per));
    }
    double ci = 0.0;
    if (block_means.size() > 1) {
        double bm = std::accumulate(block_means.begin(), block_means.end(), 0.0) /
                    static_cast<double>(block_means.size());
        double var = 0.0;
        for (double s : block_means) var += (s - bm) * (s - bm);
        var /= static_cast<double>(block_means.size() - 1);
        const double se = std::sqrt(var / static_cast<double>(block_means.size()));
        ci = 1.96 * se * est.value / mean_ratio;
    }
    est.ci_half_width = ci;
    return est;
}

}  // namespace

DimEstimate local_dimension(const PointCloud& cloud, DimMethod method, double r_min,
                            double r_max, int n_radii, std::uint64_t pair_budget,
                            std::uint64_t seed) {
    if (method == DimMethod::correlation)
        return correlation_dimension(cloud.points, r_min, r_max, n_radii, pair_budget, seed,
                                     /*trim=*/2, /*n_blocks=*/20, /*n_bootstrap=*/200);
    EstimateConfig defaults;
    return knn_dimension(cloud.points, defaults.knn_k, defaults.knn_queries,
                         defaults.knn_refs, defaults.n_blocks);
}

namespace {

DimEstimate estimate_matrix(const Mat& pts, const EstimateConfig& cfg) {
    Vec lo = pts.colwise().minCoeff();
    Vec hi = pts.colwise().maxCoeff();
    const double diam = (hi - lo).norm();
    if (diam <= 0.0) {
        // point mass
        DimEstimate est;
        est.value = 0.0;
        est.ci_half_width = 0.0;
        est.method = cfg.method;
        est.n_pairs_or_k = 0;
        return est;
    }
    if (cfg.method == DimMethod::knn)
        return knn_dimension(pts, cfg.knn_k, cfg.knn_queries, cfg.knn_refs, cfg.n_blocks);
    return correlation_dimension(pts, cfg.r_rel_min * diam, cfg.r_rel_max * diam, cfg.n_radii,
                                 cfg.pair_budget, cfg.seed, cfg.fit_trim, cfg.n_blocks,
                                 cfg.n_bootstrap);
}

}  // namespace

DimEstimate estimate_dimension(const PointCloud& cloud, const EstimateConfig& cfg) {
    return estimate_matrix(cloud.points, cfg);
}

DimEstimate projected_dimension(const PointCloud& cloud, const Mat& w_perp_basis,
                                const EstimateConfig& cfg) {
    if (w_perp_basis.rows() != cloud.points.cols())
        throw ValidationError("projected_dimension: basis dimension mismatch");
    if (!is_orthonormal(w_perp_basis))
        throw ValidationError("projected_dimension: basis must be orthonormal");
    Mat projected = cloud.points * w_perp_basis;
    return estimate_matrix(projected, cfg);
}

DimEstimate slice_dimension(const PointCloud& cloud, const Mat& w_basis,
                            double slab_halfwidth, const EstimateConfig& cfg) {
    const int d = cloud.dim();
    if (w_basis.rows() != d || w_basis.cols() < 1 || w_basis.cols() >= d)
        throw ValidationError("slice_dimension: W must be a proper nontrivial subspace");
    if (!is_orthonormal(w_basis))
        throw ValidationError("slice_dimension: basis must be orthonormal");
    if (!(slab_halfwidth > 0.0))
        throw ValidationError("slice_dimension: slab halfwidth must be positive");

    const Mat complement = orthonormal_complement(w_basis);
    const Mat comp_coords = cloud.points * complement;  // N x (d-k)
    const Mat w_coords = cloud.points * w_basis;        // N x k
    const std::int64_t n = cloud.size();

    Rng rng = Rng::stream(cfg.seed, 0x51A8ULL);
    EstimateConfig sub_cfg = cfg;
    // always the correlation integral here: a slab conditions the complement
    // coordinates only down to its own width, so the radius band must not
    // probe finer scales, which is exactly where k-NN lives
    sub_cfg.method = DimMethod::correlation;
    sub_cfg.pair_budget = std::max<std::uint64_t>(cfg.pair_budget / std::max(cfg.n_anchors, 1),
                                                  1000000ULL);
    sub_cfg.n_bootstrap = 0;  // anchor spread supplies the interval

    std::vector<double> values;
    std::uint64_t pairs_used = 0;
    for (int a = 0; a < cfg.n_anchors; ++a) {
        const auto anchor = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(n)));
        double width = slab_halfwidth;
        for (int attempt = 0; attempt < 2; ++attempt) {
            std::vector<std::int64_t> keep;
            for (std::int64_t i = 0; i < n; ++i) {
                const double dist = (comp_coords.row(i) - comp_coords.row(anchor)).norm();
                if (dist <= width) keep.push_back(i);
            }
            if (keep.size() < 500) {
                width *= 2.0;  // widen-slab retry
                if (attempt == 1)
                    throw NumericError("slice_dimension: slab retained < 500 points even "
                                       "after widening; enlarge slab_halfwidth or N");
                continue;
            }
            Mat sub(static_cast<Eigen::Index>(keep.size()), w_basis.cols());
            for (std::size_t i = 0; i < keep.size(); ++i)
                sub.row(static_cast<Eigen::Index>(i)) = w_coords.row(keep[i]);
            sub_cfg.seed = cfg.seed ^ (0x511CE00ULL + static_cast<std::uint64_t>(a));
            DimEstimate est = estimate_matrix(sub, sub_cfg);
            values.push_back(est.value);
            pairs_used += est.n_pairs_or_k;
            break;
        }
    }

    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    const double median = sorted[sorted.size() / 2];
    double mean = std::accumulate(values.begin(), values.end(), 0.0) /
                  static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= std::max<double>(1.0, static_cast<double>(values.size() - 1));

    DimEstimate est;
    est.value = median;
    est.ci_half_width = 1.96 * std::sqrt(var / static_cast<double>(values.size()));
    est.method = DimMethod::correlation;
    est.n_pairs_or_k = pairs_used;
    return est;
}

ConservationReport conservation_check(const PointCloud& cloud, const Mat& w_basis,
                                      const EstimateConfig& cfg) {
    ConservationReport report;
    report.subspace = w_basis;
    report.dim_total = estimate_dimension(cloud, cfg);
    report.dim_proj = projected_dimension(cloud, orthonormal_complement(w_basis), cfg);
    const double slab = cfg.slab_rel * cloud.diameter_estimate();
    report.dim_slice = slice_dimension(cloud, w_basis, slab, cfg);
    report.residual = report.dim_total.value - report.dim_proj.value - report.dim_slice.value;
    report.pooled_ci = std::sqrt(report.dim_total.ci_half_width * report.dim_total.ci_half_width +
                                 report.dim_proj.ci_half_width * report.dim_proj.ci_half_width +
                                 report.dim_slice.ci_half_width * report.dim_slice.ci_half_width);
    return report;
}

namespace {

AffineIFS assemble(const std::vector<Mat>& mats, const std::vector<Vec>& translations) {
    std::vector<AffineMap> maps;
    maps.reserve(mats.size());
    for (std::size_t j = 0; j < mats.size(); ++j)
        maps.push_back(AffineMap{mats[j], translations[j]});
    return AffineIFS::create(std::move(maps), /*allow_single=*/true);
}

std::pair<double, double> lyapunov_bound(const std::vector<Mat>& mats, const ShiftMeasure& mu,
                                         const SweepConfig& cfg) {
    LyapunovSpectrum spec = spectrum(mats, mu, cfg.n_steps, cfg.n_reps, 0.0, cfg.est.seed);
    DimValue ly = lyapunov_dimension(entropy(mu), spec);
    return {ly.value, *ly.capped};
}

}  // namespace

std::vector<SweepRow> translation_sweep(const std::vector<Mat>& mats, const ShiftMeasure& mu,
                                        const std::vector<std::vector<Vec>>& grid,
                                        const SweepConfig& cfg) {
    if (grid.empty()) throw ValidationError("translation_sweep: empty grid");
    auto [ly_raw, ly_capped] = lyapunov_bound(mats, mu, cfg);
    bool half_norm_warning = false;
    for (const auto& m : mats)
        if (!(op_norm(m) < 0.5)) half_norm_warning = true;

    std::vector<SweepRow> rows;
    rows.reserve(grid.size());
    for (std::size_t g = 0; g < grid.size(); ++g) {
        const auto& translations = grid[g];
        if (translations.size() != mats.size())
            throw ValidationError("translation_sweep: grid point " + std::to_string(g) +
                                  " has wrong translation count");
        AffineIFS ifs = assemble(mats, translations);
        int depth = cfg.depth;
        if (depth <= 0) {
            const double rho = ifs.uniform_contraction_factor();
            const double extent =
                rho < 1.0 ? std::max(ifs.max_translation_norm() / (1.0 - rho), 1e-9) : 1.0;
            depth = recommended_depth(ifs, mu, cfg.est.r_rel_min * extent, cfg.est.seed);
        }
        const std::uint64_t point_seed =
            Digest().add(cfg.est.seed).add(static_cast<std::uint64_t>(g)).value();
        PointCloud cloud = sample_points(ifs, mu, cfg.n_points, depth, point_seed);
        EstimateConfig est_cfg = cfg.est;
        est_cfg.seed = point_seed;
        SweepRow row;
        row.translations = translations;
        row.estimate = estimate_dimension(cloud, est_cfg);
        row.dim_ly = ly_raw;
        row.dim_ly_capped = ly_capped;
        row.flagged_exceptional =
            row.estimate.value + 3.0 * row.estimate.ci_half_width < ly_capped;
        row.half_norm_warning = half_norm_warning;
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<UpperBoundRow> upper_bound_suite(
    const std::vector<std::pair<AffineIFS, ShiftMeasure>>& families, const SweepConfig& cfg) {
    std::vector<UpperBoundRow> rows;
    rows.reserve(families.size());
    for (std::size_t f = 0; f < families.size(); ++f) {
        const auto& [ifs, mu] = families[f];
        auto [ly_raw, ly_capped] = lyapunov_bound(ifs.linear_parts(), mu, cfg);
        const std::uint64_t fam_seed =
            Digest().add(cfg.est.seed).add(static_cast<std::uint64_t>(f)).add(ifs.digest()).value();
        int depth = cfg.depth;
        if (depth <= 0) {
            const double rho = ifs.uniform_contraction_factor();
            const double extent =
                rho < 1.0 ? std::max(ifs.max_translation_norm() / (1.0 - rho), 1e-9) : 1.0;
            depth = recommended_depth(ifs, mu, cfg.est.r_rel_min * extent, fam_seed);
        }
        PointCloud cloud = sample_points(ifs, mu, cfg.n_points, depth, fam_seed);
        EstimateConfig est_cfg = cfg.est;
        est_cfg.seed = fam_seed;
        UpperBoundRow row;
        row.label = "family_" + std::to_string(f);
        row.estimate = estimate_dimension(cloud, est_cfg);
        row.bound = ly_capped;
        row.pass = row.estimate.value - 3.0 * row.estimate.ci_half_width <= ly_capped + 1e-9;
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace affdim
