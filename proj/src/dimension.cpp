#include "affdim/dimension.hpp"

#include "affdim/digest.hpp"
#include "affdim/errors.hpp"
#include "affdim/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <string>

namespace affdim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// log phi^s from descending log singular values; -inf encodes a zero value
double log_svf(const std::vector<double>& log_alpha, double s) {
    const int d = static_cast<int>(log_alpha.size());
    if (s <= 0.0) return 0.0;
    if (s >= static_cast<double>(d)) {
        double total = 0.0;
        for (double la : log_alpha) total += la;
        return total * (s / static_cast<double>(d));
    }
    const int k = static_cast<int>(std::floor(s));
    const double frac = s - static_cast<double>(k);
    double out = 0.0;
    for (int i = 0; i < k; ++i) out += log_alpha[static_cast<std::size_t>(i)];
    if (frac > 0.0) out += frac * log_alpha[static_cast<std::size_t>(k)];
    return out;
}

std::vector<double> log_singular_values(const Mat& a, double log_scale) {
    auto sv = singular_values(a);
    std::vector<double> out(sv.size());
    for (std::size_t i = 0; i < sv.size(); ++i)
        out[i] = sv[i] > 0.0 ? std::log(sv[i]) + log_scale : kNegInf;
    return out;
}

// streaming log(sum exp(l_k)) accumulator
class LogSum {
public:
    void add(double l) {
        if (l == kNegInf) return;
        if (l > max_) {
            if (max_ != kNegInf) sum_ = sum_ * std::exp(max_ - l) + 1.0;
            else sum_ = 1.0;
            max_ = l;
        } else {
            sum_ += std::exp(l - max_);
        }
    }
    void merge(const LogSum& other) {
        if (other.max_ == kNegInf) return;
        add(other.max_ + std::log(other.sum_));
    }
    double value() const { return max_ == kNegInf ? kNegInf : max_ + std::log(sum_); }

private:
    double max_ = kNegInf;
    double sum_ = 0.0;
};

void validate_matrix_family(const std::vector<Mat>& mats) {
    if (mats.empty()) throw ValidationError("pressure: empty matrix family");
    const Eigen::Index d = mats.front().rows();
    for (const auto& m : mats)
        if (m.rows() != d || m.cols() != d || !m.allFinite())
            throw ValidationError("pressure: matrices must be square, equal-size, finite");
}

bool pairwise_commuting(const std::vector<Mat>& mats) {
    for (std::size_t i = 0; i < mats.size(); ++i)
        for (std::size_t j = i + 1; j < mats.size(); ++j) {
            const double scale = 1.0 + op_norm(mats[i]) * op_norm(mats[j]);
            if ((mats[i] * mats[j] - mats[j] * mats[i]).cwiseAbs().maxCoeff() > 1e-12 * scale)
                return false;
        }
    return true;
}

// renormalized power: returns (A^k scaled, log of the removed scale)
std::pair<Mat, double> scaled_power(const Mat& a, int k) {
    const Eigen::Index d = a.rows();
    Mat acc = Mat::Identity(d, d);
    double log_scale = 0.0;
    for (int i = 0; i < k; ++i) {
        acc = acc * a;
        const double f = acc.norm();
        if (f > 0.0) {
            acc /= f;
            log_scale += std::log(f);
        } else {
            return {Mat::Zero(d, d), 0.0};
        }
    }
    return {acc, log_scale};
}

// number of count vectors (c_0..c_{k-1}) with sum n, i.e. C(n+k-1, k-1)
double composition_count(int n, int k) {
    double out = 1.0;
    for (int i = 1; i < k; ++i) out *= static_cast<double>(n + i) / i;
    return out;
}

// level-n sum over commuting families: products depend only on symbol counts
double commuting_level_sum(const std::vector<Mat>& mats, double s, int n) {
    const int k = static_cast<int>(mats.size());
    LogSum total;
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    // iterate all count vectors recursively
    auto rec = [&](auto&& self, int sym, int remaining) -> void {
        if (sym == k - 1) {
            counts[static_cast<std::size_t>(sym)] = remaining;
            double log_mult = std::lgamma(n + 1.0);
            const Eigen::Index d = mats.front().rows();
            Mat prod = Mat::Identity(d, d);
            double log_scale = 0.0;
            for (int j = 0; j < k; ++j) {
                log_mult -= std::lgamma(counts[static_cast<std::size_t>(j)] + 1.0);
                auto [p, ls] = scaled_power(mats[static_cast<std::size_t>(j)],
                                            counts[static_cast<std::size_t>(j)]);
                prod = prod * p;
                log_scale += ls;
                const double f = prod.norm();
                if (f > 0.0) {
                    prod /= f;
                    log_scale += std::log(f);
                } else {
                    return;  // exactly rank-0 product contributes phi = 0
                }
            }
            total.add(log_mult + log_svf(log_singular_values(prod, log_scale), s));
            return;
        }
        for (int c = 0; c <= remaining; ++c) {
            counts[static_cast<std::size_t>(sym)] = c;
            self(self, sym + 1, remaining - c);
        }
    };
    rec(rec, 0, n);
    return total.value();
}

// general level-n sum: depth-first enumeration with the prefix product kept
// on the recursion stack
double dfs_level_sum(const std::vector<Mat>& mats, double s, int n) {
    const int k = static_cast<int>(mats.size());

    auto branch = [&](int first) {
        LogSum acc;
        auto rec = [&](auto&& self, const Mat& prefix, double log_scale, int depth) -> void {
            if (depth == n) {
                acc.add(log_svf(log_singular_values(prefix, log_scale), s));
                return;
            }
            for (int j = 0; j < k; ++j) {
                Mat next = prefix * mats[static_cast<std::size_t>(j)];
                double ls = log_scale;
                const double f = next.norm();
                if (f > 0.0) {
                    next /= f;
                    ls += std::log(f);
                    self(self, next, ls, depth + 1);
                }
                // f == 0: the whole subtree is phi = 0
            }
        };
        Mat root = mats[static_cast<std::size_t>(first)];
        double ls = 0.0;
        const double f = root.norm();
        if (f == 0.0) return acc;
        root /= f;
        ls = std::log(f);
        if (n == 1) {
            acc.add(log_svf(log_singular_values(root, ls), s));
        } else {
            rec(rec, root, ls, 1);
        }
        return acc;
    };

    auto branches = map_chunks<LogSum>(k, [&](int first) { return branch(first); });
    LogSum total;
    for (const auto& b : branches) total.merge(b);
    return total.value();
}

}  // namespace

const char* dim_kind_name(DimKind k) {
    switch (k) {
        case DimKind::lyapunov: return "lyapunov";
        case DimKind::affinity: return "affinity";
        case DimKind::ly_formula: return "ly_formula";
        case DimKind::carpet_exact: return "carpet_exact";
    }
    return "unknown";
}

std::vector<double> exponent_partial_sums(const LyapunovSpectrum& spec) {
    std::vector<double> l(spec.exponents.size() + 1, 0.0);
    for (std::size_t i = 0; i < spec.exponents.size(); ++i) {
        const double lam = spec.exponents[i];
        l[i + 1] = std::isinf(lam) ? kInf : l[i] - lam * spec.multiplicities[i];
        if (std::isinf(l[i])) l[i + 1] = kInf;
    }
    return l;
}

namespace {

void validate_entropy_against_spectrum(const EntropySequence& h, const LyapunovSpectrum& spec) {
    const std::size_t s = spec.exponents.size();
    if (h.h.size() != s + 1)
        throw ValidationError("entropy sequence: expected s+1 = " + std::to_string(s + 1) +
                              " values, got " + std::to_string(h.h.size()));
    const double slack = 1e-9;
    for (std::size_t i = 0; i + 1 < h.h.size(); ++i) {
        if (h.h[i + 1] > h.h[i] + slack)
            throw ValidationError("entropy sequence: not monotone nonincreasing at index " +
                                  std::to_string(i + 1));
        const double lam = spec.exponents[i];
        if (!std::isinf(lam)) {
            const double cap = -lam * spec.multiplicities[i];
            if (h.h[i] - h.h[i + 1] > cap + slack)
                throw ValidationError("entropy sequence: drop at index " + std::to_string(i + 1) +
                                      " exceeds (-lambda) k");
        }
    }
    if (h.h.back() < -slack) throw ValidationError("entropy sequence: negative entry");
}

}  // namespace

DimValue ly_formula(const EntropySequence& h, const LyapunovSpectrum& spec) {
    validate_entropy_against_spectrum(h, spec);
    for (double lam : spec.exponents)
        if (!(lam < 0.0)) throw ValidationError("ly_formula: all exponents must be negative");

    double dim = 0.0;
    for (std::size_t i = 0; i < spec.exponents.size(); ++i) {
        const double lam = spec.exponents[i];
        if (std::isinf(lam)) continue;  // x / -inf = 0 convention
        dim += (h.h[i + 1] - h.h[i]) / lam;
    }
    DimValue out;
    out.value = std::max(dim, 0.0);
    out.kind = DimKind::ly_formula;
    Digest dg;
    dg.add(std::string("ly_formula")).add(h.h).add(spec.exponents);
    for (int k : spec.multiplicities) dg.add(k);
    out.inputs_digest = dg.hex();
    return out;
}

DimValue lyapunov_dimension(double h0, const LyapunovSpectrum& spec) {
    if (!(h0 >= 0.0)) throw ValidationError("lyapunov_dimension: h0 must be >= 0");
    if (spec.exponents.empty() || !(spec.exponents.front() < 0.0))
        throw ValidationError("lyapunov_dimension: top exponent must be negative");

    const auto l = exponent_partial_sums(spec);
    const auto d_cum = spec.cumulative_multiplicity();
    const int s = spec.count();
    const int d = spec.dim();

    double value = 0.0;
    if (!std::isinf(l[static_cast<std::size_t>(s)]) && h0 >= l[static_cast<std::size_t>(s)]) {
        value = static_cast<double>(d) * h0 / l[static_cast<std::size_t>(s)];
    } else {
        int j = 1;
        while (j < s && !(h0 < l[static_cast<std::size_t>(j)])) ++j;
        const double neg_lambda = -spec.exponents[static_cast<std::size_t>(j - 1)];
        const double increment =
            std::isinf(neg_lambda) ? 0.0 : (h0 - l[static_cast<std::size_t>(j - 1)]) / neg_lambda;
        value = static_cast<double>(d_cum[static_cast<std::size_t>(j - 1)]) + increment;
    }

    DimValue out;
    out.value = value;
    out.kind = DimKind::lyapunov;
    out.capped = std::min(static_cast<double>(d), value);
    Digest dg;
    dg.add(std::string("lyapunov_dimension")).add(h0).add(spec.exponents);
    for (int k : spec.multiplicities) dg.add(k);
    out.inputs_digest = dg.hex();
    return out;
}

double singular_value_function(const Mat& a, double s) {
    if (!(s >= 0.0)) throw ValidationError("singular_value_function: s must be >= 0");
    if (s == 0.0) return 1.0;
    return std::exp(log_svf(log_singular_values(a, 0.0), s));
}

double pressure(const std::vector<Mat>& mats, double s, int n) {
    validate_matrix_family(mats);
    if (n < 1) throw ValidationError("pressure: level n must be >= 1");
    if (!(s >= 0.0)) throw ValidationError("pressure: s must be >= 0");

    const int k = static_cast<int>(mats.size());
    double level = kNegInf;
    if (pairwise_commuting(mats)) {
        if (composition_count(n, k) > 1e7)
            throw ResourceError("pressure: too many count vectors at level " + std::to_string(n));
        level = commuting_level_sum(mats, s, n);
    } else {
        if (std::pow(static_cast<double>(k), static_cast<double>(n)) > 1e7)
            throw ResourceError("pressure: |Lambda|^n exceeds the 1e7 budget; use a smaller n");
        level = dfs_level_sum(mats, s, n);
    }
    return level / static_cast<double>(n);
}

namespace {

double pressure_root(const std::vector<Mat>& mats, int n, double tol, int d) {
    double lo = 0.0;
    double p_lo = pressure(mats, 0.0, n);
    if (p_lo < 0.0) {
        // log |Lambda| < 0 is impossible for |Lambda| >= 2; a one-map family
        // can reach it only at |Lambda| = 1 where the root is s = 0
        return 0.0;
    }
    double hi = 2.0 * d;
    double p_hi = pressure(mats, hi, n);
    while (p_hi > 0.0 && hi < 64.0 * d) {
        hi *= 2.0;
        p_hi = pressure(mats, hi, n);
    }
    if (p_hi > 0.0) throw NumericError("affinity_dimension: pressure has no root below 64 d");
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        const double p_mid = pressure(mats, mid, n);
        if (p_mid > 0.0) lo = mid; else hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

AffinityDimension affinity_dimension(const std::vector<Mat>& mats, int n, double tol) {
    validate_matrix_family(mats);
    if (n < 1) throw ValidationError("affinity_dimension: level n must be >= 1");
    if (!(tol > 0.0)) throw ValidationError("affinity_dimension: tol must be positive");
    for (const auto& m : mats)
        if (!(op_norm(m) < 1.0))
            throw ValidationError("affinity_dimension: requires all ||M_j|| < 1");

    const int d = static_cast<int>(mats.front().rows());
    AffinityDimension out;
    out.level = n;
    out.root_at_n = pressure_root(mats, n, tol, d);
    out.root_at_half_n = pressure_root(mats, std::max(1, n / 2), tol, d);
    out.richardson = 2.0 * out.root_at_n - out.root_at_half_n;
    out.fekete_gap = out.root_at_half_n - out.root_at_n;

    out.dim.value = out.root_at_n;
    out.dim.kind = DimKind::affinity;
    out.dim.capped = std::min(static_cast<double>(d), out.root_at_n);
    Digest dg;
    dg.add(std::string("affinity_dimension")).add(n).add(tol);
    for (const auto& m : mats)
        for (Eigen::Index r = 0; r < m.rows(); ++r)
            for (Eigen::Index c = 0; c < m.cols(); ++c) dg.add(m(r, c));
    out.dim.inputs_digest = dg.hex();
    return out;
}

namespace {

double shannon(const std::vector<double>& p) {
    double h = 0.0;
    for (double x : p)
        if (x > 0.0) h -= x * std::log(x);
    return h;
}

}  // namespace

AffineIFS carpet_ifs(int n_cols, int m_rows,
                     const std::vector<std::pair<int, int>>& digits) {
    std::vector<AffineMap> maps;
    maps.reserve(digits.size());
    for (auto [col, row] : digits) {
        AffineMap m;
        m.matrix = Mat::Zero(2, 2);
        m.matrix(0, 0) = 1.0 / n_cols;
        m.matrix(1, 1) = 1.0 / m_rows;
        m.translation = Vec::Zero(2);
        m.translation(0) = static_cast<double>(col) / n_cols;
        m.translation(1) = static_cast<double>(row) / m_rows;
        maps.push_back(std::move(m));
    }
    return AffineIFS::create(std::move(maps), /*allow_single=*/true);
}

CarpetOracle carpet_oracle(int n_cols, int m_rows,
                           const std::vector<std::pair<int, int>>& digits,
                           const std::vector<double>& p) {
    if (m_rows < 2 || m_rows > n_cols)
        throw ValidationError("carpet: need 2 <= m_rows <= n_cols");
    if (digits.empty()) throw ValidationError("carpet: empty digit set");
    std::set<std::pair<int, int>> seen;
    for (auto [col, row] : digits) {
        if (col < 0 || col >= n_cols || row < 0 || row >= m_rows)
            throw ValidationError("carpet: digit outside the grid");
        if (!seen.insert({col, row}).second)
            throw ValidationError("carpet: duplicate digit");
    }
    if (p.size() != digits.size())
        throw ValidationError("carpet: probability vector must match the digit set");
    double sum = 0.0;
    for (double x : p) {
        if (!(x > 0.0)) throw ValidationError("carpet: probabilities must be positive");
        sum += x;
    }
    if (std::abs(sum - 1.0) > 1e-12)
        throw ValidationError("carpet: probabilities must sum to 1");

    CarpetOracle out;
    out.row_marginal.assign(static_cast<std::size_t>(m_rows), 0.0);
    for (std::size_t i = 0; i < digits.size(); ++i)
        out.row_marginal[static_cast<std::size_t>(digits[i].second)] += p[i];

    const double hp = shannon(p);
    const double hq = shannon(out.row_marginal);
    const double log_m = std::log(static_cast<double>(m_rows));
    const double log_n = std::log(static_cast<double>(n_cols));

    LyapunovSpectrum spec;
    spec.gap_tol = std::max(0.05 * log_m, 1e-3);
    if (m_rows < n_cols) {
        // y contracts by 1/m (weak), x by 1/n (strong)
        spec.exponents = {-log_m, -log_n};
        spec.multiplicities = {1, 1};
        spec.stderrs = {0.0, 0.0};
        spec.raw_exponents = {-log_m, -log_n};
        out.h.h = {hp, hp - hq, 0.0};
    } else {
        spec.exponents = {-log_n};
        spec.multiplicities = {2};
        spec.stderrs = {0.0};
        spec.raw_exponents = {-log_n, -log_n};
        out.h.h = {hp, 0.0};
    }
    out.h.source = EntropySource::closed_form_carpet;
    out.spec = spec;
    out.dim_measure = ly_formula(out.h, spec);

    // attractor dimension: rows weighted by (digit count)^{log_n m}
    std::vector<int> t(static_cast<std::size_t>(m_rows), 0);
    for (auto [col, row] : digits) ++t[static_cast<std::size_t>(row)];
    const double alpha = log_m / log_n;
    double z = 0.0;
    for (int tj : t)
        if (tj > 0) z += std::pow(static_cast<double>(tj), alpha);
    out.dim_attractor.value = std::log(z) / log_m;
    out.dim_attractor.kind = DimKind::carpet_exact;
    Digest dg;
    dg.add(std::string("carpet")).add(n_cols).add(m_rows);
    for (auto [col, row] : digits) dg.add(col).add(row);
    dg.add(p);
    out.dim_attractor.inputs_digest = dg.hex();
    out.dim_measure.inputs_digest = dg.hex();
    return out;
}

SharpnessReport sharpness_check(const EntropySequence& h, const LyapunovSpectrum& spec) {
    validate_entropy_against_spectrum(h, spec);
    const auto l = exponent_partial_sums(spec);
    const int s = spec.count();
    const double h0 = h.h.front();
    const double tol = 1e-9 * (1.0 + std::abs(h0));

    SharpnessReport report;
    const double ls = l[static_cast<std::size_t>(s)];
    if (!std::isinf(ls) && h0 >= ls - tol) {
        report.condition = 1;
        for (int i = 1; i <= s; ++i)
            if (std::abs(h.h[static_cast<std::size_t>(i)] -
                         (h0 - l[static_cast<std::size_t>(i)])) > tol) {
                report.result = Sharpness::strict;
                report.witness = i;
                return report;
            }
        report.result = Sharpness::equal;
        return report;
    }

    int j = 1;
    while (j < s && !(h0 < l[static_cast<std::size_t>(j)])) ++j;
    report.condition = 2;
    for (int i = 1; i <= s; ++i) {
        const double want = i <= j - 1 ? h0 - l[static_cast<std::size_t>(i)] : 0.0;
        if (std::abs(h.h[static_cast<std::size_t>(i)] - want) > tol) {
            report.result = Sharpness::strict;
            report.witness = i;
            return report;
        }
    }
    report.result = Sharpness::equal;
    return report;
}

}  // namespace affdim
