#include "affdim/ifs.hpp"

#include "affdim/cocycle.hpp"
#include "affdim/digest.hpp"
#include "affdim/errors.hpp"
#include "affdim/measure.hpp"

#include <cmath>
#include <string>

namespace affdim {

namespace {

void check_finite(const Mat& m, const Vec& v, std::size_t index) {
    if (!m.allFinite() || !v.allFinite())
        throw ValidationError("map " + std::to_string(index) + ": non-finite entries");
}

}  // namespace

AffineIFS AffineIFS::create(std::vector<AffineMap> maps, bool allow_single) {
    if (maps.empty()) throw ValidationError("ifs: needs at least one map");
    if (maps.size() < 2 && !allow_single)
        throw ValidationError("ifs: needs at least two maps (pass allow_single to override)");
    AffineIFS ifs;
    ifs.dim_ = maps.front().dim();
    if (ifs.dim_ < 1) throw ValidationError("ifs: dimension must be >= 1");
    for (std::size_t j = 0; j < maps.size(); ++j) {
        const auto& m = maps[j];
        if (m.matrix.rows() != ifs.dim_ || m.matrix.cols() != ifs.dim_ ||
            m.translation.size() != ifs.dim_)
            throw ValidationError("map " + std::to_string(j) + ": dimension mismatch");
        check_finite(m.matrix, m.translation, j);
        ifs.rho_ = std::max(ifs.rho_, op_norm(m.matrix));
        ifs.max_a_ = std::max(ifs.max_a_, m.translation.norm());
    }
    ifs.maps_ = std::move(maps);
    return ifs;
}

AffineIFS AffineIFS::line(const std::vector<std::pair<double, double>>& maps,
                          bool allow_single) {
    std::vector<AffineMap> out;
    out.reserve(maps.size());
    for (auto [scale, offset] : maps) {
        AffineMap m;
        m.matrix = Mat::Constant(1, 1, scale);
        m.translation = Vec::Constant(1, offset);
        out.push_back(std::move(m));
    }
    return create(std::move(out), allow_single);
}

std::vector<Mat> AffineIFS::linear_parts() const {
    std::vector<Mat> out;
    out.reserve(maps_.size());
    for (const auto& m : maps_) out.push_back(m.matrix);
    return out;
}

std::string AffineIFS::digest() const {
    Digest dg;
    dg.add(dim_).add(static_cast<int>(maps_.size()));
    for (const auto& m : maps_) {
        for (Eigen::Index r = 0; r < m.matrix.rows(); ++r)
            for (Eigen::Index c = 0; c < m.matrix.cols(); ++c) dg.add(m.matrix(r, c));
        for (Eigen::Index i = 0; i < m.translation.size(); ++i) dg.add(m.translation(i));
    }
    return dg.hex();
}

void validate_word(const Word& w, int alphabet_size) {
    if (w.empty()) throw ValidationError("word: must be nonempty");
    for (int s : w)
        if (s < 0 || s >= alphabet_size)
            throw ValidationError("word: symbol " + std::to_string(s) +
                                  " outside alphabet of size " + std::to_string(alphabet_size));
}

AffineMap compose(const AffineIFS& ifs, const Word& w) {
    validate_word(w, ifs.alphabet_size());
    AffineMap acc = ifs.map(w[0]);
    for (std::size_t k = 1; k < w.size(); ++k) {
        const AffineMap& next = ifs.map(w[k]);
        acc.translation = acc.translation + acc.matrix * next.translation;
        acc.matrix = acc.matrix * next.matrix;
    }
    return acc;
}

CodedPoint code_point(const AffineIFS& ifs, const Word& w) {
    validate_word(w, ifs.alphabet_size());
    AffineMap whole = compose(ifs, w);
    CodedPoint out;
    out.point = whole.translation;  // image of the origin
    out.depth = static_cast<int>(w.size());
    const double rho = ifs.uniform_contraction_factor();
    if (rho < 1.0) {
        out.tail_bound = op_norm(whole.matrix) * ifs.max_translation_norm() / (1.0 - rho);
    } else {
        out.tail_bound = std::numeric_limits<double>::infinity();
        out.tail_warning = true;
    }
    return out;
}

ContractionEstimate average_contraction(const AffineIFS& ifs, const ShiftMeasure& mu,
                                        int n_steps, int n_reps, std::uint64_t seed) {
    if (n_steps < 100) throw ValidationError("average_contraction: n_steps must be >= 100");
    if (n_reps < 1) throw ValidationError("average_contraction: n_reps must be >= 1");
    auto [lambda, se] = top_exponent(ifs.linear_parts(), mu, n_steps, n_reps, seed);
    ContractionEstimate est;
    est.lambda_hat = lambda;
    est.stderr_ = se;
    est.is_contracting = lambda + 2.0 * se < 0.0;
    return est;
}

SeparationCertificate strong_separation_certificate(const AffineIFS& ifs) {
    const double rho = ifs.uniform_contraction_factor();
    if (rho >= 1.0)
        throw ValidationError("strong_separation_certificate: requires all ||M_j|| < 1");

    const int d = ifs.dimension();
    const int n_maps = ifs.alphabet_size();

    // centroid of the attractor, sampled with uniform symbol draws
    // (fixed internal seed: the certificate must be deterministic)
    Rng rng(0x5343455254ULL);
    const int n_pts = 4096;
    const int depth = std::max(16, static_cast<int>(std::ceil(
                                       std::log(1e-6) / std::log(std::max(rho, 1e-9)))));
    Vec centroid = Vec::Zero(d);
    double spread = 0.0;
    std::vector<Vec> pts;
    pts.reserve(n_pts);
    for (int i = 0; i < n_pts; ++i) {
        Vec x = Vec::Zero(d);
        for (int k = 0; k < depth; ++k) {
            const int j = static_cast<int>(rng.below(static_cast<std::uint64_t>(n_maps)));
            const AffineMap& m = ifs.map(j);
            x = m.matrix * x + m.translation;
        }
        pts.push_back(x);
        centroid += x;
    }
    centroid /= n_pts;
    for (const auto& x : pts) spread = std::max(spread, (x - centroid).norm());
    if (spread == 0.0) spread = std::max(ifs.max_translation_norm(), 1.0);

    std::vector<double> norms(static_cast<std::size_t>(n_maps));
    std::vector<Vec> images(static_cast<std::size_t>(n_maps));
    for (int j = 0; j < n_maps; ++j) {
        norms[static_cast<std::size_t>(j)] = op_norm(ifs.map(j).matrix);
        images[static_cast<std::size_t>(j)] = ifs.map(j)(centroid);
    }

    // radius grid around the sampled spread; the image of B(c, r) under map j
    // sits inside B(S_j(c), ||M_j|| r), so both checks below are sound
    SeparationCertificate cert;
    for (int g = 0; g < 64; ++g) {
        const double r = spread * (0.9 + 0.05 * g);
        bool ok = true;
        const double slack = 1e-12 * (1.0 + r);
        for (int j = 0; j < n_maps && ok; ++j) {
            const double rj = norms[static_cast<std::size_t>(j)] * r;
            if ((images[static_cast<std::size_t>(j)] - centroid).norm() + rj > r + slack)
                ok = false;
        }
        for (int i = 0; i < n_maps && ok; ++i)
            for (int j = i + 1; j < n_maps && ok; ++j) {
                const double sum = (norms[static_cast<std::size_t>(i)] +
                                    norms[static_cast<std::size_t>(j)]) * r;
                if ((images[static_cast<std::size_t>(i)] -
                     images[static_cast<std::size_t>(j)]).norm() <= sum + slack)
                    ok = false;
            }
        if (ok) {
            cert.certified = true;
            cert.center = centroid;
            cert.radius = r;
            return cert;
        }
    }
    cert.center = centroid;
    cert.radius = 0.0;
    return cert;
}

}  // namespace affdim
