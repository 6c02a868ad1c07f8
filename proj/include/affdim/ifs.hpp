#pragma once

// Affine iterated function systems S_j(x) = M_j x + a_j over a finite
// alphabet, composition along symbolic words, and finite truncations of the
// coding map that sends a symbol sequence to its attractor point.

#include "affdim/linalg.hpp"
#include "affdim/rng.hpp"

#include <cstdint>
#include <limits>
#include <vector>

namespace affdim {

class ShiftMeasure;

/// A finite word over the alphabet {0, ..., |Lambda|-1}.
using Word = std::vector<int>;

struct AffineMap {
    Mat matrix;       // d x d linear part
    Vec translation;  // d-vector

    int dim() const { return static_cast<int>(translation.size()); }
    Vec operator()(const Vec& x) const { return matrix * x + translation; }
};

class AffineIFS {
public:
    /// Builds and validates a system. Systems are usually required to have at
    /// least two maps; pass allow_single for degenerate one-map constructions.
    static AffineIFS create(std::vector<AffineMap> maps, bool allow_single = false);

    /// Convenience: one-dimensional system from (scale, offset) pairs.
    static AffineIFS line(const std::vector<std::pair<double, double>>& maps,
                          bool allow_single = false);

    int dimension() const { return dim_; }
    int alphabet_size() const { return static_cast<int>(maps_.size()); }
    const std::vector<AffineMap>& maps() const { return maps_; }
    const AffineMap& map(int j) const { return maps_[static_cast<std::size_t>(j)]; }
    std::vector<Mat> linear_parts() const;

    /// max_j ||M_j|| (operator norm); uniform contraction iff < 1.
    double uniform_contraction_factor() const { return rho_; }
    double max_translation_norm() const { return max_a_; }

    std::string digest() const;

private:
    AffineIFS() = default;
    std::vector<AffineMap> maps_;
    int dim_ = 0;
    double rho_ = 0.0;
    double max_a_ = 0.0;
};

void validate_word(const Word& w, int alphabet_size);

/// A truncated coding-map evaluation: the image of the origin under the word,
/// with a deterministic bound on the distance to any infinite extension. When
/// the system is not uniformly contracting the bound is +inf and tail_warning
/// is set; statistical convergence checks take over in that regime.
struct CodedPoint {
    Vec point;
    int depth = 0;
    double tail_bound = 0.0;
    bool tail_warning = false;
};

/// S_{w0} o S_{w1} o ... o S_{w_{n-1}} collapsed to a single affine map.
AffineMap compose(const AffineIFS& ifs, const Word& w);

/// Truncation of the coding map along w (depth |w|).
CodedPoint code_point(const AffineIFS& ifs, const Word& w);

struct ContractionEstimate {
    double lambda_hat = 0.0;  // -inf when the product collapses to rank 0
    double stderr_ = 0.0;
    bool is_contracting = false;
};

/// Monte Carlo estimate of the integrated top Lyapunov exponent
/// lim (1/n) E log ||M_{x_0} ... M_{x_{n-1}}||. is_contracting applies the
/// conservative 2-sigma rule lambda_hat + 2 stderr < 0.
ContractionEstimate average_contraction(const AffineIFS& ifs, const ShiftMeasure& mu,
                                        int n_steps, int n_reps, std::uint64_t seed);

struct SeparationCertificate {
    bool certified = false;
    Vec center;
    double radius = 0.0;
};

/// Searches for a closed ball B with S_j(B) subset B for all j and pairwise
/// disjoint images. Finding one certifies the strong separation condition;
/// not finding one proves nothing (the test is conservative).
SeparationCertificate strong_separation_certificate(const AffineIFS& ifs);

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

}  // namespace affdim
