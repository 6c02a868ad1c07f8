#pragma once

// Monte Carlo validation layer: sample the pushed-forward measure, estimate
// local / projected / sliced dimensions, and run the testable predictions
// (upper bound, dimension conservation, translation sweeps).

#include "affdim/dimension.hpp"
#include "affdim/estimator_types.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace affdim {

/// N independent draws of the truncated coding map along words of the given
/// depth. Bit-for-bit reproducible for identical (ifs, mu, N, depth, seed).
PointCloud sample_points(const AffineIFS& ifs, const ShiftMeasure& mu,
                         std::int64_t n_points, int depth, std::uint64_t seed);

/// Word depth that pushes the deterministic tail bound below r_min / 10
/// (uniformly contracting systems), or the statistical fallback depth.
int recommended_depth(const AffineIFS& ifs, const ShiftMeasure& mu, double r_min,
                      std::uint64_t seed);

/// Correlation-integral or k-NN local dimension over [r_min, r_max].
DimEstimate local_dimension(const PointCloud& cloud, DimMethod method, double r_min,
                            double r_max, int n_radii, std::uint64_t pair_budget,
                            std::uint64_t seed);

/// local_dimension with the radius band taken relative to the cloud diameter.
DimEstimate estimate_dimension(const PointCloud& cloud, const EstimateConfig& cfg);

/// Dimension of the orthogonal projection onto span(w_perp_basis).
DimEstimate projected_dimension(const PointCloud& cloud, const Mat& w_perp_basis,
                                const EstimateConfig& cfg);

/// Median slab-slice dimension over random anchors: keep points whose
/// complement coordinates lie within slab_halfwidth of a cloud anchor and
/// estimate the dimension of the retained points inside span(w_basis).
DimEstimate slice_dimension(const PointCloud& cloud, const Mat& w_basis,
                            double slab_halfwidth, const EstimateConfig& cfg);

/// dim_total vs dim_proj + dim_slice for the subspace W = span(w_basis).
ConservationReport conservation_check(const PointCloud& cloud, const Mat& w_basis,
                                      const EstimateConfig& cfg);

struct SweepConfig {
    std::int64_t n_points = 200000;
    int depth = 0;  // 0 = auto from radii
    int n_steps = 20000;
    int n_reps = 8;
    EstimateConfig est;
};

struct SweepRow {
    std::vector<Vec> translations;
    DimEstimate estimate;
    double dim_ly = 0.0;         // uncapped
    double dim_ly_capped = 0.0;  // min(d, dim_ly)
    bool flagged_exceptional = false;
    // some ||M_j|| >= 1/2: the a.e.-translation equality is not guaranteed
    bool half_norm_warning = false;
};

/// For each translation tuple: build the IFS, sample, estimate, and compare
/// against min(d, Lyapunov dimension); grid points whose estimate + 3 CI falls
/// below the bound are flagged as candidate exceptional parameters.
std::vector<SweepRow> translation_sweep(const std::vector<Mat>& mats, const ShiftMeasure& mu,
                                        const std::vector<std::vector<Vec>>& grid,
                                        const SweepConfig& cfg);

struct UpperBoundRow {
    std::string label;
    DimEstimate estimate;
    double bound = 0.0;  // min(d, dim_LY)
    bool pass = false;
};

/// Checks estimate - 3 CI <= min(d, dim_LY) on each family. Failures are
/// recorded, not thrown.
std::vector<UpperBoundRow> upper_bound_suite(
    const std::vector<std::pair<AffineIFS, ShiftMeasure>>& families, const SweepConfig& cfg);

}  // namespace affdim
