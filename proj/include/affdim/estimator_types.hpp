#pragma once

#include "affdim/linalg.hpp"

#include <cstdint>
#include <string>

namespace affdim {

/// Immutable sampled cloud with provenance. points is N x d, row per sample.
struct PointCloud {
    Mat points;
    std::string ifs_digest;
    std::string measure_digest;
    int depth = 0;
    std::uint64_t seed = 0;
    bool tail_warning = false;  // sampled without a deterministic tail bound

    std::int64_t size() const { return points.rows(); }
    int dim() const { return static_cast<int>(points.cols()); }
    double diameter_estimate() const;  // bounding-box diagonal
};

enum class DimMethod { correlation, knn };

const char* dim_method_name(DimMethod m);

struct DimEstimate {
    double value = 0.0;
    double ci_half_width = 0.0;  // 95%
    DimMethod method = DimMethod::correlation;
    double r_min = 0.0, r_max = 0.0;  // radius band used (0 for knn)
    std::uint64_t n_pairs_or_k = 0;
};

struct EstimateConfig {
    DimMethod method = DimMethod::correlation;
    // radius band relative to the cloud diameter; 12 log-spaced radii with the
    // central 8 fitted avoids both the sampling-noise floor and macroscopic
    // curvature
    double r_rel_min = 1e-3;
    double r_rel_max = 1e-1;
    int n_radii = 12;
    int fit_trim = 2;  // radii dropped from each end of the band before fitting
    std::uint64_t pair_budget = 50000000;
    int knn_k = 20;
    int knn_queries = 4000;
    int knn_refs = 100000;
    int n_blocks = 20;     // bootstrap blocks over point index
    int n_bootstrap = 200;
    int n_anchors = 32;       // slice anchors
    double slab_rel = 0.005;  // slice slab halfwidth / cloud diameter
    std::uint64_t seed = 1;
};

struct ConservationReport {
    DimEstimate dim_total;
    DimEstimate dim_proj;
    DimEstimate dim_slice;
    Mat subspace;  // orthonormal basis of W (sliced along W, projected onto W-perp)
    double residual = 0.0;
    double pooled_ci = 0.0;
};

}  // namespace affdim
