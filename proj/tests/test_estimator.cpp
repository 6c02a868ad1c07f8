#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "affdim/errors.hpp"
#include "affdim/estimator.hpp"

#include <cmath>

using namespace affdim;

namespace {

AffineIFS cantor_thirds() { return AffineIFS::line({{1.0 / 3.0, 0.0}, {1.0 / 3.0, 2.0 / 3.0}}); }

AffineIFS unit_square_quarters() {
    std::vector<AffineMap> maps;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            AffineMap m;
            m.matrix = 0.5 * Mat::Identity(2, 2);
            m.translation = Vec(2);
            m.translation << 0.5 * i, 0.5 * j;
            maps.push_back(m);
        }
    return AffineIFS::create(std::move(maps));
}

AffineIFS cantor_product() {
    std::vector<AffineMap> maps;
    for (double tx : {0.0, 2.0 / 3.0})
        for (double ty : {0.0, 2.0 / 3.0}) {
            AffineMap m;
            m.matrix = (1.0 / 3.0) * Mat::Identity(2, 2);
            m.translation = Vec(2);
            m.translation << tx, ty;
            maps.push_back(m);
        }
    return AffineIFS::create(std::move(maps));
}

ShiftMeasure uniform(int n) {
    return ShiftMeasure::bernoulli(std::vector<double>(static_cast<std::size_t>(n),
                                                       1.0 / n));
}

const double kCantorDim = std::log(2.0) / std::log(3.0);

}  // namespace

TEST_CASE("sample_points: Cantor cloud statistics") {
    PointCloud cloud = sample_points(cantor_thirds(), uniform(2), 100000, 40, 3);
    CHECK(cloud.points.minCoeff() >= 0.0);
    CHECK(cloud.points.maxCoeff() <= 1.0);
    const double mean = cloud.points.col(0).mean();
    // Var of the Cantor measure is 1/8; 3 sigma of the sample mean
    CHECK(std::abs(mean - 0.5) < 3.0 * std::sqrt(1.0 / 8.0 / 100000.0));
    CHECK_FALSE(cloud.tail_warning);
}

TEST_CASE("sample_points: Lebesgue square covariance") {
    PointCloud cloud = sample_points(unit_square_quarters(), uniform(4), 100000, 30, 5);
    Mat centered = cloud.points.rowwise() - cloud.points.colwise().mean();
    Mat cov = centered.transpose() * centered / static_cast<double>(cloud.size());
    CHECK(std::abs(cov(0, 0) - 1.0 / 12.0) < 0.05 / 12.0);
    CHECK(std::abs(cov(1, 1) - 1.0 / 12.0) < 0.05 / 12.0);
    CHECK(std::abs(cov(0, 1)) < 0.002);
}

TEST_CASE("sample_points: atomic measure gives a constant cloud") {
    AffineIFS single = AffineIFS::line({{0.5, 1.0}}, /*allow_single=*/true);
    PointCloud cloud = sample_points(single, ShiftMeasure::bernoulli({1.0}), 500, 60, 9);
    for (std::int64_t i = 0; i < cloud.size(); ++i)
        CHECK(std::abs(cloud.points(i, 0) - 2.0) < 1e-12);
}

TEST_CASE("sample_points: bit-for-bit reproducibility") {
    PointCloud a = sample_points(cantor_thirds(), uniform(2), 70000, 40, 123);
    PointCloud b = sample_points(cantor_thirds(), uniform(2), 70000, 40, 123);
    CHECK((a.points - b.points).cwiseAbs().maxCoeff() == 0.0);
    PointCloud c = sample_points(cantor_thirds(), uniform(2), 70000, 40, 124);
    CHECK((a.points - c.points).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("sample_points: refuses non-contracting systems") {
    AffineIFS expanding = AffineIFS::line({{1.1, 0.0}, {1.2, 1.0}});
    CHECK_THROWS_AS(sample_points(expanding, uniform(2), 1000, 20, 3), NumericError);
}

TEST_CASE("sample_points: average-contracting system beyond uniform contraction") {
    // one expanding map, strongly contracting partner: contracting on average
    AffineIFS mixed = AffineIFS::line({{1.5, 0.0}, {0.05, 1.0}});
    PointCloud cloud = sample_points(mixed, uniform(2), 2000, 200, 3);
    CHECK(cloud.tail_warning);
    CHECK(cloud.points.allFinite());
}

TEST_CASE("local_dimension: Cantor measure via the correlation integral") {
    PointCloud cloud = sample_points(cantor_thirds(), uniform(2), 200000, 40, 7);
    DimEstimate est = local_dimension(cloud, DimMethod::correlation, 1e-4, 1e-1, 16,
                                      10000000, 7);
    CHECK(std::abs(est.value - kCantorDim) < 0.02);
    CHECK(est.ci_half_width > 0.0);
    CHECK(est.ci_half_width < 0.05);
}

TEST_CASE("local_dimension: slope is stable under halving the radius band") {
    PointCloud cloud = sample_points(cantor_thirds(), uniform(2), 200000, 40, 7);
    DimEstimate full = local_dimension(cloud, DimMethod::correlation, 1e-4, 1e-1, 16,
                                       10000000, 7);
    DimEstimate half = local_dimension(cloud, DimMethod::correlation, 1e-3, 1e-1, 12,
                                       10000000, 7);
    CHECK(std::abs(full.value - half.value) < 0.05);
}

TEST_CASE("local_dimension: atom collapses to zero") {
    AffineIFS single = AffineIFS::line({{0.5, 0.0}}, /*allow_single=*/true);
    PointCloud cloud = sample_points(single, ShiftMeasure::bernoulli({1.0}), 2000, 60, 9);
    EstimateConfig cfg;
    cfg.seed = 9;
    DimEstimate est = estimate_dimension(cloud, cfg);
    CHECK(est.value == doctest::Approx(0.0));
    cfg.method = DimMethod::knn;
    CHECK(estimate_dimension(cloud, cfg).value == doctest::Approx(0.0));
}

TEST_CASE("local_dimension: insufficient pairs raises") {
    PointCloud cloud = sample_points(cantor_thirds(), uniform(2), 40, 40, 9);
    CHECK_THROWS_AS(
        local_dimension(cloud, DimMethod::correlation, 1e-9, 1e-8, 8, 1000000, 3),
        NumericError);
}

TEST_CASE("estimator consistency: correlation and knn agree on the square") {
    PointCloud cloud = sample_points(unit_square_quarters(), uniform(4), 300000, 40, 11);
    EstimateConfig corr;
    corr.pair_budget = 20000000;
    corr.seed = 11;
    DimEstimate c = estimate_dimension(cloud, corr);
    EstimateConfig knn = corr;
    knn.method = DimMethod::knn;
    DimEstimate k = estimate_dimension(cloud, knn);
    const double pooled = std::sqrt(c.ci_half_width * c.ci_half_width +
                                    k.ci_half_width * k.ci_half_width);
    CHECK(std::abs(c.value - 2.0) < 0.05);
    CHECK(std::abs(k.value - 2.0) < 0.05);
    CHECK(std::abs(c.value - k.value) < std::max(pooled, 0.05));
}

TEST_CASE("projected_dimension: square onto lines and the identity projection") {
    PointCloud cloud = sample_points(unit_square_quarters(), uniform(4), 200000, 40, 13);
    EstimateConfig cfg;
    cfg.pair_budget = 10000000;
    cfg.seed = 13;

    Mat axis(2, 1);
    axis << 1.0, 0.0;
    DimEstimate ax = projected_dimension(cloud, axis, cfg);
    CHECK(std::abs(ax.value - 1.0) < 0.05);

    Mat diag(2, 1);
    diag << std::cos(0.5), std::sin(0.5);
    DimEstimate dg = projected_dimension(cloud, diag, cfg);
    CHECK(std::abs(dg.value - 1.0) < 0.05);

    DimEstimate ident = projected_dimension(cloud, Mat::Identity(2, 2), cfg);
    DimEstimate total = estimate_dimension(cloud, cfg);
    CHECK(ident.value == doctest::Approx(total.value).epsilon(1e-12));

    // projection never increases dimension
    CHECK(ax.value <= total.value + ax.ci_half_width + total.ci_half_width);
    CHECK(ax.value <= 1.0 + ax.ci_half_width + 0.05);

    Mat skewed(2, 1);
    skewed << 1.0, 1.0;
    CHECK_THROWS_AS(projected_dimension(cloud, skewed, cfg), ValidationError);
}

TEST_CASE("slice_dimension: vertical slab of the square is one-dimensional") {
    PointCloud cloud = sample_points(unit_square_quarters(), uniform(4), 200000, 40, 17);
    EstimateConfig cfg;
    cfg.pair_budget = 20000000;
    cfg.seed = 17;
    Mat w(2, 1);
    w << 0.0, 1.0;  // slice along the y axis: slab in x
    DimEstimate est = slice_dimension(cloud, w, 0.005 * cloud.diameter_estimate(), cfg);
    CHECK(std::abs(est.value - 1.0) < 0.1);
}

TEST_CASE("slice_dimension: product Cantor slices to the factor dimension") {
    PointCloud cloud = sample_points(cantor_product(), uniform(4), 200000, 40, 19);
    EstimateConfig cfg;
    cfg.pair_budget = 20000000;
    cfg.r_rel_min = 3e-3;
    cfg.seed = 19;
    Mat w(2, 1);
    w << 1.0, 0.0;
    DimEstimate est = slice_dimension(cloud, w, 0.001 * cloud.diameter_estimate(), cfg);
    CHECK(std::abs(est.value - kCantorDim) < 0.05);
}

TEST_CASE("slice_dimension: starving the slab raises after one retry") {
    PointCloud cloud = sample_points(unit_square_quarters(), uniform(4), 5000, 30, 21);
    EstimateConfig cfg;
    cfg.seed = 21;
    Mat w(2, 1);
    w << 0.0, 1.0;
    CHECK_THROWS_AS(slice_dimension(cloud, w, 1e-7, cfg), NumericError);
}

TEST_CASE("conservation_check: Lebesgue square conserves through any direction") {
    PointCloud cloud = sample_points(unit_square_quarters(), uniform(4), 300000, 40, 23);
    EstimateConfig cfg;
    cfg.pair_budget = 20000000;
    cfg.seed = 23;
    Mat w(2, 1);
    w << std::cos(1.1), std::sin(1.1);
    ConservationReport rep = conservation_check(cloud, w, cfg);
    CHECK(std::abs(rep.dim_total.value - 2.0) < 0.05);
    CHECK(std::abs(rep.dim_proj.value - 1.0) < 0.05);
    CHECK(std::abs(rep.dim_slice.value - 1.0) < 0.1);
    CHECK(std::abs(rep.residual) < 0.15);
    CHECK(rep.pooled_ci > 0.0);
}

TEST_CASE("translation_sweep: overlapping atom flagged, generic points at full dimension") {
    std::vector<Mat> mats(2, Mat::Constant(1, 1, 0.5));
    std::vector<std::vector<Vec>> grid;
    for (double a : {0.0, 0.25, 0.5, 1.0}) {
        std::vector<Vec> pt = {Vec::Zero(1), Vec::Constant(1, a)};
        grid.push_back(pt);
    }
    SweepConfig cfg;
    cfg.n_points = 100000;
    cfg.n_steps = 10000;
    cfg.n_reps = 4;
    cfg.est.pair_budget = 5000000;
    cfg.est.seed = 29;
    auto rows = translation_sweep(mats, uniform(2), grid, cfg);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].estimate.value <= 0.05);
    CHECK(rows[0].flagged_exceptional);
    CHECK(rows[0].dim_ly_capped == doctest::Approx(1.0).epsilon(1e-6));
    for (std::size_t g = 1; g < rows.size(); ++g) {
        CHECK(std::abs(rows[g].estimate.value - 1.0) < 0.05);
        CHECK_FALSE(rows[g].flagged_exceptional);
    }
}

TEST_CASE("upper_bound_suite: hand-picked families satisfy the bound") {
    std::vector<std::pair<AffineIFS, ShiftMeasure>> families;
    families.emplace_back(cantor_thirds(), uniform(2));
    families.emplace_back(unit_square_quarters(), uniform(4));
    SweepConfig cfg;
    cfg.n_points = 100000;
    cfg.n_steps = 10000;
    cfg.n_reps = 4;
    cfg.est.pair_budget = 5000000;
    cfg.est.seed = 31;
    auto rows = upper_bound_suite(families, cfg);
    for (const auto& row : rows) CHECK(row.pass);
    // Cantor: dim_LY = log2/log3 and the bound is tight
    CHECK(std::abs(rows[0].bound - kCantorDim) < 0.02);
    CHECK(std::abs(rows[1].bound - 2.0) < 0.05);
}

TEST_CASE("estimates are deterministic given the seed") {
    PointCloud cloud = sample_points(cantor_thirds(), uniform(2), 100000, 40, 37);
    EstimateConfig cfg;
    cfg.pair_budget = 5000000;
    cfg.seed = 37;
    DimEstimate a = estimate_dimension(cloud, cfg);
    DimEstimate b = estimate_dimension(cloud, cfg);
    CHECK(a.value == b.value);
    CHECK(a.ci_half_width == b.ci_half_width);
}
