#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "affdim/dimension.hpp"
#include "affdim/errors.hpp"

#include <cmath>

using namespace affdim;

namespace {

LyapunovSpectrum make_spec(std::vector<double> exps, std::vector<int> mults) {
    LyapunovSpectrum spec;
    spec.exponents = std::move(exps);
    spec.multiplicities = std::move(mults);
    spec.stderrs.assign(spec.exponents.size(), 0.0);
    spec.gap_tol = 1e-3;
    for (std::size_t i = 0; i < spec.exponents.size(); ++i)
        for (int k = 0; k < spec.multiplicities[i]; ++k)
            spec.raw_exponents.push_back(spec.exponents[i]);
    return spec;
}

EntropySequence seq(std::vector<double> h) {
    EntropySequence out;
    out.h = std::move(h);
    return out;
}

const double kLog2 = std::log(2.0);
const double kLog3 = std::log(3.0);

}  // namespace

TEST_CASE("ly_formula: self-similar case is entropy over exponent") {
    auto spec = make_spec({std::log(1.0 / 3.0)}, {1});
    DimValue v = ly_formula(seq({kLog2, 0.0}), spec);
    CHECK(v.value == doctest::Approx(kLog2 / kLog3).epsilon(1e-14));
    CHECK(v.kind == DimKind::ly_formula);
    CHECK(!v.inputs_digest.empty());
}

TEST_CASE("ly_formula: constant entropies give zero") {
    auto spec = make_spec({-0.4, -0.9}, {1, 1});
    CHECK(ly_formula(seq({0.7, 0.7, 0.7}), spec).value == doctest::Approx(0.0));
}

TEST_CASE("ly_formula: -inf exponents contribute nothing") {
    auto spec = make_spec({-0.5, kNegInf}, {1, 1});
    DimValue v = ly_formula(seq({kLog2, 0.3, 0.0}), spec);
    CHECK(v.value == doctest::Approx((kLog2 - 0.3) / 0.5).epsilon(1e-12));
}

TEST_CASE("ly_formula: rejects bad entropy sequences") {
    auto spec = make_spec({-0.5, -1.0}, {1, 1});
    CHECK_THROWS_AS(ly_formula(seq({0.3, 0.5, 0.0}), spec), ValidationError);   // not monotone
    CHECK_THROWS_AS(ly_formula(seq({0.5, 0.0}), spec), ValidationError);        // wrong length
    CHECK_THROWS_AS(ly_formula(seq({2.0, 0.0, 0.0}), spec), ValidationError);   // drop over cap
    auto bad = make_spec({0.1, -1.0}, {1, 1});
    CHECK_THROWS_AS(ly_formula(seq({0.1, 0.05, 0.0}), bad), ValidationError);   // positive exponent
}

TEST_CASE("lyapunov_dimension: interior and boundary branches") {
    auto spec = make_spec({std::log(0.5), std::log(1.0 / 3.0)}, {1, 1});
    CHECK(lyapunov_dimension(kLog3, spec).value ==
          doctest::Approx(1.0 + (kLog3 - kLog2) / kLog3).epsilon(1e-14));
    CHECK(lyapunov_dimension(kLog2, spec).value == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(lyapunov_dimension(0.0, spec).value == doctest::Approx(0.0));
    // saturated branch: d h0 / L_s
    const double ls = kLog2 + kLog3;
    CHECK(lyapunov_dimension(2.0, spec).value == doctest::Approx(2.0 * 2.0 / ls).epsilon(1e-14));
    CHECK(*lyapunov_dimension(2.0, spec).capped == doctest::Approx(2.0));
}

TEST_CASE("lyapunov_dimension: continuity across the branch thresholds") {
    auto spec = make_spec({-0.3, -0.8, -1.7}, {1, 2, 1});
    const auto l = exponent_partial_sums(spec);
    for (std::size_t j = 1; j < l.size(); ++j) {
        const double lo = lyapunov_dimension(l[j] - 1e-9, spec).value;
        const double hi = lyapunov_dimension(l[j] + 1e-9, spec).value;
        CHECK(std::abs(hi - lo) < 1e-7);
    }
}

TEST_CASE("lyapunov_dimension: -inf bottom exponent freezes the increment") {
    auto spec = make_spec({-0.5, kNegInf}, {1, 1});
    // h0 above L_1: the second branch divides by infinity
    CHECK(lyapunov_dimension(0.7, spec).value == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(lyapunov_dimension(0.2, spec).value == doctest::Approx(0.4).epsilon(1e-14));
}

TEST_CASE("singular_value_function: examples") {
    Mat a = Mat::Zero(2, 2);
    a.diagonal() << 0.5, 1.0 / 3.0;
    CHECK(singular_value_function(a, 1.5) ==
          doctest::Approx(0.5 / std::sqrt(3.0)).epsilon(1e-14));
    CHECK(singular_value_function(a, 0.0) == doctest::Approx(1.0));
    // conformal: r^s for s <= d
    Mat r(2, 2);
    r << 0.0, -0.3, 0.3, 0.0;
    CHECK(singular_value_function(r, 1.7) ==
          doctest::Approx(std::pow(0.3, 1.7)).epsilon(1e-13));
    // s > d continuation
    CHECK(singular_value_function(a, 3.0) ==
          doctest::Approx(std::pow(0.5 / 3.0, 1.5)).epsilon(1e-13));
    // rank deficiency kills phi^s beyond the rank
    Mat sing = Mat::Zero(2, 2);
    sing(0, 0) = 0.5;
    CHECK(singular_value_function(sing, 1.5) == doctest::Approx(0.0));
    CHECK(singular_value_function(sing, 0.5) ==
          doctest::Approx(std::pow(0.5, 0.5)).epsilon(1e-13));
}

TEST_CASE("pressure: conformal families evaluate to log(N r^s) at every level") {
    std::vector<Mat> mats(3, Mat::Zero(2, 2));
    Mat rot(2, 2);
    for (int j = 0; j < 3; ++j) {
        const double t = 0.4 * (j + 1);
        rot << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
        mats[static_cast<std::size_t>(j)] = 0.4 * rot;
    }
    for (int n : {1, 2, 4, 6})
        for (double s : {0.0, 0.7, 1.4, 2.0})
            CHECK(pressure(mats, s, n) ==
                  doctest::Approx(std::log(3.0) + s * std::log(0.4)).epsilon(1e-9));
}

TEST_CASE("pressure: s = 0 counts words") {
    std::vector<Mat> mats(5, 0.3 * Mat::Identity(1, 1));
    CHECK(pressure(mats, 0.0, 3) == doctest::Approx(std::log(5.0)).epsilon(1e-13));
}

TEST_CASE("pressure: strictly decreasing in s and subadditive in n") {
    std::vector<Mat> mats = {Mat(2, 2), Mat(2, 2)};
    mats[0] << 0.5, 0.1, 0.0, 0.2;
    mats[1] << 0.3, -0.2, 0.1, 0.4;
    double prev = pressure(mats, 0.0, 5);
    for (double s : {0.4, 0.8, 1.2, 1.6, 2.0}) {
        const double cur = pressure(mats, s, 5);
        CHECK(cur < prev);
        prev = cur;
    }
    for (double s : {0.5, 1.3}) {
        const double p2 = pressure(mats, s, 2);
        const double p3 = pressure(mats, s, 3);
        const double p5 = pressure(mats, s, 5);
        CHECK(5.0 * p5 <= 2.0 * p2 + 3.0 * p3 + 1e-12);
    }
}

TEST_CASE("pressure: commuting fast path agrees with direct enumeration") {
    // diagonal family: commuting, so both code paths must agree; compare the
    // multinomial path against a brute-force sum over all words
    std::vector<Mat> mats(2, Mat::Zero(2, 2));
    mats[0].diagonal() << 0.5, 0.25;
    mats[1].diagonal() << 1.0 / 3.0, 0.2;
    const int n = 6;
    for (double s : {0.3, 1.1, 1.9}) {
        double direct = 0.0;
        for (int bits = 0; bits < (1 << n); ++bits) {
            Mat prod = Mat::Identity(2, 2);
            for (int k = 0; k < n; ++k)
                prod = prod * mats[static_cast<std::size_t>((bits >> k) & 1)];
            direct += singular_value_function(prod, s);
        }
        CHECK(pressure(mats, s, n) == doctest::Approx(std::log(direct) / n).epsilon(1e-11));
    }
}

TEST_CASE("pressure: budget guard") {
    // 3 non-commuting maps at level 20 would need 3^20 > 1e7 products
    std::vector<Mat> mats = {Mat(2, 2), Mat(2, 2), Mat(2, 2)};
    mats[0] << 0.5, 0.1, 0.0, 0.2;
    mats[1] << 0.3, -0.2, 0.1, 0.4;
    mats[2] << 0.1, 0.2, -0.3, 0.1;
    CHECK_THROWS_AS(pressure(mats, 1.0, 20), ResourceError);
}

TEST_CASE("affinity_dimension: conformal similarity dimension to 1e-9 at every level") {
    std::vector<Mat> mats(2, Mat::Constant(1, 1, 1.0 / 3.0));
    for (int n : {1, 2, 3, 6, 12}) {
        AffinityDimension aff = affinity_dimension(mats, n, 1e-12);
        CHECK(std::abs(aff.root_at_n - kLog2 / kLog3) < 1e-9);
    }
    // four planar half-scale similarities: root exactly at s = 2
    std::vector<Mat> quads(4, 0.5 * Mat::Identity(2, 2));
    AffinityDimension aff = affinity_dimension(quads, 4, 1e-12);
    CHECK(std::abs(aff.root_at_n - 2.0) < 1e-9);
}

TEST_CASE("affinity_dimension: carpet linear parts and level doubling") {
    // three copies of diag(1/3, 1/2): P_n is level-independent with root
    // 1 + (log3 - log2)/log3
    std::vector<Mat> mats(3, Mat::Zero(2, 2));
    for (auto& m : mats) m.diagonal() << 1.0 / 3.0, 0.5;
    const double expect = 1.0 + (kLog3 - kLog2) / kLog3;
    AffinityDimension aff = affinity_dimension(mats, 12, 1e-11);
    CHECK(std::abs(aff.root_at_n - expect) < 1e-9);
    CHECK(std::abs(aff.root_at_n - aff.root_at_half_n) < 1e-9);

    // genuinely level-dependent diagonal family: doubling gap under 1e-3 by n=12
    std::vector<Mat> pair(2, Mat::Zero(2, 2));
    pair[0].diagonal() << 0.5, 0.25;
    pair[1].diagonal() << 1.0 / 3.0, 0.2;
    AffinityDimension a12 = affinity_dimension(pair, 12, 1e-11);
    AffinityDimension a24 = affinity_dimension(pair, 24, 1e-11);
    CHECK(std::abs(a12.root_at_n - a12.root_at_half_n) >= 0.0);  // gap reported
    CHECK(std::abs(a24.root_at_n - a12.root_at_n) < 1e-3);
    CHECK(a12.level == 12);
    CHECK(*a12.dim.capped <= 2.0);
}

TEST_CASE("affinity_dimension: requires contracting matrices") {
    std::vector<Mat> mats(2, 1.2 * Mat::Identity(1, 1));
    CHECK_THROWS_AS(affinity_dimension(mats, 4, 1e-10), ValidationError);
}

TEST_CASE("carpet_oracle: the (3,2) three-digit example") {
    CarpetOracle oracle = carpet_oracle(3, 2, {{0, 0}, {1, 0}, {2, 1}},
                                        {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
    const double hq = kLog3 - (2.0 / 3.0) * kLog2;
    CHECK(oracle.h.h[0] == doctest::Approx(kLog3).epsilon(1e-14));
    CHECK(oracle.h.h[1] == doctest::Approx(kLog3 - hq).epsilon(1e-13));
    CHECK(oracle.h.h[2] == doctest::Approx(0.0));
    CHECK(oracle.row_marginal[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    CHECK(oracle.spec.exponents[0] == doctest::Approx(-kLog2).epsilon(1e-14));
    CHECK(oracle.spec.exponents[1] == doctest::Approx(-kLog3).epsilon(1e-14));
    CHECK(oracle.dim_measure.value == doctest::Approx(1.3389156697687945).epsilon(1e-13));
    CHECK(oracle.dim_attractor.value == doctest::Approx(1.3496838201955776).epsilon(1e-13));
}

TEST_CASE("carpet_oracle: full grid is the unit square, single digit is a point") {
    std::vector<std::pair<int, int>> all;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 2; ++j) all.emplace_back(i, j);
    CarpetOracle full = carpet_oracle(3, 2, all, std::vector<double>(6, 1.0 / 6.0));
    CHECK(full.dim_measure.value == doctest::Approx(2.0).epsilon(1e-13));
    CHECK(full.dim_attractor.value == doctest::Approx(2.0).epsilon(1e-13));

    CarpetOracle point = carpet_oracle(3, 2, {{1, 1}}, {1.0});
    CHECK(point.dim_measure.value == doctest::Approx(0.0));
    CHECK(point.dim_attractor.value == doctest::Approx(0.0));
}

TEST_CASE("carpet_oracle: McMullen-optimal weights attain the set dimension") {
    // weights t_j^{alpha-1}/Z turn the measure formula into the set formula
    const double alpha = kLog2 / kLog3;
    const double z = std::pow(2.0, alpha) + 1.0;
    const double w_row0 = std::pow(2.0, alpha - 1.0) / z;
    CarpetOracle oracle = carpet_oracle(3, 2, {{0, 0}, {1, 0}, {2, 1}},
                                        {w_row0, w_row0, 1.0 / z});
    CHECK(oracle.dim_measure.value ==
          doctest::Approx(oracle.dim_attractor.value).epsilon(1e-12));
}

TEST_CASE("carpet_oracle: square grid degenerates to the self-similar case") {
    CarpetOracle oracle = carpet_oracle(3, 3, {{0, 0}, {1, 1}, {2, 2}},
                                        {0.2, 0.5, 0.3});
    REQUIRE(oracle.spec.count() == 1);
    CHECK(oracle.spec.multiplicities[0] == 2);
    const double hp = -(0.2 * std::log(0.2) + 0.5 * std::log(0.5) + 0.3 * std::log(0.3));
    CHECK(oracle.dim_measure.value == doctest::Approx(hp / kLog3).epsilon(1e-13));
    // and the LY formula with the s = 1 grouping agrees
    auto spec = make_spec({-kLog3}, {2});
    CHECK(ly_formula(seq({hp, 0.0}), spec).value ==
          doctest::Approx(oracle.dim_measure.value).epsilon(1e-13));
}

TEST_CASE("carpet_oracle: validation") {
    CHECK_THROWS_AS(carpet_oracle(2, 3, {{0, 0}}, {1.0}), ValidationError);  // m > n
    CHECK_THROWS_AS(carpet_oracle(3, 2, {{0, 0}, {0, 0}}, {0.5, 0.5}), ValidationError);
    CHECK_THROWS_AS(carpet_oracle(3, 2, {{3, 0}}, {1.0}), ValidationError);
    CHECK_THROWS_AS(carpet_oracle(3, 2, {{0, 0}, {1, 0}}, {0.5}), ValidationError);
    CHECK_THROWS_AS(carpet_oracle(3, 2, {{0, 0}, {1, 0}}, {1.0, 0.0}), ValidationError);
}

TEST_CASE("sharpness_check: equality patterns") {
    // full-grid uniform carpet: saturated, condition (1)
    std::vector<std::pair<int, int>> all;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 2; ++j) all.emplace_back(i, j);
    CarpetOracle full = carpet_oracle(3, 2, all, std::vector<double>(6, 1.0 / 6.0));
    SharpnessReport r1 = sharpness_check(full.h, full.spec);
    CHECK(r1.result == Sharpness::equal);
    CHECK(r1.condition == 1);

    // three-digit carpet: strict at the first entropy
    CarpetOracle three = carpet_oracle(3, 2, {{0, 0}, {1, 0}, {2, 1}},
                                       {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
    SharpnessReport r2 = sharpness_check(three.h, three.spec);
    CHECK(r2.result == Sharpness::strict);
    CHECK(r2.witness == 1);

    // no drop where the branch demands one
    auto spec = make_spec({-0.5, -1.0}, {1, 1});
    SharpnessReport r3 = sharpness_check(seq({0.4, 0.4, 0.0}), spec);
    CHECK(r3.result == Sharpness::strict);
    CHECK(r3.witness == 1);

    // single exponent with h_1 = 0 is always equal
    auto s1 = make_spec({-0.7}, {1});
    CHECK(sharpness_check(seq({0.4, 0.0}), s1).result == Sharpness::equal);
    // saturated single-exponent case: h_1 = h_0 - L_1 is condition (1)
    CHECK(sharpness_check(seq({0.9, 0.2}), s1).result == Sharpness::equal);
    CHECK(sharpness_check(seq({0.4, 0.2}), s1).result == Sharpness::strict);
}

TEST_CASE("property: dimension sum never exceeds the capped Lyapunov dimension") {
    Rng rng(2024);
    for (int trial = 0; trial < 10000; ++trial) {
        const int s = 1 + static_cast<int>(rng.below(3));
        std::vector<double> exps;
        std::vector<int> mults;
        double cur = -0.05 - rng.uniform01();
        int d = 0;
        for (int i = 0; i < s; ++i) {
            const bool neg_inf = i == s - 1 && rng.uniform01() < 0.15;
            exps.push_back(neg_inf ? kNegInf : cur);
            cur -= 0.1 + rng.uniform01();
            const int k = 1 + static_cast<int>(rng.below(2));
            mults.push_back(k);
            d += k;
        }
        auto spec = make_spec(exps, mults);
        std::vector<double> h(static_cast<std::size_t>(s) + 1);
        h[0] = rng.uniform(0.0, 3.0);
        for (int i = 0; i < s; ++i) {
            const double cap = std::isinf(exps[static_cast<std::size_t>(i)])
                                   ? h[static_cast<std::size_t>(i)]
                                   : std::min(h[static_cast<std::size_t>(i)],
                                              -exps[static_cast<std::size_t>(i)] *
                                                  mults[static_cast<std::size_t>(i)]);
            h[static_cast<std::size_t>(i) + 1] =
                h[static_cast<std::size_t>(i)] - rng.uniform(0.0, cap);
        }
        const double sum = ly_formula(seq(h), spec).value;
        const double cap = *lyapunov_dimension(h[0], spec).capped;
        CHECK(sum <= cap + 1e-9);
    }
}
