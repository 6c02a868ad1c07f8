#include "affdim/selftest.hpp"

#include "affdim/config.hpp"
#include "affdim/report.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <string>

namespace affdim {

namespace {

double tolerance_for(const std::string& name, double fallback) {
    std::string var = "AFFDIM_TOL_";
    for (char c : name) var += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (const char* env = std::getenv(var.c_str())) {
        char* end = nullptr;
        const double v = std::strtod(env, &end);
        if (end != env) return v;
    }
    return fallback;
}

void add_check(std::vector<SelftestCheck>& checks, const std::string& name, double deviation,
               double default_tol) {
    SelftestCheck c;
    c.name = name;
    c.tolerance = tolerance_for(name, default_tol);
    c.deviation = deviation;
    c.pass = deviation <= c.tolerance;
    checks.push_back(std::move(c));
}

}  // namespace

std::vector<SelftestCheck> run_selftest() {
    std::vector<SelftestCheck> checks;

    {  // coding map on the middle-thirds system: 0.2020... in base 3 is 3/4
        AffineIFS thirds = AffineIFS::line({{1.0 / 3.0, 0.0}, {1.0 / 3.0, 2.0 / 3.0}});
        Word w;
        for (int k = 0; k < 40; ++k) w.push_back(k % 2 == 0 ? 1 : 0);
        CodedPoint pt = code_point(thirds, w);
        add_check(checks, "coding_map", std::abs(pt.point(0) - 0.75), 1e-12);
    }

    {  // exact entropy and cylinder mass
        ShiftMeasure mu = ShiftMeasure::bernoulli({0.3, 0.7});
        const double dev1 = std::abs(entropy(mu) - (-0.3 * std::log(0.3) - 0.7 * std::log(0.7)));
        const double dev2 = std::abs(cylinder_prob(mu, {0, 1, 1}) - 0.147);
        add_check(checks, "measure_exact", std::max(dev1, dev2), 1e-12);
    }

    {  // diagonal pair spectrum vs the per-coordinate Birkhoff averages
        std::vector<Mat> mats(2, Mat::Zero(2, 2));
        mats[0].diagonal() << 0.5, 0.25;
        mats[1].diagonal() << 1.0 / 3.0, 0.2;
        ShiftMeasure mu = ShiftMeasure::bernoulli({0.5, 0.5});
        LyapunovSpectrum spec = spectrum(mats, mu, 20000, 8, 0.0, 11);
        const double dev = std::max(std::abs(spec.exponents[0] + 0.5 * std::log(6.0)),
                                    std::abs(spec.exponents[1] + 0.5 * std::log(20.0)));
        add_check(checks, "spectrum_diagonal", dev, 5e-3);
    }

    {  // filtration direction of a single triangular matrix
        Mat a(2, 2);
        a << 0.5, 1.0, 0.0, 0.125;
        std::vector<Mat> mats{a};
        ShiftMeasure mu = ShiftMeasure::bernoulli({1.0});
        LyapunovSpectrum spec = spectrum(mats, mu, 2000, 2, 0.0, 3);
        Word past(200, 0);
        OseledetsFlag flag = oseledets_flag(mats, past, spec);
        Vec slow(2);
        slow << -8.0 / 3.0, 1.0;
        slow.normalize();
        const double angle = max_principal_angle(flag.bases[0], slow);
        add_check(checks, "oseledets_direction", angle, 1e-3);
    }

    {  // piecewise Lyapunov dimension, both branches
        LyapunovSpectrum spec;
        spec.exponents = {std::log(0.5), std::log(1.0 / 3.0)};
        spec.multiplicities = {1, 1};
        spec.stderrs = {0.0, 0.0};
        spec.raw_exponents = spec.exponents;
        spec.gap_tol = 1e-3;
        const double d1 = lyapunov_dimension(std::log(3.0), spec).value;
        const double d2 = lyapunov_dimension(std::log(2.0), spec).value;
        const double expect1 = 1.0 + (std::log(3.0) - std::log(2.0)) / std::log(3.0);
        const double dev = std::max(std::abs(d1 - expect1), std::abs(d2 - 1.0));
        add_check(checks, "lyapunov_dimension", dev, 1e-12);
    }

    {  // conformal affinity dimension = similarity dimension
        std::vector<Mat> mats(2, Mat::Constant(1, 1, 1.0 / 3.0));
        AffinityDimension aff = affinity_dimension(mats, 6, 1e-12);
        add_check(checks, "affinity_conformal",
                  std::abs(aff.root_at_n - std::log(2.0) / std::log(3.0)), 1e-9);
    }

    {  // carpet oracle closed forms
        CarpetOracle oracle = carpet_oracle(3, 2, {{0, 0}, {1, 0}, {2, 1}},
                                            {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
        const double dev1 = std::abs(oracle.dim_measure.value - 1.3389156697687945);
        const double dev2 = std::abs(oracle.dim_attractor.value - 1.3496838201955776);
        add_check(checks, "carpet_oracle", std::max(dev1, dev2), 1e-12);
    }

    {  // estimator smoke test on the middle-thirds Cantor measure
        AffineIFS thirds = AffineIFS::line({{1.0 / 3.0, 0.0}, {1.0 / 3.0, 2.0 / 3.0}});
        ShiftMeasure mu = ShiftMeasure::bernoulli({0.5, 0.5});
        PointCloud cloud = sample_points(thirds, mu, 200000, 40, 7);
        EstimateConfig est;
        est.pair_budget = 10000000;
        est.seed = 7;
        DimEstimate dim = estimate_dimension(cloud, est);
        add_check(checks, "estimator_cantor",
                  std::abs(dim.value - std::log(2.0) / std::log(3.0)), 0.03);
    }

    {  // byte-identical reports under a repeated seed
        nlohmann::json jcfg = {
            {"task", "carpet"},
            {"seed", 5},
            {"carpet",
             {{"n_cols", 3}, {"m_rows", 2}, {"digits", {{0, 0}, {1, 0}, {2, 1}}}}}};
        ExperimentConfig cfg = ExperimentConfig::parse_json(jcfg);
        nlohmann::json r1 = run_task(cfg);
        nlohmann::json r2 = run_task(cfg);
        r1.erase("wall_clock_ms");
        r2.erase("wall_clock_ms");
        add_check(checks, "determinism", render_report(r1) == render_report(r2) ? 0.0 : 1.0,
                  0.5);
    }

    return checks;
}

}  // namespace affdim
