#include "affdim/config.hpp"

#include "affdim/errors.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace affdim {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ValidationError("config " + path + ": " + what);
}

void reject_unknown(const json& j, const std::string& path,
                    const std::set<std::string>& allowed) {
    if (!j.is_object()) fail(path, "expected an object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key())) fail(path + "." + it.key(), "unknown key");
}

double get_number(const json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    return j.get<double>();
}

int get_int(const json& j, const std::string& path) {
    if (!j.is_number_integer()) fail(path, "expected an integer");
    return j.get<int>();
}

std::int64_t get_int64(const json& j, const std::string& path) {
    if (!j.is_number_integer()) fail(path, "expected an integer");
    return j.get<std::int64_t>();
}

Vec parse_vector(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) fail(path, "expected a nonempty array");
    Vec v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i)
        v(static_cast<Eigen::Index>(i)) = get_number(j[i], path + "[" + std::to_string(i) + "]");
    return v;
}

Mat parse_matrix(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) fail(path, "expected a nonempty array of rows");
    const std::size_t rows = j.size();
    std::size_t cols = 0;
    Mat m;
    for (std::size_t r = 0; r < rows; ++r) {
        const std::string rp = path + "[" + std::to_string(r) + "]";
        if (!j[r].is_array() || j[r].empty()) fail(rp, "expected a nonempty row array");
        if (r == 0) {
            cols = j[r].size();
            m.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
        } else if (j[r].size() != cols) {
            fail(rp, "ragged matrix rows");
        }
        for (std::size_t c = 0; c < cols; ++c)
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                get_number(j[r][c], rp + "[" + std::to_string(c) + "]");
    }
    return m;
}

std::vector<Mat> parse_matrices(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) fail(path, "expected a nonempty array of matrices");
    std::vector<Mat> out;
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i)
        out.push_back(parse_matrix(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

AffineIFS parse_ifs(const json& j, const std::string& path) {
    reject_unknown(j, path, {"matrices", "translations"});
    if (!j.contains("matrices")) fail(path + ".matrices", "required");
    if (!j.contains("translations")) fail(path + ".translations", "required");
    auto mats = parse_matrices(j["matrices"], path + ".matrices");
    const json& jt = j["translations"];
    if (!jt.is_array() || jt.size() != mats.size())
        fail(path + ".translations", "must list one translation per matrix");
    std::vector<AffineMap> maps;
    for (std::size_t i = 0; i < mats.size(); ++i) {
        Vec a = parse_vector(jt[i], path + ".translations[" + std::to_string(i) + "]");
        maps.push_back(AffineMap{mats[i], a});
    }
    try {
        return AffineIFS::create(std::move(maps), /*allow_single=*/true);
    } catch (const ValidationError& e) {
        fail(path, e.what());
    }
}

ShiftMeasure parse_measure(const json& j, const std::string& path) {
    reject_unknown(j, path, {"kind", "probs", "transition"});
    if (!j.contains("kind") || !j["kind"].is_string()) fail(path + ".kind", "required string");
    const std::string kind = j["kind"].get<std::string>();
    try {
        if (kind == "bernoulli") {
            if (!j.contains("probs")) fail(path + ".probs", "required for bernoulli");
            Vec p = parse_vector(j["probs"], path + ".probs");
            return ShiftMeasure::bernoulli(std::vector<double>(p.data(), p.data() + p.size()));
        }
        if (kind == "markov") {
            if (!j.contains("transition")) fail(path + ".transition", "required for markov");
            return ShiftMeasure::markov(parse_matrix(j["transition"], path + ".transition"));
        }
    } catch (const ValidationError& e) {
        fail(path, e.what());
    }
    fail(path + ".kind", "must be \"bernoulli\" or \"markov\"");
}

DimMethod parse_method(const json& j, const std::string& path) {
    if (!j.is_string()) fail(path, "expected \"correlation\" or \"knn\"");
    const std::string s = j.get<std::string>();
    if (s == "correlation") return DimMethod::correlation;
    if (s == "knn") return DimMethod::knn;
    fail(path, "must be \"correlation\" or \"knn\"");
}

void parse_estimate(const json& j, const std::string& path, EstimateParams& out) {
    reject_unknown(j, path,
                   {"method", "n_points", "depth", "r_rel_min", "r_rel_max", "n_radii",
                    "fit_trim", "pair_budget", "knn_k", "knn_queries", "knn_refs", "n_blocks",
                    "n_bootstrap", "n_anchors", "slab_rel", "w_basis", "w_perp_basis"});
    if (j.contains("method")) out.est.method = parse_method(j["method"], path + ".method");
    if (j.contains("n_points")) out.n_points = get_int64(j["n_points"], path + ".n_points");
    if (j.contains("depth")) out.depth = get_int(j["depth"], path + ".depth");
    if (j.contains("r_rel_min")) out.est.r_rel_min = get_number(j["r_rel_min"], path + ".r_rel_min");
    if (j.contains("r_rel_max")) out.est.r_rel_max = get_number(j["r_rel_max"], path + ".r_rel_max");
    if (j.contains("n_radii")) out.est.n_radii = get_int(j["n_radii"], path + ".n_radii");
    if (j.contains("fit_trim")) out.est.fit_trim = get_int(j["fit_trim"], path + ".fit_trim");
    if (j.contains("pair_budget"))
        out.est.pair_budget = static_cast<std::uint64_t>(
            get_int64(j["pair_budget"], path + ".pair_budget"));
    if (j.contains("knn_k")) out.est.knn_k = get_int(j["knn_k"], path + ".knn_k");
    if (j.contains("knn_queries"))
        out.est.knn_queries = get_int(j["knn_queries"], path + ".knn_queries");
    if (j.contains("knn_refs")) out.est.knn_refs = get_int(j["knn_refs"], path + ".knn_refs");
    if (j.contains("n_blocks")) out.est.n_blocks = get_int(j["n_blocks"], path + ".n_blocks");
    if (j.contains("n_bootstrap"))
        out.est.n_bootstrap = get_int(j["n_bootstrap"], path + ".n_bootstrap");
    if (j.contains("n_anchors")) out.est.n_anchors = get_int(j["n_anchors"], path + ".n_anchors");
    if (j.contains("slab_rel")) out.est.slab_rel = get_number(j["slab_rel"], path + ".slab_rel");
    if (j.contains("w_basis")) out.w_basis = parse_matrix(j["w_basis"], path + ".w_basis");
    if (j.contains("w_perp_basis"))
        out.w_perp_basis = parse_matrix(j["w_perp_basis"], path + ".w_perp_basis");
    if (out.n_points < 1) fail(path + ".n_points", "must be >= 1");
    if (!(out.est.r_rel_min > 0.0) || !(out.est.r_rel_max > out.est.r_rel_min))
        fail(path, "need 0 < r_rel_min < r_rel_max");
}

}  // namespace

ExperimentConfig ExperimentConfig::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("config: cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ValidationError("config: invalid JSON in " + path + ": " + e.what());
    }
    return parse_json(j);
}

ExperimentConfig ExperimentConfig::parse_json(const json& j) {
    static const std::set<std::string> kTasks = {"spectrum", "flag",   "lyapdim", "affdim",
                                                 "sample",   "estimate", "carpet", "sweep",
                                                 "conserve", "suite"};
    reject_unknown(j, "config",
                   {"task", "seed", "output", "ifs", "matrices", "measure", "spectrum", "flag",
                    "estimate", "lyapdim", "affdim", "carpet", "sweep", "suite"});
    ExperimentConfig cfg;
    if (!j.contains("task") || !j["task"].is_string()) fail("config.task", "required string");
    cfg.task = j["task"].get<std::string>();
    if (!kTasks.count(cfg.task)) fail("config.task", "unknown task \"" + cfg.task + "\"");

    if (j.contains("seed")) {
        if (!j["seed"].is_number_integer() || j["seed"].get<std::int64_t>() < 0)
            fail("config.seed", "expected a nonnegative integer");
        cfg.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("output")) {
        if (!j["output"].is_string()) fail("config.output", "expected a string");
        cfg.output = j["output"].get<std::string>();
    }
    if (j.contains("ifs")) cfg.ifs = parse_ifs(j["ifs"], "config.ifs");
    if (j.contains("matrices")) cfg.matrices = parse_matrices(j["matrices"], "config.matrices");
    if (j.contains("measure")) cfg.measure = parse_measure(j["measure"], "config.measure");

    if (j.contains("spectrum")) {
        const json& js = j["spectrum"];
        reject_unknown(js, "config.spectrum", {"n_steps", "n_reps", "gap_tol"});
        if (js.contains("n_steps"))
            cfg.spectrum_params.n_steps = get_int(js["n_steps"], "config.spectrum.n_steps");
        if (js.contains("n_reps"))
            cfg.spectrum_params.n_reps = get_int(js["n_reps"], "config.spectrum.n_reps");
        if (js.contains("gap_tol"))
            cfg.spectrum_params.gap_tol = get_number(js["gap_tol"], "config.spectrum.gap_tol");
    }
    if (j.contains("flag")) {
        const json& jf = j["flag"];
        reject_unknown(jf, "config.flag", {"past_depth", "n_samples"});
        if (jf.contains("past_depth"))
            cfg.flag_params.past_depth = get_int(jf["past_depth"], "config.flag.past_depth");
        if (jf.contains("n_samples"))
            cfg.flag_params.n_samples = get_int(jf["n_samples"], "config.flag.n_samples");
    }
    if (j.contains("estimate"))
        parse_estimate(j["estimate"], "config.estimate", cfg.estimate_params);
    if (j.contains("lyapdim")) {
        const json& jl = j["lyapdim"];
        reject_unknown(jl, "config.lyapdim", {"h0"});
        if (jl.contains("h0")) cfg.lyapdim_params.h0 = get_number(jl["h0"], "config.lyapdim.h0");
    }
    if (j.contains("affdim")) {
        const json& ja = j["affdim"];
        reject_unknown(ja, "config.affdim", {"level", "tol"});
        if (ja.contains("level")) cfg.affdim_params.level = get_int(ja["level"], "config.affdim.level");
        if (ja.contains("tol")) cfg.affdim_params.tol = get_number(ja["tol"], "config.affdim.tol");
    }
    if (j.contains("carpet")) {
        const json& jc = j["carpet"];
        reject_unknown(jc, "config.carpet",
                       {"n_cols", "m_rows", "digits", "probs", "validate_empirically"});
        if (jc.contains("n_cols")) cfg.carpet_params.n_cols = get_int(jc["n_cols"], "config.carpet.n_cols");
        if (jc.contains("m_rows")) cfg.carpet_params.m_rows = get_int(jc["m_rows"], "config.carpet.m_rows");
        if (jc.contains("digits")) {
            const json& jd = jc["digits"];
            if (!jd.is_array() || jd.empty()) fail("config.carpet.digits", "nonempty array required");
            for (std::size_t i = 0; i < jd.size(); ++i) {
                const std::string dp = "config.carpet.digits[" + std::to_string(i) + "]";
                if (!jd[i].is_array() || jd[i].size() != 2) fail(dp, "expected [col, row]");
                cfg.carpet_params.digits.emplace_back(get_int(jd[i][0], dp + "[0]"),
                                                      get_int(jd[i][1], dp + "[1]"));
            }
        }
        if (jc.contains("probs")) {
            Vec p = parse_vector(jc["probs"], "config.carpet.probs");
            cfg.carpet_params.probs.assign(p.data(), p.data() + p.size());
        }
        if (jc.contains("validate_empirically")) {
            if (!jc["validate_empirically"].is_boolean())
                fail("config.carpet.validate_empirically", "expected a boolean");
            cfg.carpet_params.validate_empirically = jc["validate_empirically"].get<bool>();
        }
    }
    if (j.contains("sweep")) {
        const json& jw = j["sweep"];
        reject_unknown(jw, "config.sweep", {"grid"});
        if (!jw.contains("grid") || !jw["grid"].is_array() || jw["grid"].empty())
            fail("config.sweep.grid", "nonempty array required");
        for (std::size_t g = 0; g < jw["grid"].size(); ++g) {
            const std::string gp = "config.sweep.grid[" + std::to_string(g) + "]";
            const json& jg = jw["grid"][g];
            if (!jg.is_array() || jg.empty()) fail(gp, "expected an array of translations");
            std::vector<Vec> point;
            for (std::size_t t = 0; t < jg.size(); ++t)
                point.push_back(parse_vector(jg[t], gp + "[" + std::to_string(t) + "]"));
            cfg.sweep_params.grid.push_back(std::move(point));
        }
    }
    if (j.contains("suite")) {
        const json& ju = j["suite"];
        reject_unknown(ju, "config.suite", {"families", "random_planar_pairs"});
        if (ju.contains("families")) {
            if (!ju["families"].is_array()) fail("config.suite.families", "expected an array");
            for (std::size_t f = 0; f < ju["families"].size(); ++f) {
                const std::string fp = "config.suite.families[" + std::to_string(f) + "]";
                const json& jf = ju["families"][f];
                reject_unknown(jf, fp, {"ifs", "measure"});
                if (!jf.contains("ifs") || !jf.contains("measure"))
                    fail(fp, "needs both ifs and measure");
                cfg.suite_params.families.emplace_back(parse_ifs(jf["ifs"], fp + ".ifs"),
                                                       parse_measure(jf["measure"], fp + ".measure"));
            }
        }
        if (ju.contains("random_planar_pairs"))
            cfg.suite_params.random_planar_pairs =
                get_int(ju["random_planar_pairs"], "config.suite.random_planar_pairs");
    }
    return cfg;
}

std::vector<std::pair<AffineIFS, ShiftMeasure>> random_planar_families(int count,
                                                                       std::uint64_t seed) {
    std::vector<std::pair<AffineIFS, ShiftMeasure>> out;
    out.reserve(static_cast<std::size_t>(count));
    Rng rng(seed);
    for (int f = 0; f < count; ++f) {
        std::vector<AffineMap> maps;
        for (int j = 0; j < 2; ++j) {
            // random contraction: scaled rotation plus a small shear
            const double scale = rng.uniform(0.2, 0.45);
            const double angle = rng.uniform(0.0, 6.28318530717958648);
            const double shear = rng.uniform(-0.2, 0.2);
            Mat rot(2, 2);
            rot << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
            Mat sh = Mat::Identity(2, 2);
            sh(0, 1) = shear;
            AffineMap m;
            m.matrix = scale * rot * sh;
            m.translation = Vec(2);
            m.translation << rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0);
            maps.push_back(std::move(m));
        }
        const double p = rng.uniform(0.2, 0.8);
        out.emplace_back(AffineIFS::create(std::move(maps)),
                         ShiftMeasure::bernoulli({p, 1.0 - p}));
    }
    return out;
}

}  // namespace affdim
