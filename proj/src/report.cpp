#include "affdim/report.hpp"

#include "affdim/digest.hpp"
#include "affdim/errors.hpp"

#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace affdim {

namespace {

using nlohmann::json;

const AffineIFS& require_ifs(const ExperimentConfig& cfg) {
    if (!cfg.ifs) throw ValidationError("config.ifs: required for task " + cfg.task);
    return *cfg.ifs;
}

const ShiftMeasure& require_measure(const ExperimentConfig& cfg) {
    if (!cfg.measure) throw ValidationError("config.measure: required for task " + cfg.task);
    return *cfg.measure;
}

std::vector<Mat> linear_parts_of(const ExperimentConfig& cfg) {
    if (!cfg.matrices.empty()) return cfg.matrices;
    if (cfg.ifs) return cfg.ifs->linear_parts();
    throw ValidationError("config: task " + cfg.task + " needs matrices or ifs");
}

json double_or_sentinel(double v) {
    if (std::isinf(v)) return v < 0 ? json("-inf") : json("inf");
    return json(v);
}

std::string cocycle_provenance(const ExperimentConfig& cfg, const std::vector<Mat>& mats,
                               const std::string& tag) {
    Digest dg;
    dg.add(tag).add(cfg.seed).add(cfg.spectrum_params.n_steps).add(cfg.spectrum_params.n_reps);
    dg.add(cfg.spectrum_params.gap_tol);
    if (cfg.measure) dg.add(cfg.measure->digest());
    for (const auto& m : mats)
        for (Eigen::Index r = 0; r < m.rows(); ++r)
            for (Eigen::Index col = 0; col < m.cols(); ++col) dg.add(m(r, col));
    return dg.hex();
}

std::string estimate_provenance(const PointCloud& cloud, const EstimateConfig& est,
                                const std::string& tag) {
    Digest dg;
    dg.add(tag)
        .add(cloud.ifs_digest)
        .add(cloud.measure_digest)
        .add(cloud.depth)
        .add(cloud.seed)
        .add(std::string(dim_method_name(est.method)))
        .add(est.r_rel_min)
        .add(est.r_rel_max)
        .add(est.n_radii)
        .add(static_cast<std::uint64_t>(est.pair_budget))
        .add(est.seed);
    return dg.hex();
}

int resolve_depth(const ExperimentConfig& cfg, const AffineIFS& ifs, const ShiftMeasure& mu) {
    if (cfg.estimate_params.depth > 0) return cfg.estimate_params.depth;
    const double rho = ifs.uniform_contraction_factor();
    const double extent =
        rho < 1.0 ? std::max(ifs.max_translation_norm() / (1.0 - rho), 1e-9) : 1.0;
    // k-NN probes scales far below the correlation radius band, so its
    // truncation has to resolve near the neighbor spacing, not r_min
    const double r_rel = cfg.estimate_params.est.method == DimMethod::knn
                             ? std::min(cfg.estimate_params.est.r_rel_min, 1e-6)
                             : cfg.estimate_params.est.r_rel_min;
    return recommended_depth(ifs, mu, r_rel * extent, cfg.seed);
}

std::string csv_sibling(const ExperimentConfig& cfg) {
    std::string base = cfg.output.empty() ? "report.json" : cfg.output;
    const auto dot = base.find_last_of('.');
    if (dot != std::string::npos) base.resize(dot);
    return base + ".csv";
}

json matrix_to_json(const Mat& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(row);
    }
    return rows;
}

json run_spectrum(const ExperimentConfig& cfg) {
    auto mats = linear_parts_of(cfg);
    const auto& mu = require_measure(cfg);
    const auto& sp = cfg.spectrum_params;
    LyapunovSpectrum spec = spectrum(mats, mu, sp.n_steps, sp.n_reps, sp.gap_tol, cfg.seed);
    auto [top, top_se] = top_exponent(mats, mu, sp.n_steps, sp.n_reps, cfg.seed ^ 0x70BULL);
    json out;
    out["spectrum"] = spectrum_to_json(spec);
    out["spectrum"]["provenance"] = cocycle_provenance(cfg, mats, "spectrum");
    out["top_exponent"] = {{"value", double_or_sentinel(top)},
                           {"stderr", top_se},
                           {"provenance", cocycle_provenance(cfg, mats, "top_exponent")}};
    return out;
}

json run_flag(const ExperimentConfig& cfg) {
    auto mats = linear_parts_of(cfg);
    const auto& mu = require_measure(cfg);
    const auto& sp = cfg.spectrum_params;
    LyapunovSpectrum spec = spectrum(mats, mu, sp.n_steps, sp.n_reps, sp.gap_tol, cfg.seed);
    Rng rng = Rng::stream(cfg.seed, 0xF1A6ULL);
    Word past = sample_word(mu, cfg.flag_params.past_depth, rng);
    OseledetsFlag flag = oseledets_flag(mats, past, spec);
    json out;
    out["spectrum"] = spectrum_to_json(spec);
    out["spectrum"]["provenance"] = cocycle_provenance(cfg, mats, "spectrum");
    json bases = json::array();
    for (const auto& b : flag.bases) bases.push_back(matrix_to_json(b));
    out["flag"] = {{"depth", flag.depth},
                   {"bases", bases},
                   {"cut_ratios", flag.cut_ratios},
                   {"low_confidence", flag.low_confidence},
                   {"provenance", cocycle_provenance(cfg, mats, "flag")}};
    if (spec.count() >= 2) {
        AngleReport angles = angle_stats(mats, mu, spec, cfg.flag_params.n_samples,
                                         cfg.flag_params.past_depth, cfg.seed ^ 0xA6ULL);
        out["angles"] = {{"min_sine", angles.min_sine},
                         {"median_sine", angles.median_sine},
                         {"trend_slope", angles.trend_slope},
                         {"samples", angles.samples}};
    }
    return out;
}

json run_lyapdim(const ExperimentConfig& cfg) {
    auto mats = linear_parts_of(cfg);
    const auto& mu = require_measure(cfg);
    const auto& sp = cfg.spectrum_params;
    LyapunovSpectrum spec = spectrum(mats, mu, sp.n_steps, sp.n_reps, sp.gap_tol, cfg.seed);
    const double h0 = cfg.lyapdim_params.h0 ? *cfg.lyapdim_params.h0 : entropy(mu);
    DimValue ly = lyapunov_dimension(h0, spec);
    json out;
    out["entropy"] = h0;
    out["spectrum"] = spectrum_to_json(spec);
    out["spectrum"]["provenance"] = cocycle_provenance(cfg, mats, "spectrum");
    out["lyapunov_dimension"] = dim_value_to_json(ly);
    return out;
}

json run_affdim(const ExperimentConfig& cfg) {
    auto mats = linear_parts_of(cfg);
    AffinityDimension aff = affinity_dimension(mats, cfg.affdim_params.level,
                                               cfg.affdim_params.tol);
    json out;
    out["affinity_dimension"] = dim_value_to_json(aff.dim);
    out["root_at_n"] = aff.root_at_n;
    out["root_at_half_n"] = aff.root_at_half_n;
    out["richardson"] = aff.richardson;
    out["fekete_gap"] = aff.fekete_gap;
    out["level"] = aff.level;
    return out;
}

json run_sample(const ExperimentConfig& cfg, std::string* csv_out) {
    const auto& ifs = require_ifs(cfg);
    const auto& mu = require_measure(cfg);
    const int depth = resolve_depth(cfg, ifs, mu);
    PointCloud cloud = sample_points(ifs, mu, cfg.estimate_params.n_points, depth, cfg.seed);

    std::ostringstream csv;
    for (int c = 0; c < cloud.dim(); ++c) csv << (c ? "," : "") << "x" << c;
    csv << "\n";
    for (std::int64_t i = 0; i < cloud.size(); ++i) {
        for (int c = 0; c < cloud.dim(); ++c)
            csv << (c ? "," : "") << csv_double(cloud.points(i, c));
        csv << "\n";
    }
    *csv_out = csv.str();

    json out;
    out["n_points"] = cloud.size();
    out["depth"] = cloud.depth;
    out["tail_warning"] = cloud.tail_warning;
    out["ifs_digest"] = cloud.ifs_digest;
    out["measure_digest"] = cloud.measure_digest;
    return out;
}

json run_estimate(const ExperimentConfig& cfg) {
    const auto& ifs = require_ifs(cfg);
    const auto& mu = require_measure(cfg);
    const int depth = resolve_depth(cfg, ifs, mu);
    EstimateConfig est = cfg.estimate_params.est;
    est.seed = cfg.seed;
    PointCloud cloud = sample_points(ifs, mu, cfg.estimate_params.n_points, depth, cfg.seed);
    json out;
    out["depth"] = depth;
    out["tail_warning"] = cloud.tail_warning;
    DimEstimate total = estimate_dimension(cloud, est);
    out["local_dimension"] = dim_estimate_to_json(total, estimate_provenance(cloud, est, "total"));
    if (cfg.estimate_params.w_perp_basis) {
        DimEstimate proj = projected_dimension(cloud, *cfg.estimate_params.w_perp_basis, est);
        out["projected_dimension"] =
            dim_estimate_to_json(proj, estimate_provenance(cloud, est, "projected"));
    }
    if (cfg.estimate_params.w_basis) {
        const double slab = est.slab_rel * cloud.diameter_estimate();
        DimEstimate slice = slice_dimension(cloud, *cfg.estimate_params.w_basis, slab, est);
        out["slice_dimension"] =
            dim_estimate_to_json(slice, estimate_provenance(cloud, est, "slice"));
    }
    return out;
}

json run_carpet(const ExperimentConfig& cfg) {
    const auto& cp = cfg.carpet_params;
    if (cp.digits.empty()) throw ValidationError("config.carpet.digits: required");
    std::vector<double> probs = cp.probs;
    if (probs.empty())
        probs.assign(cp.digits.size(), 1.0 / static_cast<double>(cp.digits.size()));
    CarpetOracle oracle = carpet_oracle(cp.n_cols, cp.m_rows, cp.digits, probs);
    json out;
    out["entropies"] = oracle.h.h;
    out["row_marginal"] = oracle.row_marginal;
    out["spectrum"] = spectrum_to_json(oracle.spec);
    out["dim_measure"] = dim_value_to_json(oracle.dim_measure);
    out["dim_attractor"] = dim_value_to_json(oracle.dim_attractor);
    SharpnessReport sharp = sharpness_check(oracle.h, oracle.spec);
    out["sharpness"] = {{"result", sharp.result == Sharpness::equal ? "equal" : "strict"},
                        {"condition", sharp.condition},
                        {"witness", sharp.witness}};
    if (cp.validate_empirically) {
        AffineIFS ifs = carpet_ifs(cp.n_cols, cp.m_rows, cp.digits);
        ShiftMeasure mu = ShiftMeasure::bernoulli(probs);
        const int depth = resolve_depth(cfg, ifs, mu);
        EstimateConfig est = cfg.estimate_params.est;
        est.seed = cfg.seed;
        PointCloud cloud = sample_points(ifs, mu, cfg.estimate_params.n_points, depth, cfg.seed);
        DimEstimate em = estimate_dimension(cloud, est);
        out["empirical"] = dim_estimate_to_json(em, estimate_provenance(cloud, est, "carpet"));
        out["empirical_gap"] = em.value - oracle.dim_measure.value;
    }
    return out;
}

json run_sweep(const ExperimentConfig& cfg, std::string* csv_out) {
    auto mats = linear_parts_of(cfg);
    const auto& mu = require_measure(cfg);
    SweepConfig sweep_cfg;
    sweep_cfg.n_points = cfg.estimate_params.n_points;
    sweep_cfg.depth = cfg.estimate_params.depth;
    sweep_cfg.n_steps = cfg.spectrum_params.n_steps;
    sweep_cfg.n_reps = cfg.spectrum_params.n_reps;
    sweep_cfg.est = cfg.estimate_params.est;
    sweep_cfg.est.seed = cfg.seed;
    auto rows = translation_sweep(mats, mu, cfg.sweep_params.grid, sweep_cfg);

    std::ostringstream csv;
    csv << "grid_index,translations,estimate,ci_half_width,dim_ly,dim_ly_capped,flagged\n";
    json jrows = json::array();
    for (std::size_t g = 0; g < rows.size(); ++g) {
        const auto& row = rows[g];
        json jr;
        json trans = json::array();
        std::ostringstream tstr;
        for (std::size_t t = 0; t < row.translations.size(); ++t) {
            json tv = json::array();
            for (Eigen::Index i = 0; i < row.translations[t].size(); ++i) {
                tv.push_back(row.translations[t](i));
                tstr << (t + static_cast<std::size_t>(i) ? " " : "")
                     << csv_double(row.translations[t](i));
            }
            trans.push_back(tv);
        }
        jr["translations"] = trans;
        jr["estimate"] = dim_estimate_to_json(
            row.estimate, Digest().add(cfg.seed).add(static_cast<std::uint64_t>(g)).hex());
        jr["dim_ly"] = row.dim_ly;
        jr["dim_ly_capped"] = row.dim_ly_capped;
        jr["flagged_exceptional"] = row.flagged_exceptional;
        jr["half_norm_warning"] = row.half_norm_warning;
        jrows.push_back(jr);
        csv << g << ",\"" << tstr.str() << "\"," << csv_double(row.estimate.value) << ","
            << csv_double(row.estimate.ci_half_width) << "," << csv_double(row.dim_ly) << ","
            << csv_double(row.dim_ly_capped) << "," << (row.flagged_exceptional ? 1 : 0) << "\n";
    }
    *csv_out = csv.str();
    json out;
    out["rows"] = jrows;
    return out;
}

json run_conserve(const ExperimentConfig& cfg) {
    const auto& ifs = require_ifs(cfg);
    const auto& mu = require_measure(cfg);
    if (!cfg.estimate_params.w_basis)
        throw ValidationError("config.estimate.w_basis: required for task conserve");
    const int depth = resolve_depth(cfg, ifs, mu);
    EstimateConfig est = cfg.estimate_params.est;
    est.seed = cfg.seed;
    PointCloud cloud = sample_points(ifs, mu, cfg.estimate_params.n_points, depth, cfg.seed);
    ConservationReport rep = conservation_check(cloud, *cfg.estimate_params.w_basis, est);
    json out;
    out["dim_total"] =
        dim_estimate_to_json(rep.dim_total, estimate_provenance(cloud, est, "total"));
    out["dim_proj"] = dim_estimate_to_json(rep.dim_proj, estimate_provenance(cloud, est, "proj"));
    out["dim_slice"] =
        dim_estimate_to_json(rep.dim_slice, estimate_provenance(cloud, est, "slice"));
    out["subspace"] = matrix_to_json(rep.subspace);
    out["residual"] = rep.residual;
    out["pooled_ci"] = rep.pooled_ci;
    return out;
}

json run_suite(const ExperimentConfig& cfg, std::string* csv_out) {
    auto families = cfg.suite_params.families;
    if (cfg.suite_params.random_planar_pairs > 0) {
        auto extra = random_planar_families(cfg.suite_params.random_planar_pairs, cfg.seed);
        families.insert(families.end(), extra.begin(), extra.end());
    }
    if (families.empty()) throw ValidationError("config.suite: no families given");
    SweepConfig sweep_cfg;
    sweep_cfg.n_points = cfg.estimate_params.n_points;
    sweep_cfg.depth = cfg.estimate_params.depth;
    sweep_cfg.n_steps = cfg.spectrum_params.n_steps;
    sweep_cfg.n_reps = cfg.spectrum_params.n_reps;
    sweep_cfg.est = cfg.estimate_params.est;
    sweep_cfg.est.seed = cfg.seed;
    auto rows = upper_bound_suite(families, sweep_cfg);

    std::ostringstream csv;
    csv << "label,estimate,ci_half_width,bound,pass\n";
    json jrows = json::array();
    int failures = 0;
    for (const auto& row : rows) {
        json jr;
        jr["label"] = row.label;
        jr["estimate"] = dim_estimate_to_json(row.estimate, Digest().add(row.label).hex());
        jr["bound"] = row.bound;
        jr["pass"] = row.pass;
        if (!row.pass) ++failures;
        jrows.push_back(jr);
        csv << row.label << "," << csv_double(row.estimate.value) << ","
            << csv_double(row.estimate.ci_half_width) << "," << csv_double(row.bound) << ","
            << (row.pass ? 1 : 0) << "\n";
    }
    *csv_out = csv.str();
    json out;
    out["rows"] = jrows;
    out["failures"] = failures;
    return out;
}

}  // namespace

json spectrum_to_json(const LyapunovSpectrum& spec) {
    json out;
    json exps = json::array();
    for (double l : spec.exponents) exps.push_back(double_or_sentinel(l));
    json raws = json::array();
    for (double l : spec.raw_exponents) raws.push_back(double_or_sentinel(l));
    out["exponents"] = exps;
    out["multiplicities"] = spec.multiplicities;
    out["stderrs"] = spec.stderrs;
    out["raw_exponents"] = raws;
    out["gap_tol"] = spec.gap_tol;
    out["grouping_ambiguous"] = spec.grouping_ambiguous;
    return out;
}

json dim_value_to_json(const DimValue& v) {
    json out;
    out["value"] = v.value;
    out["kind"] = dim_kind_name(v.kind);
    out["inputs_digest"] = v.inputs_digest;
    if (v.capped) out["capped"] = *v.capped;
    return out;
}

json dim_estimate_to_json(const DimEstimate& e, const std::string& provenance) {
    json out;
    out["value"] = e.value;
    out["ci_half_width"] = e.ci_half_width;
    out["method"] = dim_method_name(e.method);
    if (e.method == DimMethod::correlation) {
        out["r_min"] = e.r_min;
        out["r_max"] = e.r_max;
    }
    out["n_pairs_or_k"] = e.n_pairs_or_k;
    out["provenance"] = provenance;
    return out;
}

std::string csv_double(double v) {
    if (std::isinf(v)) return v < 0 ? "-inf" : "inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string render_report(const json& report) { return report.dump(2) + "\n"; }

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ResourceError("cannot write " + path);
    out << content;
}

json run_task(const ExperimentConfig& cfg) {
    const auto start = std::chrono::steady_clock::now();
    json report;
    report["task"] = cfg.task;
    report["seed"] = cfg.seed;
    if (cfg.ifs) report["ifs_digest"] = cfg.ifs->digest();
    if (cfg.measure) report["measure_digest"] = cfg.measure->digest();

    std::string csv;
    json results;
    if (cfg.task == "spectrum") results = run_spectrum(cfg);
    else if (cfg.task == "flag") results = run_flag(cfg);
    else if (cfg.task == "lyapdim") results = run_lyapdim(cfg);
    else if (cfg.task == "affdim") results = run_affdim(cfg);
    else if (cfg.task == "sample") results = run_sample(cfg, &csv);
    else if (cfg.task == "estimate") results = run_estimate(cfg);
    else if (cfg.task == "carpet") results = run_carpet(cfg);
    else if (cfg.task == "sweep") results = run_sweep(cfg, &csv);
    else if (cfg.task == "conserve") results = run_conserve(cfg);
    else if (cfg.task == "suite") results = run_suite(cfg, &csv);
    else throw ValidationError("config.task: unknown task " + cfg.task);

    report["results"] = results;
    if (!csv.empty()) {
        const std::string csv_path = csv_sibling(cfg);
        write_text_file(csv_path, csv);
        report["csv_path"] = csv_path;
    }
    const auto end = std::chrono::steady_clock::now();
    report["wall_clock_ms"] =
        std::chrono::duration_cast<std::chrono::milliseconds>(end - start).count();
    return report;
}

}  // namespace affdim
