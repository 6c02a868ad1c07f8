#pragma once

// Experiment configuration: one JSON file per run, schema-validated with
// unknown keys rejected, every numeric knob explicit or defaulted here.

#include "affdim/estimator.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace affdim {

struct SpectrumParams {
    int n_steps = 100000;
    int n_reps = 16;
    double gap_tol = 0.0;  // 0 = auto (0.05 |lambda_1|, floor 1e-3)
};

struct FlagParams {
    int past_depth = 200;
    int n_samples = 32;  // angle samples
};

struct EstimateParams {
    std::int64_t n_points = 1000000;
    int depth = 0;  // 0 = auto from the radius band
    EstimateConfig est;
    std::optional<Mat> w_basis;         // subspace for conserve/slice tasks
    std::optional<Mat> w_perp_basis;    // projection target for estimate task
};

struct LyapdimParams {
    std::optional<double> h0;  // default: entropy of the measure
};

struct AffdimParams {
    int level = 8;
    double tol = 1e-10;
};

struct CarpetParams {
    int n_cols = 3;
    int m_rows = 2;
    std::vector<std::pair<int, int>> digits;
    std::vector<double> probs;  // empty = uniform
    bool validate_empirically = false;
};

struct SweepParams {
    std::vector<std::vector<Vec>> grid;
};

struct SuiteParams {
    std::vector<std::pair<AffineIFS, ShiftMeasure>> families;
    int random_planar_pairs = 0;  // extra randomly generated planar families
};

struct ExperimentConfig {
    std::string task;
    std::uint64_t seed = 1;
    std::string output;

    std::optional<AffineIFS> ifs;
    std::vector<Mat> matrices;  // linear parts only (spectrum/sweep tasks)
    std::optional<ShiftMeasure> measure;

    SpectrumParams spectrum_params;
    FlagParams flag_params;
    EstimateParams estimate_params;
    LyapdimParams lyapdim_params;
    AffdimParams affdim_params;
    CarpetParams carpet_params;
    SweepParams sweep_params;
    SuiteParams suite_params;

    static ExperimentConfig parse_file(const std::string& path);
    static ExperimentConfig parse_json(const nlohmann::json& j);
};

/// Random contracting planar pair families with random Bernoulli weights
/// (used by the suite task and the acceptance tests).
std::vector<std::pair<AffineIFS, ShiftMeasure>> random_planar_families(int count,
                                                                       std::uint64_t seed);

}  // namespace affdim
