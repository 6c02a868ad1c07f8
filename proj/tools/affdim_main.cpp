#include "affdim/config.hpp"
#include "affdim/errors.hpp"
#include "affdim/parallel.hpp"
#include "affdim/report.hpp"
#include "affdim/selftest.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>

namespace {

int resolve_threads(int cli_threads) {
    if (cli_threads > 0) return cli_threads;
    if (const char* env = std::getenv("AFFDIM_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    return 0;  // auto
}

int run_selftest_command() {
    auto checks = affdim::run_selftest();
    int failures = 0;
    std::printf("%-22s %-12s %-12s %s\n", "check", "deviation", "tolerance", "status");
    for (const auto& c : checks) {
        if (!c.pass) ++failures;
        std::printf("%-22s %-12.3e %-12.3e %s\n", c.name.c_str(), c.deviation, c.tolerance,
                    c.pass ? "pass" : "FAIL");
    }
    std::printf("%d/%zu checks passed\n", static_cast<int>(checks.size()) - failures,
                checks.size());
    return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"affdim: dimension analysis of affine iterated function systems"};
    app.require_subcommand(0, 1);

    std::string config_path;
    std::string out_path;
    std::uint64_t seed = 0;
    bool seed_given = false;
    int threads = 0;
    bool quiet = false;

    app.add_option("--config", config_path, "experiment config (JSON)");
    app.add_option("--seed", seed, "override the config seed")->each([&](const std::string&) {
        seed_given = true;
    });
    app.add_option("--out", out_path, "report output path (overrides config)");
    app.add_option("--threads", threads, "worker threads (0 = auto)");
    app.add_flag("--quiet", quiet, "suppress the stdout summary");

    auto* selftest_cmd = app.add_subcommand("selftest", "run the fast built-in checks");

    CLI11_PARSE(app, argc, argv);

    affdim::set_thread_budget(resolve_threads(threads));

    if (selftest_cmd->parsed()) return run_selftest_command();

    if (config_path.empty()) {
        std::cerr << "error: --config PATH is required (or use the selftest subcommand)\n";
        return 2;
    }

    try {
        affdim::ExperimentConfig cfg = affdim::ExperimentConfig::parse_file(config_path);
        if (seed_given) cfg.seed = seed;
        if (!out_path.empty()) cfg.output = out_path;
        if (cfg.output.empty()) cfg.output = "report.json";

        nlohmann::json report = affdim::run_task(cfg);
        affdim::write_text_file(cfg.output, affdim::render_report(report));
        if (!quiet) {
            std::cout << "task " << cfg.task << " done; report written to " << cfg.output
                      << "\n";
            if (report.contains("csv_path"))
                std::cout << "csv written to " << report["csv_path"].get<std::string>() << "\n";
            if (report["results"].contains("dim_measure"))
                std::cout << "dim_measure = "
                          << report["results"]["dim_measure"]["value"].get<double>() << "\n";
            if (report["results"].contains("local_dimension"))
                std::cout << "local_dimension = "
                          << report["results"]["local_dimension"]["value"].get<double>() << "\n";
        }
        return 0;
    } catch (const affdim::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const affdim::ResourceError& e) {
        std::cerr << "resource error: " << e.what() << "\n";
        return 3;
    } catch (const affdim::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
