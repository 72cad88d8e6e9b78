// dtfdd: run D-TFDD experiments from JSON specs and post-process their CSVs.
//
// Exit codes: 0 ok, 1 invalid spec or arguments, 2 runtime failure.
// DTFDD_WORKERS sets the worker-thread count (default: hardware concurrency).

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "dtfdd/experiment.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kRuntime = 2;

unsigned worker_count()
{
    if (const char* env = std::getenv("DTFDD_WORKERS")) {
        char* end = nullptr;
        const unsigned long n = std::strtoul(env, &end, 10);
        if (end != env && *end == '\0' && n > 0) {
            return static_cast<unsigned>(n);
        }
        std::cerr << "warning: ignoring DTFDD_WORKERS=" << env << "\n";
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

std::string slurp(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot read " + path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::optional<std::filesystem::path> as_path(const std::string& s)
{
    if (s.empty()) {
        return std::nullopt;
    }
    return std::filesystem::path(s);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"D-TFDD link-level simulator"};
    app.require_subcommand(1);
    app.set_version_flag("--version", DTFDD_VERSION);

    std::string spec_path;
    std::string out_dir;

    auto* run_cmd = app.add_subcommand("run", "simulate every grid point and write runs/aggregate CSVs");
    run_cmd->add_option("spec", spec_path, "experiment spec or manifest (JSON)")->required();
    run_cmd->add_option("--out", out_dir, "output directory (overrides output.directory)");

    auto* region_cmd = app.add_subcommand("region", "sweep mu and write the throughput region CSV");
    region_cmd->add_option("spec", spec_path, "experiment spec or manifest (JSON)")->required();
    region_cmd->add_option("--out", out_dir, "output directory (overrides output.directory)");

    auto* validate_cmd = app.add_subcommand("validate", "check a spec and print its normalized form");
    validate_cmd->add_option("spec", spec_path, "experiment spec or manifest (JSON)")->required();

    std::string csv_path;
    dtfdd::FitOptions fit_options;
    auto* fit_cmd = app.add_subcommand("fit-diversity", "log-log outage slope per scheme of an aggregate CSV");
    fit_cmd->add_option("csv", csv_path, "aggregate.csv from `run`")->required();
    fit_cmd->add_option("--min-events", fit_options.min_events, "minimum outage events per point");
    fit_cmd->add_option("--min-points", fit_options.min_points, "minimum qualifying points");
    fit_cmd->add_option("--max-points", fit_options.max_points, "use only the highest-SINR N points (0 = all)");

    std::string x_col = "sinr_db";
    std::string y_col = "outage_rate";
    auto* plot_cmd = app.add_subcommand("plot-data", "emit gnuplot column blocks from a CSV");
    plot_cmd->add_option("csv", csv_path, "CSV written by `run` or `region`")->required();
    plot_cmd->add_option("--x", x_col, "x column");
    plot_cmd->add_option("--y", y_col, "y column");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kInvalid;
    }

    try {
        if (*run_cmd) {
            const auto spec = dtfdd::load_spec(spec_path);
            const auto out = dtfdd::run_experiment(spec, worker_count(), as_path(out_dir));
            std::cout << "wrote " << out.runs.string() << "\n"
                      << "wrote " << out.aggregate.string() << "\n"
                      << "wrote " << out.manifest.string() << "\n";
        } else if (*region_cmd) {
            const auto spec = dtfdd::load_spec(spec_path);
            const auto out = dtfdd::run_region(spec, worker_count(), as_path(out_dir));
            std::cout << "wrote " << out.aggregate.string() << "\n"
                      << "wrote " << out.manifest.string() << "\n";
        } else if (*validate_cmd) {
            const auto spec = dtfdd::load_spec(spec_path);
            std::cout << dtfdd::spec_to_json(spec);
        } else if (*fit_cmd) {
            const auto fits = dtfdd::fit_diversity_csv(slurp(csv_path), fit_options);
            std::cout << "scheme,levels,mu,slope,intercept,points\n";
            bool any = false;
            for (const auto& f : fits) {
                if (!f.fit) {
                    std::cerr << f.scheme << " (levels=" << f.levels << ", mu=" << f.mu << "): " << f.error << "\n";
                    continue;
                }
                any = true;
                std::printf("%s,%zu,%.12g,%.6f,%.6f,%zu\n",
                            f.scheme.c_str(),
                            f.levels,
                            f.mu,
                            f.fit->slope,
                            f.fit->intercept,
                            f.fit->used.size());
            }
            if (!any) {
                return kInvalid;
            }
        } else if (*plot_cmd) {
            std::cout << dtfdd::gnuplot_columns(slurp(csv_path), x_col, y_col);
        }
    } catch (const dtfdd::SpecError& e) {
        std::cerr << "invalid spec: " << e.what() << "\n";
        return kInvalid;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kRuntime;
    }
    return kOk;
}
