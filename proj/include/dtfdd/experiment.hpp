#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dtfdd/channel_model.hpp"
#include "dtfdd/sim_engine.hpp"

namespace dtfdd {

/// Invalid experiment specification; `field()` names the offending key path.
class SpecError : public std::runtime_error {
public:
    SpecError(std::string field, const std::string& message)
        : std::runtime_error(field + ": " + message), field_(std::move(field))
    {
    }
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

struct ChannelSpec {
    double mean_gain = 1.0;
    double noise_variance = 1.0;
    /// When set, mean_gain = path_loss / noise_variance.
    std::optional<PathLossParams> path_loss;

    double normalized_gain() const;
};

struct RegionSpec {
    std::vector<double> mu_grid;
    std::vector<double> rate_grid;
    bool common_random_numbers = false;
};

/// One experiment, loaded from a JSON document (sections: rates, channel,
/// interference, power, estimator, static_tdd, region, output).
struct ExperimentSpec {
    std::string name = "experiment";
    std::uint64_t seed = 1;
    std::vector<Scheme> schemes;
    std::uint64_t slots = 100000;
    int replicates = 1;
    std::vector<double> sinr_db;
    std::vector<double> mu{0.5};

    /// Rate-set sizes M (= L). The single-level rate is either base_rate or
    /// total_rate / M.
    std::vector<std::size_t> levels{1};
    std::optional<double> base_rate = 1.0;
    std::optional<double> total_rate;

    ChannelSpec channel;
    InterferenceModel interference;

    PowerMode power_mode = PowerMode::calibrated;
    std::uint64_t pilot_slots = 100000;
    int max_calibration_rounds = 10;
    double calibration_tolerance = 0.01;

    double epsilon = 0.05;
    StepSchedule step;
    StepSchedule multiplier_step;

    bool static_literal_outage = false;

    RegionSpec region;
    std::string output_directory = "results";

    void validate() const;
    double rate_step(std::size_t level_count) const;
};

ExperimentSpec parse_spec(std::string_view json_text);
/// Accepts either a spec document or a manifest written by a previous run.
ExperimentSpec load_spec(const std::filesystem::path& path);
/// Normalized spec (defaults filled in, grids expanded).
std::string spec_to_json(const ExperimentSpec& spec, int indent = 2);
std::string manifest_json(const ExperimentSpec& spec);

/// Average-power budget reaching the given SINR:
/// P = SINR_linear * (1 + K*w) / mean_gain.
double budget_from_sinr(const ExperimentSpec& spec, double sinr_db);

RunConfig make_run_config(const ExperimentSpec& spec,
                          Scheme scheme,
                          std::size_t levels,
                          double mu,
                          double sinr_db,
                          std::uint64_t seed);

struct JobKey {
    Scheme scheme = Scheme::dtfdd_known;
    std::size_t levels = 1;
    double mu = 0.5;
    double sinr_db = 0.0;
    int replicate = 0;
    std::uint64_t seed = 0;
};

struct JobResult {
    JobKey key;
    double base_rate = 0.0;
    RunMetrics metrics;
};

/// Every (scheme, levels, mu, sinr, replicate) job, in that nesting order.
std::vector<JobKey> enumerate_jobs(const ExperimentSpec& spec);
std::vector<JobResult> run_jobs(const ExperimentSpec& spec, unsigned workers);

struct AggregateRow {
    Scheme scheme = Scheme::dtfdd_known;
    std::size_t levels = 1;
    double mu = 0.5;
    double sinr_db = 0.0;
    std::uint64_t slots = 0;
    std::uint64_t outage_slots = 0;
    double outage_rate = 0.0;
    /// 95% normal-approximation binomial half-width.
    double ci_halfwidth = 0.0;
    double throughput_1 = 0.0;
    double throughput_2 = 0.0;
};

std::vector<AggregateRow> aggregate(std::span<const JobResult> results);

std::string runs_csv(std::span<const JobResult> results);
std::string aggregate_csv(std::span<const AggregateRow> rows);

struct ExperimentOutputs {
    std::filesystem::path runs;
    std::filesystem::path aggregate;
    std::filesystem::path manifest;
};

/// Runs all jobs and writes runs.csv, aggregate.csv and manifest.json into
/// `out_dir` (defaults to the spec's output directory).
ExperimentOutputs run_experiment(const ExperimentSpec& spec,
                                 unsigned workers,
                                 std::optional<std::filesystem::path> out_dir = std::nullopt);

struct RegionRow {
    Scheme scheme = Scheme::dtfdd_known;
    std::size_t levels = 1;
    double sinr_db = 0.0;
    RegionPoint point;
};

std::vector<RegionRow> run_region_rows(const ExperimentSpec& spec, unsigned workers);
std::string region_csv(std::span<const RegionRow> rows);

/// Sweeps region.mu_grid per (scheme, levels, sinr) and writes region.csv
/// and manifest.json.
ExperimentOutputs run_region(const ExperimentSpec& spec,
                             unsigned workers,
                             std::optional<std::filesystem::path> out_dir = std::nullopt);

// ---------------------------------------------------------------------------
// Diversity fit

struct OutagePoint {
    double sinr_db = 0.0;
    double outage_rate = 0.0;
    std::uint64_t outage_events = 0;
};

struct FitOptions {
    std::uint64_t min_events = 100;
    std::size_t min_points = 3;
    /// Keep only the highest-SINR qualifying points; 0 keeps all.
    std::size_t max_points = 0;
};

struct DiversityFit {
    double slope = 0.0;
    double intercept = 0.0;
    std::vector<OutagePoint> used;
};

class InsufficientData : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Least-squares slope of log10(outage) against log10(P) = sinr_db / 10 + c.
DiversityFit fit_diversity(std::span<const OutagePoint> points, const FitOptions& options = {});

struct SchemeFit {
    std::string scheme;
    std::size_t levels = 1;
    double mu = 0.5;
    std::optional<DiversityFit> fit;
    std::string error;
};

/// Fits every (scheme, levels, mu) group of an aggregate CSV.
std::vector<SchemeFit> fit_diversity_csv(std::string_view csv_text, const FitOptions& options = {});

/// Whitespace-separated blocks per (scheme, levels, mu) group for gnuplot's
/// `index` selector.
std::string gnuplot_columns(std::string_view csv_text, std::string_view x_column, std::string_view y_column);

} // namespace dtfdd
