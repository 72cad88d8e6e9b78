#include "dtfdd/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "dtfdd/parallel.hpp"
#include "dtfdd/random.hpp"

namespace dtfdd {

using ojson = nlohmann::ordered_json;

namespace {

constexpr std::uint64_t kRegionStream = 0x726567696f6eULL;

std::string fmt_num(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string join_path(const std::string& parent, std::string_view key)
{
    return parent.empty() ? std::string(key) : parent + "." + std::string(key);
}

/// Typed, path-aware view over one JSON object section.
class Section {
public:
    Section(const ojson& node, std::string path) : node_(node), path_(std::move(path))
    {
        if (!node_.is_object()) {
            throw SpecError(path_.empty() ? "<root>" : path_, "expected an object");
        }
    }

    void allow_only(std::initializer_list<std::string_view> keys) const
    {
        for (const auto& [k, _] : node_.items()) {
            if (std::find(keys.begin(), keys.end(), k) == keys.end()) {
                throw SpecError(join_path(path_, k), "unknown key");
            }
        }
    }

    bool has(std::string_view key) const { return node_.contains(std::string(key)); }
    const ojson& at(std::string_view key) const { return node_.at(std::string(key)); }
    std::string path(std::string_view key) const { return join_path(path_, key); }

    std::optional<Section> section(std::string_view key) const
    {
        if (!has(key)) {
            return std::nullopt;
        }
        return Section(at(key), path(key));
    }

    double number(std::string_view key, double fallback) const
    {
        if (!has(key)) {
            return fallback;
        }
        const auto& v = at(key);
        if (!v.is_number()) {
            throw SpecError(path(key), "expected a number");
        }
        return v.get<double>();
    }

    std::uint64_t unsigned_int(std::string_view key, std::uint64_t fallback) const
    {
        if (!has(key)) {
            return fallback;
        }
        const auto& v = at(key);
        if (v.is_number_unsigned()) {
            return v.get<std::uint64_t>();
        }
        if (v.is_number_integer() && v.get<std::int64_t>() >= 0) {
            return static_cast<std::uint64_t>(v.get<std::int64_t>());
        }
        if (v.is_number_float()) {
            const double d = v.get<double>();
            if (d >= 0.0 && d == std::floor(d) && d < 1.8e19) {
                return static_cast<std::uint64_t>(d);
            }
        }
        throw SpecError(path(key), "expected a non-negative integer");
    }

    bool boolean(std::string_view key, bool fallback) const
    {
        if (!has(key)) {
            return fallback;
        }
        const auto& v = at(key);
        if (!v.is_boolean()) {
            throw SpecError(path(key), "expected true or false");
        }
        return v.get<bool>();
    }

    std::string string(std::string_view key, std::string fallback) const
    {
        if (!has(key)) {
            return fallback;
        }
        const auto& v = at(key);
        if (!v.is_string()) {
            throw SpecError(path(key), "expected a string");
        }
        return v.get<std::string>();
    }

    /// Either a list of numbers or {"start", "stop", "step"}.
    std::vector<double> grid(std::string_view key) const
    {
        const auto& v = at(key);
        std::vector<double> out;
        if (v.is_array()) {
            for (const auto& e : v) {
                if (!e.is_number()) {
                    throw SpecError(path(key), "grid entries must be numbers");
                }
                out.push_back(e.get<double>());
            }
            return out;
        }
        Section range(v, path(key));
        range.allow_only({"start", "stop", "step"});
        if (!range.has("start") || !range.has("stop") || !range.has("step")) {
            throw SpecError(path(key), "range needs start, stop and step");
        }
        const double start = range.number("start", 0.0);
        const double stop = range.number("stop", 0.0);
        const double step = range.number("step", 0.0);
        if (!(step > 0.0) || stop < start) {
            throw SpecError(path(key), "range needs step > 0 and stop >= start");
        }
        const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
        for (std::size_t i = 0; i < count; ++i) {
            out.push_back(start + static_cast<double>(i) * step);
        }
        return out;
    }

private:
    const ojson& node_;
    std::string path_;
};

template <typename Fn>
auto wrap_field(const std::string& field, Fn fn) -> decltype(fn())
{
    try {
        return fn();
    } catch (const SpecError&) {
        throw;
    } catch (const std::exception& e) {
        throw SpecError(field, e.what());
    }
}

ExperimentSpec parse_document(const ojson& doc)
{
    Section root(doc, "");
    root.allow_only({"name",
                     "seed",
                     "schemes",
                     "slots",
                     "replicates",
                     "sinr_db",
                     "mu",
                     "rates",
                     "channel",
                     "interference",
                     "power",
                     "estimator",
                     "static_tdd",
                     "region",
                     "output"});

    ExperimentSpec spec;
    spec.name = root.string("name", spec.name);
    spec.seed = root.unsigned_int("seed", spec.seed);
    spec.slots = root.unsigned_int("slots", spec.slots);
    spec.replicates = static_cast<int>(root.unsigned_int("replicates", 1));

    if (!root.has("schemes") || !root.at("schemes").is_array()) {
        throw SpecError("schemes", "expected a list of scheme names");
    }
    for (const auto& s : root.at("schemes")) {
        if (!s.is_string()) {
            throw SpecError("schemes", "scheme names must be strings");
        }
        spec.schemes.push_back(wrap_field("schemes", [&] { return scheme_from_string(s.get<std::string>()); }));
    }

    if (!root.has("sinr_db")) {
        throw SpecError("sinr_db", "missing SINR grid");
    }
    spec.sinr_db = root.grid("sinr_db");
    if (root.has("mu")) {
        spec.mu = root.at("mu").is_number() ? std::vector<double>{root.number("mu", 0.5)} : root.grid("mu");
    }

    if (auto rates = root.section("rates")) {
        rates->allow_only({"levels", "base_rate", "total_rate"});
        if (rates->has("levels")) {
            spec.levels.clear();
            const auto& lv = rates->at("levels");
            if (lv.is_number()) {
                spec.levels.push_back(rates->unsigned_int("levels", 1));
            } else if (lv.is_array()) {
                for (const auto& e : lv) {
                    if (!e.is_number_integer() && !e.is_number_unsigned()) {
                        throw SpecError(rates->path("levels"), "levels must be integers");
                    }
                    const auto n = e.get<std::int64_t>();
                    if (n < 1) {
                        throw SpecError(rates->path("levels"), "levels must be >= 1");
                    }
                    spec.levels.push_back(static_cast<std::size_t>(n));
                }
            } else {
                throw SpecError(rates->path("levels"), "expected an integer or a list");
            }
        }
        if (rates->has("base_rate") && rates->has("total_rate")) {
            throw SpecError(rates->path("total_rate"), "give either base_rate or total_rate, not both");
        }
        if (rates->has("total_rate")) {
            spec.base_rate.reset();
            spec.total_rate = rates->number("total_rate", 0.0);
        } else {
            spec.base_rate = rates->number("base_rate", 1.0);
        }
    }

    if (auto ch = root.section("channel")) {
        ch->allow_only({"mean_gain", "noise_variance", "path_loss"});
        spec.channel.mean_gain = ch->number("mean_gain", spec.channel.mean_gain);
        spec.channel.noise_variance = ch->number("noise_variance", spec.channel.noise_variance);
        if (auto pl = ch->section("path_loss")) {
            if (ch->has("mean_gain")) {
                throw SpecError(ch->path("mean_gain"), "give either mean_gain or path_loss, not both");
            }
            pl->allow_only({"carrier_freq_hz", "distance_m", "exponent"});
            PathLossParams p;
            p.carrier_freq_hz = pl->number("carrier_freq_hz", p.carrier_freq_hz);
            p.distance_m = pl->number("distance_m", p.distance_m);
            p.exponent = pl->number("exponent", p.exponent);
            spec.channel.path_loss = p;
        }
    }

    if (auto icfg = root.section("interference")) {
        icfg->allow_only({"interferers", "per_interferer_mean", "correlation"});
        spec.interference.num_interferers = static_cast<int>(icfg->unsigned_int("interferers", 1));
        spec.interference.per_interferer_mean = icfg->number("per_interferer_mean", 0.0);
        spec.interference.correlation = wrap_field(icfg->path("correlation"), [&] {
            return correlation_mode_from_string(icfg->string("correlation", "independent"));
        });
    }

    if (auto pw = root.section("power")) {
        pw->allow_only({"mode", "pilot_slots", "max_rounds", "tolerance"});
        spec.power_mode =
            wrap_field(pw->path("mode"), [&] { return power_mode_from_string(pw->string("mode", "calibrated")); });
        spec.pilot_slots = pw->unsigned_int("pilot_slots", spec.pilot_slots);
        spec.max_calibration_rounds = static_cast<int>(pw->unsigned_int("max_rounds", 10));
        spec.calibration_tolerance = pw->number("tolerance", spec.calibration_tolerance);
    }

    if (auto est = root.section("estimator")) {
        est->allow_only(
            {"epsilon", "step_scale", "step_exponent", "multiplier_step_scale", "multiplier_step_exponent"});
        spec.epsilon = est->number("epsilon", spec.epsilon);
        spec.step.scale = est->number("step_scale", spec.step.scale);
        spec.step.exponent = est->number("step_exponent", spec.step.exponent);
        spec.multiplier_step.scale = est->number("multiplier_step_scale", spec.multiplier_step.scale);
        spec.multiplier_step.exponent = est->number("multiplier_step_exponent", spec.multiplier_step.exponent);
    }

    if (auto st = root.section("static_tdd")) {
        st->allow_only({"literal_outage"});
        spec.static_literal_outage = st->boolean("literal_outage", false);
    }

    if (auto rg = root.section("region")) {
        rg->allow_only({"mu_grid", "rate_grid", "common_random_numbers"});
        if (rg->has("mu_grid")) {
            spec.region.mu_grid = rg->grid("mu_grid");
        }
        if (rg->has("rate_grid")) {
            spec.region.rate_grid = rg->grid("rate_grid");
        }
        spec.region.common_random_numbers = rg->boolean("common_random_numbers", false);
    }

    if (auto out = root.section("output")) {
        out->allow_only({"directory"});
        spec.output_directory = out->string("directory", spec.output_directory);
    }

    spec.validate();
    return spec;
}

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot read " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& content)
{
    std::error_code ec;
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) {
            throw std::runtime_error("cannot create directory " + path.parent_path().string() + ": " + ec.message());
        }
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << content;
    if (!out) {
        throw std::runtime_error("failed writing " + path.string());
    }
}

ojson spec_document(const ExperimentSpec& spec)
{
    ojson doc;
    doc["name"] = spec.name;
    doc["seed"] = spec.seed;
    ojson schemes = ojson::array();
    for (auto s : spec.schemes) {
        schemes.push_back(std::string(to_string(s)));
    }
    doc["schemes"] = schemes;
    doc["slots"] = spec.slots;
    doc["replicates"] = spec.replicates;
    doc["sinr_db"] = spec.sinr_db;
    doc["mu"] = spec.mu;

    ojson rates;
    rates["levels"] = spec.levels;
    if (spec.total_rate) {
        rates["total_rate"] = *spec.total_rate;
    } else {
        rates["base_rate"] = *spec.base_rate;
    }
    doc["rates"] = rates;

    ojson ch;
    if (spec.channel.path_loss) {
        ch["path_loss"] = {{"carrier_freq_hz", spec.channel.path_loss->carrier_freq_hz},
                           {"distance_m", spec.channel.path_loss->distance_m},
                           {"exponent", spec.channel.path_loss->exponent}};
    } else {
        ch["mean_gain"] = spec.channel.mean_gain;
    }
    ch["noise_variance"] = spec.channel.noise_variance;
    doc["channel"] = ch;

    doc["interference"] = {{"interferers", spec.interference.num_interferers},
                           {"per_interferer_mean", spec.interference.per_interferer_mean},
                           {"correlation", std::string(to_string(spec.interference.correlation))}};
    doc["power"] = {{"mode", std::string(to_string(spec.power_mode))},
                    {"pilot_slots", spec.pilot_slots},
                    {"max_rounds", spec.max_calibration_rounds},
                    {"tolerance", spec.calibration_tolerance}};
    doc["estimator"] = {{"epsilon", spec.epsilon},
                        {"step_scale", spec.step.scale},
                        {"step_exponent", spec.step.exponent},
                        {"multiplier_step_scale", spec.multiplier_step.scale},
                        {"multiplier_step_exponent", spec.multiplier_step.exponent}};
    doc["static_tdd"] = {{"literal_outage", spec.static_literal_outage}};
    if (!spec.region.mu_grid.empty() || !spec.region.rate_grid.empty()) {
        ojson rg;
        rg["mu_grid"] = spec.region.mu_grid;
        rg["rate_grid"] = spec.region.rate_grid;
        rg["common_random_numbers"] = spec.region.common_random_numbers;
        doc["region"] = rg;
    }
    doc["output"] = {{"directory", spec.output_directory}};
    return doc;
}

// --- minimal CSV reading (no quoting; our own output format) ---------------

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::optional<std::size_t> column(std::string_view name) const
    {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) {
                return i;
            }
        }
        return std::nullopt;
    }
};

std::vector<std::string> split_fields(std::string_view line)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        out.emplace_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) {
            break;
        }
        start = pos + 1;
    }
    return out;
}

CsvTable parse_csv(std::string_view text)
{
    CsvTable table;
    std::size_t start = 0;
    bool first = true;
    while (start < text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) {
            end = text.size();
        }
        auto line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        start = end + 1;
        if (line.empty()) {
            continue;
        }
        auto fields = split_fields(line);
        if (first) {
            table.header = std::move(fields);
            first = false;
        } else {
            if (fields.size() != table.header.size()) {
                throw std::runtime_error("csv row has " + std::to_string(fields.size()) + " fields, header has " +
                                         std::to_string(table.header.size()));
            }
            table.rows.push_back(std::move(fields));
        }
    }
    if (first) {
        throw std::runtime_error("csv is empty");
    }
    return table;
}

double to_double(const std::string& s)
{
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) {
        throw std::runtime_error("not a number: " + s);
    }
    return v;
}

} // namespace

// ---------------------------------------------------------------------------

double ChannelSpec::normalized_gain() const
{
    if (path_loss) {
        return compute_path_loss(*path_loss) / noise_variance;
    }
    return mean_gain;
}

double ExperimentSpec::rate_step(std::size_t level_count) const
{
    return total_rate ? *total_rate / static_cast<double>(level_count) : *base_rate;
}

void ExperimentSpec::validate() const
{
    if (schemes.empty()) {
        throw SpecError("schemes", "at least one scheme is required");
    }
    if (std::set<Scheme>(schemes.begin(), schemes.end()).size() != schemes.size()) {
        throw SpecError("schemes", "duplicate scheme");
    }
    if (slots < 1) {
        throw SpecError("slots", "must be >= 1");
    }
    if (replicates < 1) {
        throw SpecError("replicates", "must be >= 1");
    }
    if (sinr_db.empty()) {
        throw SpecError("sinr_db", "grid must not be empty");
    }
    if (mu.empty()) {
        throw SpecError("mu", "grid must not be empty");
    }
    for (double m : mu) {
        if (!(m >= 0.0 && m <= 1.0)) {
            throw SpecError("mu", "values must lie in [0, 1]");
        }
    }
    if (levels.empty()) {
        throw SpecError("rates.levels", "must not be empty");
    }
    if (std::set<std::size_t>(levels.begin(), levels.end()).size() != levels.size()) {
        throw SpecError("rates.levels", "duplicate level count");
    }
    if (total_rate && !(*total_rate > 0.0)) {
        throw SpecError("rates.total_rate", "must be > 0");
    }
    if (base_rate && !(*base_rate > 0.0)) {
        throw SpecError("rates.base_rate", "must be > 0");
    }
    if (std::find(schemes.begin(), schemes.end(), Scheme::static_tdd) != schemes.end() &&
        std::find(levels.begin(), levels.end(), std::size_t{1}) == levels.end()) {
        throw SpecError("rates.levels", "static_tdd needs a single-rate entry (levels containing 1)");
    }
    if (channel.path_loss) {
        wrap_field("channel.path_loss", [&] { channel.path_loss->validate(); });
    } else if (!(channel.mean_gain > 0.0)) {
        throw SpecError("channel.mean_gain", "must be > 0");
    }
    if (!(channel.noise_variance > 0.0)) {
        throw SpecError("channel.noise_variance", "must be > 0");
    }
    wrap_field("interference", [&] { interference.validate(); });
    if (pilot_slots < 1) {
        throw SpecError("power.pilot_slots", "must be >= 1");
    }
    if (max_calibration_rounds < 1) {
        throw SpecError("power.max_rounds", "must be >= 1");
    }
    if (!(calibration_tolerance > 0.0)) {
        throw SpecError("power.tolerance", "must be > 0");
    }
    wrap_field("estimator", [&] { UnknownIciConfig{0.5, {}, {}, epsilon, step, multiplier_step}.validate(); });
    for (double m : region.mu_grid) {
        if (!(m >= 0.0 && m <= 1.0)) {
            throw SpecError("region.mu_grid", "values must lie in [0, 1]");
        }
    }
    for (double r : region.rate_grid) {
        if (!(r > 0.0)) {
            throw SpecError("region.rate_grid", "values must be > 0");
        }
    }
    if (output_directory.empty()) {
        throw SpecError("output.directory", "must not be empty");
    }
}

ExperimentSpec parse_spec(std::string_view json_text)
{
    ojson doc;
    try {
        doc = ojson::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw SpecError("<document>", std::string("invalid JSON: ") + e.what());
    }
    if (doc.is_object() && doc.contains("spec") && doc.contains("toolkit")) {
        return parse_document(doc.at("spec"));
    }
    return parse_document(doc);
}

ExperimentSpec load_spec(const std::filesystem::path& path)
{
    return parse_spec(read_file(path));
}

std::string spec_to_json(const ExperimentSpec& spec, int indent)
{
    return spec_document(spec).dump(indent) + "\n";
}

std::string manifest_json(const ExperimentSpec& spec)
{
    ojson m;
    m["toolkit"] = "dtfdd";
    m["version"] = DTFDD_VERSION;
    m["seed"] = spec.seed;
    m["spec"] = spec_document(spec);
    return m.dump(2) + "\n";
}

double budget_from_sinr(const ExperimentSpec& spec, double sinr_db)
{
    const double sinr = std::pow(10.0, sinr_db / 10.0);
    return sinr * (1.0 + spec.interference.mean()) / spec.channel.normalized_gain();
}

RunConfig make_run_config(const ExperimentSpec& spec,
                          Scheme scheme,
                          std::size_t levels,
                          double mu,
                          double sinr_db,
                          std::uint64_t seed)
{
    RunConfig rc;
    rc.scheme = scheme;
    rc.slots = spec.slots;
    rc.link_1 = LinkStatistics{spec.channel.normalized_gain(), spec.channel.noise_variance, 0.0};
    rc.link_2 = rc.link_1;
    rc.interference = spec.interference;
    rc.rates_1 = RateSet::uniform(levels, spec.rate_step(levels));
    rc.rates_2 = rc.rates_1;
    rc.mu = mu;
    const double budget = budget_from_sinr(spec, sinr_db);
    rc.power_budget = {budget, budget};
    rc.power_mode = spec.power_mode;
    rc.pilot_slots = spec.pilot_slots;
    rc.max_calibration_rounds = spec.max_calibration_rounds;
    rc.calibration_tolerance = spec.calibration_tolerance;
    rc.epsilon = spec.epsilon;
    rc.step = spec.step;
    rc.multiplier_step = spec.multiplier_step;
    rc.static_literal_outage = spec.static_literal_outage;
    rc.seed = seed;
    return rc;
}

std::vector<JobKey> enumerate_jobs(const ExperimentSpec& spec)
{
    std::vector<JobKey> jobs;
    for (auto scheme : spec.schemes) {
        for (std::size_t li = 0; li < spec.levels.size(); ++li) {
            if (scheme == Scheme::static_tdd && spec.levels[li] != 1) {
                continue;
            }
            for (std::size_t mi = 0; mi < spec.mu.size(); ++mi) {
                for (std::size_t si = 0; si < spec.sinr_db.size(); ++si) {
                    for (int r = 0; r < spec.replicates; ++r) {
                        JobKey key;
                        key.scheme = scheme;
                        key.levels = spec.levels[li];
                        key.mu = spec.mu[mi];
                        key.sinr_db = spec.sinr_db[si];
                        key.replicate = r;
                        // Scheme-independent: all schemes see the same channel draws.
                        key.seed = derive_seed(spec.seed, {li, mi, si, static_cast<std::uint64_t>(r)});
                        jobs.push_back(key);
                    }
                }
            }
        }
    }
    return jobs;
}

std::vector<JobResult> run_jobs(const ExperimentSpec& spec, unsigned workers)
{
    spec.validate();
    const auto jobs = enumerate_jobs(spec);
    return parallel_map(jobs.size(), workers, [&](std::size_t i) {
        const auto& key = jobs[i];
        const RunConfig rc = make_run_config(spec, key.scheme, key.levels, key.mu, key.sinr_db, key.seed);
        JobResult r;
        r.key = key;
        r.base_rate = rc.rates_1[0];
        r.metrics = run(rc);
        return r;
    });
}

std::vector<AggregateRow> aggregate(std::span<const JobResult> results)
{
    std::vector<AggregateRow> rows;
    std::vector<std::uint64_t> count;
    for (const auto& r : results) {
        auto it = std::find_if(rows.begin(), rows.end(), [&](const AggregateRow& a) {
            return a.scheme == r.key.scheme && a.levels == r.key.levels && a.mu == r.key.mu &&
                   a.sinr_db == r.key.sinr_db;
        });
        if (it == rows.end()) {
            AggregateRow row;
            row.scheme = r.key.scheme;
            row.levels = r.key.levels;
            row.mu = r.key.mu;
            row.sinr_db = r.key.sinr_db;
            rows.push_back(row);
            count.push_back(0);
            it = rows.end() - 1;
        }
        const auto idx = static_cast<std::size_t>(it - rows.begin());
        it->slots += r.metrics.slots;
        it->outage_slots += r.metrics.outage_slots;
        it->throughput_1 += r.metrics.throughput_1 * static_cast<double>(r.metrics.slots);
        it->throughput_2 += r.metrics.throughput_2 * static_cast<double>(r.metrics.slots);
        ++count[idx];
    }
    for (auto& row : rows) {
        const double n = static_cast<double>(row.slots);
        row.outage_rate = static_cast<double>(row.outage_slots) / n;
        row.ci_halfwidth = 1.96 * std::sqrt(row.outage_rate * (1.0 - row.outage_rate) / n);
        row.throughput_1 /= n;
        row.throughput_2 /= n;
    }
    return rows;
}

std::string runs_csv(std::span<const JobResult> results)
{
    std::string out =
        "scheme,levels,base_rate,mu,sinr_db,replicate,seed,slots,outage_slots,outage_rate,failure_slots,"
        "silent_slots,throughput_1,throughput_2,sum_throughput,tx_power_1,tx_power_2,realized_power_1,"
        "realized_power_2,calibration_converged,estimate_1,estimate_2,error_rate_1,error_rate_2\n";
    for (const auto& r : results) {
        const auto& m = r.metrics;
        std::array<double, 2> est{0.0, 0.0};
        std::array<double, 2> err{0.0, 0.0};
        if (m.final_estimator) {
            for (std::size_t j = 0; j < 2; ++j) {
                est[j] = m.final_estimator->links[j].interference;
                err[j] = m.final_estimator->links[j].error_rate;
            }
        }
        out += std::string(to_string(r.key.scheme)) + "," + std::to_string(r.key.levels) + "," +
               fmt_num(r.base_rate) + "," + fmt_num(r.key.mu) + "," + fmt_num(r.key.sinr_db) + "," +
               std::to_string(r.key.replicate) + "," + std::to_string(r.key.seed) + "," + std::to_string(m.slots) +
               "," + std::to_string(m.outage_slots) + "," + fmt_num(m.outage_rate) + "," +
               std::to_string(m.failure_slots) + "," + std::to_string(m.silent_slots) + "," +
               fmt_num(m.throughput_1) + "," + fmt_num(m.throughput_2) + "," + fmt_num(m.sum_throughput()) + "," +
               fmt_num(m.tx_power[0]) + "," + fmt_num(m.tx_power[1]) + "," + fmt_num(m.realized_power[0]) + "," +
               fmt_num(m.realized_power[1]) + "," + (m.calibration.converged ? "1" : "0") + "," +
               fmt_num(est[0]) + "," + fmt_num(est[1]) + "," + fmt_num(err[0]) + "," + fmt_num(err[1]) + "\n";
    }
    return out;
}

std::string aggregate_csv(std::span<const AggregateRow> rows)
{
    std::string out = "scheme,sinr_db,outage_rate,ci_halfwidth,slots,outage_slots,levels,mu,throughput_1,"
                      "throughput_2,sum_throughput\n";
    for (const auto& a : rows) {
        out += std::string(to_string(a.scheme)) + "," + fmt_num(a.sinr_db) + "," + fmt_num(a.outage_rate) + "," +
               fmt_num(a.ci_halfwidth) + "," + std::to_string(a.slots) + "," + std::to_string(a.outage_slots) + "," +
               std::to_string(a.levels) + "," + fmt_num(a.mu) + "," + fmt_num(a.throughput_1) + "," +
               fmt_num(a.throughput_2) + "," + fmt_num(a.throughput_1 + a.throughput_2) + "\n";
    }
    return out;
}

ExperimentOutputs run_experiment(const ExperimentSpec& spec,
                                 unsigned workers,
                                 std::optional<std::filesystem::path> out_dir)
{
    spec.validate();
    const auto dir = out_dir ? *out_dir : std::filesystem::path(spec.output_directory);
    ExperimentOutputs outputs{dir / "runs.csv", dir / "aggregate.csv", dir / "manifest.json"};
    // Fail on an unwritable destination before spending time simulating.
    write_file(outputs.manifest, manifest_json(spec));

    const auto results = run_jobs(spec, workers);
    const auto rows = aggregate(results);
    write_file(outputs.runs, runs_csv(results));
    write_file(outputs.aggregate, aggregate_csv(rows));
    return outputs;
}

std::vector<RegionRow> run_region_rows(const ExperimentSpec& spec, unsigned workers)
{
    spec.validate();
    if (spec.region.mu_grid.empty()) {
        throw SpecError("region.mu_grid", "region sweep needs a mu grid");
    }
    std::vector<RegionRow> rows;
    for (auto scheme : spec.schemes) {
        for (std::size_t li = 0; li < spec.levels.size(); ++li) {
            const std::size_t levels = spec.levels[li];
            if (scheme == Scheme::static_tdd && levels != 1) {
                continue;
            }
            for (std::size_t si = 0; si < spec.sinr_db.size(); ++si) {
                RegionConfig rc;
                rc.base = make_run_config(spec,
                                          scheme,
                                          levels,
                                          spec.region.mu_grid.front(),
                                          spec.sinr_db[si],
                                          derive_seed(spec.seed, {kRegionStream, li, si}));
                rc.mu_grid = spec.region.mu_grid;
                rc.rate_grid = spec.region.rate_grid;
                rc.common_random_numbers = spec.region.common_random_numbers;
                rc.workers = workers;
                for (const auto& p : sweep_region(rc)) {
                    rows.push_back({scheme, levels, spec.sinr_db[si], p});
                }
            }
        }
    }
    return rows;
}

std::string region_csv(std::span<const RegionRow> rows)
{
    std::string out = "scheme,sinr_db,levels,mu,base_rate,throughput_1,throughput_2,outage_rate\n";
    for (const auto& r : rows) {
        out += std::string(to_string(r.scheme)) + "," + fmt_num(r.sinr_db) + "," + std::to_string(r.levels) + "," +
               fmt_num(r.point.mu) + "," + fmt_num(r.point.base_rate) + "," + fmt_num(r.point.throughput_1) + "," +
               fmt_num(r.point.throughput_2) + "," + fmt_num(r.point.outage_rate) + "\n";
    }
    return out;
}

ExperimentOutputs run_region(const ExperimentSpec& spec, unsigned workers, std::optional<std::filesystem::path> out_dir)
{
    spec.validate();
    const auto dir = out_dir ? *out_dir : std::filesystem::path(spec.output_directory);
    ExperimentOutputs outputs{{}, dir / "region.csv", dir / "manifest.json"};
    write_file(outputs.manifest, manifest_json(spec));
    write_file(outputs.aggregate, region_csv(run_region_rows(spec, workers)));
    return outputs;
}

// ---------------------------------------------------------------------------

DiversityFit fit_diversity(std::span<const OutagePoint> points, const FitOptions& options)
{
    std::vector<OutagePoint> used;
    for (const auto& p : points) {
        if (p.outage_events >= options.min_events && p.outage_rate > 0.0) {
            used.push_back(p);
        }
    }
    std::sort(used.begin(), used.end(), [](const auto& a, const auto& b) { return a.sinr_db < b.sinr_db; });
    if (options.max_points > 0 && used.size() > options.max_points) {
        used.erase(used.begin(), used.end() - static_cast<std::ptrdiff_t>(options.max_points));
    }
    if (used.size() < std::max<std::size_t>(options.min_points, 2)) {
        throw InsufficientData("diversity fit needs " + std::to_string(options.min_points) +
                               " points with >= " + std::to_string(options.min_events) + " outage events, have " +
                               std::to_string(used.size()));
    }

    const double n = static_cast<double>(used.size());
    double mx = 0.0;
    double my = 0.0;
    for (const auto& p : used) {
        mx += p.sinr_db / 10.0;
        my += std::log10(p.outage_rate);
    }
    mx /= n;
    my /= n;
    double sxx = 0.0;
    double sxy = 0.0;
    for (const auto& p : used) {
        const double dx = p.sinr_db / 10.0 - mx;
        sxx += dx * dx;
        sxy += dx * (std::log10(p.outage_rate) - my);
    }
    if (sxx == 0.0) {
        throw InsufficientData("diversity fit needs distinct SINR values");
    }
    DiversityFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.used = std::move(used);
    return fit;
}

std::vector<SchemeFit> fit_diversity_csv(std::string_view csv_text, const FitOptions& options)
{
    const auto table = parse_csv(csv_text);
    const auto c_scheme = table.column("scheme");
    const auto c_sinr = table.column("sinr_db");
    const auto c_rate = table.column("outage_rate");
    const auto c_slots = table.column("slots");
    if (!c_scheme || !c_sinr || !c_rate || !c_slots) {
        throw std::runtime_error("csv needs scheme, sinr_db, outage_rate and slots columns");
    }
    const auto c_events = table.column("outage_slots");
    const auto c_levels = table.column("levels");
    const auto c_mu = table.column("mu");

    struct Group {
        SchemeFit head;
        std::vector<OutagePoint> points;
    };
    std::vector<Group> groups;
    for (const auto& row : table.rows) {
        SchemeFit head;
        head.scheme = row[*c_scheme];
        head.levels = c_levels ? static_cast<std::size_t>(std::stoul(row[*c_levels])) : 1;
        head.mu = c_mu ? to_double(row[*c_mu]) : 0.5;
        auto it = std::find_if(groups.begin(), groups.end(), [&](const Group& g) {
            return g.head.scheme == head.scheme && g.head.levels == head.levels && g.head.mu == head.mu;
        });
        if (it == groups.end()) {
            groups.push_back({head, {}});
            it = groups.end() - 1;
        }
        OutagePoint p;
        p.sinr_db = to_double(row[*c_sinr]);
        p.outage_rate = to_double(row[*c_rate]);
        p.outage_events = c_events ? std::stoull(row[*c_events])
                                   : static_cast<std::uint64_t>(std::llround(p.outage_rate * to_double(row[*c_slots])));
        it->points.push_back(p);
    }

    std::vector<SchemeFit> fits;
    for (auto& g : groups) {
        SchemeFit f = g.head;
        try {
            f.fit = fit_diversity(g.points, options);
        } catch (const InsufficientData& e) {
            f.error = e.what();
        }
        fits.push_back(std::move(f));
    }
    return fits;
}

std::string gnuplot_columns(std::string_view csv_text, std::string_view x_column, std::string_view y_column)
{
    const auto table = parse_csv(csv_text);
    const auto cx = table.column(x_column);
    const auto cy = table.column(y_column);
    if (!cx || !cy) {
        throw std::runtime_error("csv lacks column " + std::string(!cx ? x_column : y_column));
    }
    std::vector<std::size_t> keys;
    for (std::string_view k : {"scheme", "levels", "mu"}) {
        if (auto c = table.column(k)) {
            keys.push_back(*c);
        }
    }
    std::vector<std::pair<std::string, std::string>> blocks;
    for (const auto& row : table.rows) {
        std::string label;
        for (auto k : keys) {
            label += (label.empty() ? "" : " ") + table.header[k] + "=" + row[k];
        }
        auto it = std::find_if(blocks.begin(), blocks.end(), [&](const auto& b) { return b.first == label; });
        if (it == blocks.end()) {
            blocks.emplace_back(label, "");
            it = blocks.end() - 1;
        }
        it->second += row[*cx] + " " + row[*cy] + "\n";
    }
    std::string out;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        if (i > 0) {
            out += "\n\n";
        }
        out += "# " + blocks[i].first + "\n# " + std::string(x_column) + " " + std::string(y_column) + "\n" +
               blocks[i].second;
    }
    return out;
}

} // namespace dtfdd
