#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "dtfdd/analytics.hpp"
#include "dtfdd/experiment.hpp"
#include "dtfdd/scheduler_known_ici.hpp"
#include "dtfdd/scheduler_unknown_ici.hpp"
#include "dtfdd/sim_engine.hpp"

namespace py = pybind11;
using namespace dtfdd;

namespace {

InterferenceModel make_interference(int interferers, double per_interferer_mean, const std::string& correlation)
{
    InterferenceModel m{interferers, per_interferer_mean, correlation_mode_from_string(correlation)};
    m.validate();
    return m;
}

py::object decision_tuple(const SlotDecision& d)
{
    const auto idx = d.rate_index();
    return py::make_tuple(std::string(to_string(d.state())), idx ? py::cast(*idx) : py::none());
}

py::dict estimator_dict(const EstimatorState& s)
{
    py::dict out;
    out["slot_count"] = s.slot_count;
    py::list links;
    for (const auto& l : s.links) {
        py::dict d;
        d["interference"] = l.interference;
        d["gradient"] = l.gradient;
        d["multiplier"] = l.multiplier;
        d["error_rate"] = l.error_rate;
        d["prev_capacity"] = l.prev_capacity;
        links.append(d);
    }
    out["links"] = links;
    return out;
}

py::dict metrics_dict(const RunMetrics& m)
{
    py::dict out;
    out["slots"] = m.slots;
    out["throughput_1"] = m.throughput_1;
    out["throughput_2"] = m.throughput_2;
    out["sum_throughput"] = m.sum_throughput();
    out["outage_rate"] = m.outage_rate;
    out["outage_slots"] = m.outage_slots;
    out["failure_slots"] = m.failure_slots;
    out["silent_slots"] = m.silent_slots;
    out["active_slots"] = m.active_slots;
    out["failed_slots"] = m.failed_slots;
    out["tx_power"] = m.tx_power;
    out["realized_power"] = m.realized_power;
    out["calibration_rounds"] = m.calibration.rounds;
    out["calibration_converged"] = m.calibration.converged;
    if (m.final_estimator) {
        out["estimator"] = estimator_dict(*m.final_estimator);
    }
    return out;
}

} // namespace

PYBIND11_MODULE(_dtfdd, m)
{
    m.doc() = "D-TFDD link-level simulator core";
    m.attr("__version__") = DTFDD_VERSION;

    py::register_exception<SpecError>(m, "SpecError", PyExc_ValueError);
    py::register_exception<InsufficientData>(m, "InsufficientData", PyExc_ValueError);
    py::register_exception<ContractViolation>(m, "ContractViolation", PyExc_RuntimeError);

    m.def("capacity", &capacity, py::arg("power"), py::arg("gamma"), py::arg("gamma_i"));
    m.def("erlang_pdf", &erlang_pdf, py::arg("z"), py::arg("shape"), py::arg("scale"));
    m.def("erlang_cdf", &erlang_cdf, py::arg("z"), py::arg("shape"), py::arg("scale"));

    m.def(
        "outage_known_ici_asymptotic",
        [](double rate,
           double power,
           double mean_gain,
           int interferers,
           double per_interferer_mean,
           const std::string& correlation) {
            AsymptoticInputs in;
            in.rate = rate;
            in.power = power;
            in.mean_gain = mean_gain;
            in.interference = make_interference(interferers, per_interferer_mean, correlation);
            return outage_known_ici_asymptotic(in);
        },
        py::arg("rate"),
        py::arg("power"),
        py::arg("mean_gain") = 1.0,
        py::arg("interferers") = 1,
        py::arg("per_interferer_mean") = 0.0,
        py::arg("correlation") = "independent");

    m.def(
        "outage_unknown_ici_asymptotic",
        [](double rate,
           double power,
           double mean_gain,
           int interferers,
           double per_interferer_mean,
           const std::string& correlation,
           double estimate_1,
           double estimate_2) {
            AsymptoticInputs in;
            in.rate = rate;
            in.power = power;
            in.mean_gain = mean_gain;
            in.interference = make_interference(interferers, per_interferer_mean, correlation);
            in.estimate_1 = estimate_1;
            in.estimate_2 = estimate_2;
            const auto o = outage_unknown_ici_asymptotic(in);
            py::dict d;
            d["link_1"] = o.link_1;
            d["link_2"] = o.link_2;
            d["silent"] = o.silent;
            d["total"] = o.total;
            return d;
        },
        py::arg("rate"),
        py::arg("power"),
        py::arg("mean_gain") = 1.0,
        py::arg("interferers") = 1,
        py::arg("per_interferer_mean") = 0.0,
        py::arg("correlation") = "independent",
        py::arg("estimate_1") = 0.0,
        py::arg("estimate_2") = 0.0);

    m.def(
        "decide_known",
        [](double mu, std::vector<double> rates_1, std::vector<double> rates_2, double cap_1, double cap_2) {
            const KnownIciConfig cfg{mu, RateSet(std::move(rates_1)), RateSet(std::move(rates_2))};
            cfg.validate();
            return decision_tuple(decide_known(cfg, cap_1, cap_2));
        },
        py::arg("mu"),
        py::arg("rates_1"),
        py::arg("rates_2"),
        py::arg("capacity_1"),
        py::arg("capacity_2"),
        "Returns (state, rate_index) with rate_index None for silence.");

    py::class_<UnknownIciScheduler>(m, "UnknownIciScheduler")
        .def(py::init([](double mu, std::vector<double> rates_1, std::vector<double> rates_2, double epsilon) {
                 return UnknownIciScheduler(
                     UnknownIciConfig{mu, RateSet(std::move(rates_1)), RateSet(std::move(rates_2)), epsilon, {}, {}});
             }),
             py::arg("mu"),
             py::arg("rates_1"),
             py::arg("rates_2"),
             py::arg("epsilon") = 0.05)
        .def(
            "decide",
            [](const UnknownIciScheduler& s, std::array<double, 2> powers, double g1, double g2) {
                return decision_tuple(s.decide(powers, g1, g2));
            },
            py::arg("powers"),
            py::arg("gamma_1"),
            py::arg("gamma_2"))
        .def(
            "observe",
            [](UnknownIciScheduler& s,
               const std::string& state,
               std::optional<std::size_t> rate_index,
               std::optional<bool> decoded,
               std::array<double, 2> powers,
               double g1,
               double g2) {
                SlotDecision d = SlotDecision::silence();
                if (state == "u1_transmit" || state == "u2_transmit") {
                    if (!rate_index) {
                        throw std::invalid_argument("transmit decision needs a rate index");
                    }
                    d = SlotDecision::transmit(state == "u1_transmit" ? 0 : 1, *rate_index);
                } else if (state != "silence") {
                    throw std::invalid_argument("unknown state: " + state);
                }
                std::optional<SlotFeedback> fb;
                if (decoded) {
                    fb = SlotFeedback{*decoded};
                }
                s.observe(d, fb, powers, g1, g2);
            },
            py::arg("state"),
            py::arg("rate_index"),
            py::arg("decoded"),
            py::arg("powers"),
            py::arg("gamma_1"),
            py::arg("gamma_2"))
        .def_property_readonly("state", [](const UnknownIciScheduler& s) { return estimator_dict(s.state()); });

    m.def(
        "simulate",
        [](const std::string& scheme,
           std::uint64_t slots,
           double mu,
           std::vector<double> rates_1,
           std::vector<double> rates_2,
           std::array<double, 2> power,
           const std::string& power_mode,
           double mean_gain,
           int interferers,
           double per_interferer_mean,
           const std::string& correlation,
           double epsilon,
           std::uint64_t pilot_slots,
           std::uint64_t seed) {
            RunConfig rc;
            rc.scheme = scheme_from_string(scheme);
            rc.slots = slots;
            rc.mu = mu;
            rc.rates_1 = RateSet(std::move(rates_1));
            rc.rates_2 = RateSet(std::move(rates_2));
            rc.power_budget = power;
            rc.power_mode = power_mode_from_string(power_mode);
            rc.link_1 = LinkStatistics{mean_gain, 1.0, 0.0};
            rc.link_2 = rc.link_1;
            rc.interference = make_interference(interferers, per_interferer_mean, correlation);
            rc.epsilon = epsilon;
            rc.pilot_slots = pilot_slots;
            rc.seed = seed;
            RunMetrics out;
            {
                py::gil_scoped_release release;
                out = run(rc);
            }
            return metrics_dict(out);
        },
        py::arg("scheme"),
        py::arg("slots"),
        py::arg("mu") = 0.5,
        py::arg("rates_1") = std::vector<double>{1.0},
        py::arg("rates_2") = std::vector<double>{1.0},
        py::arg("power") = std::array<double, 2>{10.0, 10.0},
        py::arg("power_mode") = "calibrated",
        py::arg("mean_gain") = 1.0,
        py::arg("interferers") = 1,
        py::arg("per_interferer_mean") = 0.0,
        py::arg("correlation") = "independent",
        py::arg("epsilon") = 0.05,
        py::arg("pilot_slots") = 100000,
        py::arg("seed") = 1);

    m.def("validate_spec", [](const std::string& json_text) { return spec_to_json(parse_spec(json_text)); });

    m.def(
        "run_experiment",
        [](const std::string& json_text, const std::filesystem::path& out_dir, unsigned workers) {
            const auto spec = parse_spec(json_text);
            ExperimentOutputs out;
            {
                py::gil_scoped_release release;
                out = run_experiment(spec, workers, out_dir);
            }
            py::dict d;
            d["runs"] = out.runs;
            d["aggregate"] = out.aggregate;
            d["manifest"] = out.manifest;
            return d;
        },
        py::arg("spec_json"),
        py::arg("out_dir"),
        py::arg("workers") = 1);

    m.def(
        "fit_diversity",
        [](const std::vector<std::tuple<double, double, std::uint64_t>>& points,
           std::uint64_t min_events,
           std::size_t min_points,
           std::size_t max_points) {
            std::vector<OutagePoint> pts;
            for (const auto& [sinr, rate, events] : points) {
                pts.push_back({sinr, rate, events});
            }
            const auto fit = dtfdd::fit_diversity(pts, FitOptions{min_events, min_points, max_points});
            return py::make_tuple(fit.slope, fit.intercept, fit.used.size());
        },
        py::arg("points"),
        py::arg("min_events") = 100,
        py::arg("min_points") = 3,
        py::arg("max_points") = 0,
        "points: (sinr_db, outage_rate, outage_events) triples; returns (slope, intercept, used).");
}
