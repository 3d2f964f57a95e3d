#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "vranfair/evaluation.hpp"
#include "vranfair/fairness.hpp"
#include "vranfair/models.hpp"
#include "vranfair/scenarios.hpp"

namespace py = pybind11;
using namespace vranfair;

namespace {

// One-call simulator: scenario JSON (or kind token) in, aggregate stats out.
py::dict simulate(const std::string& scenario, const std::string& policy, const std::string& pred,
                  std::uint64_t seed, double u_min, double u_max, double h_min, double h_max) {
    ScenarioSpec spec;
    const size_t first = scenario.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && scenario[first] == '{') {
        spec = scenario_from_json(scenario);
    } else {
        spec.kind = scenario_kind_from_string(scenario);
        spec.horizon = 200;
        spec = resolve_defaults(spec);
    }
    spec.seed = seed;
    const EnvSequence seq = make_envs(spec);

    // NaN bounds take the per-family defaults (same derivation as the CLI)
    const bool is_assignment = !seq.assignment.empty();
    FairnessParams params;
    params.alpha = spec.alpha;
    params.beta = spec.beta;
    if (is_assignment) {
        const double scale = spec.phi_h > 0.0 ? spec.phi_h : 1e-9;
        params.u_min = std::isnan(u_min) ? 1.0 : u_min;
        params.u_max = std::isnan(u_max) ? 2.2 * std::max(spec.lambda_bytes.hi, 1.0) : u_max;
        params.h_min = std::isnan(h_min) ? 1e-3 * scale : h_min;
        params.h_max = std::isnan(h_max) ? 1e3 * scale : h_max;
    } else {
        params.u_min = std::isnan(u_min) ? 0.05 : u_min;
        params.u_max = std::isnan(u_max) ? 1.0 : u_max;
        params.h_min = std::isnan(h_min) ? 1.0 : h_min;
        params.h_max = std::isnan(h_max) ? 2.0 : h_max;
    }
    params.validate();

    PolicyKind kind = PolicyKind::kOftrl;
    if (policy == "slot-fair") kind = PolicyKind::kSlotFair;
    else if (policy == "utilitarian") kind = PolicyKind::kUtilitarian;
    else if (policy != "oftrl" && policy != "alg1" && policy != "alg2")
        throw std::invalid_argument("unknown policy '" + policy + "'");
    const PredictionMode mode = PredictionMode::parse(pred);

    py::dict out;
    out["scenario"] = std::string(to_string(spec.kind));
    out["seed"] = seed;
    if (is_assignment) {
        const AssignmentOracle star = benchmark_assignment(seq.assignment, params, {}, seed);
        const AssignmentRun run = run_assignment(seq.assignment, params, kind, mode, seed);
        RunAggregate agg = aggregate_assignment(run.trace, star.x, seq.assignment, params,
                                                policy, seed, star.report);
        out["final_regret"] = agg.final_regret;
        out["clip_count"] = agg.clip_count;
        out["total_utility"] = agg.total_utility;
        out["total_saving"] = agg.total_saving;
        out["jain_utility"] = agg.utility_dispersion.jain;
        out["jain_saving"] = agg.saving_dispersion.jain;
        out["oracle_converged"] = star.report.converged;
    } else {
        const MinTbOracle star = benchmark_mintb(seq.mintb, spec.cap_k, params, {}, seed);
        const MinTbRun run = run_mintb(seq.mintb, spec.cap_k, params, kind, mode, seed);
        RunAggregate agg = aggregate_mintb(run.trace, star.y, seq.mintb, params, policy, seed,
                                           star.report);
        out["final_regret"] = agg.final_regret;
        out["clip_count"] = agg.clip_count;
        out["total_utility"] = agg.total_utility;
        out["total_saving"] = agg.total_saving;
        out["jain_utility"] = agg.utility_dispersion.jain;
        out["oracle_converged"] = star.report.converged;
    }
    return out;
}

std::string fit_profiles(const std::string& measurements_csv) {
    std::istringstream in(measurements_csv);
    return profiles_to_json(fit_linear_profiles(load_measurements(in)));
}

} // namespace

PYBIND11_MODULE(_vranfair, m) {
    m.doc() = "two-sided horizon-fair resource allocation simulator";

    m.def("f_alpha", &f_alpha, py::arg("u"), py::arg("alpha"),
          "alpha-fairness value of a positive scalar");
    m.def("f_alpha_prime", &f_alpha_prime, py::arg("u"), py::arg("alpha"));
    m.def(
        "fairness_sum",
        [](const std::vector<double>& u, double alpha) { return fairness_sum(u, alpha); },
        py::arg("u"), py::arg("alpha"));
    m.def(
        "dual_gradient",
        [](const std::vector<double>& theta, const std::vector<double>& u, double alpha) {
            return dual_gradient(theta, u, alpha);
        },
        py::arg("theta"), py::arg("u"), py::arg("alpha"),
        "gradient of the conjugate proxy at negative multipliers theta");
    m.def("canonical_scenario",
          [](const std::string& text) { return scenario_to_json(scenario_from_json(text)); },
          py::arg("scenario_json"), "validate and canonicalize a scenario document");
    const double nan = std::numeric_limits<double>::quiet_NaN();
    m.def("simulate", &simulate, py::arg("scenario"), py::arg("policy") = "oftrl",
          py::arg("pred") = "none", py::arg("seed") = 1, py::arg("u_min") = nan,
          py::arg("u_max") = nan, py::arg("h_min") = nan, py::arg("h_max") = nan,
          "run one seed of a scenario and return aggregate statistics "
          "(NaN bounds take the per-family envelope defaults)");
    m.def("fit_profiles", &fit_profiles, py::arg("measurements_csv"),
          "fit per-SNR linear server profiles from measurement CSV text");
}
