// vranfair: command-line front end for the fair-allocation simulator.
//
// Subcommands:
//   run    simulate one scenario under one policy, write regret/trace CSVs
//          and a summary JSON
//   fit    fit linear server profiles from a measurement CSV
//   sweep  repeat `run` across values of one axis, merge a summary CSV
//
// Exit codes: 0 success, 1 bad arguments/config/input files, 2 failure while
// running or writing.  Values from --config override command-line flags.
// Every artifact embeds provenance (tool version, config hash, seed).

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "vranfair/evaluation.hpp"
#include "vranfair/models.hpp"
#include "vranfair/scenarios.hpp"

namespace {

using nlohmann::json;
using namespace vranfair;

constexpr const char* kVersion = "0.1.0";

// ---------------------------------------------------------------------------
// small utilities

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= static_cast<std::uint64_t>(c);
        h *= 1099511628211ull;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw std::runtime_error("failed while reading " + path);
    return buf.str();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file " + path);
    out << text;
    out.flush();
    if (!out) throw std::runtime_error("failed while writing " + path);
}

void append_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::app);
    if (!out) throw std::runtime_error("cannot open output file " + path);
    out << text;
    out.flush();
    if (!out) throw std::runtime_error("failed while writing " + path);
}

// File-name-safe variant of a token ("noisy:0.3" -> "noisy-0.3").
std::string sanitize_token(std::string s) {
    for (char& c : s)
        if (c == ':' || c == '/' || c == '\\' || c == ' ') c = '-';
    return s;
}

std::vector<std::string> split_csv(const std::string& csv) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(csv);
    while (std::getline(in, item, ',')) out.push_back(item);
    return out;
}

std::vector<std::uint64_t> parse_seeds(const std::string& csv) {
    std::vector<std::uint64_t> seeds;
    for (const std::string& tok : split_csv(csv)) {
        try {
            size_t pos = 0;
            const unsigned long long v = std::stoull(tok, &pos);
            if (pos != tok.size()) throw std::invalid_argument(tok);
            seeds.push_back(static_cast<std::uint64_t>(v));
        } catch (const std::exception&) {
            throw std::invalid_argument("bad seed '" + tok + "' in seeds list '" + csv + "'");
        }
    }
    if (seeds.empty()) throw std::invalid_argument("seeds list must not be empty");
    return seeds;
}

bool assignment_kind(ScenarioKind kind) {
    return kind == ScenarioKind::kAssignment1 || kind == ScenarioKind::kAssignment2;
}

// ---------------------------------------------------------------------------
// option resolution (flags, then config file on top)

struct RawOptions {
    std::string scenario;
    std::string inline_scenario_json; // config file may carry the spec inline
    std::string policy;               // empty = default for the scenario kind
    std::string pred = "none";
    std::string seeds = "1";
    std::string out = ".";
    std::string config;

    double alpha = 0.0, beta = 0.0, phi = 0.0, phi_h = 0.0, cap_k = 0.0;
    long horizon = 0;
    bool has_alpha = false, has_beta = false, has_phi = false, has_phi_h = false;
    bool has_cap_k = false, has_horizon = false;
};

double config_number(const json& v, const std::string& key) {
    if (!v.is_number()) throw std::invalid_argument("config key '" + key + "' must be a number");
    return v.get<double>();
}

std::string config_string(const json& v, const std::string& key) {
    if (!v.is_string()) throw std::invalid_argument("config key '" + key + "' must be a string");
    return v.get<std::string>();
}

// Values found in the config file replace whatever the flags said.
void apply_config_file(RawOptions& raw) {
    if (raw.config.empty()) return;
    json doc;
    try {
        doc = json::parse(slurp(raw.config));
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config file is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw std::invalid_argument("config file must hold a JSON object");
    for (const auto& [key, value] : doc.items()) {
        if (key == "scenario") {
            if (value.is_object()) {
                raw.inline_scenario_json = value.dump();
                raw.scenario.clear();
            } else {
                raw.scenario = config_string(value, key);
                raw.inline_scenario_json.clear();
            }
        } else if (key == "policy") {
            raw.policy = config_string(value, key);
        } else if (key == "pred") {
            raw.pred = config_string(value, key);
        } else if (key == "out") {
            raw.out = config_string(value, key);
        } else if (key == "seeds") {
            if (value.is_array()) {
                std::string joined;
                for (const json& e : value) {
                    if (!e.is_number_unsigned() && !e.is_number_integer())
                        throw std::invalid_argument("config key 'seeds' must list integers");
                    if (!joined.empty()) joined += ',';
                    joined += std::to_string(e.get<std::uint64_t>());
                }
                raw.seeds = joined;
            } else {
                raw.seeds = config_string(value, key);
            }
        } else if (key == "alpha") {
            raw.alpha = config_number(value, key);
            raw.has_alpha = true;
        } else if (key == "beta") {
            raw.beta = config_number(value, key);
            raw.has_beta = true;
        } else if (key == "phi") {
            raw.phi = config_number(value, key);
            raw.has_phi = true;
        } else if (key == "phi_h") {
            raw.phi_h = config_number(value, key);
            raw.has_phi_h = true;
        } else if (key == "K") {
            raw.cap_k = config_number(value, key);
            raw.has_cap_k = true;
        } else if (key == "T") {
            raw.horizon = static_cast<long>(config_number(value, key));
            raw.has_horizon = true;
        } else {
            throw std::invalid_argument("unknown config key '" + key +
                                        "' (expected scenario, policy, pred, alpha, beta, phi, "
                                        "phi_h, K, T, seeds, out)");
        }
    }
}

struct RunSetup {
    ScenarioSpec spec; // defaults resolved, validated
    bool spec_from_file = false;
    std::string scenario_label;
    PolicyKind policy = PolicyKind::kOftrl;
    std::string policy_label;
    PredictionMode pred;
    std::vector<std::uint64_t> seeds;
    std::string out_dir;
    std::string file_tag; // sweep adds "axis-value" so artifacts don't collide
    std::string config_hash;
    json provenance;
};

// Envelope defaults per problem family.  Assignment utilities live below
// 2 * lambda (the busy factor never exceeds 2) and savings scale linearly
// with phi_h; batching utilities are empty-buffer fractions in (0, 1].
FairnessParams derive_params(const ScenarioSpec& spec) {
    FairnessParams params;
    params.alpha = spec.alpha;
    params.beta = spec.beta;
    if (assignment_kind(spec.kind)) {
        params.u_min = 1.0;
        params.u_max = 2.2 * std::max(spec.lambda_bytes.hi, 1.0);
        const double scale = spec.phi_h > 0.0 ? spec.phi_h : 1e-9;
        params.h_min = 1e-3 * scale;
        params.h_max = 1e3 * scale;
    } else {
        params.u_min = 0.05;
        params.u_max = 1.0;
        params.h_min = 1.0;
        params.h_max = 2.0;
    }
    return params;
}

RunSetup resolve_setup(const RawOptions& raw, const std::string& command) {
    RunSetup s;

    // scenario: inline object, file path, or kind token
    const size_t first_char = raw.scenario.find_first_not_of(" \t\r\n");
    if (!raw.inline_scenario_json.empty()) {
        s.spec = scenario_from_json(raw.inline_scenario_json);
        s.spec_from_file = true;
    } else if (raw.scenario.empty()) {
        throw std::invalid_argument("--scenario is required (kind token or scenario JSON file)");
    } else if (first_char != std::string::npos && raw.scenario[first_char] == '{') {
        s.spec = scenario_from_json(raw.scenario);
        s.spec_from_file = true;
    } else if (std::filesystem::exists(raw.scenario)) {
        s.spec = scenario_from_json(slurp(raw.scenario));
        s.spec_from_file = true;
    } else {
        s.spec.kind = scenario_kind_from_string(raw.scenario);
    }

    // numeric overrides (flags or config file)
    if (raw.has_alpha) s.spec.alpha = raw.alpha;
    if (raw.has_beta) s.spec.beta = raw.beta;
    if (raw.has_phi) s.spec.phi = raw.phi;
    if (raw.has_phi_h) s.spec.phi_h = raw.phi_h;
    if (raw.has_cap_k) s.spec.cap_k = raw.cap_k;
    if (raw.has_horizon) s.spec.horizon = raw.horizon;
    else if (!s.spec_from_file) s.spec.horizon = 1000; // kind tokens carry no horizon

    if (!s.spec.trace_path.empty() && !std::filesystem::exists(s.spec.trace_path))
        throw std::invalid_argument("trace file does not exist: " + s.spec.trace_path);

    s.spec = resolve_defaults(s.spec);
    s.spec.validate();
    s.scenario_label = to_string(s.spec.kind);

    // policy token
    std::string token = raw.policy;
    if (token.empty()) token = assignment_kind(s.spec.kind) ? "alg1" : "alg2";
    const bool is_assign = assignment_kind(s.spec.kind);
    if (token == "alg1") {
        if (!is_assign)
            throw std::invalid_argument("policy alg1 runs assignment scenarios only; "
                                        "use alg2 for batching");
        s.policy = PolicyKind::kOftrl;
    } else if (token == "alg2") {
        if (is_assign)
            throw std::invalid_argument("policy alg2 runs batching scenarios only; "
                                        "use alg1 for assignment");
        s.policy = PolicyKind::kOftrl;
    } else if (token == "oftrl") {
        s.policy = PolicyKind::kOftrl;
        token = is_assign ? "alg1" : "alg2";
    } else if (token == "slot-fair") {
        s.policy = PolicyKind::kSlotFair;
    } else if (token == "utilitarian") {
        s.policy = PolicyKind::kUtilitarian;
    } else {
        throw std::invalid_argument("unknown policy '" + token +
                                    "' (expected alg1, alg2, oftrl, slot-fair, utilitarian)");
    }
    s.policy_label = token;

    s.pred = PredictionMode::parse(raw.pred);
    s.seeds = parse_seeds(raw.seeds);
    s.out_dir = raw.out;

    std::string seeds_joined;
    for (std::uint64_t seed : s.seeds) {
        if (!seeds_joined.empty()) seeds_joined += ',';
        seeds_joined += std::to_string(seed);
    }
    const std::string canonical = scenario_to_json(s.spec) + "\npolicy=" + s.policy_label +
                                  "\npred=" + s.pred.name() + "\nseeds=" + seeds_joined +
                                  "\nversion=" + kVersion;
    s.config_hash = hex64(fnv1a(canonical));

    const OracleBudget budget;
    s.provenance = json{{"version", kVersion},
                        {"command", command},
                        {"config_hash", s.config_hash},
                        {"scenario", json::parse(scenario_to_json(s.spec))},
                        {"policy", s.policy_label},
                        {"pred", s.pred.name()},
                        {"seeds", s.seeds},
                        {"oracle_budget",
                         {{"restarts", budget.restarts},
                          {"iterations", budget.iterations},
                          {"tolerance", budget.tolerance}}}};
    return s;
}

// ---------------------------------------------------------------------------
// artifact writers

std::string artifact_stem(const RunSetup& s) {
    std::string stem = s.scenario_label + "_" + s.policy_label + "_" + sanitize_token(s.pred.name());
    if (!s.file_tag.empty()) stem += "_" + s.file_tag;
    return stem;
}

std::string provenance_comment(const RunSetup& s, std::uint64_t seed) {
    return std::string("# provenance: version=") + kVersion + " config_hash=" + s.config_hash +
           " scenario=" + s.scenario_label + " policy=" + s.policy_label + " pred=" +
           s.pred.name() + " seed=" + std::to_string(seed) + "\n";
}

void write_assignment_trace_csv(const std::string& path, const AssignmentTrace& trace,
                                const std::string& comment) {
    std::ostringstream out;
    out << "t,vbs,server,share\n";
    for (size_t t = 0; t < trace.slots.size(); ++t) {
        const Mat& x = trace.slots[t].x;
        for (int i = 0; i < x.rows; ++i)
            for (int j = 0; j < x.cols; ++j)
                out << (t + 1) << ',' << i << ',' << j << ',' << g17(x(i, j)) << '\n';
    }
    out << comment;
    write_text(path, out.str());
}

void write_mintb_trace_csv(const std::string& path, const MinTbTrace& trace,
                           const std::string& comment) {
    std::ostringstream out;
    out << "t,user,threshold\n";
    for (size_t t = 0; t < trace.slots.size(); ++t) {
        const Vec& y = trace.slots[t].y;
        for (size_t i = 0; i < y.size(); ++i)
            out << (t + 1) << ',' << i << ',' << g17(y[i]) << '\n';
    }
    out << comment;
    write_text(path, out.str());
}

// ---------------------------------------------------------------------------
// run execution (shared by `run` and `sweep`)

struct RunResult {
    std::vector<RunAggregate> aggregates;
    bool oracle_all_converged = true;
    std::string summary_path;
};

RunResult execute_runs(const RunSetup& s) {
    RunResult result;
    const std::string stem = artifact_stem(s);
    json prov = s.provenance;

    for (std::uint64_t seed : s.seeds) {
        ScenarioSpec sp = s.spec;
        sp.seed = seed;
        const EnvSequence seq = make_envs(sp);
        if (!prov.contains("scenario_note") && !seq.note.empty()) prov["scenario_note"] = seq.note;
        const FairnessParams params = derive_params(seq.spec);
        const std::string comment = provenance_comment(s, seed);
        const std::string base =
            (std::filesystem::path(s.out_dir) / (stem + "_seed" + std::to_string(seed))).string();

        RunAggregate agg;
        if (seq.is_assignment()) {
            const AssignmentRun run = run_assignment(seq.assignment, params, s.policy, s.pred, seed);
            const AssignmentOracle star = benchmark_assignment(seq.assignment, params, {}, seed);
            if (!star.report.converged) result.oracle_all_converged = false;
            const std::vector<RegretRow> rows =
                regret_rows(run.trace, star.x, seq.assignment, params, s.policy_label, seed);
            write_regret_csv(base + "_regret.csv", rows);
            append_text(base + "_regret.csv", comment);
            write_assignment_trace_csv(base + "_trace.csv", run.trace, comment);
            agg = aggregate_assignment(run.trace, star.x, seq.assignment, params, s.policy_label,
                                       seed, star.report);
            agg.fixed_point_failures = run.fixed_point_failures;
        } else {
            const MinTbRun run =
                run_mintb(seq.mintb, seq.spec.cap_k, params, s.policy, s.pred, seed);
            const MinTbOracle star =
                benchmark_mintb(seq.mintb, seq.spec.cap_k, params, {}, seed);
            if (!star.report.converged) result.oracle_all_converged = false;
            const std::vector<RegretRow> rows =
                regret_rows(run.trace, star.y, seq.mintb, params, s.policy_label, seed);
            write_regret_csv(base + "_regret.csv", rows);
            append_text(base + "_regret.csv", comment);
            write_mintb_trace_csv(base + "_trace.csv", run.trace, comment);
            agg = aggregate_mintb(run.trace, star.y, seq.mintb, params, s.policy_label, seed,
                                  star.report);
            agg.fixed_point_failures = run.fixed_point_failures;
        }
        result.aggregates.push_back(agg);
    }

    result.summary_path =
        (std::filesystem::path(s.out_dir) / (stem + "_summary.json")).string();
    write_summary_json(result.summary_path, prov.dump(), result.aggregates);
    if (!result.oracle_all_converged)
        std::cerr << "warning: hindsight oracle missed its tolerance on at least one seed; "
                     "the summary JSON flags oracle_all_converged=false\n";
    return result;
}

// ---------------------------------------------------------------------------
// subcommands

int cmd_run(RawOptions raw) {
    RunSetup setup;
    try {
        apply_config_file(raw);
        setup = resolve_setup(raw, "run");
        std::filesystem::create_directories(setup.out_dir);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    }
    try {
        const RunResult result = execute_runs(setup);
        std::cerr << "wrote " << result.summary_path << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return 2;
    }
}

int cmd_fit(const std::string& measurements_path, const std::string& out_path) {
    std::vector<ServerProfile> profiles;
    std::vector<std::string> warnings;
    std::string content;
    try {
        content = slurp(measurements_path);
        std::istringstream in(content);
        const std::vector<MeasurementRow> rows = load_measurements(in);
        profiles = fit_linear_profiles(rows, &warnings);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    }
    try {
        for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";
        const std::string hash = hex64(fnv1a(content + "\nversion=" + kVersion));
        json doc;
        doc["provenance"] = json{{"version", kVersion},
                                 {"command", "fit"},
                                 {"config_hash", hash},
                                 {"source", measurements_path}};
        doc["profiles"] = json::parse(profiles_to_json(profiles));
        const std::filesystem::path out(out_path);
        if (out.has_parent_path()) std::filesystem::create_directories(out.parent_path());
        write_text(out_path, doc.dump(2) + "\n");
        std::cerr << "wrote " << out_path << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return 2;
    }
}

int cmd_sweep(RawOptions raw, const std::string& axis, const std::string& values_csv) {
    std::vector<RunSetup> setups;
    std::vector<std::string> tokens;
    try {
        apply_config_file(raw);
        if (axis != "alpha" && axis != "beta" && axis != "phi" && axis != "pred")
            throw std::invalid_argument("unknown sweep axis '" + axis +
                                        "' (expected alpha, beta, phi, pred)");
        tokens = split_csv(values_csv);
        if (tokens.empty()) throw std::invalid_argument("--values must list at least one value");
        for (const std::string& tok : tokens) {
            RawOptions one = raw;
            if (axis == "pred") {
                one.pred = tok;
            } else {
                double v = 0.0;
                try {
                    size_t pos = 0;
                    v = std::stod(tok, &pos);
                    if (pos != tok.size()) throw std::invalid_argument(tok);
                } catch (const std::exception&) {
                    throw std::invalid_argument("bad numeric value '" + tok + "' for axis " + axis);
                }
                if (axis == "alpha") {
                    one.alpha = v;
                    one.has_alpha = true;
                } else if (axis == "beta") {
                    one.beta = v;
                    one.has_beta = true;
                } else {
                    one.phi = v;
                    one.has_phi = true;
                }
            }
            RunSetup setup = resolve_setup(one, "sweep");
            setup.file_tag = axis + "-" + sanitize_token(tok);
            setup.provenance["sweep"] = json{{"axis", axis}, {"value", tok}};
            setups.push_back(std::move(setup));
        }
        std::filesystem::create_directories(raw.out);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    }

    try {
        std::ostringstream csv;
        csv << "axis,value,policy,pred,num_seeds,final_regret_mean,clip_count_mean,"
               "total_utility_mean,total_saving_mean,jain_utility_mean,jain_saving_mean,"
               "oracle_all_converged\n";
        for (size_t k = 0; k < setups.size(); ++k) {
            const RunResult result = execute_runs(setups[k]);
            const double n = static_cast<double>(result.aggregates.size());
            double regret = 0.0, clips = 0.0, utility = 0.0, saving = 0.0;
            double jain_u = 0.0, jain_h = 0.0;
            bool all_saving = true;
            for (const RunAggregate& agg : result.aggregates) {
                regret += agg.final_regret / n;
                clips += static_cast<double>(agg.clip_count) / n;
                utility += agg.total_utility / n;
                saving += agg.total_saving / n;
                jain_u += agg.utility_dispersion.jain / n;
                if (agg.has_saving_dispersion) jain_h += agg.saving_dispersion.jain / n;
                else all_saving = false;
            }
            csv << axis << ',' << tokens[k] << ',' << setups[k].policy_label << ','
                << setups[k].pred.name() << ',' << result.aggregates.size() << ',' << g17(regret)
                << ',' << g17(clips) << ',' << g17(utility) << ',' << g17(saving) << ','
                << g17(jain_u) << ',' << (all_saving ? g17(jain_h) : std::string()) << ','
                << (result.oracle_all_converged ? "true" : "false") << '\n';
        }
        std::string canonical = "sweep\naxis=" + axis + "\nvalues=" + values_csv;
        for (const RunSetup& setup : setups) canonical += "\n" + setup.config_hash;
        csv << "# provenance: version=" << kVersion << " config_hash="
            << hex64(fnv1a(canonical + "\nversion=" + kVersion)) << " axis=" << axis << "\n";
        const std::string path =
            (std::filesystem::path(raw.out) / ("sweep_" + axis + ".csv")).string();
        write_text(path, csv.str());
        std::cerr << "wrote " << path << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return 2;
    }
}

// ---------------------------------------------------------------------------

void add_run_options(CLI::App* cmd, RawOptions& raw) {
    cmd->add_option("--scenario", raw.scenario,
                    "scenario kind token (assignment-1, assignment-2, mintb-1, mintb-2-trace, "
                    "mintb-3, custom-file) or path to a scenario JSON file");
    cmd->add_option("--policy", raw.policy,
                    "alg1 | alg2 | oftrl | slot-fair | utilitarian "
                    "(default: alg1 for assignment scenarios, alg2 for batching)");
    cmd->add_option("--pred", raw.pred, "prediction mode: none | perfect | naive | noisy:<c>");
    cmd->add_option("--alpha", raw.alpha, "utility-side fairness exponent");
    cmd->add_option("--beta", raw.beta, "saving-side fairness exponent");
    cmd->add_option("--phi", raw.phi, "batching transmission-cost weight");
    cmd->add_option("--phi-h", raw.phi_h, "assignment savings weight");
    cmd->add_option("--K", raw.cap_k, "batching threshold cap");
    cmd->add_option("--T", raw.horizon,
                    "horizon in slots (default 1000 for kind tokens; scenario files carry their own)");
    cmd->add_option("--seeds", raw.seeds, "comma-separated seed list (default 1)");
    cmd->add_option("--out", raw.out, "output directory (default .)");
    cmd->add_option("--config", raw.config,
                    "JSON config file; its values override the command-line flags");
}

void collect_flag_presence(CLI::App* cmd, RawOptions& raw) {
    raw.has_alpha = cmd->count("--alpha") > 0;
    raw.has_beta = cmd->count("--beta") > 0;
    raw.has_phi = cmd->count("--phi") > 0;
    raw.has_phi_h = cmd->count("--phi-h") > 0;
    raw.has_cap_k = cmd->count("--K") > 0;
    raw.has_horizon = cmd->count("--T") > 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"vranfair: two-sided long-term fair allocation simulator"};
    app.require_subcommand(1);

    RawOptions raw;
    std::string measurements_path, fit_out, axis, values_csv;

    CLI::App* run = app.add_subcommand("run", "simulate one scenario under one policy");
    add_run_options(run, raw);

    CLI::App* fit = app.add_subcommand("fit", "fit server profiles from a measurement CSV");
    fit->add_option("--measurements", measurements_path, "measurement CSV path")->required();
    fit->add_option("--out", fit_out, "output profile JSON path")->required();

    CLI::App* sweep = app.add_subcommand("sweep", "run across values of one axis, merge a CSV");
    add_run_options(sweep, raw);
    sweep->add_option("--axis", axis, "alpha | beta | phi | pred")->required();
    sweep->add_option("--values", values_csv, "comma-separated axis values")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    if (run->parsed()) {
        collect_flag_presence(run, raw);
        return cmd_run(raw);
    }
    if (fit->parsed()) return cmd_fit(measurements_path, fit_out);
    if (sweep->parsed()) {
        collect_flag_presence(sweep, raw);
        return cmd_sweep(raw, axis, values_csv);
    }
    return 1;
}
