#include "vranfair/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "vranfair/rng.hpp"

namespace vranfair {

namespace {

using nlohmann::json;

// Tiny positive floors keeping generated envs inside the model's domain: a
// capacity draw of zero becomes an effectively unusable (epsilon) server.
constexpr double kCapacityEps = 1e-9;
constexpr double kPositiveEps = 1e-6;

constexpr std::uint64_t kTagAssignment1 = 1;
constexpr std::uint64_t kTagAssignment2 = 2;
constexpr std::uint64_t kTagMinTb1 = 3;
constexpr std::uint64_t kTagMinTb2 = 4;
constexpr std::uint64_t kTagMinTb3 = 5;

std::uint64_t tag_of(ScenarioKind kind) {
    switch (kind) {
        case ScenarioKind::kAssignment1: return kTagAssignment1;
        case ScenarioKind::kAssignment2: return kTagAssignment2;
        case ScenarioKind::kMinTb1: return kTagMinTb1;
        case ScenarioKind::kMinTb2Trace: return kTagMinTb2;
        case ScenarioKind::kMinTb3: return kTagMinTb3;
        case ScenarioKind::kCustomFile: return 6;
    }
    return 0;
}

void require(bool ok, const std::string& msg) {
    if (!ok) throw std::invalid_argument(msg);
}

bool is_assignment_kind(ScenarioKind kind) {
    return kind == ScenarioKind::kAssignment1 || kind == ScenarioKind::kAssignment2;
}

void check_bounds(const Bounds& b, const std::string& name, double min_lo) {
    require(std::isfinite(b.lo) && std::isfinite(b.hi), name + " bounds must be finite");
    require(b.lo <= b.hi, name + " bounds must be ordered");
    require(b.lo >= min_lo, name + " lower bound too small");
}

BetaTable beta_of(const ScenarioSpec& spec) {
    BetaTable beta;
    beta.snr_knots = spec.beta_knots;
    beta.values = spec.beta_values;
    return beta;
}

void expect_kind(const ScenarioSpec& spec, ScenarioKind kind) {
    require(spec.kind == kind, std::string("scenario kind is ") + to_string(spec.kind) +
                                   ", generator wants " + to_string(kind));
}

} // namespace

const char* to_string(ScenarioKind kind) {
    switch (kind) {
        case ScenarioKind::kAssignment1: return "assignment-1";
        case ScenarioKind::kAssignment2: return "assignment-2";
        case ScenarioKind::kMinTb1: return "mintb-1";
        case ScenarioKind::kMinTb2Trace: return "mintb-2-trace";
        case ScenarioKind::kMinTb3: return "mintb-3";
        case ScenarioKind::kCustomFile: return "custom-file";
    }
    return "?";
}

ScenarioKind scenario_kind_from_string(const std::string& name) {
    for (ScenarioKind kind : {ScenarioKind::kAssignment1, ScenarioKind::kAssignment2, ScenarioKind::kMinTb1,
                              ScenarioKind::kMinTb2Trace, ScenarioKind::kMinTb3, ScenarioKind::kCustomFile})
        if (name == to_string(kind)) return kind;
    throw std::invalid_argument("unknown scenario kind '" + name + "'");
}

ScenarioSpec resolve_defaults(ScenarioSpec spec) {
    if (spec.num_entities == 0)
        spec.num_entities = spec.kind == ScenarioKind::kMinTb1 ? 10 : 5;
    if (spec.num_servers == 0 && is_assignment_kind(spec.kind)) spec.num_servers = 4;
    if (!std::isfinite(spec.snr_db.lo) || !std::isfinite(spec.snr_db.hi))
        spec.snr_db = is_assignment_kind(spec.kind) ? Bounds{10.0, 30.0} : Bounds{20.0, 30.0};
    return spec;
}

void ScenarioSpec::validate() const {
    require(horizon >= 1, "horizon must be at least 1");
    require(num_entities >= 1, "need at least one vBS/user");
    if (is_assignment_kind(kind)) require(num_servers >= 1, "need at least one server");
    check_bounds(lambda_bytes, "lambda_bytes", 0.0);
    check_bounds(block_bits, "block_bits", kPositiveEps);
    check_bounds(snr_db, "snr_db", -1e9);
    check_bounds(price, "price", kPositiveEps);
    check_bounds(capacity, "capacity", 0.0);
    check_bounds(events, "events", kPositiveEps);
    check_bounds(bits_per_event, "bits_per_event", kPositiveEps);
    require(std::isfinite(alpha) && alpha >= 0.0, "alpha must be nonnegative");
    require(std::isfinite(beta) && beta >= 0.0, "beta must be nonnegative");
    require(std::isfinite(phi_h) && phi_h > 0.0, "phi_h must be positive");
    require(std::isfinite(phi) && phi >= 0.0, "phi must be nonnegative");
    require(std::isfinite(cap_k) && cap_k > 0.0, "K must be positive");
    require(std::isfinite(sine_amplitude_frac) && sine_amplitude_frac >= 0.0,
            "sine_amplitude_frac must be nonnegative");
    require(std::isfinite(noise_frac) && noise_frac >= 0.0, "noise_frac must be nonnegative");
    beta_of(*this).validate();
    if (kind == ScenarioKind::kMinTb3)
        require(num_entities <= 5, "the ping-pong pattern defines users 1..5 only");
    if (kind == ScenarioKind::kCustomFile) require(!trace_path.empty(), "custom-file needs trace_path");
    for (double s : rho_scales) require(std::isfinite(s) && s > 0.0, "rho_scales must be positive");
}

std::vector<ServerProfile> default_server_profiles(int servers) {
    std::vector<ServerProfile> fleet;
    for (int j = 0; j < servers; ++j) {
        ServerProfile prof;
        prof.snr_grid = {10.0, 15.0, 20.0, 25.0, 30.0};
        if (j % 2 == 0) {
            prof.id = "cpu" + std::to_string(j);
            prof.kind = ServerKind::kCpu;
            for (double s : prof.snr_grid) {
                SnrCoeffs c;
                c.zeta = (30.0 - 0.8 * s) * 1e-9; // decoding gets cheaper at high SNR
                c.o = 1e-4;
                c.delta = (30.0 - 0.5 * s) * 1e-9;
                c.gamma = 2e-4;
                prof.coeffs.push_back(c);
            }
        } else {
            prof.id = "ha" + std::to_string(j);
            prof.kind = ServerKind::kHa;
            for (size_t g = 0; g < prof.snr_grid.size(); ++g) {
                SnrCoeffs c;
                c.zeta = 1e-10; // accelerators are size-insensitive
                c.o = 3e-4;
                c.delta = 1e-11;
                c.gamma = 2.8e-3;
                prof.coeffs.push_back(c);
            }
        }
        fleet.push_back(std::move(prof));
    }
    return fleet;
}

EnvSequence gen_assignment_s1(const ScenarioSpec& raw) {
    const ScenarioSpec spec = resolve_defaults(raw);
    spec.validate();
    expect_kind(spec, ScenarioKind::kAssignment1);
    const std::uint64_t tag = tag_of(spec.kind);
    const int vbs = spec.num_entities, servers = spec.num_servers;
    const std::vector<ServerProfile> fleet = default_server_profiles(servers);

    EnvSequence out;
    out.spec = spec;
    out.note = "iid-uniform";
    for (long t = 1; t <= spec.horizon; ++t) {
        AssignmentEnv env;
        env.phi_h = spec.phi_h;
        env.profiles = fleet;
        env.lambda.resize(vbs);
        env.n.resize(vbs);
        env.snr.resize(vbs);
        for (int i = 0; i < vbs; ++i) {
            env.lambda[i] = stream_for(spec.seed, tag, t, i, field::kArrival)
                                .uniform(spec.lambda_bytes.lo, spec.lambda_bytes.hi);
            env.n[i] = stream_for(spec.seed, tag, t, i, field::kBlockSize)
                           .uniform(spec.block_bits.lo, spec.block_bits.hi);
            env.snr[i] = stream_for(spec.seed, tag, t, i, field::kSnr).uniform(spec.snr_db.lo, spec.snr_db.hi);
        }
        env.prices.resize(servers);
        env.capacity.resize(servers);
        for (int j = 0; j < servers; ++j) {
            env.prices[j] = stream_for(spec.seed, tag, t, j, field::kPrice).uniform(spec.price.lo, spec.price.hi);
            env.capacity[j] = std::max(
                kCapacityEps,
                stream_for(spec.seed, tag, t, j, field::kCapacity).uniform(spec.capacity.lo, spec.capacity.hi));
        }
        out.assignment.push_back(std::move(env));
    }
    return out;
}

EnvSequence gen_assignment_s2(const ScenarioSpec& raw) {
    const ScenarioSpec spec = resolve_defaults(raw);
    spec.validate();
    expect_kind(spec, ScenarioKind::kAssignment2);
    const std::uint64_t tag = tag_of(spec.kind);
    const int vbs = spec.num_entities, servers = spec.num_servers;
    const std::vector<ServerProfile> fleet = default_server_profiles(servers);
    const double period = std::sqrt(static_cast<double>(spec.horizon));

    // slot 0 carries the per-run mean draws
    Vec mean_lambda(vbs), mean_n(vbs), mean_s(vbs), mean_p(servers), mean_c(servers);
    for (int i = 0; i < vbs; ++i) {
        mean_lambda[i] = stream_for(spec.seed, tag, 0, i, field::kArrival)
                             .uniform(spec.lambda_bytes.lo, spec.lambda_bytes.hi);
        mean_n[i] =
            stream_for(spec.seed, tag, 0, i, field::kBlockSize).uniform(spec.block_bits.lo, spec.block_bits.hi);
        mean_s[i] = stream_for(spec.seed, tag, 0, i, field::kSnr).uniform(spec.snr_db.lo, spec.snr_db.hi);
    }
    for (int j = 0; j < servers; ++j) {
        mean_p[j] = stream_for(spec.seed, tag, 0, j, field::kPrice).uniform(spec.price.lo, spec.price.hi);
        mean_c[j] =
            stream_for(spec.seed, tag, 0, j, field::kCapacity).uniform(spec.capacity.lo, spec.capacity.hi);
    }

    EnvSequence out;
    out.spec = spec;
    out.note = "periodic-capacity";
    for (long t = 1; t <= spec.horizon; ++t) {
        AssignmentEnv env;
        env.phi_h = spec.phi_h;
        env.profiles = fleet;
        env.lambda.resize(vbs);
        env.n.resize(vbs);
        env.snr.resize(vbs);
        const double shrink = 1.0 / static_cast<double>(t); // vanishing perturbations
        for (int i = 0; i < vbs; ++i) {
            const double nl = stream_for(spec.seed, tag, t, i, field::kArrival).normal();
            env.lambda[i] = std::max(0.0, mean_lambda[i] * (1.0 + spec.noise_frac * nl * shrink));
            const double nn = stream_for(spec.seed, tag, t, i, field::kBlockSize).normal();
            env.n[i] = std::max(kPositiveEps, mean_n[i] * (1.0 + spec.noise_frac * nn * shrink));
            const double ns = stream_for(spec.seed, tag, t, i, field::kSnr).normal();
            env.snr[i] = mean_s[i] * (1.0 + spec.noise_frac * ns * shrink);
        }
        env.prices.resize(servers);
        env.capacity.resize(servers);
        for (int j = 0; j < servers; ++j) {
            const double np = stream_for(spec.seed, tag, t, j, field::kPrice).normal();
            // prices wobble ten times less than the rest
            env.prices[j] = std::max(kPositiveEps, mean_p[j] * (1.0 + 0.1 * spec.noise_frac * np * shrink));
            const double swing = std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / period);
            env.capacity[j] =
                std::max(kCapacityEps, mean_c[j] * (1.0 + spec.sine_amplitude_frac * swing));
        }
        out.assignment.push_back(std::move(env));
    }
    return out;
}

EnvSequence gen_mintb_s1(const ScenarioSpec& raw) {
    const ScenarioSpec spec = resolve_defaults(raw);
    spec.validate();
    expect_kind(spec, ScenarioKind::kMinTb1);
    const std::uint64_t tag = tag_of(spec.kind);
    const int users = spec.num_entities;

    EnvSequence out;
    out.spec = spec;
    out.note = "iid-uniform";
    for (long t = 1; t <= spec.horizon; ++t) {
        MinTbEnv env;
        env.phi = spec.phi;
        env.beta = beta_of(spec);
        env.b.resize(users);
        env.rho.resize(users);
        env.snr.resize(users);
        for (int i = 0; i < users; ++i) {
            env.b[i] = stream_for(spec.seed, tag, t, i, field::kArrival).uniform(spec.events.lo, spec.events.hi);
            env.rho[i] = stream_for(spec.seed, tag, t, i, field::kBlockSize)
                             .uniform(spec.bits_per_event.lo, spec.bits_per_event.hi);
            env.snr[i] = stream_for(spec.seed, tag, t, i, field::kSnr).uniform(spec.snr_db.lo, spec.snr_db.hi);
        }
        out.mintb.push_back(std::move(env));
    }
    return out;
}

EnvSequence gen_mintb_s3(const ScenarioSpec& raw) {
    const ScenarioSpec spec = resolve_defaults(raw);
    spec.validate();
    expect_kind(spec, ScenarioKind::kMinTb3);
    const std::uint64_t tag = tag_of(spec.kind);
    const int users = spec.num_entities;

    Vec mean_rho(users);
    for (int i = 0; i < users; ++i)
        mean_rho[i] = stream_for(spec.seed, tag, 0, i, field::kBlockSize)
                          .uniform(spec.bits_per_event.lo, spec.bits_per_event.hi);

    EnvSequence out;
    out.spec = spec;
    out.note = "ping-pong";
    for (long t = 1; t <= spec.horizon; ++t) {
        MinTbEnv env;
        env.phi = spec.phi;
        env.beta = beta_of(spec);
        env.b.resize(users);
        env.rho.resize(users);
        env.snr.resize(users);
        for (int i = 0; i < users; ++i) {
            const int ui = i + 1; // the pattern is stated for users 1..5
            const long period_b = 1L << ui;
            const long half_b = 1L << (ui - 1);
            env.b[i] = (t % period_b < half_b) ? spec.events.lo : spec.events.hi;
            // the SNR period shrinks with the user index and degenerates to a
            // constant at ui = 5, where the half-period drops below one slot
            const double period_s = std::exp2(5 - ui);
            const double half_s = std::exp2(4 - ui);
            env.snr[i] =
                std::fmod(static_cast<double>(t), period_s) < half_s ? spec.snr_db.lo : spec.snr_db.hi;
            const double noise = stream_for(spec.seed, tag, t, i, field::kBlockSize).normal();
            env.rho[i] = std::max(kPositiveEps, mean_rho[i] + 1e4 * noise / static_cast<double>(t));
        }
        out.mintb.push_back(std::move(env));
    }
    return out;
}

EnvSequence gen_synthetic_trace(const ScenarioSpec& raw) {
    const ScenarioSpec spec = resolve_defaults(raw);
    spec.validate();
    expect_kind(spec, ScenarioKind::kMinTb2Trace);
    const std::uint64_t tag = tag_of(spec.kind);
    const int users = spec.num_entities;

    // per-user anchors plus an on/off burst chain (sequential by design; the
    // other generators stay slot-parallel)
    Vec mean_rho(users), mean_s(users);
    std::vector<bool> burning(users);
    for (int i = 0; i < users; ++i) {
        mean_rho[i] = stream_for(spec.seed, tag, 0, i, field::kBlockSize)
                          .uniform(spec.bits_per_event.lo, spec.bits_per_event.hi);
        mean_s[i] = stream_for(spec.seed, tag, 0, i, field::kSnr).uniform(spec.snr_db.lo, spec.snr_db.hi);
        burning[i] = stream_for(spec.seed, tag, 0, i, field::kTraceBurst).next_unit() < 0.5;
    }

    EnvSequence out;
    out.spec = spec;
    out.note = "synthetic-burst";
    for (long t = 1; t <= spec.horizon; ++t) {
        MinTbEnv env;
        env.phi = spec.phi;
        env.beta = beta_of(spec);
        env.b.resize(users);
        env.rho.resize(users);
        env.snr.resize(users);
        for (int i = 0; i < users; ++i) {
            if (stream_for(spec.seed, tag, t, i, field::kTraceBurst).next_unit() < 0.1)
                burning[i] = !burning[i];
            RngStream ev = stream_for(spec.seed, tag, t, i, field::kArrival);
            env.b[i] = burning[i] ? ev.uniform(0.75 * spec.events.hi, spec.events.hi)
                                  : ev.uniform(spec.events.lo, 1.5 * spec.events.lo);
            const double jitter = stream_for(spec.seed, tag, t, i, field::kBlockSize).normal();
            env.rho[i] = std::max(kPositiveEps, mean_rho[i] * (1.0 + 0.05 * jitter));
            const double wobble = stream_for(spec.seed, tag, t, i, field::kSnr).normal();
            env.snr[i] = clamp(mean_s[i] + 0.5 * wobble, spec.snr_db.lo, spec.snr_db.hi);
        }
        out.mintb.push_back(std::move(env));
    }
    return out;
}

namespace {

constexpr const char* kTraceHeader = "slot,user,events_b,bits_per_event_rho,snr_db";

std::runtime_error trace_error(size_t line, const std::string& what) {
    return std::runtime_error("trace line " + std::to_string(line) + ": " + what);
}

double parse_trace_field(const std::string& field, size_t line, const char* name) {
    size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(field, &used);
    } catch (const std::exception&) {
        throw trace_error(line, std::string("cannot parse ") + name + " from '" + field + "'");
    }
    if (used != field.size())
        throw trace_error(line, std::string("trailing junk after ") + name + " in '" + field + "'");
    if (!std::isfinite(v)) throw trace_error(line, std::string(name) + " is not finite");
    return v;
}

struct TraceRow {
    long slot = 0;
    int user = 0;
    double b = 0.0;
    double rho = 0.0;
    double snr = 0.0;
};

} // namespace

EnvSequence load_trace(std::istream& in, const ScenarioSpec& raw) {
    ScenarioSpec spec = resolve_defaults(raw);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("trace file is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kTraceHeader)
        throw std::runtime_error(std::string("trace header must be exactly '") + kTraceHeader + "'");

    std::vector<TraceRow> rows;
    size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::string cur;
        for (char ch : line) {
            if (ch == ',') {
                fields.push_back(cur);
                cur.clear();
            } else {
                cur.push_back(ch);
            }
        }
        fields.push_back(cur);
        if (fields.size() != 5)
            throw trace_error(lineno, "expected 5 fields, got " + std::to_string(fields.size()));
        TraceRow row;
        const double slot_v = parse_trace_field(fields[0], lineno, "slot");
        const double user_v = parse_trace_field(fields[1], lineno, "user");
        if (slot_v != std::floor(slot_v) || slot_v < 1.0) throw trace_error(lineno, "slot must be an integer >= 1");
        if (user_v != std::floor(user_v) || user_v < 0.0) throw trace_error(lineno, "user must be an integer >= 0");
        row.slot = static_cast<long>(slot_v);
        row.user = static_cast<int>(user_v);
        row.b = parse_trace_field(fields[2], lineno, "events_b");
        row.rho = parse_trace_field(fields[3], lineno, "bits_per_event_rho");
        row.snr = parse_trace_field(fields[4], lineno, "snr_db");
        if (row.b <= 0.0) throw trace_error(lineno, "events_b must be positive");
        if (row.rho <= 0.0) throw trace_error(lineno, "bits_per_event_rho must be positive");
        rows.push_back(row);
    }
    if (rows.empty()) throw std::runtime_error("trace has no data rows");

    // users of slot 1 fix the population; thereafter slots advance one by one
    size_t users = 0;
    while (users < rows.size() && rows[users].slot == 1) ++users;
    if (users == 0) throw std::runtime_error("trace must start at slot 1");
    for (size_t r = 0; r < rows.size(); ++r) {
        const long want_slot = static_cast<long>(r / users) + 1;
        const int want_user = static_cast<int>(r % users);
        if (rows[r].slot != want_slot || rows[r].user != want_user)
            throw trace_error(r + 2, "expected slot " + std::to_string(want_slot) + " user " +
                                         std::to_string(want_user) + ", got slot " +
                                         std::to_string(rows[r].slot) + " user " + std::to_string(rows[r].user));
    }
    if (rows.size() % users != 0)
        throw std::runtime_error("trace ends mid-slot: " + std::to_string(rows.size()) + " rows for " +
                                 std::to_string(users) + " users");

    if (!spec.rho_scales.empty() && spec.rho_scales.size() != users)
        throw std::invalid_argument("rho_scales has " + std::to_string(spec.rho_scales.size()) +
                                    " entries for " + std::to_string(users) + " trace users");

    const long horizon = static_cast<long>(rows.size() / users);
    spec.num_entities = static_cast<int>(users);
    spec.horizon = horizon;
    spec.validate();

    EnvSequence out;
    out.spec = spec;
    out.note = spec.trace_path.empty() ? "trace" : spec.trace_path;
    for (long t = 0; t < horizon; ++t) {
        MinTbEnv env;
        env.phi = spec.phi;
        env.beta = beta_of(spec);
        env.b.resize(users);
        env.rho.resize(users);
        env.snr.resize(users);
        for (size_t i = 0; i < users; ++i) {
            const TraceRow& row = rows[static_cast<size_t>(t) * users + i];
            env.b[i] = row.b;
            env.rho[i] = spec.rho_scales.empty() ? row.rho : row.rho * spec.rho_scales[i];
            env.snr[i] = row.snr;
        }
        out.mintb.push_back(std::move(env));
    }
    return out;
}

EnvSequence load_trace_file(const ScenarioSpec& spec) {
    std::ifstream in(spec.trace_path);
    if (!in) throw std::runtime_error("cannot open trace file '" + spec.trace_path + "'");
    try {
        return load_trace(in, spec);
    } catch (const std::runtime_error& e) {
        throw std::runtime_error(spec.trace_path + ": " + e.what());
    }
}

void export_trace(const EnvSequence& envs, std::ostream& out) {
    require(!envs.mintb.empty(), "only batching sequences can be exported as traces");
    out << kTraceHeader << '\n';
    std::ostringstream fmt;
    fmt << std::setprecision(17);
    for (size_t t = 0; t < envs.mintb.size(); ++t) {
        const MinTbEnv& env = envs.mintb[t];
        for (int i = 0; i < env.num_users(); ++i) {
            fmt.str("");
            fmt << (t + 1) << ',' << i << ',' << env.b[i] << ',' << env.rho[i] << ',' << env.snr[i];
            out << fmt.str() << '\n';
        }
    }
}

void export_trace_file(const EnvSequence& envs, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write trace file '" + path + "'");
    export_trace(envs, out);
}

EnvSequence make_envs(const ScenarioSpec& raw) {
    const ScenarioSpec spec = resolve_defaults(raw);
    spec.validate();
    switch (spec.kind) {
        case ScenarioKind::kAssignment1: return gen_assignment_s1(spec);
        case ScenarioKind::kAssignment2: return gen_assignment_s2(spec);
        case ScenarioKind::kMinTb1: return gen_mintb_s1(spec);
        case ScenarioKind::kMinTb2Trace:
            return spec.trace_path.empty() ? gen_synthetic_trace(spec) : load_trace_file(spec);
        case ScenarioKind::kMinTb3: return gen_mintb_s3(spec);
        case ScenarioKind::kCustomFile: return load_trace_file(spec);
    }
    throw std::invalid_argument("unhandled scenario kind");
}

namespace {

Bounds bounds_from_json(const json& v, const std::string& key) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
        throw std::invalid_argument("scenario key '" + key + "' must be a [lo, hi] number pair");
    return Bounds{v[0].get<double>(), v[1].get<double>()};
}

std::vector<double> doubles_from_json(const json& v, const std::string& key) {
    if (!v.is_array()) throw std::invalid_argument("scenario key '" + key + "' must be an array of numbers");
    std::vector<double> out;
    for (const json& e : v) {
        if (!e.is_number()) throw std::invalid_argument("scenario key '" + key + "' must be an array of numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

} // namespace

ScenarioSpec scenario_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("scenario document is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw std::invalid_argument("scenario document must be a JSON object");

    ScenarioSpec spec;
    bool saw_kind = false;
    for (const auto& [key, value] : doc.items()) {
        if (key == "kind") {
            spec.kind = scenario_kind_from_string(value.get<std::string>());
            saw_kind = true;
        } else if (key == "I") {
            spec.num_entities = value.get<int>();
        } else if (key == "J") {
            spec.num_servers = value.get<int>();
        } else if (key == "T") {
            spec.horizon = static_cast<long>(value.get<std::int64_t>());
        } else if (key == "seed") {
            spec.seed = value.get<std::uint64_t>();
        } else if (key == "overrides") {
            if (!value.is_object()) throw std::invalid_argument("'overrides' must be a JSON object");
            for (const auto& [okey, oval] : value.items()) {
                if (okey == "alpha") spec.alpha = oval.get<double>();
                else if (okey == "beta") spec.beta = oval.get<double>();
                else if (okey == "phi_h") spec.phi_h = oval.get<double>();
                else if (okey == "phi") spec.phi = oval.get<double>();
                else if (okey == "K") spec.cap_k = oval.get<double>();
                else if (okey == "lambda_bytes") spec.lambda_bytes = bounds_from_json(oval, okey);
                else if (okey == "block_bits") spec.block_bits = bounds_from_json(oval, okey);
                else if (okey == "snr_db") spec.snr_db = bounds_from_json(oval, okey);
                else if (okey == "price") spec.price = bounds_from_json(oval, okey);
                else if (okey == "capacity") spec.capacity = bounds_from_json(oval, okey);
                else if (okey == "events") spec.events = bounds_from_json(oval, okey);
                else if (okey == "bits_per_event") spec.bits_per_event = bounds_from_json(oval, okey);
                else if (okey == "sine_amplitude_frac") spec.sine_amplitude_frac = oval.get<double>();
                else if (okey == "noise_frac") spec.noise_frac = oval.get<double>();
                else if (okey == "beta_knots") spec.beta_knots = doubles_from_json(oval, okey);
                else if (okey == "beta_values") spec.beta_values = doubles_from_json(oval, okey);
                else if (okey == "trace_path") spec.trace_path = oval.get<std::string>();
                else if (okey == "rho_scales") spec.rho_scales = doubles_from_json(oval, okey);
                else throw std::invalid_argument("unknown scenario override '" + okey + "'");
            }
        } else {
            throw std::invalid_argument("unknown scenario key '" + key +
                                        "' (expected kind, I, J, T, seed, overrides)");
        }
    }
    if (!saw_kind) throw std::invalid_argument("scenario document needs a 'kind'");
    return spec;
}

std::string scenario_to_json(const ScenarioSpec& spec) {
    json over;
    over["alpha"] = spec.alpha;
    over["beta"] = spec.beta;
    over["phi_h"] = spec.phi_h;
    over["phi"] = spec.phi;
    over["K"] = spec.cap_k;
    over["lambda_bytes"] = {spec.lambda_bytes.lo, spec.lambda_bytes.hi};
    over["block_bits"] = {spec.block_bits.lo, spec.block_bits.hi};
    if (std::isfinite(spec.snr_db.lo) && std::isfinite(spec.snr_db.hi))
        over["snr_db"] = {spec.snr_db.lo, spec.snr_db.hi};
    over["price"] = {spec.price.lo, spec.price.hi};
    over["capacity"] = {spec.capacity.lo, spec.capacity.hi};
    over["events"] = {spec.events.lo, spec.events.hi};
    over["bits_per_event"] = {spec.bits_per_event.lo, spec.bits_per_event.hi};
    over["sine_amplitude_frac"] = spec.sine_amplitude_frac;
    over["noise_frac"] = spec.noise_frac;
    over["beta_knots"] = spec.beta_knots;
    over["beta_values"] = spec.beta_values;
    if (!spec.trace_path.empty()) over["trace_path"] = spec.trace_path;
    if (!spec.rho_scales.empty()) over["rho_scales"] = spec.rho_scales;

    json doc;
    doc["kind"] = to_string(spec.kind);
    doc["I"] = spec.num_entities;
    doc["J"] = spec.num_servers;
    doc["T"] = static_cast<std::int64_t>(spec.horizon);
    doc["seed"] = spec.seed;
    doc["overrides"] = over;
    return doc.dump(2);
}

} // namespace vranfair
