#pragma once

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "vranfair/models.hpp"

namespace vranfair {

// Seed-reproducible environment generators.  Every random quantity comes from
// its own keyed stream (see rng.hpp), so a (spec, seed) pair regenerates the
// exact same sequence regardless of generation order.

enum class ScenarioKind {
    kAssignment1, // stationary i.i.d. assignment draws
    kAssignment2, // periodic capacity, vanishing noise on the rest
    kMinTb1,      // stationary i.i.d. batching draws
    kMinTb2Trace, // batching envs from a trace file (or the synthetic burst generator)
    kMinTb3,      // adversarial ping-pong batching pattern
    kCustomFile,  // batching envs strictly from a user trace file
};

const char* to_string(ScenarioKind kind);
ScenarioKind scenario_kind_from_string(const std::string& name); // throws std::invalid_argument

// Half-open draw support [lo, hi); lo == hi pins the value.
struct Bounds {
    double lo = 0.0;
    double hi = 0.0;
};

// Full description of a generated scenario.  Zero entity/server counts and
// NaN SNR bounds mean "use the per-kind default" (resolved by
// resolve_defaults); everything else carries its default directly.
struct ScenarioSpec {
    ScenarioKind kind = ScenarioKind::kAssignment1;
    int num_entities = 0; // vBS or user count; 0 = kind default
    int num_servers = 0;  // assignment kinds only; 0 = kind default
    long horizon = 1;     // slots, t = 1..horizon
    std::uint64_t seed = 1;

    // fairness and weight knobs carried into the run
    double alpha = 1.0;
    double beta = 1.0;
    double phi_h = 1.0; // assignment savings weight
    double phi = 50.0;  // batching cost weight
    double cap_k = 1e5; // batching decision box edge

    // assignment draw supports
    Bounds lambda_bytes{4e6, 6e6};
    Bounds block_bits{4e4, 6e4};
    Bounds snr_db{std::nan(""), std::nan("")}; // default [10,30) assignment, [20,30) batching
    Bounds price{10.0, 15.0};
    Bounds capacity{0.0, 10.0};

    // batching draw supports
    Bounds events{10.0, 40.0};
    Bounds bits_per_event{5e4, 1e5};

    // non-stationary shape knobs (assignment scenario 2)
    double sine_amplitude_frac = 0.5; // capacity swing as a fraction of its mean
    double noise_frac = 0.1;          // Gaussian sigma as a fraction of the mean

    // batching cost table
    std::vector<double> beta_knots{20.0, 30.0};
    std::vector<double> beta_values{2.2e-3, 1.2e-3};

    // trace ingestion
    std::string trace_path;          // empty + kMinTb2Trace = synthetic bursts
    std::vector<double> rho_scales;  // optional per-user multipliers on rho

    void validate() const; // throws std::invalid_argument (after resolve_defaults)
};

// Fill per-kind defaults (entity counts, SNR support) into unset fields.
ScenarioSpec resolve_defaults(ScenarioSpec spec);

// Generated sequence plus the provenance needed to regenerate it.
struct EnvSequence {
    ScenarioSpec spec;  // resolved
    std::string note;   // extra provenance (trace path, "synthetic-burst", ...)
    std::vector<AssignmentEnv> assignment;
    std::vector<MinTbEnv> mintb;

    bool is_assignment() const { return !assignment.empty(); }
    long horizon() const {
        return static_cast<long>(is_assignment() ? assignment.size() : mintb.size());
    }
};

// Fixed synthetic fleet, alternating by index: even servers get CPU-like
// profiles whose slope falls with SNR, odd servers get accelerator profiles
// with near-flat time and energy curves.
std::vector<ServerProfile> default_server_profiles(int servers);

// Dispatch on spec.kind (the spec is resolved and validated first).
EnvSequence make_envs(const ScenarioSpec& spec);

EnvSequence gen_assignment_s1(const ScenarioSpec& spec);
EnvSequence gen_assignment_s2(const ScenarioSpec& spec);
EnvSequence gen_mintb_s1(const ScenarioSpec& spec);
EnvSequence gen_mintb_s3(const ScenarioSpec& spec);
// On/off burst traffic, sequential per user; clearly labeled synthetic.
EnvSequence gen_synthetic_trace(const ScenarioSpec& spec);

// Trace CSV with header slot,user,events_b,bits_per_event_rho,snr_db; slots
// are contiguous from 1, users contiguous from 0 within every slot.
EnvSequence load_trace(std::istream& in, const ScenarioSpec& spec);
EnvSequence load_trace_file(const ScenarioSpec& spec); // uses spec.trace_path
void export_trace(const EnvSequence& envs, std::ostream& out);
void export_trace_file(const EnvSequence& envs, const std::string& path);

// Scenario spec document (JSON object, keys documented in the README).
// Unknown keys are rejected so typos cannot silently fall back to defaults.
ScenarioSpec scenario_from_json(const std::string& text);
std::string scenario_to_json(const ScenarioSpec& spec);

} // namespace vranfair
