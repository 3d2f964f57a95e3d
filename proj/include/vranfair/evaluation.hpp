#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vranfair/assignment.hpp"
#include "vranfair/linalg.hpp"
#include "vranfair/mintb.hpp"
#include "vranfair/rng.hpp"

namespace vranfair {

// Hindsight benchmark oracles, regret metrics, baseline policies, prediction
// generators, dispersion summaries, and the CSV/JSON result writers.

// Keyed-stream tags used by the harness; scenario generators own 1..6.
constexpr std::uint64_t kPredictionStreamTag = 101;
constexpr std::uint64_t kAssignmentOracleTag = 102;
constexpr std::uint64_t kMinTbOracleTag = 103;
constexpr std::uint64_t kBaselineStreamTag = 104;

// Search budget of the projected-gradient oracles.  Restarts always run to
// completion (or to the certificate), so the reported optimum never depends
// on the order in which starts are explored.
struct OracleBudget {
    int restarts = 10;
    int iterations = 5000; // cap per restart
    double tolerance = 1e-7;
};

// Certificate attached to every oracle answer: the projected-gradient norm at
// the returned point and the budget actually spent.  A non-converged report
// still carries the best iterate found.
struct OracleReport {
    double objective = 0.0;
    double pg_norm = 0.0;
    bool converged = false;
    int restarts_used = 0;
    long iterations_used = 0;
};

struct AssignmentOracle {
    Mat x;
    OracleReport report;
};

struct MinTbOracle {
    Vec y;
    OracleReport report;
};

// Best fixed assignment in hindsight: maximizes
//   F_alpha(avg_t u_t(x)) + F_beta(avg_t h_t(x))
// over row-stochastic x by multi-restart projected gradient ascent with an
// Armijo step search and per-row simplex projection.
AssignmentOracle benchmark_assignment(const std::vector<AssignmentEnv>& envs,
                                      const FairnessParams& params, const OracleBudget& budget = {},
                                      std::uint64_t seed = 1);

// Best fixed threshold vector in hindsight: maximizes the cost-adjusted
// objective F_alpha(avg_t u_t(y)) - avg_t c_t(y) over [0, cap_k]^I.  The
// objective separates per coordinate, so projected gradient ascent is
// followed by a per-coordinate grid + golden-section refinement.
MinTbOracle benchmark_mintb(const std::vector<MinTbEnv>& envs, double cap_k,
                            const FairnessParams& params, const OracleBudget& budget = {},
                            std::uint64_t seed = 1);

// Static fairness regret of a recorded assignment run against a fixed
// comparator:
//   F_alpha(avg u(x_star)) + F_beta(avg h(x_star)) - F_alpha(avg u) - F_beta(avg h).
// Values are the floored model outputs; any nonpositive time-averaged
// component throws std::domain_error.
double fairness_regret(const AssignmentTrace& trace, const Mat& x_star,
                       const std::vector<AssignmentEnv>& envs, const FairnessParams& params);

// Cost-adjusted regret of a recorded batching run:
//   [F_alpha(avg u(y_star)) - avg c(y_star)] - [F_alpha(avg u) - avg c].
double galpha_regret(const MinTbTrace& trace, const Vec& y_star,
                     const std::vector<MinTbEnv>& envs, const FairnessParams& params);

// Baselines, granted clairvoyance within the slot: each solves the current
// slot's objective with the same oracle.  The utilitarian variants zero the
// fairness exponents (plain sums) but keep the value envelope.
Mat slot_fair_assignment(const AssignmentEnv& env, const FairnessParams& params,
                         const OracleBudget& budget = {}, std::uint64_t seed = 1);
Mat utilitarian_assignment(const AssignmentEnv& env, const FairnessParams& params,
                           const OracleBudget& budget = {}, std::uint64_t seed = 1);
Vec slot_fair_mintb(const MinTbEnv& env, double cap_k, const FairnessParams& params,
                    const OracleBudget& budget = {}, std::uint64_t seed = 1);
Vec utilitarian_mintb(const MinTbEnv& env, double cap_k, const FairnessParams& params,
                      const OracleBudget& budget = {}, std::uint64_t seed = 1);

// How the learners' optimistic gradient guesses are produced.
struct PredictionMode {
    enum class Kind { kNone, kPerfect, kNoisy, kNaive };

    Kind kind = Kind::kNone;
    double accuracy = 0.0; // noise coefficient c, kNoisy only

    // "none" | "perfect" | "naive" | "noisy:<c>"; anything else throws.
    static PredictionMode parse(const std::string& text);
    std::string name() const;
};

// Entrywise noisy forecast g + c * n .* g with standard normal n drawn from
// `rng` in index order (row-major for matrices).
Vec noisy_prediction(const Vec& g, double c, RngStream& rng);
Mat noisy_prediction(const Mat& g, double c, RngStream& rng);

enum class PolicyKind { kOftrl, kSlotFair, kUtilitarian };
const char* to_string(PolicyKind kind);

// Closed-loop runs.  For the learning policy, perfect/noisy modes resolve the
// prediction's dependence on its own induced decision by damped fixed-point
// iteration (capped; slots that exhaust the cap keep the last iterate and are
// counted).  Baselines ignore the prediction mode.
struct AssignmentRun {
    AssignmentTrace trace;
    long fixed_point_failures = 0;
};

struct MinTbRun {
    MinTbTrace trace;
    long fixed_point_failures = 0;
};

AssignmentRun run_assignment(const std::vector<AssignmentEnv>& envs, const FairnessParams& params,
                             PolicyKind policy, const PredictionMode& mode, std::uint64_t seed,
                             const OracleBudget& baseline_budget = {});
MinTbRun run_mintb(const std::vector<MinTbEnv>& envs, double cap_k, const FairnessParams& params,
                   PolicyKind policy, const PredictionMode& mode, std::uint64_t seed,
                   const OracleBudget& baseline_budget = {});

// Replay a fixed decision against every slot (the comparator's own trace;
// its regret is exactly zero by construction).
AssignmentTrace replay_fixed_assignment(const Mat& x, const std::vector<AssignmentEnv>& envs,
                                        const FairnessParams& params);
MinTbTrace replay_fixed_mintb(const Vec& y, const std::vector<MinTbEnv>& envs,
                              const FairnessParams& params);

// Jain index (sum v)^2 / (n sum v^2), max/min ratio, population stddev.
// Values must be nonnegative, not all zero.
struct DispersionMetrics {
    double jain = 0.0;
    double max_min_ratio = 0.0;
    double stddev = 0.0;
};

DispersionMetrics dispersion_metrics(const Vec& values);

// One row of the per-slot regret CSV: running prefix averages through slot t.
struct RegretRow {
    long t = 0;
    std::string policy;
    std::uint64_t seed = 0;
    double regret = 0.0;
    double avg_fair_utility = 0.0; // F_alpha of the prefix-averaged utilities
    double avg_fair_saving = 0.0;  // F_beta of prefix-averaged savings / minus avg cost
    long clip_count = 0;           // cumulative envelope clips
};

std::vector<RegretRow> regret_rows(const AssignmentTrace& trace, const Mat& x_star,
                                   const std::vector<AssignmentEnv>& envs,
                                   const FairnessParams& params, const std::string& policy,
                                   std::uint64_t seed);
std::vector<RegretRow> regret_rows(const MinTbTrace& trace, const Vec& y_star,
                                   const std::vector<MinTbEnv>& envs, const FairnessParams& params,
                                   const std::string& policy, std::uint64_t seed);

// Header t,policy,seed,regret,avg_fair_utility,avg_fair_saving,clip_count;
// numbers serialized with %.17g so reruns are byte-identical.
void write_regret_csv(const std::string& path, const std::vector<RegretRow>& rows);

// Per-run aggregate feeding the summary JSON.
struct RunAggregate {
    std::string policy;
    std::uint64_t seed = 0;
    double final_regret = 0.0;
    long clip_count = 0;
    double total_utility = 0.0; // sum of time-averaged per-entity utilities
    double total_saving = 0.0;  // sum of time-averaged savings / minus average cost
    DispersionMetrics utility_dispersion;
    DispersionMetrics saving_dispersion;
    bool has_saving_dispersion = false;
    OracleReport oracle;
    long fixed_point_failures = 0;
};

RunAggregate aggregate_assignment(const AssignmentTrace& trace, const Mat& x_star,
                                  const std::vector<AssignmentEnv>& envs,
                                  const FairnessParams& params, const std::string& policy,
                                  std::uint64_t seed, const OracleReport& oracle);
RunAggregate aggregate_mintb(const MinTbTrace& trace, const Vec& y_star,
                             const std::vector<MinTbEnv>& envs, const FairnessParams& params,
                             const std::string& policy, std::uint64_t seed,
                             const OracleReport& oracle);

// Summary JSON: {"provenance": <object parsed from provenance_json>,
// "policies": {name: {"runs": [...], per-policy means/stddevs}}}.
void write_summary_json(const std::string& path, const std::string& provenance_json,
                        const std::vector<RunAggregate>& runs);

} // namespace vranfair
