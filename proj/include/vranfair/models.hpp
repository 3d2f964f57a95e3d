#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "vranfair/linalg.hpp"

namespace vranfair {

// Environment functions for the two allocation problems: the congestion-aware
// assignment utility, the linear energy-saving function, the aggregation
// buffer kernels of the batching problem, and least-squares fitting of server
// profiles from measurement tables.

enum class ServerKind { kCpu, kHa };

// Linear coefficients at one SNR point: a transport block of `bits` bits takes
// zeta*bits + o seconds and delta*bits + gamma joules.
struct SnrCoeffs {
    double zeta = 0.0;  // seconds per bit
    double o = 0.0;     // seconds per block
    double delta = 0.0; // joules per bit
    double gamma = 0.0; // joules per block
};

struct ServerProfile {
    std::string id;
    ServerKind kind = ServerKind::kCpu;
    std::vector<double> snr_grid;  // strictly ascending, dB
    std::vector<SnrCoeffs> coeffs; // parallel to snr_grid

    // Coefficients of the nearest grid SNR; the lower point wins ties.
    const SnrCoeffs& at_snr(double snr_db) const;
    void validate() const; // throws std::invalid_argument
};

// One slot of the assignment environment.  lambda is in bytes per slot and n
// in bits per transport block; the factor 8 that reconciles the two units is
// applied inside load_coefficients / saving_coefficients, nowhere else.
struct AssignmentEnv {
    Vec lambda;   // bytes per slot, per vBS
    Vec n;        // bits per transport block, per vBS
    Vec snr;      // dB, per vBS
    Vec prices;   // cost per joule, per server
    Vec capacity; // compute-seconds per slot, per server
    double phi_h = 1.0; // savings normalization weight
    std::vector<ServerProfile> profiles; // one per server

    int num_vbs() const { return static_cast<int>(lambda.size()); }
    int num_servers() const { return static_cast<int>(capacity.size()); }
    void validate() const; // throws std::invalid_argument
};

// load(i, j): compute-seconds server j spends when vBS i routes its whole
// demand there, (8 lambda_i / n_i) (zeta_j(s_i) n_i + o_j(s_i)).
Mat load_coefficients(const AssignmentEnv& env);

// save(i, j): energy cost spared when vBS i stays off server j, already
// scaled by phi_h and the server price.
Mat saving_coefficients(const AssignmentEnv& env);

// Per-vBS utility u_i(x) = sum_j x_ij lambda_i min{1, 2 - busy_j(x)/C_j} with
// busy_j(x) = sum_k x_kj load(k, j).  At the branch point busy_j = C_j the
// derivative of the constant branch is used.  Totals below u_floor are raised
// to it with a zero gradient and counted in `floored`.
struct AssignmentUtility {
    Vec u;               // per-vBS utility, floored
    std::vector<Mat> du; // du[i](k, j) = d u_i / d x_kj
    int floored = 0;
};
AssignmentUtility assignment_utility(const Mat& x, const AssignmentEnv& env, double u_floor);

// Per-server savings h_j(x) = sum_i (1 - x_ij) save(i, j): affine in x with
// exact gradient d h_j / d x_ij = -save(i, j).  Values below h_floor are
// raised to it with a zero gradient column and counted in `floored`.
struct EnergySaving {
    Vec h;  // per-server savings, floored
    Mat dh; // dh(i, j) = d h_j / d x_ij
    int floored = 0;
};
EnergySaving energy_saving(const Mat& x, const AssignmentEnv& env, double h_floor);

// Fraction of time the aggregation buffer of a user sits empty when it flushes
// at threshold y bits and receives rho expected bits per event:
// (rho/y)(1 - exp(-y/rho)), continued to 1 at y = 0 with slope -1/(2 rho).
struct EmptyKernel {
    double u = 1.0;  // value in (0, 1]
    double du = 0.0; // derivative in y
};
EmptyKernel buffer_empty_fraction(double y, double rho);

// Piecewise-linear cost coefficient over SNR; queries outside the knot range
// throw std::domain_error.
struct BetaTable {
    std::vector<double> snr_knots; // strictly ascending, dB
    std::vector<double> values;    // coefficient at each knot

    double at(double snr_db) const;
    void validate() const; // throws std::invalid_argument
};

// One slot of the batching environment.
struct MinTbEnv {
    Vec b;   // data-generation events per slot, per user
    Vec rho; // expected bits per event, per user
    Vec snr; // dB, per user
    BetaTable beta;
    double phi = 0.0; // cost weight

    int num_users() const { return static_cast<int>(b.size()); }
    void validate() const; // throws std::invalid_argument
};

// Per-user utility u_i = buffer_empty_fraction(y_i, rho_i); the gradient is
// diagonal, du[i] = d u_i / d y_i.
struct MinTbUtility {
    Vec u;
    Vec du;
};
MinTbUtility mintb_utility(const Vec& y, const MinTbEnv& env);

// Transport cost c(y) = phi sum_i beta(s_i) b_i u_i(y): expected blocks per
// slot, priced per SNR, sharing the utility kernel.
struct MinTbCost {
    double c = 0.0;
    Vec dc;
};
MinTbCost mintb_cost(const Vec& y, const MinTbEnv& env);

// One row of the measurement table used to fit server profiles.
struct MeasurementRow {
    std::string pu_id;
    double snr_db = 0.0;
    double tb_size_bits = 0.0;
    double proc_time_s = 0.0;
    double energy_j = 0.0;
};

// CSV with exact header pu_id,snr_db,tb_size_bits,proc_time_s,energy_j.
// Malformed input throws std::runtime_error naming the line.
std::vector<MeasurementRow> load_measurements(std::istream& in);
std::vector<MeasurementRow> load_measurements_file(const std::string& path);

// Ordinary least squares of processing time and energy against block size
// within every (pu, snr) group.  A group whose sizes are all equal throws
// std::invalid_argument naming the group.  Profiles come back sorted by id;
// an id containing a standalone "ha" token marks a hardware accelerator.
// Soft findings (an accelerator whose slope term is not negligible) are
// appended to `warnings` when given.
std::vector<ServerProfile> fit_linear_profiles(const std::vector<MeasurementRow>& rows,
                                               std::vector<std::string>* warnings = nullptr);

// Profile file format: a JSON array of objects {"id", "kind" ("cpu"|"ha"),
// "snr_grid", "coeffs": [{"zeta","o","delta","gamma"}, ...]}.  Numbers are
// written in shortest round-trip form, so loading an emitted document gives
// back the exact same profiles.  The loader also accepts the array wrapped as
// {"provenance": ..., "profiles": [...]} (what the command-line tool emits).
// Loading validates every profile and rejects unknown keys with
// std::invalid_argument.
std::string profiles_to_json(const std::vector<ServerProfile>& profiles);
std::vector<ServerProfile> profiles_from_json(const std::string& text);

} // namespace vranfair
