#pragma once

#include <vector>

#include "vranfair/fairness.hpp"
#include "vranfair/linalg.hpp"
#include "vranfair/models.hpp"
#include "vranfair/oftrl.hpp"

namespace vranfair {

// The load-assignment policy: one entropic learner proposes row-stochastic
// shares x (vBS rows over server columns) while two quadratic dual learners
// track the fairness conjugates of the utility and saving averages.  Each
// slot the policy consumes the realized values and exact model partials at
// the decision it played, charges the optimistic-prediction error, and
// advances all three learners in closed form.

// One slot's feedback, generated under the decision currently in force.
struct AssignmentObs {
    Vec u;               // per-vBS utilities (already floored by the model)
    Vec h;               // per-server savings
    std::vector<Mat> du; // du[i](k, j) = d u_i / d x_kj
    Mat dh;              // dh(i, j) = d h_j / d x_ij
    int u_floored = 0;   // model floor hits, folded into the clip counters
    int h_floored = 0;
};

// Gradient guesses for the next slot, one per learner; zeros recover the
// non-optimistic update.
struct AssignmentPredictions {
    Mat primal; // combined payoff-gradient guess, vbs x servers
    Vec theta;  // dual gradient guess on the utility side
    Vec phi;    // dual gradient guess on the saving side

    static AssignmentPredictions zeros(int vbs, int servers);
};

struct AssignmentSlotRecord {
    Mat x;          // decision in force during the slot
    Vec theta, phi; // duals in force
    Vec u, h;       // observed values as reported (pre-clip)
    Mat primal_grad, primal_pred;
    Vec theta_grad, theta_pred;
    Vec phi_grad, phi_pred;
    int u_clipped = 0; // components pulled into [u_min, u_max], model floors included
    int h_clipped = 0;
};

struct AssignmentTrace {
    std::vector<AssignmentSlotRecord> slots;
    long clip_count() const;
};

// Evaluate both models at x under env and package the slot observation.
// Values are floored at the fairness lower bounds, so the flat region below
// the envelope carries zero gradient.
AssignmentObs observe_assignment(const Mat& x, const AssignmentEnv& env, const FairnessParams& params);

// Payoff matrix fed to the entropic learner:
//   M(k, j) = -sum_i theta_i du_i/dx_kj - phi_j dh_j/dx_kj.
// Duals are negative, so M points toward higher utility and saving.
Mat assignment_payoff_gradient(const Vec& theta, const Vec& phi, const AssignmentObs& obs);

class AssignmentPolicy {
  public:
    AssignmentPolicy(int vbs, int servers, FairnessParams params);

    int num_vbs() const { return vbs_; }
    int num_servers() const { return servers_; }
    const FairnessParams& params() const { return params_; }
    const Mat& current_x() const { return x_; }
    const Vec& current_theta() const { return theta_val_; }
    const Vec& current_phi() const { return phi_val_; }
    double primal_sq_err() const { return primal_.sq_err_sum(); }
    double theta_sq_err() const { return theta_.sq_err_sum(); }
    double phi_sq_err() const { return phi_.sq_err_sum(); }

    // Install the optimistic guesses for the very first slot; moves the
    // initial iterates accordingly.  Only valid before the first slot.
    void seed_predictions(const AssignmentPredictions& first);

    // Consume the slot's observation and the prediction for the next slot.
    void slot(const AssignmentObs& obs, const AssignmentPredictions& next);

    // observe_assignment at the current decision, then slot().
    void play(const AssignmentEnv& env, const AssignmentPredictions& next);

    const AssignmentTrace& trace() const { return trace_; }

  private:
    int vbs_, servers_;
    FairnessParams params_;
    EntropicOftrl primal_;
    QuadOftrl theta_;
    QuadOftrl phi_;
    Mat x_;
    Vec theta_val_, phi_val_;
    AssignmentTrace trace_;
};

// Empirical audit of the horizon-fairness guarantee.  For a fixed comparator
// x_star, the realized two-sided fairness gap is checked against the
// adaptive bound reconstructed from the same trace:
//   lhs = F_a(avg u(x_star)) + F_b(avg h(x_star)) - F_a(avg u) - F_b(avg h)
//   rhs = (primal + two dual error bounds)/T + the two dual-drift residuals
//         (1/T) sum_t <theta_t - theta_bar, u_t(x_star)> and likewise for phi.
// All utility/saving values enter clipped to the declared envelopes — the
// quantities the learners actually saw.
struct FairnessBoundCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    double residual_u = 0.0;
    double residual_h = 0.0;
};

FairnessBoundCheck fairness_bound_check(const AssignmentTrace& trace,
                                        const std::vector<AssignmentEnv>& envs, const Mat& x_star,
                                        const FairnessParams& params);

} // namespace vranfair
