#pragma once

#include <vector>

#include "vranfair/fairness.hpp"
#include "vranfair/linalg.hpp"
#include "vranfair/models.hpp"
#include "vranfair/oftrl.hpp"

namespace vranfair {

// The batching-threshold policy: a quadratic learner proposes per-user
// minimum batch sizes y in [0, K]^I (maximizing the cost-adjusted payoff)
// while a quadratic dual learner tracks the fairness conjugate of the
// empty-buffer probabilities.

struct MinTbObs {
    Vec u;             // per-user empty-buffer probabilities at the played y
    double cost = 0.0; // weighted batching cost at the played y
    Vec du;            // du_i / dy_i (each user's utility is its own)
    Vec dc;            // dc / dy_i
};

struct MinTbPredictions {
    Vec primal; // payoff-gradient guess
    Vec theta;  // dual gradient guess

    static MinTbPredictions zeros(int users) { return {Vec(users, 0.0), Vec(users, 0.0)}; }
};

struct MinTbSlotRecord {
    Vec y, theta;
    Vec u;             // observed values as reported (pre-clip)
    double cost = 0.0;
    Vec primal_grad, primal_pred;
    Vec theta_grad, theta_pred;
    int u_clipped = 0;
};

struct MinTbTrace {
    std::vector<MinTbSlotRecord> slots;
    long clip_count() const;
};

// Evaluate the batching models at y under env and package the observation.
MinTbObs observe_mintb(const Vec& y, const MinTbEnv& env);

// Payoff gradient fed to the primal learner: s_i = -theta_i du_i - dc_i.
// The dual weight -theta_i > 0 pulls thresholds down (higher utility); the
// cost partial pushes them up when transmissions are expensive.
Vec mintb_payoff_gradient(const Vec& theta, const MinTbObs& obs);

class MinTbPolicy {
  public:
    MinTbPolicy(int users, double cap_k, FairnessParams params);

    int num_users() const { return users_; }
    double cap_k() const { return cap_k_; }
    const FairnessParams& params() const { return params_; }
    const Vec& current_y() const { return y_; }
    const Vec& current_theta() const { return theta_val_; }
    double primal_sq_err() const { return primal_.sq_err_sum(); }
    double theta_sq_err() const { return theta_.sq_err_sum(); }

    void seed_predictions(const MinTbPredictions& first);
    void slot(const MinTbObs& obs, const MinTbPredictions& next);
    void play(const MinTbEnv& env, const MinTbPredictions& next);

    const MinTbTrace& trace() const { return trace_; }

  private:
    int users_;
    double cap_k_;
    FairnessParams params_;
    QuadOftrl primal_;
    QuadOftrl theta_;
    Vec y_, theta_val_;
    MinTbTrace trace_;
};

// Empirical audit of the cost-adjusted fairness guarantee against a fixed
// comparator y_star:
//   lhs = [F_a(avg u(y_star)) - avg c(y_star)] - [F_a(avg u) - avg c]
//   rhs = (primal + dual error bounds)/T
//         + the dual-drift residual (1/T) sum_t <theta_t - theta_bar, u_t(y_star)>.
// Utilities enter clipped to the declared envelope, matching what the
// learners saw; costs are the recorded/model values.
struct GalphaBoundCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    double residual = 0.0;
};

GalphaBoundCheck galpha_bound_check(const MinTbTrace& trace, const std::vector<MinTbEnv>& envs,
                                    const Vec& y_star, double cap_k, const FairnessParams& params);

} // namespace vranfair
