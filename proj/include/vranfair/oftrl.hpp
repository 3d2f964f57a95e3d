#pragma once

#include <vector>

#include "vranfair/fairness.hpp"
#include "vranfair/linalg.hpp"

namespace vranfair {

// Optimistic FTRL learners with prediction-error-adaptive regularizers.
// Both keep the running gradient aggregate, the accumulated squared
// prediction error, and the prediction charged for the upcoming slot.
// The regularizer weight at slot t is scale * sqrt(sq_err_sum), so perfect
// predictions keep it at zero and the updates degenerate to follow-the-leader
// on the optimistic aggregate.

// Axis-aligned closed box with per-coordinate bounds.
struct Box {
    Vec lo, hi;

    static Box uniform(double lower, double upper, int dim);
    static Box from_dual(const DualBox& b) { return uniform(b.lower, b.upper, b.dim); }

    int dim() const { return static_cast<int>(lo.size()); }
    double diameter() const; // Euclidean length of hi - lo
    Vec midpoint() const;
    void validate() const;
};

// Whether the linear term enters the per-slot argmin as +z.w (multiplier
// learners descending a convex proxy) or as -z.w (the box-constrained primal
// learner ascending its payoff).
enum class QuadObjective { kMinimize, kMaximize };

class QuadOftrl {
  public:
    QuadOftrl(Box box, QuadObjective objective);
    QuadOftrl(Box box, QuadObjective objective, double scale);

    // 2*sqrt(2) / diameter; 0 for a degenerate (single-point) box, where the
    // clamp pins every update anyway.
    static double default_scale(const Box& box);

    // Point played before any gradient is observed: argmin of the linear
    // optimistic term alone (first_pred = 0 gives the box midpoint).
    Vec initial_point(const Vec& first_pred) const;

    // Install the prediction charged at the first step without moving the
    // point (policies pin their own initial iterate).
    void seed_prediction(const Vec& p);

    // Charge the prediction error for the slot just observed, absorb its
    // gradient, and return the next point given the prediction for the
    // upcoming slot.
    Vec step(const Vec& observed_grad, const Vec& next_pred);

    double sq_err_sum() const { return sq_err_sum_; }
    double scale() const { return scale_; }
    const Box& box() const { return box_; }
    const Vec& grad_sum() const { return grad_sum_; }
    const Vec& last_pred() const { return last_pred_; }

  private:
    Vec solve(const Vec& omega) const;

    Box box_;
    QuadObjective objective_;
    double scale_ = 0.0;
    Vec grad_sum_;
    Vec last_pred_;
    double sq_err_sum_ = 0.0;
};

class EntropicOftrl {
  public:
    EntropicOftrl(int rows, int cols);
    EntropicOftrl(int rows, int cols, double eta);

    // min{1/2, sqrt(2*sqrt(2) / log J)}, with log J floored at log 2 so a
    // single-column problem keeps a finite weight.
    static double default_eta(int cols);

    Mat initial_point(const Mat& first_pred) const;
    void seed_prediction(const Mat& p);

    // Observed and predicted gradients are the combined primal gradients; the
    // prediction error is charged in the squared max norm.
    Mat step(const Mat& observed_grad, const Mat& next_pred);

    double sq_err_sum() const { return sq_err_sum_; }
    double eta() const { return eta_; }
    const Mat& agg() const { return agg_; }
    const Mat& last_pred() const { return last_pred_; }

  private:
    Mat solve(const Mat& omega) const;

    int rows_, cols_;
    double eta_;
    Mat agg_;
    Mat last_pred_;
    double sq_err_sum_ = 0.0;
};

// ---- empirical regret-bound checks ------------------------------------------

struct BoundCheck {
    double lhs = 0.0; // realized regret against the best fixed comparator
    double rhs = 0.0; // adaptive bound computed from the same trace
};

// Replay the multiplier learner over an exogenous trace of (gradient,
// prediction) pairs.  Each slot's proxy loss is reconstructed from the
// gradient reported at the played point (the value vector consistent with it),
// so lhs is the realized regret of those losses against the per-coordinate
// closed-form comparator, and rhs is 4*sqrt(2)*diam * sqrt(sum ||g - g~||_2^2).
// Feeding preds == grads exercises the optimistic collapse: rhs = 0, lhs <= 0.
BoundCheck dual_regret_bound_check(const std::vector<Vec>& grads,
                                   const std::vector<Vec>& preds, double alpha,
                                   const DualBox& box);

// Replay the row-simplex learner over linear payoff matrices; lhs compares
// the realized payoff with the best fixed assignment (per-row vertex of the
// aggregate), rhs is (sqrt(2)*I/eta + eta*I*logJ/2) * sqrt(sum ||err||_inf^2).
BoundCheck primal_regret_bound_check(const std::vector<Mat>& payoffs,
                                     const std::vector<Mat>& preds);

} // namespace vranfair
