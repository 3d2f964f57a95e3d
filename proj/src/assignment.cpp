#include "vranfair/assignment.hpp"

#include <cmath>
#include <stdexcept>

namespace vranfair {

namespace {

Vec clip_with_count(const Vec& v, double lo, double hi, int* clipped) {
    Vec out = v;
    for (double& x : out) {
        const double c = clamp(x, lo, hi);
        if (c != x) ++*clipped;
        x = c;
    }
    return out;
}

void check_obs_shape(const AssignmentObs& obs, int vbs, int servers) {
    if (static_cast<int>(obs.u.size()) != vbs || static_cast<int>(obs.h.size()) != servers)
        throw std::invalid_argument("observation value lengths do not match the policy shape");
    if (static_cast<int>(obs.du.size()) != vbs)
        throw std::invalid_argument("observation needs one utility gradient per vBS");
    for (const Mat& g : obs.du)
        if (g.rows != vbs || g.cols != servers)
            throw std::invalid_argument("utility gradient shape mismatch");
    if (obs.dh.rows != vbs || obs.dh.cols != servers)
        throw std::invalid_argument("saving gradient shape mismatch");
}

} // namespace

AssignmentPredictions AssignmentPredictions::zeros(int vbs, int servers) {
    AssignmentPredictions p;
    p.primal = Mat(vbs, servers);
    p.theta = Vec(vbs, 0.0);
    p.phi = Vec(servers, 0.0);
    return p;
}

long AssignmentTrace::clip_count() const {
    long n = 0;
    for (const AssignmentSlotRecord& r : slots) n += r.u_clipped + r.h_clipped;
    return n;
}

AssignmentObs observe_assignment(const Mat& x, const AssignmentEnv& env, const FairnessParams& params) {
    AssignmentUtility au = assignment_utility(x, env, params.u_min);
    EnergySaving es = energy_saving(x, env, params.h_min);
    AssignmentObs obs;
    obs.u = std::move(au.u);
    obs.du = std::move(au.du);
    obs.u_floored = au.floored;
    obs.h = std::move(es.h);
    obs.dh = std::move(es.dh);
    obs.h_floored = es.floored;
    return obs;
}

Mat assignment_payoff_gradient(const Vec& theta, const Vec& phi, const AssignmentObs& obs) {
    const int vbs = obs.dh.rows, servers = obs.dh.cols;
    Mat m(vbs, servers);
    for (int k = 0; k < vbs; ++k)
        for (int j = 0; j < servers; ++j) {
            double g = 0.0;
            for (int i = 0; i < vbs; ++i) g -= theta[i] * obs.du[i](k, j);
            m(k, j) = g - phi[j] * obs.dh(k, j);
        }
    return m;
}

AssignmentPolicy::AssignmentPolicy(int vbs, int servers, FairnessParams params)
    : vbs_(vbs),
      servers_(servers),
      params_(params),
      primal_(vbs, servers),
      theta_(Box::from_dual(params.theta_box(vbs)), QuadObjective::kMinimize),
      phi_(Box::from_dual(params.phi_box(servers)), QuadObjective::kMinimize) {
    params_.validate();
    const AssignmentPredictions none = AssignmentPredictions::zeros(vbs_, servers_);
    primal_.seed_prediction(none.primal);
    theta_.seed_prediction(none.theta);
    phi_.seed_prediction(none.phi);
    x_ = primal_.initial_point(none.primal);
    theta_val_ = theta_.initial_point(none.theta);
    phi_val_ = phi_.initial_point(none.phi);
}

void AssignmentPolicy::seed_predictions(const AssignmentPredictions& first) {
    if (!trace_.slots.empty())
        throw std::logic_error("first-slot predictions must be seeded before any slot");
    primal_.seed_prediction(first.primal);
    theta_.seed_prediction(first.theta);
    phi_.seed_prediction(first.phi);
    x_ = primal_.initial_point(first.primal);
    theta_val_ = theta_.initial_point(first.theta);
    phi_val_ = phi_.initial_point(first.phi);
}

void AssignmentPolicy::slot(const AssignmentObs& obs, const AssignmentPredictions& next) {
    check_obs_shape(obs, vbs_, servers_);

    AssignmentSlotRecord rec;
    rec.x = x_;
    rec.theta = theta_val_;
    rec.phi = phi_val_;
    rec.u = obs.u;
    rec.h = obs.h;
    rec.u_clipped = obs.u_floored;
    rec.h_clipped = obs.h_floored;

    // dual learners see values clipped into the declared envelopes; the
    // model partials pass through untouched
    const Vec u_c = clip_with_count(obs.u, params_.u_min, params_.u_max, &rec.u_clipped);
    const Vec h_c = clip_with_count(obs.h, params_.h_min, params_.h_max, &rec.h_clipped);

    rec.primal_grad = assignment_payoff_gradient(theta_val_, phi_val_, obs);
    rec.theta_grad = dual_gradient(theta_val_, u_c, params_.alpha);
    rec.phi_grad = dual_gradient(phi_val_, h_c, params_.beta);
    rec.primal_pred = primal_.last_pred();
    rec.theta_pred = theta_.last_pred();
    rec.phi_pred = phi_.last_pred();

    x_ = primal_.step(rec.primal_grad, next.primal);
    theta_val_ = theta_.step(rec.theta_grad, next.theta);
    phi_val_ = phi_.step(rec.phi_grad, next.phi);
    trace_.slots.push_back(std::move(rec));
}

void AssignmentPolicy::play(const AssignmentEnv& env, const AssignmentPredictions& next) {
    slot(observe_assignment(x_, env, params_), next);
}

FairnessBoundCheck fairness_bound_check(const AssignmentTrace& trace,
                                        const std::vector<AssignmentEnv>& envs, const Mat& x_star,
                                        const FairnessParams& params) {
    const size_t horizon = trace.slots.size();
    if (horizon == 0) throw std::invalid_argument("bound check needs a nonempty trace");
    if (envs.size() != horizon)
        throw std::invalid_argument("bound check needs one environment per recorded slot");
    const int vbs = static_cast<int>(trace.slots[0].u.size());
    const int servers = static_cast<int>(trace.slots[0].h.size());
    const double tt = static_cast<double>(horizon);

    // comparator values and the dual trajectories' means
    std::vector<Vec> u_star(horizon), h_star(horizon);
    Vec theta_bar(vbs, 0.0), phi_bar(servers, 0.0);
    Vec avg_u_star(vbs, 0.0), avg_h_star(servers, 0.0);
    Vec avg_u(vbs, 0.0), avg_h(servers, 0.0);
    for (size_t t = 0; t < horizon; ++t) {
        const AssignmentSlotRecord& rec = trace.slots[t];
        AssignmentObs obs = observe_assignment(x_star, envs[t], params);
        int ignore = 0;
        u_star[t] = clip_with_count(obs.u, params.u_min, params.u_max, &ignore);
        h_star[t] = clip_with_count(obs.h, params.h_min, params.h_max, &ignore);
        for (int i = 0; i < vbs; ++i) {
            theta_bar[i] += rec.theta[i] / tt;
            avg_u_star[i] += u_star[t][i] / tt;
            avg_u[i] += clamp(rec.u[i], params.u_min, params.u_max) / tt;
        }
        for (int j = 0; j < servers; ++j) {
            phi_bar[j] += rec.phi[j] / tt;
            avg_h_star[j] += h_star[t][j] / tt;
            avg_h[j] += clamp(rec.h[j], params.h_min, params.h_max) / tt;
        }
    }

    FairnessBoundCheck out;
    out.lhs = fairness_sum(avg_u_star, params.alpha) + fairness_sum(avg_h_star, params.beta) -
              fairness_sum(avg_u, params.alpha) - fairness_sum(avg_h, params.beta);
    for (size_t t = 0; t < horizon; ++t) {
        const AssignmentSlotRecord& rec = trace.slots[t];
        for (int i = 0; i < vbs; ++i) out.residual_u += (rec.theta[i] - theta_bar[i]) * u_star[t][i] / tt;
        for (int j = 0; j < servers; ++j) out.residual_h += (rec.phi[j] - phi_bar[j]) * h_star[t][j] / tt;
    }

    // adaptive error bounds replayed from the recorded gradient/prediction pairs
    std::vector<Mat> payoffs, payoff_preds;
    std::vector<Vec> theta_grads, theta_preds, phi_grads, phi_preds;
    payoffs.reserve(horizon);
    for (const AssignmentSlotRecord& rec : trace.slots) {
        payoffs.push_back(rec.primal_grad);
        payoff_preds.push_back(rec.primal_pred);
        theta_grads.push_back(rec.theta_grad);
        theta_preds.push_back(rec.theta_pred);
        phi_grads.push_back(rec.phi_grad);
        phi_preds.push_back(rec.phi_pred);
    }
    const double primal_bound = primal_regret_bound_check(payoffs, payoff_preds).rhs;
    const double theta_bound =
        dual_regret_bound_check(theta_grads, theta_preds, params.alpha, params.theta_box(vbs)).rhs;
    const double phi_bound =
        dual_regret_bound_check(phi_grads, phi_preds, params.beta, params.phi_box(servers)).rhs;

    out.rhs = (primal_bound + theta_bound + phi_bound) / tt + out.residual_u + out.residual_h;
    return out;
}

} // namespace vranfair
