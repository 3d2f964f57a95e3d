#include "vranfair/mintb.hpp"

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

} // namespace

long MinTbTrace::clip_count() const {
    long n = 0;
    for (const MinTbSlotRecord& r : slots) n += r.u_clipped;
    return n;
}

MinTbObs observe_mintb(const Vec& y, const MinTbEnv& env) {
    MinTbUtility mu = mintb_utility(y, env);
    MinTbCost mc = mintb_cost(y, env);
    MinTbObs obs;
    obs.u = std::move(mu.u);
    obs.du = std::move(mu.du);
    obs.cost = mc.c;
    obs.dc = std::move(mc.dc);
    return obs;
}

Vec mintb_payoff_gradient(const Vec& theta, const MinTbObs& obs) {
    Vec s(obs.u.size(), 0.0);
    for (size_t i = 0; i < s.size(); ++i) s[i] = -theta[i] * obs.du[i] - obs.dc[i];
    return s;
}

MinTbPolicy::MinTbPolicy(int users, double cap_k, FairnessParams params)
    : users_(users),
      cap_k_(cap_k),
      params_(params),
      primal_(Box::uniform(0.0, cap_k, users), QuadObjective::kMaximize),
      theta_(Box::from_dual(params.theta_box(users)), QuadObjective::kMinimize) {
    if (users < 1) throw std::invalid_argument("need at least one user");
    if (!(cap_k > 0.0) || !std::isfinite(cap_k))
        throw std::invalid_argument("the threshold box edge K must be positive");
    params_.validate();
    const MinTbPredictions none = MinTbPredictions::zeros(users_);
    primal_.seed_prediction(none.primal);
    theta_.seed_prediction(none.theta);
    y_ = primal_.initial_point(none.primal);
    theta_val_ = theta_.initial_point(none.theta);
}

void MinTbPolicy::seed_predictions(const MinTbPredictions& first) {
    if (!trace_.slots.empty())
        throw std::logic_error("first-slot predictions must be seeded before any slot");
    primal_.seed_prediction(first.primal);
    theta_.seed_prediction(first.theta);
    y_ = primal_.initial_point(first.primal);
    theta_val_ = theta_.initial_point(first.theta);
}

void MinTbPolicy::slot(const MinTbObs& obs, const MinTbPredictions& next) {
    if (static_cast<int>(obs.u.size()) != users_ || static_cast<int>(obs.du.size()) != users_ ||
        static_cast<int>(obs.dc.size()) != users_)
        throw std::invalid_argument("observation lengths do not match the user count");

    MinTbSlotRecord rec;
    rec.y = y_;
    rec.theta = theta_val_;
    rec.u = obs.u;
    rec.cost = obs.cost;

    const Vec u_c = clip_with_count(obs.u, params_.u_min, params_.u_max, &rec.u_clipped);
    rec.primal_grad = mintb_payoff_gradient(theta_val_, obs);
    rec.theta_grad = dual_gradient(theta_val_, u_c, params_.alpha);
    rec.primal_pred = primal_.last_pred();
    rec.theta_pred = theta_.last_pred();

    y_ = primal_.step(rec.primal_grad, next.primal);
    theta_val_ = theta_.step(rec.theta_grad, next.theta);
    trace_.slots.push_back(std::move(rec));
}

void MinTbPolicy::play(const MinTbEnv& env, const MinTbPredictions& next) {
    slot(observe_mintb(y_, env), next);
}

GalphaBoundCheck galpha_bound_check(const MinTbTrace& trace, const std::vector<MinTbEnv>& envs,
                                    const Vec& y_star, double cap_k, const FairnessParams& params) {
    const size_t horizon = trace.slots.size();
    if (horizon == 0) throw std::invalid_argument("bound check needs a nonempty trace");
    if (envs.size() != horizon)
        throw std::invalid_argument("bound check needs one environment per recorded slot");
    const int users = static_cast<int>(trace.slots[0].u.size());
    if (static_cast<int>(y_star.size()) != users)
        throw std::invalid_argument("comparator length does not match the trace");
    const double tt = static_cast<double>(horizon);

    std::vector<Vec> u_star(horizon);
    Vec theta_bar(users, 0.0), avg_u_star(users, 0.0), avg_u(users, 0.0);
    double cost_star = 0.0, cost = 0.0;
    for (size_t t = 0; t < horizon; ++t) {
        const MinTbSlotRecord& rec = trace.slots[t];
        MinTbObs obs = observe_mintb(y_star, envs[t]);
        int ignore = 0;
        u_star[t] = clip_with_count(obs.u, params.u_min, params.u_max, &ignore);
        cost_star += obs.cost / tt;
        cost += rec.cost / tt;
        for (int i = 0; i < users; ++i) {
            theta_bar[i] += rec.theta[i] / tt;
            avg_u_star[i] += u_star[t][i] / tt;
            avg_u[i] += clamp(rec.u[i], params.u_min, params.u_max) / tt;
        }
    }

    GalphaBoundCheck out;
    out.lhs = (fairness_sum(avg_u_star, params.alpha) - cost_star) -
              (fairness_sum(avg_u, params.alpha) - cost);
    for (size_t t = 0; t < horizon; ++t)
        for (int i = 0; i < users; ++i)
            out.residual += (trace.slots[t].theta[i] - theta_bar[i]) * u_star[t][i] / tt;

    std::vector<Vec> s_grads, s_preds, m_grads, m_preds;
    s_grads.reserve(horizon);
    for (const MinTbSlotRecord& rec : trace.slots) {
        s_grads.push_back(rec.primal_grad);
        s_preds.push_back(rec.primal_pred);
        m_grads.push_back(rec.theta_grad);
        m_preds.push_back(rec.theta_pred);
    }
    double primal_err = 0.0;
    for (size_t t = 0; t < horizon; ++t) primal_err += l2_dist_sq(s_grads[t], s_preds[t]);
    const double d_y = cap_k * std::sqrt(static_cast<double>(users));
    const double primal_bound = 4.0 * std::sqrt(2.0) * d_y * std::sqrt(primal_err);
    const double dual_bound =
        dual_regret_bound_check(m_grads, m_preds, params.alpha, params.theta_box(users)).rhs;

    out.rhs = (primal_bound + dual_bound) / tt + out.residual;
    return out;
}

} // namespace vranfair
