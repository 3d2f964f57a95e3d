#include "vranfair/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>

#include "json.hpp"

namespace vranfair {

namespace {

using nlohmann::json;

constexpr double kStepFloor = 1e-14;  // Armijo backtracking gives up below this
constexpr double kArmijoSigma = 1e-4; // sufficient-increase fraction
constexpr int kFixedPointCap = 100;   // lookahead prediction iterations per slot
constexpr double kFixedPointTol = 1e-10;

// 1-D golden-section maximization on [lo, hi]; assumes unimodality inside the
// (narrow) bracket it is given and is always value-checked by the caller.
template <typename F>
double golden_max_1d(F&& f, double lo, double hi, int iters = 180) {
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double c = b - gr * (b - a);
    double d = a + gr * (b - a);
    double fc = f(c), fd = f(d);
    for (int k = 0; k < iters; ++k) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

void check_budget(const OracleBudget& budget) {
    if (budget.restarts < 1) throw std::invalid_argument("oracle budget needs at least one restart");
    if (budget.iterations < 0) throw std::invalid_argument("oracle iteration cap must be nonnegative");
    if (!(budget.tolerance > 0.0)) throw std::invalid_argument("oracle tolerance must be positive");
}

// ---------------------------------------------------------------------------
// assignment hindsight oracle

// Per-slot model coefficients flattened into contiguous blocks so the many
// objective evaluations inside the search never touch the model layer.
struct AssignCache {
    int vbs = 0, servers = 0;
    long horizon = 0;
    double alpha = 0.0, beta = 0.0, u_floor = 0.0, h_floor = 0.0;
    std::vector<double> lambda; // horizon x vbs
    std::vector<double> load;   // horizon x vbs x servers
    std::vector<double> save;   // horizon x vbs x servers
    std::vector<double> cap;    // horizon x servers
};

AssignCache build_assign_cache(const std::vector<AssignmentEnv>& envs, const FairnessParams& params) {
    if (envs.empty()) throw std::invalid_argument("hindsight benchmark needs at least one slot");
    params.validate();
    AssignCache c;
    c.vbs = envs[0].num_vbs();
    c.servers = envs[0].num_servers();
    c.horizon = static_cast<long>(envs.size());
    c.alpha = params.alpha;
    c.beta = params.beta;
    c.u_floor = params.u_min;
    c.h_floor = params.h_min;
    c.lambda.reserve(envs.size() * c.vbs);
    c.load.reserve(envs.size() * c.vbs * c.servers);
    c.save.reserve(envs.size() * c.vbs * c.servers);
    c.cap.reserve(envs.size() * c.servers);
    for (const AssignmentEnv& env : envs) {
        env.validate();
        if (env.num_vbs() != c.vbs || env.num_servers() != c.servers)
            throw std::invalid_argument("environment slots disagree in shape");
        const Mat a = load_coefficients(env);
        const Mat s = saving_coefficients(env);
        c.load.insert(c.load.end(), a.a.begin(), a.a.end());
        c.save.insert(c.save.end(), s.a.begin(), s.a.end());
        c.lambda.insert(c.lambda.end(), env.lambda.begin(), env.lambda.end());
        c.cap.insert(c.cap.end(), env.capacity.begin(), env.capacity.end());
    }
    return c;
}

struct AssignWork {
    Vec busy, factor, hacc, avg_u, avg_h, wu, wh, su, row;
};

// Mirrors the model evaluation (same overload branch and floor rules) on the
// cached coefficients: F_alpha(avg u) + F_beta(avg h) at assignment x.
double assign_objective(const AssignCache& c, const Mat& x, AssignWork& w) {
    const int vbs = c.vbs, servers = c.servers;
    w.avg_u.assign(vbs, 0.0);
    w.avg_h.assign(servers, 0.0);
    w.busy.resize(servers);
    w.factor.resize(servers);
    w.hacc.resize(servers);
    for (long t = 0; t < c.horizon; ++t) {
        const double* L = &c.load[static_cast<size_t>(t) * vbs * servers];
        const double* S = &c.save[static_cast<size_t>(t) * vbs * servers];
        const double* lam = &c.lambda[static_cast<size_t>(t) * vbs];
        const double* C = &c.cap[static_cast<size_t>(t) * servers];
        for (int j = 0; j < servers; ++j) {
            w.busy[j] = 0.0;
            w.hacc[j] = 0.0;
        }
        for (int i = 0; i < vbs; ++i)
            for (int j = 0; j < servers; ++j) w.busy[j] += x(i, j) * L[i * servers + j];
        for (int j = 0; j < servers; ++j)
            w.factor[j] = w.busy[j] > C[j] ? 2.0 - w.busy[j] / C[j] : 1.0;
        for (int i = 0; i < vbs; ++i) {
            double u = 0.0;
            for (int j = 0; j < servers; ++j) u += x(i, j) * lam[i] * w.factor[j];
            w.avg_u[i] += std::max(u, c.u_floor);
        }
        for (int i = 0; i < vbs; ++i)
            for (int j = 0; j < servers; ++j) w.hacc[j] += (1.0 - x(i, j)) * S[i * servers + j];
        for (int j = 0; j < servers; ++j) w.avg_h[j] += std::max(w.hacc[j], c.h_floor);
    }
    for (double& v : w.avg_u) v /= static_cast<double>(c.horizon);
    for (double& v : w.avg_h) v /= static_cast<double>(c.horizon);
    return fairness_sum(w.avg_u, c.alpha) + fairness_sum(w.avg_h, c.beta);
}

// Exact gradient of the objective above; floored coordinates contribute
// nothing, exactly like the model partials.
double assign_gradient(const AssignCache& c, const Mat& x, AssignWork& w, Mat& g) {
    const double obj = assign_objective(c, x, w);
    const int vbs = c.vbs, servers = c.servers;
    w.wu.resize(vbs);
    w.wh.resize(servers);
    for (int i = 0; i < vbs; ++i)
        w.wu[i] = f_alpha_prime(w.avg_u[i], c.alpha) / static_cast<double>(c.horizon);
    for (int j = 0; j < servers; ++j)
        w.wh[j] = f_alpha_prime(w.avg_h[j], c.beta) / static_cast<double>(c.horizon);
    g = Mat(vbs, servers);
    w.su.resize(servers);
    for (long t = 0; t < c.horizon; ++t) {
        const double* L = &c.load[static_cast<size_t>(t) * vbs * servers];
        const double* S = &c.save[static_cast<size_t>(t) * vbs * servers];
        const double* lam = &c.lambda[static_cast<size_t>(t) * vbs];
        const double* C = &c.cap[static_cast<size_t>(t) * servers];
        for (int j = 0; j < servers; ++j) {
            w.busy[j] = 0.0;
            w.su[j] = 0.0;
        }
        for (int i = 0; i < vbs; ++i)
            for (int j = 0; j < servers; ++j) w.busy[j] += x(i, j) * L[i * servers + j];
        for (int j = 0; j < servers; ++j)
            w.factor[j] = w.busy[j] > C[j] ? 2.0 - w.busy[j] / C[j] : 1.0;
        for (int i = 0; i < vbs; ++i) {
            double u = 0.0;
            for (int j = 0; j < servers; ++j) u += x(i, j) * lam[i] * w.factor[j];
            if (u < c.u_floor) continue; // flat region: no pull from this vBS
            for (int j = 0; j < servers; ++j) {
                g(i, j) += w.wu[i] * lam[i] * w.factor[j];
                w.su[j] += w.wu[i] * lam[i] * x(i, j);
            }
        }
        for (int j = 0; j < servers; ++j) {
            if (w.busy[j] > C[j]) {
                const double inv = 1.0 / C[j];
                for (int k = 0; k < vbs; ++k) g(k, j) -= L[k * servers + j] * inv * w.su[j];
            }
            double h = 0.0;
            for (int i = 0; i < vbs; ++i) h += (1.0 - x(i, j)) * S[i * servers + j];
            if (h < c.h_floor) continue;
            for (int i = 0; i < vbs; ++i) g(i, j) -= w.wh[j] * S[i * servers + j];
        }
    }
    return obj;
}

// Row-wise Euclidean projection of base + step * g onto the simplex.
void project_rows(const Mat& base, double step, const Mat& g, Mat& out, Vec& row) {
    const int servers = base.cols;
    row.resize(servers);
    for (int i = 0; i < base.rows; ++i) {
        for (int j = 0; j < servers; ++j) row[j] = base(i, j) + step * g(i, j);
        const Vec p = project_simplex(row);
        for (int j = 0; j < servers; ++j) out(i, j) = p[j];
    }
}

struct AscentResult {
    double objective = 0.0;
    double pg_norm = 0.0;
    long iterations = 0;
};

// Projected gradient ascent with Armijo backtracking (and step growth after
// every accepted move).  Stops at the certificate or when backtracking stalls.
AscentResult ascend_assignment(const AssignCache& c, Mat& x, const OracleBudget& budget,
                               AssignWork& w) {
    Mat g(c.vbs, c.servers), cand(c.vbs, c.servers);
    AscentResult res;
    res.objective = assign_gradient(c, x, w, g);
    double step = 1.0;
    auto pg_norm = [&]() {
        project_rows(x, 1.0, g, cand, w.row);
        double s = 0.0;
        for (size_t k = 0; k < x.a.size(); ++k) {
            const double d = x.a[k] - cand.a[k];
            s += d * d;
        }
        return std::sqrt(s);
    };
    res.pg_norm = pg_norm();
    while (res.iterations < budget.iterations && res.pg_norm > budget.tolerance) {
        bool moved = false;
        while (step >= kStepFloor) {
            project_rows(x, step, g, cand, w.row);
            double gain = 0.0, dist = 0.0;
            for (size_t k = 0; k < x.a.size(); ++k) {
                gain += g.a[k] * (cand.a[k] - x.a[k]);
                dist += std::fabs(cand.a[k] - x.a[k]);
            }
            if (dist == 0.0) {
                step *= 0.5;
                continue;
            }
            const double trial = assign_objective(c, cand, w);
            if (trial >= res.objective + kArmijoSigma * gain) {
                x = cand;
                res.objective = trial;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if (!moved) break;
        step = std::min(step * 2.0, 1e12);
        res.objective = assign_gradient(c, x, w, g);
        res.pg_norm = pg_norm();
        ++res.iterations;
    }
    return res;
}

void random_simplex_rows(Mat& x, RngStream& rng) {
    for (int i = 0; i < x.rows; ++i) {
        double total = 0.0;
        for (int j = 0; j < x.cols; ++j) {
            x(i, j) = -std::log(1.0 - rng.next_unit()); // Exp(1) mix = uniform on the simplex
            total += x(i, j);
        }
        if (total < 1e-300) {
            for (int j = 0; j < x.cols; ++j) x(i, j) = 1.0 / x.cols;
        } else {
            for (int j = 0; j < x.cols; ++j) x(i, j) /= total;
        }
    }
}

// ---------------------------------------------------------------------------
// batching hindsight oracle

// Coordinate-major caches: the objective separates across users, so every
// 1-D probe walks one contiguous block.
struct MinTbCacheEval {
    int users = 0;
    long horizon = 0;
    double alpha = 0.0, cap_k = 0.0;
    std::vector<double> rho;   // users x horizon
    std::vector<double> wcost; // users x horizon, phi * beta(snr) * b
};

MinTbCacheEval build_mintb_cache(const std::vector<MinTbEnv>& envs, double cap_k,
                                 const FairnessParams& params) {
    if (envs.empty()) throw std::invalid_argument("hindsight benchmark needs at least one slot");
    if (!(cap_k > 0.0) || !std::isfinite(cap_k))
        throw std::invalid_argument("the threshold box edge K must be positive");
    params.validate();
    MinTbCacheEval c;
    c.users = envs[0].num_users();
    c.horizon = static_cast<long>(envs.size());
    c.alpha = params.alpha;
    c.cap_k = cap_k;
    c.rho.resize(static_cast<size_t>(c.users) * envs.size());
    c.wcost.resize(static_cast<size_t>(c.users) * envs.size());
    for (size_t t = 0; t < envs.size(); ++t) {
        const MinTbEnv& env = envs[t];
        env.validate();
        if (env.num_users() != c.users)
            throw std::invalid_argument("environment slots disagree in shape");
        for (int i = 0; i < c.users; ++i) {
            c.rho[static_cast<size_t>(i) * envs.size() + t] = env.rho[i];
            c.wcost[static_cast<size_t>(i) * envs.size() + t] =
                env.phi * env.beta.at(env.snr[i]) * env.b[i];
        }
    }
    return c;
}

struct Coord1D {
    double avg_u = 0.0, avg_du = 0.0, avg_c = 0.0, avg_dc = 0.0;
};

Coord1D coord_eval(const MinTbCacheEval& c, int i, double y) {
    const double* rho = &c.rho[static_cast<size_t>(i) * c.horizon];
    const double* w = &c.wcost[static_cast<size_t>(i) * c.horizon];
    Coord1D out;
    for (long t = 0; t < c.horizon; ++t) {
        const EmptyKernel k = buffer_empty_fraction(y, rho[t]);
        out.avg_u += k.u;
        out.avg_du += k.du;
        out.avg_c += w[t] * k.u;
        out.avg_dc += w[t] * k.du;
    }
    const double tt = static_cast<double>(c.horizon);
    out.avg_u /= tt;
    out.avg_du /= tt;
    out.avg_c /= tt;
    out.avg_dc /= tt;
    return out;
}

double coord_value(const MinTbCacheEval& c, int i, double y) {
    const Coord1D e = coord_eval(c, i, y);
    return f_alpha(e.avg_u, c.alpha) - e.avg_c;
}

double coord_grad(const MinTbCacheEval& c, int i, double y) {
    const Coord1D e = coord_eval(c, i, y);
    return f_alpha_prime(e.avg_u, c.alpha) * e.avg_du - e.avg_dc;
}

double mintb_objective(const MinTbCacheEval& c, const Vec& y) {
    double s = 0.0;
    for (int i = 0; i < c.users; ++i) s += coord_value(c, i, y[i]);
    return s;
}

double mintb_pg_norm(const MinTbCacheEval& c, const Vec& y) {
    double s = 0.0;
    for (int i = 0; i < c.users; ++i) {
        const double d = y[i] - clamp(y[i] + coord_grad(c, i, y[i]), 0.0, c.cap_k);
        s += d * d;
    }
    return std::sqrt(s);
}

AscentResult ascend_mintb(const MinTbCacheEval& c, Vec& y, const OracleBudget& budget) {
    Vec g(c.users), cand(c.users);
    AscentResult res;
    auto gradient_at = [&](const Vec& p, Vec& out) {
        for (int i = 0; i < c.users; ++i) out[i] = coord_grad(c, i, p[i]);
    };
    res.objective = mintb_objective(c, y);
    gradient_at(y, g);
    double step = 1.0;
    auto pg_norm = [&]() {
        double s = 0.0;
        for (int i = 0; i < c.users; ++i) {
            const double d = y[i] - clamp(y[i] + g[i], 0.0, c.cap_k);
            s += d * d;
        }
        return std::sqrt(s);
    };
    res.pg_norm = pg_norm();
    while (res.iterations < budget.iterations && res.pg_norm > budget.tolerance) {
        bool moved = false;
        while (step >= kStepFloor) {
            double gain = 0.0, dist = 0.0;
            for (int i = 0; i < c.users; ++i) {
                cand[i] = clamp(y[i] + step * g[i], 0.0, c.cap_k);
                gain += g[i] * (cand[i] - y[i]);
                dist += std::fabs(cand[i] - y[i]);
            }
            if (dist == 0.0) {
                step *= 0.5;
                continue;
            }
            const double trial = mintb_objective(c, cand);
            if (trial >= res.objective + kArmijoSigma * gain) {
                y = cand;
                res.objective = trial;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if (!moved) break;
        step = std::min(step * 2.0, 1e12);
        gradient_at(y, g);
        res.pg_norm = pg_norm();
        ++res.iterations;
    }
    return res;
}

// Global 1-D pass per coordinate: coarse grid to find the basin, golden
// section to polish it.  The polished point wins ties so identical coordinate
// problems refine to identical answers; the incoming iterate survives only by
// strictly beating it, so the result is never worse than it was given.
void refine_coordinate(const MinTbCacheEval& c, int i, double& yi, double& vi) {
    const int cells = 256;
    const double h = c.cap_k / cells;
    double grid_y = 0.0, grid_v = coord_value(c, i, 0.0);
    for (int k = 1; k <= cells; ++k) {
        const double y = std::min(c.cap_k, k * h);
        const double v = coord_value(c, i, y);
        if (v > grid_v) {
            grid_v = v;
            grid_y = y;
        }
    }
    const double lo = std::max(0.0, grid_y - h);
    const double hi = std::min(c.cap_k, grid_y + h);
    const double y_gold =
        golden_max_1d([&](double y) { return coord_value(c, i, y); }, lo, hi);
    const double v_gold = coord_value(c, i, y_gold);
    double best_y = y_gold, best_v = v_gold;
    if (grid_v > best_v) {
        best_y = grid_y;
        best_v = grid_v;
    }
    if (vi > best_v) {
        best_y = yi;
        best_v = vi;
    }
    yi = best_y;
    vi = best_v;
}

// ---------------------------------------------------------------------------
// run bookkeeping shared by baselines and replays

int count_outside(const Vec& v, double lo, double hi) {
    int n = 0;
    for (double x : v)
        if (x < lo || x > hi) ++n;
    return n;
}

AssignmentSlotRecord fixed_assignment_record(const Mat& x, const AssignmentEnv& env,
                                             const FairnessParams& params) {
    const AssignmentObs obs = observe_assignment(x, env, params);
    const int vbs = static_cast<int>(obs.u.size()), servers = static_cast<int>(obs.h.size());
    AssignmentSlotRecord rec;
    rec.x = x;
    rec.theta = Vec(vbs, 0.0);
    rec.phi = Vec(servers, 0.0);
    rec.u = obs.u;
    rec.h = obs.h;
    rec.primal_grad = Mat(vbs, servers);
    rec.primal_pred = Mat(vbs, servers);
    rec.theta_grad = Vec(vbs, 0.0);
    rec.theta_pred = Vec(vbs, 0.0);
    rec.phi_grad = Vec(servers, 0.0);
    rec.phi_pred = Vec(servers, 0.0);
    rec.u_clipped = count_outside(obs.u, params.u_min, params.u_max);
    rec.h_clipped = count_outside(obs.h, params.h_min, params.h_max);
    return rec;
}

MinTbSlotRecord fixed_mintb_record(const Vec& y, const MinTbEnv& env, const FairnessParams& params) {
    const MinTbObs obs = observe_mintb(y, env);
    const int users = static_cast<int>(obs.u.size());
    MinTbSlotRecord rec;
    rec.y = y;
    rec.theta = Vec(users, 0.0);
    rec.u = obs.u;
    rec.cost = obs.cost;
    rec.primal_grad = Vec(users, 0.0);
    rec.primal_pred = Vec(users, 0.0);
    rec.theta_grad = Vec(users, 0.0);
    rec.theta_pred = Vec(users, 0.0);
    rec.u_clipped = count_outside(obs.u, params.u_min, params.u_max);
    return rec;
}

// ---------------------------------------------------------------------------
// lookahead prediction machinery

Vec clamped(const Vec& v, double lo, double hi) {
    Vec out = v;
    for (double& x : out) x = clamp(x, lo, hi);
    return out;
}

struct AssignNoise {
    Mat primal;
    Vec theta, phi;
};

AssignNoise draw_assignment_noise(std::uint64_t seed, std::uint64_t pred_slot, int vbs, int servers) {
    RngStream rng = stream_for(seed, kPredictionStreamTag, pred_slot, 0, field::kPredNoise);
    AssignNoise n;
    n.primal = Mat(vbs, servers);
    n.theta.resize(vbs);
    n.phi.resize(servers);
    for (double& v : n.primal.a) v = rng.normal();
    for (double& v : n.theta) v = rng.normal();
    for (double& v : n.phi) v = rng.normal();
    return n;
}

AssignmentPredictions overlay_noise(const AssignmentPredictions& g, double c, const AssignNoise& n) {
    AssignmentPredictions out = g;
    for (size_t k = 0; k < out.primal.a.size(); ++k) out.primal.a[k] += c * n.primal.a[k] * g.primal.a[k];
    for (size_t i = 0; i < out.theta.size(); ++i) out.theta[i] += c * n.theta[i] * g.theta[i];
    for (size_t j = 0; j < out.phi.size(); ++j) out.phi[j] += c * n.phi[j] * g.phi[j];
    return out;
}

// The gradients the policy is about to record for this slot, under the duals
// currently in force (identical arithmetic to the slot update).
AssignmentPredictions realized_assignment(const AssignmentPolicy& p, const AssignmentObs& obs,
                                          const FairnessParams& params) {
    AssignmentPredictions g;
    g.primal = assignment_payoff_gradient(p.current_theta(), p.current_phi(), obs);
    g.theta = dual_gradient(p.current_theta(), clamped(obs.u, params.u_min, params.u_max), params.alpha);
    g.phi = dual_gradient(p.current_phi(), clamped(obs.h, params.h_min, params.h_max), params.beta);
    return g;
}

double pred_gap(const AssignmentPredictions& a, const AssignmentPredictions& b) {
    double m = linf_dist(a.primal, b.primal);
    for (size_t i = 0; i < a.theta.size(); ++i) m = std::max(m, std::fabs(a.theta[i] - b.theta[i]));
    for (size_t j = 0; j < a.phi.size(); ++j) m = std::max(m, std::fabs(a.phi[j] - b.phi[j]));
    return m;
}

double pred_scale(const AssignmentPredictions& a) {
    double m = 1.0;
    for (double v : a.primal.a) m = std::max(m, std::fabs(v));
    for (double v : a.theta) m = std::max(m, std::fabs(v));
    for (double v : a.phi) m = std::max(m, std::fabs(v));
    return m;
}

// The next slot's gradient depends on the decision the prediction itself
// induces; resolve it by capped iteration (damped in the second half to break
// cycles).  Slots that exhaust the cap keep the last iterate and are counted.
template <typename Apply>
AssignmentPredictions assignment_prediction_fixed_point(Apply&& apply, const AssignmentEnv& next_env,
                                                        const FairnessParams& params,
                                                        AssignmentPredictions cand,
                                                        const PredictionMode& mode,
                                                        const AssignNoise& noise, long* failures) {
    bool converged = false;
    for (int k = 0; k < kFixedPointCap && !converged; ++k) {
        const AssignmentPolicy stepped = apply(cand);
        const AssignmentObs obs = observe_assignment(stepped.current_x(), next_env, params);
        AssignmentPredictions next = realized_assignment(stepped, obs, params);
        if (mode.kind == PredictionMode::Kind::kNoisy) next = overlay_noise(next, mode.accuracy, noise);
        if (k >= kFixedPointCap / 2) {
            for (size_t q = 0; q < next.primal.a.size(); ++q)
                next.primal.a[q] = 0.5 * (next.primal.a[q] + cand.primal.a[q]);
            for (size_t i = 0; i < next.theta.size(); ++i)
                next.theta[i] = 0.5 * (next.theta[i] + cand.theta[i]);
            for (size_t j = 0; j < next.phi.size(); ++j)
                next.phi[j] = 0.5 * (next.phi[j] + cand.phi[j]);
        }
        converged = pred_gap(next, cand) <= kFixedPointTol * pred_scale(next);
        cand = std::move(next);
    }
    if (!converged) ++*failures;
    return cand;
}

struct MinTbNoise {
    Vec primal, theta;
};

MinTbNoise draw_mintb_noise(std::uint64_t seed, std::uint64_t pred_slot, int users) {
    RngStream rng = stream_for(seed, kPredictionStreamTag, pred_slot, 0, field::kPredNoise);
    MinTbNoise n;
    n.primal.resize(users);
    n.theta.resize(users);
    for (double& v : n.primal) v = rng.normal();
    for (double& v : n.theta) v = rng.normal();
    return n;
}

MinTbPredictions overlay_noise(const MinTbPredictions& g, double c, const MinTbNoise& n) {
    MinTbPredictions out = g;
    for (size_t i = 0; i < out.primal.size(); ++i) out.primal[i] += c * n.primal[i] * g.primal[i];
    for (size_t i = 0; i < out.theta.size(); ++i) out.theta[i] += c * n.theta[i] * g.theta[i];
    return out;
}

MinTbPredictions realized_mintb(const MinTbPolicy& p, const MinTbObs& obs, const FairnessParams& params) {
    MinTbPredictions g;
    g.primal = mintb_payoff_gradient(p.current_theta(), obs);
    g.theta = dual_gradient(p.current_theta(), clamped(obs.u, params.u_min, params.u_max), params.alpha);
    return g;
}

double pred_gap(const MinTbPredictions& a, const MinTbPredictions& b) {
    double m = 0.0;
    for (size_t i = 0; i < a.primal.size(); ++i) m = std::max(m, std::fabs(a.primal[i] - b.primal[i]));
    for (size_t i = 0; i < a.theta.size(); ++i) m = std::max(m, std::fabs(a.theta[i] - b.theta[i]));
    return m;
}

double pred_scale(const MinTbPredictions& a) {
    double m = 1.0;
    for (double v : a.primal) m = std::max(m, std::fabs(v));
    for (double v : a.theta) m = std::max(m, std::fabs(v));
    return m;
}

template <typename Apply>
MinTbPredictions mintb_prediction_fixed_point(Apply&& apply, const MinTbEnv& next_env,
                                              const FairnessParams& params, MinTbPredictions cand,
                                              const PredictionMode& mode, const MinTbNoise& noise,
                                              long* failures) {
    bool converged = false;
    for (int k = 0; k < kFixedPointCap && !converged; ++k) {
        const MinTbPolicy stepped = apply(cand);
        const MinTbObs obs = observe_mintb(stepped.current_y(), next_env);
        MinTbPredictions next = realized_mintb(stepped, obs, params);
        if (mode.kind == PredictionMode::Kind::kNoisy) next = overlay_noise(next, mode.accuracy, noise);
        if (k >= kFixedPointCap / 2) {
            for (size_t i = 0; i < next.primal.size(); ++i)
                next.primal[i] = 0.5 * (next.primal[i] + cand.primal[i]);
            for (size_t i = 0; i < next.theta.size(); ++i)
                next.theta[i] = 0.5 * (next.theta[i] + cand.theta[i]);
        }
        converged = pred_gap(next, cand) <= kFixedPointTol * pred_scale(next);
        cand = std::move(next);
    }
    if (!converged) ++*failures;
    return cand;
}

void check_positive_components(const Vec& v, const char* what) {
    for (double x : v)
        if (!(x > 0.0))
            throw std::domain_error(std::string("time-averaged ") + what +
                                    " has a nonpositive component; widen the envelope floor");
}

std::string format_g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

// ---------------------------------------------------------------------------
// oracles

AssignmentOracle benchmark_assignment(const std::vector<AssignmentEnv>& envs,
                                      const FairnessParams& params, const OracleBudget& budget,
                                      std::uint64_t seed) {
    check_budget(budget);
    const AssignCache cache = build_assign_cache(envs, params);
    AssignWork work;
    AssignmentOracle best;
    best.report.objective = -std::numeric_limits<double>::infinity();
    long total_iters = 0;
    for (int r = 0; r < budget.restarts; ++r) {
        Mat x(cache.vbs, cache.servers, 1.0 / cache.servers);
        if (r > 0) {
            RngStream rng = stream_for(seed, kAssignmentOracleTag, static_cast<std::uint64_t>(r), 0,
                                       field::kInit);
            random_simplex_rows(x, rng);
        }
        const AscentResult res = ascend_assignment(cache, x, budget, work);
        total_iters += res.iterations;
        if (res.objective > best.report.objective) {
            best.x = x;
            best.report.objective = res.objective;
            best.report.pg_norm = res.pg_norm;
        }
    }
    best.report.converged = best.report.pg_norm <= budget.tolerance;
    best.report.restarts_used = budget.restarts;
    best.report.iterations_used = total_iters;
    return best;
}

MinTbOracle benchmark_mintb(const std::vector<MinTbEnv>& envs, double cap_k,
                            const FairnessParams& params, const OracleBudget& budget,
                            std::uint64_t seed) {
    check_budget(budget);
    const MinTbCacheEval cache = build_mintb_cache(envs, cap_k, params);
    MinTbOracle best;
    best.report.objective = -std::numeric_limits<double>::infinity();
    long total_iters = 0;
    for (int r = 0; r < budget.restarts; ++r) {
        Vec y(cache.users, 0.0);
        if (r == 1) y.assign(cache.users, cap_k);
        if (r == 2) y.assign(cache.users, 0.5 * cap_k);
        if (r >= 3) {
            RngStream rng = stream_for(seed, kMinTbOracleTag, static_cast<std::uint64_t>(r), 0,
                                       field::kInit);
            for (double& v : y) v = rng.uniform(0.0, cap_k);
        }
        const AscentResult res = ascend_mintb(cache, y, budget);
        total_iters += res.iterations;
        if (res.objective > best.report.objective) {
            best.y = y;
            best.report.objective = res.objective;
            best.report.pg_norm = res.pg_norm;
        }
    }
    // coordinates are independent, so one global 1-D pass finishes the job
    Vec vals(cache.users);
    for (int i = 0; i < cache.users; ++i) {
        vals[i] = coord_value(cache, i, best.y[i]);
        refine_coordinate(cache, i, best.y[i], vals[i]);
    }
    best.report.objective = sum(vals);
    best.report.pg_norm = mintb_pg_norm(cache, best.y);
    best.report.converged = best.report.pg_norm <= budget.tolerance;
    best.report.restarts_used = budget.restarts;
    best.report.iterations_used = total_iters;
    return best;
}

// ---------------------------------------------------------------------------
// regret metrics

double fairness_regret(const AssignmentTrace& trace, const Mat& x_star,
                       const std::vector<AssignmentEnv>& envs, const FairnessParams& params) {
    const size_t horizon = trace.slots.size();
    if (horizon == 0) throw std::invalid_argument("regret needs a nonempty trace");
    if (envs.size() != horizon)
        throw std::invalid_argument("regret needs one environment per recorded slot");
    params.validate();
    const int vbs = static_cast<int>(trace.slots[0].u.size());
    const int servers = static_cast<int>(trace.slots[0].h.size());
    Vec avg_u(vbs, 0.0), avg_h(servers, 0.0), avg_us(vbs, 0.0), avg_hs(servers, 0.0);
    for (size_t t = 0; t < horizon; ++t) {
        const AssignmentSlotRecord& rec = trace.slots[t];
        const AssignmentObs star = observe_assignment(x_star, envs[t], params);
        for (int i = 0; i < vbs; ++i) {
            avg_u[i] += rec.u[i];
            avg_us[i] += star.u[i];
        }
        for (int j = 0; j < servers; ++j) {
            avg_h[j] += rec.h[j];
            avg_hs[j] += star.h[j];
        }
    }
    const double tt = static_cast<double>(horizon);
    for (double& v : avg_u) v /= tt;
    for (double& v : avg_h) v /= tt;
    for (double& v : avg_us) v /= tt;
    for (double& v : avg_hs) v /= tt;
    check_positive_components(avg_u, "utility");
    check_positive_components(avg_h, "saving");
    check_positive_components(avg_us, "comparator utility");
    check_positive_components(avg_hs, "comparator saving");
    // paired differences: a benchmark-playing trace cancels to exactly zero
    return (fairness_sum(avg_us, params.alpha) - fairness_sum(avg_u, params.alpha)) +
           (fairness_sum(avg_hs, params.beta) - fairness_sum(avg_h, params.beta));
}

double galpha_regret(const MinTbTrace& trace, const Vec& y_star, const std::vector<MinTbEnv>& envs,
                     const FairnessParams& params) {
    const size_t horizon = trace.slots.size();
    if (horizon == 0) throw std::invalid_argument("regret needs a nonempty trace");
    if (envs.size() != horizon)
        throw std::invalid_argument("regret needs one environment per recorded slot");
    params.validate();
    const int users = static_cast<int>(trace.slots[0].u.size());
    Vec avg_u(users, 0.0), avg_us(users, 0.0);
    double cost = 0.0, cost_star = 0.0;
    for (size_t t = 0; t < horizon; ++t) {
        const MinTbSlotRecord& rec = trace.slots[t];
        const MinTbObs star = observe_mintb(y_star, envs[t]);
        for (int i = 0; i < users; ++i) {
            avg_u[i] += rec.u[i];
            avg_us[i] += star.u[i];
        }
        cost += rec.cost;
        cost_star += star.cost;
    }
    const double tt = static_cast<double>(horizon);
    for (double& v : avg_u) v /= tt;
    for (double& v : avg_us) v /= tt;
    cost /= tt;
    cost_star /= tt;
    check_positive_components(avg_u, "utility");
    check_positive_components(avg_us, "comparator utility");
    return (fairness_sum(avg_us, params.alpha) - cost_star) -
           (fairness_sum(avg_u, params.alpha) - cost);
}

// ---------------------------------------------------------------------------
// baselines

Mat slot_fair_assignment(const AssignmentEnv& env, const FairnessParams& params,
                         const OracleBudget& budget, std::uint64_t seed) {
    return benchmark_assignment({env}, params, budget, seed).x;
}

Mat utilitarian_assignment(const AssignmentEnv& env, const FairnessParams& params,
                           const OracleBudget& budget, std::uint64_t seed) {
    FairnessParams linear = params; // plain sums, same envelope
    linear.alpha = 0.0;
    linear.beta = 0.0;
    return benchmark_assignment({env}, linear, budget, seed).x;
}

Vec slot_fair_mintb(const MinTbEnv& env, double cap_k, const FairnessParams& params,
                    const OracleBudget& budget, std::uint64_t seed) {
    return benchmark_mintb({env}, cap_k, params, budget, seed).y;
}

Vec utilitarian_mintb(const MinTbEnv& env, double cap_k, const FairnessParams& params,
                      const OracleBudget& budget, std::uint64_t seed) {
    FairnessParams linear = params;
    linear.alpha = 0.0;
    return benchmark_mintb({env}, cap_k, linear, budget, seed).y;
}

// ---------------------------------------------------------------------------
// prediction modes

PredictionMode PredictionMode::parse(const std::string& text) {
    PredictionMode m;
    if (text == "none") return m;
    if (text == "perfect") {
        m.kind = Kind::kPerfect;
        return m;
    }
    if (text == "naive") {
        m.kind = Kind::kNaive;
        return m;
    }
    if (text.rfind("noisy:", 0) == 0) {
        m.kind = Kind::kNoisy;
        const std::string num = text.substr(6);
        size_t pos = 0;
        try {
            m.accuracy = std::stod(num, &pos);
        } catch (const std::exception&) {
            pos = std::string::npos;
        }
        if (pos != num.size() || !std::isfinite(m.accuracy) || m.accuracy < 0.0)
            throw std::invalid_argument("bad noise coefficient in '" + text + "'");
        return m;
    }
    throw std::invalid_argument("unknown prediction mode '" + text +
                                "' (expected none | perfect | naive | noisy:<c>)");
}

std::string PredictionMode::name() const {
    switch (kind) {
        case Kind::kNone: return "none";
        case Kind::kPerfect: return "perfect";
        case Kind::kNaive: return "naive";
        case Kind::kNoisy: {
            char buf[48];
            std::snprintf(buf, sizeof buf, "noisy:%g", accuracy);
            return buf;
        }
    }
    return "none";
}

Vec noisy_prediction(const Vec& g, double c, RngStream& rng) {
    Vec out = g;
    for (double& v : out) v += c * rng.normal() * v;
    return out;
}

Mat noisy_prediction(const Mat& g, double c, RngStream& rng) {
    Mat out = g;
    for (double& v : out.a) v += c * rng.normal() * v;
    return out;
}

const char* to_string(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::kOftrl: return "oftrl";
        case PolicyKind::kSlotFair: return "slot-fair";
        case PolicyKind::kUtilitarian: return "utilitarian";
    }
    return "oftrl";
}

// ---------------------------------------------------------------------------
// closed-loop runs

AssignmentRun run_assignment(const std::vector<AssignmentEnv>& envs, const FairnessParams& params,
                             PolicyKind policy, const PredictionMode& mode, std::uint64_t seed,
                             const OracleBudget& baseline_budget) {
    if (envs.empty()) throw std::invalid_argument("a run needs at least one slot");
    params.validate();
    const int vbs = envs[0].num_vbs(), servers = envs[0].num_servers();
    for (const AssignmentEnv& env : envs)
        if (env.num_vbs() != vbs || env.num_servers() != servers)
            throw std::invalid_argument("environment slots disagree in shape");

    AssignmentRun out;
    if (policy != PolicyKind::kOftrl) {
        for (size_t t = 0; t < envs.size(); ++t) {
            RngStream s = stream_for(seed, kBaselineStreamTag, t + 1, 0, field::kInit);
            const std::uint64_t slot_seed = s.next_u64();
            const Mat x = policy == PolicyKind::kSlotFair
                              ? slot_fair_assignment(envs[t], params, baseline_budget, slot_seed)
                              : utilitarian_assignment(envs[t], params, baseline_budget, slot_seed);
            out.trace.slots.push_back(fixed_assignment_record(x, envs[t], params));
        }
        return out;
    }

    AssignmentPolicy pol(vbs, servers, params);
    const bool lookahead =
        mode.kind == PredictionMode::Kind::kPerfect || mode.kind == PredictionMode::Kind::kNoisy;
    if (lookahead) {
        const AssignNoise noise = mode.kind == PredictionMode::Kind::kNoisy
                                      ? draw_assignment_noise(seed, 1, vbs, servers)
                                      : AssignNoise{};
        auto apply = [&](const AssignmentPredictions& cand) {
            AssignmentPolicy fresh(vbs, servers, params);
            fresh.seed_predictions(cand);
            return fresh;
        };
        const AssignmentPredictions first = assignment_prediction_fixed_point(
            apply, envs[0], params, AssignmentPredictions::zeros(vbs, servers), mode, noise,
            &out.fixed_point_failures);
        pol.seed_predictions(first);
    }
    for (size_t t = 0; t < envs.size(); ++t) {
        const AssignmentObs obs = observe_assignment(pol.current_x(), envs[t], params);
        AssignmentPredictions next = AssignmentPredictions::zeros(vbs, servers);
        if (t + 1 < envs.size()) {
            if (mode.kind == PredictionMode::Kind::kNaive) {
                next = realized_assignment(pol, obs, params); // carry this slot's gradients forward
            } else if (lookahead) {
                const AssignNoise noise = mode.kind == PredictionMode::Kind::kNoisy
                                              ? draw_assignment_noise(seed, t + 2, vbs, servers)
                                              : AssignNoise{};
                auto apply = [&](const AssignmentPredictions& cand) {
                    AssignmentPolicy stepped = pol;
                    stepped.slot(obs, cand);
                    return stepped;
                };
                next = assignment_prediction_fixed_point(apply, envs[t + 1], params,
                                                         realized_assignment(pol, obs, params), mode,
                                                         noise, &out.fixed_point_failures);
            }
        }
        pol.slot(obs, next);
    }
    out.trace = pol.trace();
    return out;
}

MinTbRun run_mintb(const std::vector<MinTbEnv>& envs, double cap_k, const FairnessParams& params,
                   PolicyKind policy, const PredictionMode& mode, std::uint64_t seed,
                   const OracleBudget& baseline_budget) {
    if (envs.empty()) throw std::invalid_argument("a run needs at least one slot");
    params.validate();
    if (!(cap_k > 0.0) || !std::isfinite(cap_k))
        throw std::invalid_argument("the threshold box edge K must be positive");
    const int users = envs[0].num_users();
    for (const MinTbEnv& env : envs)
        if (env.num_users() != users)
            throw std::invalid_argument("environment slots disagree in shape");

    MinTbRun out;
    if (policy != PolicyKind::kOftrl) {
        for (size_t t = 0; t < envs.size(); ++t) {
            RngStream s = stream_for(seed, kBaselineStreamTag, t + 1, 0, field::kInit);
            const std::uint64_t slot_seed = s.next_u64();
            const Vec y = policy == PolicyKind::kSlotFair
                              ? slot_fair_mintb(envs[t], cap_k, params, baseline_budget, slot_seed)
                              : utilitarian_mintb(envs[t], cap_k, params, baseline_budget, slot_seed);
            out.trace.slots.push_back(fixed_mintb_record(y, envs[t], params));
        }
        return out;
    }

    MinTbPolicy pol(users, cap_k, params);
    const bool lookahead =
        mode.kind == PredictionMode::Kind::kPerfect || mode.kind == PredictionMode::Kind::kNoisy;
    if (lookahead) {
        const MinTbNoise noise = mode.kind == PredictionMode::Kind::kNoisy
                                     ? draw_mintb_noise(seed, 1, users)
                                     : MinTbNoise{};
        auto apply = [&](const MinTbPredictions& cand) {
            MinTbPolicy fresh(users, cap_k, params);
            fresh.seed_predictions(cand);
            return fresh;
        };
        const MinTbPredictions first =
            mintb_prediction_fixed_point(apply, envs[0], params, MinTbPredictions::zeros(users),
                                         mode, noise, &out.fixed_point_failures);
        pol.seed_predictions(first);
    }
    for (size_t t = 0; t < envs.size(); ++t) {
        const MinTbObs obs = observe_mintb(pol.current_y(), envs[t]);
        MinTbPredictions next = MinTbPredictions::zeros(users);
        if (t + 1 < envs.size()) {
            if (mode.kind == PredictionMode::Kind::kNaive) {
                next = realized_mintb(pol, obs, params);
            } else if (lookahead) {
                const MinTbNoise noise = mode.kind == PredictionMode::Kind::kNoisy
                                             ? draw_mintb_noise(seed, t + 2, users)
                                             : MinTbNoise{};
                auto apply = [&](const MinTbPredictions& cand) {
                    MinTbPolicy stepped = pol;
                    stepped.slot(obs, cand);
                    return stepped;
                };
                next = mintb_prediction_fixed_point(apply, envs[t + 1], params,
                                                    realized_mintb(pol, obs, params), mode, noise,
                                                    &out.fixed_point_failures);
            }
        }
        pol.slot(obs, next);
    }
    out.trace = pol.trace();
    return out;
}

AssignmentTrace replay_fixed_assignment(const Mat& x, const std::vector<AssignmentEnv>& envs,
                                        const FairnessParams& params) {
    if (envs.empty()) throw std::invalid_argument("a replay needs at least one slot");
    params.validate();
    AssignmentTrace trace;
    for (const AssignmentEnv& env : envs)
        trace.slots.push_back(fixed_assignment_record(x, env, params));
    return trace;
}

MinTbTrace replay_fixed_mintb(const Vec& y, const std::vector<MinTbEnv>& envs,
                              const FairnessParams& params) {
    if (envs.empty()) throw std::invalid_argument("a replay needs at least one slot");
    params.validate();
    MinTbTrace trace;
    for (const MinTbEnv& env : envs) trace.slots.push_back(fixed_mintb_record(y, env, params));
    return trace;
}

// ---------------------------------------------------------------------------
// dispersion

DispersionMetrics dispersion_metrics(const Vec& values) {
    if (values.empty()) throw std::invalid_argument("dispersion needs at least one value");
    double total = 0.0, total_sq = 0.0, lo = values[0], hi = values[0];
    for (double v : values) {
        if (!(v >= 0.0)) throw std::invalid_argument("dispersion values must be nonnegative");
        total += v;
        total_sq += v * v;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (total == 0.0) throw std::invalid_argument("dispersion values must not all be zero");
    const double n = static_cast<double>(values.size());
    DispersionMetrics out;
    out.jain = total * total / (n * total_sq);
    out.max_min_ratio = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
    const double mean = total / n;
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    out.stddev = std::sqrt(var / n);
    return out;
}

// ---------------------------------------------------------------------------
// result tables

std::vector<RegretRow> regret_rows(const AssignmentTrace& trace, const Mat& x_star,
                                   const std::vector<AssignmentEnv>& envs,
                                   const FairnessParams& params, const std::string& policy,
                                   std::uint64_t seed) {
    const size_t horizon = trace.slots.size();
    if (horizon == 0) throw std::invalid_argument("regret rows need a nonempty trace");
    if (envs.size() != horizon)
        throw std::invalid_argument("regret rows need one environment per recorded slot");
    params.validate();
    const int vbs = static_cast<int>(trace.slots[0].u.size());
    const int servers = static_cast<int>(trace.slots[0].h.size());
    Vec su(vbs, 0.0), sh(servers, 0.0), sus(vbs, 0.0), shs(servers, 0.0);
    Vec au(vbs), ah(servers), aus(vbs), ahs(servers);
    long clips = 0;
    std::vector<RegretRow> rows;
    rows.reserve(horizon);
    for (size_t t = 0; t < horizon; ++t) {
        const AssignmentSlotRecord& rec = trace.slots[t];
        const AssignmentObs star = observe_assignment(x_star, envs[t], params);
        for (int i = 0; i < vbs; ++i) {
            su[i] += rec.u[i];
            sus[i] += star.u[i];
        }
        for (int j = 0; j < servers; ++j) {
            sh[j] += rec.h[j];
            shs[j] += star.h[j];
        }
        clips += rec.u_clipped + rec.h_clipped;
        const double tt = static_cast<double>(t + 1);
        for (int i = 0; i < vbs; ++i) {
            au[i] = su[i] / tt;
            aus[i] = sus[i] / tt;
        }
        for (int j = 0; j < servers; ++j) {
            ah[j] = sh[j] / tt;
            ahs[j] = shs[j] / tt;
        }
        RegretRow row;
        row.t = static_cast<long>(t + 1);
        row.policy = policy;
        row.seed = seed;
        row.avg_fair_utility = fairness_sum(au, params.alpha);
        row.avg_fair_saving = fairness_sum(ah, params.beta);
        row.regret = (fairness_sum(aus, params.alpha) - row.avg_fair_utility) +
                     (fairness_sum(ahs, params.beta) - row.avg_fair_saving);
        row.clip_count = clips;
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<RegretRow> regret_rows(const MinTbTrace& trace, const Vec& y_star,
                                   const std::vector<MinTbEnv>& envs, const FairnessParams& params,
                                   const std::string& policy, std::uint64_t seed) {
    const size_t horizon = trace.slots.size();
    if (horizon == 0) throw std::invalid_argument("regret rows need a nonempty trace");
    if (envs.size() != horizon)
        throw std::invalid_argument("regret rows need one environment per recorded slot");
    params.validate();
    const int users = static_cast<int>(trace.slots[0].u.size());
    Vec su(users, 0.0), sus(users, 0.0), au(users), aus(users);
    double sc = 0.0, scs = 0.0;
    long clips = 0;
    std::vector<RegretRow> rows;
    rows.reserve(horizon);
    for (size_t t = 0; t < horizon; ++t) {
        const MinTbSlotRecord& rec = trace.slots[t];
        const MinTbObs star = observe_mintb(y_star, envs[t]);
        for (int i = 0; i < users; ++i) {
            su[i] += rec.u[i];
            sus[i] += star.u[i];
        }
        sc += rec.cost;
        scs += star.cost;
        clips += rec.u_clipped;
        const double tt = static_cast<double>(t + 1);
        for (int i = 0; i < users; ++i) {
            au[i] = su[i] / tt;
            aus[i] = sus[i] / tt;
        }
        RegretRow row;
        row.t = static_cast<long>(t + 1);
        row.policy = policy;
        row.seed = seed;
        row.avg_fair_utility = fairness_sum(au, params.alpha);
        row.avg_fair_saving = -sc / tt; // the money side of the objective
        row.regret = (fairness_sum(aus, params.alpha) - scs / tt) -
                     (row.avg_fair_utility + row.avg_fair_saving);
        row.clip_count = clips;
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_regret_csv(const std::string& path, const std::vector<RegretRow>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << "t,policy,seed,regret,avg_fair_utility,avg_fair_saving,clip_count\n";
    for (const RegretRow& r : rows) {
        out << r.t << ',' << r.policy << ',' << r.seed << ',' << format_g17(r.regret) << ','
            << format_g17(r.avg_fair_utility) << ',' << format_g17(r.avg_fair_saving) << ','
            << r.clip_count << '\n';
    }
    if (!out) throw std::runtime_error("failed while writing '" + path + "'");
}

RunAggregate aggregate_assignment(const AssignmentTrace& trace, const Mat& x_star,
                                  const std::vector<AssignmentEnv>& envs,
                                  const FairnessParams& params, const std::string& policy,
                                  std::uint64_t seed, const OracleReport& oracle) {
    RunAggregate agg;
    agg.policy = policy;
    agg.seed = seed;
    agg.final_regret = fairness_regret(trace, x_star, envs, params);
    agg.clip_count = trace.clip_count();
    const size_t horizon = trace.slots.size();
    const int vbs = static_cast<int>(trace.slots[0].u.size());
    const int servers = static_cast<int>(trace.slots[0].h.size());
    Vec avg_u(vbs, 0.0), avg_h(servers, 0.0);
    for (const AssignmentSlotRecord& rec : trace.slots) {
        for (int i = 0; i < vbs; ++i) avg_u[i] += rec.u[i] / static_cast<double>(horizon);
        for (int j = 0; j < servers; ++j) avg_h[j] += rec.h[j] / static_cast<double>(horizon);
    }
    agg.total_utility = sum(avg_u);
    agg.total_saving = sum(avg_h);
    agg.utility_dispersion = dispersion_metrics(avg_u);
    agg.saving_dispersion = dispersion_metrics(avg_h);
    agg.has_saving_dispersion = true;
    agg.oracle = oracle;
    return agg;
}

RunAggregate aggregate_mintb(const MinTbTrace& trace, const Vec& y_star,
                             const std::vector<MinTbEnv>& envs, const FairnessParams& params,
                             const std::string& policy, std::uint64_t seed,
                             const OracleReport& oracle) {
    RunAggregate agg;
    agg.policy = policy;
    agg.seed = seed;
    agg.final_regret = galpha_regret(trace, y_star, envs, params);
    agg.clip_count = trace.clip_count();
    const size_t horizon = trace.slots.size();
    const int users = static_cast<int>(trace.slots[0].u.size());
    Vec avg_u(users, 0.0);
    double avg_cost = 0.0;
    for (const MinTbSlotRecord& rec : trace.slots) {
        for (int i = 0; i < users; ++i) avg_u[i] += rec.u[i] / static_cast<double>(horizon);
        avg_cost += rec.cost / static_cast<double>(horizon);
    }
    agg.total_utility = sum(avg_u);
    agg.total_saving = -avg_cost;
    agg.utility_dispersion = dispersion_metrics(avg_u);
    agg.has_saving_dispersion = false;
    agg.oracle = oracle;
    return agg;
}

void write_summary_json(const std::string& path, const std::string& provenance_json,
                        const std::vector<RunAggregate>& runs) {
    json doc;
    try {
        doc["provenance"] = json::parse(provenance_json);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("provenance is not valid JSON: ") + e.what());
    }
    std::map<std::string, std::vector<const RunAggregate*>> groups;
    for (const RunAggregate& r : runs) groups[r.policy].push_back(&r);
    json policies = json::object();
    for (const auto& [name, list] : groups) {
        json jruns = json::array();
        double regret_sum = 0.0, regret_sq = 0.0, clip_sum = 0.0;
        double tu = 0.0, ts = 0.0, ju = 0.0, js = 0.0;
        bool all_converged = true, all_saving = true;
        for (const RunAggregate* r : list) {
            json jr = {
                {"seed", r->seed},
                {"final_regret", r->final_regret},
                {"clip_count", r->clip_count},
                {"total_utility", r->total_utility},
                {"total_saving", r->total_saving},
                {"utility_dispersion",
                 {{"jain", r->utility_dispersion.jain},
                  {"max_min_ratio", r->utility_dispersion.max_min_ratio},
                  {"stddev", r->utility_dispersion.stddev}}},
                {"oracle",
                 {{"objective", r->oracle.objective},
                  {"pg_norm", r->oracle.pg_norm},
                  {"converged", r->oracle.converged},
                  {"restarts", r->oracle.restarts_used},
                  {"iterations", r->oracle.iterations_used}}},
                {"fixed_point_failures", r->fixed_point_failures},
            };
            if (r->has_saving_dispersion) {
                jr["saving_dispersion"] = {{"jain", r->saving_dispersion.jain},
                                           {"max_min_ratio", r->saving_dispersion.max_min_ratio},
                                           {"stddev", r->saving_dispersion.stddev}};
                js += r->saving_dispersion.jain;
            } else {
                all_saving = false;
            }
            regret_sum += r->final_regret;
            regret_sq += r->final_regret * r->final_regret;
            clip_sum += static_cast<double>(r->clip_count);
            tu += r->total_utility;
            ts += r->total_saving;
            ju += r->utility_dispersion.jain;
            all_converged = all_converged && r->oracle.converged;
            jruns.push_back(std::move(jr));
        }
        const double n = static_cast<double>(list.size());
        const double mean = regret_sum / n;
        json agg = {
            {"runs", std::move(jruns)},
            {"final_regret_mean", mean},
            {"final_regret_stddev", std::sqrt(std::max(0.0, regret_sq / n - mean * mean))},
            {"clip_count_mean", clip_sum / n},
            {"total_utility_mean", tu / n},
            {"total_saving_mean", ts / n},
            {"jain_utility_mean", ju / n},
            {"oracle_all_converged", all_converged},
        };
        if (all_saving) agg["jain_saving_mean"] = js / n;
        policies[name] = std::move(agg);
    }
    doc["policies"] = std::move(policies);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << doc.dump(2) << "\n";
    if (!out) throw std::runtime_error("failed while writing '" + path + "'");
}

} // namespace vranfair
