#include "vranfair/oftrl.hpp"

#include <cmath>
#include <stdexcept>

namespace vranfair {

namespace {
constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kTwoSqrt2 = 2.0 * kSqrt2;
} // namespace

Box Box::uniform(double lower, double upper, int dim) {
    Box b;
    b.lo.assign(dim, lower);
    b.hi.assign(dim, upper);
    b.validate();
    return b;
}

void Box::validate() const {
    if (lo.empty() || lo.size() != hi.size()) throw std::invalid_argument("Box: empty or ragged");
    for (size_t k = 0; k < lo.size(); ++k)
        if (!(lo[k] <= hi[k])) throw std::invalid_argument("Box: lo > hi");
}

double Box::diameter() const {
    double s = 0.0;
    for (size_t k = 0; k < lo.size(); ++k) {
        const double d = hi[k] - lo[k];
        s += d * d;
    }
    return std::sqrt(s);
}

Vec Box::midpoint() const {
    Vec m(lo.size());
    for (size_t k = 0; k < lo.size(); ++k) m[k] = 0.5 * (lo[k] + hi[k]);
    return m;
}

double QuadOftrl::default_scale(const Box& box) {
    const double d = box.diameter();
    return d > 0.0 ? kTwoSqrt2 / d : 0.0;
}

QuadOftrl::QuadOftrl(Box box, QuadObjective objective)
    : QuadOftrl(box, objective, default_scale(box)) {}

QuadOftrl::QuadOftrl(Box box, QuadObjective objective, double scale)
    : box_(std::move(box)), objective_(objective), scale_(scale) {
    box_.validate();
    if (scale_ < 0.0) throw std::invalid_argument("QuadOftrl: negative scale");
    grad_sum_.assign(box_.dim(), 0.0);
    last_pred_.assign(box_.dim(), 0.0);
}

// argmin over the box of (denom/2)||z||^2 + sgn * z.omega, where sgn is +1
// for kMinimize and -1 for kMaximize.  With denom = 0 the quadratic vanishes
// and the limit is per coordinate: the endpoint the linear term points at, or
// the midpoint when that coordinate of omega is zero.
Vec QuadOftrl::solve(const Vec& omega) const {
    const double denom = scale_ * std::sqrt(sq_err_sum_);
    const double sgn = (objective_ == QuadObjective::kMinimize) ? -1.0 : 1.0;
    Vec z(box_.dim());
    if (denom > 0.0) {
        for (int k = 0; k < box_.dim(); ++k)
            z[k] = clamp(sgn * omega[k] / denom, box_.lo[k], box_.hi[k]);
        return z;
    }
    for (int k = 0; k < box_.dim(); ++k) {
        if (omega[k] == 0.0) z[k] = 0.5 * (box_.lo[k] + box_.hi[k]);
        else if (sgn * omega[k] > 0.0) z[k] = box_.hi[k];
        else z[k] = box_.lo[k];
    }
    return z;
}

Vec QuadOftrl::initial_point(const Vec& first_pred) const {
    if (static_cast<int>(first_pred.size()) != box_.dim())
        throw std::invalid_argument("QuadOftrl: prediction size mismatch");
    return solve(first_pred);
}

void QuadOftrl::seed_prediction(const Vec& p) {
    if (static_cast<int>(p.size()) != box_.dim())
        throw std::invalid_argument("QuadOftrl: prediction size mismatch");
    last_pred_ = p;
}

Vec QuadOftrl::step(const Vec& observed_grad, const Vec& next_pred) {
    if (static_cast<int>(observed_grad.size()) != box_.dim() ||
        static_cast<int>(next_pred.size()) != box_.dim())
        throw std::invalid_argument("QuadOftrl: gradient size mismatch");
    sq_err_sum_ += l2_dist_sq(observed_grad, last_pred_);
    for (int k = 0; k < box_.dim(); ++k) grad_sum_[k] += observed_grad[k];
    Vec omega = grad_sum_;
    for (int k = 0; k < box_.dim(); ++k) omega[k] += next_pred[k];
    last_pred_ = next_pred;
    return solve(omega);
}

double EntropicOftrl::default_eta(int cols) {
    const double lg = std::max(std::log(static_cast<double>(cols)), std::log(2.0));
    return std::min(0.5, std::sqrt(kTwoSqrt2 / lg));
}

EntropicOftrl::EntropicOftrl(int rows, int cols) : EntropicOftrl(rows, cols, default_eta(cols)) {}

EntropicOftrl::EntropicOftrl(int rows, int cols, double eta)
    : rows_(rows), cols_(cols), eta_(eta), agg_(rows, cols), last_pred_(rows, cols) {
    if (rows <= 0 || cols <= 0) throw std::invalid_argument("EntropicOftrl: bad shape");
    if (!(eta > 0.0)) throw std::invalid_argument("EntropicOftrl: eta must be positive");
}

// Row-wise argmin over the simplex of (denom/2)(log J + sum x log x) - x.omega:
// the softmax of 2*omega/denom.  With denom = 0 the limit is the row argmax
// one-hot (lowest index on ties), or the uniform row when the row is zero.
Mat EntropicOftrl::solve(const Mat& omega) const {
    const double denom = eta_ * std::sqrt(sq_err_sum_);
    Mat x(rows_, cols_);
    Vec row(cols_);
    for (int i = 0; i < rows_; ++i) {
        if (denom > 0.0) {
            for (int j = 0; j < cols_; ++j) row[j] = 2.0 * omega(i, j) / denom;
            softmax_inplace(row);
            for (int j = 0; j < cols_; ++j) x(i, j) = row[j];
            continue;
        }
        bool all_zero = true;
        int arg = 0;
        for (int j = 0; j < cols_; ++j) {
            if (omega(i, j) != 0.0) all_zero = false;
            if (omega(i, j) > omega(i, arg)) arg = j;
        }
        if (all_zero) {
            for (int j = 0; j < cols_; ++j) x(i, j) = 1.0 / cols_;
        } else {
            for (int j = 0; j < cols_; ++j) x(i, j) = (j == arg) ? 1.0 : 0.0;
        }
    }
    return x;
}

Mat EntropicOftrl::initial_point(const Mat& first_pred) const {
    if (first_pred.rows != rows_ || first_pred.cols != cols_)
        throw std::invalid_argument("EntropicOftrl: prediction shape mismatch");
    return solve(first_pred);
}

void EntropicOftrl::seed_prediction(const Mat& p) {
    if (p.rows != rows_ || p.cols != cols_)
        throw std::invalid_argument("EntropicOftrl: prediction shape mismatch");
    last_pred_ = p;
}

Mat EntropicOftrl::step(const Mat& observed_grad, const Mat& next_pred) {
    if (observed_grad.rows != rows_ || observed_grad.cols != cols_ ||
        next_pred.rows != rows_ || next_pred.cols != cols_)
        throw std::invalid_argument("EntropicOftrl: gradient shape mismatch");
    const double e = linf_dist(observed_grad, last_pred_);
    sq_err_sum_ += e * e;
    agg_ += observed_grad;
    Mat omega = agg_ + next_pred;
    last_pred_ = next_pred;
    return solve(omega);
}

// ---- empirical regret-bound checks ------------------------------------------

BoundCheck dual_regret_bound_check(const std::vector<Vec>& grads,
                                   const std::vector<Vec>& preds, double alpha,
                                   const DualBox& box) {
    if (grads.empty()) throw std::invalid_argument("dual_regret_bound_check: empty trace");
    if (preds.size() != grads.size())
        throw std::invalid_argument("dual_regret_bound_check: trace size mismatch");
    const size_t T = grads.size();
    const int dim = static_cast<int>(grads[0].size());

    QuadOftrl learner(Box::from_dual(box), QuadObjective::kMinimize);
    learner.seed_prediction(preds[0]);
    Vec theta = learner.initial_point(preds[0]);

    // Reconstruct the per-slot value vector each gradient reports at the
    // played point, accumulate realized proxy losses, and replay the learner.
    std::vector<Vec> values(T, Vec(dim));
    double realized = 0.0;
    double err_sq = 0.0;
    Vec value_sum(dim, 0.0);
    const Vec zeros(dim, 0.0);
    for (size_t t = 0; t < T; ++t) {
        for (int k = 0; k < dim; ++k) {
            const double pw =
                (alpha < kAlphaOneTol) ? 1.0 : std::pow(-theta[k], -1.0 / alpha);
            values[t][k] = pw - grads[t][k];
            value_sum[k] += values[t][k];
        }
        realized += psi_value(theta, values[t], alpha);
        err_sq += l2_dist_sq(grads[t], (t == 0) ? preds[0] : preds[t]);
        theta = learner.step(grads[t], (t + 1 < T) ? preds[t + 1] : zeros);
    }

    // Best fixed comparator of the summed proxy losses, per coordinate: the
    // clamped stationary point when the average value is positive, else the
    // loss is increasing over the (all-negative) box and the lower end wins.
    Vec comparator(dim);
    for (int k = 0; k < dim; ++k) {
        const double avg = value_sum[k] / static_cast<double>(T);
        comparator[k] =
            avg > 0.0 ? clamp(-std::pow(avg, -alpha), box.lower, box.upper) : box.lower;
    }
    double best = 0.0;
    for (size_t t = 0; t < T; ++t) best += psi_value(comparator, values[t], alpha);

    BoundCheck out;
    out.lhs = realized - best;
    out.rhs = 4.0 * kSqrt2 * box.diameter() * std::sqrt(err_sq);
    return out;
}

BoundCheck primal_regret_bound_check(const std::vector<Mat>& payoffs,
                                     const std::vector<Mat>& preds) {
    if (payoffs.empty()) throw std::invalid_argument("primal_regret_bound_check: empty trace");
    if (preds.size() != payoffs.size())
        throw std::invalid_argument("primal_regret_bound_check: trace size mismatch");
    const size_t T = payoffs.size();
    const int I = payoffs[0].rows;
    const int J = payoffs[0].cols;

    EntropicOftrl learner(I, J);
    learner.seed_prediction(preds[0]);
    Mat x = learner.initial_point(preds[0]);

    double realized = 0.0;
    double err_sq = 0.0;
    Mat agg(I, J);
    const Mat zeros(I, J);
    for (size_t t = 0; t < T; ++t) {
        for (int k = 0; k < I * J; ++k) realized += x.a[k] * payoffs[t].a[k];
        agg += payoffs[t];
        const double e = linf_dist(payoffs[t], (t == 0) ? preds[0] : preds[t]);
        err_sq += e * e;
        x = learner.step(payoffs[t], (t + 1 < T) ? preds[t + 1] : zeros);
    }

    // best fixed point sits on a per-row vertex of the aggregate payoff
    double best = 0.0;
    for (int i = 0; i < I; ++i) {
        double row_best = agg(i, 0);
        for (int j = 1; j < J; ++j) row_best = std::max(row_best, agg(i, j));
        best += row_best;
    }

    BoundCheck out;
    out.lhs = best - realized;
    out.rhs = (kSqrt2 * I / learner.eta() +
               learner.eta() * I * std::log(static_cast<double>(J)) / 2.0) *
              std::sqrt(err_sq);
    return out;
}

} // namespace vranfair
