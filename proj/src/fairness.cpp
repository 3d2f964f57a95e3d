#include "vranfair/fairness.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace vranfair {

DualBox DualBox::from_bounds(double v_min, double v_max, double exponent, int dim) {
    // v_min == v_max pins the box to a single point (diameter zero)
    if (!(v_min > 0.0) || !(v_max >= v_min))
        throw std::invalid_argument("DualBox: need 0 < v_min <= v_max");
    if (exponent < 0.0) throw std::invalid_argument("DualBox: negative exponent");
    if (dim <= 0) throw std::invalid_argument("DualBox: dim must be positive");
    DualBox b;
    b.lower = -1.0 / std::pow(v_min, exponent);
    b.upper = -1.0 / std::pow(v_max, exponent);
    b.dim = dim;
    return b;
}

double DualBox::diameter() const {
    return (upper - lower) * std::sqrt(static_cast<double>(dim));
}

double f_alpha(double u, double alpha) {
    if (!(u > 0.0)) throw std::domain_error("f_alpha: u must be positive, got " + std::to_string(u));
    if (alpha < 0.0) throw std::domain_error("f_alpha: alpha must be nonnegative");
    if (std::fabs(alpha - 1.0) < kAlphaOneTol) return std::log(u);
    return (std::pow(u, 1.0 - alpha) - 1.0) / (1.0 - alpha);
}

double fairness_sum(const Vec& u, double alpha) {
    double s = 0.0;
    for (double v : u) s += f_alpha(v, alpha);
    return s;
}

double f_alpha_prime(double u, double alpha) {
    if (!(u > 0.0)) throw std::domain_error("f_alpha_prime: u must be positive");
    return std::pow(u, -alpha);
}

double conj_term(double theta, double alpha) {
    if (!(theta < 0.0))
        throw std::domain_error("conj_term: theta must be negative, got " + std::to_string(theta));
    const double s = -theta;
    if (std::fabs(alpha - 1.0) < kAlphaOneTol) return -1.0 - std::log(s);
    // alpha = 0 collapses the multiplier box to {-1}; the conjugate there is
    // the constant -1 per coordinate (limit of the general formula).
    if (alpha < kAlphaOneTol) return -1.0;
    return (alpha * std::pow(s, 1.0 - 1.0 / alpha) - 1.0) / (1.0 - alpha);
}

double conj_neg_fairness(const Vec& theta, double alpha) {
    double s = 0.0;
    for (double v : theta) s += conj_term(v, alpha);
    return s;
}

double psi_value(const Vec& theta, const Vec& u, double alpha) {
    if (theta.size() != u.size()) throw std::invalid_argument("psi_value: size mismatch");
    return conj_neg_fairness(theta, alpha) - dot(theta, u);
}

Vec dual_gradient(const Vec& theta, const Vec& u, double alpha) {
    if (theta.size() != u.size()) throw std::invalid_argument("dual_gradient: size mismatch");
    Vec g(theta.size());
    for (size_t k = 0; k < theta.size(); ++k) {
        if (!(theta[k] < 0.0)) throw std::domain_error("dual_gradient: theta must be negative");
        // alpha = 0: box is the single point -1 and the gradient is only used
        // through prediction-error norms; use the alpha -> 0+ limit of the
        // power term, which is 1 at theta = -1.
        const double pw = (alpha < kAlphaOneTol) ? 1.0 : std::pow(-theta[k], -1.0 / alpha);
        g[k] = pw - u[k];
    }
    return g;
}

Vec dual_minimizer(const Vec& u, double alpha, const DualBox& box) {
    Vec out(u.size());
    for (size_t k = 0; k < u.size(); ++k) {
        if (!(u[k] > 0.0)) throw std::domain_error("dual_minimizer: u must be positive");
        out[k] = clamp(-std::pow(u[k], -alpha), box.lower, box.upper);
    }
    return out;
}

void FairnessParams::validate() const {
    if (alpha < 0.0 || beta < 0.0)
        throw std::invalid_argument("FairnessParams: alpha/beta must be nonnegative");
    // equal bounds are allowed: they pin the envelope (and the dual box) to a point
    if (!(u_min > 0.0) || !(u_max >= u_min))
        throw std::invalid_argument("FairnessParams: need 0 < u_min <= u_max");
    if (!(h_min > 0.0) || !(h_max >= h_min))
        throw std::invalid_argument("FairnessParams: need 0 < h_min <= h_max");
}

} // namespace vranfair
