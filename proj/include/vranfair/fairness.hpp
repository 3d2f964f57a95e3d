#pragma once

#include <vector>

#include "vranfair/linalg.hpp"

namespace vranfair {

// Alpha-fairness machinery shared by both allocation problems: the scalar
// fairness function, its sum over coordinates, the Fenchel conjugate of the
// negated sum restricted to a box of negative multipliers, and the gradients
// of the conjugate-based proxy objective.

// Treat alpha as 1 (log fairness) inside this window, and as 0 below it.
constexpr double kAlphaOneTol = 1e-9;

// Closed interval [lower, upper]^dim of dual multipliers, always negative.
struct DualBox {
    double lower = 0.0;
    double upper = 0.0;
    int dim = 0;

    // Box induced by value bounds [v_min, v_max] and fairness exponent e:
    // [-1/v_min^e, -1/v_max^e]^dim.  Degenerate (single point -1) when e = 0.
    static DualBox from_bounds(double v_min, double v_max, double exponent, int dim);

    double midpoint() const { return 0.5 * (lower + upper); }
    // Euclidean diameter (upper - lower) * sqrt(dim).
    double diameter() const;
    bool contains(double v) const { return v >= lower && v <= upper; }
};

// Scalar fairness value; u must be positive.  alpha near 1 takes the log
// branch, alpha = 0 reduces to u - 1.
double f_alpha(double u, double alpha);

// Sum of f_alpha over all coordinates.
double fairness_sum(const Vec& u, double alpha);
// Derivative of f_alpha: u^(-alpha).
double f_alpha_prime(double u, double alpha);

// One coordinate of the conjugate of the negated fairness sum, evaluated at a
// negative multiplier theta.
double conj_term(double theta, double alpha);
// Conjugate of -fairness_sum at a componentwise negative theta.
double conj_neg_fairness(const Vec& theta, double alpha);

// Proxy objective psi(theta, u) = conj_neg_fairness(theta) - theta . u.
double psi_value(const Vec& theta, const Vec& u, double alpha);

// Gradient of psi in theta: kappa_i = (-theta_i)^(-1/alpha) - u_i.
// (The stationary point -u_i^(-alpha) recovers fairness_sum(u); validated
// against central finite differences in the tests.)
Vec dual_gradient(const Vec& theta, const Vec& u, double alpha);

// Per-coordinate minimizer of psi over the box: clamp(-u_i^(-alpha)).
Vec dual_minimizer(const Vec& u, double alpha, const DualBox& box);

// Value envelope and fairness exponents shared by a run.
struct FairnessParams {
    double alpha = 1.0;
    double beta = 1.0;
    double u_min = 1e-3;
    double u_max = 1.0;
    double h_min = 1e-3;
    double h_max = 1.0;

    void validate() const; // throws std::invalid_argument on a bad envelope
    DualBox theta_box(int dim) const { return DualBox::from_bounds(u_min, u_max, alpha, dim); }
    DualBox phi_box(int dim) const { return DualBox::from_bounds(h_min, h_max, beta, dim); }
};

} // namespace vranfair
