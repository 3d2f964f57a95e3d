#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "test_util.hpp"
#include "vranfair/fairness.hpp"
#include "vranfair/rng.hpp"

using namespace vranfair;

TEST_CASE("scalar fairness pinned values") {
    // alpha = 0 is plain throughput shifted by 1.
    CHECK(f_alpha(3.0, 0.0) == doctest::Approx(2.0));
    // alpha = 1 is the log branch, exact at e.
    CHECK(f_alpha(std::exp(1.0), 1.0) == doctest::Approx(1.0));
    // alpha = 2: (u^-1 - 1)/(-1) = 1 - 1/u.
    CHECK(f_alpha(2.0, 2.0) == doctest::Approx(0.5));
    CHECK(f_alpha(4.0, 2.0) == doctest::Approx(0.75));
    CHECK(fairness_sum({2.0, 4.0}, 2.0) == doctest::Approx(1.25));
    CHECK_THROWS_AS(f_alpha(0.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(f_alpha(-2.0, 2.0), std::domain_error);
}

TEST_CASE("fairness is continuous across the alpha=1 switch") {
    for (double u : {0.2, 0.9, 1.7, 31.0}) {
        const double at_one = f_alpha(u, 1.0);
        CHECK(std::fabs(f_alpha(u, 1.0 + 1e-7) - at_one) < 1e-5);
        CHECK(std::fabs(f_alpha(u, 1.0 - 1e-7) - at_one) < 1e-5);
        // inside the tolerance window the log branch is taken exactly
        CHECK(f_alpha(u, 1.0 + 1e-12) == at_one);
    }
}

TEST_CASE("fairness increases in u and derivative matches") {
    RngStream rng{12345};
    for (int k = 0; k < 200; ++k) {
        const double alpha = rng.uniform(0.0, 5.0);
        const double u = rng.uniform(0.05, 20.0);
        const double h = 1e-6 * (1.0 + u);
        const double fd = testutil::fd_central([&](double v) { return f_alpha(v, alpha); }, u, h);
        CHECK(testutil::close_rel(fd, f_alpha_prime(u, alpha), 1e-6));
        CHECK(f_alpha_prime(u, alpha) > 0.0);
    }
}

TEST_CASE("dual box from value bounds") {
    const DualBox b = DualBox::from_bounds(0.5, 4.0, 1.0, 2);
    CHECK(b.lower == doctest::Approx(-2.0));
    CHECK(b.upper == doctest::Approx(-0.25));
    CHECK(b.diameter() == doctest::Approx(1.75 * std::sqrt(2.0)));
    CHECK(b.midpoint() == doctest::Approx(-1.125));

    // exponent 0 collapses the box to the single point -1
    const DualBox z = DualBox::from_bounds(0.5, 4.0, 0.0, 3);
    CHECK(z.lower == doctest::Approx(-1.0));
    CHECK(z.upper == doctest::Approx(-1.0));
    CHECK(z.diameter() == doctest::Approx(0.0));

    CHECK_THROWS_AS(DualBox::from_bounds(-1.0, 4.0, 1.0, 2), std::invalid_argument);
    CHECK_THROWS_AS(DualBox::from_bounds(2.0, 1.0, 1.0, 2), std::invalid_argument);
}

// Oracle: the conjugate of the negated fairness sum at theta equals
// sup_u { theta*u + f_alpha(u) } per coordinate.  Golden-section search over a
// wide positive interval stands in for the closed form.
TEST_CASE("conjugate matches 1-d maximization oracle") {
    RngStream rng{777};
    for (int k = 0; k < 300; ++k) {
        double alpha;
        switch (k % 4) {
            case 0: alpha = 0.5; break;
            case 1: alpha = 1.0; break;
            case 2: alpha = 2.0; break;
            default: alpha = rng.uniform(0.25, 5.0); break;
        }
        const double u_star = rng.uniform(0.1, 8.0);       // intended maximizer
        const double theta = -std::pow(u_star, -alpha);    // interior multiplier
        const double oracle = [&] {
            auto obj = [&](double u) { return theta * u + f_alpha(u, alpha); };
            const double um = testutil::golden_max(obj, 1e-4, 64.0, 300);
            return obj(um);
        }();
        CHECK(conj_term(theta, alpha) == doctest::Approx(oracle).epsilon(1e-7));
    }
    // pinned: alpha = 1, theta = -1 -> -1 - log 1 = -1
    CHECK(conj_term(-1.0, 1.0) == doctest::Approx(-1.0));
    CHECK_THROWS_AS(conj_term(0.5, 1.0), std::domain_error);
}

TEST_CASE("dual gradient matches central finite differences") {
    RngStream rng{424242};
    for (int k = 0; k < 500; ++k) {
        const double alpha = (k % 3 == 0) ? 1.0 : rng.uniform(0.3, 5.0);
        const int dim = 1 + static_cast<int>(rng.next_u64() % 4);
        Vec u(dim), theta(dim);
        for (int i = 0; i < dim; ++i) {
            u[i] = rng.uniform(0.2, 6.0);
            theta[i] = -rng.uniform(0.2, 4.0);
        }
        const Vec g = dual_gradient(theta, u, alpha);
        for (int i = 0; i < dim; ++i) {
            auto slice = [&](double ti) {
                Vec th = theta;
                th[i] = ti;
                return psi_value(th, u, alpha);
            };
            const double h = 1e-6 * std::fabs(theta[i]);
            const double fd = testutil::fd_central(slice, theta[i], h);
            CHECK(testutil::close_rel(fd, g[i], 1e-6));
        }
    }
}

TEST_CASE("biconjugate identity: box minimum of psi recovers the fairness sum") {
    RngStream rng{99};
    for (double alpha : {0.0, 0.5, 1.0, 2.0, 5.0}) {
        const DualBox box = DualBox::from_bounds(0.1, 10.0, alpha, 2);
        for (int k = 0; k < 50; ++k) {
            Vec u = {rng.uniform(0.15, 9.0), rng.uniform(0.15, 9.0)};
            const Vec th = dual_minimizer(u, alpha, box);
            CHECK(psi_value(th, u, alpha) == doctest::Approx(fairness_sum(u, alpha)).epsilon(1e-9));
            // dense grid over the box never beats the closed-form minimizer
            double best = 1e300;
            const int n = 60;
            for (int a = 0; a <= n; ++a) {
                for (int b = 0; b <= n; ++b) {
                    Vec cand = {box.lower + (box.upper - box.lower) * a / n,
                                box.lower + (box.upper - box.lower) * b / n};
                    best = std::min(best, psi_value(cand, u, alpha));
                }
            }
            CHECK(best >= fairness_sum(u, alpha) - 1e-9);
        }
    }
}

TEST_CASE("psi exceeds the fairness sum away from the minimizer") {
    RngStream rng{31337};
    for (int k = 0; k < 200; ++k) {
        const double alpha = rng.uniform(0.2, 4.0);
        Vec u = {rng.uniform(0.2, 8.0), rng.uniform(0.2, 8.0), rng.uniform(0.2, 8.0)};
        Vec theta(3);
        for (auto& t : theta) t = -rng.uniform(0.05, 12.0);
        CHECK(psi_value(theta, u, alpha) >= fairness_sum(u, alpha) - 1e-10);
    }
}

TEST_CASE("params envelope validation") {
    FairnessParams p;
    p.validate();
    p.u_min = 0.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p.u_min = 2.0; p.u_max = 1.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p.u_min = p.u_max = 2.0; // a pinned envelope is legal and collapses the dual box
    p.validate();
    CHECK(p.theta_box(3).diameter() == 0.0);
    FairnessParams q;
    q.alpha = -0.5;
    CHECK_THROWS_AS(q.validate(), std::invalid_argument);
}
