#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "arcplan/dynamics.hpp"
#include "arcplan/errors.hpp"
#include "arcplan/integrators.hpp"
#include "arcplan/stability.hpp"
#include "doctest.h"

using namespace arcplan;
using doctest::Approx;

namespace {

Rhs scalar_linear(double lambda) {
    return [lambda](const State& x) -> State { return lambda * x; };
}

State scalar(double v) { return State::Constant(1, v); }

Rhs zero_rhs(Eigen::Index n) {
    return [n](const State&) -> State { return State::Zero(n); };
}

// Least-squares slope of log(err) against log(h).
double fitted_slope(const std::vector<double>& h, const std::vector<double>& err) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) {
        const double x = std::log(h[i]);
        const double y = std::log(err[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

double order_slope(Scheme scheme, const std::vector<int>& steps, double ref_tol) {
    const VehicleParams p;
    const Rhs f = reduced_rhs(0.1, p);
    const State s0 = ReducedState{}.to_vector();
    AdaptiveOptions opt;
    opt.rel_tol = ref_tol;
    opt.abs_tol = ref_tol;
    opt.sample_times = {2.0};
    const State ref = integrate_adaptive(f, s0, 2.0, opt).states.back();
    std::vector<double> hs, errs;
    for (int n : steps) {
        const double h = 2.0 / n;
        const Trajectory t = integrate(scheme, f, s0, h, 2.0);
        REQUIRE_FALSE(t.diverged);
        REQUIRE(t.times.back() == Approx(2.0).epsilon(1e-12));
        hs.push_back(h);
        errs.push_back((t.states.back() - ref).norm());
    }
    return fitted_slope(hs, errs);
}

}  // namespace

TEST_CASE("scheme names round trip") {
    for (Scheme s : kAllSchemes) {
        CHECK(scheme_from_string(to_string(s)) == s);
    }
    CHECK_THROWS_AS(scheme_from_string("rk5"), ParseError);
}

TEST_CASE("zero derivative leaves the state unchanged") {
    const State s = (State(3) << 1.5, -2.0, 7.25).finished();
    for (Scheme sc : {Scheme::euler_forward, Scheme::rk3, Scheme::rk4, Scheme::rk6}) {
        CHECK(step_explicit(sc, zero_rhs(3), s, 0.3) == s);
    }
    for (Scheme sc : {Scheme::euler_backward, Scheme::trapezoidal}) {
        CHECK(step_implicit(sc, zero_rhs(3), s, 0.3) == s);
    }
    const std::vector<State> hist(4, State::Zero(3));
    CHECK(step_ab4(hist, s, 0.3) == s);
    for (Scheme sc : kAllSchemes) {
        const Trajectory t = integrate(sc, zero_rhs(3), s, 0.25, 1.0);
        CHECK_FALSE(t.diverged);
        CHECK(t.states.back() == s);
    }
}

TEST_CASE("rk4 on x' = -x") {
    const double z = -0.1;
    const double expected = 1 + z + z * z / 2 + z * z * z / 6 + z * z * z * z / 24;
    const State out = step_explicit(Scheme::rk4, scalar_linear(-1.0), scalar(1.0), 0.1);
    CHECK(out(0) == Approx(expected).epsilon(1e-15));
    // One-step local error of order h^5 against exp(-0.1).
    CHECK(std::abs(out(0) - std::exp(-0.1)) < 1e-7);
}

TEST_CASE("one explicit step equals R(h lambda)") {
    for (Scheme sc : {Scheme::euler_forward, Scheme::rk3, Scheme::rk4, Scheme::rk6}) {
        for (double z : {-0.5, -0.1, 0.3}) {
            const State out = step_explicit(sc, scalar_linear(z), scalar(1.0), 1.0);
            CHECK(out(0) == Approx(amplification_factor(sc, z).real()).epsilon(1e-14));
        }
    }
}

TEST_CASE("straight line is exact for every scheme") {
    const VehicleParams p;
    const Rhs f = reduced_rhs(0.0, p);
    const State s0 = ReducedState{}.to_vector();
    for (Scheme sc : {Scheme::euler_forward, Scheme::rk3, Scheme::rk4, Scheme::rk6}) {
        const State out = step_explicit(sc, f, s0, 0.1);
        CHECK(out(0) == Approx(1.5).epsilon(1e-15));
        CHECK(out.tail(4).isZero(0.0));
    }
    for (Scheme sc : {Scheme::euler_backward, Scheme::trapezoidal}) {
        const State out = step_implicit(sc, f, s0, 0.1);
        CHECK(out(0) == Approx(1.5).epsilon(1e-12));
        CHECK(out.tail(4).norm() < 1e-12);
    }
    const Trajectory t = integrate(Scheme::rk4, f, s0, 0.1, 10.0);
    CHECK(t.times.size() == 101);
    CHECK(t.states.back()(0) == Approx(150.0).epsilon(1e-13));
    CHECK(t.states.back()(1) == 0.0);
}

TEST_CASE("implicit steps on x' = -x") {
    const State be = step_implicit(Scheme::euler_backward, scalar_linear(-1.0), scalar(1.0), 1.0);
    CHECK(be(0) == Approx(0.5).epsilon(1e-10));
    const State tr = step_implicit(Scheme::trapezoidal, scalar_linear(-1.0), scalar(1.0), 2.0);
    CHECK(std::abs(tr(0)) < 1e-10);
}

TEST_CASE("implicit step residual meets the tolerance on the reduced model") {
    const VehicleParams p;
    const Rhs f = reduced_rhs(std::numbers::pi / 4, p);
    const State s = ReducedState{1, 2, 0.3, 0.5, -0.2}.to_vector();
    for (double h : {0.01, 0.1, 0.5}) {
        const State be = step_implicit(Scheme::euler_backward, f, s, h);
        CHECK((be - s - h * f(be)).norm() <= 1e-9);
        const State tr = step_implicit(Scheme::trapezoidal, f, s, h);
        CHECK((tr - s - 0.5 * h * (f(s) + f(tr))).norm() <= 1e-9);
    }
}

TEST_CASE("implicit solver failure carries a residual") {
    // x' = x^2 from x = 1 with h = 1: backward Euler x+ = 1 + x+^2 has no
    // real root.
    const Rhs f = [](const State& x) -> State { return x.cwiseProduct(x); };
    ImplicitOptions opt;
    opt.max_bisections = 0;
    try {
        (void)step_implicit(Scheme::euler_backward, f, scalar(1.0), 1.0, opt);
        FAIL("expected SolverFailure");
    } catch (const SolverFailure& e) {
        CHECK(e.residual() > 0.0);
    }
}

TEST_CASE("adams-bashforth 4") {
    SUBCASE("exact history of x' = -x") {
        const double h = 0.1;
        auto local_error = [](double step) {
            std::vector<State> hist;
            for (int k = -3; k <= 0; ++k) hist.push_back(scalar(-std::exp(-k * step)));
            return std::abs(step_ab4(hist, scalar(1.0), step)(0) - std::exp(-step));
        };
        // Leading term 251/720 h^5 |x^(5)|.
        const double e1 = local_error(h);
        CHECK(e1 < 1.2 * 251.0 / 720.0 * std::pow(h, 5));
        CHECK(e1 > 0.8 * 251.0 / 720.0 * std::pow(h, 5));
        const double ratio = e1 / local_error(h / 2);
        CHECK(ratio == Approx(32.0).epsilon(0.1));
    }
    SUBCASE("cubic quadrature is exact") {
        // y' = t^3 with t carried as a state component: y(t) = t^4 / 4.
        const double h = 0.25;
        std::vector<State> hist;
        for (int k = 0; k < 4; ++k) {
            const double t = k * h;
            hist.push_back((State(2) << 1.0, t * t * t).finished());
        }
        const double t3 = 3 * h;
        const State s = (State(2) << t3, std::pow(t3, 4) / 4).finished();
        const State out = step_ab4(hist, s, h);
        CHECK(out(1) == Approx(std::pow(4 * h, 4) / 4).epsilon(1e-14));
    }
    SUBCASE("history length is checked") {
        const std::vector<State> hist(3, scalar(0.0));
        CHECK_THROWS_AS(step_ab4(hist, scalar(1.0), 0.1), ContractViolation);
    }
}

TEST_CASE("adaptive reference") {
    SUBCASE("steps never leave a sliver before the horizon") {
        AdaptiveOptions opt;
        opt.h_max = 1e-3;
        opt.h_init = 1e-3;
        const Trajectory t = integrate_adaptive(scalar_linear(-1.0), scalar(1.0), 2.0, opt);
        CHECK(t.times.back() == 2.0);
    }
    SUBCASE("zero derivative takes one step") {
        const State s = (State(2) << 3.0, 4.0).finished();
        const Trajectory t = integrate_adaptive(zero_rhs(2), s, 5.0);
        CHECK(t.accepted_steps == 1);
        CHECK(t.states.back() == s);
    }
    SUBCASE("x' = -x to 1e-10") {
        AdaptiveOptions opt;
        opt.rel_tol = 1e-10;
        opt.abs_tol = 1e-10;
        const Trajectory t = integrate_adaptive(scalar_linear(-1.0), scalar(1.0), 1.0, opt);
        CHECK(t.times.back() == Approx(1.0).epsilon(1e-14));
        CHECK(std::abs(t.states.back()(0) - std::exp(-1.0)) < 1e-9);
    }
    SUBCASE("dense output at requested times") {
        AdaptiveOptions opt;
        opt.rel_tol = 1e-10;
        opt.abs_tol = 1e-10;
        opt.sample_times = {0.0, 0.123, 0.5, 0.77, 1.0};
        const Trajectory t = integrate_adaptive(scalar_linear(-1.0), scalar(1.0), 1.0, opt);
        REQUIRE(t.times.size() == opt.sample_times.size());
        for (std::size_t i = 0; i < t.times.size(); ++i) {
            CHECK(t.times[i] == opt.sample_times[i]);
            CHECK(std::abs(t.states[i](0) - std::exp(-t.times[i])) < 1e-9);
        }
    }
    SUBCASE("finite-time blow-up is a stiffness error") {
        const Rhs f = [](const State& x) -> State { return x.cwiseProduct(x); };
        AdaptiveOptions opt;
        opt.divergence_bound = std::numeric_limits<double>::infinity();
        CHECK_THROWS_AS(integrate_adaptive(f, scalar(1.0), 2.0, opt), StiffnessError);
    }
}

TEST_CASE("times are increasing and start at zero") {
    const VehicleParams p;
    const Rhs f = reduced_rhs(0.2, p);
    for (Scheme sc : kAllSchemes) {
        const Trajectory t = integrate(sc, f, ReducedState{}.to_vector(), 0.07, 1.0);
        REQUIRE(t.times.size() == t.states.size());
        CHECK(t.times.front() == 0.0);
        for (std::size_t i = 1; i < t.times.size(); ++i) CHECK(t.times[i] > t.times[i - 1]);
        CHECK(t.times.back() >= 1.0 - 1e-12);
    }
}

TEST_CASE("rk4 tracks the adaptive reference at steer pi/4") {
    const VehicleParams p;
    const Rhs f = reduced_rhs(std::numbers::pi / 4, p);
    const State s0 = ReducedState{}.to_vector();
    const Trajectory fine = integrate(Scheme::rk4, f, s0, 0.01, 5.0);
    AdaptiveOptions opt;
    opt.rel_tol = 1e-10;
    opt.abs_tol = 1e-10;
    opt.sample_times = fine.times;
    opt.sample_times.back() = 5.0;
    const Trajectory ref = integrate_adaptive(f, s0, 5.0, opt);
    REQUIRE(ref.states.size() == fine.states.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < ref.states.size(); ++i) {
        worst = std::max(worst, (ref.states[i] - fine.states[i]).cwiseAbs().maxCoeff());
    }
    CHECK(worst < 1e-3);
}

TEST_CASE("euler forward diverges above its bound") {
    const VehicleParams p;
    const Rhs f = reduced_rhs(std::numbers::pi / 4, p);
    const Trajectory t = integrate(Scheme::euler_forward, f, ReducedState{}.to_vector(), 0.5, 100.0);
    CHECK(t.diverged);
}

TEST_CASE("stability polynomial coefficients match 1/k! up to the order") {
    for (Scheme sc : {Scheme::euler_forward, Scheme::rk3, Scheme::rk4, Scheme::rk6}) {
        const std::vector<double> g = tableau(sc).stability_polynomial();
        double fact = 1.0;
        for (int k = 0; k <= order_of(sc); ++k) {
            if (k > 0) fact *= k;
            CHECK(g[static_cast<std::size_t>(k)] == Approx(1.0 / fact).epsilon(1e-14));
        }
    }
}

TEST_CASE("tableaus are consistent") {
    for (Scheme sc : {Scheme::euler_forward, Scheme::rk3, Scheme::rk4, Scheme::rk6}) {
        const ButcherTableau& t = tableau(sc);
        double bsum = 0.0;
        for (double b : t.b) bsum += b;
        CHECK(bsum == Approx(1.0).epsilon(1e-15));
        for (std::size_t i = 0; i < t.stages(); ++i) {
            double row = 0.0;
            for (std::size_t j = 0; j < i; ++j) row += t.a[i][j];
            CHECK(row == Approx(t.c[i]).epsilon(1e-15));
        }
    }
    CHECK(tableau(Scheme::rk6).stages() == 7);
    CHECK_THROWS_AS(tableau(Scheme::trapezoidal), ContractViolation);
}

TEST_CASE("convergence order on the reduced model") {
    // Windows sit where each scheme is stable and its error is well above the
    // reference error.
    CHECK(order_slope(Scheme::euler_forward, {40, 80, 160, 320}, 1e-10) == Approx(1.0).epsilon(0.3));
    CHECK(order_slope(Scheme::euler_backward, {40, 80, 160, 320}, 1e-10) == Approx(1.0).epsilon(0.3));
    CHECK(order_slope(Scheme::trapezoidal, {40, 80, 160, 320}, 1e-10) == Approx(2.0).epsilon(0.15));
    CHECK(order_slope(Scheme::rk3, {128, 192, 256, 384, 512, 768}, 1e-10) ==
          Approx(3.0).epsilon(0.1));
    CHECK(order_slope(Scheme::rk4, {48, 64, 96, 128, 192, 256}, 1e-10) ==
          Approx(4.0).epsilon(0.075));
    CHECK(order_slope(Scheme::adams_bashforth_4, {256, 384, 512, 768, 1024}, 1e-10) ==
          Approx(4.0).epsilon(0.075));
    // Sixth order only emerges once |h lambda| is small, below errors of
    // 1e-11, so this one needs a tighter reference.
    CHECK(order_slope(Scheme::rk6, {128, 192, 256}, 1e-14) == Approx(6.0).epsilon(0.05));
}

TEST_CASE("stability function matches exp(z) to the scheme's order") {
    for (Scheme sc : {Scheme::euler_forward, Scheme::euler_backward, Scheme::trapezoidal,
                      Scheme::rk3, Scheme::rk4, Scheme::rk6}) {
        const int p = order_of(sc);
        std::vector<double> ratios;
        for (double mag : {1e-1, 1e-2, 1e-3}) {
            for (std::complex<double> dir : {std::complex<double>(-1, 0), std::complex<double>(0, 1),
                                             std::complex<double>(-0.6, 0.8)}) {
                const std::complex<double> z = mag * dir;
                const double diff = std::abs(amplification_factor(sc, z) - std::exp(z));
                // Round-off swamps the difference for the high orders at tiny z.
                if (diff < 1e-14) continue;
                ratios.push_back(diff / std::pow(mag, p + 1));
            }
        }
        REQUIRE_FALSE(ratios.empty());
        for (double r : ratios) CHECK(r < 1.0);
    }
}
