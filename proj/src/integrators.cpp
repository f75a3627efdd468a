#include "arcplan/integrators.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <string>

#include "arcplan/errors.hpp"

namespace arcplan {

namespace {

ButcherTableau make_euler() { return {{0.0}, {{}}, {1.0}}; }

// Kutta's third-order method.
ButcherTableau make_rk3() {
    return {{0.0, 0.5, 1.0}, {{}, {0.5}, {-1.0, 2.0}}, {1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0}};
}

ButcherTableau make_rk4() {
    return {{0.0, 0.5, 0.5, 1.0},
            {{}, {0.5}, {0.0, 0.5}, {0.0, 0.0, 1.0}},
            {1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0}};
}

// Butcher's 7-stage sixth-order method with rational coefficients.
ButcherTableau make_rk6() {
    return {{0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0 / 3.0, 0.5, 0.5, 1.0},
            {{},
             {1.0 / 3.0},
             {0.0, 2.0 / 3.0},
             {1.0 / 12.0, 1.0 / 3.0, -1.0 / 12.0},
             {-1.0 / 16.0, 9.0 / 8.0, -3.0 / 16.0, -3.0 / 8.0},
             {0.0, 9.0 / 8.0, -3.0 / 8.0, -3.0 / 4.0, 0.5},
             {9.0 / 44.0, -9.0 / 11.0, 63.0 / 44.0, 18.0 / 11.0, 0.0, -16.0 / 11.0}},
            {11.0 / 120.0, 0.0, 27.0 / 40.0, 27.0 / 40.0, -4.0 / 15.0, -4.0 / 15.0, 11.0 / 120.0}};
}

// Dormand-Prince 5(4) coefficients.
namespace dp {
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                 a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                 a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                 a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
// 5th-order solution minus embedded 4th-order solution.
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                 e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
// Dense output.
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
}  // namespace dp

double error_norm(const State& err, const State& y0, const State& y1, double atol, double rtol) {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < err.size(); ++i) {
        const double sc = atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
        sum += (err[i] / sc) * (err[i] / sc);
    }
    return std::sqrt(sum / static_cast<double>(std::max<Eigen::Index>(err.size(), 1)));
}

State implicit_residual(Scheme scheme, const Rhs& f, const State& s, const State& fs,
                        const State& y, double h) {
    if (scheme == Scheme::euler_backward) {
        return y - s - h * f(y);
    }
    return y - s - 0.5 * h * (fs + f(y));
}

// Newton on the step equation; returns false on non-convergence and leaves
// the last residual norm in `residual`.
bool newton_solve(Scheme scheme, const Rhs& f, const State& s, double h,
                  const ImplicitOptions& options, State& y, double& residual) {
    const State fs = f(s);
    const double weight = scheme == Scheme::euler_backward ? h : 0.5 * h;
    const Eigen::Index n = s.size();
    y = s + h * fs;

    State g = implicit_residual(scheme, f, s, fs, y, h);
    residual = g.norm();
    for (int it = 0; it < options.max_iterations; ++it) {
        if (!std::isfinite(residual)) {
            return false;
        }
        if (residual <= options.tol) {
            return true;
        }
        const State fy = f(y);
        Eigen::MatrixXd jac = Eigen::MatrixXd::Identity(n, n);
        for (Eigen::Index j = 0; j < n; ++j) {
            const double eps = 1e-7 * std::max(1.0, std::abs(y[j]));
            State yp = y;
            yp[j] += eps;
            jac.col(j) -= weight * (f(yp) - fy) / eps;
        }
        const State dy = jac.partialPivLu().solve(-g);
        double lambda = 1.0;
        State trial = y + dy;
        State g_trial = implicit_residual(scheme, f, s, fs, trial, h);
        while (!(g_trial.norm() <= (1.0 - 1e-4 * lambda) * residual) && lambda > 1.0 / 1024.0) {
            lambda *= 0.5;
            trial = y + lambda * dy;
            g_trial = implicit_residual(scheme, f, s, fs, trial, h);
        }
        y = trial;
        g = g_trial;
        residual = g.norm();
    }
    return residual <= options.tol;
}

State implicit_with_bisection(Scheme scheme, const Rhs& f, const State& s, double h,
                              const ImplicitOptions& options, int depth) {
    State y;
    double residual = 0.0;
    if (newton_solve(scheme, f, s, h, options, y, residual)) {
        return y;
    }
    if (depth >= options.max_bisections) {
        throw SolverFailure(std::string(to_string(scheme)) + " Newton iteration did not converge",
                            residual);
    }
    const State mid = implicit_with_bisection(scheme, f, s, 0.5 * h, options, depth + 1);
    return implicit_with_bisection(scheme, f, mid, 0.5 * h, options, depth + 1);
}

std::size_t step_count(double h, double horizon) {
    const double ratio = horizon / h;
    const double rounded = std::round(ratio);
    if (std::abs(ratio - rounded) <= 1e-9 * std::max(1.0, ratio)) {
        return static_cast<std::size_t>(rounded);
    }
    return static_cast<std::size_t>(std::ceil(ratio));
}

}  // namespace

std::string_view to_string(Scheme scheme) {
    switch (scheme) {
        case Scheme::euler_forward: return "euler_forward";
        case Scheme::euler_backward: return "euler_backward";
        case Scheme::trapezoidal: return "trapezoidal";
        case Scheme::rk3: return "rk3";
        case Scheme::rk4: return "rk4";
        case Scheme::rk6: return "rk6";
        case Scheme::dormand_prince: return "dormand_prince";
        case Scheme::adams_bashforth_4: return "adams_bashforth_4";
    }
    return "unknown";
}

Scheme scheme_from_string(std::string_view name) {
    for (Scheme s : kAllSchemes) {
        if (to_string(s) == name) {
            return s;
        }
    }
    throw ParseError("unknown integration scheme '" + std::string(name) + "'");
}

bool is_one_step(Scheme scheme) {
    return scheme != Scheme::adams_bashforth_4 && scheme != Scheme::dormand_prince;
}

bool is_explicit_runge_kutta(Scheme scheme) {
    return scheme == Scheme::euler_forward || scheme == Scheme::rk3 || scheme == Scheme::rk4 ||
           scheme == Scheme::rk6;
}

bool is_implicit(Scheme scheme) {
    return scheme == Scheme::euler_backward || scheme == Scheme::trapezoidal;
}

int order_of(Scheme scheme) {
    switch (scheme) {
        case Scheme::euler_forward:
        case Scheme::euler_backward: return 1;
        case Scheme::trapezoidal: return 2;
        case Scheme::rk3: return 3;
        case Scheme::rk4:
        case Scheme::adams_bashforth_4: return 4;
        case Scheme::dormand_prince: return 5;
        case Scheme::rk6: return 6;
    }
    return 0;
}

std::vector<double> ButcherTableau::stability_polynomial() const {
    const std::size_t s = stages();
    std::vector<double> coeffs{1.0};
    std::vector<double> v(s, 1.0);
    for (std::size_t k = 1; k <= s; ++k) {
        double gamma = 0.0;
        for (std::size_t i = 0; i < s; ++i) {
            gamma += b[i] * v[i];
        }
        coeffs.push_back(gamma);
        std::vector<double> next(s, 0.0);
        for (std::size_t i = 0; i < s; ++i) {
            for (std::size_t j = 0; j < a[i].size(); ++j) {
                next[i] += a[i][j] * v[j];
            }
        }
        v = std::move(next);
    }
    return coeffs;
}

const ButcherTableau& tableau(Scheme scheme) {
    static const ButcherTableau ef = make_euler();
    static const ButcherTableau rk3 = make_rk3();
    static const ButcherTableau rk4 = make_rk4();
    static const ButcherTableau rk6 = make_rk6();
    switch (scheme) {
        case Scheme::euler_forward: return ef;
        case Scheme::rk3: return rk3;
        case Scheme::rk4: return rk4;
        case Scheme::rk6: return rk6;
        default: break;
    }
    throw ContractViolation(std::string(to_string(scheme)) + " has no explicit Butcher tableau");
}

State step_explicit(Scheme scheme, const Rhs& f, const State& s, double h) {
    if (!(h > 0.0)) {
        throw ContractViolation("step size must be positive");
    }
    const ButcherTableau& tab = tableau(scheme);
    const std::size_t n_stages = tab.stages();
    std::vector<State> k;
    k.reserve(n_stages);
    for (std::size_t i = 0; i < n_stages; ++i) {
        State stage = s;
        for (std::size_t j = 0; j < tab.a[i].size(); ++j) {
            if (tab.a[i][j] != 0.0) {
                stage.noalias() += (h * tab.a[i][j]) * k[j];
            }
        }
        k.push_back(f(stage));
    }
    State out = s;
    for (std::size_t i = 0; i < n_stages; ++i) {
        if (tab.b[i] != 0.0) {
            out.noalias() += (h * tab.b[i]) * k[i];
        }
    }
    return out;
}

State step_implicit(Scheme scheme, const Rhs& f, const State& s, double h,
                    const ImplicitOptions& options) {
    if (!is_implicit(scheme)) {
        throw ContractViolation(std::string(to_string(scheme)) + " is not an implicit scheme");
    }
    if (!(h > 0.0) || !(options.tol > 0.0)) {
        throw ContractViolation("implicit step needs h > 0 and tol > 0");
    }
    return implicit_with_bisection(scheme, f, s, h, options, 0);
}

State step_ab4(std::span<const State> history, const State& s, double h) {
    if (history.size() != 4) {
        throw ContractViolation("Adams-Bashforth 4 needs exactly four history entries, got " +
                                std::to_string(history.size()));
    }
    return s + (h / 24.0) *
                   (55.0 * history[3] - 59.0 * history[2] + 37.0 * history[1] - 9.0 * history[0]);
}

Trajectory integrate(Scheme scheme, const Rhs& f, const State& s0, double h, double horizon,
                     double divergence_bound) {
    if (!(h > 0.0) || !(horizon >= h)) {
        throw ContractViolation("integrate needs h > 0 and T >= h");
    }
    if (scheme == Scheme::dormand_prince) {
        AdaptiveOptions opts;
        opts.h_max = h;
        opts.h_init = h;
        opts.divergence_bound = divergence_bound;
        return integrate_adaptive(f, s0, horizon, opts);
    }

    const std::size_t n_steps = step_count(h, horizon);
    Trajectory traj;
    traj.times.reserve(n_steps + 1);
    traj.states.reserve(n_steps + 1);
    traj.times.push_back(0.0);
    traj.states.push_back(s0);
    traj.max_norm = s0.norm();

    std::vector<State> history;
    State s = s0;
    for (std::size_t k = 0; k < n_steps; ++k) {
        State next;
        if (scheme == Scheme::adams_bashforth_4) {
            if (history.empty()) {
                history.push_back(f(s));
            }
            if (history.size() < 4) {
                next = step_explicit(Scheme::rk4, f, s, h);
            } else {
                next = step_ab4(history, s, h);
            }
        } else if (is_implicit(scheme)) {
            next = step_implicit(scheme, f, s, h);
        } else {
            next = step_explicit(scheme, f, s, h);
        }

        const double norm = next.norm();
        traj.times.push_back(static_cast<double>(k + 1) * h);
        traj.states.push_back(next);
        ++traj.accepted_steps;
        if (!std::isfinite(norm) || norm > divergence_bound) {
            traj.max_norm = std::isfinite(norm) ? std::max(traj.max_norm, norm)
                                                : std::numeric_limits<double>::infinity();
            traj.diverged = true;
            return traj;
        }
        traj.max_norm = std::max(traj.max_norm, norm);
        s = std::move(next);

        if (scheme == Scheme::adams_bashforth_4) {
            history.push_back(f(s));
            if (history.size() > 4) {
                history.erase(history.begin());
            }
        }
    }
    return traj;
}

Trajectory integrate_adaptive(const Rhs& f, const State& s0, double horizon,
                              const AdaptiveOptions& options) {
    if (!(options.rel_tol > 0.0) || !(options.abs_tol > 0.0) || !(horizon > 0.0)) {
        throw ContractViolation("adaptive integration needs positive tolerances and horizon");
    }
    for (std::size_t i = 0; i + 1 < options.sample_times.size(); ++i) {
        if (options.sample_times[i] > options.sample_times[i + 1]) {
            throw ContractViolation("sample times must be ascending");
        }
    }
    const double atol = options.abs_tol;
    const double rtol = options.rel_tol;
    const double h_min = 1e-12 * horizon;
    const double h_max = std::min(options.h_max, horizon);

    Trajectory traj;
    const bool dense = !options.sample_times.empty();
    std::size_t next_sample = 0;
    auto record = [&traj](double t, const State& y) {
        traj.times.push_back(t);
        traj.states.push_back(y);
        traj.max_norm = std::max(traj.max_norm, y.norm());
    };
    if (dense) {
        while (next_sample < options.sample_times.size() && options.sample_times[next_sample] <= 0.0) {
            record(options.sample_times[next_sample++], s0);
        }
    } else {
        record(0.0, s0);
    }
    traj.max_norm = std::max(traj.max_norm, s0.norm());

    State y = s0;
    State k1 = f(y);

    double h = options.h_init;
    if (!(h > 0.0)) {
        // Initial step guess from first and second derivative magnitudes.
        const State sc = (atol + rtol * y.array().abs()).matrix();
        const double d0 = (y.array() / sc.array()).matrix().norm();
        const double d1 = (k1.array() / sc.array()).matrix().norm();
        if (d1 == 0.0) {
            h = h_max;
        } else {
            const double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
            const State y1 = y + h0 * k1;
            const double d2 = ((f(y1) - k1).array() / sc.array()).matrix().norm() / h0;
            const double dmax = std::max(d1, d2);
            const double h1 =
                dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dmax, 1.0 / 5.0);
            h = std::min(100.0 * h0, h1);
        }
    }
    h = std::min(h, h_max);

    constexpr double safe = 0.9;
    constexpr double beta = 0.04;
    constexpr double expo1 = 0.2 - beta * 0.75;
    constexpr double fac_min_inv = 1.0 / 10.0;  // largest growth 10x
    constexpr double fac_max_inv = 1.0 / 0.2;   // largest shrink 5x
    double facold = 1e-4;
    double t = 0.0;
    bool last_rejected = false;

    while (t < horizon) {
        // Stretch the step rather than leave a sliver before the horizon.
        bool reaches_end = false;
        if (t + h > horizon - h_min) {
            h = horizon - t;
            reaches_end = true;
        }
        if (h < h_min) {
            throw StiffnessError("Dormand-Prince step size underflow at t = " + std::to_string(t));
        }

        using namespace dp;
        const State k2 = f(y + h * a21 * k1);
        const State k3 = f(y + h * (a31 * k1 + a32 * k2));
        const State k4 = f(y + h * (a41 * k1 + a42 * k2 + a43 * k3));
        const State k5 = f(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        const State k6 = f(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        const State y_new = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
        const State k7 = f(y_new);
        const State err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

        double en = error_norm(err, y, y_new, atol, rtol);
        if (!std::isfinite(en)) {
            en = 1e10;
        }
        const double fac11 = std::pow(std::max(en, 1e-300), expo1);

        if (en <= 1.0) {
            const double t_new = reaches_end ? horizon : t + h;
            if (dense) {
                const State r1 = y;
                const State r2 = y_new - y;
                const State r3 = h * k1 - r2;
                const State r4 = r2 - h * k7 - r3;
                const State r5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
                while (next_sample < options.sample_times.size() &&
                       options.sample_times[next_sample] <= t_new + 1e-12 * horizon) {
                    const double ts = options.sample_times[next_sample++];
                    const double th = std::clamp((ts - t) / h, 0.0, 1.0);
                    const double th1 = 1.0 - th;
                    record(ts, r1 + th * (r2 + th1 * (r3 + th * (r4 + th1 * r5))));
                }
            } else {
                record(t_new, y_new);
            }
            ++traj.accepted_steps;
            t = t_new;
            y = y_new;
            k1 = k7;

            const double ny = y.norm();
            traj.max_norm = std::max(traj.max_norm, ny);
            if (!std::isfinite(ny) || ny > options.divergence_bound) {
                traj.diverged = true;
                return traj;
            }

            double fac = fac11 / std::pow(facold, beta);
            fac = std::clamp(fac / safe, fac_min_inv, fac_max_inv);
            double h_new = h / fac;
            facold = std::max(en, 1e-4);
            if (last_rejected) {
                h_new = std::min(h_new, h);
            }
            last_rejected = false;
            h = std::min(h_new, h_max);
        } else {
            ++traj.rejected_steps;
            last_rejected = true;
            h = h / std::min(fac_max_inv, fac11 / safe);
        }
    }
    return traj;
}

}  // namespace arcplan
