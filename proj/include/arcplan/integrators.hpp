#pragma once

#include <Eigen/Core>
#include <array>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

namespace arcplan {

using State = Eigen::VectorXd;
// Autonomous right-hand side x' = f(x). Time-dependent problems augment the
// state with t.
using Rhs = std::function<State(const State&)>;

enum class Scheme {
    euler_forward,
    euler_backward,
    trapezoidal,
    rk3,
    rk4,
    rk6,
    dormand_prince,
    adams_bashforth_4,
};

inline constexpr std::array<Scheme, 8> kAllSchemes = {
    Scheme::euler_forward, Scheme::euler_backward, Scheme::trapezoidal,
    Scheme::rk3,           Scheme::rk4,            Scheme::rk6,
    Scheme::dormand_prince, Scheme::adams_bashforth_4,
};

std::string_view to_string(Scheme scheme);
// Throws ParseError for unknown names.
Scheme scheme_from_string(std::string_view name);

// Fixed-step one-step schemes (everything but AB4 and Dormand-Prince).
bool is_one_step(Scheme scheme);
bool is_explicit_runge_kutta(Scheme scheme);
bool is_implicit(Scheme scheme);
// Classical order of accuracy; Dormand-Prince reports its propagated order 5.
int order_of(Scheme scheme);

// Explicit Runge-Kutta tableau, strictly lower-triangular a.
struct ButcherTableau {
    std::vector<double> c;
    std::vector<std::vector<double>> a;
    std::vector<double> b;

    std::size_t stages() const { return b.size(); }
    // Coefficient k of the stability polynomial R(z) = sum_k gamma_k z^k,
    // gamma_0 = 1 and gamma_k = b^T A^(k-1) 1.
    std::vector<double> stability_polynomial() const;
};

// Throws ContractViolation for schemes without an explicit tableau.
const ButcherTableau& tableau(Scheme scheme);

// One step of euler_forward, rk3, rk4 or rk6. A non-finite component in the
// result is returned as-is; integrate() turns it into the diverged flag.
State step_explicit(Scheme scheme, const Rhs& f, const State& s, double h);

struct ImplicitOptions {
    double tol = 1e-10;
    int max_iterations = 50;
    // Each level splits the failing step into two halves.
    int max_bisections = 6;
};

// Backward Euler or trapezoidal step via damped Newton with a forward
// difference Jacobian. Throws SolverFailure with the last residual.
State step_implicit(Scheme scheme, const Rhs& f, const State& s, double h,
                    const ImplicitOptions& options = {});

// Adams-Bashforth 4. history holds f at the four most recent grid points,
// oldest first, the last one being f(s).
State step_ab4(std::span<const State> history, const State& s, double h);

struct Trajectory {
    std::vector<double> times;
    std::vector<State> states;
    bool diverged = false;
    double max_norm = 0.0;
    std::size_t accepted_steps = 0;
    std::size_t rejected_steps = 0;
};

inline constexpr double kIntegrateDivergenceBound = 1e9;

// Uniform march of ceil(T/h) steps of size h, so the last sample sits at or
// just past T. Stops early with diverged set once the state norm exceeds the
// bound or turns non-finite. dormand_prince is run adaptively with h as the
// maximum step.
Trajectory integrate(Scheme scheme, const Rhs& f, const State& s0, double h, double horizon,
                     double divergence_bound = kIntegrateDivergenceBound);

struct AdaptiveOptions {
    double rel_tol = 1e-8;
    double abs_tol = 1e-8;
    double h_max = std::numeric_limits<double>::infinity();
    // <= 0 selects the starting step automatically.
    double h_init = 0.0;
    // Output times in [0, T], ascending. Empty means every accepted step.
    std::vector<double> sample_times;
    double divergence_bound = kIntegrateDivergenceBound;
};

// Dormand-Prince 5(4) with PI step control and 4th-order dense output.
// Throws StiffnessError when the step falls below 1e-12 * T.
Trajectory integrate_adaptive(const Rhs& f, const State& s0, double horizon,
                              const AdaptiveOptions& options = {});

}  // namespace arcplan
