#include "arcplan/connector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <string>

#include "arcplan/errors.hpp"
#include "arcplan/stability.hpp"

namespace arcplan {

void ConnectorConfig::validate() const {
    auto require = [](bool ok, const char* what) {
        if (!ok) throw ContractViolation(std::string("invalid connector config: ") + what);
    };
    require(intervals >= 2, "intervals must be >= 2");
    require(bounds.v_max > 0.0, "v_max must be > 0");
    require(bounds.delta_max > 0.0 && bounds.delta_max < std::numbers::pi / 2.0,
            "delta bound must lie in (0, pi/2)");
    require(bounds.x_min < bounds.x_max && bounds.y_min < bounds.y_max, "empty position box");
    require(tol.position > 0.0 && tol.theta > 0.0 && tol.speed > 0.0,
            "terminal tolerances must be > 0");
    require(max_solver_iters >= 1, "max_solver_iters must be >= 1");
    require(n_starts >= 1, "n_starts must be >= 1");
    require(t_min > 0.0 && t_max > t_min, "need 0 < t_min < t_max");
}

namespace {

bool rollout_into(const ShootingVariables& vars, const PointMassState& s0,
                  const VehicleParams& params, std::vector<PointMassState>& out) {
    const std::size_t n = vars.controls.size();
    const double dt = vars.t_f / static_cast<double>(n);
    out.resize(n + 1);
    out[0] = s0;
    for (std::size_t k = 0; k < n; ++k) {
        const PointMassState d = point_mass_derivative(out[k], vars.controls[k], params);
        out[k + 1] = {out[k].x + d.x * dt, out[k].y + d.y * dt, out[k].theta + d.theta * dt,
                      out[k].v + d.v * dt};
        if (!std::isfinite(out[k + 1].x) || !std::isfinite(out[k + 1].y) ||
            !std::isfinite(out[k + 1].theta) || !std::isfinite(out[k + 1].v)) {
            return false;
        }
    }
    return true;
}

void fill_violations(std::span<const PointMassState> traj, const ConnectionProblem& problem,
                     std::vector<double>& viol) {
    viol.assign(kViolationCount, 0.0);
    const PointMassState& end = traj.back();
    viol[kTerminalX] = std::abs(end.x - problem.target.x);
    viol[kTerminalY] = std::abs(end.y - problem.target.y);
    viol[kTerminalTheta] = std::abs(wrap_angle(end.theta - problem.target.theta));
    viol[kTerminalV] = std::abs(end.v - problem.target.v);
    const ConnectorBounds& b = problem.bounds;
    for (const auto& s : traj) {
        viol[kBoundXLow] = std::max(viol[kBoundXLow], b.x_min - s.x);
        viol[kBoundXHigh] = std::max(viol[kBoundXHigh], s.x - b.x_max);
        viol[kBoundYLow] = std::max(viol[kBoundYLow], b.y_min - s.y);
        viol[kBoundYHigh] = std::max(viol[kBoundYHigh], s.y - b.y_max);
        viol[kBoundVLow] = std::max(viol[kBoundVLow], -s.v);
        viol[kBoundVHigh] = std::max(viol[kBoundVHigh], s.v - b.v_max);
    }
}

bool within_box(const PointMassState& s, const ConnectorBounds& b) {
    return s.x >= b.x_min && s.x <= b.x_max && s.y >= b.y_min && s.y <= b.y_max && s.v >= 0.0 &&
           s.v <= b.v_max;
}

// Search space: z[0] = t_f / t_scale, then (delta / delta_max, F / F_max)
// for each interval, all clamped to their boxes.
class ShootingSearch {
public:
    static constexpr double kComfort = 0.5;
    static constexpr double kTimeResolution = 1e-3;

    ShootingSearch(const ConnectionProblem& problem, const ConnectorConfig& cfg,
                   const VehicleParams& params, double force_max)
        : problem_(problem), cfg_(cfg), params_(params), force_max_(force_max),
          n_(static_cast<std::size_t>(cfg.intervals)) {
        const double dist = std::hypot(problem.target.x - problem.initial.x,
                                       problem.target.y - problem.initial.y);
        const double v_mean = std::max(0.5 * (problem.initial.v + problem.target.v), 1.0);
        t_guess_ = std::clamp(dist / v_mean, cfg.t_min, cfg.t_max);
        t_scale_ = std::max(t_guess_, 0.1);
        build_directions();
    }

    std::size_t dim() const { return 1 + 2 * n_; }

    std::vector<double> heuristic_start(bool steer) const {
        std::vector<double> z(dim(), 0.0);
        z[0] = t_guess_ / t_scale_;
        const double wheelbase = params_.wheelbase();
        const double v_mean = std::max(0.5 * (problem_.initial.v + problem_.target.v), 1.0);
        const double turn = wrap_angle(problem_.target.theta - problem_.initial.theta);
        const double delta = steer ? std::atan(wheelbase * turn / (v_mean * t_guess_)) : 0.0;
        const double force =
            params_.m * (problem_.target.v - problem_.initial.v) / t_guess_;
        for (std::size_t k = 0; k < n_; ++k) {
            z[1 + 2 * k] = delta / cfg_.bounds.delta_max;
            z[2 + 2 * k] = force / force_max_;
        }
        clamp(z);
        return z;
    }

    // Best points of a coarse sweep over piecewise-constant profiles: three
    // steering segments, two force segments and a log-spaced set of t_f.
    std::vector<std::vector<double>> coarse_seeds(std::size_t count) {
        static constexpr double kSteer[] = {-1.0, -2.0 / 3.0, -1.0 / 3.0, 0.0,
                                            1.0 / 3.0, 2.0 / 3.0, 1.0};
        static constexpr double kForce[] = {-0.2, -0.05, 0.0, 0.05, 0.2};
        constexpr int kTimes = 10;
        const double t_lo = std::max(cfg_.t_min, 0.25 * t_guess_);
        const double t_hi = std::min(cfg_.t_max, 8.0 * t_guess_ + 2.0);
        const std::vector<double> times = log_spaced(t_lo, std::max(t_hi, t_lo), kTimes);

        std::vector<std::pair<double, std::vector<double>>> ranked;
        std::vector<double> z(dim(), 0.0);
        for (double t : times) {
            z[0] = t / t_scale_;
            for (double s0 : kSteer) for (double s1 : kSteer) for (double s2 : kSteer) {
                for (double f0 : kForce) for (double f1 : kForce) {
                    for (std::size_t k = 0; k < n_; ++k) {
                        const std::size_t third = 3 * k / n_;
                        z[1 + 2 * k] = third == 0 ? s0 : (third == 1 ? s1 : s2);
                        z[2 + 2 * k] = 2 * k < n_ ? f0 : f1;
                    }
                    const Point p = measure(z);
                    if (!std::isfinite(p.measure)) continue;
                    if (ranked.size() < count) {
                        ranked.emplace_back(p.measure, z);
                    } else if (p.measure < ranked.back().first) {
                        ranked.back() = {p.measure, z};
                    } else {
                        continue;
                    }
                    std::stable_sort(ranked.begin(), ranked.end(),
                                     [](const auto& a, const auto& b) { return a.first < b.first; });
                }
            }
        }
        std::vector<std::vector<double>> out;
        for (auto& r : ranked) out.push_back(std::move(r.second));
        return out;
    }

    void clamp(std::vector<double>& z) const {
        z[0] = std::clamp(z[0], cfg_.t_min / t_scale_, cfg_.t_max / t_scale_);
        for (std::size_t i = 1; i < z.size(); ++i) {
            z[i] = std::clamp(z[i], -1.0, 1.0);
        }
    }

    ShootingVariables decode(const std::vector<double>& z) const {
        ShootingVariables vars;
        vars.t_f = z[0] * t_scale_;
        vars.controls.resize(n_);
        for (std::size_t k = 0; k < n_; ++k) {
            vars.controls[k].delta = z[1 + 2 * k] * cfg_.bounds.delta_max;
            vars.controls[k].force = z[2 + 2 * k] * force_max_;
        }
        return vars;
    }

    struct Point {
        std::vector<double> z;
        double t_f = 0.0;
        double measure = std::numeric_limits<double>::infinity();
        bool feasible = false;
        bool comfortable = false;
    };

    // Squared terminal residuals in tolerance units plus an L1 charge on
    // bound excursions.
    Point measure(const std::vector<double>& z) {
        ++evaluations_;
        Point p;
        p.z = z;
        const ShootingVariables vars = decode(z);
        p.t_f = vars.t_f;
        if (!rollout_into(vars, problem_.initial, params_, traj_)) {
            return p;
        }
        fill_violations(traj_, problem_, viol_);
        const TerminalTolerance& tol = cfg_.tol;
        const double rx = viol_[kTerminalX] / tol.position;
        const double ry = viol_[kTerminalY] / tol.position;
        const double rt = viol_[kTerminalTheta] / tol.theta;
        const double rv = viol_[kTerminalV] / tol.speed;
        const double excursion = (viol_[kBoundXLow] + viol_[kBoundXHigh] + viol_[kBoundYLow] +
                                  viol_[kBoundYHigh]) / tol.position +
                                 (viol_[kBoundVLow] + viol_[kBoundVHigh]) / tol.speed;
        p.measure = rx * rx + ry * ry + rt * rt + rv * rv + 10.0 * excursion;
        const double worst = std::max({rx, ry, rt, rv});
        p.feasible = worst <= 1.0 && excursion <= 0.0;
        p.comfortable = worst <= kComfort && excursion <= 0.0;
        return p;
    }

    // Pattern search over the controls with t_f held fixed, stopping as soon
    // as the terminal residuals sit well inside tolerance.
    Point feasibility_search(std::vector<double> z, double t_f, PlannerRng& rng) {
        z[0] = t_f / t_scale_;
        clamp(z);
        Point current = measure(z);
        double step = 0.25;
        std::vector<std::size_t> order(directions_.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        auto try_move = [&](auto&& apply) {
            std::vector<double> trial = current.z;
            apply(trial);
            clamp(trial);
            trial[0] = current.z[0];
            if (trial == current.z) {
                return false;
            }
            Point p = measure(trial);
            if (p.measure < current.measure) {
                current = std::move(p);
                return true;
            }
            return false;
        };
        while (!current.comfortable && step >= 1e-6 && evaluations_ < budget()) {
            shuffle(order, rng);
            bool improved = false;
            for (std::size_t idx : order) {
                if (evaluations_ >= budget()) break;
                improved = try_move([&](std::vector<double>& t) {
                    for (const auto& [i, w] : directions_[idx]) t[i] += step * w;
                });
                if (improved) break;
            }
            if (!improved) {
                // Rotated basis I - 2 v v^T over the controls with a random
                // unit v; columns and negatives form a fresh positive spanning set.
                const std::size_t n = dim() - 1;
                std::vector<double> v(n);
                double norm2 = 0.0;
                for (auto& x : v) {
                    x = rng.uniform() - 0.5;
                    norm2 += x * x;
                }
                const double inv = 1.0 / std::sqrt(norm2);
                for (auto& x : v) x *= inv;
                for (std::size_t col = 0; col < 2 * n && !improved; ++col) {
                    if (evaluations_ >= budget()) break;
                    const std::size_t c = col % n;
                    const double sign = col < n ? 1.0 : -1.0;
                    improved = try_move([&](std::vector<double>& t) {
                        for (std::size_t i = 0; i < n; ++i) {
                            const double hij = (i == c ? 1.0 : 0.0) - 2.0 * v[i] * v[c];
                            t[1 + i] += sign * step * hij;
                        }
                    });
                }
            }
            step = improved ? std::min(2.0 * step, 1.0) : 0.5 * step;
        }
        return current;
    }

    // Minimum t_f by bracketing: grow t_f until the controls can be made
    // feasible, then bisect towards the distance / v_max lower bound. The
    // incumbent is only ever replaced by a feasible point with smaller t_f.
    void run(std::vector<double> z, PlannerRng& rng) {
        auto accept = [&](const Point& p) {
            if (p.feasible && (!best_feasible_ || p.t_f < best_feasible_->t_f)) {
                best_feasible_ = p;
                trace_.push_back(p.t_f);
            }
        };
        double t_hi = z[0] * t_scale_;
        Point p = feasibility_search(z, t_hi, rng);
        while (!p.feasible && evaluations_ < budget() && t_hi < cfg_.t_max) {
            t_hi = std::min(1.5 * t_hi, cfg_.t_max);
            p = feasibility_search(p.z, t_hi, rng);
        }
        final_z_ = p.z;
        if (!p.feasible) {
            return;
        }
        accept(p);

        const double dist = std::hypot(problem_.target.x - problem_.initial.x,
                                       problem_.target.y - problem_.initial.y);
        double t_lo = std::max(cfg_.t_min, (dist - std::sqrt(2.0) * cfg_.tol.position) /
                                               cfg_.bounds.v_max);
        if (t_lo >= t_hi) {
            return;
        }
        for (int it = 0; it < 40 && evaluations_ < budget(); ++it) {
            if (t_hi - t_lo <= kTimeResolution * std::max(1.0, t_hi)) break;
            const double t_mid = 0.5 * (t_lo + t_hi);
            const Point q = feasibility_search(best_feasible_->z, t_mid, rng);
            if (q.feasible) {
                accept(q);
                t_hi = q.t_f;
            } else {
                t_lo = t_mid;
            }
        }
    }

    const std::optional<Point>& best_feasible() const { return best_feasible_; }
    const std::vector<double>& trace() const { return trace_; }
    std::size_t evaluations() const { return evaluations_; }
    std::vector<double> final_violations() {
        const ShootingVariables vars = decode(final_z_);
        if (!rollout_into(vars, problem_.initial, params_, traj_)) {
            return std::vector<double>(kViolationCount, std::numeric_limits<double>::infinity());
        }
        fill_violations(traj_, problem_, viol_);
        return viol_;
    }

private:
    std::size_t budget() const { return static_cast<std::size_t>(cfg_.max_solver_iters); }

    static void shuffle(std::vector<std::size_t>& order, PlannerRng& rng) {
        for (std::size_t i = order.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(rng.uniform() * static_cast<double>(i));
            std::swap(order[i - 1], order[std::min(j, i - 1)]);
        }
    }

    // Coordinate directions plus whole, half and quarter blocks of each
    // control channel, both signs.
    void build_directions() {
        using Dir = std::vector<std::pair<std::size_t, double>>;
        for (std::size_t i = 0; i < dim(); ++i) {
            directions_.push_back(Dir{{i, 1.0}});
            directions_.push_back(Dir{{i, -1.0}});
        }
        for (std::size_t channel = 0; channel < 2; ++channel) {
            for (std::size_t parts : {std::size_t{1}, std::size_t{2}, std::size_t{4}}) {
                if (parts > n_) continue;
                for (std::size_t b = 0; b < parts; ++b) {
                    const std::size_t lo = b * n_ / parts;
                    const std::size_t hi = (b + 1) * n_ / parts;
                    if (hi - lo < 2) continue;
                    Dir plus;
                    Dir minus;
                    for (std::size_t k = lo; k < hi; ++k) {
                        plus.emplace_back(1 + 2 * k + channel, 1.0);
                        minus.emplace_back(1 + 2 * k + channel, -1.0);
                    }
                    directions_.push_back(std::move(plus));
                    directions_.push_back(std::move(minus));
                }
            }
        }
    }

    const ConnectionProblem& problem_;
    const ConnectorConfig& cfg_;
    const VehicleParams& params_;
    double force_max_;
    std::size_t n_;
    double t_guess_ = 1.0;
    double t_scale_ = 1.0;
    std::vector<std::vector<std::pair<std::size_t, double>>> directions_;
    std::vector<PointMassState> traj_;
    std::vector<double> viol_;
    std::optional<Point> best_feasible_;
    std::vector<double> final_z_;
    std::vector<double> trace_;
    std::size_t evaluations_ = 0;
};

struct StartOutcome {
    std::optional<ShootingVariables> vars;
    std::vector<double> trace;
    std::vector<double> violations;
    std::size_t evaluations = 0;
};

struct Seeds {
    std::vector<std::vector<double>> points;
    std::size_t evaluations = 0;
};

// Start 0 is the straight-line guess; the rest come from the coarse sweep,
// falling back to random perturbations of the guess when it runs short.
Seeds make_seeds(const ConnectionProblem& problem, const ConnectorConfig& cfg,
                 const VehicleParams& params, double force_max) {
    ShootingSearch search(problem, cfg, params, force_max);
    Seeds seeds;
    seeds.points.push_back(search.heuristic_start(true));
    const std::size_t want = static_cast<std::size_t>(cfg.n_starts);
    if (want > 1) {
        for (auto& z : search.coarse_seeds(want - 1)) seeds.points.push_back(std::move(z));
    }
    PlannerRng rng(cfg.rng_seed * 0x9E3779B97F4A7C15ull);
    while (seeds.points.size() < want) {
        std::vector<double> z = seeds.points.front();
        z[0] *= 0.7 + 0.8 * rng.uniform();
        for (std::size_t i = 1; i < z.size(); ++i) {
            z[i] += 0.6 * (rng.uniform() - 0.5);
        }
        search.clamp(z);
        seeds.points.push_back(std::move(z));
    }
    seeds.evaluations = search.evaluations();
    return seeds;
}

StartOutcome run_start(std::size_t index, const std::vector<double>& seed,
                       const ConnectionProblem& problem, const ConnectorConfig& cfg,
                       const VehicleParams& params, double force_max) {
    ShootingSearch search(problem, cfg, params, force_max);
    PlannerRng rng(cfg.rng_seed * 0x9E3779B97F4A7C15ull + index + 1);
    search.run(seed, rng);

    StartOutcome out;
    out.trace = search.trace();
    out.evaluations = search.evaluations();
    if (const auto& best = search.best_feasible()) {
        out.vars = search.decode(best->z);
    } else {
        out.violations = search.final_violations();
    }
    return out;
}

double resolve_force_max(const ConnectorConfig& cfg, const VehicleParams& params) {
    return cfg.bounds.force_max > 0.0 ? cfg.bounds.force_max
                                      : 10.0 * params.m * kStandardGravity;
}

ConnectorResult finish(std::vector<StartOutcome>& outcomes, const ConnectionProblem& problem,
                       const VehicleParams& params, std::size_t seed_evals) {
    std::size_t best = outcomes.size();
    std::size_t total_evals = seed_evals;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        total_evals += outcomes[i].evaluations;
        if (!outcomes[i].vars) continue;
        if (best == outcomes.size() || outcomes[i].vars->t_f < outcomes[best].vars->t_f) {
            best = i;
        }
    }
    if (best == outcomes.size()) {
        std::vector<double> least;
        double least_sum = std::numeric_limits<double>::infinity();
        for (const auto& o : outcomes) {
            const double sum = std::accumulate(o.violations.begin(), o.violations.end(), 0.0);
            if (sum < least_sum) {
                least_sum = sum;
                least = o.violations;
            }
        }
        throw ConnectorInfeasible("connector found no feasible trajectory", least);
    }

    ConnectorResult result;
    const ShootingVariables& vars = *outcomes[best].vars;
    result.t_f = vars.t_f;
    result.controls = vars.controls;
    result.trajectory = rollout(vars, problem.initial, params);
    const Evaluation ev = evaluate(vars, problem, params);
    result.terminal_error.assign(ev.violations.begin(), ev.violations.begin() + 4);
    result.incumbent_trace = std::move(outcomes[best].trace);
    result.evaluations = total_evals;
    return result;
}

ConnectionProblem make_problem(const PointMassState& from, const PointMassState& to,
                               const ConnectorConfig& cfg, const VehicleParams& params) {
    params.validate();
    cfg.validate();
    if (!within_box(from, cfg.bounds)) {
        throw ConnectorInfeasible("initial state lies outside the connector bounds");
    }
    if (!within_box(to, cfg.bounds)) {
        throw ConnectorInfeasible("target state lies outside the connector bounds");
    }
    return {from, to, cfg.bounds};
}

}  // namespace

std::vector<PointMassState> rollout(const ShootingVariables& vars, const PointMassState& s0,
                                    const VehicleParams& params) {
    if (vars.controls.empty() || !(vars.t_f > 0.0)) {
        throw ContractViolation("rollout needs t_f > 0 and at least one control interval");
    }
    std::vector<PointMassState> out;
    if (!rollout_into(vars, s0, params, out)) {
        throw DivergenceError("point-mass rollout produced a non-finite state");
    }
    return out;
}

Evaluation evaluate(const ShootingVariables& vars, const ConnectionProblem& problem,
                    const VehicleParams& params) {
    Evaluation ev;
    ev.objective = vars.t_f;
    const std::vector<PointMassState> traj = rollout(vars, problem.initial, params);
    fill_violations(traj, problem, ev.violations);
    return ev;
}

ConnectorResult connect(const PointMassState& from, const PointMassState& to,
                        const ConnectorConfig& cfg, const VehicleParams& params) {
    const ConnectionProblem problem = make_problem(from, to, cfg, params);
    const double force_max = resolve_force_max(cfg, params);
    const Seeds seeds = make_seeds(problem, cfg, params, force_max);
    std::vector<StartOutcome> outcomes(static_cast<std::size_t>(cfg.n_starts));
    const long n = cfg.n_starts;
#pragma omp parallel for schedule(dynamic, 1)
    for (long i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        outcomes[k] = run_start(k, seeds.points[k], problem, cfg, params, force_max);
    }
    return finish(outcomes, problem, params, seeds.evaluations);
}

ConnectorResult connect_serial(const PointMassState& from, const PointMassState& to,
                               const ConnectorConfig& cfg, const VehicleParams& params) {
    const ConnectionProblem problem = make_problem(from, to, cfg, params);
    const double force_max = resolve_force_max(cfg, params);
    const Seeds seeds = make_seeds(problem, cfg, params, force_max);
    std::vector<StartOutcome> outcomes;
    for (std::size_t k = 0; k < seeds.points.size(); ++k) {
        outcomes.push_back(run_start(k, seeds.points[k], problem, cfg, params, force_max));
    }
    return finish(outcomes, problem, params, seeds.evaluations);
}

PointMassState junction_state(const ReducedState& s, const VehicleParams& params) {
    return {s.x, s.y, s.theta, params.vx};
}

std::vector<ReducedState> append_connection(std::span<const ReducedState> plan_path,
                                            const ConnectorResult& conn,
                                            const VehicleParams& params, double tol) {
    if (plan_path.empty() || conn.trajectory.empty()) {
        throw ContractViolation("append_connection needs a non-empty path and trajectory");
    }
    const ReducedState& last = plan_path.back();
    const PointMassState& first = conn.trajectory.front();
    if (std::abs(last.x - first.x) > tol || std::abs(last.y - first.y) > tol ||
        std::abs(wrap_angle(last.theta - first.theta)) > tol) {
        throw ContractViolation("connector trajectory does not start at the path's final state");
    }
    std::vector<ReducedState> full(plan_path.begin(), plan_path.end());
    const double wheelbase = params.wheelbase();
    for (std::size_t k = 1; k < conn.trajectory.size(); ++k) {
        const PointMassState& s = conn.trajectory[k];
        const PointMassControl& u = conn.controls[std::min(k, conn.controls.size() - 1)];
        full.push_back({s.x, s.y, s.theta, 0.0, s.v * std::tan(u.delta) / wheelbase});
    }
    return full;
}

}  // namespace arcplan
