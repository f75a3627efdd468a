#include "arcplan/stability.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "arcplan/errors.hpp"

namespace arcplan {

namespace {

std::complex<double> polynomial(const std::vector<double>& coeffs, std::complex<double> z) {
    std::complex<double> acc = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) {
        acc = acc * z + *it;
    }
    return acc;
}

StabilityVerdict run_cell(Scheme scheme, double h, const VehicleParams& params,
                          const StabilityExperiment& setup) {
    StabilityVerdict v;
    v.scheme = scheme;
    v.step = h;
    const Rhs f = reduced_rhs(setup.delta, params);
    try {
        const Trajectory traj = integrate(scheme, f, setup.initial.to_vector(), h, setup.horizon);
        v.max_norm = traj.max_norm;
    } catch (const SolverFailure&) {
        v.max_norm = std::numeric_limits<double>::infinity();
    } catch (const StiffnessError&) {
        v.max_norm = std::numeric_limits<double>::infinity();
    }
    v.stable = v.max_norm <= setup.divergence_bound;
    return v;
}

}  // namespace

std::complex<double> amplification_factor(Scheme scheme, std::complex<double> z) {
    switch (scheme) {
        case Scheme::euler_backward:
            if (z == 1.0) {
                throw PoleError("backward Euler stability function has a pole at z = 1");
            }
            return 1.0 / (1.0 - z);
        case Scheme::trapezoidal:
            if (z == 2.0) {
                throw PoleError("trapezoidal stability function has a pole at z = 2");
            }
            return (1.0 + 0.5 * z) / (1.0 - 0.5 * z);
        case Scheme::euler_forward:
        case Scheme::rk3:
        case Scheme::rk4:
        case Scheme::rk6: {
            static const std::vector<double> ef = tableau(Scheme::euler_forward).stability_polynomial();
            static const std::vector<double> rk3 = tableau(Scheme::rk3).stability_polynomial();
            static const std::vector<double> rk4 = tableau(Scheme::rk4).stability_polynomial();
            static const std::vector<double> rk6 = tableau(Scheme::rk6).stability_polynomial();
            const auto& c = scheme == Scheme::euler_forward ? ef
                            : scheme == Scheme::rk3         ? rk3
                            : scheme == Scheme::rk4         ? rk4
                                                            : rk6;
            return polynomial(c, z);
        }
        default: break;
    }
    throw ContractViolation(std::string(to_string(scheme)) + " has no one-step stability function");
}

std::array<std::complex<double>, 2> lateral_eigenvalues(double delta, const VehicleParams& params) {
    const Eigen::Matrix2d a = lateral_system_matrix(delta, params).a;
    const double half_trace = 0.5 * (a(0, 0) + a(1, 1));
    const double det = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
    const std::complex<double> root = std::sqrt(std::complex<double>(half_trace * half_trace - det));
    return {half_trace + root, half_trace - root};
}

StabilityVerdict predict_stability(Scheme scheme, double h, double delta,
                                   const VehicleParams& params) {
    StabilityVerdict v;
    v.scheme = scheme;
    v.step = h;
    for (const auto& lambda : lateral_eigenvalues(delta, params)) {
        v.max_norm = std::max(v.max_norm, std::abs(amplification_factor(scheme, h * lambda)));
    }
    v.stable = v.max_norm <= 1.0;
    v.predicted = v.stable;
    return v;
}

double stability_boundary(Scheme scheme, double delta, const VehicleParams& params,
                          double h_limit) {
    auto stable = [&](double h) { return predict_stability(scheme, h, delta, params).stable; };
    const std::vector<double> grid = log_spaced(1e-6, h_limit, 2001);
    double lo = 0.0;
    for (double h : grid) {
        if (!stable(h)) {
            double hi = h;
            for (int i = 0; i < 200 && hi - lo > 1e-14 * hi; ++i) {
                const double mid = 0.5 * (lo + hi);
                (stable(mid) ? lo : hi) = mid;
            }
            return 0.5 * (lo + hi);
        }
        lo = h;
    }
    return std::numeric_limits<double>::infinity();
}

std::vector<double> log_spaced(double lo, double hi, std::size_t n) {
    if (!(lo > 0.0) || !(hi >= lo) || n == 0) {
        throw ContractViolation("log_spaced needs 0 < lo <= hi and n >= 1");
    }
    std::vector<double> out(n);
    if (n == 1) {
        out[0] = lo;
        return out;
    }
    const double a = std::log10(lo);
    const double b = std::log10(hi);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = std::pow(10.0, a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
    }
    out.front() = lo;
    out.back() = hi;
    return out;
}

std::vector<StabilityVerdict> stability_experiment(std::span<const Scheme> schemes,
                                                   std::span<const double> h_values,
                                                   const VehicleParams& params,
                                                   const StabilityExperiment& setup) {
    params.validate();
    const std::size_t n_h = h_values.size();
    const long n_cells = static_cast<long>(schemes.size() * n_h);
    std::vector<StabilityVerdict> out(static_cast<std::size_t>(n_cells));
#pragma omp parallel for schedule(dynamic, 1)
    for (long cell = 0; cell < n_cells; ++cell) {
        const auto i = static_cast<std::size_t>(cell);
        out[i] = run_cell(schemes[i / n_h], h_values[i % n_h], params, setup);
    }
    return out;
}

std::vector<StabilityVerdict> stability_experiment_serial(std::span<const Scheme> schemes,
                                                          std::span<const double> h_values,
                                                          const VehicleParams& params,
                                                          const StabilityExperiment& setup) {
    params.validate();
    std::vector<StabilityVerdict> out;
    out.reserve(schemes.size() * h_values.size());
    for (Scheme scheme : schemes) {
        for (double h : h_values) {
            out.push_back(run_cell(scheme, h, params, setup));
        }
    }
    return out;
}

void attach_predictions(std::span<StabilityVerdict> verdicts, double delta,
                        const VehicleParams& params) {
    for (auto& v : verdicts) {
        if (is_one_step(v.scheme)) {
            v.predicted = predict_stability(v.scheme, v.step, delta, params).stable;
        }
    }
}

void write_stability_csv(std::ostream& out, std::span<const StabilityVerdict> verdicts) {
    out << "scheme,h,verdict,max_norm,predicted\n";
    char buf[64];
    for (const auto& v : verdicts) {
        out << to_string(v.scheme) << ',';
        std::snprintf(buf, sizeof buf, "%.17g", v.step);
        out << buf << ',' << (v.stable ? "stable" : "unstable") << ',';
        std::snprintf(buf, sizeof buf, "%.17g", v.max_norm);
        out << buf << ',';
        if (v.predicted) {
            out << (*v.predicted ? "stable" : "unstable");
        }
        out << '\n';
    }
}

}  // namespace arcplan
