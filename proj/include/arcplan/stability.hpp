#pragma once

#include <complex>
#include <numbers>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "arcplan/dynamics.hpp"
#include "arcplan/integrators.hpp"

namespace arcplan {

struct StabilityVerdict {
    Scheme scheme = Scheme::euler_forward;
    double step = 0.0;
    bool stable = true;
    // Empirical cells: largest state norm seen. Predicted cells: largest |R(h lambda)|.
    double max_norm = 0.0;
    // Analytic verdict, filled in for one-step schemes when a report merges both.
    std::optional<bool> predicted;
};

// R(z) of a one-step scheme on x' = lambda x. Throws PoleError at the pole of
// an implicit scheme and ContractViolation for multistep/adaptive schemes.
std::complex<double> amplification_factor(Scheme scheme, std::complex<double> z);

// Eigenvalues of the affine lateral subsystem at the given steer.
std::array<std::complex<double>, 2> lateral_eigenvalues(double delta, const VehicleParams& params);

// Stable iff |R(h lambda_i)| <= 1 for both eigenvalues of the lateral system.
StabilityVerdict predict_stability(Scheme scheme, double h, double delta,
                                   const VehicleParams& params);

// Smallest h > 0 at which predict_stability turns unstable, located by a
// log-spaced scan up to h_limit followed by bisection. Infinity when the
// scheme stays stable up to h_limit.
double stability_boundary(Scheme scheme, double delta, const VehicleParams& params,
                          double h_limit = 100.0);

struct StabilityExperiment {
    double delta = std::numbers::pi / 4.0;
    double horizon = 10.0;
    double divergence_bound = 1e6;
    ReducedState initial{};
};

// n log-spaced values from lo to hi inclusive.
std::vector<double> log_spaced(double lo, double hi, std::size_t n);

// Integrates the reduced model once per (scheme, h) cell. Cells are laid out
// scheme-major and evaluated in parallel.
std::vector<StabilityVerdict> stability_experiment(std::span<const Scheme> schemes,
                                                   std::span<const double> h_values,
                                                   const VehicleParams& params,
                                                   const StabilityExperiment& setup = {});

// Same cells, evaluated one after another. Reference for the parallel sweep.
std::vector<StabilityVerdict> stability_experiment_serial(std::span<const Scheme> schemes,
                                                          std::span<const double> h_values,
                                                          const VehicleParams& params,
                                                          const StabilityExperiment& setup = {});

// Fills `predicted` on every one-step row.
void attach_predictions(std::span<StabilityVerdict> verdicts, double delta,
                        const VehicleParams& params);

// Header: scheme,h,verdict,max_norm,predicted
void write_stability_csv(std::ostream& out, std::span<const StabilityVerdict> verdicts);

}  // namespace arcplan
