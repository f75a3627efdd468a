#pragma once

#include <Eigen/Core>
#include <functional>
#include <numbers>

namespace arcplan {

// Single-track vehicle parameters, SI units throughout.
struct VehicleParams {
    double m = 1500.0;            // kg
    double iz = 2500.0;           // kg m^2
    double lf = 1.2;              // CG to front axle, m
    double lr = 1.4;              // CG to rear axle, m
    double c_alpha_f = 80000.0;   // N/rad
    double c_alpha_r = 80000.0;   // N/rad
    double vx = 15.0;             // constant longitudinal speed, m/s
    double delta_max = std::numbers::pi / 4.0;

    double wheelbase() const { return lf + lr; }

    // Throws ContractViolation naming the first offending field.
    void validate() const;
};

// (X, Y, theta, v_y, r). theta is never wrapped here.
struct ReducedState {
    double x = 0.0;
    double y = 0.0;
    double theta = 0.0;
    double vy = 0.0;
    double r = 0.0;

    using Vector = Eigen::Matrix<double, 5, 1>;
    Vector to_vector() const { return Vector(x, y, theta, vy, r); }
    static ReducedState from_vector(const Eigen::Ref<const Eigen::VectorXd>& v);

    bool operator==(const ReducedState&) const = default;
};

struct FullState {
    double x = 0.0;
    double y = 0.0;
    double theta = 0.0;
    double vx = 0.0;
    double vy = 0.0;
    double r = 0.0;
};

struct SlipAngles {
    double alpha_f = 0.0;
    double alpha_r = 0.0;
};

struct TireForces {
    double fyf = 0.0;
    double fyr = 0.0;
    double fxf = 0.0;
    double fxr = 0.0;
};

struct PointMassState {
    double x = 0.0;
    double y = 0.0;
    double theta = 0.0;
    double v = 0.0;

    bool operator==(const PointMassState&) const = default;
};

struct PointMassControl {
    double force = 0.0;  // N
    double delta = 0.0;  // rad

    bool operator==(const PointMassControl&) const = default;
};

// Linear-tire slip angles at constant params.vx.
SlipAngles slip_angles(double vy, double r, double delta, const VehicleParams& params);

// F_y = -C_alpha * alpha on each axle; longitudinal forces are zero.
TireForces lateral_forces(const SlipAngles& slip, const VehicleParams& params);

// Reduced bicycle model with constant v_x and no longitudinal tire force.
ReducedState reduced_derivative(const ReducedState& s, double delta, const VehicleParams& params);

// Full bicycle model with explicit longitudinal tire forces. Slip angles use
// the state's own v_x; at v_x = 0 the lateral forces are zero.
FullState full_derivative(const FullState& s, double delta, double fxf, double fxr,
                          const VehicleParams& params);

// Kinematic point mass with steering, wheelbase lf + lr.
PointMassState point_mass_derivative(const PointMassState& s, const PointMassControl& u,
                                     const VehicleParams& params);

// For fixed delta, (v_y', r')^T = a * (v_y, r)^T + b exactly.
struct LateralSystem {
    Eigen::Matrix2d a;
    Eigen::Vector2d b;
};

LateralSystem lateral_system_matrix(double delta, const VehicleParams& params);

// reduced_derivative under constant steer, packaged for the integrators.
std::function<Eigen::VectorXd(const Eigen::VectorXd&)> reduced_rhs(double delta,
                                                                   const VehicleParams& params);

}  // namespace arcplan
