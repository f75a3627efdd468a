#include "arcplan/dynamics.hpp"

#include <cmath>
#include <string>

#include "arcplan/errors.hpp"

namespace arcplan {

void VehicleParams::validate() const {
    auto require = [](bool ok, const char* what) {
        if (!ok) {
            throw ContractViolation(std::string("invalid vehicle parameter: ") + what);
        }
    };
    require(std::isfinite(m) && m > 0.0, "m must be > 0");
    require(std::isfinite(iz) && iz > 0.0, "iz must be > 0");
    require(std::isfinite(lf) && lf > 0.0, "lf must be > 0");
    require(std::isfinite(lr) && lr > 0.0, "lr must be > 0");
    require(std::isfinite(c_alpha_f) && c_alpha_f > 0.0, "c_alpha_f must be > 0");
    require(std::isfinite(c_alpha_r) && c_alpha_r > 0.0, "c_alpha_r must be > 0");
    require(std::isfinite(vx) && vx > 0.0, "vx must be > 0");
    require(delta_max > 0.0 && delta_max <= std::numbers::pi / 2.0,
            "delta_max must lie in (0, pi/2]");
}

ReducedState ReducedState::from_vector(const Eigen::Ref<const Eigen::VectorXd>& v) {
    if (v.size() != 5) {
        throw ContractViolation("ReducedState::from_vector expects 5 components");
    }
    return {v[0], v[1], v[2], v[3], v[4]};
}

SlipAngles slip_angles(double vy, double r, double delta, const VehicleParams& params) {
    return {(vy + params.lf * r) / params.vx - delta, (vy - params.lr * r) / params.vx};
}

TireForces lateral_forces(const SlipAngles& slip, const VehicleParams& params) {
    return {-params.c_alpha_f * slip.alpha_f, -params.c_alpha_r * slip.alpha_r, 0.0, 0.0};
}

ReducedState reduced_derivative(const ReducedState& s, double delta, const VehicleParams& params) {
    const TireForces f = lateral_forces(slip_angles(s.vy, s.r, delta, params), params);
    const double ct = std::cos(s.theta);
    const double st = std::sin(s.theta);
    const double cd = std::cos(delta);

    ReducedState d;
    d.x = params.vx * ct - s.vy * st;
    d.y = params.vx * st + s.vy * ct;
    d.theta = s.r;
    d.vy = (f.fyf * cd + f.fyr) / params.m - params.vx * s.r;
    d.r = (params.lf * (f.fyf * cd) - params.lr * f.fyr) / params.iz;
    return d;
}

FullState full_derivative(const FullState& s, double delta, double fxf, double fxr,
                          const VehicleParams& params) {
    VehicleParams local = params;
    local.vx = s.vx;
    // Slip is undefined at standstill; the tires carry no lateral load there.
    const TireForces f = s.vx == 0.0 ? TireForces{}
                                     : lateral_forces(slip_angles(s.vy, s.r, delta, local), local);
    const double ct = std::cos(s.theta);
    const double st = std::sin(s.theta);
    const double cd = std::cos(delta);
    const double sd = std::sin(delta);

    FullState d;
    d.x = s.vx * ct - s.vy * st;
    d.y = s.vx * st + s.vy * ct;
    d.theta = s.r;
    d.vx = -fxf * cd / params.m - f.fyf * sd / params.m - fxr / params.m + s.vy * s.r;
    d.vy = (f.fyf * cd - fxf * sd + f.fyr) / params.m - s.vx * s.r;
    d.r = (params.lf * (f.fyf * cd - fxf * sd) - params.lr * f.fyr) / params.iz;
    return d;
}

PointMassState point_mass_derivative(const PointMassState& s, const PointMassControl& u,
                                     const VehicleParams& params) {
    return {s.v * std::cos(s.theta), s.v * std::sin(s.theta),
            s.v * std::tan(u.delta) / params.wheelbase(), u.force / params.m};
}

LateralSystem lateral_system_matrix(double delta, const VehicleParams& p) {
    const double cf = p.c_alpha_f * std::cos(delta);
    const double cr = p.c_alpha_r;
    LateralSystem sys;
    sys.a(0, 0) = -(cf + cr) / (p.m * p.vx);
    sys.a(0, 1) = (cr * p.lr - cf * p.lf) / (p.m * p.vx) - p.vx;
    sys.a(1, 0) = (cr * p.lr - cf * p.lf) / (p.iz * p.vx);
    sys.a(1, 1) = -(cf * p.lf * p.lf + cr * p.lr * p.lr) / (p.iz * p.vx);
    sys.b(0) = cf * delta / p.m;
    sys.b(1) = p.lf * cf * delta / p.iz;
    return sys;
}

std::function<Eigen::VectorXd(const Eigen::VectorXd&)> reduced_rhs(double delta,
                                                                   const VehicleParams& params) {
    return [delta, params](const Eigen::VectorXd& v) -> Eigen::VectorXd {
        return reduced_derivative(ReducedState::from_vector(v), delta, params).to_vector();
    };
}

}  // namespace arcplan
