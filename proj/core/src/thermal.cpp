#include "tieline/thermal.hpp"

#include "tieline/errors.hpp"

#include <cmath>
#include <string>

namespace tieline {

namespace {

void require_positive(double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw ParameterDomainError(std::string(name) + " must be positive and finite, got " + std::to_string(v));
    }
}

struct Mat2 {
    double a11, a12, a21, a22;
};

// f(A) for a 2x2 matrix with distinct real eigenvalues l1 != l2, by
// Sylvester's formula.
template <typename F>
Mat2 matrix_function(const Mat2& m, double l1, double l2, F f) {
    const double f1 = f(l1);
    const double f2 = f(l2);
    const double inv = 1.0 / (l1 - l2);
    // f1 (A - l2 I) - f2 (A - l1 I)
    return Mat2{
        (f1 * (m.a11 - l2) - f2 * (m.a11 - l1)) * inv,
        (f1 - f2) * m.a12 * inv,
        (f1 - f2) * m.a21 * inv,
        (f1 * (m.a22 - l2) - f2 * (m.a22 - l1)) * inv,
    };
}

Mat2 system_matrix(const EtpParameters& p) {
    return Mat2{
        -(p.ua_envelope + p.h_mass) / p.c_air,
        p.h_mass / p.c_air,
        p.h_mass / p.c_mass,
        -p.h_mass / p.c_mass,
    };
}

std::array<double, 2> eigenvalues(const Mat2& m) {
    const double half_tr = 0.5 * (m.a11 + m.a22);
    const double det = m.a11 * m.a22 - m.a12 * m.a21;
    const double half_diff = 0.5 * (m.a11 - m.a22);
    const double root = std::sqrt(half_diff * half_diff + m.a12 * m.a21);
    const double l1 = half_tr - root; // most negative, never zero
    // product of the eigenvalues is det; avoids cancellation in half_tr + root
    const double l2 = det / l1;
    return {l1, l2};
}

} // namespace

void validate(const HouseGeometry& g) {
    require_positive(g.floor_area, "floor_area");
    if (!(g.air_change_rate >= 0.0) || !std::isfinite(g.air_change_rate)) {
        throw ParameterDomainError("air_change_rate must be non-negative");
    }
    if (!(g.window_wall_ratio > 0.0 && g.window_wall_ratio < 1.0)) {
        throw ParameterDomainError("window_wall_ratio must lie in (0, 1)");
    }
    if (!(g.shgc > 0.0 && g.shgc <= 1.0)) {
        throw ParameterDomainError("shgc must lie in (0, 1]");
    }
    require_positive(g.eer, "eer");
    require_positive(g.r_roof, "r_roof");
    require_positive(g.r_wall, "r_wall");
    require_positive(g.r_floor, "r_floor");
    require_positive(g.r_window, "r_window");
    require_positive(g.r_door, "r_door");
    require_positive(g.ceiling_height, "ceiling_height");
    require_positive(g.door_area, "door_area");
}

void validate(const EtpParameters& p) {
    require_positive(p.c_air, "c_air");
    require_positive(p.c_mass, "c_mass");
    require_positive(p.ua_envelope, "ua_envelope");
    require_positive(p.h_mass, "h_mass");
    require_positive(p.solar_aperture, "solar_aperture");
    require_positive(p.cooling_capacity, "cooling_capacity");
    require_positive(p.rated_electrical_power, "rated_electrical_power");
}

double gross_wall_area(const HouseGeometry& g) {
    return 4.0 * std::sqrt(g.floor_area) * g.ceiling_height;
}

double window_area(const HouseGeometry& g) {
    return g.window_wall_ratio * gross_wall_area(g);
}

double conduction_ua(const HouseGeometry& g) {
    const double wall = gross_wall_area(g);
    const double window = g.window_wall_ratio * wall;
    return g.floor_area / g.r_roof + g.floor_area / g.r_floor + (wall - window) / g.r_wall + window / g.r_window +
           g.door_area / g.r_door;
}

double infiltration_ua(const HouseGeometry& g, const EtpMapping& m) {
    const double volume = g.floor_area * g.ceiling_height;
    return g.air_change_rate * volume * m.air_density * m.air_specific_heat / 3600.0;
}

EtpParameters derive_etp_params(const HouseGeometry& g, const EtpMapping& m) {
    validate(g);
    const double volume = g.floor_area * g.ceiling_height;
    const double wall = gross_wall_area(g);
    const double window = g.window_wall_ratio * wall;

    EtpParameters p;
    p.c_air = m.air_capacity_multiplier * volume * m.air_density * m.air_specific_heat;
    p.c_mass = m.mass_to_air_capacity * p.c_air;
    p.ua_envelope = conduction_ua(g) + infiltration_ua(g, m);
    p.h_mass = m.interior_surface_coeff * ((wall - window - g.door_area) + wall * m.interior_wall_ratio + g.floor_area);
    p.solar_aperture = window * g.shgc * m.solar_incidence_factor;
    p.cooling_capacity = m.cooling_oversize * p.ua_envelope * (m.design_outdoor_temp - m.design_indoor_temp);
    p.rated_electrical_power = p.cooling_capacity / g.eer;
    validate(p);
    return p;
}

EtpStepper::EtpStepper(const EtpParameters& p, double dt) {
    if (!(dt > 0.0 && dt <= 60.0)) {
        throw ParameterDomainError("etp_step: dt must lie in (0, 60] s");
    }
    const Mat2 a = system_matrix(p);
    const auto [l1, l2] = eigenvalues(a);
    const Mat2 e = matrix_function(a, l1, l2, [dt](double l) { return std::exp(l * dt); });
    const Mat2 g = matrix_function(a, l1, l2, [dt](double l) { return l == 0.0 ? dt : std::expm1(l * dt) / l; });
    e11_ = e.a11;
    e12_ = e.a12;
    e21_ = e.a21;
    e22_ = e.a22;
    g11_ = g.a11;
    g21_ = g.a21;
    ua_over_c_ = p.ua_envelope / p.c_air;
    aperture_over_c_ = p.solar_aperture / p.c_air;
    cooling_over_c_ = p.cooling_capacity / p.c_air;
}

ThermalState EtpStepper::step(ThermalState s, WeatherSample w, bool cooling_on) const noexcept {
    // input enters the air node only
    const double u_air = ua_over_c_ * w.t_out + aperture_over_c_ * w.solar - (cooling_on ? cooling_over_c_ : 0.0);
    return ThermalState{
        e11_ * s.t_air + e12_ * s.t_mass + g11_ * u_air,
        e21_ * s.t_air + e22_ * s.t_mass + g21_ * u_air,
    };
}

ThermalState etp_step(ThermalState s, const EtpParameters& p, WeatherSample w, bool cooling_on, double dt) {
    return EtpStepper(p, dt).step(s, w, cooling_on);
}

double equilibrium_temperature(const EtpParameters& p, WeatherSample w, bool cooling_on) {
    if (!(p.ua_envelope > 0.0)) {
        throw SingularityError("equilibrium_temperature: ua_envelope is zero, no steady state");
    }
    const double q_net = p.solar_aperture * w.solar - (cooling_on ? p.cooling_capacity : 0.0);
    return w.t_out + q_net / p.ua_envelope;
}

std::array<double, 2> system_eigenvalues(const EtpParameters& p) {
    return eigenvalues(system_matrix(p));
}

} // namespace tieline
