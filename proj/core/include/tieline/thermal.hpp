#pragma once

// Two-node equivalent thermal parameter (ETP) house model.
//
// Air node:  c_air  dT_air/dt  = ua (T_out - T_air) + h_mass (T_mass - T_air) + Q_solar - Q_cool
// Mass node: c_mass dT_mass/dt = h_mass (T_air - T_mass)
//
// Powers are in W, capacities in J/degC, temperatures in degC.

#include <array>

namespace tieline {

struct HouseGeometry {
    double floor_area = 132.0;        // m^2
    double air_change_rate = 0.5;     // 1/h
    double window_wall_ratio = 0.15;
    double shgc = 0.36;
    double eer = 3.5;                 // W cooling per W electrical
    double r_roof = 5.28;             // degC m^2 / W
    double r_wall = 2.99;
    double r_floor = 3.35;
    double r_window = 0.38;
    double r_door = 0.88;
    double ceiling_height = 2.5;      // m
    double door_area = 2.0;           // m^2
};

/// Constants used to map geometry onto lumped ETP parameters.
struct EtpMapping {
    double air_density = 1.2;                 // kg/m^3
    double air_specific_heat = 1005.0;        // J/(kg degC)
    double air_capacity_multiplier = 3.0;     // furnishings coupled to the air node
    double mass_to_air_capacity = 10.0;       // c_mass / c_air
    double interior_surface_coeff = 8.29;     // W/(m^2 degC), air-to-mass film coefficient
    double interior_wall_ratio = 1.5;         // interior partition area per gross exterior wall area
    double solar_incidence_factor = 0.15;     // transmitted fraction of horizontal irradiance on glazing
    double cooling_oversize = 1.3;
    double design_outdoor_temp = 35.0;        // degC
    double design_indoor_temp = 26.0;         // degC
};

struct EtpParameters {
    double c_air = 0.0;                  // J/degC
    double c_mass = 0.0;                 // J/degC
    double ua_envelope = 0.0;            // W/degC
    double h_mass = 0.0;                 // W/degC
    double solar_aperture = 0.0;         // m^2
    double cooling_capacity = 0.0;       // W thermal
    double rated_electrical_power = 0.0; // W electrical
};

struct ThermalState {
    double t_air = 26.0;
    double t_mass = 26.0;
};

struct WeatherSample {
    double t_out = 0.0;  // degC
    double solar = 0.0;  // W/m^2
};

void validate(const HouseGeometry& g);
void validate(const EtpParameters& p);

double gross_wall_area(const HouseGeometry& g);
double window_area(const HouseGeometry& g);
double conduction_ua(const HouseGeometry& g);
double infiltration_ua(const HouseGeometry& g, const EtpMapping& m = {});

/// Throws ParameterDomainError when any geometry field is out of range.
EtpParameters derive_etp_params(const HouseGeometry& g, const EtpMapping& m = {});

/// Transition matrices of the exact step for fixed parameters and dt;
/// etp_step is equivalent to EtpStepper(p, dt).step(...).
class EtpStepper {
public:
    EtpStepper(const EtpParameters& p, double dt);

    ThermalState step(ThermalState s, WeatherSample w, bool cooling_on) const noexcept;

private:
    double e11_, e12_, e21_, e22_; // exp(A dt)
    double g11_, g21_;             // first column of the integral of exp(A s) over [0, dt]
    double ua_over_c_, aperture_over_c_, cooling_over_c_;
};

/// Exact zero-order-hold step of the linear two-node system over `dt`
/// seconds (0 < dt <= 60).
ThermalState etp_step(ThermalState s, const EtpParameters& p, WeatherSample w, bool cooling_on, double dt);

/// Steady-state indoor air temperature under constant inputs. Throws
/// SingularityError when ua_envelope is zero.
double equilibrium_temperature(const EtpParameters& p, WeatherSample w, bool cooling_on);

/// Eigenvalues (1/s) of the homogeneous system matrix, ascending.
std::array<double, 2> system_eigenvalues(const EtpParameters& p);

} // namespace tieline
