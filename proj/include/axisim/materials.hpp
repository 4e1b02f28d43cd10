#pragma once

#include <cmath>

#include "axisim/errors.hpp"

namespace axisim {

inline constexpr double kMu0 = 4.0e-7 * 3.14159265358979323846; // H/m
inline constexpr double kStefanBoltzmann = 5.670374419e-8;      // W/(m^2 K^4)
inline constexpr double kCelsiusToKelvin = 273.15;

struct MuEval {
    double mu;        // H/m
    double dmu_dH;    // d mu / d|H|
    double dmu_dTheta;
};

// Temperature-dependent steel properties (fitted closed forms) plus the
// field- and temperature-dependent saturation permeability with Curie
// cutoff. sigma/k/cp are evaluated with theta clamped to [clamp_lo,
// clamp_hi]; a hit is latched in clamp_hit so drivers can log it once.
//
// Everything here is a pure function of its arguments (clamp_hit aside);
// evaluation is reentrant.
struct MaterialModel {
    // 1/sigma = s2*T^2 + s1*T + s0
    double sigma_c0 = 2.0170e-7, sigma_c1 = 1.0839e-9, sigma_c2 = -4.3306e-13;
    // k = k4 T^4 + k3 T^3 + k2 T^2 + k1 T + k0
    double k_c0 = 34.0140, k_c1 = 0.04639, k_c2 = -1.3658e-4, k_c3 = 1.1045e-7, k_c4 = -2.7834e-11;
    // cp = sum of three Gaussians A exp(-((T-c)/w)^2)
    double cp_a1 = 660.9, cp_c1 = 723.3, cp_w1 = 23.93;
    double cp_a2 = 288.9, cp_c2 = 697.6, cp_w2 = 133.5;
    double cp_a3 = 657.1, cp_c3 = 908.1, cp_w3 = 1497.0;

    double rho0 = 7799.0; // reference-configuration mass density, kg/m^3

    // mu = mu0 + f(theta)/(a + b|H|); f = 0 above the Curie temperature
    double mu_a = 2532.35; // A/(T m)
    double mu_b = 0.49;    // 1/T
    double theta_curie = 748.69; // degC
    double theta_room = 23.5;    // degC

    // Constant-law overrides (tests, linearized validation runs).
    bool sigma_constant = false;
    double sigma_value = 0.0;
    bool k_constant = false;
    double k_value = 0.0;
    bool cp_constant = false;
    double cp_value = 0.0;
    bool mu_constant = false;
    double mu_value = kMu0;

    double clamp_lo = 0.0, clamp_hi = 1500.0;
    mutable bool clamp_hit = false;

    double clamp_theta(double theta) const {
        if (theta < clamp_lo || theta > clamp_hi) {
            clamp_hit = true;
            return theta < clamp_lo ? clamp_lo : clamp_hi;
        }
        return theta;
    }

    double sigma(double theta) const {
        if (sigma_constant) return sigma_value;
        const double T = clamp_theta(theta);
        const double den = (sigma_c2 * T + sigma_c1) * T + sigma_c0;
        if (den <= 0.0) throw material_range_error("resistivity polynomial non-positive at theta=" + std::to_string(T));
        return 1.0 / den;
    }

    double dsigma_dtheta(double theta) const {
        if (sigma_constant) return 0.0;
        if (theta < clamp_lo || theta > clamp_hi) return 0.0;
        const double den = (sigma_c2 * theta + sigma_c1) * theta + sigma_c0;
        if (den <= 0.0) throw material_range_error("resistivity polynomial non-positive at theta=" + std::to_string(theta));
        const double dden = 2.0 * sigma_c2 * theta + sigma_c1;
        return -dden / (den * den);
    }

    double k(double theta) const {
        if (k_constant) return k_value;
        const double T = clamp_theta(theta);
        return (((k_c4 * T + k_c3) * T + k_c2) * T + k_c1) * T + k_c0;
    }

    double dk_dtheta(double theta) const {
        if (k_constant) return 0.0;
        if (theta < clamp_lo || theta > clamp_hi) return 0.0;
        const double T = theta;
        return ((4.0 * k_c4 * T + 3.0 * k_c3) * T + 2.0 * k_c2) * T + k_c1;
    }

    double cp(double theta) const {
        if (cp_constant) return cp_value;
        const double T = clamp_theta(theta);
        auto g = [T](double A, double c, double w) {
            double s = (T - c) / w;
            return A * std::exp(-s * s);
        };
        return g(cp_a1, cp_c1, cp_w1) + g(cp_a2, cp_c2, cp_w2) + g(cp_a3, cp_c3, cp_w3);
    }

    double dcp_dtheta(double theta) const {
        if (cp_constant) return 0.0;
        if (theta < clamp_lo || theta > clamp_hi) return 0.0;
        const double T = theta;
        auto dg = [T](double A, double c, double w) {
            double s = (T - c) / w;
            return A * std::exp(-s * s) * (-2.0 * s / w);
        };
        return dg(cp_a1, cp_c1, cp_w1) + dg(cp_a2, cp_c2, cp_w2) + dg(cp_a3, cp_c3, cp_w3);
    }

    // Curie factor f(theta) and its derivative (0 above theta_curie; the
    // one-sided analytic value below, which blows up approaching the cutoff
    // -- the damped Newton in the solver absorbs the kink).
    double curie_factor(double theta) const {
        if (theta >= theta_curie) return 0.0;
        const double Tc = theta_curie + kCelsiusToKelvin;
        const double T0 = theta_room + kCelsiusToKelvin;
        const double T = theta + kCelsiusToKelvin;
        return std::pow((Tc * Tc - T * T) / (Tc * Tc - T0 * T0), 0.25);
    }

    double curie_factor_deriv(double theta) const {
        if (theta >= theta_curie) return 0.0;
        const double Tc = theta_curie + kCelsiusToKelvin;
        const double T0 = theta_room + kCelsiusToKelvin;
        const double T = theta + kCelsiusToKelvin;
        const double rad = (Tc * Tc - T * T) / (Tc * Tc - T0 * T0);
        return 0.25 * std::pow(rad, -0.75) * (-2.0 * T) / (Tc * Tc - T0 * T0);
    }

    MuEval mu(double h_mod, double theta) const {
        if (mu_constant) return {mu_value, 0.0, 0.0};
        const double f = curie_factor(theta);
        const double den = mu_a + mu_b * h_mod;
        MuEval out;
        out.mu = kMu0 + f / den;
        out.dmu_dH = -f * mu_b / (den * den);
        out.dmu_dTheta = curie_factor_deriv(theta) / den;
        return out;
    }
};

// The fitted-steel defaults.
inline MaterialModel paper_steel() { return MaterialModel{}; }

} // namespace axisim
