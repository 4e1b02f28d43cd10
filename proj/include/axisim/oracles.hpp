#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <string>

#include "axisim/errors.hpp"

// Analytic / ODE reference solutions for validation. Nothing here may share
// numerical kernels with the assembly modules.

namespace axisim::oracles {

using Complex = std::complex<double>;

// Reference value with provenance, for the `verify` tables.
struct OracleResult {
    std::string formula;
    std::string parameters;
    Complex value;
    double error_bound = 0.0; // self-reported truncation estimate
};

// Order-1 Bessel function of complex argument by ascending series,
//   J1(z) = (z/2) sum_k (-z^2/4)^k / (k! (k+1)!),
// trustworthy for |z| <= 12 in double precision.
inline Complex bessel_j1(Complex z) {
    if (std::abs(z) > 12.0)
        throw material_range_error("bessel_j1 series restricted to |z| <= 12, got |z|=" + std::to_string(std::abs(z)));
    const Complex q = -z * z / 4.0;
    Complex term{1.0, 0.0};
    Complex sum = term;
    for (int k = 1; k < 200; ++k) {
        term *= q / static_cast<double>(k * (k + 1));
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum) && k > 4) break;
    }
    return 0.5 * z * sum;
}

// Time-harmonic azimuthal magnetic field in an infinite straight cylinder of
// radius R with uniform sigma and mu carrying total current I:
//   H_theta(r) = I/(2 pi R) * J1(kappa r)/J1(kappa R),  kappa^2 = -i omega mu sigma.
inline Complex skin_effect_H(double r, double I, double omega, double sigma, double mu, double R) {
    if (!(R > 0.0) || r < 0.0 || r > R) throw config_error("skin_effect_H: need 0 <= r <= R, R > 0");
    const Complex kappa = std::sqrt(Complex(0.0, -omega * mu * sigma));
    const Complex denom = bessel_j1(kappa * R);
    return I / (2.0 * M_PI * R) * bessel_j1(kappa * r) / denom;
}

// DC voltage drop of a uniform cylinder: V = I L / (sigma pi R^2).
inline double dc_voltage(double I, double L, double R, double sigma) {
    if (!(L > 0.0) || !(R > 0.0) || !(sigma > 0.0)) throw config_error("dc_voltage: non-positive argument");
    return I * L / (sigma * M_PI * R * R);
}

// Uniform-source adiabatic heating, rho0 cp(theta) dtheta/dt = Q, integrated
// with adaptive Dormand-Prince RK5(4).
inline double adiabatic_heating(double theta0, double Q, double rho0,
                                const std::function<double(double)>& cp, double t_end,
                                double tol = 1e-10) {
    if (Q < 0.0) throw config_error("adiabatic_heating: Q must be >= 0");
    if (t_end <= 0.0) return theta0;

    auto f = [&](double theta) { return Q / (rho0 * cp(theta)); };

    // Dormand-Prince coefficients.
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                     a65 = -5103.0 / 18656;
    constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                     e6 = 22.0 / 525, e7 = -1.0 / 40;

    double t = 0.0, y = theta0;
    double h = t_end / 100.0;
    int rejected_in_a_row = 0;
    while (t < t_end) {
        if (t + h > t_end) h = t_end - t;
        const double k1 = f(y);
        const double k2 = f(y + h * a21 * k1);
        const double k3 = f(y + h * (a31 * k1 + a32 * k2));
        const double k4 = f(y + h * (a41 * k1 + a42 * k2 + a43 * k3));
        const double k5 = f(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        const double k6 = f(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        const double y5 = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        const double k7 = f(y5);
        const double err = std::abs(h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7));
        const double scale = tol * std::max(1.0, std::abs(y));
        if (err <= scale || h <= 1e-14 * t_end) {
            t += h;
            y = y5;
            rejected_in_a_row = 0;
        } else if (++rejected_in_a_row > 60) {
            throw solver_error("adiabatic_heating: step control stalled", {});
        }
        const double factor = err > 0.0 ? 0.9 * std::pow(scale / err, 0.2) : 5.0;
        h *= std::clamp(factor, 0.2, 5.0);
    }
    return y;
}

} // namespace axisim::oracles
