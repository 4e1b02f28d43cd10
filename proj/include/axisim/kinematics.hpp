#pragma once

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "axisim/errors.hpp"
#include "axisim/mesh.hpp"

namespace axisim {

using Mat2 = Eigen::Matrix2d;

// Time ramp s(t) in [0,1] scaling the prescribed displacement.
struct RampSchedule {
    enum class Kind { Linear, Constant } kind = Kind::Linear;
    double T = 20.0;    // Linear: s(t) = clamp(t/T, 0, 1)
    double value = 1.0; // Constant: s(t) = value

    double operator()(double t) const {
        if (kind == Kind::Constant) return value;
        return std::clamp(t / T, 0.0, 1.0);
    }

    static RampSchedule linear(double T) {
        if (!(T > 0.0)) throw config_error("ramp_linear: T must be positive");
        return {Kind::Linear, T, 1.0};
    }
    static RampSchedule constant(double s) { return {Kind::Constant, 1.0, s}; }
};

inline RampSchedule ramp_linear(double T) { return RampSchedule::linear(T); }

// Displacement and partials at one material point and time. ur_over_r is
// supplied analytically so the axis limit r_m -> 0 is exact.
struct PointDisplacement {
    double ur = 0, uz = 0;
    double ur_over_r = 0;
    double dur_dr = 0, dur_dz = 0;
    double duz_dr = 0, duz_dz = 0;
};

namespace profile {

// Radial profile g(z_m) of the upsetting test motion: u_r = r_m * g(z_m),
// u_z = 0. Two fitted branches meeting at z_m = 0.02 m (coordinates in
// meters); the fits agree there to ~1e-6 relative.
inline double branch_poly(double zm) { return 1.0e3 * (-188.2593 * zm + 6.1464) * zm * zm; }

inline double branch_poly_slope(double zm) { return 1.0e3 * (-3.0 * 188.2593 * zm + 2.0 * 6.1464) * zm; }

inline double branch_gauss(double zm) {
    auto gauss = [](double z, double c, double w) {
        double s = (z - c) / w;
        return std::exp(-s * s);
    };
    return 1.0793 * gauss(zm, 0.0293, 0.03104) - 18.4974 * gauss(zm, -0.03324, 0.01705) +
           1.0779 * gauss(zm, 0.4363, 1.263) - 1.0;
}

inline double branch_gauss_slope(double zm) {
    auto dgauss = [](double z, double c, double w) {
        double s = (z - c) / w;
        return std::exp(-s * s) * (-2.0 * s / w);
    };
    return 1.0793 * dgauss(zm, 0.0293, 0.03104) - 18.4974 * dgauss(zm, -0.03324, 0.01705) +
           1.0779 * dgauss(zm, 0.4363, 1.263);
}

inline double value(double zm) { return zm <= 0.02 ? branch_poly(zm) : branch_gauss(zm); }
inline double slope(double zm) { return zm <= 0.02 ? branch_poly_slope(zm) : branch_gauss_slope(zm); }

} // namespace profile

// Prescribed motion of the reference configuration. Pure function of
// (p_hat, t); safe to share across threads.
struct DisplacementField {
    enum class Kind { Zero, RadialStretch, PaperTest } kind = Kind::Zero;
    double stretch_c = 0.0; // RadialStretch: u_r = c * r_m
    RampSchedule ramp = RampSchedule::constant(1.0);

    PointDisplacement eval(const Vec2& p, double t) const {
        PointDisplacement d;
        const double s = ramp(t);
        switch (kind) {
            case Kind::Zero: break;
            case Kind::RadialStretch: {
                const double c = stretch_c * s;
                d.ur = c * p.x();
                d.ur_over_r = c;
                d.dur_dr = c;
                break;
            }
            case Kind::PaperTest: {
                const double g = s * profile::value(p.y());
                const double gp = s * profile::slope(p.y());
                d.ur = g * p.x();
                d.ur_over_r = g;
                d.dur_dr = g;
                d.dur_dz = gp * p.x();
                break;
            }
        }
        return d;
    }
};

inline DisplacementField zero_field() { return {DisplacementField::Kind::Zero, 0.0, RampSchedule::constant(1.0)}; }

inline DisplacementField radial_stretch_field(double c, RampSchedule ramp = RampSchedule::constant(1.0)) {
    return {DisplacementField::Kind::RadialStretch, c, ramp};
}

inline DisplacementField paper_test_field(RampSchedule ramp) {
    return {DisplacementField::Kind::PaperTest, 0.0, ramp};
}

// All kinematic tensors needed by the reference-configuration weak forms at
// one quadrature point:
//   F2 = I2 + Grad u (meridional block), detF3 = (1 + u_r/r_m) detF2,
//   N = ( du_r/dz, -1-du_r/dr ; 1+du_z/dz, -du_z/dr ).
struct KinematicPoint {
    PointDisplacement u;
    Mat2 F2;
    Mat2 N;
    Mat2 Finv_t;
    double detF2 = 1;
    double detF3 = 1;
    double radial_factor = 1; // 1 + u_r/r_m
    double r_current = 0;     // r_m + u_r
};

inline KinematicPoint eval_kinematics(const DisplacementField& field, const Vec2& p, double t) {
    KinematicPoint k;
    k.u = field.eval(p, t);
    k.F2 << 1.0 + k.u.dur_dr, k.u.dur_dz, k.u.duz_dr, 1.0 + k.u.duz_dz;
    k.detF2 = k.F2.determinant();
    k.radial_factor = 1.0 + k.u.ur_over_r;
    k.detF3 = k.radial_factor * k.detF2;
    if (k.detF2 <= 0.0 || k.radial_factor <= 0.0)
        throw degenerate_motion_error("det F <= 0", p.x(), p.y(), t);
    k.N << k.u.dur_dz, -1.0 - k.u.dur_dr, 1.0 + k.u.duz_dz, -k.u.duz_dr;
    k.Finv_t << k.F2(1, 1), -k.F2(1, 0), -k.F2(0, 1), k.F2(0, 0);
    k.Finv_t /= k.detF2;
    k.r_current = p.x() + k.u.ur;
    return k;
}

// Current position of a material point.
inline Vec2 push_forward(const DisplacementField& field, const Vec2& p, double t) {
    auto d = field.eval(p, t);
    return {p.x() + d.ur, p.y() + d.uz};
}

// Mesh with nodes moved to their current positions (nodes follow particles).
inline MeridionalMesh pushed_mesh(const MeridionalMesh& ref, const DisplacementField& field, double t) {
    MeridionalMesh cur = ref;
    for (int i = 0; i < ref.n_nodes(); ++i) cur.nodes[i] = push_forward(field, ref.nodes[i], t);
    for (int tr = 0; tr < cur.n_triangles(); ++tr)
        if (cur.triangle_area(tr) <= 0.0) {
            Vec2 c = ref.triangle_centroid(tr);
            throw degenerate_motion_error("pushed element inverted", c.x(), c.y(), t);
        }
    return cur;
}

} // namespace axisim
