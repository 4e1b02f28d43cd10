#pragma once

#include <array>

#include <Eigen/Dense>

#include "axisim/kinematics.hpp"
#include "axisim/mesh.hpp"

// Per-element quadrature data for the axisymmetric weak forms, in either the
// reference (Lagrangian) or current (Eulerian, pushed-mesh) configuration.
// Volume terms use the interior 3-point rule (degree-2 exact); its points lie
// strictly inside each triangle and therefore never touch the axis, which is
// the whole axis-singularity policy: 1/r factors are only ever evaluated at
// quadrature points. (Triangles may own a full edge on r = 0, so the mid-edge
// variant of the same-degree rule would divide by zero there.)

namespace axisim {

enum class Mode { Lagrangian, Eulerian };

namespace fe {

inline constexpr int kQP = 3;
// Interior barycentric coordinates (2/3, 1/6, 1/6), equal weights.
inline constexpr double kBary[kQP][3] = {{2.0 / 3, 1.0 / 6, 1.0 / 6},
                                         {1.0 / 6, 2.0 / 3, 1.0 / 6},
                                         {1.0 / 6, 1.0 / 6, 2.0 / 3}};

struct ElemGeom {
    std::array<int, 3> n{};   // node ids
    double phi[kQP][3];       // P1 basis at quadrature points
    double w[kQP];            // quadrature weights (working-configuration area / 3)

    // Electromagnetic factors per quadrature point:
    //   mass term      i*omega*mu * em_mass * H G
    //   stiffness term (Gem_j . Gem_i) * em_stiff / sigma
    //   |H| = |Htilde| / r_eff
    double em_mass[kQP];
    double em_stiff[kQP];
    double r_eff[kQP];
    Vec2 Gem[kQP][3];

    // Thermal factors per quadrature point:
    //   mass       rho0 * cp * th_mass * (dTheta/dt) psi
    //   conduction k * (Gth_j . Gth_i) * th_stiff
    //   source     q * th_stiff * psi   (same current-volume weight)
    double th_mass[kQP];
    double th_stiff[kQP];
    Vec2 Gth[kQP][3];

    double theta[kQP] = {0, 0, 0}; // filled by callers that interpolate temperature

    // Element-constant current-density reconstruction (centroid):
    //   |J|^2 = |Gj . Htilde|^2 * joule_geo
    // and the current-configuration measure for dissipation integrals,
    //   P += Q * diss_measure  with  diss_measure = 2 pi r deformed-area.
    Vec2 Gj[3];
    double joule_geo = 0;
    double diss_measure = 0;
    double r_centroid = 0;
};

inline void p1_gradients(const Vec2& p0, const Vec2& p1, const Vec2& p2, double area, Vec2 grad[3]) {
    const double f = 1.0 / (2.0 * area);
    grad[0] = f * Vec2(p1.y() - p2.y(), p2.x() - p1.x());
    grad[1] = f * Vec2(p2.y() - p0.y(), p0.x() - p2.x());
    grad[2] = f * Vec2(p0.y() - p1.y(), p1.x() - p0.x());
}

// Lagrangian: all integrals on the reference element with the pull-back
// factors det F2, 1 + u_r/r_m and the tensors N, F^-t from the motion.
inline ElemGeom elem_geom_lagrangian(const MeridionalMesh& ref, int t_elem, const DisplacementField& field,
                                     double time) {
    ElemGeom g;
    g.n = ref.triangles[t_elem];
    const Vec2 p0 = ref.nodes[g.n[0]], p1 = ref.nodes[g.n[1]], p2 = ref.nodes[g.n[2]];
    const double area = ref.triangle_area(t_elem);
    Vec2 grad[3];
    p1_gradients(p0, p1, p2, area, grad);

    for (int q = 0; q < kQP; ++q) {
        const Vec2 pq = kBary[q][0] * p0 + kBary[q][1] * p1 + kBary[q][2] * p2;
        const KinematicPoint kin = eval_kinematics(field, pq, time);
        g.w[q] = area / 3.0;
        for (int i = 0; i < 3; ++i) g.phi[q][i] = kBary[q][i];

        g.r_eff[q] = kin.r_current;
        g.em_mass[q] = kin.detF2 / kin.r_current;
        g.em_stiff[q] = 1.0 / (kin.r_current * kin.detF2);
        for (int i = 0; i < 3; ++i) g.Gem[q][i] = kin.N * grad[i];

        g.th_mass[q] = pq.x();                                          // rho0 cp ... r_m
        g.th_stiff[q] = kin.radial_factor * kin.detF2 * pq.x();         // (1 + u_r/r_m) detF2 r_m
        for (int i = 0; i < 3; ++i) g.Gth[q][i] = kin.Finv_t * grad[i];
    }

    const Vec2 c = ref.triangle_centroid(t_elem);
    const KinematicPoint kc = eval_kinematics(field, c, time);
    for (int i = 0; i < 3; ++i) g.Gj[i] = kc.N * grad[i];
    g.joule_geo = 1.0 / (c.x() * c.x() * kc.detF3 * kc.detF3);
    g.diss_measure = 2.0 * M_PI * c.x() * kc.detF3 * area;
    g.r_centroid = c.x();
    return g;
}

// Eulerian: integrals on the pushed element; the only kinematic input is the
// discrete deformation the mesh itself realizes (area and radius ratios),
// used for the spatial density rho = rho0 / det F.
inline ElemGeom elem_geom_eulerian(const MeridionalMesh& cur, const MeridionalMesh& ref, int t_elem) {
    ElemGeom g;
    g.n = cur.triangles[t_elem];
    const Vec2 p0 = cur.nodes[g.n[0]], p1 = cur.nodes[g.n[1]], p2 = cur.nodes[g.n[2]];
    const double area = cur.triangle_area(t_elem);
    const double area_ref = ref.triangle_area(t_elem);
    Vec2 grad[3];
    p1_gradients(p0, p1, p2, area, grad);

    const Vec2 c = (p0 + p1 + p2) / 3.0;
    const Vec2 c_ref = ref.triangle_centroid(t_elem);
    const double detF3_elem = (area / area_ref) * (c.x() / c_ref.x());

    for (int q = 0; q < kQP; ++q) {
        const Vec2 pq = kBary[q][0] * p0 + kBary[q][1] * p1 + kBary[q][2] * p2;
        g.w[q] = area / 3.0;
        for (int i = 0; i < 3; ++i) g.phi[q][i] = kBary[q][i];

        g.r_eff[q] = pq.x();
        g.em_mass[q] = 1.0 / pq.x();
        g.em_stiff[q] = 1.0 / pq.x();
        for (int i = 0; i < 3; ++i) g.Gem[q][i] = grad[i];

        g.th_mass[q] = pq.x() / detF3_elem; // (rho0/detF) cp ... r
        g.th_stiff[q] = pq.x();
        for (int i = 0; i < 3; ++i) g.Gth[q][i] = grad[i];
    }

    for (int i = 0; i < 3; ++i) g.Gj[i] = grad[i];
    g.joule_geo = 1.0 / (c.x() * c.x());
    g.diss_measure = 2.0 * M_PI * c.x() * area;
    g.r_centroid = c.x();
    return g;
}

inline ElemGeom elem_geom(Mode mode, const MeridionalMesh& ref, const MeridionalMesh& cur, int t_elem,
                          const DisplacementField& field, double time) {
    return mode == Mode::Lagrangian ? elem_geom_lagrangian(ref, t_elem, field, time)
                                    : elem_geom_eulerian(cur, ref, t_elem);
}

// Convection-radiation edge data: two-point Gauss along the edge, with the
// boundary pull-back factor |F^-t n_p| frozen at the edge midpoint.
struct EdgeGeom {
    int a = -1, b = -1;
    double phi[2][2];  // basis of (a,b) at the two Gauss points
    double w[2];       // flux weights: [...] psi * w
};

inline constexpr double kGauss2[2] = {0.5 - 0.28867513459481288225, 0.5 + 0.28867513459481288225};

inline EdgeGeom edge_geom_lagrangian(const MeridionalMesh& ref, const BoundaryEdge& e,
                                     const DisplacementField& field, double time) {
    EdgeGeom g;
    g.a = e.a;
    g.b = e.b;
    const Vec2 pa = ref.nodes[e.a], pb = ref.nodes[e.b];
    const double len = (pb - pa).norm();
    const Vec2 tangent = (pb - pa) / len;
    const Vec2 n_p(tangent.y(), -tangent.x()); // outward for CCW boundary
    const KinematicPoint km = eval_kinematics(field, 0.5 * (pa + pb), time);
    const double stretch = (km.Finv_t * n_p).norm();
    for (int q = 0; q < 2; ++q) {
        const double s = kGauss2[q];
        const Vec2 pq = (1.0 - s) * pa + s * pb;
        const KinematicPoint kq = eval_kinematics(field, pq, time);
        g.phi[q][0] = 1.0 - s;
        g.phi[q][1] = s;
        g.w[q] = 0.5 * len * stretch * kq.radial_factor * kq.detF2 * pq.x();
    }
    return g;
}

inline EdgeGeom edge_geom_eulerian(const MeridionalMesh& cur, const BoundaryEdge& e) {
    EdgeGeom g;
    g.a = e.a;
    g.b = e.b;
    const Vec2 pa = cur.nodes[e.a], pb = cur.nodes[e.b];
    const double len = (pb - pa).norm();
    for (int q = 0; q < 2; ++q) {
        const double s = kGauss2[q];
        const Vec2 pq = (1.0 - s) * pa + s * pb;
        g.phi[q][0] = 1.0 - s;
        g.phi[q][1] = s;
        g.w[q] = 0.5 * len * pq.x();
    }
    return g;
}

} // namespace fe
} // namespace axisim
