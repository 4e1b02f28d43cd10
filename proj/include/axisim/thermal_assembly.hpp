#pragma once

#include <functional>
#include <set>
#include <vector>

#include <Eigen/Sparse>

#include "axisim/em_assembly.hpp"
#include "axisim/fe_geometry.hpp"
#include "axisim/materials.hpp"
#include "axisim/mesh.hpp"

namespace axisim {

// Convection-radiation data applied on every ConvRad edge. Radiation uses
// absolute temperatures internally (degC in, Kelvin inside the law).
struct ConvRadSpec {
    double h = 0.0;          // W/(m^2 K)
    double eps = 0.0;        // emissivity in [0,1]
    double theta_conv = 20.0; // degC
    double theta_rad = 20.0;  // degC
};

struct ThermalBC {
    ConvRadSpec convrad;
    // Theta^DT(p_hat, t) on ThermalDirichlet edges (material description).
    std::function<double(const Vec2&, double)> dirichlet;
};

inline std::vector<int> thermal_dirichlet_nodes(const MeridionalMesh& mesh) {
    std::set<int> s;
    for (const auto& e : mesh.boundary_edges)
        if (e.thermal == ThermalTag::Dirichlet) {
            s.insert(e.a);
            s.insert(e.b);
        }
    return {s.begin(), s.end()};
}

// ---------------------------------------------------------------------------
// Element kernels (residual + Jacobian), shared by the standalone thermal
// system and the monolithic coupled assembler. Implicit Euler in time: the
// material derivative is (theta^n - theta^{n-1})/dt at fixed material node,
// which covers the Eulerian advection term too because mesh nodes move with
// particles.
// ---------------------------------------------------------------------------

template <class AddJ, class AddR>
inline void thermal_element_newton(const fe::ElemGeom& g, const MaterialModel& mat, const double theta_nodal[3],
                                   const double theta_prev[3], double dt, double q_fixed,
                                   const EmDofMap& dofs, AddJ&& addJ, AddR&& addR,
                                   const Complex* h_nodal = nullptr, double joule_scale = 0.0) {
    // Element-constant |J_m|^2 from the centroid gradient operator.
    double j2 = 0.0;
    Vec2 jr = Vec2::Zero(), ji = Vec2::Zero();
    if (h_nodal) {
        for (int j = 0; j < 3; ++j) {
            jr += std::real(h_nodal[j]) * g.Gj[j];
            ji += std::imag(h_nodal[j]) * g.Gj[j];
        }
        j2 = (jr.squaredNorm() + ji.squaredNorm()) * g.joule_geo;
    }

    for (int q = 0; q < fe::kQP; ++q) {
        double theta_q = 0, prev_q = 0;
        Vec2 grad_th = Vec2::Zero();
        for (int j = 0; j < 3; ++j) {
            theta_q += g.phi[q][j] * theta_nodal[j];
            prev_q += g.phi[q][j] * theta_prev[j];
            grad_th += theta_nodal[j] * g.Gth[q][j];
        }
        const double cp = mat.cp(theta_q);
        const double dcp = mat.dcp_dtheta(theta_q);
        const double k = mat.k(theta_q);
        const double dk = mat.dk_dtheta(theta_q);
        const double rate = (theta_q - prev_q) / dt;

        double qdens = q_fixed;
        double sigma = 1.0, dsigma = 0.0;
        if (h_nodal) {
            sigma = mat.sigma(theta_q);
            dsigma = mat.dsigma_dtheta(theta_q);
            qdens += joule_scale * j2 / (2.0 * sigma);
        }

        for (int i = 0; i < 3; ++i) {
            const double res = g.w[q] * (mat.rho0 * cp * rate * g.phi[q][i] * g.th_mass[q] +
                                         k * grad_th.dot(g.Gth[q][i]) * g.th_stiff[q] -
                                         qdens * g.phi[q][i] * g.th_stiff[q]);
            addR(dofs.th[i], res);

            for (int j = 0; j < 3; ++j) {
                double jac = g.w[q] * (mat.rho0 * (cp + dcp * (theta_q - prev_q)) / dt * g.phi[q][j] *
                                           g.phi[q][i] * g.th_mass[q] +
                                       (k * g.Gth[q][j].dot(g.Gth[q][i]) +
                                        dk * g.phi[q][j] * grad_th.dot(g.Gth[q][i])) *
                                           g.th_stiff[q]);
                if (h_nodal)
                    jac += g.w[q] * joule_scale * j2 * dsigma / (2.0 * sigma * sigma) * g.phi[q][j] *
                           g.phi[q][i] * g.th_stiff[q];
                addJ(dofs.th[i], dofs.th[j], jac);

                if (h_nodal) {
                    const double f = -g.w[q] * joule_scale * g.joule_geo / sigma * g.phi[q][i] * g.th_stiff[q];
                    addJ(dofs.th[i], dofs.re[j], f * jr.dot(g.Gj[j]));
                    addJ(dofs.th[i], dofs.im[j], f * ji.dot(g.Gj[j]));
                }
            }
        }
    }
}

template <class AddJ, class AddR>
inline void convrad_edge_newton(const fe::EdgeGeom& eg, const ConvRadSpec& bc, const double theta_a,
                                const double theta_b, int dof_a, int dof_b, AddJ&& addJ, AddR&& addR) {
    const double th[2] = {theta_a, theta_b};
    const int dof[2] = {dof_a, dof_b};
    const double theta_rad_k4 = std::pow(bc.theta_rad + kCelsiusToKelvin, 4);
    for (int q = 0; q < 2; ++q) {
        double theta_q = eg.phi[q][0] * th[0] + eg.phi[q][1] * th[1];
        const double tk = theta_q + kCelsiusToKelvin;
        const double flux = bc.h * (bc.theta_conv - theta_q) + kStefanBoltzmann * bc.eps * (theta_rad_k4 - tk * tk * tk * tk);
        const double dflux = -bc.h - 4.0 * kStefanBoltzmann * bc.eps * tk * tk * tk;
        for (int i = 0; i < 2; ++i) {
            addR(dof[i], -eg.w[q] * flux * eg.phi[q][i]);
            for (int j = 0; j < 2; ++j) addJ(dof[i], dof[j], -eg.w[q] * dflux * eg.phi[q][j] * eg.phi[q][i]);
        }
    }
}

// ---------------------------------------------------------------------------
// Standalone transient thermal system (given per-element spatial source Q,
// W/m^3), for the pure-thermal paths and tests. Newton update: solve
// jacobian * d = -residual, with Dirichlet rows pinned.
// ---------------------------------------------------------------------------

struct ThermalSystem {
    SpMat jacobian;
    Eigen::VectorXd residual;
    std::vector<int> dirichlet; // node ids
};

inline ThermalSystem assemble_thermal(Mode mode, const MeridionalMesh& ref, const MeridionalMesh& cur,
                                      const DisplacementField& field, double time, const MaterialModel& mat,
                                      const Eigen::VectorXd& theta_prev, const Eigen::VectorXd& theta_iter,
                                      double dt, const std::vector<double>& q_elem, const ThermalBC& bc) {
    if (!(dt > 0.0)) throw config_error("thermal assembly: dt must be positive");
    const int n = ref.n_nodes();
    ThermalSystem sys;
    sys.residual = Eigen::VectorXd::Zero(n);
    sys.dirichlet = thermal_dirichlet_nodes(ref);
    std::vector<bool> fixed(n, false);
    for (int d : sys.dirichlet) fixed[d] = true;

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(ref.n_triangles() * 9 + 8 * ref.boundary_edges.size() + n);
    auto addJ = [&](int r, int c, double v) {
        if (!fixed[r]) trip.emplace_back(r, c, v);
    };
    auto addR = [&](int r, double v) {
        if (!fixed[r]) sys.residual[r] += v;
    };

    for (int t = 0; t < ref.n_triangles(); ++t) {
        const fe::ElemGeom g = fe::elem_geom(mode, ref, cur, t, field, time);
        double thn[3], thp[3];
        EmDofMap dofs{};
        for (int i = 0; i < 3; ++i) {
            thn[i] = theta_iter[g.n[i]];
            thp[i] = theta_prev[g.n[i]];
            dofs.th[i] = g.n[i];
            dofs.re[i] = dofs.im[i] = -1;
        }
        thermal_element_newton(g, mat, thn, thp, dt, t < static_cast<int>(q_elem.size()) ? q_elem[t] : 0.0,
                               dofs, addJ, addR);
    }

    for (const auto& e : ref.boundary_edges) {
        if (e.thermal != ThermalTag::ConvRad) continue;
        const fe::EdgeGeom eg = mode == Mode::Lagrangian ? fe::edge_geom_lagrangian(ref, e, field, time)
                                                         : fe::edge_geom_eulerian(cur, e);
        convrad_edge_newton(eg, bc.convrad, theta_iter[e.a], theta_iter[e.b], e.a, e.b, addJ, addR);
    }

    for (int d : sys.dirichlet) {
        if (!bc.dirichlet) throw config_error("mesh has ThermalDirichlet edges but no dirichlet value is set");
        trip.emplace_back(d, d, 1.0);
        sys.residual[d] = theta_iter[d] - bc.dirichlet(ref.nodes[d], time);
    }

    sys.jacobian.resize(n, n);
    sys.jacobian.setFromTriplets(trip.begin(), trip.end());
    return sys;
}

inline ThermalSystem assemble_thermal_lagrangian(const MeridionalMesh& mesh, const DisplacementField& field,
                                                 double time, const MaterialModel& mat,
                                                 const Eigen::VectorXd& theta_prev,
                                                 const Eigen::VectorXd& theta_iter, double dt,
                                                 const std::vector<double>& q_elem, const ThermalBC& bc) {
    return assemble_thermal(Mode::Lagrangian, mesh, mesh, field, time, mat, theta_prev, theta_iter, dt, q_elem, bc);
}

inline ThermalSystem assemble_thermal_eulerian(const MeridionalMesh& pushed, const MeridionalMesh& ref,
                                               const MaterialModel& mat, const Eigen::VectorXd& theta_prev,
                                               const Eigen::VectorXd& theta_iter, double dt,
                                               const std::vector<double>& q_elem, const ThermalBC& bc) {
    return assemble_thermal(Mode::Eulerian, ref, pushed, zero_field(), 0.0, mat, theta_prev, theta_iter, dt,
                            q_elem, bc);
}

// Conduction block alone (no mass, flux or source), assembled at a given
// temperature state; used for structural checks (sign pattern, diagonal
// dominance) and steady problems.
inline SpMat thermal_conduction_matrix(Mode mode, const MeridionalMesh& ref, const MeridionalMesh& cur,
                                       const DisplacementField& field, double time, const MaterialModel& mat,
                                       const Eigen::VectorXd& theta) {
    const int n = ref.n_nodes();
    std::vector<Eigen::Triplet<double>> trip;
    for (int t = 0; t < ref.n_triangles(); ++t) {
        const fe::ElemGeom g = fe::elem_geom(mode, ref, cur, t, field, time);
        for (int q = 0; q < fe::kQP; ++q) {
            double theta_q = 0;
            for (int j = 0; j < 3; ++j) theta_q += g.phi[q][j] * theta[g.n[j]];
            const double k = mat.k(theta_q);
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j)
                    trip.emplace_back(g.n[i], g.n[j],
                                      g.w[q] * k * g.Gth[q][j].dot(g.Gth[q][i]) * g.th_stiff[q]);
        }
    }
    SpMat K(n, n);
    K.setFromTriplets(trip.begin(), trip.end());
    return K;
}

} // namespace axisim
