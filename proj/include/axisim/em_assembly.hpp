#pragma once

#include <algorithm>
#include <complex>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "axisim/fe_geometry.hpp"
#include "axisim/materials.hpp"
#include "axisim/mesh.hpp"

namespace axisim {

using Complex = std::complex<double>;
using SpMatC = Eigen::SparseMatrix<Complex>;
using SpMat = Eigen::SparseMatrix<double>;
using TripletC = Eigen::Triplet<Complex>;

// ---------------------------------------------------------------------------
// Ports and boundary constraints
//
// H-tilde = r * H_theta. For P1 traces the tangential-derivative line
// integrals are exact endpoint differences; with the boundary oriented
// counter-clockwise (domain on the left) the outward-flux functional of a
// boundary edge a->b is jump(x) = x(a) - x(b), and
//     sum over a port run of jump(Htilde) = I_k / (2 pi)
// with I_k the outward current through port k. One multiplier per insulated
// edge enforces jump(Htilde) = 0 there (piecewise-constant multiplier space);
// one multiplier V~_k per current-driven port carries the port potential.
// The reported port voltage is V_k = -V~_k, the drop measured so that
// 1/2 V_k conj(I_k) is the complex power absorbed by the conductor.
// ---------------------------------------------------------------------------

struct Port {
    int k = 1;
    bool current_drive = true;
    Complex amplitude{0.0, 0.0}; // I_k (A) or V_k (V, reported convention)
};

struct PortSpec {
    std::vector<Port> ports;
};

struct PortRun {
    int k = 0;
    bool current_drive = true;
    Complex amplitude{0.0, 0.0};
    std::vector<int> edges; // ordered boundary-edge ids
};

struct PortConstraints {
    std::vector<int> lambda_edges;  // boundary-edge id per lambda unknown
    std::vector<PortRun> runs;      // one per port, ascending k
    std::vector<int> current_ports; // indices into runs, V-unknown order

    int n_lambda() const { return static_cast<int>(lambda_edges.size()); }
    int n_vports() const { return static_cast<int>(current_ports.size()); }
};

inline PortConstraints port_and_multiplier_constraints(const MeridionalMesh& mesh, const PortSpec& spec) {
    PortConstraints pc;
    pc.lambda_edges = mesh.edges_with_em(EmTagKind::Insulated);

    auto ks = mesh.port_indices();
    if (spec.ports.size() != ks.size())
        throw config_error("port spec lists " + std::to_string(spec.ports.size()) + " ports, mesh has " +
                           std::to_string(ks.size()));
    bool any_voltage = false;
    for (int k : ks) {
        const Port* p = nullptr;
        for (const auto& q : spec.ports)
            if (q.k == k) p = &q;
        if (!p) throw config_error("no drive given for port " + std::to_string(k));
        auto runs = boundary_runs(mesh, EmTagKind::PortJ, k); // throws if disconnected
        PortRun run;
        run.k = k;
        run.current_drive = p->current_drive;
        run.amplitude = p->amplitude;
        run.edges = runs.front().edges;
        if (!run.current_drive) any_voltage = true;
        pc.runs.push_back(std::move(run));
    }
    const bool has_ground = !mesh.edges_with_em(EmTagKind::PortE).empty();
    if (has_ground) boundary_runs(mesh, EmTagKind::PortE);
    if (!has_ground && !any_voltage)
        throw config_error("gauge fixing requires a ground port (portE) or a voltage-driven port");
    for (int i = 0; i < static_cast<int>(pc.runs.size()); ++i)
        if (pc.runs[i].current_drive) pc.current_ports.push_back(i);
    return pc;
}

// ---------------------------------------------------------------------------
// Complex eddy-current system (fixed-point operator: mu evaluated at the
// supplied linearization state H_current). Unknown blocks, in order:
// nodal Htilde | lambda per insulated edge | V~ per current-driven port.
// ---------------------------------------------------------------------------

struct EMSystem {
    int n_nodes = 0, n_lambda = 0, n_vports = 0;
    SpMatC A;              // saddle system before Dirichlet elimination
    Eigen::VectorXcd rhs;
    std::vector<int> dirichlet; // axis nodes (Htilde = 0)
    PortConstraints constraints;

    int size() const { return n_nodes + n_lambda + n_vports; }
    int lambda_index(int l) const { return n_nodes + l; }
    int vport_index(int v) const { return n_nodes + n_lambda + v; }
};

namespace detail {

inline void em_volume_triplets(const fe::ElemGeom& g, const MaterialModel& mat, double omega,
                               const Eigen::VectorXcd& h_current, const Eigen::VectorXd& theta,
                               std::vector<TripletC>& trip) {
    for (int q = 0; q < fe::kQP; ++q) {
        double theta_q = 0;
        Complex h_q{0, 0};
        for (int j = 0; j < 3; ++j) {
            theta_q += g.phi[q][j] * theta[g.n[j]];
            h_q += g.phi[q][j] * h_current[g.n[j]];
        }
        const double h_mod = std::abs(h_q) / g.r_eff[q];
        const double mu = mat.mu(h_mod, theta_q).mu;
        const double sigma = mat.sigma(theta_q);
        const Complex mass(0.0, omega * mu * g.em_mass[q]);
        const double stiff = g.em_stiff[q] / sigma;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                const Complex v = g.w[q] * (mass * g.phi[q][i] * g.phi[q][j] +
                                            stiff * g.Gem[q][i].dot(g.Gem[q][j]));
                trip.emplace_back(g.n[i], g.n[j], v);
            }
    }
}

} // namespace detail

inline EMSystem assemble_em(Mode mode, const MeridionalMesh& ref, const MeridionalMesh& cur,
                            const DisplacementField& field, double time, const MaterialModel& mat,
                            const Eigen::VectorXd& theta, const PortConstraints& pc, double omega,
                            const Eigen::VectorXcd& h_current) {
    EMSystem sys;
    sys.n_nodes = ref.n_nodes();
    sys.n_lambda = pc.n_lambda();
    sys.n_vports = pc.n_vports();
    sys.constraints = pc;
    sys.rhs = Eigen::VectorXcd::Zero(sys.size());

    std::vector<TripletC> trip;
    trip.reserve(ref.n_triangles() * 9 + 8 * (pc.n_lambda() + 8));
    for (int t = 0; t < ref.n_triangles(); ++t) {
        const fe::ElemGeom g = fe::elem_geom(mode, ref, cur, t, field, time);
        detail::em_volume_triplets(g, mat, omega, h_current, theta, trip);
    }

    // Insulated-edge multipliers: jump(Htilde) = 0, symmetric columns.
    for (int l = 0; l < pc.n_lambda(); ++l) {
        const auto& e = ref.boundary_edges[pc.lambda_edges[l]];
        const int row = sys.lambda_index(l);
        trip.emplace_back(row, e.a, Complex(1, 0));
        trip.emplace_back(row, e.b, Complex(-1, 0));
        trip.emplace_back(e.a, row, Complex(1, 0));
        trip.emplace_back(e.b, row, Complex(-1, 0));
    }
    // Port rows: current drives get a V~ multiplier; voltage drives go to the RHS.
    int v_id = 0;
    for (const auto& run : pc.runs) {
        if (run.current_drive) {
            const int row = sys.vport_index(v_id++);
            for (int eid : run.edges) {
                const auto& e = ref.boundary_edges[eid];
                trip.emplace_back(row, e.a, Complex(1, 0));
                trip.emplace_back(row, e.b, Complex(-1, 0));
                trip.emplace_back(e.a, row, Complex(1, 0));
                trip.emplace_back(e.b, row, Complex(-1, 0));
            }
            sys.rhs[row] = run.amplitude / (2.0 * M_PI);
        } else {
            for (int eid : run.edges) {
                const auto& e = ref.boundary_edges[eid];
                sys.rhs[e.a] += run.amplitude;
                sys.rhs[e.b] -= run.amplitude;
            }
        }
    }

    sys.A.resize(sys.size(), sys.size());
    sys.A.setFromTriplets(trip.begin(), trip.end());
    sys.dirichlet = ref.axis_nodes();
    return sys;
}

inline EMSystem assemble_em_lagrangian(const MeridionalMesh& mesh, const DisplacementField& field, double time,
                                       const MaterialModel& mat, const Eigen::VectorXd& theta,
                                       const PortConstraints& pc, double omega,
                                       const Eigen::VectorXcd& h_current) {
    return assemble_em(Mode::Lagrangian, mesh, mesh, field, time, mat, theta, pc, omega, h_current);
}

inline EMSystem assemble_em_eulerian(const MeridionalMesh& pushed, const MaterialModel& mat,
                                     const Eigen::VectorXd& theta, const PortConstraints& pc, double omega,
                                     const Eigen::VectorXcd& h_current) {
    return assemble_em(Mode::Eulerian, pushed, pushed, zero_field(), 0.0, mat, theta, pc, omega, h_current);
}

// Direct solve with Htilde = 0 on the axis (rows and columns eliminated).
inline Eigen::VectorXcd solve_em_system(const EMSystem& sys) {
    SpMatC A = sys.A;
    Eigen::VectorXcd rhs = sys.rhs;
    std::vector<bool> fixed(sys.size(), false);
    for (int d : sys.dirichlet) fixed[d] = true;
    for (int col = 0; col < A.outerSize(); ++col)
        for (SpMatC::InnerIterator it(A, col); it; ++it)
            if (fixed[it.row()] || fixed[it.col()]) it.valueRef() = (it.row() == it.col()) ? Complex(1, 0) : Complex(0, 0);
    for (int d : sys.dirichlet) rhs[d] = Complex(0, 0);
    A.makeCompressed();
    Eigen::SparseLU<SpMatC> lu;
    lu.compute(A);
    if (lu.info() != Eigen::Success) throw solver_error("EM system factorization failed", {});
    Eigen::VectorXcd x = lu.solve(rhs);
    if (lu.info() != Eigen::Success) throw solver_error("EM system solve failed", {});
    return x;
}

// ---------------------------------------------------------------------------
// Post-processing
// ---------------------------------------------------------------------------

struct EMPostFields {
    std::vector<double> J_abs; // per triangle, A/m^2 (spatial)
    std::vector<double> Q;     // per triangle, W/m^3 (spatial Joule density)
    double P_diss = 0.0;       // W, integrated over the current configuration
};

// Element-constant spatial current density from the P1 gradient; in the
// reference configuration |J_m|^2 = |N Grad Htilde|^2 / (r_m^2 detF^2) and the
// current-configuration volume element contributes one detF back, so the
// dissipation integrand carries a single 1/detF net power.
inline EMPostFields reconstruct_current_density(Mode mode, const MeridionalMesh& ref, const MeridionalMesh& cur,
                                                const DisplacementField& field, double time,
                                                const MaterialModel& mat, const Eigen::VectorXd& theta,
                                                const Eigen::VectorXcd& h) {
    EMPostFields out;
    out.J_abs.resize(ref.n_triangles());
    out.Q.resize(ref.n_triangles());
    for (int t = 0; t < ref.n_triangles(); ++t) {
        const fe::ElemGeom g = fe::elem_geom(mode, ref, cur, t, field, time);
        Vec2 jr = Vec2::Zero(), ji = Vec2::Zero();
        double theta_c = 0;
        for (int i = 0; i < 3; ++i) {
            jr += std::real(h[g.n[i]]) * g.Gj[i];
            ji += std::imag(h[g.n[i]]) * g.Gj[i];
            theta_c += theta[g.n[i]] / 3.0;
        }
        const double j2 = (jr.squaredNorm() + ji.squaredNorm()) * g.joule_geo;
        out.J_abs[t] = std::sqrt(j2);
        out.Q[t] = j2 / (2.0 * mat.sigma(theta_c));
        out.P_diss += out.Q[t] * g.diss_measure;
    }
    return out;
}

// Sum over a run of the outward-flux functional of Htilde.
inline Complex port_flux_jump(const MeridionalMesh& mesh, const PortRun& run, const Eigen::VectorXcd& h) {
    Complex s{0, 0};
    for (int eid : run.edges) {
        const auto& e = mesh.boundary_edges[eid];
        s += h[e.a] - h[e.b];
    }
    return s;
}

struct PortSolution {
    std::vector<Complex> V; // reported voltages, ascending k
    std::vector<Complex> I; // port currents (outward flux), ascending k
};

// Voltages of current-driven ports come from the saddle multipliers
// (negated); currents of voltage-driven ports from the discrete flux.
inline PortSolution recover_port_quantities(const MeridionalMesh& mesh, const PortConstraints& pc,
                                            const Eigen::VectorXcd& h, const std::vector<Complex>& v_tilde) {
    PortSolution out;
    int v_id = 0;
    for (const auto& run : pc.runs) {
        if (run.current_drive) {
            out.I.push_back(run.amplitude);
            out.V.push_back(-v_tilde[v_id++]);
        } else {
            out.V.push_back(run.amplitude);
            out.I.push_back(2.0 * M_PI * port_flux_jump(mesh, run, h));
        }
    }
    return out;
}

// S = 1/2 sum_k V_k conj(I_k), positive real part = power absorbed.
inline Complex complex_port_power(const std::vector<Complex>& V, const std::vector<Complex>& I) {
    Complex s{0, 0};
    for (size_t k = 0; k < V.size(); ++k) s += 0.5 * V[k] * std::conj(I[k]);
    return s;
}

// ---------------------------------------------------------------------------
// Newton kernel over the real split [Re H, Im H] with full material
// linearization: d mu/d|H| through |H| = |Htilde|/r_eff (gradient taken as 0
// below the guard threshold) and d/dTheta through mu and sigma.
// ---------------------------------------------------------------------------

struct EmDofMap {
    int re[3], im[3], th[3]; // global dof ids of this element's nodes
};

template <class AddJ, class AddR>
inline void em_element_newton(const fe::ElemGeom& g, const MaterialModel& mat, double omega,
                              const Complex h_nodal[3], const double theta_nodal[3], double h_guard,
                              const EmDofMap& dofs, AddJ&& addJ, AddR&& addR) {
    for (int q = 0; q < fe::kQP; ++q) {
        Complex h_q{0, 0};
        double theta_q = 0;
        Vec2 gh_re = Vec2::Zero(), gh_im = Vec2::Zero();
        for (int j = 0; j < 3; ++j) {
            h_q += g.phi[q][j] * h_nodal[j];
            theta_q += g.phi[q][j] * theta_nodal[j];
            gh_re += std::real(h_nodal[j]) * g.Gem[q][j];
            gh_im += std::imag(h_nodal[j]) * g.Gem[q][j];
        }
        const double abs_h = std::abs(h_q);
        const double h_mod = abs_h / g.r_eff[q];
        const MuEval mu = mat.mu(h_mod, theta_q);
        const double sigma = mat.sigma(theta_q);
        const double dsigma = mat.dsigma_dtheta(theta_q);

        const Complex imass(0.0, omega * g.em_mass[q]);
        const double stiff = g.em_stiff[q] / sigma;
        const bool guarded = abs_h < h_guard || abs_h == 0.0;

        for (int i = 0; i < 3; ++i) {
            const Complex gh_gi(gh_re.dot(g.Gem[q][i]), gh_im.dot(g.Gem[q][i]));
            const Complex res = g.w[q] * (imass * mu.mu * h_q * g.phi[q][i] + stiff * gh_gi);
            addR(dofs.re[i], std::real(res));
            addR(dofs.im[i], std::imag(res));

            for (int j = 0; j < 3; ++j) {
                // complex-linear part
                const Complex lin = g.w[q] * (imass * mu.mu * g.phi[q][i] * g.phi[q][j] +
                                              stiff * g.Gem[q][i].dot(g.Gem[q][j]));
                addJ(dofs.re[i], dofs.re[j], std::real(lin));
                addJ(dofs.re[i], dofs.im[j], -std::imag(lin));
                addJ(dofs.im[i], dofs.re[j], std::imag(lin));
                addJ(dofs.im[i], dofs.im[j], std::real(lin));

                // d mu/d|H| correction (non-holomorphic)
                const Complex corr = g.w[q] * imass * mu.dmu_dH * h_q * g.phi[q][i];
                const double s_re = guarded ? 0.0 : std::real(h_q) * g.phi[q][j] / (abs_h * g.r_eff[q]);
                const double s_im = guarded ? 0.0 : std::imag(h_q) * g.phi[q][j] / (abs_h * g.r_eff[q]);
                addJ(dofs.re[i], dofs.re[j], std::real(corr) * s_re);
                addJ(dofs.im[i], dofs.re[j], std::imag(corr) * s_re);
                addJ(dofs.re[i], dofs.im[j], std::real(corr) * s_im);
                addJ(dofs.im[i], dofs.im[j], std::imag(corr) * s_im);

                // temperature coupling through mu and sigma
                const Complex dth = g.w[q] * (imass * mu.dmu_dTheta * h_q * g.phi[q][i] * g.phi[q][j] -
                                              gh_gi * g.em_stiff[q] * dsigma / (sigma * sigma) * g.phi[q][j]);
                addJ(dofs.re[i], dofs.th[j], std::real(dth));
                addJ(dofs.im[i], dofs.th[j], std::imag(dth));
            }
        }
    }
}

} // namespace axisim
