#pragma once

#include <complex>
#include <functional>
#include <iostream>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "axisim/em_assembly.hpp"
#include "axisim/thermal_assembly.hpp"

namespace axisim {

// ---------------------------------------------------------------------------
// Generic damped Newton (sparse direct linear solves, backtracking line
// search halving the step while the residual norm does not decrease).
// ---------------------------------------------------------------------------

struct NewtonOptions {
    double tol = 1e-8;       // relative to the initial residual norm
    double abs_tol = 1e-12;  // absolute floor
    int max_iter = 25;
    double damping = 0.5;    // backtracking factor
    double min_step = 1.0 / 64;
};

struct NewtonResult {
    Eigen::VectorXd x;
    bool converged = false;
    int iterations = 0;
    std::vector<double> residual_norms;
};

template <class ResidualFn, class JacobianFn>
NewtonResult newton_solve(ResidualFn&& residual_fn, JacobianFn&& jacobian_fn, Eigen::VectorXd x0,
                          const NewtonOptions& opt = {}) {
    NewtonResult out;
    out.x = std::move(x0);
    Eigen::VectorXd r = residual_fn(out.x);
    double rn = r.norm();
    const double r0 = rn;
    out.residual_norms.push_back(rn);
    Eigen::SparseLU<SpMat> lu;
    for (int it = 0; it < opt.max_iter; ++it) {
        if (rn <= opt.abs_tol || rn <= opt.tol * r0) {
            out.converged = true;
            return out;
        }
        SpMat J = jacobian_fn(out.x);
        J.makeCompressed();
        lu.compute(J);
        if (lu.info() != Eigen::Success) throw solver_error("newton_solve: factorization failed", out.residual_norms);
        const Eigen::VectorXd dx = lu.solve(-r);
        double s = 1.0;
        Eigen::VectorXd x_try, r_try;
        double rn_try = rn;
        while (true) {
            x_try = out.x + s * dx;
            r_try = residual_fn(x_try);
            rn_try = r_try.norm();
            if (rn_try < rn || s <= opt.min_step) break;
            s *= opt.damping;
        }
        out.x = std::move(x_try);
        r = std::move(r_try);
        rn = rn_try;
        out.iterations = it + 1;
        out.residual_norms.push_back(rn);
    }
    out.converged = rn <= opt.abs_tol || rn <= opt.tol * r0;
    return out;
}

// ---------------------------------------------------------------------------
// Coupled problem and state
// ---------------------------------------------------------------------------

struct SolverConfig {
    double dt = 0.1;
    double t_end = 20.0;
    double newton_tol = 1e-8;
    double newton_abs_tol = 1e-12;
    int newton_max_iter = 25;
    double damping = 0.5;
    double min_step = 1.0 / 64;
    int max_dt_halvings = 3;
    Mode mode = Mode::Lagrangian;
};

struct CoupledProblem {
    MeridionalMesh mesh;
    DisplacementField motion;
    MaterialModel materials;
    PortSpec ports;
    double omega = 2.0 * M_PI * 500.0;
    ThermalBC thermal;
    double theta0 = 20.0;
};

struct CoupledState {
    double t = 0.0;
    Eigen::VectorXcd H;            // nodal Htilde (A)
    Eigen::VectorXcd lambda;       // per insulated edge (V)
    std::vector<Complex> V_ports;  // reported voltage per port, ascending k (V)
    std::vector<Complex> I_ports;  // port currents, ascending k (A)
    Eigen::VectorXd theta;         // nodal temperature (degC)

    // diagnostics
    double P_diss = 0.0;
    Complex S{0.0, 0.0};
    int newton_iters = 0;
    std::vector<double> residual_norms;
};

// ---------------------------------------------------------------------------
// Monolithic assembler over the real unknown vector
//   [Re H, Im H interleaved | Re/Im lambda | Re/Im V~ | Theta],
// with axis nodes (H = 0) and ThermalDirichlet nodes pinned by identity rows.
// The sparsity pattern is state-independent (all couplings are always
// emitted), so the pattern, the scatter slots and the LU symbolic analysis
// are computed once per run.
// ---------------------------------------------------------------------------

class CoupledAssembler {
public:
    CoupledAssembler(const MeridionalMesh& mesh, const DisplacementField& motion, const MaterialModel& mat,
                     const PortConstraints& pc, double omega, const ThermalBC& bc, Mode mode)
        : mesh_(mesh), motion_(motion), mat_(mat), pc_(pc), omega_(omega), bc_(bc), mode_(mode) {
        n_ = mesh_.n_nodes();
        nl_ = pc_.n_lambda();
        nv_ = pc_.n_vports();
        size_ = 3 * n_ + 2 * nl_ + 2 * nv_;

        fixed_base_.assign(size_, false);
        for (int d : mesh_.axis_nodes()) {
            fixed_base_[re(d)] = true;
            fixed_base_[im(d)] = true;
        }
        diri_nodes_ = thermal_dirichlet_nodes(mesh_);
        for (int d : diri_nodes_) fixed_base_[th(d)] = true;

        build_pattern();
    }

    int size() const { return size_; }
    int re(int j) const { return 2 * j; }
    int im(int j) const { return 2 * j + 1; }
    int lam_re(int l) const { return 2 * n_ + 2 * l; }
    int lam_im(int l) const { return 2 * n_ + 2 * l + 1; }
    int v_re(int p) const { return 2 * n_ + 2 * nl_ + 2 * p; }
    int v_im(int p) const { return 2 * n_ + 2 * nl_ + 2 * p + 1; }
    int th(int j) const { return 2 * n_ + 2 * nl_ + 2 * nv_ + j; }

    const MeridionalMesh& pushed() const { return mode_ == Mode::Eulerian ? pushed_ : mesh_; }

    void set_time(double t) {
        time_ = t;
        if (mode_ == Mode::Eulerian) pushed_ = pushed_mesh(mesh_, motion_, t);
        geoms_.clear();
        geoms_.reserve(mesh_.n_triangles());
        for (int e = 0; e < mesh_.n_triangles(); ++e)
            geoms_.push_back(fe::elem_geom(mode_, mesh_, pushed_, e, motion_, t));
        edge_geoms_.clear();
        convrad_edges_.clear();
        for (int b = 0; b < static_cast<int>(mesh_.boundary_edges.size()); ++b) {
            const auto& e = mesh_.boundary_edges[b];
            if (e.thermal != ThermalTag::ConvRad) continue;
            convrad_edges_.push_back(b);
            edge_geoms_.push_back(mode_ == Mode::Lagrangian ? fe::edge_geom_lagrangian(mesh_, e, motion_, t)
                                                            : fe::edge_geom_eulerian(pushed_, e));
        }
        diri_values_.resize(diri_nodes_.size());
        for (size_t i = 0; i < diri_nodes_.size(); ++i) {
            if (!bc_.dirichlet) throw config_error("ThermalDirichlet edges present but no dirichlet value set");
            diri_values_[i] = bc_.dirichlet(mesh_.nodes[diri_nodes_[i]], t);
        }
    }

    // Residual at x (theta^{n-1} from theta_prev); fills the cached Jacobian
    // values when with_jacobian. freeze_thermal pins all temperatures to
    // freeze_target (the t = 0 electromagnetic solve).
    void assemble(const Eigen::VectorXd& x, const Eigen::VectorXd& theta_prev, double dt, bool freeze_thermal,
                  const Eigen::VectorXd& freeze_target, bool with_jacobian, Eigen::VectorXd& residual) {
        const std::vector<bool>& fixed = freeze_thermal ? fixed_frozen_ : fixed_base_;
        residual.setZero(size_);
        double* vals = J_.valuePtr();
        if (with_jacobian) std::fill(vals, vals + J_.nonZeros(), 0.0);

        double h_max = 0.0;
        for (int j = 0; j < n_; ++j) h_max = std::max(h_max, std::hypot(x[re(j)], x[im(j)]));
        const double h_guard = 1e-12 * h_max;

        double localJ[81];
        double localR[9];
        EmDofMap local{};
        for (int i = 0; i < 3; ++i) {
            local.re[i] = 3 * i;
            local.im[i] = 3 * i + 1;
            local.th[i] = 3 * i + 2;
        }
        auto addJl = [&](int r, int c, double v) { localJ[9 * r + c] += v; };
        auto addRl = [&](int r, double v) { localR[r] += v; };

        for (int e = 0; e < mesh_.n_triangles(); ++e) {
            const fe::ElemGeom& g = geoms_[e];
            Complex hn[3];
            double thn[3], thp[3];
            int gdof[9];
            for (int i = 0; i < 3; ++i) {
                const int node = g.n[i];
                hn[i] = Complex(x[re(node)], x[im(node)]);
                thn[i] = x[th(node)];
                thp[i] = theta_prev[node];
                gdof[3 * i] = re(node);
                gdof[3 * i + 1] = im(node);
                gdof[3 * i + 2] = th(node);
            }
            std::fill(localJ, localJ + 81, 0.0);
            std::fill(localR, localR + 9, 0.0);
            em_element_newton(g, mat_, omega_, hn, thn, h_guard, local, addJl, addRl);
            thermal_element_newton(g, mat_, thn, thp, dt, 0.0, local, addJl, addRl, hn, 1.0);

            const int* slots = &elem_slots_[81 * e];
            for (int lr = 0; lr < 9; ++lr) {
                const int gr = gdof[lr];
                if (fixed[gr]) continue;
                residual[gr] += localR[lr];
                if (with_jacobian)
                    for (int lc = 0; lc < 9; ++lc) vals[slots[9 * lr + lc]] += localJ[9 * lr + lc];
            }
        }

        // Convection-radiation edges (thermal rows only).
        for (size_t ce = 0; ce < convrad_edges_.size(); ++ce) {
            const auto& e = mesh_.boundary_edges[convrad_edges_[ce]];
            const int da = th(e.a), db = th(e.b);
            double localJ4[4] = {0, 0, 0, 0};
            double localR2[2] = {0, 0};
            auto addJe = [&](int r, int c, double v) { localJ4[2 * (r == db) + (c == db)] += v; };
            auto addRe = [&](int r, double v) { localR2[r == db] += v; };
            convrad_edge_newton(edge_geoms_[ce], bc_.convrad, x[da], x[db], da, db, addJe, addRe);
            const int* s = &edge_slots_[4 * ce];
            if (!fixed[da]) {
                residual[da] += localR2[0];
                if (with_jacobian) {
                    vals[s[0]] += localJ4[0];
                    vals[s[1]] += localJ4[1];
                }
            }
            if (!fixed[db]) {
                residual[db] += localR2[1];
                if (with_jacobian) {
                    vals[s[2]] += localJ4[2];
                    vals[s[3]] += localJ4[3];
                }
            }
        }

        // Multiplier rows and columns, and voltage-drive loads.
        auto jump_pair = [&](int a, int b, int row_re, int row_im, double mult_re, double mult_im) {
            // residual of constraint rows: jump(H) terms
            if (!fixed[row_re]) residual[row_re] += x[re(a)] - x[re(b)];
            if (!fixed[row_im]) residual[row_im] += x[im(a)] - x[im(b)];
            // residual of EM rows: + multiplier * jump(phi)
            if (!fixed[re(a)]) residual[re(a)] += mult_re;
            if (!fixed[re(b)]) residual[re(b)] -= mult_re;
            if (!fixed[im(a)]) residual[im(a)] += mult_im;
            if (!fixed[im(b)]) residual[im(b)] -= mult_im;
        };
        for (int l = 0; l < nl_; ++l) {
            const auto& e = mesh_.boundary_edges[pc_.lambda_edges[l]];
            jump_pair(e.a, e.b, lam_re(l), lam_im(l), x[lam_re(l)], x[lam_im(l)]);
        }
        int v_id = 0;
        for (const auto& run : pc_.runs) {
            if (run.current_drive) {
                const int p = v_id++;
                for (int eid : run.edges) {
                    const auto& e = mesh_.boundary_edges[eid];
                    jump_pair(e.a, e.b, v_re(p), v_im(p), x[v_re(p)], x[v_im(p)]);
                }
                if (!fixed[v_re(p)]) residual[v_re(p)] -= std::real(run.amplitude) / (2.0 * M_PI);
                if (!fixed[v_im(p)]) residual[v_im(p)] -= std::imag(run.amplitude) / (2.0 * M_PI);
            } else {
                // given (reported-convention) voltage: residual_i -= V jump(phi_i)
                for (int eid : run.edges) {
                    const auto& e = mesh_.boundary_edges[eid];
                    if (!fixed[re(e.a)]) residual[re(e.a)] -= std::real(run.amplitude);
                    if (!fixed[re(e.b)]) residual[re(e.b)] += std::real(run.amplitude);
                    if (!fixed[im(e.a)]) residual[im(e.a)] -= std::imag(run.amplitude);
                    if (!fixed[im(e.b)]) residual[im(e.b)] += std::imag(run.amplitude);
                }
            }
        }
        if (with_jacobian)
            for (const auto& [slot, v] : constraint_slots_) vals[slot] += v;

        // Pinned rows: identity diagonal, residual x - target.
        for (int d = 0; d < size_; ++d) {
            if (!fixed[d]) continue;
            if (with_jacobian) vals[diag_slots_[d]] = 1.0;
            residual[d] = x[d];
        }
        for (size_t i = 0; i < diri_nodes_.size(); ++i)
            if (!freeze_thermal) residual[th(diri_nodes_[i])] = x[th(diri_nodes_[i])] - diri_values_[i];
        if (freeze_thermal)
            for (int j = 0; j < n_; ++j) residual[th(j)] = x[th(j)] - freeze_target[j];
    }

    SpMat& jacobian() { return J_; }
    double time() const { return time_; }

private:
    void build_pattern() {
        fixed_frozen_ = fixed_base_;
        for (int j = 0; j < n_; ++j) fixed_frozen_[th(j)] = true;

        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(81 * mesh_.n_triangles() + 16 * (nl_ + nv_) + size_);
        for (const auto& tri : mesh_.triangles) {
            int gdof[9];
            for (int i = 0; i < 3; ++i) {
                gdof[3 * i] = re(tri[i]);
                gdof[3 * i + 1] = im(tri[i]);
                gdof[3 * i + 2] = th(tri[i]);
            }
            for (int a = 0; a < 9; ++a)
                for (int b = 0; b < 9; ++b) trip.emplace_back(gdof[a], gdof[b], 1.0);
        }
        auto cpair = [&](int a, int b, int row_re, int row_im) {
            trip.emplace_back(row_re, re(a), 1.0);
            trip.emplace_back(row_re, re(b), 1.0);
            trip.emplace_back(row_im, im(a), 1.0);
            trip.emplace_back(row_im, im(b), 1.0);
            trip.emplace_back(re(a), row_re, 1.0);
            trip.emplace_back(re(b), row_re, 1.0);
            trip.emplace_back(im(a), row_im, 1.0);
            trip.emplace_back(im(b), row_im, 1.0);
        };
        for (int l = 0; l < nl_; ++l) {
            const auto& e = mesh_.boundary_edges[pc_.lambda_edges[l]];
            cpair(e.a, e.b, lam_re(l), lam_im(l));
        }
        int v_id = 0;
        for (const auto& run : pc_.runs) {
            if (!run.current_drive) continue;
            for (int eid : run.edges) {
                const auto& e = mesh_.boundary_edges[eid];
                cpair(e.a, e.b, v_re(v_id), v_im(v_id));
            }
            ++v_id;
        }
        for (int d = 0; d < size_; ++d) trip.emplace_back(d, d, 0.0);

        J_.resize(size_, size_);
        J_.setFromTriplets(trip.begin(), trip.end());
        J_.makeCompressed();

        // Scatter slots into the CSC value array.
        auto slot = [&](int r, int c) {
            const int* outer = J_.outerIndexPtr();
            const int* inner = J_.innerIndexPtr();
            int lo = outer[c], hi = outer[c + 1];
            while (lo < hi) {
                int mid = (lo + hi) / 2;
                if (inner[mid] < r)
                    lo = mid + 1;
                else
                    hi = mid;
            }
            return lo;
        };
        elem_slots_.resize(81 * mesh_.n_triangles());
        for (int e = 0; e < mesh_.n_triangles(); ++e) {
            const auto& tri = mesh_.triangles[e];
            int gdof[9];
            for (int i = 0; i < 3; ++i) {
                gdof[3 * i] = re(tri[i]);
                gdof[3 * i + 1] = im(tri[i]);
                gdof[3 * i + 2] = th(tri[i]);
            }
            for (int a = 0; a < 9; ++a)
                for (int b = 0; b < 9; ++b) elem_slots_[81 * e + 9 * a + b] = slot(gdof[a], gdof[b]);
        }
        edge_slots_.clear();
        for (const auto& e : mesh_.boundary_edges) {
            if (e.thermal != ThermalTag::ConvRad) continue;
            edge_slots_.push_back(slot(th(e.a), th(e.a)));
            edge_slots_.push_back(slot(th(e.a), th(e.b)));
            edge_slots_.push_back(slot(th(e.b), th(e.a)));
            edge_slots_.push_back(slot(th(e.b), th(e.b)));
        }

        constraint_slots_.clear();
        auto cvals = [&](int a, int b, int row_re, int row_im) {
            // constraint rows are never Dirichlet; the EM-row entries are
            // skipped when the node is pinned (axis).
            constraint_slots_.emplace_back(slot(row_re, re(a)), 1.0);
            constraint_slots_.emplace_back(slot(row_re, re(b)), -1.0);
            constraint_slots_.emplace_back(slot(row_im, im(a)), 1.0);
            constraint_slots_.emplace_back(slot(row_im, im(b)), -1.0);
            auto push = [&](int r, int c, double v) {
                if (!fixed_base_[r]) constraint_slots_.emplace_back(slot(r, c), v);
            };
            push(re(a), row_re, 1.0);
            push(re(b), row_re, -1.0);
            push(im(a), row_im, 1.0);
            push(im(b), row_im, -1.0);
        };
        for (int l = 0; l < nl_; ++l) {
            const auto& e = mesh_.boundary_edges[pc_.lambda_edges[l]];
            cvals(e.a, e.b, lam_re(l), lam_im(l));
        }
        v_id = 0;
        for (const auto& run : pc_.runs) {
            if (!run.current_drive) continue;
            for (int eid : run.edges) {
                const auto& e = mesh_.boundary_edges[eid];
                cvals(e.a, e.b, v_re(v_id), v_im(v_id));
            }
            ++v_id;
        }
        diag_slots_.resize(size_);
        for (int d = 0; d < size_; ++d) diag_slots_[d] = slot(d, d);
    }

    const MeridionalMesh& mesh_;
    DisplacementField motion_;
    MaterialModel mat_;
    PortConstraints pc_;
    double omega_;
    ThermalBC bc_;
    Mode mode_;

    int n_ = 0, nl_ = 0, nv_ = 0, size_ = 0;
    std::vector<bool> fixed_base_, fixed_frozen_;
    std::vector<int> diri_nodes_;
    std::vector<double> diri_values_;

    SpMat J_;
    std::vector<int> elem_slots_;
    std::vector<int> edge_slots_;
    std::vector<std::pair<int, double>> constraint_slots_;
    std::vector<int> diag_slots_;

    MeridionalMesh pushed_;
    std::vector<fe::ElemGeom> geoms_;
    std::vector<fe::EdgeGeom> edge_geoms_;
    std::vector<int> convrad_edges_;
    double time_ = 0.0;
};

// ---------------------------------------------------------------------------
// Time stepper
// ---------------------------------------------------------------------------

class CoupledStepper {
public:
    CoupledStepper(const CoupledProblem& problem, const SolverConfig& config)
        : prob_(problem), cfg_(config),
          pc_(port_and_multiplier_constraints(prob_.mesh, prob_.ports)),
          asm_(prob_.mesh, prob_.motion, prob_.materials, pc_, prob_.omega, prob_.thermal, config.mode) {
        if (!(cfg_.dt > 0.0)) throw config_error("solver dt must be positive");
        if (!(cfg_.newton_tol > 0.0) || !(cfg_.newton_abs_tol > 0.0))
            throw config_error("newton tolerances must be positive");
    }

    const PortConstraints& constraints() const { return pc_; }
    const MeridionalMesh& current_mesh() const { return asm_.pushed(); }

    // Theta = theta0 everywhere; the electromagnetic subsystem is solved at
    // the t = 0 geometry so the first Joule source is consistent.
    CoupledState initial_state() {
        asm_.set_time(0.0);
        Eigen::VectorXd x = Eigen::VectorXd::Zero(asm_.size());
        const int n = prob_.mesh.n_nodes();
        Eigen::VectorXd theta0v = Eigen::VectorXd::Constant(n, prob_.theta0);
        for (int j = 0; j < n; ++j) x[asm_.th(j)] = prob_.theta0;
        auto hist = newton(x, theta0v, 1.0, true, theta0v);
        return make_state(0.0, x, hist);
    }

    CoupledState step(const CoupledState& prev, double t_new) {
        const double dt = t_new - prev.t;
        if (!(dt > 0.0)) throw config_error("time step must advance time");
        asm_.set_time(t_new);
        Eigen::VectorXd x = pack(prev);
        Eigen::VectorXd dummy;
        auto hist = newton(x, prev.theta, dt, false, dummy);
        return make_state(t_new, x, hist);
    }

private:
    struct NewtonHistory {
        int iterations = 0;
        std::vector<double> norms;
    };

    NewtonHistory newton(Eigen::VectorXd& x, const Eigen::VectorXd& theta_prev, double dt, bool freeze,
                         const Eigen::VectorXd& freeze_target) {
        NewtonHistory hist;
        Eigen::VectorXd r(asm_.size()), r_try(asm_.size());
        asm_.assemble(x, theta_prev, dt, freeze, freeze_target, false, r);
        double rn = r.norm();
        const double r0 = rn;
        hist.norms.push_back(rn);
        for (int it = 0; it < cfg_.newton_max_iter; ++it) {
            if (rn <= cfg_.newton_abs_tol || rn <= cfg_.newton_tol * r0) return hist;
            asm_.assemble(x, theta_prev, dt, freeze, freeze_target, true, r);
            if (!analyzed_) {
                lu_.analyzePattern(asm_.jacobian());
                analyzed_ = true;
            }
            lu_.factorize(asm_.jacobian());
            if (lu_.info() != Eigen::Success) throw solver_error("coupled Jacobian factorization failed", hist.norms);
            const Eigen::VectorXd dx = lu_.solve(-r);
            double s = 1.0;
            Eigen::VectorXd x_try;
            double rn_try;
            while (true) {
                x_try = x + s * dx;
                asm_.assemble(x_try, theta_prev, dt, freeze, freeze_target, false, r_try);
                rn_try = r_try.norm();
                if (rn_try < rn || s <= cfg_.min_step) break;
                s *= cfg_.damping;
            }
            x = std::move(x_try);
            rn = rn_try;
            hist.iterations = it + 1;
            hist.norms.push_back(rn);
        }
        if (!(rn <= cfg_.newton_abs_tol || rn <= cfg_.newton_tol * hist.norms.front()))
            throw solver_error("Newton did not converge in " + std::to_string(cfg_.newton_max_iter) +
                                   " iterations (residual " + std::to_string(rn) + ")",
                               hist.norms);
        return hist;
    }

    Eigen::VectorXd pack(const CoupledState& s) const {
        Eigen::VectorXd x = Eigen::VectorXd::Zero(asm_.size());
        const int n = prob_.mesh.n_nodes();
        for (int j = 0; j < n; ++j) {
            x[2 * j] = std::real(s.H[j]);
            x[2 * j + 1] = std::imag(s.H[j]);
            x[asm_.th(j)] = s.theta[j];
        }
        for (int l = 0; l < pc_.n_lambda(); ++l) {
            x[asm_.lam_re(l)] = std::real(s.lambda[l]);
            x[asm_.lam_im(l)] = std::imag(s.lambda[l]);
        }
        int v_id = 0;
        for (const auto& run : pc_.runs) {
            if (!run.current_drive) continue;
            // stored V~ = -reported V
            x[asm_.v_re(v_id)] = -std::real(s.V_ports[run.k - 1]);
            x[asm_.v_im(v_id)] = -std::imag(s.V_ports[run.k - 1]);
            ++v_id;
        }
        return x;
    }

    CoupledState make_state(double t, const Eigen::VectorXd& x, const NewtonHistory& hist) {
        CoupledState s;
        s.t = t;
        const int n = prob_.mesh.n_nodes();
        s.H.resize(n);
        s.theta.resize(n);
        for (int j = 0; j < n; ++j) {
            s.H[j] = Complex(x[2 * j], x[2 * j + 1]);
            s.theta[j] = x[asm_.th(j)];
        }
        s.lambda.resize(pc_.n_lambda());
        for (int l = 0; l < pc_.n_lambda(); ++l) s.lambda[l] = Complex(x[asm_.lam_re(l)], x[asm_.lam_im(l)]);
        std::vector<Complex> v_tilde(pc_.n_vports());
        for (int p = 0; p < pc_.n_vports(); ++p) v_tilde[p] = Complex(x[asm_.v_re(p)], x[asm_.v_im(p)]);

        const PortSolution ps = recover_port_quantities(prob_.mesh, pc_, s.H, v_tilde);
        s.V_ports = ps.V;
        s.I_ports = ps.I;
        const EMPostFields post = reconstruct_current_density(cfg_.mode, prob_.mesh, asm_.pushed(), prob_.motion,
                                                              t, prob_.materials, s.theta, s.H);
        s.P_diss = post.P_diss;
        s.S = complex_port_power(ps.V, ps.I);
        s.newton_iters = hist.iterations;
        s.residual_norms = hist.norms;
        return s;
    }

    CoupledProblem prob_;
    SolverConfig cfg_;
    PortConstraints pc_;
    CoupledAssembler asm_;
    Eigen::SparseLU<SpMat> lu_;
    bool analyzed_ = false;
};

// ---------------------------------------------------------------------------
// Time marching with automatic dt halving on step failure (up to
// max_dt_halvings levels, then the failure propagates).
// ---------------------------------------------------------------------------

namespace detail {

inline CoupledState advance(CoupledStepper& stepper, const CoupledState& from, double t_target, int depth,
                            int max_depth) {
    try {
        return stepper.step(from, t_target);
    } catch (const solver_error&) {
        if (depth >= max_depth) throw;
        const double t_mid = 0.5 * (from.t + t_target);
        CoupledState mid = advance(stepper, from, t_mid, depth + 1, max_depth);
        return advance(stepper, mid, t_target, depth + 1, max_depth);
    }
}

} // namespace detail

// All states including t = 0; sink (when given) is called after each state.
inline std::vector<CoupledState> run_simulation(const CoupledProblem& problem, const SolverConfig& config,
                                                const std::function<void(const CoupledState&)>& sink = {}) {
    CoupledStepper stepper(problem, config);
    std::vector<CoupledState> states;
    states.push_back(stepper.initial_state());
    if (sink) sink(states.back());
    const int n_steps = static_cast<int>(std::llround(config.t_end / config.dt));
    for (int i = 1; i <= n_steps; ++i) {
        const double t = std::min(i * config.dt, config.t_end);
        states.push_back(detail::advance(stepper, states.back(), t, 0, config.max_dt_halvings));
        if (sink) sink(states.back());
    }
    if (problem.materials.clamp_hit)
        std::cerr << "note: material laws were evaluated outside [0,1500] degC and clamped\n";
    return states;
}

} // namespace axisim
