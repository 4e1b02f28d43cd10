#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "axisim/coupled_solver.hpp"
#include "axisim/mesh.hpp"

namespace axisim {

// Legacy ASCII VTK unstructured grid with the solved fields: temperature and
// |Htilde| on points, |J| and Joule density on cells. Numbers are written
// with 17 significant digits so exported values round-trip exactly.
inline void export_vtk(const MeridionalMesh& mesh, const Eigen::VectorXd& theta, const Eigen::VectorXcd& H,
                       const std::vector<double>& J_abs, const std::vector<double>& Q,
                       const std::string& path, const std::string& title = "axisim fields") {
    std::ofstream os(path);
    if (!os) throw config_error("cannot open VTK file for writing: " + path);
    char buf[96];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    os << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    os << "POINTS " << mesh.n_nodes() << " double\n";
    for (const auto& p : mesh.nodes) os << num(p.x()) << " " << num(p.y()) << " 0\n";
    os << "CELLS " << mesh.n_triangles() << " " << 4 * mesh.n_triangles() << "\n";
    for (const auto& t : mesh.triangles) os << "3 " << t[0] << " " << t[1] << " " << t[2] << "\n";
    os << "CELL_TYPES " << mesh.n_triangles() << "\n";
    for (int t = 0; t < mesh.n_triangles(); ++t) os << "5\n";
    os << "POINT_DATA " << mesh.n_nodes() << "\n";
    os << "SCALARS temperature double 1\nLOOKUP_TABLE default\n";
    for (int i = 0; i < mesh.n_nodes(); ++i) os << num(theta[i]) << "\n";
    os << "SCALARS H_abs double 1\nLOOKUP_TABLE default\n";
    for (int i = 0; i < mesh.n_nodes(); ++i) os << num(std::abs(H[i])) << "\n";
    os << "CELL_DATA " << mesh.n_triangles() << "\n";
    os << "SCALARS J_abs double 1\nLOOKUP_TABLE default\n";
    for (int t = 0; t < mesh.n_triangles(); ++t) os << num(J_abs[t]) << "\n";
    os << "SCALARS joule_density double 1\nLOOKUP_TABLE default\n";
    for (int t = 0; t < mesh.n_triangles(); ++t) os << num(Q[t]) << "\n";
    if (!os) throw config_error("write failed: " + path);
}

// CSV time series: t, per-port Re/Im/|V|, dissipated power, temperature
// extrema. '.' decimal point, ',' separator, no locale dependence.
inline void export_timeseries(const std::vector<CoupledState>& states, const std::string& path) {
    if (states.empty()) throw config_error("export_timeseries: need at least one state");
    std::ofstream os(path);
    if (!os) throw config_error("cannot open CSV file for writing: " + path);
    char buf[96];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    const size_t n_ports = states.front().V_ports.size();
    os << "t";
    for (size_t k = 1; k <= n_ports; ++k)
        os << ",V" << k << "_re,V" << k << "_im,V" << k << "_abs";
    os << ",P_diss,theta_max,theta_min\n";
    for (const auto& s : states) {
        os << num(s.t);
        for (size_t k = 0; k < n_ports; ++k)
            os << "," << num(std::real(s.V_ports[k])) << "," << num(std::imag(s.V_ports[k])) << ","
               << num(std::abs(s.V_ports[k]));
        os << "," << num(s.P_diss) << "," << num(s.theta.maxCoeff()) << "," << num(s.theta.minCoeff()) << "\n";
    }
    if (!os) throw config_error("write failed: " + path);
}

} // namespace axisim
