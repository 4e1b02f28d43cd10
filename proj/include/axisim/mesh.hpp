#pragma once

#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "axisim/errors.hpp"

namespace axisim {

using Vec2 = Eigen::Vector2d;

// Electromagnetic boundary tags. PortJ carries the port index k >= 1.
enum class EmTagKind { Axis, PortJ, PortE, Insulated };

struct EmTag {
    EmTagKind kind = EmTagKind::Insulated;
    int port = 0; // for PortJ only

    static EmTag axis() { return {EmTagKind::Axis, 0}; }
    static EmTag port_j(int k) { return {EmTagKind::PortJ, k}; }
    static EmTag port_e() { return {EmTagKind::PortE, 0}; }
    static EmTag insulated() { return {EmTagKind::Insulated, 0}; }

    bool operator==(const EmTag& o) const { return kind == o.kind && port == o.port; }
};

// Thermal boundary tags; None means zero flux (used on the axis).
enum class ThermalTag { Dirichlet, ConvRad, None };

struct BoundaryEdge {
    int a = -1, b = -1; // a -> b counter-clockwise around the domain
    EmTag em;
    ThermalTag thermal = ThermalTag::None;
};

// Triangulated meridional section of the reference configuration.
// Triangles are counter-clockwise; boundary edges traverse the domain
// boundary counter-clockwise (domain on the left of a -> b).
struct MeridionalMesh {
    std::vector<Vec2> nodes;                  // (r_m, z_m), meters
    std::vector<std::array<int, 3>> triangles;
    std::vector<BoundaryEdge> boundary_edges;

    int n_nodes() const { return static_cast<int>(nodes.size()); }
    int n_triangles() const { return static_cast<int>(triangles.size()); }

    double triangle_area(int t) const {
        const auto& tri = triangles[t];
        const Vec2& p0 = nodes[tri[0]];
        const Vec2& p1 = nodes[tri[1]];
        const Vec2& p2 = nodes[tri[2]];
        return 0.5 * ((p1.x() - p0.x()) * (p2.y() - p0.y()) - (p2.x() - p0.x()) * (p1.y() - p0.y()));
    }

    Vec2 triangle_centroid(int t) const {
        const auto& tri = triangles[t];
        return (nodes[tri[0]] + nodes[tri[1]] + nodes[tri[2]]) / 3.0;
    }

    double total_area() const {
        double a = 0;
        for (int t = 0; t < n_triangles(); ++t) a += triangle_area(t);
        return a;
    }

    std::vector<int> axis_nodes() const {
        std::set<int> s;
        for (const auto& e : boundary_edges)
            if (e.em.kind == EmTagKind::Axis) {
                s.insert(e.a);
                s.insert(e.b);
            }
        return {s.begin(), s.end()};
    }

    std::vector<int> edges_with_em(EmTagKind kind, int port = 0) const {
        std::vector<int> out;
        for (int i = 0; i < static_cast<int>(boundary_edges.size()); ++i) {
            const auto& e = boundary_edges[i];
            if (e.em.kind == kind && (kind != EmTagKind::PortJ || e.em.port == port)) out.push_back(i);
        }
        return out;
    }

    std::vector<int> port_indices() const {
        std::set<int> ks;
        for (const auto& e : boundary_edges)
            if (e.em.kind == EmTagKind::PortJ) ks.insert(e.em.port);
        return {ks.begin(), ks.end()};
    }
};

// One connected, consecutively ordered piece of same-tagged boundary.
struct BoundaryRun {
    std::vector<int> edges; // indices into mesh.boundary_edges, orientation-consistent order
};

namespace detail {

inline std::vector<BoundaryRun> chain_edges(const MeridionalMesh& mesh, const std::vector<int>& edge_ids) {
    // Chain a -> b links; every component of a tagged subset is a simple path
    // (tags partition closed loops), so each component has a unique start node.
    std::map<int, int> by_start; // start node -> edge id
    std::set<int> ends;
    for (int id : edge_ids) {
        const auto& e = mesh.boundary_edges[id];
        if (by_start.count(e.a)) throw mesh_error("boundary run branches at node " + std::to_string(e.a));
        by_start[e.a] = id;
        ends.insert(e.b);
    }
    std::vector<BoundaryRun> runs;
    std::set<int> used;
    for (int id : edge_ids) {
        const auto& e = mesh.boundary_edges[id];
        if (ends.count(e.a)) continue; // not a component start
        BoundaryRun run;
        int cur = id;
        while (true) {
            run.edges.push_back(cur);
            used.insert(cur);
            int nb = mesh.boundary_edges[cur].b;
            auto it = by_start.find(nb);
            if (it == by_start.end()) break;
            cur = it->second;
        }
        runs.push_back(std::move(run));
    }
    if (used.size() != edge_ids.size()) {
        // Remaining edges form closed cycles (no free start); emit them too.
        for (int id : edge_ids) {
            if (used.count(id)) continue;
            BoundaryRun run;
            int cur = id;
            while (!used.count(cur)) {
                run.edges.push_back(cur);
                used.insert(cur);
                auto it = by_start.find(mesh.boundary_edges[cur].b);
                if (it == by_start.end()) break;
                cur = it->second;
            }
            runs.push_back(std::move(run));
        }
    }
    return runs;
}

} // namespace detail

// Ordered edge list per connected component carrying the given EM tag.
// Ports must be connected (single run); an absent tag yields an empty list.
inline std::vector<BoundaryRun> boundary_runs(const MeridionalMesh& mesh, EmTagKind kind, int port = 0) {
    auto ids = mesh.edges_with_em(kind, port);
    if (ids.empty()) return {};
    auto runs = detail::chain_edges(mesh, ids);
    if ((kind == EmTagKind::PortJ || kind == EmTagKind::PortE) && runs.size() != 1)
        throw mesh_error("port must be a single connected run (found " + std::to_string(runs.size()) +
                         " components)");
    return runs;
}

inline std::vector<BoundaryRun> boundary_runs_thermal(const MeridionalMesh& mesh, ThermalTag tag) {
    std::vector<int> ids;
    for (int i = 0; i < static_cast<int>(mesh.boundary_edges.size()); ++i)
        if (mesh.boundary_edges[i].thermal == tag) ids.push_back(i);
    if (ids.empty()) return {};
    return detail::chain_edges(mesh, ids);
}

// Structural validation: geometry, orientation, tag partition, port connectivity.
inline void validate_mesh(const MeridionalMesh& mesh, bool require_axis = true) {
    const double tol_r = 0.0;
    for (int i = 0; i < mesh.n_nodes(); ++i)
        if (mesh.nodes[i].x() < tol_r) throw mesh_error("node " + std::to_string(i) + " has r < 0");

    for (int t = 0; t < mesh.n_triangles(); ++t) {
        for (int v : mesh.triangles[t])
            if (v < 0 || v >= mesh.n_nodes()) throw mesh_error("triangle " + std::to_string(t) + " references bad node");
        if (mesh.triangle_area(t) <= 0.0)
            throw mesh_error("triangle " + std::to_string(t) + " has non-positive area (orientation?)");
    }

    // Topological boundary: edges belonging to exactly one triangle.
    std::map<std::pair<int, int>, int> edge_count; // undirected
    for (const auto& tri : mesh.triangles)
        for (int k = 0; k < 3; ++k) {
            int a = tri[k], b = tri[(k + 1) % 3];
            edge_count[{std::min(a, b), std::max(a, b)}]++;
        }
    std::set<std::pair<int, int>> hull;
    for (const auto& [e, c] : edge_count) {
        if (c > 2) throw mesh_error("non-manifold edge");
        if (c == 1) hull.insert(e);
    }
    if (mesh.boundary_edges.size() != hull.size())
        throw mesh_error("boundary edge list does not cover the hull exactly once (" +
                         std::to_string(mesh.boundary_edges.size()) + " tagged vs " +
                         std::to_string(hull.size()) + " hull edges)");

    // Orientation: for a CCW triangle (a,b,c), the directed hull edge is a->b;
    // tagged edges must match that direction (domain on the left).
    std::set<std::pair<int, int>> directed;
    for (const auto& tri : mesh.triangles)
        for (int k = 0; k < 3; ++k) {
            int a = tri[k], b = tri[(k + 1) % 3];
            if (hull.count({std::min(a, b), std::max(a, b)})) directed.insert({a, b});
        }
    std::map<int, int> node_edge_count;
    for (const auto& e : mesh.boundary_edges) {
        if (!directed.count({e.a, e.b}))
            throw mesh_error("boundary edge " + std::to_string(e.a) + "->" + std::to_string(e.b) +
                             " is not counter-clockwise");
        node_edge_count[e.a]++;
        node_edge_count[e.b]++;
    }
    for (const auto& [n, c] : node_edge_count)
        if (c != 2) throw mesh_error("boundary node " + std::to_string(n) + " is on " + std::to_string(c) +
                                     " boundary edges (loops must close)");

    // Axis tagging: an edge lying on r = 0 must be Axis and vice versa.
    bool has_axis = false;
    for (const auto& e : mesh.boundary_edges) {
        bool on_axis = mesh.nodes[e.a].x() == 0.0 && mesh.nodes[e.b].x() == 0.0;
        bool tagged = e.em.kind == EmTagKind::Axis;
        if (on_axis != tagged)
            throw mesh_error("axis tag mismatch on edge " + std::to_string(e.a) + "->" + std::to_string(e.b));
        has_axis |= tagged;
        if (tagged && e.thermal != ThermalTag::None)
            throw mesh_error("axis edges carry no thermal condition (use 'none')");
    }
    if (require_axis && !has_axis) throw mesh_error("mesh does not touch the symmetry axis");

    // Nodes with r = 0 must sit on the axis part of the boundary.
    std::set<int> axis_set;
    for (const auto& e : mesh.boundary_edges)
        if (e.em.kind == EmTagKind::Axis) {
            axis_set.insert(e.a);
            axis_set.insert(e.b);
        }
    for (int i = 0; i < mesh.n_nodes(); ++i)
        if (mesh.nodes[i].x() == 0.0 && !axis_set.count(i))
            throw mesh_error("node " + std::to_string(i) + " has r = 0 but is not on an axis edge");

    // Port indices must form {1..N}, each port connected.
    auto ks = mesh.port_indices();
    for (int i = 0; i < static_cast<int>(ks.size()); ++i)
        if (ks[i] != i + 1) throw mesh_error("port indices must be contiguous 1..N");
    for (int k : ks) boundary_runs(mesh, EmTagKind::PortJ, k);
    if (!mesh.edges_with_em(EmTagKind::PortE).empty()) boundary_runs(mesh, EmTagKind::PortE);
}

// Structured triangulation of the rectangle [0,R] x [0,L] with nr x nz cells,
// each split along the lower-left to upper-right diagonal. Tags: left edge
// Axis, top PortJ(1), bottom PortE, right Insulated; all non-axis edges
// ConvRad for the thermal problem.
inline MeridionalMesh generate_rectangle_mesh(double R, double L, int nr, int nz) {
    if (!(R > 0.0) || !(L > 0.0)) throw config_error("generate_rectangle_mesh: R and L must be positive");
    if (nr < 1 || nz < 1) throw config_error("generate_rectangle_mesh: nr and nz must be >= 1");

    MeridionalMesh mesh;
    auto node_id = [nr](int i, int j) { return j * (nr + 1) + i; };
    mesh.nodes.reserve((nr + 1) * (nz + 1));
    for (int j = 0; j <= nz; ++j)
        for (int i = 0; i <= nr; ++i)
            mesh.nodes.emplace_back(R * static_cast<double>(i) / nr, L * static_cast<double>(j) / nz);

    mesh.triangles.reserve(2 * nr * nz);
    for (int j = 0; j < nz; ++j)
        for (int i = 0; i < nr; ++i) {
            int n00 = node_id(i, j), n10 = node_id(i + 1, j);
            int n11 = node_id(i + 1, j + 1), n01 = node_id(i, j + 1);
            mesh.triangles.push_back({n00, n10, n11});
            mesh.triangles.push_back({n00, n11, n01});
        }

    // Counter-clockwise hull: bottom, right, top, left.
    for (int i = 0; i < nr; ++i)
        mesh.boundary_edges.push_back({node_id(i, 0), node_id(i + 1, 0), EmTag::port_e(), ThermalTag::ConvRad});
    for (int j = 0; j < nz; ++j)
        mesh.boundary_edges.push_back({node_id(nr, j), node_id(nr, j + 1), EmTag::insulated(), ThermalTag::ConvRad});
    for (int i = nr; i > 0; --i)
        mesh.boundary_edges.push_back({node_id(i, nz), node_id(i - 1, nz), EmTag::port_j(1), ThermalTag::ConvRad});
    for (int j = nz; j > 0; --j)
        mesh.boundary_edges.push_back({node_id(0, j), node_id(0, j - 1), EmTag::axis(), ThermalTag::None});

    return mesh;
}

// ---------------------------------------------------------------------------
// Plain-text mesh format:
//   axisim-mesh v1
//   <node count>
//   r z
//   <triangle count>
//   i j k            (0-based)
//   <boundary count>
//   a b em_tag thermal_tag
// em_tag in {axis, portJ:<k>, portE, insulated},
// thermal_tag in {dirichlet, convrad, none}.
// ---------------------------------------------------------------------------

inline std::string em_tag_to_string(const EmTag& t) {
    switch (t.kind) {
        case EmTagKind::Axis: return "axis";
        case EmTagKind::PortJ: return "portJ:" + std::to_string(t.port);
        case EmTagKind::PortE: return "portE";
        case EmTagKind::Insulated: return "insulated";
    }
    return "insulated";
}

inline std::string thermal_tag_to_string(ThermalTag t) {
    switch (t) {
        case ThermalTag::Dirichlet: return "dirichlet";
        case ThermalTag::ConvRad: return "convrad";
        case ThermalTag::None: return "none";
    }
    return "none";
}

inline EmTag em_tag_from_string(const std::string& s) {
    if (s == "axis") return EmTag::axis();
    if (s == "portE") return EmTag::port_e();
    if (s == "insulated") return EmTag::insulated();
    if (s.rfind("portJ:", 0) == 0) {
        int k = std::stoi(s.substr(6));
        if (k < 1) throw config_error("port index must be >= 1: " + s);
        return EmTag::port_j(k);
    }
    throw config_error("unknown em_tag '" + s + "'");
}

inline ThermalTag thermal_tag_from_string(const std::string& s) {
    if (s == "dirichlet") return ThermalTag::Dirichlet;
    if (s == "convrad") return ThermalTag::ConvRad;
    if (s == "none") return ThermalTag::None;
    throw config_error("unknown thermal_tag '" + s + "'");
}

inline void write_mesh(const MeridionalMesh& mesh, std::ostream& os) {
    os << "axisim-mesh v1\n";
    os << mesh.n_nodes() << "\n";
    char buf[80];
    for (const auto& p : mesh.nodes) {
        std::snprintf(buf, sizeof buf, "%.17g %.17g\n", p.x(), p.y());
        os << buf;
    }
    os << mesh.n_triangles() << "\n";
    for (const auto& t : mesh.triangles) os << t[0] << " " << t[1] << " " << t[2] << "\n";
    os << mesh.boundary_edges.size() << "\n";
    for (const auto& e : mesh.boundary_edges)
        os << e.a << " " << e.b << " " << em_tag_to_string(e.em) << " " << thermal_tag_to_string(e.thermal) << "\n";
}

inline void write_mesh_file(const MeridionalMesh& mesh, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw config_error("cannot open mesh file for writing: " + path);
    write_mesh(mesh, os);
}

inline MeridionalMesh read_mesh(std::istream& is) {
    auto fail = [](int line, const std::string& what) -> void {
        throw config_error("mesh line " + std::to_string(line) + ": " + what);
    };
    int lineno = 0;
    auto next_line = [&](std::string& out) {
        while (std::getline(is, out)) {
            ++lineno;
            if (!out.empty() && out.back() == '\r') out.pop_back();
            if (!out.empty()) return true;
        }
        return false;
    };
    std::string line;
    if (!next_line(line) || line != "axisim-mesh v1") fail(lineno ? lineno : 1, "expected header 'axisim-mesh v1'");

    auto read_count = [&](const char* what) {
        if (!next_line(line)) fail(lineno, std::string("expected ") + what + " count");
        std::istringstream ss(line);
        long n = -1;
        ss >> n;
        if (!ss || n < 0) fail(lineno, std::string("bad ") + what + " count");
        return static_cast<int>(n);
    };

    MeridionalMesh mesh;
    int nn = read_count("node");
    mesh.nodes.reserve(nn);
    for (int i = 0; i < nn; ++i) {
        if (!next_line(line)) fail(lineno, "unexpected end of file in nodes");
        std::istringstream ss(line);
        double r, z;
        ss >> r >> z;
        if (!ss) fail(lineno, "bad node line");
        mesh.nodes.emplace_back(r, z);
    }
    int nt = read_count("triangle");
    mesh.triangles.reserve(nt);
    for (int i = 0; i < nt; ++i) {
        if (!next_line(line)) fail(lineno, "unexpected end of file in triangles");
        std::istringstream ss(line);
        int a, b, c;
        ss >> a >> b >> c;
        if (!ss) fail(lineno, "bad triangle line");
        mesh.triangles.push_back({a, b, c});
    }
    int nb = read_count("boundary");
    mesh.boundary_edges.reserve(nb);
    for (int i = 0; i < nb; ++i) {
        if (!next_line(line)) fail(lineno, "unexpected end of file in boundary edges");
        std::istringstream ss(line);
        int a, b;
        std::string em, th;
        ss >> a >> b >> em >> th;
        if (!ss) fail(lineno, "bad boundary line");
        try {
            mesh.boundary_edges.push_back({a, b, em_tag_from_string(em), thermal_tag_from_string(th)});
        } catch (const config_error& e) {
            fail(lineno, e.what());
        }
    }
    return mesh;
}

inline MeridionalMesh read_mesh_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw config_error("cannot open mesh file: " + path);
    auto mesh = read_mesh(is);
    validate_mesh(mesh);
    return mesh;
}

} // namespace axisim
