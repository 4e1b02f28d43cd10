#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace axisim {

/// Bad user input: mesh files, configs, argument ranges.
class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

/// Mesh fails a structural invariant (orientation, tags, connectivity).
class mesh_error : public std::runtime_error {
public:
    explicit mesh_error(const std::string& what) : std::runtime_error(what) {}
};

/// det F <= 0 (or an inverted pushed element) at some point and time.
class degenerate_motion_error : public std::runtime_error {
public:
    degenerate_motion_error(const std::string& what, double r, double z, double t)
        : std::runtime_error(what + " at (r=" + std::to_string(r) + ", z=" + std::to_string(z) +
                             "), t=" + std::to_string(t)),
          r_m(r), z_m(z), time(t) {}
    double r_m, z_m, time;
};

/// A constitutive law was evaluated where it is not defined (e.g. sigma denominator <= 0).
class material_range_error : public std::runtime_error {
public:
    explicit material_range_error(const std::string& what) : std::runtime_error(what) {}
};

/// Newton failed to converge; carries the residual-norm history of the failed solve.
class solver_error : public std::runtime_error {
public:
    solver_error(const std::string& what, std::vector<double> history)
        : std::runtime_error(what), residual_history(std::move(history)) {}
    std::vector<double> residual_history;
};

} // namespace axisim
