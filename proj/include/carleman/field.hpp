#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "carleman/errors.hpp"
#include "carleman/geometry.hpp"

namespace carleman {

// n-component grid function on the full space-time lattice (all time levels,
// all spatial nodes). Entries must stay finite; validate() enforces it.
struct SpaceTimeField {
    int n_comp = 0;
    int n_time = 0;
    int n_space = 0;
    std::vector<double> data;

    SpaceTimeField() = default;
    SpaceTimeField(int n_comp, int n_time, int n_space)
        : n_comp(n_comp), n_time(n_time), n_space(n_space),
          data(static_cast<std::size_t>(n_comp) * n_time * n_space, 0.0) {}

    double& at(int c, int k, int s) {
        return data[(static_cast<std::size_t>(c) * n_time + k) * n_space + s];
    }
    double at(int c, int k, int s) const {
        return data[(static_cast<std::size_t>(c) * n_time + k) * n_space + s];
    }
    std::span<double> level(int c, int k) {
        return {data.data() + (static_cast<std::size_t>(c) * n_time + k) * n_space,
                static_cast<std::size_t>(n_space)};
    }
    std::span<const double> level(int c, int k) const {
        return {data.data() + (static_cast<std::size_t>(c) * n_time + k) * n_space,
                static_cast<std::size_t>(n_space)};
    }

    void validate() const {
        for (double v : data)
            if (!std::isfinite(v)) throw numeric_error("field contains non-finite entries");
    }

    double max_abs() const {
        double m = 0.0;
        for (double v : data) m = std::max(m, std::abs(v));
        return m;
    }
};

// Samples f(component, t, r, theta) at every node of the grid.
SpaceTimeField sample_field(const AnnulusGrid& grid, int n_comp,
                            const std::function<double(int, double, double, double)>& f);

// Boundary trace on the outer cylinder Sigma1 = (0,T) x Gamma1.
struct ObservationTrace {
    int n_comp = 0;
    int n_time = 0;
    int ntheta = 0;
    std::vector<double> data;

    ObservationTrace() = default;
    ObservationTrace(int n_comp, int n_time, int ntheta)
        : n_comp(n_comp), n_time(n_time), ntheta(ntheta),
          data(static_cast<std::size_t>(n_comp) * n_time * ntheta, 0.0) {}

    double& at(int c, int k, int j) {
        return data[(static_cast<std::size_t>(c) * n_time + k) * ntheta + j];
    }
    double at(int c, int k, int j) const {
        return data[(static_cast<std::size_t>(c) * n_time + k) * ntheta + j];
    }

    void validate() const {
        for (double v : data)
            if (!std::isfinite(v)) throw numeric_error("trace contains non-finite entries");
    }
};

}  // namespace carleman
