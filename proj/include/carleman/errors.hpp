#pragma once

#include <stdexcept>
#include <string>

namespace carleman {

// Parameter outside its admissible range (bad radii, counts, exponents, ...).
struct parameter_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Geometric misuse: interior node where a boundary node is required, etc.
struct grid_domain_error : std::domain_error {
    using std::domain_error::domain_error;
};

// Evaluation of a weight at a time where it is analytically singular.
struct singular_weight_error : std::domain_error {
    using std::domain_error::domain_error;
};

// Linear-algebra failure inside a time step; carries a rough condition estimate.
struct solver_error : std::runtime_error {
    explicit solver_error(const std::string& what, double cond_estimate = 0.0)
        : std::runtime_error(what), cond_estimate(cond_estimate) {}
    double cond_estimate;
};

// Non-finite values detected in a field or solve output.
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Source sampling failed to hit the requested class.
struct sampling_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad or inconsistent experiment configuration.
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace carleman
