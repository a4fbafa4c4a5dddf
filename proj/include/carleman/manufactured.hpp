#pragma once

#include <functional>

#include "carleman/coefficients.hpp"
#include "carleman/field.hpp"
#include "carleman/geometry.hpp"

namespace carleman {

// Closed-form problem with known exact solution: coefficients, boundary and
// observation data, plus callables for y*, the matching source
// g = D_t y* + L y* + L1 y* + L0 y*, and the initial slice.
struct ManufacturedCase {
    SystemCoefficients coeffs;
    BoundarySpec bspec;
    ObservationSpec ospec;
    std::function<double(int, double, double, double)> exact;   // (c, t, r, theta)
    std::function<double(int, double, double, double)> source;  // (c, t, r, theta)
    std::function<double(int, double, double)> initial;         // (c, r, theta)
};

// y*_i = (1 + i/4) t sin(pi (r-r0)/(r1-r0)) cos(theta); per-component
// isotropic diffusion, constant drift and H3-compliant coupling; Dirichlet
// boundaries; observation = conormal derivative on Gamma1.
ManufacturedCase manufactured_dirichlet_iso(int n, double r0, double r1);

// y*_i = (1 + i/4) t (|x|^2 - r0^2)(r1^2 - |x|^2); full constant tensors with
// off-diagonal entries exercising the cross-derivative stencils.
ManufacturedCase manufactured_dirichlet_aniso(int n, double r0, double r1);

// Radial cubic satisfying Robin conditions on both rings exactly,
// y*_i = (1 + i/4)(1 + t) R_i(r) with nonzero initial data.
ManufacturedCase manufactured_robin_iso(int n, double r0, double r1, double beta0, double eta0,
                                        double beta1, double eta1);

// Grid renderings.
SpaceTimeField exact_field(const ManufacturedCase& mc, const AnnulusGrid& grid, int n);
SpaceTimeField source_field(const ManufacturedCase& mc, const AnnulusGrid& grid, int n);
std::vector<double> initial_vector(const ManufacturedCase& mc, const AnnulusGrid& grid, int n);

// Relative L2(Q) error of a computed solution against the exact one.
double relative_l2_error(const SpaceTimeField& y, const ManufacturedCase& mc,
                         const AnnulusGrid& grid);

}  // namespace carleman
