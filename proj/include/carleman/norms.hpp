#pragma once

#include <limits>
#include <optional>

#include "carleman/field.hpp"
#include "carleman/geometry.hpp"
#include "carleman/weights.hpp"

namespace carleman {

// Sentinel for the grid-max norm standing in for q = infinity.
inline constexpr double kQInfinity = std::numeric_limits<double>::infinity();

double conjugate_exponent(double q);

// Vector-valued L^q(Q) norm: (sum_c int_Q |f_c|^q)^{1/q}; grid max for the
// infinity sentinel.
double lq_norm(const SpaceTimeField& f, const AnnulusGrid& grid, double q);

// L^q norm over the outer boundary cylinder Sigma1 (q = 2 is the norm the
// observation estimates use).
double lq_norm_trace(const ObservationTrace& z, const AnnulusGrid& grid, double q);

// || f * e^{factor * (alpha - shift)} ||_{L^q(Q)} with alpha of the given
// kind. Endpoint time levels contribute zero (the analytic weight limit).
// shift = 0 is the plain weighted norm; the harness passes the nodewise
// maximum of alpha to keep doubly-exponential weights representable.
double weighted_lq_norm(const SpaceTimeField& f, WeightKind alpha_kind,
                        const CarlemanParams& params, double factor, const AnnulusGrid& grid,
                        double q, double alpha_shift = 0.0);

// Maximum of an alpha-kind weight over spatial nodes and interior time levels.
double max_alpha(const AnnulusGrid& grid, const CarlemanParams& params,
                 WeightKind alpha_kind = WeightKind::Alpha);

// Pointwise derivative magnitude fields of a (possibly vector) grid function:
// |Dy| per component, Frobenius |D^2 y| per component, D_t y per component.
// Second-order stencils: centered inside, one-sided at radial boundaries and
// time endpoints, periodic in theta.
struct DerivativeFields {
    SpaceTimeField grad_mag;
    SpaceTimeField hess_frob;
    SpaceTimeField time_deriv;
};

DerivativeFields derivative_fields(const SpaceTimeField& y, const AnnulusGrid& grid);

// Anisotropic Sobolev norm (||y||_q^q + ||Dy||_q^q + ||D2y||_q^q + ||Dty||_q^q)^{1/q}.
double w21q_norm(const SpaceTimeField& y, const AnnulusGrid& grid, double q);

// Request object mirroring the norm surface: exponent, optional exponential
// weight (factor taken from params.s), and derivative order.
struct NormRequest {
    enum class Derivative { None, D, D2, Dt };
    double q = 2.0;
    std::optional<std::pair<WeightKind, CarlemanParams>> weight;
    Derivative derivative = Derivative::None;
};

double evaluate_norm(const SpaceTimeField& y, const AnnulusGrid& grid, const NormRequest& req);

}  // namespace carleman
