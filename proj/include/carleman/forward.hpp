#pragma once

#include <memory>
#include <vector>

#include "carleman/coefficients.hpp"
#include "carleman/field.hpp"
#include "carleman/geometry.hpp"

namespace carleman {

enum class TimeScheme { ImplicitEuler, CrankNicolson };

// Discrete coupled parabolic problem on the annulus: conservative 9-point
// polar stencil with face-centered tensor coefficients, centered drift,
// node-local coupling, Robin conditions through ghost-node elimination and
// Dirichlet rows pinned to zero. The step matrix and its transpose are
// factored once (coefficients are time-independent) and shared by every
// solve, forward application and adjoint application.
class ForwardProblem {
public:
    ForwardProblem(const AnnulusGrid& grid, const SystemCoefficients& coeffs,
                   const BoundarySpec& bspec, const ObservationSpec& ospec,
                   TimeScheme scheme = TimeScheme::ImplicitEuler);
    ~ForwardProblem();

    ForwardProblem(const ForwardProblem&) = delete;
    ForwardProblem& operator=(const ForwardProblem&) = delete;

    const AnnulusGrid& grid() const { return grid_; }
    int n_components() const { return n_; }

    // Time-steps the system from y0 under source g. Every linear step is
    // residual-checked to 1e-10 relative; non-finite output throws.
    SpaceTimeField solve(const SpaceTimeField& g, const std::vector<double>& y0) const;

    // Observation stencil applied to an existing solution (no solve).
    ObservationTrace observe(const SpaceTimeField& y) const;

    // Source-to-observation map with zero initial data, and its adjoint with
    // respect to the L2(Q) / L2(Sigma1) quadrature inner products.
    ObservationTrace apply_forward(const SpaceTimeField& g) const;
    SpaceTimeField apply_adjoint(const ObservationTrace& w) const;

    // Max over time steps of the relative residual of the stepping relation;
    // the harness gates Carleman experiments on this.
    double solution_residual(const SpaceTimeField& y, const SpaceTimeField& g) const;

    // Conormal derivative sum_jk a^{jk} D_k y nu_j at a boundary node via
    // one-sided second-order radial stencils. Throws for interior nodes.
    double conormal(const SpaceTimeField& y, int comp, int k, int i, int j) const;

    // Quadrature inner products used by the adjoint identity and CG.
    double dot_volume(const SpaceTimeField& f, const SpaceTimeField& h) const;
    double dot_trace(const ObservationTrace& v, const ObservationTrace& w) const;

private:
    struct Impl;
    AnnulusGrid grid_;
    int n_ = 0;
    std::unique_ptr<Impl> impl_;
};

// Standalone conormal derivative (same stencil the observation uses).
double conormal_derivative(const SpaceTimeField& y, const SystemCoefficients& coeffs,
                           const AnnulusGrid& grid, int comp, int k, int i, int j);

// Observation operator applied without constructing a solver.
ObservationTrace observe(const SpaceTimeField& y, const SystemCoefficients& coeffs,
                         const ObservationSpec& ospec, const AnnulusGrid& grid);

}  // namespace carleman
