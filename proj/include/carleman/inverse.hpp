#pragma once

#include <cstdint>
#include <vector>

#include "carleman/field.hpp"
#include "carleman/forward.hpp"
#include "carleman/geometry.hpp"

namespace carleman {

// Source class: nonnegative fields whose pairing with some dual witness
// controls the L^q norm from below. The compact dual set is realized as a
// finite list of grid functions.
struct SourceClassSpec {
    double q = 2.0;
    double delta_tilde = 0.0;
    std::vector<SpaceTimeField> g_tilde;

    void validate(const AnnulusGrid& grid) const;
};

// Dual set {1} with delta_tilde calibrated as half the worst pairing ratio
// over a deterministic probe set, so the class is nonempty by construction.
SourceClassSpec default_source_class(const AnnulusGrid& grid, int n_comp, double q,
                                     std::uint64_t seed = 1);

struct MembershipReport {
    bool member = false;
    int witness = -1;  // index into g_tilde, -1 when no witness works
    double margin = 0.0;
};

// Membership test: exists g~ with <g, g~> >= delta_tilde ||g||_q. The zero
// source is excluded explicitly. Negative entries violate (H2) and throw.
MembershipReport class_membership(const SpaceTimeField& g, const SourceClassSpec& spec,
                                  const AnnulusGrid& grid);

// Analytic description of a sampled source. Spatial bumps are finite
// trigonometric lobes
//   amp * sin^2(pi xh) * [ (1+cos(theta-phi))/2 ]^J * [ (1+cos(k pi xh - psi))/2 ]^L,
// xh = (r-r0)/(r1-r0): smooth, nonnegative, vanishing on both rings, with
// angular harmonics up to J and radial cosine order up to kL+2. All bumps of
// a sample share one time profile sigma(t) = c0 + c1 sin^2(pi t/T), so g is
// separable and W^{1,1} in time by construction. The description re-renders
// at any grid resolution.
struct BumpParam {
    double amp;
    double phi;  // angular center
    int J;       // angular lobe power, >= 1
    int L;       // radial modulation power, >= 0 (0 = fixed sin^2 profile)
    int k;       // radial modulation frequency
    double psi;  // radial modulation phase
};

struct SourceSample {
    SpaceTimeField field;
    std::vector<std::vector<BumpParam>> bumps;  // per component
    double time_base = 1.0;                     // c0 > 0
    double time_amp = 0.0;                      // c1 >= 0

    std::vector<double> time_profile(const AnnulusGrid& grid) const;
};

SpaceTimeField render_bumps(const std::vector<std::vector<BumpParam>>& bumps, double time_base,
                            double time_amp, const AnnulusGrid& grid);

// Draws until the class accepts the candidate (at most 100 attempts). With
// radial_rich = false the bumps carry no radial modulation (L = 0), keeping
// every sample inside the smooth dictionary the reconstruction uses; the
// richer draws are meant for stability statistics, where recoverability is
// not required.
SourceSample sample_source(const SourceClassSpec& spec, const AnnulusGrid& grid,
                           std::uint64_t seed, int n_comp, bool radial_rich = true);

struct ReconstructOptions {
    double rho = 1e-8;
    double tol = 1e-8;
    int max_iter = 500;
    bool project_nonneg = false;
    // When set (one value per time level), the unknown is the spatial factor
    // of a separable source g(t,x) = sigma(t) f(x) — the classical
    // identifiable formulation; the boundary data over-determines f at desk
    // scale. When empty, the unknown is the full space-time field, which the
    // data only determines up to null(F).
    std::vector<double> time_profile;
    // Separable mode only: restrict f to the smooth trigonometric dictionary
    // sin^2(pi xh) cos(d pi xh) x {harmonics <= M}, d <= dict_radial,
    // M = dict_angular, orthonormalized in the spatial inner product. The
    // boundary data observes every dictionary direction well, unlike fine
    // radial structure. dict_angular = 0 keeps the nodal unknown.
    int dict_radial = 2;
    int dict_angular = 0;
};

struct ReconstructionResult {
    SpaceTimeField g_hat;
    double residual_norm = 0.0;  // ||F g_hat - zeta_obs||_{L2(Sigma1)}
    double rho = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> objective_trace;   // data misfit + penalty per iteration
    std::vector<double> spatial_solution;  // separable mode: the recovered f
};

// Tikhonov reconstruction by conjugate gradients on the normal equations
// (F*F + rho I) g = F* zeta, run in the L2(Q) inner product (spatial L2 for
// the separable mode). The optional nonnegativity projection clamps the
// iterate and restarts the CG direction whenever it bites. The backward-Euler
// map never sees the source at t = 0; in full-field mode that level is
// completed by nearest-level extension afterwards.
ReconstructionResult reconstruct(const ForwardProblem& fp, const ObservationTrace& zeta_obs,
                                 const ReconstructOptions& opt,
                                 const ReconstructionResult* warm_start = nullptr);

// Discrepancy principle: geometric scan over rho (warm-started, largest rho
// first) stopping at residual <= tau * noise_norm; falls back to the
// smallest-residual rho when the target is never met.
ReconstructionResult reconstruct_discrepancy(const ForwardProblem& fp,
                                             const ObservationTrace& zeta_obs, double noise_norm,
                                             double tau, const ReconstructOptions& opt,
                                             double rho_max = 1e-2, int n_rho = 10);

// Gaussian perturbation scaled to an exact relative L2(Sigma1) noise level;
// returns the perturbed trace and the noise norm actually added.
std::pair<ObservationTrace, double> add_relative_noise(const ObservationTrace& zeta,
                                                       const AnnulusGrid& grid, double sigma_rel,
                                                       std::uint64_t seed);

// Relative L2(Q) distance between two fields.
double relative_field_error(const SpaceTimeField& g_hat, const SpaceTimeField& g_true,
                            const AnnulusGrid& grid);

}  // namespace carleman
