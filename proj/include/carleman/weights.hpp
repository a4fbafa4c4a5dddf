#pragma once

#include <string>
#include <vector>

#include "carleman/geometry.hpp"

namespace carleman {

// Every tuning knob of the weight construction in one place.
//   lambda    - sharpness of e^{lambda*psi}
//   s, s_prime- Carleman parameters, s_prime/s > gamma_bar > 1
//   gamma_bar - ratio bound; gamma = gamma_bar^(1/(m+3)) is the per-step ratio
//   K         - integer shift making sup(psi)/inf(psi) <= 8/7 (K = 7)
//   sigma, m  - ratio s2/s1 and power in the weight-domination bound
struct CarlemanParams {
    double lambda = 1.0;
    double s = 1.0;
    double s_prime = 0.0;  // 0 means "not used by this experiment"
    double gamma_bar = 2.0;
    double gamma = 0.0;  // 0 means "derive from gamma_bar and m"
    int K = 7;
    double sigma = 2.0;
    double m = 1.0;

    // Throws parameter_error on any violated bound.
    void validate(bool require_s_prime = false) const;

    double psi_sup() const { return static_cast<double>(K) + 1.0; }
    double psi_inf() const { return static_cast<double>(K); }
};

enum class WeightKind { Phi0, Alpha0, Phi, Alpha, PhiBar, PhiUnder, AlphaBar, AlphaUnder };

const char* weight_kind_name(WeightKind kind);

// psi0(x) = (|x| - r0)/(r1 - r0): 0 on Gamma0, 1 on Gamma1, gradient of
// constant magnitude 1/(r1-r0), inward slope on Gamma0.
double psi0(const AnnulusGrid& grid, double r);
std::vector<double> psi0_field(const AnnulusGrid& grid);  // one value per spatial node
double psi0_gradient_magnitude(const AnnulusGrid& grid);
double psi0_normal_derivative(const AnnulusGrid& grid, NodeClass boundary);

// Smallest integer K with (K+1)/K <= 8/7.
int choose_K();

// Direct evaluation of a weight at interior time 0 < t < T and radius r.
// phi-kind weights throw singular_weight_error at t in {0, T}; alpha-kind
// weights return -infinity there (the e^{s*alpha} limit path).
double eval_weight(WeightKind kind, const AnnulusGrid& grid, const CarlemanParams& params,
                   double t, double r);

// e^{factor * alpha(t, r)} with the analytic limit 0 at t in {0, T}.
// `factor` is typically s, s', 2s, or q*s'. Underflows cleanly to 0.
double exp_factor_alpha(const AnnulusGrid& grid, const CarlemanParams& params, double factor,
                        double t, double r, WeightKind alpha_kind = WeightKind::Alpha);

// Weight samples on interior time levels (k = 1 .. nt-1) for every spatial
// node; evaluation at the endpoint levels is intentionally unrepresented.
struct WeightField {
    WeightKind kind;
    CarlemanParams params;
    int n_interior_levels = 0;
    int n_space = 0;
    std::vector<double> values;  // [(k-1) * n_space + s]

    double at(int interior_level, int space_node) const {
        return values[static_cast<std::size_t>(interior_level) * n_space + space_node];
    }
};

WeightField build_weight_field(WeightKind kind, const AnnulusGrid& grid,
                               const CarlemanParams& params);

// sup over mu >= 0 of mu^m e^{-mu}, the constant C(m) of the domination bound.
double domination_constant(double m);

// Checks phi^m s2^m lambda^m e^{s2 alpha} <= C(m) (1 + 1e-6) e^{s1 alpha}
// over all spatial nodes and interior time levels. Computed in log space;
// sup_ratio may underflow to 0 while log_sup_ratio stays exact.
struct DominationReport {
    double sup_ratio = 0.0;
    double log_sup_ratio = 0.0;
    double C_m = 0.0;
    bool holds = false;
};

DominationReport weight_domination_check(const CarlemanParams& params, const AnnulusGrid& grid,
                                         double s1, double s2);

// Nodewise chain e^{gamma^j s alpha} < e^{gamma^j s alpha_bar} < e^{s alpha}
// over interior spatial nodes, compared in exponent space. Margin is the
// smallest gap between adjacent exponents (positive when the chain holds).
struct ComparisonChainReport {
    bool holds = false;
    double margin = 0.0;
};

ComparisonChainReport comparison_chain_check(const CarlemanParams& params, const AnnulusGrid& grid,
                                             int j);

// Coarse-to-fine searches for the lambda thresholds the estimates assert to
// exist. Both return NaN if the property never holds on (0, lambda_max].
double search_lambda_domination(const AnnulusGrid& grid, double sigma, double m, double s1,
                                int K = 7, double lambda_max = 64.0);
double search_lambda_chain(const AnnulusGrid& grid, double gamma, int j, int K = 7,
                           double lambda_max = 64.0);

// Bootstrap exponent ladder: q0 = 2, then
//   q_j = (N+2) q_{j-1} / (N+2 - q_{j-1})  while q_{j-1} < N+2,
//   q_j = 1.5 q_{j-1}                      otherwise,
// stopping at the first m with q_{m-1} <= q < q_m. The recurrence runs on
// exact rationals so the 1.5-branch cannot drift.
std::vector<double> bootstrap_exponents(double q, int N);

}  // namespace carleman
