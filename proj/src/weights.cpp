#include "carleman/weights.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>

#include "carleman/numerics.hpp"

namespace carleman {

void CarlemanParams::validate(bool require_s_prime) const {
    if (!(lambda > 0.0)) throw parameter_error("carleman params: lambda must be positive");
    if (!(s > 0.0)) throw parameter_error("carleman params: s must be positive");
    if (!(gamma_bar > 1.0)) throw parameter_error("carleman params: gamma_bar must exceed 1");
    if (require_s_prime && !(s_prime > gamma_bar * s))
        throw parameter_error("carleman params: s_prime must exceed gamma_bar * s");
    if (gamma != 0.0 && !(gamma > 1.0)) throw parameter_error("carleman params: gamma must exceed 1");
    if (K < 7) throw parameter_error("carleman params: K must be at least 7");
    if (!(sigma > 1.0)) throw parameter_error("carleman params: sigma must exceed 1");
    if (!(m > 0.0)) throw parameter_error("carleman params: m must be positive");
}

const char* weight_kind_name(WeightKind kind) {
    switch (kind) {
        case WeightKind::Phi0: return "phi0";
        case WeightKind::Alpha0: return "alpha0";
        case WeightKind::Phi: return "phi";
        case WeightKind::Alpha: return "alpha";
        case WeightKind::PhiBar: return "phi_bar";
        case WeightKind::PhiUnder: return "phi_under";
        case WeightKind::AlphaBar: return "alpha_bar";
        case WeightKind::AlphaUnder: return "alpha_under";
    }
    return "?";
}

double psi0(const AnnulusGrid& grid, double r) { return (r - grid.r0) / (grid.r1 - grid.r0); }

std::vector<double> psi0_field(const AnnulusGrid& grid) {
    std::vector<double> f(grid.n_space());
    for (int i = 0; i <= grid.nr; ++i) {
        const double v = psi0(grid, grid.radius(i));
        for (int j = 0; j < grid.ntheta; ++j) f[grid.node(i, j)] = v;
    }
    return f;
}

double psi0_gradient_magnitude(const AnnulusGrid& grid) { return 1.0 / (grid.r1 - grid.r0); }

double psi0_normal_derivative(const AnnulusGrid& grid, NodeClass boundary) {
    const double slope = 1.0 / (grid.r1 - grid.r0);
    if (boundary == NodeClass::Gamma0) return -slope;
    if (boundary == NodeClass::Gamma1) return slope;
    throw grid_domain_error("psi0_normal_derivative: interior has no normal");
}

int choose_K() {
    // minimal integer K with (K+1)/K <= 8/7, i.e. 7K + 7 <= 8K.
    int K = 1;
    while (7 * (K + 1) > 8 * K) ++K;
    return K;
}

namespace {

bool phi_kind(WeightKind kind) {
    return kind == WeightKind::Phi0 || kind == WeightKind::Phi || kind == WeightKind::PhiBar ||
           kind == WeightKind::PhiUnder;
}

// Numerator e^{lambda * level} and the subtracted ceiling e^{1.5 lambda * sup}
// for each alpha-kind; phi-kinds share the numerator with ceiling 0.
struct WeightParts {
    double exp_level;    // e^{lambda * psi-like value}
    double exp_ceiling;  // e^{1.5 lambda * norm}, 0 for phi kinds
};

WeightParts weight_parts(WeightKind kind, const AnnulusGrid& grid, const CarlemanParams& p,
                         double r) {
    const double p0 = psi0(grid, r);
    switch (kind) {
        case WeightKind::Phi0: return {std::exp(p.lambda * p0), 0.0};
        case WeightKind::Alpha0: return {std::exp(p.lambda * p0), std::exp(1.5 * p.lambda)};
        case WeightKind::Phi: return {std::exp(p.lambda * (p0 + p.K)), 0.0};
        case WeightKind::Alpha:
            return {std::exp(p.lambda * (p0 + p.K)), std::exp(1.5 * p.lambda * p.psi_sup())};
        case WeightKind::PhiBar: return {std::exp(p.lambda * p.psi_sup()), 0.0};
        case WeightKind::PhiUnder: return {std::exp(p.lambda * p.psi_inf()), 0.0};
        case WeightKind::AlphaBar:
            return {std::exp(p.lambda * p.psi_sup()), std::exp(1.5 * p.lambda * p.psi_sup())};
        case WeightKind::AlphaUnder:
            return {std::exp(p.lambda * p.psi_inf()), std::exp(1.5 * p.lambda * p.psi_sup())};
    }
    return {0.0, 0.0};
}

}  // namespace

double eval_weight(WeightKind kind, const AnnulusGrid& grid, const CarlemanParams& params,
                   double t, double r) {
    const double tau = t * (grid.T - t);
    if (!(tau > 0.0)) {
        if (phi_kind(kind))
            throw singular_weight_error(std::string(weight_kind_name(kind)) +
                                        " is singular at t in {0, T}");
        return -std::numeric_limits<double>::infinity();
    }
    const WeightParts w = weight_parts(kind, grid, params, r);
    return (w.exp_level - w.exp_ceiling) / tau;
}

double exp_factor_alpha(const AnnulusGrid& grid, const CarlemanParams& params, double factor,
                        double t, double r, WeightKind alpha_kind) {
    const double tau = t * (grid.T - t);
    if (!(tau > 0.0)) return 0.0;
    return std::exp(factor * eval_weight(alpha_kind, grid, params, t, r));
}

WeightField build_weight_field(WeightKind kind, const AnnulusGrid& grid,
                               const CarlemanParams& params) {
    params.validate();
    WeightField f;
    f.kind = kind;
    f.params = params;
    f.n_interior_levels = grid.nt - 1;
    f.n_space = grid.n_space();
    f.values.resize(static_cast<std::size_t>(f.n_interior_levels) * f.n_space);
    for (int k = 1; k < grid.nt; ++k) {
        const double t = grid.time(k);
        for (int i = 0; i <= grid.nr; ++i) {
            const double v = eval_weight(kind, grid, params, t, grid.radius(i));
            for (int j = 0; j < grid.ntheta; ++j)
                f.values[static_cast<std::size_t>(k - 1) * f.n_space + grid.node(i, j)] = v;
        }
    }
    return f;
}

double domination_constant(double m) { return std::pow(m, m) * std::exp(-m); }

DominationReport weight_domination_check(const CarlemanParams& params, const AnnulusGrid& grid,
                                         double s1, double s2) {
    params.validate();
    if (!(s1 > 0.0) || !(s2 > s1)) throw parameter_error("domination check: need 0 < s1 < s2");
    const double sigma = s2 / s1;
    if (!(sigma > 1.0)) throw parameter_error("domination check: sigma = s2/s1 must exceed 1");

    const double m = params.m;
    DominationReport rep;
    rep.C_m = domination_constant(m);

    // log of  phi^m s2^m lambda^m e^{(s2 - s1) alpha}  per node; alpha < 0 so
    // the exponential part only helps. Exact in log space.
    double log_sup = -std::numeric_limits<double>::infinity();
    for (int k = 1; k < grid.nt; ++k) {
        const double t = grid.time(k);
        for (int i = 0; i <= grid.nr; ++i) {
            const double r = grid.radius(i);
            const double phi = eval_weight(WeightKind::Phi, grid, params, t, r);
            const double alpha = eval_weight(WeightKind::Alpha, grid, params, t, r);
            const double lg = m * (std::log(phi) + std::log(s2) + std::log(params.lambda)) +
                              (s2 - s1) * alpha;
            log_sup = std::max(log_sup, lg);
        }
    }
    rep.log_sup_ratio = log_sup;
    rep.sup_ratio = std::exp(log_sup);
    rep.holds = log_sup <= std::log(rep.C_m) + std::log1p(1e-6);
    return rep;
}

ComparisonChainReport comparison_chain_check(const CarlemanParams& params, const AnnulusGrid& grid,
                                             int j) {
    params.validate();
    const double gamma =
        params.gamma > 0.0 ? params.gamma : std::pow(params.gamma_bar, 1.0 / (params.m + 3.0));
    if (!(gamma > 1.0)) throw parameter_error("comparison chain: gamma must exceed 1");
    const double gj = std::pow(gamma, j);

    ComparisonChainReport rep;
    rep.margin = std::numeric_limits<double>::infinity();
    // Exponent chain gamma^j s alpha < gamma^j s alpha_bar < s alpha over
    // interior spatial nodes. All three share the 1/(t(T-t)) factor, so the
    // comparison is time-independent; we still scan interior levels to keep
    // the report nodewise.
    for (int k = 1; k < grid.nt; ++k) {
        const double t = grid.time(k);
        const double abar = eval_weight(WeightKind::AlphaBar, grid, params, t, grid.r0);
        for (int i = 1; i < grid.nr; ++i) {
            const double a = eval_weight(WeightKind::Alpha, grid, params, t, grid.radius(i));
            const double lhs_gap = gj * params.s * (abar - a);   // > 0 required
            const double rhs_gap = params.s * (a - gj * abar);   // > 0 required
            rep.margin = std::min(rep.margin, std::min(lhs_gap, rhs_gap));
        }
    }
    rep.holds = rep.margin > 0.0;
    return rep;
}

double search_lambda_domination(const AnnulusGrid& grid, double sigma, double m, double s1,
                                int K, double lambda_max) {
    auto holds = [&](double lambda) {
        CarlemanParams p;
        p.lambda = lambda;
        p.K = K;
        p.sigma = sigma;
        p.m = m;
        p.s = s1;
        return weight_domination_check(p, grid, s1, sigma * s1).holds;
    };
    return threshold_search(holds, 1e-3, lambda_max);
}

double search_lambda_chain(const AnnulusGrid& grid, double gamma, int j, int K,
                           double lambda_max) {
    auto holds = [&](double lambda) {
        CarlemanParams p;
        p.lambda = lambda;
        p.K = K;
        p.gamma = gamma;
        return comparison_chain_check(p, grid, j).holds;
    };
    return threshold_search(holds, 1e-3, lambda_max);
}

namespace {

// Exact rational with small terms; the ladder stays in int64 range for any
// practical q.
struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;

    void reduce() {
        const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
        if (g > 1) {
            num /= g;
            den /= g;
        }
    }
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

}  // namespace

std::vector<double> bootstrap_exponents(double q, int N) {
    if (!(q >= 2.0)) throw parameter_error("bootstrap exponents: q must be at least 2");
    if (N < 1) throw parameter_error("bootstrap exponents: dimension must be at least 1");

    const std::int64_t cap = N + 2;
    Rational cur{2, 1};
    std::vector<double> ladder{cur.value()};
    while (ladder.back() <= q) {
        if (cur.num > (std::numeric_limits<std::int64_t>::max() >> 3) / (cap > 3 ? cap : 3))
            throw parameter_error("bootstrap exponents: q too large for the exact ladder");
        Rational next;
        if (cur.num < cap * cur.den) {  // exact q_{j-1} < N+2
            // (N+2) q / (N+2 - q) on rationals: q = n/d -> (cap*n) / (cap*d - n)
            next.num = cap * cur.num;
            next.den = cap * cur.den - cur.num;
        } else {
            next.num = 3 * cur.num;
            next.den = 2 * cur.den;
        }
        next.reduce();
        if (!(next.value() > cur.value()))
            throw numeric_error("bootstrap exponents: ladder failed to increase");
        ladder.push_back(next.value());
        cur = next;
    }
    return ladder;
}

}  // namespace carleman
