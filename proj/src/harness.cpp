#include "carleman/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "carleman/norms.hpp"
#include "carleman/numerics.hpp"

namespace carleman {

namespace {

constexpr double kResidualGate = 1e-8;

double checked_residual(const ForwardProblem& fp, const SpaceTimeField& y,
                        const SpaceTimeField& g) {
    const double res = fp.solution_residual(y, g);
    if (res > kResidualGate)
        throw parameter_error("carleman harness: y does not solve the system for g (residual " +
                              std::to_string(res) + ")");
    return res;
}

// Sum of squares over components of a per-component magnitude field.
double sq_over_components(const SpaceTimeField& f, int k, int s) {
    double acc = 0.0;
    for (int c = 0; c < f.n_comp; ++c) {
        const double v = f.at(c, k, s);
        acc += v * v;
    }
    return acc;
}

}  // namespace

std::string grid_signature(const AnnulusGrid& grid) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "r0=%g r1=%g nr=%d ntheta=%d T=%g nt=%d", grid.r0, grid.r1,
                  grid.nr, grid.ntheta, grid.T, grid.nt);
    return buf;
}

CarlemanReport verify_l2_carleman(const ForwardProblem& fp, const SpaceTimeField& y,
                                  const SpaceTimeField& g, const ObservationTrace& zeta,
                                  const CarlemanParams& params) {
    params.validate();
    const AnnulusGrid& grid = fp.grid();
    const QuadratureWeights quad = quadrature_weights(grid);

    CarlemanReport rep;
    rep.params = params;
    rep.q = 2.0;
    rep.grid_signature = grid_signature(grid);
    rep.solver_residual = checked_residual(fp, y, g);

    const double s = params.s, lam = params.lambda;
    const double amax = max_alpha(grid, params);
    rep.log_scale_lhs = rep.log_scale_rhs = 2.0 * s * amax;

    const DerivativeFields d = derivative_fields(y, grid);

    std::vector<double> t_dtd2, t_grad, t_zero, t_g0, t_src, t_obs;
    for (int k = 1; k < grid.nt; ++k) {
        const double t = grid.time(k);
        for (int i = 0; i <= grid.nr; ++i) {
            const double r = grid.radius(i);
            const double alpha = eval_weight(WeightKind::Alpha, grid, params, t, r);
            const double w2s = std::exp(2.0 * s * (alpha - amax));
            if (w2s == 0.0) continue;
            const double phi = eval_weight(WeightKind::Phi, grid, params, t, r);
            const double inv_sphi = 1.0 / (s * phi);
            const double sphi = s * lam * lam * phi;
            const double s3phi3 = s * s * s * lam * lam * lam * lam * phi * phi * phi;
            for (int j = 0; j < grid.ntheta; ++j) {
                const int sp = grid.node(i, j);
                const double wv = quad.volume(k, i) * w2s;
                const double dt2 = sq_over_components(d.time_deriv, k, sp);
                const double d22 = sq_over_components(d.hess_frob, k, sp);
                const double dy2 = sq_over_components(d.grad_mag, k, sp);
                const double y2 = sq_over_components(y, k, sp);
                const double g2 = sq_over_components(g, k, sp);
                t_dtd2.push_back(wv * inv_sphi * (dt2 + d22));
                t_grad.push_back(wv * sphi * dy2);
                t_zero.push_back(wv * s3phi3 * y2);
                t_src.push_back(wv * g2);
            }
            // boundary cylinders share the (k, i) weight structure
            if (i == 0 || i == grid.nr) {
                const double s3l3phi3 =
                    s * s * s * lam * lam * lam * phi * phi * phi;
                for (int j = 0; j < grid.ntheta; ++j) {
                    const int sp = grid.node(i, j);
                    const double wb =
                        quad.boundary(k, i == 0 ? NodeClass::Gamma0 : NodeClass::Gamma1) * w2s;
                    if (i == 0) {
                        t_g0.push_back(wb * s3l3phi3 * sq_over_components(y, k, sp));
                    } else {
                        double z2 = 0.0;
                        for (int c = 0; c < zeta.n_comp; ++c) {
                            const double v = zeta.at(c, k, j);
                            z2 += v * v;
                        }
                        t_obs.push_back(wb * s3l3phi3 * z2);
                    }
                }
            }
        }
    }

    rep.lhs_terms = {{"dt_d2", pairwise_sum(t_dtd2)},
                     {"grad", pairwise_sum(t_grad)},
                     {"zero_order", pairwise_sum(t_zero)},
                     {"gamma0", pairwise_sum(t_g0)}};
    rep.rhs_terms = {{"source", pairwise_sum(t_src)}, {"obs", pairwise_sum(t_obs)}};
    for (const auto& [name, v] : rep.lhs_terms) rep.lhs_total += v;
    for (const auto& [name, v] : rep.rhs_terms) rep.rhs_total += v;

    if (rep.lhs_total == 0.0) {
        rep.ratio = 0.0;
    } else if (rep.rhs_total == 0.0) {
        rep.anomaly = true;
        rep.ratio = std::numeric_limits<double>::infinity();
    } else {
        rep.ratio = rep.lhs_total / rep.rhs_total;  // common scale cancels
    }
    return rep;
}

CarlemanReport verify_lq_carleman(const ForwardProblem& fp, const SpaceTimeField& y,
                                  const SpaceTimeField& g, const ObservationTrace& zeta,
                                  const CarlemanParams& params, double q) {
    params.validate(/*require_s_prime=*/true);
    const AnnulusGrid& grid = fp.grid();
    const QuadratureWeights quad = quadrature_weights(grid);

    CarlemanReport rep;
    rep.params = params;
    rep.q = q;
    rep.grid_signature = grid_signature(grid);
    rep.solver_residual = checked_residual(fp, y, g);

    const double s = params.s, sp = params.s_prime, lam = params.lambda;
    const double amax = max_alpha(grid, params);
    rep.log_scale_lhs = sp * amax;
    rep.log_scale_rhs = s * amax;

    const DerivativeFields d = derivative_fields(y, grid);
    rep.lhs_terms = {
        {"y", weighted_lq_norm(y, WeightKind::Alpha, params, sp, grid, q, amax)},
        {"dy", weighted_lq_norm(d.grad_mag, WeightKind::Alpha, params, sp, grid, q, amax)},
        {"d2y", weighted_lq_norm(d.hess_frob, WeightKind::Alpha, params, sp, grid, q, amax)},
        {"dty", weighted_lq_norm(d.time_deriv, WeightKind::Alpha, params, sp, grid, q, amax)}};

    // rhs: ||g e^{s a}||_q and the Sigma1 trace in L2, both scaled by e^{-s amax}
    const double g_term = weighted_lq_norm(g, WeightKind::Alpha, params, s, grid, q, amax);
    std::vector<double> t_obs, t_obs3;
    for (int k = 1; k < grid.nt; ++k) {
        const double t = grid.time(k);
        const double alpha1 = eval_weight(WeightKind::Alpha, grid, params, t, grid.r1);
        const double w2s = std::exp(2.0 * s * (alpha1 - amax));
        if (w2s == 0.0) continue;
        const double phi1 = eval_weight(WeightKind::Phi, grid, params, t, grid.r1);
        const double s3l3phi3 = s * s * s * lam * lam * lam * phi1 * phi1 * phi1;
        const double wb = quad.boundary(k, NodeClass::Gamma1);
        for (int c = 0; c < zeta.n_comp; ++c)
            for (int j = 0; j < grid.ntheta; ++j) {
                const double z2 = zeta.at(c, k, j) * zeta.at(c, k, j);
                t_obs.push_back(wb * w2s * z2);
                t_obs3.push_back(wb * w2s * s3l3phi3 * z2);
            }
    }
    const double obs_term = std::sqrt(pairwise_sum(t_obs));
    const double obs_phi3 = std::sqrt(pairwise_sum(t_obs3));
    rep.rhs_terms = {{"source", g_term}, {"obs", obs_term}, {"obs_phi3", obs_phi3}};

    for (const auto& [name, v] : rep.lhs_terms) rep.lhs_total += v;
    rep.rhs_total = g_term + obs_term;  // the estimate as printed

    if (rep.lhs_total == 0.0) {
        rep.ratio = 0.0;
    } else if (rep.rhs_total == 0.0) {
        rep.anomaly = true;
        rep.ratio = std::numeric_limits<double>::infinity();
    } else {
        // true ratio carries the scale mismatch e^{(s'-s) amax}
        rep.ratio = std::exp(std::log(rep.lhs_total) - std::log(rep.rhs_total) +
                             (sp - s) * amax);
    }
    return rep;
}

void apply_refinement_check(CarlemanReport& base, const CarlemanReport& fine, double rel_tol) {
    const double log_tol = std::log1p(rel_tol);
    auto stable = [&](double tb, double log_sb, double tf, double log_sf) {
        if (tb == 0.0 && tf == 0.0) return true;
        if (tb == 0.0 || tf == 0.0) return false;
        const double delta = std::abs((std::log(tb) + log_sb) - (std::log(tf) + log_sf));
        return delta <= log_tol;
    };
    bool ok = base.lhs_terms.size() == fine.lhs_terms.size() &&
              base.rhs_terms.size() == fine.rhs_terms.size();
    if (ok) {
        for (std::size_t idx = 0; idx < base.lhs_terms.size(); ++idx)
            ok = ok && stable(base.lhs_terms[idx].second, base.log_scale_lhs,
                              fine.lhs_terms[idx].second, fine.log_scale_lhs);
        for (std::size_t idx = 0; idx < base.rhs_terms.size(); ++idx)
            ok = ok && stable(base.rhs_terms[idx].second, base.log_scale_rhs,
                              fine.rhs_terms[idx].second, fine.log_scale_rhs);
    }
    base.unconverged = !ok;
}

StabilityTable estimate_stability_constant(const ForwardProblem& fp,
                                           const std::vector<SpaceTimeField>& sources, double q) {
    const AnnulusGrid& grid = fp.grid();
    StabilityTable table;
    std::vector<double> ratios;
    int id = 0;
    for (const auto& g : sources) {
        StabilitySample smp;
        smp.sample_id = id++;
        smp.g_norm_q = lq_norm(g, grid, q);
        const ObservationTrace zeta = fp.apply_forward(g);
        smp.zeta_norm = std::sqrt(std::max(0.0, fp.dot_trace(zeta, zeta)));
        if (smp.zeta_norm == 0.0 && smp.g_norm_q > 0.0) {
            smp.anomaly = true;
            smp.ratio = std::numeric_limits<double>::infinity();
        } else if (smp.zeta_norm == 0.0) {
            smp.ratio = 0.0;
        } else {
            smp.ratio = smp.g_norm_q / smp.zeta_norm;
            if (!std::isfinite(smp.ratio)) smp.anomaly = true;
        }
        if (std::isfinite(smp.ratio)) ratios.push_back(smp.ratio);
        table.samples.push_back(std::move(smp));
    }
    if (!ratios.empty()) {
        std::vector<double> sorted = ratios;
        std::sort(sorted.begin(), sorted.end());
        const std::size_t mid = sorted.size() / 2;
        table.median_ratio = sorted.size() % 2 == 1
                                 ? sorted[mid]
                                 : 0.5 * (sorted[mid - 1] + sorted[mid]);
        table.max_ratio = sorted.back();
        for (auto& smp : table.samples)
            smp.flagged = std::isfinite(smp.ratio) && smp.ratio > 10.0 * table.median_ratio;
    }
    return table;
}

}  // namespace carleman
