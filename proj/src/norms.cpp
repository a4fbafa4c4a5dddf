#include "carleman/norms.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "carleman/numerics.hpp"

namespace carleman {

double conjugate_exponent(double q) {
    if (q == kQInfinity) return 1.0;
    if (!(q >= 2.0)) throw parameter_error("conjugate exponent: q must be at least 2");
    return q / (q - 1.0);
}

namespace {

double power_abs(double v, double q) {
    const double a = std::abs(v);
    if (q == 2.0) return a * a;
    return std::pow(a, q);
}

}  // namespace

double lq_norm(const SpaceTimeField& f, const AnnulusGrid& grid, double q) {
    if (q == kQInfinity) return f.max_abs();
    if (!(q >= 2.0)) throw parameter_error("lq_norm: q must be at least 2 (or the max sentinel)");
    const QuadratureWeights quad = quadrature_weights(grid);
    std::vector<double> terms;
    terms.reserve(f.data.size());
    for (int c = 0; c < f.n_comp; ++c)
        for (int k = 0; k < f.n_time; ++k) {
            const auto lv = f.level(c, k);
            for (int s = 0; s < f.n_space; ++s)
                terms.push_back(quad.volume(k, grid.node_radial(s)) * power_abs(lv[s], q));
        }
    return std::pow(pairwise_sum(terms), 1.0 / q);
}

double lq_norm_trace(const ObservationTrace& z, const AnnulusGrid& grid, double q) {
    if (q == kQInfinity) {
        double m = 0.0;
        for (double v : z.data) m = std::max(m, std::abs(v));
        return m;
    }
    if (!(q >= 2.0)) throw parameter_error("trace norm: q must be at least 2");
    const QuadratureWeights quad = quadrature_weights(grid);
    std::vector<double> terms;
    terms.reserve(z.data.size());
    for (int c = 0; c < z.n_comp; ++c)
        for (int k = 0; k < z.n_time; ++k) {
            const double wt = quad.time_w[k] * quad.gamma1_arc;
            for (int j = 0; j < z.ntheta; ++j) terms.push_back(wt * power_abs(z.at(c, k, j), q));
        }
    return std::pow(pairwise_sum(terms), 1.0 / q);
}

double max_alpha(const AnnulusGrid& grid, const CarlemanParams& params, WeightKind alpha_kind) {
    double m = -std::numeric_limits<double>::infinity();
    for (int k = 1; k < grid.nt; ++k)
        for (int i = 0; i <= grid.nr; ++i)
            m = std::max(m, eval_weight(alpha_kind, grid, params, grid.time(k), grid.radius(i)));
    return m;
}

double weighted_lq_norm(const SpaceTimeField& f, WeightKind alpha_kind,
                        const CarlemanParams& params, double factor, const AnnulusGrid& grid,
                        double q, double alpha_shift) {
    params.validate();
    const QuadratureWeights quad = quadrature_weights(grid);
    if (q == kQInfinity) {
        double m = 0.0;
        for (int c = 0; c < f.n_comp; ++c)
            for (int k = 1; k < grid.nt; ++k) {
                const auto lv = f.level(c, k);
                for (int s = 0; s < f.n_space; ++s) {
                    const double a = eval_weight(alpha_kind, grid, params, grid.time(k),
                                                 grid.radius(grid.node_radial(s)));
                    m = std::max(m, std::abs(lv[s]) * std::exp(factor * (a - alpha_shift)));
                }
            }
        return m;
    }
    if (!(q >= 2.0)) throw parameter_error("weighted norm: q must be at least 2");
    std::vector<double> terms;
    terms.reserve(f.data.size());
    for (int c = 0; c < f.n_comp; ++c)
        for (int k = 1; k < grid.nt; ++k) {
            const auto lv = f.level(c, k);
            const double t = grid.time(k);
            for (int i = 0; i <= grid.nr; ++i) {
                const double a = eval_weight(alpha_kind, grid, params, t, grid.radius(i));
                const double w = std::exp(q * factor * (a - alpha_shift));
                if (w == 0.0) continue;
                for (int j = 0; j < grid.ntheta; ++j)
                    terms.push_back(quad.volume(k, i) * power_abs(lv[grid.node(i, j)], q) * w);
            }
        }
    if (terms.empty()) return 0.0;
    return std::pow(pairwise_sum(terms), 1.0 / q);
}

namespace {

// Second-order first/second differences along the radial index, one-sided at
// the rings.
// Difference-first groupings keep constants annihilated exactly.
void radial_derivs(const AnnulusGrid& g, std::span<const double> lv, int i, int j, double& ur,
                   double& urr) {
    const double dr = g.dr;
    if (i == 0) {
        const double a = lv[g.node(0, j)], b = lv[g.node(1, j)], c = lv[g.node(2, j)],
                     d = lv[g.node(3, j)];
        ur = (4.0 * (b - a) - (c - a)) / (2.0 * dr);
        urr = (2.0 * (a - b) - 3.0 * (b - c) + (c - d)) / (dr * dr);
    } else if (i == g.nr) {
        const double a = lv[g.node(i, j)], b = lv[g.node(i - 1, j)], c = lv[g.node(i - 2, j)],
                     d = lv[g.node(i - 3, j)];
        ur = -(4.0 * (b - a) - (c - a)) / (2.0 * dr);
        urr = (2.0 * (a - b) - 3.0 * (b - c) + (c - d)) / (dr * dr);
    } else {
        const double m = lv[g.node(i - 1, j)], o = lv[g.node(i, j)], p = lv[g.node(i + 1, j)];
        ur = (p - m) / (2.0 * dr);
        urr = ((p - o) + (m - o)) / (dr * dr);
    }
}

}  // namespace

DerivativeFields derivative_fields(const SpaceTimeField& y, const AnnulusGrid& grid) {
    DerivativeFields out{SpaceTimeField(y.n_comp, y.n_time, y.n_space),
                         SpaceTimeField(y.n_comp, y.n_time, y.n_space),
                         SpaceTimeField(y.n_comp, y.n_time, y.n_space)};
    const double dth = grid.dtheta;

    for (int c = 0; c < y.n_comp; ++c) {
        for (int k = 0; k < y.n_time; ++k) {
            const auto lv = y.level(c, k);
            auto gm = out.grad_mag.level(c, k);
            auto hf = out.hess_frob.level(c, k);
            for (int i = 0; i <= grid.nr; ++i) {
                const double r = grid.radius(i);
                for (int j = 0; j < grid.ntheta; ++j) {
                    double ur, urr;
                    radial_derivs(grid, lv, i, j, ur, urr);
                    const double ut =
                        (lv[grid.node(i, j + 1)] - lv[grid.node(i, j - 1)]) / (2.0 * dth);
                    const double utt = ((lv[grid.node(i, j + 1)] - lv[grid.node(i, j)]) +
                                        (lv[grid.node(i, j - 1)] - lv[grid.node(i, j)])) /
                                       (dth * dth);
                    // theta-derivative of u_r, reusing the radial stencil
                    double urp, urr_unused, urm;
                    radial_derivs(grid, lv, i, grid.wrap(j + 1), urp, urr_unused);
                    radial_derivs(grid, lv, i, grid.wrap(j - 1), urm, urr_unused);
                    const double urt = (urp - urm) / (2.0 * dth);

                    gm[grid.node(i, j)] = std::hypot(ur, ut / r);
                    // Hessian in the polar orthonormal frame
                    const double h_rr = urr;
                    const double h_rt = urt / r - ut / (r * r);
                    const double h_tt = utt / (r * r) + ur / r;
                    hf[grid.node(i, j)] =
                        std::sqrt(h_rr * h_rr + 2.0 * h_rt * h_rt + h_tt * h_tt);
                }
            }
        }

        // time derivative, second order with one-sided ends
        for (int s = 0; s < y.n_space; ++s) {
            for (int k = 0; k < y.n_time; ++k) {
                double v;
                if (k == 0) {
                    const double a = y.at(c, 0, s), b = y.at(c, 1, s), cc = y.at(c, 2, s);
                    v = (4.0 * (b - a) - (cc - a)) / (2.0 * grid.dt);
                } else if (k == y.n_time - 1) {
                    const double a = y.at(c, k, s), b = y.at(c, k - 1, s), cc = y.at(c, k - 2, s);
                    v = -(4.0 * (b - a) - (cc - a)) / (2.0 * grid.dt);
                } else {
                    v = (y.at(c, k + 1, s) - y.at(c, k - 1, s)) / (2.0 * grid.dt);
                }
                out.time_deriv.at(c, k, s) = v;
            }
        }
    }
    return out;
}

double w21q_norm(const SpaceTimeField& y, const AnnulusGrid& grid, double q) {
    const DerivativeFields d = derivative_fields(y, grid);
    if (q == kQInfinity) {
        return std::max({lq_norm(y, grid, q), lq_norm(d.grad_mag, grid, q),
                         lq_norm(d.hess_frob, grid, q), lq_norm(d.time_deriv, grid, q)});
    }
    const double a = lq_norm(y, grid, q);
    const double b = lq_norm(d.grad_mag, grid, q);
    const double c = lq_norm(d.hess_frob, grid, q);
    const double e = lq_norm(d.time_deriv, grid, q);
    return std::pow(std::pow(a, q) + std::pow(b, q) + std::pow(c, q) + std::pow(e, q), 1.0 / q);
}

double evaluate_norm(const SpaceTimeField& y, const AnnulusGrid& grid, const NormRequest& req) {
    if (!(req.q >= 2.0) && req.q != kQInfinity)
        throw parameter_error("norm request: q must be at least 2 or the max sentinel");
    const SpaceTimeField* target = &y;
    DerivativeFields d;
    if (req.derivative != NormRequest::Derivative::None) {
        d = derivative_fields(y, grid);
        switch (req.derivative) {
            case NormRequest::Derivative::D: target = &d.grad_mag; break;
            case NormRequest::Derivative::D2: target = &d.hess_frob; break;
            case NormRequest::Derivative::Dt: target = &d.time_deriv; break;
            default: break;
        }
    }
    if (req.weight) {
        const auto& [kind, params] = *req.weight;
        return weighted_lq_norm(*target, kind, params, params.s, grid, req.q);
    }
    return lq_norm(*target, grid, req.q);
}

}  // namespace carleman
