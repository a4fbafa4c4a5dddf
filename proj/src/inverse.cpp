#include "carleman/inverse.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "carleman/norms.hpp"
#include "carleman/numerics.hpp"

namespace carleman {

namespace {

// <f, h>_{L2(Q)} summed over components, quadrature-weighted.
double pairing(const SpaceTimeField& f, const SpaceTimeField& h, const AnnulusGrid& grid) {
    const QuadratureWeights quad = quadrature_weights(grid);
    std::vector<double> terms;
    terms.reserve(f.data.size());
    for (int c = 0; c < f.n_comp; ++c)
        for (int k = 0; k < f.n_time; ++k) {
            const auto lf = f.level(c, k);
            const auto lh = h.level(c, k);
            for (int s = 0; s < f.n_space; ++s)
                terms.push_back(quad.volume(k, grid.node_radial(s)) * lf[s] * lh[s]);
        }
    return pairwise_sum(terms);
}

}  // namespace

void SourceClassSpec::validate(const AnnulusGrid& grid) const {
    if (!(delta_tilde > 0.0))
        throw parameter_error("source class: delta_tilde must be positive");
    if (!(q >= 2.0)) throw parameter_error("source class: q must be at least 2");
    if (g_tilde.empty()) throw parameter_error("source class: dual list must be nonempty");
    (void)grid;
    for (const auto& gt : g_tilde) {
        if (gt.max_abs() == 0.0)
            throw parameter_error("source class: dual fields must be nonzero");
    }
}

namespace {

struct BumpDraw {
    std::vector<std::vector<BumpParam>> bumps;
    double time_base;
    double time_amp;
};

BumpDraw draw_bumps(const AnnulusGrid& grid, int n_comp, std::mt19937_64& rng,
                    bool radial_rich) {
    (void)grid;
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    BumpDraw out;
    out.bumps.resize(n_comp);
    for (int c = 0; c < n_comp; ++c) {
        const int nb = 1 + static_cast<int>(u01(rng) * 2.999);
        for (int b = 0; b < nb; ++b) {
            BumpParam bp;
            bp.amp = 0.5 + 1.5 * u01(rng);
            bp.phi = 2.0 * std::numbers::pi * u01(rng);
            bp.J = 1 + static_cast<int>(u01(rng) * 3.999);
            bp.L = radial_rich ? static_cast<int>(u01(rng) * 2.999) : 0;
            bp.k = 1 + static_cast<int>(u01(rng) * 1.999);
            bp.psi = 2.0 * std::numbers::pi * u01(rng);
            out.bumps[c].push_back(bp);
        }
    }
    out.time_base = 0.3 + 0.7 * u01(rng);
    out.time_amp = 0.7 * u01(rng);
    return out;
}

}  // namespace

SourceClassSpec default_source_class(const AnnulusGrid& grid, int n_comp, double q,
                                     std::uint64_t seed) {
    SourceClassSpec spec;
    spec.q = q;
    SpaceTimeField ones(n_comp, grid.n_time(), grid.n_space());
    for (double& v : ones.data) v = 1.0;
    spec.g_tilde.push_back(std::move(ones));

    // probe draws calibrate delta_tilde = 0.5 * min pairing ratio
    std::mt19937_64 rng(seed);
    double worst = std::numeric_limits<double>::infinity();
    for (int probe = 0; probe < 8; ++probe) {
        const BumpDraw d = draw_bumps(grid, n_comp, rng, /*radial_rich=*/true);
        const SpaceTimeField g = render_bumps(d.bumps, d.time_base, d.time_amp, grid);
        const double ratio = pairing(g, spec.g_tilde[0], grid) / lq_norm(g, grid, q);
        worst = std::min(worst, ratio);
    }
    spec.delta_tilde = 0.5 * worst;
    return spec;
}

MembershipReport class_membership(const SpaceTimeField& g, const SourceClassSpec& spec,
                                  const AnnulusGrid& grid) {
    spec.validate(grid);
    for (double v : g.data)
        if (v < 0.0)
            throw parameter_error("class membership: source violates (H2), negative entries");
    g.validate();

    MembershipReport rep;
    const double gq = lq_norm(g, grid, spec.q);
    if (gq == 0.0) {
        // the zero source is excluded: the stability ratio is vacuous at 0
        rep.member = false;
        rep.margin = 0.0;
        return rep;
    }
    rep.margin = -std::numeric_limits<double>::infinity();
    for (std::size_t w = 0; w < spec.g_tilde.size(); ++w) {
        const double margin = pairing(g, spec.g_tilde[w], grid) - spec.delta_tilde * gq;
        if (margin > rep.margin) {
            rep.margin = margin;
            rep.witness = static_cast<int>(w);
        }
    }
    rep.member = rep.margin >= 0.0;
    if (!rep.member) rep.witness = -1;
    return rep;
}

std::vector<double> SourceSample::time_profile(const AnnulusGrid& grid) const {
    std::vector<double> sigma(grid.n_time());
    for (int k = 0; k < grid.n_time(); ++k) {
        const double sn = std::sin(std::numbers::pi * grid.time(k) / grid.T);
        sigma[k] = time_base + time_amp * sn * sn;
    }
    return sigma;
}

namespace {

double bump_value(const BumpParam& b, double xh, double th) {
    const double mask = std::sin(std::numbers::pi * xh);
    const double ang = std::pow(0.5 * (1.0 + std::cos(th - b.phi)), b.J);
    const double rad =
        b.L == 0 ? 1.0
                 : std::pow(0.5 * (1.0 + std::cos(b.k * std::numbers::pi * xh - b.psi)), b.L);
    return b.amp * mask * mask * ang * rad;
}

}  // namespace

SpaceTimeField render_bumps(const std::vector<std::vector<BumpParam>>& bumps, double time_base,
                            double time_amp, const AnnulusGrid& grid) {
    const int n = static_cast<int>(bumps.size());
    SpaceTimeField g(n, grid.n_time(), grid.n_space());
    for (int c = 0; c < n; ++c)
        for (int k = 0; k < grid.n_time(); ++k) {
            auto lv = g.level(c, k);
            const double t = grid.time(k);
            const double sn = std::sin(std::numbers::pi * t / grid.T);
            const double sigma = time_base + time_amp * sn * sn;
            for (int i = 0; i <= grid.nr; ++i) {
                const double xh = (grid.radius(i) - grid.r0) / (grid.r1 - grid.r0);
                for (int j = 0; j < grid.ntheta; ++j) {
                    double v = 0.0;
                    for (const BumpParam& b : bumps[c]) v += bump_value(b, xh, grid.theta(j));
                    lv[grid.node(i, j)] = sigma * v;
                }
            }
        }
    return g;
}

SourceSample sample_source(const SourceClassSpec& spec, const AnnulusGrid& grid,
                           std::uint64_t seed, int n_comp, bool radial_rich) {
    spec.validate(grid);
    std::mt19937_64 rng(seed);
    for (int attempt = 0; attempt < 100; ++attempt) {
        const BumpDraw d = draw_bumps(grid, n_comp, rng, radial_rich);
        SourceSample sample{render_bumps(d.bumps, d.time_base, d.time_amp, grid), d.bumps,
                            d.time_base, d.time_amp};
        if (class_membership(sample.field, spec, grid).member) return sample;
    }
    throw sampling_error("sample_source: no class member found in 100 attempts");
}

namespace {

double objective(const ForwardProblem& fp, const SpaceTimeField& x, const SpaceTimeField& b,
                 const SpaceTimeField& r, double zeta_sq) {
    // J(x) = ||Fx - zeta||^2 + rho ||x||^2 = -<x, b + r> + ||zeta||^2
    SpaceTimeField bp = b;
    for (std::size_t i = 0; i < bp.data.size(); ++i) bp.data[i] += r.data[i];
    return zeta_sq - fp.dot_volume(x, bp);
}

}  // namespace

namespace {

// CG for the full space-time unknown.
ReconstructionResult reconstruct_full(const ForwardProblem& fp, const ObservationTrace& zeta_obs,
                                      const ReconstructOptions& opt,
                                      const ReconstructionResult* warm_start) {
    const AnnulusGrid& grid = fp.grid();
    const int n = fp.n_components();

    auto apply_normal = [&](const SpaceTimeField& x) {
        SpaceTimeField ax = fp.apply_adjoint(fp.apply_forward(x));
        for (std::size_t i = 0; i < ax.data.size(); ++i) ax.data[i] += opt.rho * x.data[i];
        return ax;
    };

    const SpaceTimeField b = fp.apply_adjoint(zeta_obs);
    const double zeta_sq = fp.dot_trace(zeta_obs, zeta_obs);

    ReconstructionResult out;
    out.rho = opt.rho;
    SpaceTimeField x(n, grid.n_time(), grid.n_space());
    SpaceTimeField r = b;
    if (warm_start != nullptr && !warm_start->g_hat.data.empty()) {
        x = warm_start->g_hat;
        const SpaceTimeField ax = apply_normal(x);
        for (std::size_t i = 0; i < r.data.size(); ++i) r.data[i] = b.data[i] - ax.data[i];
    }
    SpaceTimeField p = r;
    double rs = fp.dot_volume(r, r);
    const double rs0 = std::max(fp.dot_volume(b, b), 1e-300);

    int iter = 0;
    for (; iter < opt.max_iter; ++iter) {
        if (std::sqrt(rs / rs0) <= opt.tol) break;
        const SpaceTimeField ap = apply_normal(p);
        const double pap = fp.dot_volume(p, ap);
        if (!(pap > 0.0)) break;  // numerically rank-deficient direction
        const double alpha = rs / pap;
        for (std::size_t i = 0; i < x.data.size(); ++i) x.data[i] += alpha * p.data[i];
        bool projected = false;
        if (opt.project_nonneg) {
            for (double& v : x.data)
                if (v < 0.0) {
                    v = 0.0;
                    projected = true;
                }
        }
        if (projected) {
            const SpaceTimeField ax = apply_normal(x);
            for (std::size_t i = 0; i < r.data.size(); ++i)
                r.data[i] = b.data[i] - ax.data[i];
            p = r;
            rs = fp.dot_volume(r, r);
        } else {
            for (std::size_t i = 0; i < r.data.size(); ++i) r.data[i] -= alpha * ap.data[i];
            const double rs_new = fp.dot_volume(r, r);
            const double beta = rs_new / rs;
            for (std::size_t i = 0; i < p.data.size(); ++i)
                p.data[i] = r.data[i] + beta * p.data[i];
            rs = rs_new;
        }
        out.objective_trace.push_back(objective(fp, x, b, r, zeta_sq));
    }
    out.iterations = iter;
    out.converged = std::sqrt(rs / rs0) <= opt.tol;

    // the backward-Euler map is blind to the t=0 slice; extend from level 1
    for (int c = 0; c < n; ++c) {
        auto l0 = x.level(c, 0);
        const auto l1 = x.level(c, 1);
        for (int s = 0; s < x.n_space; ++s) l0[s] = l1[s];
    }
    out.g_hat = std::move(x);
    return out;
}

// CG for the separable unknown g(t,x) = sigma(t) f(x): the same F/F* pair,
// contracted against the known profile. With a dictionary the unknown is the
// coefficient vector of f in an orthonormal smooth basis; otherwise it is the
// nodal spatial field. Either way the objective restricted to that space is
// exactly ||F g - zeta||^2 + rho ||f||^2.
ReconstructionResult reconstruct_separable(const ForwardProblem& fp,
                                           const ObservationTrace& zeta_obs,
                                           const ReconstructOptions& opt,
                                           const ReconstructionResult* warm_start) {
    const AnnulusGrid& grid = fp.grid();
    const int n = fp.n_components();
    const std::vector<double>& sigma = opt.time_profile;
    if (static_cast<int>(sigma.size()) != grid.n_time())
        throw parameter_error("reconstruct: time profile needs one value per time level");
    const QuadratureWeights quad = quadrature_weights(grid);
    const int Ns = grid.n_space();
    const int nsp = n * Ns;

    std::vector<double> wsp(nsp);
    for (int c = 0; c < n; ++c)
        for (int s = 0; s < Ns; ++s)
            wsp[c * Ns + s] = quad.radial_w[grid.node_radial(s)];

    auto dot_w = [&](const std::vector<double>& a, const std::vector<double>& bb) {
        std::vector<double> terms(a.size());
        for (int i = 0; i < nsp; ++i) terms[i] = wsp[i] * a[i] * bb[i];
        return pairwise_sum(terms);
    };

    // optional orthonormal dictionary (modified Gram-Schmidt in <.,.>_w)
    const bool use_dict = opt.dict_angular > 0;
    std::vector<std::vector<double>> atoms;
    if (use_dict) {
        const int D = std::max(opt.dict_radial, 0);
        const int M = opt.dict_angular;
        for (int c = 0; c < n; ++c)
            for (int d = 0; d <= D; ++d)
                for (int m = -M; m <= M; ++m) {
                    std::vector<double> a(nsp, 0.0);
                    for (int i = 0; i <= grid.nr; ++i) {
                        const double xh = (grid.radius(i) - grid.r0) / (grid.r1 - grid.r0);
                        const double mask = std::sin(std::numbers::pi * xh);
                        const double rad =
                            mask * mask * std::cos(d * std::numbers::pi * xh);
                        for (int j = 0; j < grid.ntheta; ++j) {
                            const double th = grid.theta(j);
                            const double ang =
                                m >= 0 ? std::cos(m * th) : std::sin(-m * th);
                            a[c * Ns + grid.node(i, j)] = rad * ang;
                        }
                    }
                    for (const auto& prev : atoms) {
                        const double proj = dot_w(a, prev);
                        for (int i = 0; i < nsp; ++i) a[i] -= proj * prev[i];
                    }
                    const double nrm = std::sqrt(dot_w(a, a));
                    if (nrm > 1e-10) {
                        for (double& v : a) v /= nrm;
                        atoms.push_back(std::move(a));
                    }
                }
    }
    const int ndof = use_dict ? static_cast<int>(atoms.size()) : nsp;

    auto to_nodal = [&](const std::vector<double>& x) {
        if (!use_dict) return x;
        std::vector<double> f(nsp, 0.0);
        for (int j = 0; j < ndof; ++j)
            for (int i = 0; i < nsp; ++i) f[i] += x[j] * atoms[j][i];
        return f;
    };
    auto from_nodal = [&](const std::vector<double>& f) {
        if (!use_dict) return f;
        std::vector<double> x(ndof);
        for (int j = 0; j < ndof; ++j) x[j] = dot_w(f, atoms[j]);
        return x;
    };
    auto dot_x = [&](const std::vector<double>& a, const std::vector<double>& bb) {
        if (!use_dict) return dot_w(a, bb);
        std::vector<double> terms(a.size());
        for (int i = 0; i < ndof; ++i) terms[i] = a[i] * bb[i];
        return pairwise_sum(terms);
    };

    auto lift = [&](const std::vector<double>& f) {
        SpaceTimeField g(n, grid.n_time(), grid.n_space());
        for (int c = 0; c < n; ++c)
            for (int k = 0; k < grid.n_time(); ++k) {
                auto lv = g.level(c, k);
                for (int s = 0; s < Ns; ++s) lv[s] = sigma[k] * f[c * Ns + s];
            }
        return g;
    };
    auto contract = [&](const SpaceTimeField& G) {
        std::vector<double> f(nsp, 0.0);
        for (int c = 0; c < n; ++c)
            for (int k = 0; k < grid.n_time(); ++k) {
                const auto lv = G.level(c, k);
                const double w = quad.time_w[k] * sigma[k];
                for (int s = 0; s < Ns; ++s) f[c * Ns + s] += w * lv[s];
            }
        return f;
    };
    auto apply_normal = [&](const std::vector<double>& x) {
        const std::vector<double> f = to_nodal(x);
        std::vector<double> af =
            from_nodal(contract(fp.apply_adjoint(fp.apply_forward(lift(f)))));
        for (int i = 0; i < ndof; ++i) af[i] += opt.rho * x[i];
        return af;
    };

    const std::vector<double> b = from_nodal(contract(fp.apply_adjoint(zeta_obs)));
    const double zeta_sq = fp.dot_trace(zeta_obs, zeta_obs);

    ReconstructionResult out;
    out.rho = opt.rho;
    std::vector<double> x(ndof, 0.0);
    std::vector<double> r = b;
    if (warm_start != nullptr && static_cast<int>(warm_start->spatial_solution.size()) == nsp) {
        x = from_nodal(warm_start->spatial_solution);
        const std::vector<double> ax = apply_normal(x);
        for (int i = 0; i < ndof; ++i) r[i] = b[i] - ax[i];
    }
    std::vector<double> p = r;
    double rs = dot_x(r, r);
    const double rs0 = std::max(dot_x(b, b), 1e-300);

    int iter = 0;
    for (; iter < opt.max_iter; ++iter) {
        if (std::sqrt(rs / rs0) <= opt.tol) break;
        const std::vector<double> ap = apply_normal(p);
        const double pap = dot_x(p, ap);
        if (!(pap > 0.0)) break;
        const double alpha = rs / pap;
        for (int i = 0; i < ndof; ++i) x[i] += alpha * p[i];
        bool projected = false;
        if (opt.project_nonneg) {
            // clamp the nodal lift; in dictionary mode re-project afterwards
            std::vector<double> f = to_nodal(x);
            for (double& v : f)
                if (v < 0.0) {
                    v = 0.0;
                    projected = true;
                }
            if (projected) x = from_nodal(f);
        }
        if (projected) {
            const std::vector<double> ax = apply_normal(x);
            for (int i = 0; i < ndof; ++i) r[i] = b[i] - ax[i];
            p = r;
            rs = dot_x(r, r);
        } else {
            for (int i = 0; i < ndof; ++i) r[i] -= alpha * ap[i];
            const double rs_new = dot_x(r, r);
            const double beta = rs_new / rs;
            for (int i = 0; i < ndof; ++i) p[i] = r[i] + beta * p[i];
            rs = rs_new;
        }
        std::vector<double> bpr(ndof);
        for (int i = 0; i < ndof; ++i) bpr[i] = b[i] + r[i];
        out.objective_trace.push_back(zeta_sq - dot_x(x, bpr));
    }
    out.iterations = iter;
    out.converged = std::sqrt(rs / rs0) <= opt.tol;
    const std::vector<double> f = to_nodal(x);
    out.g_hat = lift(f);
    out.spatial_solution = f;
    return out;
}

}  // namespace

ReconstructionResult reconstruct(const ForwardProblem& fp, const ObservationTrace& zeta_obs,
                                 const ReconstructOptions& opt,
                                 const ReconstructionResult* warm_start) {
    if (!(opt.rho >= 0.0)) throw parameter_error("reconstruct: rho must be nonnegative");
    zeta_obs.validate();
    ReconstructionResult out = opt.time_profile.empty()
                                   ? reconstruct_full(fp, zeta_obs, opt, warm_start)
                                   : reconstruct_separable(fp, zeta_obs, opt, warm_start);
    const ObservationTrace fit = fp.apply_forward(out.g_hat);
    ObservationTrace diff = fit;
    for (std::size_t i = 0; i < diff.data.size(); ++i) diff.data[i] -= zeta_obs.data[i];
    out.residual_norm = std::sqrt(std::max(0.0, fp.dot_trace(diff, diff)));
    return out;
}

ReconstructionResult reconstruct_discrepancy(const ForwardProblem& fp,
                                             const ObservationTrace& zeta_obs, double noise_norm,
                                             double tau, const ReconstructOptions& opt,
                                             double rho_max, int n_rho) {
    const double target = tau * noise_norm;
    ReconstructOptions local = opt;
    ReconstructionResult best;
    ReconstructionResult prev;
    bool have_best = false;
    for (int k = 0; k < n_rho; ++k) {
        local.rho = rho_max * std::pow(10.0, -k);
        ReconstructionResult res =
            reconstruct(fp, zeta_obs, local, k > 0 ? &prev : nullptr);
        const bool hit = res.residual_norm <= target;
        if (!have_best || res.residual_norm < best.residual_norm) {
            best = res;
            have_best = true;
        }
        if (hit) return res;  // largest rho meeting the discrepancy target
        prev = std::move(res);
    }
    return best;
}

std::pair<ObservationTrace, double> add_relative_noise(const ObservationTrace& zeta,
                                                       const AnnulusGrid& grid, double sigma_rel,
                                                       std::uint64_t seed) {
    const QuadratureWeights quad = quadrature_weights(grid);
    auto trace_norm = [&](const ObservationTrace& z) {
        std::vector<double> terms;
        terms.reserve(z.data.size());
        for (int c = 0; c < z.n_comp; ++c)
            for (int k = 0; k < z.n_time; ++k) {
                const double wt = quad.time_w[k] * quad.gamma1_arc;
                for (int j = 0; j < z.ntheta; ++j)
                    terms.push_back(wt * z.at(c, k, j) * z.at(c, k, j));
            }
        return std::sqrt(pairwise_sum(terms));
    };

    ObservationTrace noisy = zeta;
    if (sigma_rel == 0.0) return {noisy, 0.0};
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    ObservationTrace e = zeta;
    for (double& v : e.data) v = gauss(rng);
    const double scale = sigma_rel * trace_norm(zeta) / std::max(trace_norm(e), 1e-300);
    for (std::size_t i = 0; i < noisy.data.size(); ++i) noisy.data[i] += scale * e.data[i];
    return {noisy, sigma_rel * trace_norm(zeta)};
}

double relative_field_error(const SpaceTimeField& g_hat, const SpaceTimeField& g_true,
                            const AnnulusGrid& grid) {
    SpaceTimeField diff = g_hat;
    for (std::size_t i = 0; i < diff.data.size(); ++i) diff.data[i] -= g_true.data[i];
    const double denom = lq_norm(g_true, grid, 2.0);
    return lq_norm(diff, grid, 2.0) / (denom > 0.0 ? denom : 1.0);
}

}  // namespace carleman
