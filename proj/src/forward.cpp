#include "carleman/forward.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "carleman/numerics.hpp"

namespace carleman {

namespace {

struct FrameTensor {
    double rr, rt, tt;  // polar-frame components e_r' A e_r, e_r' A e_th, e_th' A e_th
};

FrameTensor frame_tensor(const SystemCoefficients::Tensor& a, double r, double th) {
    const double x = r * std::cos(th);
    const double y = r * std::sin(th);
    const double a11 = a.a11(x, y);
    const double a12 = a.a12(x, y);
    const double a22 = a.a22(x, y);
    const double c = std::cos(th);
    const double s = std::sin(th);
    return {a11 * c * c + 2.0 * a12 * c * s + a22 * s * s,
            (a22 - a11) * c * s + a12 * (c * c - s * s),
            a11 * s * s - 2.0 * a12 * c * s + a22 * c * c};
}

// One-sided second-order conormal derivative at a boundary node.
double conormal_at(const SpaceTimeField& y, const SystemCoefficients& coeffs,
                   const AnnulusGrid& grid, int comp, int k, int i, int j) {
    const NodeClass cls = grid.classify(i);
    if (cls == NodeClass::Interior)
        throw grid_domain_error("conormal derivative requested at an interior node");
    const double th = grid.theta(j);
    const double r = grid.radius(i);
    const FrameTensor A = frame_tensor(coeffs.a[comp], r, th);
    const auto lv = y.level(comp, k);
    const int jm = grid.node(i, j - 1), jp = grid.node(i, j + 1);
    const double y_th = (lv[jp] - lv[jm]) / (2.0 * grid.dtheta);
    double y_r;
    if (cls == NodeClass::Gamma1) {
        y_r = (3.0 * lv[grid.node(i, j)] - 4.0 * lv[grid.node(i - 1, j)] +
               lv[grid.node(i - 2, j)]) /
              (2.0 * grid.dr);
    } else {
        y_r = (-3.0 * lv[grid.node(i, j)] + 4.0 * lv[grid.node(i + 1, j)] -
               lv[grid.node(i + 2, j)]) /
              (2.0 * grid.dr);
    }
    const double flux_r = A.rr * y_r + A.rt * y_th / r;
    return cls == NodeClass::Gamma1 ? flux_r : -flux_r;
}

}  // namespace

struct ForwardProblem::Impl {
    SystemCoefficients coeffs;
    BoundarySpec bspec;
    ObservationSpec ospec;
    TimeScheme scheme;
    double theta = 1.0;
    QuadratureWeights quad;

    int Ns = 0;
    int ntot = 0;
    Eigen::SparseMatrix<double> M, Mt, D, Obs, ObsT;
    Eigen::VectorXd pde_mask;  // 1 on evolved rows, 0 on Dirichlet rows
    Eigen::SparseLU<Eigen::SparseMatrix<double>> luM, luMt;
    double M_inf = 0.0;
};

ForwardProblem::~ForwardProblem() = default;

ForwardProblem::ForwardProblem(const AnnulusGrid& grid, const SystemCoefficients& coeffs,
                               const BoundarySpec& bspec, const ObservationSpec& ospec,
                               TimeScheme scheme)
    : grid_(grid), n_(coeffs.n), impl_(std::make_unique<Impl>()) {
    const HypothesisReport hyp = check_hypotheses(coeffs, bspec, ospec, grid);
    if (!hyp.h1.pass)
        throw parameter_error("forward problem: ellipticity (H1) fails at " + hyp.h1.witness);
    if (!hyp.h3.pass)
        throw parameter_error("forward problem: coupling sign (H3) fails at " + hyp.h3.witness);
    if (!hyp.h4.pass)
        throw parameter_error("forward problem: boundary structure (H4) fails at " +
                              hyp.h4.witness);

    Impl& im = *impl_;
    im.coeffs = coeffs;
    im.bspec = bspec;
    im.ospec = ospec;
    im.scheme = scheme;
    im.theta = scheme == TimeScheme::ImplicitEuler ? 1.0 : 0.5;
    im.quad = quadrature_weights(grid);
    im.Ns = grid.n_space();
    im.ntot = n_ * im.Ns;

    const double dr = grid.dr, dth = grid.dtheta;
    const int nr = grid.nr, nth = grid.ntheta;

    std::vector<Eigen::Triplet<double>> tripA;
    im.pde_mask = Eigen::VectorXd::Zero(im.ntot);

    for (int c = 0; c < n_; ++c) {
        const int base = c * im.Ns;
        for (int i = 0; i <= nr; ++i) {
            const NodeClass cls = grid.classify(i);
            const bool dirichlet_row =
                cls != NodeClass::Interior && im.bspec.side(c, cls).dirichlet;
            for (int j = 0; j < nth; ++j) {
                const int row = base + grid.node(i, j);
                if (dirichlet_row) continue;  // identity row added later
                im.pde_mask[row] = 1.0;

                const double r = grid.radius(i);
                const double th = grid.theta(j);

                // Stencil accumulator keyed by (radial index + 1, wrapped j);
                // radial index -1 / nr+1 are ghost layers.
                std::map<std::pair<int, int>, double> st;
                auto add = [&](int ii, int jj, double v) {
                    st[{ii, grid.wrap(jj)}] += v;
                };

                // --- diffusion, conservative flux differences ---
                const double rp = r + 0.5 * dr;
                const double rm = r - 0.5 * dr;
                const FrameTensor Ap = frame_tensor(coeffs.a[c], rp, th);
                const FrameTensor Am = frame_tensor(coeffs.a[c], rm, th);
                const FrameTensor Atp = frame_tensor(coeffs.a[c], r, th + 0.5 * dth);
                const FrameTensor Atm = frame_tensor(coeffs.a[c], r, th - 0.5 * dth);

                {  // -(1/(r dr)) * rp * F_p
                    const double f = -rp / (r * dr);
                    add(i + 1, j, f * Ap.rr / dr);
                    add(i, j, -f * Ap.rr / dr);
                    const double g = f * Ap.rt / (rp * 4.0 * dth);
                    add(i, j + 1, g);
                    add(i, j - 1, -g);
                    add(i + 1, j + 1, g);
                    add(i + 1, j - 1, -g);
                }
                {  // +(1/(r dr)) * rm * F_m
                    const double f = rm / (r * dr);
                    add(i, j, f * Am.rr / dr);
                    add(i - 1, j, -f * Am.rr / dr);
                    const double g = f * Am.rt / (rm * 4.0 * dth);
                    add(i - 1, j + 1, g);
                    add(i - 1, j - 1, -g);
                    add(i, j + 1, g);
                    add(i, j - 1, -g);
                }
                {  // -(1/(r dth)) * F_tp
                    const double f = -1.0 / (r * dth);
                    const double g = f * Atp.rt / (4.0 * dr);
                    add(i + 1, j, g);
                    add(i - 1, j, -g);
                    add(i + 1, j + 1, g);
                    add(i - 1, j + 1, -g);
                    add(i, j + 1, f * Atp.tt / (r * dth));
                    add(i, j, -f * Atp.tt / (r * dth));
                }
                {  // +(1/(r dth)) * F_tm
                    const double f = 1.0 / (r * dth);
                    const double g = f * Atm.rt / (4.0 * dr);
                    add(i + 1, j - 1, g);
                    add(i - 1, j - 1, -g);
                    add(i + 1, j, g);
                    add(i - 1, j, -g);
                    add(i, j, f * Atm.tt / (r * dth));
                    add(i, j - 1, -f * Atm.tt / (r * dth));
                }

                // --- drift, centered ---
                {
                    const double x = r * std::cos(th), yy = r * std::sin(th);
                    const double b1 = coeffs.b[c][0](x, yy);
                    const double b2 = coeffs.b[c][1](x, yy);
                    const double br = b1 * std::cos(th) + b2 * std::sin(th);
                    const double bt = -b1 * std::sin(th) + b2 * std::cos(th);
                    add(i + 1, j, br / (2.0 * dr));
                    add(i - 1, j, -br / (2.0 * dr));
                    add(i, j + 1, bt / (r * 2.0 * dth));
                    add(i, j - 1, -bt / (r * 2.0 * dth));
                }

                // --- ghost elimination on Robin rings ---
                for (int pass = 0; pass < 2; ++pass) {
                    std::vector<std::pair<int, double>> ghosts;  // (jj, coef)
                    const int gi = pass == 0 ? -1 : nr + 1;
                    for (auto it = st.begin(); it != st.end();) {
                        if (it->first.first == gi) {
                            ghosts.emplace_back(it->first.second, it->second);
                            it = st.erase(it);
                        } else {
                            ++it;
                        }
                    }
                    for (const auto& [jj, v] : ghosts) {
                        const NodeClass ring = gi < 0 ? NodeClass::Gamma0 : NodeClass::Gamma1;
                        const auto& bc = im.bspec.side(c, ring);
                        const double thj = grid.theta(jj);
                        const double rring = gi < 0 ? grid.r0 : grid.r1;
                        const FrameTensor Ab = frame_tensor(coeffs.a[c], rring, thj);
                        const double beta = bc.beta(thj);
                        const double eta = bc.eta(thj);
                        const double q_eta = -2.0 * dr * eta / (beta * Ab.rr);
                        if (gi < 0) {
                            const double q_th = dr * Ab.rt / (Ab.rr * rring * dth);
                            add(1, jj, v);
                            add(0, jj + 1, v * q_th);
                            add(0, jj - 1, -v * q_th);
                            add(0, jj, v * q_eta);
                        } else {
                            const double q_th = -dr * Ab.rt / (Ab.rr * rring * dth);
                            add(nr - 1, jj, v);
                            add(nr, jj + 1, v * q_th);
                            add(nr, jj - 1, -v * q_th);
                            add(nr, jj, v * q_eta);
                        }
                    }
                }

                for (const auto& [key, v] : st) {
                    if (v == 0.0) continue;
                    tripA.emplace_back(row, base + grid.node(key.first, key.second), v);
                }

                // --- zero-order coupling ---
                {
                    const double x = r * std::cos(th), yy = r * std::sin(th);
                    for (int l = 0; l < n_; ++l) {
                        const double cv = coeffs.c[c][l](x, yy);
                        if (cv != 0.0)
                            tripA.emplace_back(row, l * im.Ns + grid.node(i, j), cv);
                    }
                }
            }
        }
    }

    // M = mask/dt + theta*A + I on Dirichlet rows; D = mask/dt - (1-theta)*A.
    std::vector<Eigen::Triplet<double>> tripM, tripD;
    tripM.reserve(tripA.size() + im.ntot);
    tripD.reserve(tripA.size() + im.ntot);
    for (const auto& t : tripA) {
        tripM.emplace_back(t.row(), t.col(), im.theta * t.value());
        if (im.theta != 1.0) tripD.emplace_back(t.row(), t.col(), -(1.0 - im.theta) * t.value());
    }
    const double inv_dt = 1.0 / grid.dt;
    for (int row = 0; row < im.ntot; ++row) {
        if (im.pde_mask[row] > 0.0) {
            tripM.emplace_back(row, row, inv_dt);
            tripD.emplace_back(row, row, inv_dt);
        } else {
            tripM.emplace_back(row, row, 1.0);
        }
    }

    im.M.resize(im.ntot, im.ntot);
    im.M.setFromTriplets(tripM.begin(), tripM.end());
    im.M.makeCompressed();
    im.D.resize(im.ntot, im.ntot);
    im.D.setFromTriplets(tripD.begin(), tripD.end());
    im.D.makeCompressed();
    im.Mt = im.M.transpose();
    im.Mt.makeCompressed();

    // Observation stencil on the outer ring.
    std::vector<Eigen::Triplet<double>> tripO;
    for (int c = 0; c < n_; ++c) {
        for (int j = 0; j < nth; ++j) {
            const int orow = c * nth + j;
            const double th = grid.theta(j);
            const double gam = ospec.entries[c].gamma(th);
            const double del = ospec.entries[c].delta(th);
            const FrameTensor A1 = frame_tensor(coeffs.a[c], grid.r1, th);
            const int base = c * im.Ns;
            auto addO = [&](int i, int jj, double v) {
                if (v != 0.0) tripO.emplace_back(orow, base + grid.node(i, jj), v);
            };
            addO(nr, j, gam * A1.rr * 3.0 / (2.0 * dr) + del);
            addO(nr - 1, j, -gam * A1.rr * 4.0 / (2.0 * dr));
            addO(nr - 2, j, gam * A1.rr / (2.0 * dr));
            addO(nr, j + 1, gam * A1.rt / (grid.r1 * 2.0 * dth));
            addO(nr, j - 1, -gam * A1.rt / (grid.r1 * 2.0 * dth));
        }
    }
    im.Obs.resize(n_ * nth, im.ntot);
    im.Obs.setFromTriplets(tripO.begin(), tripO.end());
    im.Obs.makeCompressed();
    im.ObsT = im.Obs.transpose();
    im.ObsT.makeCompressed();

    im.M_inf = 0.0;
    for (int r = 0; r < im.M.outerSize(); ++r) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(im.M, r); it; ++it)
            im.M_inf = std::max(im.M_inf, std::abs(it.value()));
    }

    im.luM.compute(im.M);
    if (im.luM.info() != Eigen::Success)
        throw solver_error("time-step matrix factorization failed", im.M_inf);
    im.luMt.compute(im.Mt);
    if (im.luMt.info() != Eigen::Success)
        throw solver_error("transposed time-step matrix factorization failed", im.M_inf);
}

namespace {

// Gather a field time level into the component-blocked unknown ordering.
void gather(const SpaceTimeField& f, int k, Eigen::VectorXd& u) {
    const int Ns = f.n_space;
    for (int c = 0; c < f.n_comp; ++c) {
        const auto lv = f.level(c, k);
        for (int s = 0; s < Ns; ++s) u[c * Ns + s] = lv[s];
    }
}

void scatter(const Eigen::VectorXd& u, SpaceTimeField& f, int k) {
    const int Ns = f.n_space;
    for (int c = 0; c < f.n_comp; ++c) {
        auto lv = f.level(c, k);
        for (int s = 0; s < Ns; ++s) lv[s] = u[c * Ns + s];
    }
}

}  // namespace

SpaceTimeField ForwardProblem::solve(const SpaceTimeField& g, const std::vector<double>& y0) const {
    const Impl& im = *impl_;
    if (g.n_comp != n_ || g.n_time != grid_.n_time() || g.n_space != im.Ns)
        throw parameter_error("solve: source field has mismatched shape");
    if (static_cast<int>(y0.size()) != im.ntot)
        throw parameter_error("solve: initial data must have n * n_space entries");
    g.validate();

    SpaceTimeField y(n_, grid_.n_time(), im.Ns);
    Eigen::VectorXd u(im.ntot), gk(im.ntot), gk1(im.ntot), rhs(im.ntot);
    for (int idx = 0; idx < im.ntot; ++idx) u[idx] = y0[idx];
    // Dirichlet-flagged rows hold boundary values; homogeneous conditions mean
    // compatible initial data carries zeros there already. Enforce it.
    for (int idx = 0; idx < im.ntot; ++idx)
        if (im.pde_mask[idx] == 0.0) u[idx] = 0.0;
    scatter(u, y, 0);

    gather(g, 0, gk);
    for (int k = 0; k < grid_.nt; ++k) {
        gather(g, k + 1, gk1);
        rhs = im.D * u;
        for (int idx = 0; idx < im.ntot; ++idx)
            rhs[idx] += im.pde_mask[idx] * (im.theta * gk1[idx] + (1.0 - im.theta) * gk[idx]);
        Eigen::VectorXd unew = im.luM.solve(rhs);
        if (im.luM.info() != Eigen::Success)
            throw solver_error("time-step solve failed at level " + std::to_string(k + 1), im.M_inf);

        const double res = (im.M * unew - rhs).cwiseAbs().maxCoeff();
        const double scale =
            std::max({rhs.cwiseAbs().maxCoeff(), im.M_inf * unew.cwiseAbs().maxCoeff(), 1e-300});
        if (res > 1e-10 * scale) {
            const double cond_est = im.M_inf * unew.cwiseAbs().maxCoeff() /
                                    std::max(rhs.cwiseAbs().maxCoeff(), 1e-300);
            throw solver_error("time-step residual " + std::to_string(res / scale) +
                                   " exceeds 1e-10 at level " + std::to_string(k + 1),
                               cond_est);
        }
        if (!unew.allFinite())
            throw numeric_error("non-finite solution at level " + std::to_string(k + 1));

        // Dirichlet unknowns are exactly zero; strip direct-solver noise.
        for (int idx = 0; idx < im.ntot; ++idx)
            if (im.pde_mask[idx] == 0.0) unew[idx] = 0.0;

        scatter(unew, y, k + 1);
        u.swap(unew);
        gk.swap(gk1);
    }
    return y;
}

ObservationTrace ForwardProblem::observe(const SpaceTimeField& y) const {
    const Impl& im = *impl_;
    ObservationTrace z(n_, grid_.n_time(), grid_.ntheta);
    Eigen::VectorXd u(im.ntot);
    for (int k = 0; k < grid_.n_time(); ++k) {
        gather(y, k, u);
        Eigen::VectorXd obs = im.Obs * u;
        for (int c = 0; c < n_; ++c)
            for (int j = 0; j < grid_.ntheta; ++j) z.at(c, k, j) = obs[c * grid_.ntheta + j];
    }
    return z;
}

ObservationTrace ForwardProblem::apply_forward(const SpaceTimeField& g) const {
    const std::vector<double> zero(static_cast<std::size_t>(impl_->ntot), 0.0);
    return observe(solve(g, zero));
}

SpaceTimeField ForwardProblem::apply_adjoint(const ObservationTrace& w) const {
    const Impl& im = *impl_;
    if (w.n_comp != n_ || w.n_time != grid_.n_time() || w.ntheta != grid_.ntheta)
        throw parameter_error("adjoint: trace has mismatched shape");
    w.validate();
    const int nth = grid_.ntheta;

    SpaceTimeField out(n_, grid_.n_time(), im.Ns);
    Eigen::VectorXd q_prev = Eigen::VectorXd::Zero(im.ntot);
    Eigen::VectorXd v(n_ * nth), p(im.ntot);

    for (int k = grid_.nt; k >= 1; --k) {
        // Sigma1 quadrature scaling of the dual trace.
        const double wt = im.quad.time_w[k] * im.quad.gamma1_arc;
        for (int c = 0; c < n_; ++c)
            for (int j = 0; j < nth; ++j) v[c * nth + j] = wt * w.at(c, k, j);
        p = im.ObsT * v + im.D.transpose() * q_prev;
        Eigen::VectorXd q = im.luMt.solve(p);
        if (im.luMt.info() != Eigen::Success)
            throw solver_error("adjoint solve failed at level " + std::to_string(k), im.M_inf);
        for (int c = 0; c < n_; ++c) {
            auto lk = out.level(c, k);
            auto lkm = out.level(c, k - 1);
            for (int s = 0; s < im.Ns; ++s) {
                const double masked = im.pde_mask[c * im.Ns + s] * q[c * im.Ns + s];
                lk[s] += im.theta * masked;
                lkm[s] += (1.0 - im.theta) * masked;
            }
        }
        q_prev.swap(q);
    }

    // Convert the Euclidean transpose into the L2(Q) adjoint.
    for (int c = 0; c < n_; ++c)
        for (int k = 0; k < grid_.n_time(); ++k) {
            auto lv = out.level(c, k);
            for (int s = 0; s < im.Ns; ++s)
                lv[s] /= im.quad.volume(k, grid_.node_radial(s));
        }
    return out;
}

double ForwardProblem::solution_residual(const SpaceTimeField& y, const SpaceTimeField& g) const {
    const Impl& im = *impl_;
    Eigen::VectorXd u(im.ntot), unext(im.ntot), gk(im.ntot), gk1(im.ntot);
    double worst = 0.0;
    gather(g, 0, gk);
    gather(y, 0, u);
    for (int k = 0; k < grid_.nt; ++k) {
        gather(y, k + 1, unext);
        gather(g, k + 1, gk1);
        Eigen::VectorXd rhs = im.D * u;
        for (int idx = 0; idx < im.ntot; ++idx)
            rhs[idx] += im.pde_mask[idx] * (im.theta * gk1[idx] + (1.0 - im.theta) * gk[idx]);
        const double res = (im.M * unext - rhs).cwiseAbs().maxCoeff();
        const double scale =
            std::max({rhs.cwiseAbs().maxCoeff(), im.M_inf * unext.cwiseAbs().maxCoeff(), 1e-300});
        worst = std::max(worst, res / scale);
        u.swap(unext);
        gk.swap(gk1);
    }
    return worst;
}

double ForwardProblem::conormal(const SpaceTimeField& y, int comp, int k, int i, int j) const {
    return conormal_at(y, impl_->coeffs, grid_, comp, k, i, j);
}

double ForwardProblem::dot_volume(const SpaceTimeField& f, const SpaceTimeField& h) const {
    const Impl& im = *impl_;
    std::vector<double> terms;
    terms.reserve(f.data.size());
    for (int c = 0; c < f.n_comp; ++c)
        for (int k = 0; k < f.n_time; ++k) {
            const auto lf = f.level(c, k);
            const auto lh = h.level(c, k);
            for (int s = 0; s < f.n_space; ++s)
                terms.push_back(im.quad.volume(k, grid_.node_radial(s)) * lf[s] * lh[s]);
        }
    return pairwise_sum(terms);
}

double ForwardProblem::dot_trace(const ObservationTrace& v, const ObservationTrace& w) const {
    const Impl& im = *impl_;
    std::vector<double> terms;
    terms.reserve(v.data.size());
    for (int c = 0; c < v.n_comp; ++c)
        for (int k = 0; k < v.n_time; ++k) {
            const double wt = im.quad.time_w[k] * im.quad.gamma1_arc;
            for (int j = 0; j < v.ntheta; ++j) terms.push_back(wt * v.at(c, k, j) * w.at(c, k, j));
        }
    return pairwise_sum(terms);
}

double conormal_derivative(const SpaceTimeField& y, const SystemCoefficients& coeffs,
                           const AnnulusGrid& grid, int comp, int k, int i, int j) {
    return conormal_at(y, coeffs, grid, comp, k, i, j);
}

ObservationTrace observe(const SpaceTimeField& y, const SystemCoefficients& coeffs,
                         const ObservationSpec& ospec, const AnnulusGrid& grid) {
    ObservationTrace z(y.n_comp, y.n_time, grid.ntheta);
    for (int c = 0; c < y.n_comp; ++c)
        for (int k = 0; k < y.n_time; ++k)
            for (int j = 0; j < grid.ntheta; ++j) {
                const double th = grid.theta(j);
                z.at(c, k, j) = ospec.entries[c].gamma(th) *
                                    conormal_at(y, coeffs, grid, c, k, grid.nr, j) +
                                ospec.entries[c].delta(th) * y.at(c, k, grid.node(grid.nr, j));
            }
    return z;
}

}  // namespace carleman
