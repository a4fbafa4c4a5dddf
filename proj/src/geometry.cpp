#include "carleman/geometry.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace carleman {

std::array<double, 2> AnnulusGrid::xy(int i, int j) const {
    const double r = radius(i);
    const double th = theta(j);
    return {r * std::cos(th), r * std::sin(th)};
}

AnnulusGrid build_annulus_grid(double r0, double r1, int nr, int ntheta, double T, int nt) {
    if (!(r0 > 0.0)) throw parameter_error("annulus: inner radius must be positive, got " + std::to_string(r0));
    if (!(r1 > r0)) throw parameter_error("annulus: outer radius must exceed inner radius");
    if (nr < 4) throw parameter_error("annulus: nr must be at least 4");
    if (ntheta < 8) throw parameter_error("annulus: ntheta must be at least 8");
    if (!(T > 0.0)) throw parameter_error("annulus: final time must be positive");
    if (nt < 2) throw parameter_error("annulus: nt must be at least 2");

    AnnulusGrid g;
    g.r0 = r0;
    g.r1 = r1;
    g.T = T;
    g.nr = nr;
    g.ntheta = ntheta;
    g.nt = nt;
    g.dr = (r1 - r0) / nr;
    g.dtheta = 2.0 * std::numbers::pi / ntheta;
    g.dt = T / nt;
    return g;
}

std::array<double, 2> outward_normal(const AnnulusGrid& grid, int i, int j) {
    const NodeClass cls = grid.classify(i);
    if (cls == NodeClass::Interior)
        throw grid_domain_error("outward_normal: node (i=" + std::to_string(i) + ") is interior");
    const double th = grid.theta(j);
    const double sign = (cls == NodeClass::Gamma1) ? 1.0 : -1.0;
    return {sign * std::cos(th), sign * std::sin(th)};
}

QuadratureWeights quadrature_weights(const AnnulusGrid& grid) {
    QuadratureWeights q;
    q.time_w.resize(grid.n_time());
    for (int k = 0; k <= grid.nt; ++k)
        q.time_w[k] = (k == 0 || k == grid.nt) ? 0.5 * grid.dt : grid.dt;
    q.radial_w.resize(grid.n_radii());
    for (int i = 0; i <= grid.nr; ++i) {
        const double wr = (i == 0 || i == grid.nr) ? 0.5 * grid.dr : grid.dr;
        q.radial_w[i] = wr * grid.radius(i) * grid.dtheta;
    }
    q.gamma0_arc = grid.r0 * grid.dtheta;
    q.gamma1_arc = grid.r1 * grid.dtheta;
    return q;
}

}  // namespace carleman
