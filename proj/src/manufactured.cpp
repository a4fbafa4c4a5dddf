#include "carleman/manufactured.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "carleman/norms.hpp"

namespace carleman {

namespace {

double omega(int c) { return 1.0 + 0.25 * c; }

std::vector<std::vector<double>> default_coupling(int n) {
    std::vector<std::vector<double>> c(n, std::vector<double>(n, -0.3));
    for (int i = 0; i < n; ++i) c[i][i] = 0.4;
    return c;
}

}  // namespace

ManufacturedCase manufactured_dirichlet_iso(int n, double r0, double r1) {
    const double w = std::numbers::pi / (r1 - r0);
    std::vector<double> kappa;
    std::vector<std::array<double, 2>> drift;
    for (int i = 0; i < n; ++i) {
        kappa.push_back(1.0 + 0.5 * i);
        drift.push_back({0.3, -0.2});
    }
    const auto coupling = default_coupling(n);

    ManufacturedCase mc;
    mc.coeffs = SystemCoefficients::isotropic(kappa, drift, coupling);
    mc.bspec = BoundarySpec::all_dirichlet(n);
    mc.ospec = ObservationSpec::constant(n, 1.0, 0.0);

    auto S = [r0, w](double r) { return std::sin(w * (r - r0)); };
    auto Sp = [r0, w](double r) { return w * std::cos(w * (r - r0)); };
    auto Spp = [r0, w](double r) { return -w * w * std::sin(w * (r - r0)); };

    mc.exact = [=](int c, double t, double r, double th) {
        return omega(c) * t * S(r) * std::cos(th);
    };
    mc.initial = [](int, double, double) { return 0.0; };
    mc.source = [=](int c, double t, double r, double th) {
        const double om = omega(c);
        const double cth = std::cos(th), sth = std::sin(th);
        const double dt_term = om * S(r) * cth;
        // Laplacian of S(r) cos(theta) in polar coordinates
        const double lap = Spp(r) + Sp(r) / r - S(r) / (r * r);
        const double L_term = -kappa[c] * om * t * cth * lap;
        const double yx = om * t * (Sp(r) * cth * cth + S(r) * sth * sth / r);
        const double yy = om * t * (Sp(r) - S(r) / r) * sth * cth;
        const double drift_term = drift[c][0] * yx + drift[c][1] * yy;
        double couple = 0.0;
        for (int l = 0; l < n; ++l) couple += coupling[c][l] * omega(l) * t * S(r) * cth;
        return dt_term + L_term + drift_term + couple;
    };
    return mc;
}

ManufacturedCase manufactured_dirichlet_aniso(int n, double r0, double r1) {
    std::vector<std::array<double, 3>> tensors;  // a11, a12, a22
    std::vector<std::array<double, 2>> drift;
    for (int i = 0; i < n; ++i) {
        tensors.push_back({1.2 + 0.1 * i, 0.3 - 0.1 * i, 0.9 + 0.2 * i});
        drift.push_back({0.2, 0.1});
    }
    // smallest eigenvalue across components, computed from the constants
    double mu = 1e30;
    for (const auto& a : tensors) {
        const double tr = 0.5 * (a[0] + a[2]);
        const double dev = std::sqrt(0.25 * (a[0] - a[2]) * (a[0] - a[2]) + a[1] * a[1]);
        mu = std::min(mu, tr - dev);
    }
    const auto coupling = default_coupling(n);

    ManufacturedCase mc;
    mc.coeffs = SystemCoefficients::constant_tensor(tensors, drift, coupling, mu);
    mc.bspec = BoundarySpec::all_dirichlet(n);
    mc.ospec = ObservationSpec::constant(n, 1.0, 0.0);

    const double q0 = r0 * r0, q1 = r1 * r1;
    auto u = [q0, q1](double x, double y) {
        const double rho = x * x + y * y;
        return (rho - q0) * (q1 - rho);
    };

    mc.exact = [u](int c, double t, double r, double th) {
        return omega(c) * t * u(r * std::cos(th), r * std::sin(th));
    };
    mc.initial = [](int, double, double) { return 0.0; };
    mc.source = [=](int c, double t, double r, double th) {
        const double x = r * std::cos(th), y = r * std::sin(th);
        const double rho = x * x + y * y;
        const double lin = q0 + q1 - 2.0 * rho;
        const double ux = 2.0 * x * lin;
        const double uy = 2.0 * y * lin;
        const double uxx = 2.0 * lin - 8.0 * x * x;
        const double uyy = 2.0 * lin - 8.0 * y * y;
        const double uxy = -8.0 * x * y;
        const double om = omega(c);
        const auto& a = tensors[c];
        const double dt_term = om * u(x, y);
        const double L_term = -om * t * (a[0] * uxx + 2.0 * a[1] * uxy + a[2] * uyy);
        const double drift_term = om * t * (drift[c][0] * ux + drift[c][1] * uy);
        double couple = 0.0;
        for (int l = 0; l < n; ++l) couple += coupling[c][l] * omega(l) * t * u(x, y);
        return dt_term + L_term + drift_term + couple;
    };
    return mc;
}

ManufacturedCase manufactured_robin_iso(int n, double r0, double r1, double beta0, double eta0,
                                        double beta1, double eta1) {
    std::vector<double> kappa;
    std::vector<std::array<double, 2>> drift;
    for (int i = 0; i < n; ++i) {
        kappa.push_back(1.0 + 0.5 * i);
        drift.push_back({0.1, -0.1});
    }
    const auto coupling = default_coupling(n);

    ManufacturedCase mc;
    mc.coeffs = SystemCoefficients::isotropic(kappa, drift, coupling);
    mc.bspec.sides.assign(n, {BoundarySpec::robin_side(beta0, eta0),
                              BoundarySpec::robin_side(beta1, eta1)});
    mc.ospec = ObservationSpec::constant(n, 0.0, 1.0);  // H5 det = -beta1 != 0

    // Radial cubic R(r) = c0 + c1 d + c2 d^2 + c3 d^3, d = r - r0, matching
    // both Robin conditions for each component's kappa.
    const double d1 = r1 - r0;
    struct Cubic {
        double c0, c1, c2, c3;
    };
    std::vector<Cubic> R(n);
    for (int c = 0; c < n; ++c) {
        const double k = kappa[c];
        Cubic cu;
        cu.c0 = k * beta0;  // enforces -k beta0 R'(r0) + eta0 R(r0) = 0
        cu.c1 = eta0;
        cu.c2 = 1.0;
        const double denom = 3.0 * k * beta1 * d1 * d1 + eta1 * d1 * d1 * d1;
        cu.c3 = -(k * beta1 * (cu.c1 + 2.0 * cu.c2 * d1) +
                  eta1 * (cu.c0 + cu.c1 * d1 + cu.c2 * d1 * d1)) /
                denom;
        R[c] = cu;
    }
    auto evalR = [R, r0](int c, double r) {
        const double d = r - r0;
        return R[c].c0 + d * (R[c].c1 + d * (R[c].c2 + d * R[c].c3));
    };
    auto evalRp = [R, r0](int c, double r) {
        const double d = r - r0;
        return R[c].c1 + d * (2.0 * R[c].c2 + 3.0 * d * R[c].c3);
    };
    auto evalRpp = [R, r0](int c, double r) {
        const double d = r - r0;
        return 2.0 * R[c].c2 + 6.0 * d * R[c].c3;
    };

    mc.exact = [evalR](int c, double t, double r, double) {
        return omega(c) * (1.0 + t) * evalR(c, r);
    };
    mc.initial = [evalR](int c, double r, double) { return omega(c) * evalR(c, r); };
    mc.source = [=](int c, double t, double r, double th) {
        const double om = omega(c);
        const double dt_term = om * evalR(c, r);
        const double lap = evalRpp(c, r) + evalRp(c, r) / r;
        const double L_term = -kappa[c] * om * (1.0 + t) * lap;
        const double ux = om * (1.0 + t) * evalRp(c, r) * std::cos(th);
        const double uy = om * (1.0 + t) * evalRp(c, r) * std::sin(th);
        const double drift_term = drift[c][0] * ux + drift[c][1] * uy;
        double couple = 0.0;
        for (int l = 0; l < n; ++l)
            couple += coupling[c][l] * omega(l) * (1.0 + t) * evalR(l, r);
        return dt_term + L_term + drift_term + couple;
    };
    return mc;
}

SpaceTimeField exact_field(const ManufacturedCase& mc, const AnnulusGrid& grid, int n) {
    return sample_field(grid, n, mc.exact);
}

SpaceTimeField source_field(const ManufacturedCase& mc, const AnnulusGrid& grid, int n) {
    return sample_field(grid, n, mc.source);
}

std::vector<double> initial_vector(const ManufacturedCase& mc, const AnnulusGrid& grid, int n) {
    std::vector<double> y0(static_cast<std::size_t>(n) * grid.n_space());
    for (int c = 0; c < n; ++c)
        for (int i = 0; i <= grid.nr; ++i)
            for (int j = 0; j < grid.ntheta; ++j)
                y0[c * grid.n_space() + grid.node(i, j)] =
                    mc.initial(c, grid.radius(i), grid.theta(j));
    return y0;
}

double relative_l2_error(const SpaceTimeField& y, const ManufacturedCase& mc,
                         const AnnulusGrid& grid) {
    const SpaceTimeField exact = exact_field(mc, grid, y.n_comp);
    SpaceTimeField diff = y;
    for (std::size_t idx = 0; idx < diff.data.size(); ++idx) diff.data[idx] -= exact.data[idx];
    const double denom = lq_norm(exact, grid, 2.0);
    return lq_norm(diff, grid, 2.0) / (denom > 0.0 ? denom : 1.0);
}

}  // namespace carleman
