#include "carleman/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace carleman {

namespace {

ScalarXY constant_xy(double v) {
    return [v](double, double) { return v; };
}

std::string node_tag(int comp, int i, int j) {
    std::ostringstream os;
    os << "component " << comp + 1 << ", node (i=" << i << ", j=" << j << ")";
    return os.str();
}

}  // namespace

SystemCoefficients SystemCoefficients::isotropic(const std::vector<double>& kappa,
                                                 const std::vector<std::array<double, 2>>& drift,
                                                 const std::vector<std::vector<double>>& coupling) {
    SystemCoefficients sc;
    sc.n = static_cast<int>(kappa.size());
    sc.mu = *std::min_element(kappa.begin(), kappa.end());
    for (int i = 0; i < sc.n; ++i) {
        sc.a.push_back({constant_xy(kappa[i]), constant_xy(0.0), constant_xy(kappa[i])});
        sc.b.push_back({constant_xy(drift[i][0]), constant_xy(drift[i][1])});
        std::vector<ScalarXY> row;
        for (int l = 0; l < sc.n; ++l) row.push_back(constant_xy(coupling[i][l]));
        sc.c.push_back(std::move(row));
    }
    return sc;
}

SystemCoefficients SystemCoefficients::constant_tensor(
    const std::vector<std::array<double, 3>>& a_entries,
    const std::vector<std::array<double, 2>>& drift,
    const std::vector<std::vector<double>>& coupling, double mu) {
    SystemCoefficients sc;
    sc.n = static_cast<int>(a_entries.size());
    sc.mu = mu;
    for (int i = 0; i < sc.n; ++i) {
        sc.a.push_back({constant_xy(a_entries[i][0]), constant_xy(a_entries[i][1]),
                        constant_xy(a_entries[i][2])});
        sc.b.push_back({constant_xy(drift[i][0]), constant_xy(drift[i][1])});
        std::vector<ScalarXY> row;
        for (int l = 0; l < sc.n; ++l) row.push_back(constant_xy(coupling[i][l]));
        sc.c.push_back(std::move(row));
    }
    return sc;
}

BoundarySpec::Side BoundarySpec::dirichlet_side() {
    Side s;
    s.dirichlet = true;
    s.beta = [](double) { return 0.0; };
    s.eta = [](double) { return 1.0; };
    return s;
}

BoundarySpec::Side BoundarySpec::robin_side(double beta, double eta) {
    Side s;
    s.dirichlet = false;
    s.beta = [beta](double) { return beta; };
    s.eta = [eta](double) { return eta; };
    return s;
}

BoundarySpec BoundarySpec::all_dirichlet(int n) {
    BoundarySpec bs;
    bs.sides.assign(n, {dirichlet_side(), dirichlet_side()});
    return bs;
}

ObservationSpec ObservationSpec::constant(int n, double gamma, double delta) {
    ObservationSpec os;
    for (int i = 0; i < n; ++i)
        os.entries.push_back({[gamma](double) { return gamma; }, [delta](double) { return delta; }});
    return os;
}

HypothesisReport check_hypotheses(const SystemCoefficients& coeffs, const BoundarySpec& bspec,
                                  const ObservationSpec& ospec, const AnnulusGrid& grid,
                                  const SpaceTimeField* g) {
    HypothesisReport rep;

    // (H1): ellipticity xi' A xi >= mu |xi|^2 on a 16-direction fan at every
    // node, with a roundoff floor so exact equality cases classify as pass.
    rep.h1.margin = std::numeric_limits<double>::infinity();
    double h1_scale = std::abs(coeffs.mu);
    for (int c = 0; c < coeffs.n; ++c) {
        for (int i = 0; i <= grid.nr; ++i) {
            for (int j = 0; j < grid.ntheta; ++j) {
                const auto [x, y] = grid.xy(i, j);
                const double a11 = coeffs.a[c].a11(x, y);
                const double a12 = coeffs.a[c].a12(x, y);
                const double a22 = coeffs.a[c].a22(x, y);
                h1_scale = std::max({h1_scale, std::abs(a11), std::abs(a12), std::abs(a22)});
                for (int d = 0; d < 16; ++d) {
                    const double ang = d * std::numbers::pi / 16.0;
                    const double xi1 = std::cos(ang), xi2 = std::sin(ang);
                    const double quad = a11 * xi1 * xi1 + 2.0 * a12 * xi1 * xi2 + a22 * xi2 * xi2;
                    const double margin = quad - coeffs.mu * (xi1 * xi1 + xi2 * xi2);
                    if (margin < rep.h1.margin) {
                        rep.h1.margin = margin;
                        rep.h1.witness = node_tag(c, i, j);
                    }
                }
            }
        }
    }
    rep.h1.pass = rep.h1.margin >= -1e-12 * h1_scale && coeffs.mu > 0.0;
    if (!(coeffs.mu > 0.0)) rep.h1.witness = "ellipticity constant mu is not positive";

    // (H2): source nonnegativity, only checkable against a concrete source.
    if (g != nullptr) {
        rep.h2.checked = true;
        rep.h2.margin = std::numeric_limits<double>::infinity();
        for (int c = 0; c < g->n_comp; ++c)
            for (int k = 0; k < g->n_time; ++k)
                for (int s = 0; s < g->n_space; ++s) {
                    const double v = g->at(c, k, s);
                    if (v < rep.h2.margin) {
                        rep.h2.margin = v;
                        rep.h2.witness = node_tag(c, grid.node_radial(s), grid.node_angular(s)) +
                                         ", t-level " + std::to_string(k);
                    }
                }
        rep.h2.pass = rep.h2.margin >= 0.0;
    } else {
        rep.h2.checked = false;
        rep.h2.pass = true;
        rep.h2.witness = "checked per source at solve time";
    }

    // (H3): off-diagonal coupling nonpositive everywhere.
    rep.h3.margin = std::numeric_limits<double>::infinity();
    for (int c = 0; c < coeffs.n; ++c)
        for (int l = 0; l < coeffs.n; ++l) {
            if (l == c) continue;
            for (int i = 0; i <= grid.nr; ++i)
                for (int j = 0; j < grid.ntheta; ++j) {
                    const auto [x, y] = grid.xy(i, j);
                    const double margin = -coeffs.c[c][l](x, y);
                    if (margin < rep.h3.margin) {
                        rep.h3.margin = margin;
                        rep.h3.witness = node_tag(c, i, j) + " coupling to component " +
                                         std::to_string(l + 1);
                    }
                }
        }
    rep.h3.pass = rep.h3.margin >= 0.0;

    // (H4): per component and boundary component, proper Robin or proper Dirichlet.
    rep.h4.margin = std::numeric_limits<double>::infinity();
    for (int c = 0; c < coeffs.n; ++c) {
        for (int side = 0; side < 2; ++side) {
            const auto& bc = bspec.sides[c][side];
            const char* name = side == 0 ? "Gamma0" : "Gamma1";
            for (int j = 0; j < grid.ntheta; ++j) {
                const double th = grid.theta(j);
                const double beta = bc.beta ? bc.beta(th) : 0.0;
                const double eta = bc.eta ? bc.eta(th) : 0.0;
                double margin;
                if (bc.dirichlet) {
                    // flag demands beta == 0, eta == 1 exactly
                    margin = -std::max(std::abs(beta), std::abs(eta - 1.0));
                } else {
                    margin = std::min(beta, eta);  // beta > 0 and eta >= 0
                    if (beta <= 0.0) margin = beta - 1e-300;
                }
                if (margin < rep.h4.margin) {
                    rep.h4.margin = margin;
                    rep.h4.witness = "component " + std::to_string(c + 1) + " on " + name +
                                     " (j=" + std::to_string(j) + ")";
                }
            }
        }
    }
    rep.h4.pass = rep.h4.margin >= 0.0;

    // (H5): |gamma*eta - delta*beta| bounded away from zero on Gamma1.
    rep.h5.margin = std::numeric_limits<double>::infinity();
    for (int c = 0; c < coeffs.n; ++c) {
        const auto& bc = bspec.sides[c][1];
        for (int j = 0; j < grid.ntheta; ++j) {
            const double th = grid.theta(j);
            const double beta = bc.dirichlet ? 0.0 : bc.beta(th);
            const double eta = bc.dirichlet ? 1.0 : bc.eta(th);
            const double det = ospec.entries[c].gamma(th) * eta - ospec.entries[c].delta(th) * beta;
            const double margin = std::abs(det) - kH5Floor;
            if (margin < rep.h5.margin) {
                rep.h5.margin = margin;
                rep.h5.witness = "component " + std::to_string(c + 1) + ", Gamma1 node j=" +
                                 std::to_string(j) + " (det=" + std::to_string(det) + ")";
            }
        }
    }
    rep.h5.pass = rep.h5.margin >= 0.0;

    return rep;
}

}  // namespace carleman
