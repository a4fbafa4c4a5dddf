#pragma once

#include <array>
#include <vector>

#include "carleman/errors.hpp"

namespace carleman {

enum class NodeClass { Interior, Gamma0, Gamma1 };

// Space-time grid on the concentric annulus r0 < |x| < r1. Spatial nodes sit
// on a polar lattice (nr+1 radii x ntheta angles, periodic in theta); time
// levels are uniform on [0, T]. Immutable after construction.
struct AnnulusGrid {
    double r0 = 0.0;
    double r1 = 0.0;
    double T = 0.0;
    int nr = 0;
    int ntheta = 0;
    int nt = 0;

    double dr = 0.0;
    double dtheta = 0.0;
    double dt = 0.0;

    int n_radii() const { return nr + 1; }
    int n_space() const { return (nr + 1) * ntheta; }
    int n_time() const { return nt + 1; }

    double radius(int i) const { return r0 + i * dr; }
    double theta(int j) const { return wrap(j) * dtheta; }
    double time(int k) const { return k * dt; }

    // Periodic angular index.
    int wrap(int j) const {
        j %= ntheta;
        return j < 0 ? j + ntheta : j;
    }

    int node(int i, int j) const { return i * ntheta + wrap(j); }
    int node_radial(int s) const { return s / ntheta; }
    int node_angular(int s) const { return s % ntheta; }

    std::array<double, 2> xy(int i, int j) const;

    NodeClass classify(int i) const {
        if (i == 0) return NodeClass::Gamma0;
        if (i == nr) return NodeClass::Gamma1;
        return NodeClass::Interior;
    }
    bool on_boundary(int i) const { return i == 0 || i == nr; }
};

AnnulusGrid build_annulus_grid(double r0, double r1, int nr, int ntheta, double T, int nt);

// Outward unit normal of the annulus at a boundary node: +e_r on Gamma1,
// -e_r on Gamma0. Throws grid_domain_error for interior nodes.
std::array<double, 2> outward_normal(const AnnulusGrid& grid, int i, int j);

// Trapezoidal space-time measures. Volume weights are theta-independent:
// w(k, i) = wt(k) * wr(i) * r_i * dtheta; boundary weights live on the two
// boundary cylinders Sigma0, Sigma1.
struct QuadratureWeights {
    std::vector<double> time_w;    // nt+1
    std::vector<double> radial_w;  // (nr+1), includes r_i * dr * dtheta factor
    double gamma0_arc = 0.0;       // r0 * dtheta
    double gamma1_arc = 0.0;       // r1 * dtheta

    double volume(int k, int i) const { return time_w[k] * radial_w[i]; }
    double boundary(int k, NodeClass which) const {
        return time_w[k] * (which == NodeClass::Gamma0 ? gamma0_arc : gamma1_arc);
    }
};

QuadratureWeights quadrature_weights(const AnnulusGrid& grid);

}  // namespace carleman
