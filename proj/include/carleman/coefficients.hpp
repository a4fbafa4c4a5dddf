#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "carleman/field.hpp"
#include "carleman/geometry.hpp"

namespace carleman {

using ScalarXY = std::function<double(double, double)>;      // of Cartesian (x, y)
using ScalarTheta = std::function<double(double)>;           // of boundary angle

// Coefficients of the coupled system: per-component symmetric diffusion
// tensor (Cartesian entries), drift vector, and the n x n zero-order coupling
// matrix. All depend on space only. Ellipticity constant mu is part of the
// data and is what the hypothesis check verifies against.
struct SystemCoefficients {
    struct Tensor {
        ScalarXY a11, a12, a22;
    };

    int n = 0;
    std::vector<Tensor> a;                          // [n]
    std::vector<std::array<ScalarXY, 2>> b;         // [n]
    std::vector<std::vector<ScalarXY>> c;           // [n][n]
    double mu = 0.0;

    // kappa_i * Identity diffusion with constant drift and coupling.
    static SystemCoefficients isotropic(const std::vector<double>& kappa,
                                        const std::vector<std::array<double, 2>>& drift,
                                        const std::vector<std::vector<double>>& coupling);

    // Full constant tensors per component.
    static SystemCoefficients constant_tensor(const std::vector<std::array<double, 3>>& a_entries,
                                              const std::vector<std::array<double, 2>>& drift,
                                              const std::vector<std::vector<double>>& coupling,
                                              double mu);
};

// Robin data per component and boundary component; Dirichlet is the
// degenerate flag (beta == 0, eta == 1).
struct BoundarySpec {
    struct Side {
        bool dirichlet = true;
        ScalarTheta beta;  // unused when dirichlet
        ScalarTheta eta;
    };

    // sides[component][0] = Gamma0, sides[component][1] = Gamma1.
    std::vector<std::array<Side, 2>> sides;

    static Side dirichlet_side();
    static Side robin_side(double beta, double eta);

    static BoundarySpec all_dirichlet(int n);

    const Side& side(int comp, NodeClass which) const {
        return sides[comp][which == NodeClass::Gamma0 ? 0 : 1];
    }
};

// Observation coefficients on Gamma1 per component.
struct ObservationSpec {
    struct Entry {
        ScalarTheta gamma;
        ScalarTheta delta;
    };
    std::vector<Entry> entries;  // [n]

    static ObservationSpec constant(int n, double gamma, double delta);
};

// Determinant floor realizing the "!= 0" of the independence condition.
inline constexpr double kH5Floor = 1e-8;

struct HypothesisReport {
    struct Entry {
        bool pass = true;
        bool checked = true;
        double margin = 0.0;
        std::string witness;
    };
    Entry h1, h2, h3, h4, h5;

    bool all_pass() const {
        return h1.pass && h2.pass && h3.pass && h4.pass && h5.pass;
    }
};

// Verifies (H1), (H3), (H4), (H5) over every relevant node; (H2) only when a
// source field is supplied (it is a per-source property).
HypothesisReport check_hypotheses(const SystemCoefficients& coeffs, const BoundarySpec& bspec,
                                  const ObservationSpec& ospec, const AnnulusGrid& grid,
                                  const SpaceTimeField* g = nullptr);

}  // namespace carleman
