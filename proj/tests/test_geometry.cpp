#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "carleman/geometry.hpp"
#include "carleman/numerics.hpp"

using namespace carleman;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("grid construction and node counts") {
    const AnnulusGrid g = build_annulus_grid(1.0, 2.0, 16, 32, 1.0, 64);
    CHECK(g.n_space() == 17 * 32);
    CHECK(g.n_time() == 65);

    int interior = 0, g0 = 0, g1 = 0;
    for (int i = 0; i <= g.nr; ++i) {
        const int count = g.ntheta;
        switch (g.classify(i)) {
            case NodeClass::Interior: interior += count; break;
            case NodeClass::Gamma0: g0 += count; break;
            case NodeClass::Gamma1: g1 += count; break;
        }
    }
    CHECK(g0 == 32);
    CHECK(g1 == 32);
    CHECK(interior + g0 + g1 == g.n_space());
}

TEST_CASE("parameter domain errors") {
    CHECK_THROWS_AS(build_annulus_grid(2.0, 1.0, 16, 32, 1.0, 64), parameter_error);
    CHECK_THROWS_AS(build_annulus_grid(0.0, 1.0, 16, 32, 1.0, 64), parameter_error);
    CHECK_THROWS_AS(build_annulus_grid(1.0, 2.0, 0, 32, 1.0, 64), parameter_error);
    CHECK_THROWS_AS(build_annulus_grid(1.0, 2.0, 16, 0, 1.0, 64), parameter_error);
    CHECK_THROWS_AS(build_annulus_grid(1.0, 2.0, 16, 32, -1.0, 64), parameter_error);
    CHECK_THROWS_AS(build_annulus_grid(1.0, 2.0, 16, 32, 1.0, 1), parameter_error);
}

TEST_CASE("angular periodicity") {
    const AnnulusGrid g = build_annulus_grid(1.0, 2.0, 8, 16, 1.0, 4);
    CHECK(g.node(3, 16) == g.node(3, 0));
    CHECK(g.node(3, -1) == g.node(3, 15));
}

TEST_CASE("outward normals") {
    const AnnulusGrid g = build_annulus_grid(1.0, 2.0, 16, 32, 1.0, 8);
    {
        const auto n = outward_normal(g, g.nr, 0);  // theta = 0 on Gamma1
        CHECK(n[0] == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(n[1] == doctest::Approx(0.0).epsilon(1e-14));
    }
    {
        const auto n = outward_normal(g, 0, 8);  // theta = pi/2 on Gamma0
        CHECK(std::abs(n[0]) < 1e-14);
        CHECK(n[1] == doctest::Approx(-1.0).epsilon(1e-14));
    }
    {
        const auto n = outward_normal(g, 0, 16);  // theta = pi on Gamma0
        CHECK(n[0] == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(std::abs(n[1]) < 1e-13);
    }
    for (int j = 0; j < g.ntheta; ++j) {
        const auto n0 = outward_normal(g, 0, j);
        const auto n1 = outward_normal(g, g.nr, j);
        CHECK(n0[0] + n1[0] == doctest::Approx(0.0).epsilon(1e-14));
        CHECK(n0[1] + n1[1] == doctest::Approx(0.0).epsilon(1e-14));
        CHECK(std::hypot(n1[0], n1[1]) == doctest::Approx(1.0).epsilon(1e-14));
    }
    CHECK_THROWS_AS(outward_normal(g, 5, 0), grid_domain_error);
}

TEST_CASE("quadrature totals") {
    const AnnulusGrid g = build_annulus_grid(1.0, 2.0, 16, 32, 1.0, 64);
    const QuadratureWeights q = quadrature_weights(g);

    std::vector<double> vols;
    for (int k = 0; k <= g.nt; ++k)
        for (int i = 0; i <= g.nr; ++i)
            for (int j = 0; j < g.ntheta; ++j) vols.push_back(q.volume(k, i));
    const double total = pairwise_sum(vols);
    CHECK(total == doctest::Approx(3.0 * kPi).epsilon(1e-10));  // |Q| = pi(r1^2-r0^2) T

    std::vector<double> b1;
    for (int k = 0; k <= g.nt; ++k)
        for (int j = 0; j < g.ntheta; ++j) b1.push_back(q.boundary(k, NodeClass::Gamma1));
    CHECK(pairwise_sum(b1) == doctest::Approx(2.0 * kPi * 2.0).epsilon(1e-10));

    std::vector<double> b0;
    for (int k = 0; k <= g.nt; ++k)
        for (int j = 0; j < g.ntheta; ++j) b0.push_back(q.boundary(k, NodeClass::Gamma0));
    CHECK(pairwise_sum(b0) == doctest::Approx(2.0 * kPi * 1.0).epsilon(1e-10));
}

TEST_CASE("quadrature second-order convergence on r^2") {
    // exact: int_Q r^2 = 2 pi T (r1^4 - r0^4) / 4
    const double exact = 2.0 * kPi * (16.0 - 1.0) / 4.0;
    double prev_err = 0.0;
    for (int lvl = 0; lvl < 3; ++lvl) {
        const int nr = 8 << lvl, nth = 16 << lvl, nt = 8 << lvl;
        const AnnulusGrid g = build_annulus_grid(1.0, 2.0, nr, nth, 1.0, nt);
        const QuadratureWeights q = quadrature_weights(g);
        std::vector<double> terms;
        for (int k = 0; k <= g.nt; ++k)
            for (int i = 0; i <= g.nr; ++i) {
                const double r2 = g.radius(i) * g.radius(i);
                for (int j = 0; j < g.ntheta; ++j) terms.push_back(q.volume(k, i) * r2);
            }
        const double err = std::abs(pairwise_sum(terms) - exact);
        if (lvl > 0) CHECK(err < 0.3 * prev_err);  // O(h^2): factor 4 expected
        prev_err = err;
    }
}
