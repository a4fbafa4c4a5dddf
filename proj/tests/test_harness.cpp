#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "carleman/harness.hpp"
#include "carleman/inverse.hpp"
#include "carleman/manufactured.hpp"
#include "carleman/norms.hpp"

using namespace carleman;

namespace {

// Large T keeps s*alpha within the representable exponential range for the
// pinned (lambda, s) sweeps; see the weight construction.
struct Lab {
    AnnulusGrid grid;
    ManufacturedCase mc;
    ForwardProblem fp;
    SpaceTimeField g;
    SpaceTimeField y;
    ObservationTrace zeta;

    Lab(double T, int nr, int ntheta, int nt)
        : grid(build_annulus_grid(1.0, 2.0, nr, ntheta, T, nt)),
          mc(manufactured_dirichlet_iso(2, 1.0, 2.0)),
          fp(grid, mc.coeffs, mc.bspec, mc.ospec),
          g(source_field(mc, grid, 2)),
          y(fp.solve(g, initial_vector(mc, grid, 2))),
          zeta(fp.observe(y)) {}
};

CarlemanParams l2_params(double lambda, double s) {
    CarlemanParams p;
    p.lambda = lambda;
    p.s = s;
    return p;
}

CarlemanParams lq_params(double lambda, double s, double gamma_bar) {
    CarlemanParams p;
    p.lambda = lambda;
    p.s = s;
    p.gamma_bar = gamma_bar;
    p.s_prime = 1.25 * gamma_bar * s;
    return p;
}

}  // namespace

TEST_CASE("zero data: all terms vanish, ratio defined as zero") {
    const AnnulusGrid grid = build_annulus_grid(1.0, 2.0, 8, 16, 2e5, 16);
    const ManufacturedCase mc = manufactured_dirichlet_iso(2, 1.0, 2.0);
    const ForwardProblem fp(grid, mc.coeffs, mc.bspec, mc.ospec);
    const SpaceTimeField zero(2, grid.n_time(), grid.n_space());
    const std::vector<double> y0(2 * grid.n_space(), 0.0);
    const SpaceTimeField y = fp.solve(zero, y0);
    const ObservationTrace zeta = fp.observe(y);

    const CarlemanReport rep = verify_l2_carleman(fp, y, zero, zeta, l2_params(2.0, 20.0));
    CHECK(rep.lhs_total == 0.0);
    CHECK(rep.rhs_total == 0.0);
    CHECK(rep.ratio == 0.0);
    CHECK(!rep.anomaly);

    const CarlemanReport lqrep =
        verify_lq_carleman(fp, y, zero, zeta, lq_params(3.0, 10.0, 2.0), 4.0);
    CHECK(lqrep.ratio == 0.0);
    CHECK(!lqrep.anomaly);
}

TEST_CASE("l2 carleman: finite ratios, homogeneity, bounded s-trend") {
    const Lab lab(2e5, 12, 24, 64);

    double prev_ratio = -1.0;
    double r40 = 0.0, r80 = 0.0;
    for (double s : {20.0, 40.0, 80.0}) {
        const CarlemanReport rep =
            verify_l2_carleman(lab.fp, lab.y, lab.g, lab.zeta, l2_params(2.0, s));
        CHECK(std::isfinite(rep.ratio));
        CHECK(rep.ratio > 0.0);
        CHECK(!rep.anomaly);
        for (const auto& [name, v] : rep.lhs_terms) CHECK(v >= 0.0);
        for (const auto& [name, v] : rep.rhs_terms) CHECK(v >= 0.0);
        if (s == 40.0) r40 = rep.ratio;
        if (s == 80.0) r80 = rep.ratio;
        prev_ratio = rep.ratio;
    }
    CHECK(r80 <= 1.5 * r40);

    // quadratic homogeneity: scaling g (hence y, zeta) leaves the ratio fixed
    SpaceTimeField g2 = lab.g, y2 = lab.y;
    ObservationTrace z2 = lab.zeta;
    for (double& v : g2.data) v *= 2.0;
    for (double& v : y2.data) v *= 2.0;
    for (double& v : z2.data) v *= 2.0;
    const CarlemanReport a =
        verify_l2_carleman(lab.fp, lab.y, lab.g, lab.zeta, l2_params(2.0, 40.0));
    const CarlemanReport b = verify_l2_carleman(lab.fp, y2, g2, z2, l2_params(2.0, 40.0));
    CHECK(b.ratio == doctest::Approx(a.ratio).epsilon(1e-10));
}

TEST_CASE("l2 carleman: refinement stability marks converged cells") {
    const Lab base(2e5, 12, 24, 64);
    const Lab fine(2e5, 24, 48, 128);
    for (double s : {20.0, 40.0, 80.0}) {
        CarlemanReport rep =
            verify_l2_carleman(base.fp, base.y, base.g, base.zeta, l2_params(2.0, s));
        const CarlemanReport frep =
            verify_l2_carleman(fine.fp, fine.y, fine.g, fine.zeta, l2_params(2.0, s));
        apply_refinement_check(rep, frep);
        CHECK(!rep.unconverged);
    }
    // a deliberately mismatched pair is flagged
    CarlemanReport rep =
        verify_l2_carleman(base.fp, base.y, base.g, base.zeta, l2_params(2.0, 20.0));
    CarlemanReport wrong = rep;
    wrong.lhs_terms[0].second *= 2.0;
    apply_refinement_check(rep, wrong);
    CHECK(rep.unconverged);
}

TEST_CASE("lq carleman: finite, 1-homogeneous, s-trend, phi3 cross-report") {
    const Lab lab(1e8, 12, 24, 64);

    for (double q : {2.0, 4.0, 6.0}) {
        double r20 = 0.0, r40 = 0.0;
        for (double s : {10.0, 20.0, 40.0}) {
            const CarlemanReport rep =
                verify_lq_carleman(lab.fp, lab.y, lab.g, lab.zeta, lq_params(3.0, s, 2.0), q);
            CHECK(std::isfinite(rep.ratio));
            CHECK(!rep.anomaly);
            CHECK(rep.rhs_terms.size() == 3);
            CHECK(rep.rhs_terms[2].first == "obs_phi3");
            if (s == 20.0) r20 = rep.ratio;
            if (s == 40.0) r40 = rep.ratio;
        }
        CHECK(r40 <= 1.5 * r20);
    }

    // 1-homogeneity under g -> 3g
    SpaceTimeField g3 = lab.g, y3 = lab.y;
    ObservationTrace z3 = lab.zeta;
    for (double& v : g3.data) v *= 3.0;
    for (double& v : y3.data) v *= 3.0;
    for (double& v : z3.data) v *= 3.0;
    const CarlemanReport a =
        verify_lq_carleman(lab.fp, lab.y, lab.g, lab.zeta, lq_params(3.0, 20.0, 2.0), 4.0);
    const CarlemanReport b =
        verify_lq_carleman(lab.fp, y3, g3, z3, lq_params(3.0, 20.0, 2.0), 4.0);
    CHECK(b.ratio == doctest::Approx(a.ratio).epsilon(1e-10));
}

TEST_CASE("solver residual gate rejects non-solutions") {
    const Lab lab(2e5, 8, 16, 16);
    SpaceTimeField ybad = lab.y;
    ybad.at(0, lab.grid.nt / 2, 7) += 1.0;
    CHECK_THROWS_AS(verify_l2_carleman(lab.fp, ybad, lab.g, lab.zeta, l2_params(2.0, 20.0)),
                    parameter_error);
}

TEST_CASE("stability table over class samples") {
    const AnnulusGrid grid = build_annulus_grid(1.0, 2.0, 10, 20, 1.0, 24);
    const ManufacturedCase mc = manufactured_dirichlet_iso(2, 1.0, 2.0);
    const ForwardProblem fp(grid, mc.coeffs, mc.bspec, mc.ospec);
    const SourceClassSpec cls = default_source_class(grid, 2, 2.0);
    std::vector<SpaceTimeField> sources;
    for (int i = 0; i < 8; ++i)
        sources.push_back(sample_source(cls, grid, 100 + i, 2).field);
    const StabilityTable table = estimate_stability_constant(fp, sources, 2.0);
    REQUIRE(table.samples.size() == 8);
    CHECK(table.median_ratio > 0.0);
    CHECK(table.max_ratio >= table.median_ratio);
    for (const auto& smp : table.samples) {
        CHECK(!smp.anomaly);
        CHECK(std::isfinite(smp.ratio));
        CHECK(smp.ratio > 0.0);
    }
    // scaling invariance of the per-sample ratio
    SpaceTimeField doubled = sources[0];
    for (double& v : doubled.data) v *= 2.0;
    const StabilityTable t2 = estimate_stability_constant(fp, {sources[0], doubled}, 2.0);
    CHECK(t2.samples[0].ratio == doctest::Approx(t2.samples[1].ratio).epsilon(1e-10));
}
