#include "doctest.h"

#include <cmath>
#include <numbers>

#include "cfslab/cutoff.hpp"
#include "cfslab/errors.hpp"
#include "cfslab/packets.hpp"

using namespace cfslab;

TEST_CASE("sharp cutoff norms match the closed forms") {
    const double m = 1.0;
    for (double me : {1.0, 0.3, 0.1, 0.03}) {
        const double eps = me / m;
        const CutoffNorms n = cutoff_l1_norms(CutoffProfile::sharp(eps), m);
        const SharpClosedForms c = sharp_closed_forms(eps, m);
        CHECK(std::abs(n.normA / c.normA - 1.0) <= 1e-8);
        CHECK(std::abs(m * n.normB / c.m_normB - 1.0) <= 1e-8);
        CHECK(c.normA == doctest::Approx(4.0 * std::numbers::pi / (3.0 * eps * eps * eps)).epsilon(1e-14));
    }
}

TEST_CASE("gaussian cutoff norm") {
    const double eps = 0.2, w = 1.3, a = 0.7;
    const CutoffNorms n = cutoff_l1_norms(CutoffProfile::gaussian(eps, w, a), 1.0);
    const double want = a * a * std::pow(std::numbers::pi, 1.5) * std::pow(w / eps, 3);
    CHECK(std::abs(n.normA / want - 1.0) <= 1e-9);
    CHECK(n.normB < n.normA);
}

TEST_CASE("norms scale like eps^-3 and eps^-2") {
    const double m = 1.0;
    const SharpClosedForms a = sharp_closed_forms(1e-3, m);
    const SharpClosedForms b = sharp_closed_forms(2e-3, m);
    CHECK(a.normA / b.normA == doctest::Approx(8.0).epsilon(1e-12));
    CHECK(a.m_normB / b.m_normB == doctest::Approx(4.0).epsilon(1e-3));
}

TEST_CASE("invalid cutoff parameters are rejected") {
    CHECK_THROWS_AS(CutoffProfile::sharp(0.0), InvalidArgument);
    CHECK_THROWS_AS(CutoffProfile::sharp(-1.0), InvalidArgument);
    CHECK_THROWS_AS(CutoffProfile::gaussian(0.1, -1.0), InvalidArgument);
}

TEST_CASE("sharp cutoff is an indicator") {
    const CutoffProfile g = CutoffProfile::sharp(0.5);
    CHECK(g(0.0) == 1.0);
    CHECK(g(1.99) == 1.0);
    CHECK(g(2.01) == 0.0);
    CHECK(g.support_radius() == doctest::Approx(2.0));
}

TEST_CASE("mollifier transform") {
    CHECK(mollifier_phi(0.0) == doctest::Approx(1.0).epsilon(1e-12));
    double prev = 1.0;
    for (double q = 0.5; q <= 4.0; q += 0.5) {
        const double p = mollifier_phi(q);
        CHECK(p < prev);
        prev = p;
    }
    CHECK(mollifier_h0() > 0.0);
    const CutoffProfile g = CutoffProfile::mollifier(0.05, 1.0);
    CHECK(g(0.0) > 0.0);
    CHECK(g(0.0) <= 1.0);
    CHECK(g(0.0) >= g(10.0));
}

TEST_CASE("sampled mollifier is a normalised nonnegative bump") {
    const MollifierSample s = build_mollifier(standard_bump, 0.1, 16);
    CHECK(s.min_value >= 0.0);
    CHECK(s.support_radius <= 0.1 + 1e-12);
    CHECK(std::abs(s.integral - 1.0) <= 2e-2);
    CHECK(s.symmetry_defect <= 1e-12 * s.max_value);
    const MollifierSpectrum sp = mollifier_spectrum(s);
    CHECK(sp.max_imag_rel <= 1e-10);
}

TEST_CASE("mollification moves values by at most eps times the Jacobian") {
    const double m = 1.0, eps = 0.05;
    const CutoffProfile g = CutoffProfile::mollifier(eps, m);
    const WavePacket u = gaussian_packet(Energy::negative, Spin::up, 0.25, Vec3(0.2, 0, -0.1), {}, 1.0, m);
    for (const SpacetimePoint x : {SpacetimePoint(0, 0, 0, 0), SpacetimePoint(0.4, 1.0, -0.5, 0.2)}) {
        const MollificationBound b = mollification_pointwise_bounds(u, x, g);
        CHECK(b.lhs <= b.rhs);
        CHECK(b.sup_value <= b.sup_bound);
    }
}
