#include "doctest.h"

#include <cmath>

#include "cfslab/experiments.hpp"
#include "cfslab/holes.hpp"
#include "cfslab/packets.hpp"
#include "oracle.hpp"

using namespace cfslab;

namespace {

double rel_err(const Bispinor& a, const Bispinor& b) { return (a - b).norm() / std::max(b.norm(), 1e-300); }

}  // namespace

TEST_CASE("special solutions take unit values at their centre") {
    const SpacetimePoint x0(0.3, 0.1, -0.2, 0.4);
    for (double sigma : {0.5, 1.0, 2.0}) {
        const auto sp = special_solutions(sigma, x0, 1.0);
        for (const auto& s : sp) {
            const Bispinor v = evaluate(s.packet, x0);
            CHECK((v - s.C * unit_spinor(s.mu)).cwiseAbs().maxCoeff() <= 1e-8);
        }
    }
}

TEST_CASE("radial evaluation agrees with direct 3D quadrature") {
    const SpacetimePoint x0(0.3, 0.1, -0.2, 0.4);
    const WavePacket a = special_a(Spin::down, 1.0, x0);
    const WavePacket b = special_b(Spin::up, 1.0, x0);
    for (const SpacetimePoint x : {SpacetimePoint(0.2, 0.5, -0.3, 0.7), SpacetimePoint(-0.6, 1.0, 0.4, -0.9)}) {
        CHECK(rel_err(evaluate(a, x), oracle::packet(a, x, 14.0)) <= 1e-8);
        CHECK(rel_err(evaluate(b, x), oracle::packet(b, x, 14.0)) <= 1e-8);
    }
}

TEST_CASE("gaussian packets with momentum agree with direct 3D quadrature") {
    const WavePacket u = gaussian_packet(Energy::positive, Spin::down, 0.6, Vec3(0.4, -0.3, 0.2),
                                         SpacetimePoint(0.1, 0.5, 0.0, -0.5), cplx(0.8, 0.3), 1.0);
    const SpacetimePoint x(0.7, -0.4, 0.9, 0.2);
    CHECK(rel_err(evaluate(u, x), oracle::packet(u, x, 8.0)) <= 1e-7);
}

TEST_CASE("regularised evaluation equals evaluation of the filtered profile") {
    const CutoffProfile g = CutoffProfile::gaussian(0.3);
    const WavePacket u = special_b(Spin::down, 1.0, {});
    const SpacetimePoint x(0.2, 0.3, -0.1, 0.5);
    CHECK(rel_err(evaluate_regularized(u, x, g), oracle::packet(regularize_profile(u, g), x, 14.0)) <= 1e-8);
}

TEST_CASE("translation shifts the argument") {
    const WavePacket u = gaussian_packet(Energy::negative, Spin::up, 0.5, Vec3(0.1, 0.2, 0), {}, 1.0, 1.0);
    const SpacetimePoint a(0.3, -0.2, 0.5, 0.1);
    const SpacetimePoint x(0.1, 0.4, 0.0, -0.3);
    CHECK(rel_err(evaluate(translate(u, a), x), evaluate(u, x + a)) <= 1e-10);
}

TEST_CASE("norm is conserved in time") {
    const WavePacket u = special_a(Spin::up, 1.0, {});
    const double n = packet_l2_norm(u);
    for (double t : {0.0, 1.0, 5.0}) CHECK(std::abs(position_norm(u, t) / n - 1.0) <= 1e-6);
}

TEST_CASE("inner product is Hermitian and positive") {
    const WavePacket u = gaussian_packet(Energy::negative, Spin::up, 0.5, Vec3(0.1, 0, 0), {}, 1.0, 1.0);
    const WavePacket v = gaussian_packet(Energy::negative, Spin::up, 0.7, Vec3(0, 0.2, 0), SpacetimePoint(0, 1, 0, 0),
                                         cplx(0, 1), 1.0);
    CHECK(std::abs(inner_product(u, v) - std::conj(inner_product(v, u))) <= 1e-12);
    CHECK(inner_product(u, u).real() > 0.0);
    CHECK(std::abs(inner_product(u, u).imag()) <= 1e-14);
    const WavePacket w = gaussian_packet(Energy::positive, Spin::up, 0.5, Vec3(0.1, 0, 0), {}, 1.0, 1.0);
    CHECK(std::abs(inner_product(u, w)) <= 1e-12);
}

TEST_CASE("orthonormalised families have unit Gram matrix") {
    std::vector<WavePacket> p;
    Rng r(9);
    for (int i = 0; i < 4; ++i)
        p.push_back(gaussian_packet(Energy::negative, i % 2 ? Spin::up : Spin::down, r.uniform(0.3, 0.6),
                                    Vec3(r.uniform(-0.3, 0.3), 0, 0), SpacetimePoint(0, r.uniform(-1, 1), 0, 0), 1.0,
                                    1.0));
    const SolutionFamily f = orthonormalize_family(SolutionFamily(p));
    CHECK((f.gram() - Eigen::MatrixXcd::Identity(4, 4)).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("analytic gradient agrees with finite differences") {
    const WavePacket u = gaussian_packet(Energy::negative, Spin::up, 0.4, Vec3(0.3, -0.2, 0.1), {}, 1.0, 1.0);
    const SpacetimePoint x(0.2, 0.1, 0.3, -0.2);
    const auto ga = gradient(u, x);
    const double h = 1e-4;
    for (int mu = 0; mu < 4; ++mu) {
        SpacetimePoint d;
        if (mu == 0) d.t = h;
        else d.x(mu - 1) = h;
        const Bispinor fd = (evaluate(u, x + d) - evaluate(u, x - d)) / (2 * h);
        CHECK((ga[static_cast<std::size_t>(mu)] - fd).norm() <= 1e-6 * (1.0 + fd.norm()));
    }
}

TEST_CASE("packets decay along spacelike rays") {
    const WavePacket u = gaussian_packet(Energy::negative, Spin::up, 0.5, Vec3::Zero(), {}, 1.0, 1.0);
    const auto s = decay_probe(u, SpacetimePoint(0, 1, 0, 0), {2, 4, 8, 16});
    for (std::size_t i = 1; i < s.size(); ++i) CHECK(s[i].value < s[i - 1].value);
}

TEST_CASE("momentum L1 norms of a gaussian match brute force") {
    const WavePacket u = gaussian_packet(Energy::negative, Spin::up, 0.3, Vec3(0.2, -0.05, 0.0), {}, 0.7, 1.0);
    const auto n = momentum_l1_norms(u);
    // Cartesian rule on [-2, 2]^3 with a panel edge at 0 so the kink of |k_j| is resolved
    oracle::Rule r = oracle::composite(8, 12, 2.0);
    const std::size_t h = r.x.size();
    for (std::size_t i = 0; i < h; ++i) {
        r.x.push_back(-r.x[i]);
        r.w.push_back(r.w[i]);
    }
    std::array<double, 3> want{};
    for (std::size_t a = 0; a < r.x.size(); ++a)
        for (std::size_t b = 0; b < r.x.size(); ++b)
            for (std::size_t c = 0; c < r.x.size(); ++c) {
                const Vec3 k(r.x[a], r.x[b], r.x[c]);
                const double w = r.w[a] * r.w[b] * r.w[c] * std::abs(u.lambda(k));
                for (int j = 0; j < 3; ++j) want[static_cast<std::size_t>(j)] += w * std::abs(k(j));
            }
    for (int j = 0; j < 3; ++j)
        CHECK(n[static_cast<std::size_t>(j + 1)] == doctest::Approx(want[static_cast<std::size_t>(j)]).epsilon(1e-9));
}
