#include <catch_amalgamated.hpp>

#include "common.hpp"
#include "flatwire/dcr.hpp"
#include "flatwire/femq.hpp"
#include "flatwire/mec.hpp"
#include "flatwire/post.hpp"

using namespace flatwire;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using cplx = std::complex<double>;

namespace {

std::shared_ptr<const femq::Grid> mesh(const InductorDesign& d, double f_max) {
    femq::MeshPolicy p;
    p.max_frequency = f_max;
    return std::make_shared<const femq::Grid>(femq::build_mesh(d, p));
}

femq::FieldSolution solve_at(const std::shared_ptr<const femq::Grid>& g, double f) { return femq::solve({g, angular(f), 1.0}); }

}  // namespace

TEST_CASE("loss map sums to the ohmic loss") {
    const auto d = fwtest::small_design();
    const auto g = mesh(d, 200e3);
    for (double f : {0.0, 20e3, 200e3}) {
        const auto s = solve_at(g, f);
        const auto m = post::loss_map(s);
        const double p = post::ohmic_loss(s);
        CHECK_THAT(m.total, WithinRel(p, 1e-12));
        CHECK_THAT(m.gap_adjacent_loss + m.window_loss, WithinRel(p, 1e-12));
        double turns = 0;
        for (double t : m.turn_loss) turns += t;
        CHECK_THAT(turns, WithinRel(p, 1e-12));
        CHECK_THAT(post::ac_resistance(s), WithinRel(2 * p, 1e-12));
    }
}

TEST_CASE("DC loss density follows the 1/r current distribution") {
    const auto d = fwtest::small_design();
    const auto g = mesh(d, 0.0);
    const auto s = solve_at(g, 0.0);
    const auto m = post::loss_map(s);
    const auto& re = g->r_edges();
    const auto& ze = g->z_edges();
    // J = K / r with K = I / (t_w ln(r_out / r_in)); cell loss = pi K^2 ln(r1/r0) dz / sigma.
    const double K = 1.0 / (d.coil.t_w * std::log((d.coil.r_w + d.coil.D_w) / d.coil.r_w));
    for (int j = 0; j < g->nz(); ++j)
        for (int i = 0; i < g->nr(); ++i) {
            const int c = g->cell(i, j);
            if (g->turn(c) < 0) continue;
            const double exact = pi * K * K * std::log(re[i + 1] / re[i]) * (ze[j + 1] - ze[j]) / d.coil.sigma;
            CHECK_THAT(m.cell_loss[c], WithinRel(exact, 1e-6));
        }
}

TEST_CASE("eddy currents circulate without net current") {
    const auto d = fwtest::small_design();
    const auto g = mesh(d, 300e3);
    const auto s = solve_at(g, 300e3);
    const auto e = post::eddy_net_currents(s);
    REQUIRE(e.circulating.size() == static_cast<size_t>(d.coil.N));
    double eddy_max = 0;
    for (int t = 0; t < d.coil.N; ++t) {
        CHECK(std::abs(e.circulating[t]) < 1e-8);
        eddy_max = std::max(eddy_max, std::abs(e.eddy[t]));
    }
    CHECK(eddy_max > 1e-3);
}

TEST_CASE("resistance rises and inductance falls with frequency") {
    const auto d = fwtest::small_design();
    const std::vector<double> freqs{0.0, 10e3, 30e3, 100e3, 300e3, 1e6};
    const auto g = mesh(d, freqs.back());
    double rac_prev = 0, l_prev = INFINITY;
    for (double f : freqs) {
        const auto s = solve_at(g, f);
        const double rac = post::ac_resistance(s);
        const double l = std::abs(post::inductance(s));
        INFO("f = " << f << " Rac = " << rac << " |L| = " << l);
        CHECK(rac >= rac_prev * (1 - 1e-9));
        CHECK(l <= l_prev * (1 + 1e-9));
        CHECK(post::inductance(s).imag() <= 1e-15);
        rac_prev = rac;
        l_prev = l;
    }
    CHECK(rac_prev > 2 * dcr::dcr_planar(d.coil).resistance);
}

TEST_CASE("Q extraction") {
    SECTION("identities") {
        const double L0 = 1e-4;
        const auto q = post::extract_Q({0.0, 1e3, 1e4}, {cplx(L0), cplx(L0), cplx(L0 / 2)}, L0);
        CHECK(std::abs(q(0.0)) == 0.0);
        CHECK(std::abs(q(angular(1e3))) < 1e-15);
        CHECK_THAT(q(angular(1e4)).real(), WithinAbs(1.0, 1e-12));
        CHECK_THROWS_AS(post::extract_Q({1e3}, {cplx(0.0)}, L0), NumericalError);
        CHECK_THROWS_AS(post::extract_Q({1e3, 2e3}, {cplx(L0)}, L0), NumericalError);
    }
    SECTION("round trip through the reluctance network") {
        const auto d = fwtest::small_design();
        const std::vector<double> freqs{0.0, 50e3, 100e3, 200e3};
        const auto g = mesh(d, freqs.back());
        const double L0 = post::inductance(solve_at(g, 0.0)).real();
        std::vector<cplx> L;
        for (double f : freqs) L.push_back(post::inductance(solve_at(g, f)));
        const auto q = post::extract_Q(freqs, L, L0);
        const auto net = mec::build_network(d);
        const double R0 = mec::zero_freq_reluctance(net);
        for (size_t i = 1; i < freqs.size(); ++i) {
            const cplx R = mec::apply_Q(net, q, angular(freqs[i]));
            CHECK_THAT(std::abs(R / R0 - (1.0 + q(angular(freqs[i])))), WithinAbs(0.0, 1e-12));
            // L(jw) (1 + Q) recovers the zero-frequency inductance
            const cplx back = L[i] * (1.0 + q(angular(freqs[i])));
            CHECK_THAT(std::abs(back - L0) / L0, WithinAbs(0.0, 1e-12));
            CHECK(q(angular(freqs[i])).real() >= 0.0);
        }
    }
}

TEST_CASE("loss concentrates near the gap at high frequency") {
    const auto d = fwtest::small_design();
    const auto g = mesh(d, 500e3);
    const auto lo = post::loss_map(solve_at(g, 0.0));
    const auto hi = post::loss_map(solve_at(g, 500e3));
    const double share_lo = lo.gap_adjacent_loss / lo.total;
    const double share_hi = hi.gap_adjacent_loss / hi.total;
    INFO("gap-adjacent share: DC " << share_lo << ", 500 kHz " << share_hi);
    CHECK(share_lo > 0.0);
    CHECK(share_hi > share_lo);

    const auto s = solve_at(g, 500e3);
    const auto inner = post::inner_quarter_loss_fraction(s, hi, d.coil.r_w, d.coil.r_w + d.coil.D_w);
    CHECK(*std::max_element(inner.begin(), inner.end()) > 0.25);
    for (double x : inner) {
        CHECK(x >= 0.0);
        CHECK(x <= 1.0);
    }
}

TEST_CASE("near-gap test uses twice the gap length") {
    const auto g = mesh(fwtest::small_design(), 0.0);
    REQUIRE_FALSE(g->gap_marks.empty());
    const auto& m = g->gap_marks.front();
    const double len = m.z_hi - m.z_lo;
    const double zc = 0.5 * (m.z_lo + m.z_hi);
    CHECK(post::near_gap(*g, m.r_face + 1.9 * len, zc));
    CHECK_FALSE(post::near_gap(*g, m.r_face + 2.1 * len, zc));
    CHECK(post::near_gap(*g, m.r_face, m.z_hi + 1.9 * len));
    CHECK_FALSE(post::near_gap(*g, m.r_face, m.z_hi + 2.1 * len));
}

TEST_CASE("response point fields") {
    const auto d = fwtest::small_design();
    const auto g = mesh(d, 100e3);
    const auto s0 = solve_at(g, 0.0);
    const double L0 = post::inductance(s0).real();
    const auto p0 = post::response_point(s0, L0);
    CHECK(p0.frequency == 0.0);
    CHECK(std::abs(p0.Q) == 0.0);
    const auto p = post::response_point(solve_at(g, 100e3), L0);
    CHECK_THAT(p.frequency, WithinRel(100e3, 1e-12));
    CHECK_THAT(std::abs(p.L * (1.0 + p.Q) - L0) / L0, WithinAbs(0.0, 1e-12));
    CHECK_THAT(2 * (p.loss_gap_adjacent + p.loss_window), WithinRel(p.Rac, 1e-12));
    CHECK(p.turn_loss.size() == static_cast<size_t>(d.coil.N));
}
