#include <random>

#include <catch_amalgamated.hpp>

#include "common.hpp"
#include "flatwire/dcr.hpp"

using namespace flatwire;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

CoilSpec prototype_coil() { return {9.0e-3, 8.0e-3, 0.58e-3, 0.13e-3, 41, 5.8e7}; }

}  // namespace

TEST_CASE("prototype closed forms") {
    const auto c = prototype_coil();
    const double planar = dcr::dcr_planar(c).resistance;
    const double average = dcr::dcr_average(c).resistance;
    const double helical = dcr::dcr_helical(c).resistance;

    // Reference values evaluated independently in double precision.
    CHECK_THAT(planar, WithinRel(0.01204088179753609, 1e-12));
    CHECK_THAT(average, WithinRel(0.012444031542533884, 1e-12));
    CHECK_THAT(helical, WithinRel(0.012041414010272169, 1e-12));

    CHECK_THAT(planar, WithinRel(12.0e-3, 0.02));
    CHECK_THAT(average, WithinRel(12.45e-3, 0.02));
    CHECK_THAT(planar, WithinRel(12.4e-3, 0.06));
    CHECK_THAT(average, WithinRel(12.4e-3, 0.06));
}

TEST_CASE("config coil matches the listed prototype") {
    const auto a = fwtest::prototype().coil;
    const auto b = prototype_coil();
    CHECK(a.N == b.N);
    for (auto [x, y] : {std::pair{a.r_w, b.r_w}, {a.D_w, b.D_w}, {a.t_w, b.t_w}, {a.s, b.s}, {a.sigma, b.sigma}})
        CHECK_THAT(x, WithinRel(y, 1e-14));
}

TEST_CASE("closed forms agree with quadrature of the conductance integral on random coils") {
    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> r_w(1e-3, 30e-3), ratio(0.01, 5.0), t_w(0.05e-3, 3e-3), s(0.0, 1e-3);
    std::uniform_int_distribution<int> turns(1, 120);
    for (int i = 0; i < 100; ++i) {
        CoilSpec c;
        c.r_w = r_w(rng);
        c.D_w = ratio(rng) * c.r_w;
        c.t_w = t_w(rng);
        c.s = s(rng);
        c.N = turns(rng);
        INFO("coil " << i << ": r_w=" << c.r_w << " D_w=" << c.D_w << " N=" << c.N);
        const auto hq = dcr::dcr_quadrature(c, dcr::LengthModel::helical).resistance;
        const auto pq = dcr::dcr_quadrature(c, dcr::LengthModel::planar).resistance;
        const auto aq = dcr::dcr_quadrature(c, dcr::LengthModel::average).resistance;
        CHECK_THAT(dcr::dcr_helical(c).resistance, WithinRel(hq, 1e-9));
        CHECK_THAT(dcr::dcr_planar(c).resistance, WithinRel(pq, 1e-9));
        CHECK_THAT(dcr::dcr_average(c).resistance, WithinRel(aq, 1e-9));
    }
}

TEST_CASE("ordering of the length models") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.1, 3.0);
    for (int i = 0; i < 100; ++i) {
        CoilSpec c{u(rng) * 5e-3, u(rng) * 5e-3, u(rng) * 0.3e-3, u(rng) * 0.1e-3, 1 + static_cast<int>(u(rng) * 20), 5.8e7};
        const double p = dcr::dcr_planar(c).resistance;
        // A helix is longer than the flat ring at every radius.
        CHECK(dcr::dcr_helical(c).resistance > p);
        // 1/r is convex, so the mean-radius length overestimates the harmonic mean.
        CHECK(dcr::dcr_average(c).resistance > p);
    }
}

TEST_CASE("limits") {
    auto c = prototype_coil();
    SECTION("zero pitch reduces the helix to the planar ring") {
        c.s = 0.0;
        c.t_w = 1e-9;
        CHECK_THAT(dcr::dcr_helical(c).resistance, WithinRel(dcr::dcr_planar(c).resistance, 1e-9));
    }
    SECTION("thin conductor: planar and average coincide") {
        c.D_w = 1e-7;
        CHECK_THAT(dcr::dcr_average(c).resistance, WithinRel(dcr::dcr_planar(c).resistance, 1e-9));
    }
    SECTION("zero radial depth is a geometry error") {
        c.D_w = 0.0;
        CHECK_THROWS_AS(dcr::dcr_planar(c), GeometryError);
        CHECK_THROWS_AS(dcr::dcr_helical(c), GeometryError);
        CHECK_THROWS_AS(dcr::dcr_average(c), GeometryError);
        CHECK_THROWS_AS(dcr::dcr_quadrature(c, dcr::LengthModel::planar), GeometryError);
    }
    SECTION("other degenerate coils") {
        c.N = 0;
        CHECK_THROWS_AS(dcr::dcr_planar(c), GeometryError);
        c = prototype_coil();
        c.sigma = 0;
        CHECK_THROWS_AS(dcr::dcr_planar(c), GeometryError);
    }
}

TEST_CASE("resistance scales as N / (sigma t_w)") {
    const auto c = prototype_coil();
    auto c2 = c;
    c2.N *= 2;
    c2.s = 0;
    auto c1 = c;
    c1.s = 0;
    CHECK_THAT(dcr::dcr_planar(c2).resistance, WithinRel(2 * dcr::dcr_planar(c1).resistance, 1e-12));
    auto c3 = c;
    c3.t_w *= 2;
    c3.sigma /= 4;
    CHECK_THAT(dcr::dcr_planar(c3).resistance, WithinRel(2 * dcr::dcr_planar(c).resistance, 1e-12));
}

TEST_CASE("equivalent length and model tags") {
    const auto c = prototype_coil();
    for (auto m : {dcr::Model::helical, dcr::Model::planar, dcr::Model::average, dcr::Model::quadrature}) {
        const auto r = dcr::dcr(c, m);
        CHECK(r.model == m);
        CHECK_THAT(r.equivalent_length, WithinRel(r.resistance * c.sigma * c.t_w * c.D_w, 1e-14));
    }
    CHECK_THAT(dcr::dcr_average(c).equivalent_length, WithinRel(2 * pi * 41 * 13e-3, 1e-12));
    CHECK(dcr::to_string(dcr::Model::planar) == "planar");
}

TEST_CASE("copper conductivity falls with temperature") {
    CHECK(dcr::copper_conductivity_at(20.0) == copper_conductivity);
    CHECK_THAT(copper_conductivity / dcr::copper_conductivity_at(120.0), WithinRel(1.393, 1e-12));
    auto c = prototype_coil();
    const double r20 = dcr::dcr_planar(c).resistance;
    c.sigma = dcr::copper_conductivity_at(100.0);
    CHECK_THAT(dcr::dcr_planar(c).resistance / r20, WithinAbs(1.3144, 1e-4));
}
