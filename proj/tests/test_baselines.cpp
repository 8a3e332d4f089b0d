// SPDX-License-Identifier: Apache-2.0

#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "plpred/baselines.hpp"
#include "plpred/rng.hpp"

using namespace plpred;

namespace {

LinkRecord mk_link(double d3d, bool los, double pathloss)
{
    // lay the link along x with matched endpoint heights so d2d == d3d
    LinkRecord rec;
    rec.scene_id = "s";
    rec.tx = {0.0, 0.0, 9.0};
    rec.rx = {d3d, 0.0, 9.0};
    rec.distance_3d_m = d3d;
    rec.pathloss_db = pathloss;
    rec.los = los;
    return rec;
}

} // namespace

TEST_CASE("3gpp umi los matches frozen reference values")
{
    const GppConfig cfg;
    CHECK(gpp_umi_pathloss(100.0, 100.0, cfg, true) == Catch::Approx(103.34).margin(0.01));
    CHECK(gpp_umi_pathloss(10.0, 10.0, cfg, true) ==
          Catch::Approx(82.34316062684438).epsilon(1e-12));
    // beyond the breakpoint the 40 log10 slope with the correction term applies
    const double d2d = 2000.0;
    const double d3d = std::sqrt(d2d * d2d + 7.5 * 7.5);
    CHECK(gpp_umi_pathloss(d2d, d3d, cfg, true) ==
          Catch::Approx(133.0754001049571).epsilon(1e-12));
    CHECK(gpp_umi_pathloss(3000.0, std::sqrt(3000.0 * 3000.0 + 7.5 * 7.5), cfg, true) ==
          Catch::Approx(140.11898260936073).epsilon(1e-12));
}

TEST_CASE("3gpp umi nlos matches frozen reference values and takes the max")
{
    const GppConfig cfg;
    CHECK(gpp_umi_pathloss(100.0, 100.0, cfg, false) == Catch::Approx(123.82).margin(0.01));
    CHECK(gpp_umi_pathloss(100.0, 100.0, cfg, false) ==
          Catch::Approx(123.82446606758927).epsilon(1e-12));
    // at 10 m the nlos curve is already above the los floor
    CHECK(gpp_umi_pathloss(10.0, 10.0, cfg, false) ==
          Catch::Approx(88.52446606758926).epsilon(1e-12));
}

TEST_CASE("3gpp breakpoint distance and continuity across it")
{
    const GppConfig cfg;
    CHECK(cfg.breakpoint_m() == Catch::Approx(1493.33).margin(0.01));
    CHECK(cfg.breakpoint_m() == Catch::Approx(1493.3333333333333).epsilon(1e-14));

    const double dbp = cfg.breakpoint_m();
    const auto at = [&](double d2d) {
        const double d3d = std::sqrt(d2d * d2d + 7.5 * 7.5);
        return gpp_umi_pathloss(d2d, d3d, cfg, true);
    };
    CHECK(std::abs(at(dbp - 1e-9) - at(dbp + 1e-9)) < 1e-6);
}

TEST_CASE("3gpp nlos dominates los and both branches are monotone in distance")
{
    const GppConfig cfg;
    double prev_los = -1.0;
    double prev_nlos = -1.0;
    for (double d = 1.0; d <= 1000.0; d *= 1.07) {
        const double los = gpp_umi_pathloss(d, d, cfg, true);
        const double nlos = gpp_umi_pathloss(d, d, cfg, false);
        CHECK(nlos >= los);
        CHECK(los > prev_los);
        CHECK(nlos >= prev_nlos);
        prev_los = los;
        prev_nlos = nlos;
    }
}

TEST_CASE("3gpp config and distance domain is validated")
{
    GppConfig cfg;
    cfg.fc_ghz = 0.4;
    CHECK_THROWS_AS(gpp_umi_pathloss(10.0, 10.0, cfg, true), validation_error);
    cfg.fc_ghz = 101.0;
    CHECK_THROWS_AS(gpp_umi_pathloss(10.0, 10.0, cfg, true), validation_error);
    cfg = GppConfig{};
    cfg.h_ut_m = 1.0;
    CHECK_THROWS_AS(gpp_umi_pathloss(10.0, 10.0, cfg, true), validation_error);
    cfg = GppConfig{};
    CHECK_THROWS_AS(gpp_umi_pathloss(0.5, 0.5, cfg, true), validation_error);
    CHECK_THROWS_AS(gpp_umi_pathloss(12.0, 10.0, cfg, true), validation_error);
}

TEST_CASE("gpp_predict clamps sub-metre links to the 1 m domain bound")
{
    const GppConfig cfg;
    LinkRecord rec = mk_link(0.25, true, 50.0);
    const auto vals = gpp_predict({rec, mk_link(40.0, false, 120.0)}, cfg);
    REQUIRE(vals.size() == 2);
    CHECK(vals[0] == gpp_umi_pathloss(1.0, 1.0, cfg, true));
    CHECK(vals[1] == gpp_umi_pathloss(40.0, 40.0, cfg, false));
}

TEST_CASE("distance mlp fits a constant target")
{
    std::vector<LinkRecord> records;
    Rng rng(17);
    for (int i = 0; i < 200; ++i)
        records.push_back(mk_link(rng.uniform(5.0, 400.0), i % 2 == 0, 77.7));
    DistanceMlp mlp;
    MlpTrainConfig cfg;
    cfg.steps = 1500;
    mlp.train(records, cfg);
    for (double d : {5.0, 50.0, 200.0, 400.0}) {
        CHECK(mlp.predict(d, true) == Catch::Approx(77.7).margin(0.1));
        CHECK(mlp.predict(d, false) == Catch::Approx(77.7).margin(0.1));
    }
}

TEST_CASE("distance mlp learns a log-distance law to sub-dB accuracy")
{
    // free-space loss is linear in log10(d), which the relu net inputs span
    std::vector<LinkRecord> records;
    Rng rng(23);
    for (int i = 0; i < 400; ++i) {
        const double d = std::pow(10.0, rng.uniform(1.0, std::log10(500.0)));
        const double fspl = 20.0 * std::log10(4.0 * M_PI * d * 28e9 / 299792458.0);
        records.push_back(mk_link(d, true, fspl));
    }
    DistanceMlp mlp;
    mlp.train(records, MlpTrainConfig{});
    double se = 0.0;
    for (const auto& rec : records) {
        const double err = mlp.predict(rec.distance_3d_m, rec.los) - rec.pathloss_db;
        se += err * err;
    }
    CHECK(std::sqrt(se / static_cast<double>(records.size())) < 0.5);
}

TEST_CASE("distance mlp training is deterministic per seed")
{
    std::vector<LinkRecord> records;
    Rng rng(31);
    for (int i = 0; i < 100; ++i)
        records.push_back(mk_link(rng.uniform(2.0, 300.0), i % 3 == 0,
                                  60.0 + 20.0 * std::log10(1.0 + i)));
    MlpTrainConfig cfg;
    cfg.steps = 400;
    DistanceMlp a;
    a.train(records, cfg);
    DistanceMlp b;
    b.train(records, cfg);
    const auto pa = a.predict(records);
    const auto pb = b.predict(records);
    REQUIRE(pa.size() == pb.size());
    for (std::size_t i = 0; i < pa.size(); ++i)
        CHECK(pa[i] == pb[i]);

    MlpTrainConfig other = cfg;
    other.seed = 99;
    DistanceMlp c;
    c.train(records, other);
    const auto pc = c.predict(records);
    bool any_diff = false;
    for (std::size_t i = 0; i < pa.size(); ++i)
        any_diff |= pa[i] != pc[i];
    CHECK(any_diff);
}
