// SPDX-License-Identifier: Apache-2.0

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "plpred/metrics.hpp"
#include "plpred/rng.hpp"

#include "support/tmpdir.hpp"

using namespace plpred;

namespace {

std::vector<LinkRecord> truth_records(const std::vector<double>& pathloss,
                                      const std::vector<bool>& los)
{
    std::vector<LinkRecord> out;
    for (std::size_t i = 0; i < pathloss.size(); ++i) {
        LinkRecord rec;
        rec.scene_id = "scene_a";
        rec.tx = {0.0, 0.0, 9.0};
        rec.rx = {static_cast<double>(i + 1), 0.0, 9.0};
        rec.distance_3d_m = static_cast<double>(i + 1);
        rec.pathloss_db = pathloss[i];
        rec.los = los[i];
        out.push_back(rec);
    }
    return out;
}

// independent two-pass reference: mean of errors first, then the moments
struct NaiveCell {
    double rmse = 0.0;
    double mae = 0.0;
};

NaiveCell naive_metrics(const std::vector<double>& preds, const std::vector<LinkRecord>& truth,
                        int want_los)
{
    std::vector<double> errors;
    for (std::size_t i = 0; i < truth.size(); ++i)
        if (want_los < 0 || truth[i].los == (want_los != 0))
            errors.push_back(preds[i] - truth[i].pathloss_db);
    NaiveCell c;
    if (errors.empty())
        return c;
    double sq = 0.0;
    for (double e : errors)
        sq += e * e;
    c.rmse = std::sqrt(sq / static_cast<double>(errors.size()));
    double ab = 0.0;
    for (double e : errors)
        ab += std::abs(e);
    c.mae = ab / static_cast<double>(errors.size());
    return c;
}

} // namespace

TEST_CASE("errors of 3 and 4 dB give MAE 3.5 and RMSE 3.5355")
{
    const auto truth = truth_records({100.0, 100.0}, {true, false});
    const SplitEval ev = evaluate({103.0, 96.0}, truth);
    CHECK(ev.all.mae_db == Catch::Approx(3.5).epsilon(1e-12));
    CHECK(ev.all.rmse_db == Catch::Approx(std::sqrt(12.5)).epsilon(1e-12));
    CHECK(ev.all.rmse_db == Catch::Approx(3.5355).margin(1e-4));
    CHECK(ev.all.count == 2);
    CHECK(ev.los.count == 1);
    CHECK(ev.nlos.count == 1);
    CHECK(ev.los.mae_db == Catch::Approx(3.0));
    CHECK(ev.nlos.mae_db == Catch::Approx(4.0));
}

TEST_CASE("perfect predictions give all-zero cells")
{
    const auto truth = truth_records({90.0, 110.0, 120.0}, {true, false, true});
    const SplitEval ev = evaluate({90.0, 110.0, 120.0}, truth);
    CHECK(ev.all.rmse_db == 0.0);
    CHECK(ev.all.mae_db == 0.0);
    CHECK(ev.p50 == 0.0);
    CHECK(ev.p95 == 0.0);
}

TEST_CASE("a single link has MAE equal to RMSE equal to the absolute error")
{
    const auto truth = truth_records({100.0}, {false});
    const SplitEval ev = evaluate({94.75}, truth);
    CHECK(ev.all.mae_db == Catch::Approx(5.25).epsilon(1e-15));
    CHECK(ev.all.rmse_db == Catch::Approx(5.25).epsilon(1e-15));
    CHECK(ev.los.count == 0);
    CHECK(ev.nlos.count == 1);
}

TEST_CASE("evaluate matches a naive reference on random inputs")
{
    Rng rng(41);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 3 + static_cast<int>(rng.uniform_int(0, 200));
        std::vector<double> pl, preds;
        std::vector<bool> los;
        for (int i = 0; i < n; ++i) {
            pl.push_back(rng.uniform(60.0, 160.0));
            preds.push_back(pl.back() + rng.normal() * 6.0);
            los.push_back(rng.uniform() < 0.5);
        }
        const auto truth = truth_records(pl, los);
        const SplitEval ev = evaluate(preds, truth);
        const NaiveCell all = naive_metrics(preds, truth, -1);
        const NaiveCell l = naive_metrics(preds, truth, 1);
        const NaiveCell nl = naive_metrics(preds, truth, 0);
        CHECK(std::abs(ev.all.rmse_db - all.rmse) < 1e-12);
        CHECK(std::abs(ev.all.mae_db - all.mae) < 1e-12);
        CHECK(std::abs(ev.los.rmse_db - l.rmse) < 1e-12);
        CHECK(std::abs(ev.nlos.mae_db - nl.mae) < 1e-12);
        CHECK(ev.all.mae_db <= ev.all.rmse_db + 1e-12);
        CHECK(ev.all.count == ev.los.count + ev.nlos.count);
    }
}

TEST_CASE("quantiles use the nearest-rank definition")
{
    std::vector<double> pl(10, 100.0);
    std::vector<bool> los(10, true);
    std::vector<double> preds;
    for (int i = 0; i < 10; ++i)
        preds.push_back(100.0 + i + 1.0); // abs errors 1..10
    const SplitEval ev = evaluate(preds, truth_records(pl, los));
    CHECK(ev.p50 == 5.0);
    CHECK(ev.p90 == 9.0);
    CHECK(ev.p95 == 10.0);

    const SplitEval two = evaluate({103.0, 96.0}, truth_records({100.0, 100.0}, {true, true}));
    CHECK(two.p50 == 3.0);
    CHECK(two.p90 == 4.0);
    CHECK(two.p95 == 4.0);
}

TEST_CASE("evaluate rejects mismatched lengths")
{
    const auto truth = truth_records({100.0, 101.0}, {true, false});
    CHECK_THROWS_AS(evaluate({100.0}, truth), validation_error);
}

TEST_CASE("prediction files round-trip exactly")
{
    const auto truth = truth_records({100.0, 101.5, 130.25}, {true, false, false});
    const auto preds = make_predictions(truth, {99.959183673469383, 102.5, 128.0});
    testsupport::TempDir tmp;
    const std::string path = tmp.file("pred.jsonl");
    save_predictions(path, preds);
    const auto back = load_predictions(path);
    REQUIRE(back.size() == preds.size());
    for (std::size_t i = 0; i < preds.size(); ++i) {
        CHECK(back[i].index == preds[i].index);
        CHECK(back[i].scene_id == preds[i].scene_id);
        CHECK(back[i].predicted_db == preds[i].predicted_db);
    }

    // a second save of the loaded data is byte-identical
    const std::string again = predictions_to_string(back);
    CHECK(again == read_text_file(path));
}

TEST_CASE("malformed prediction lines are reported with their line number")
{
    CHECK_THROWS_WITH(predictions_from_string("{\"index\":0}\n", "p.jsonl"),
                      Catch::Matchers::ContainsSubstring("p.jsonl:1"));
    CHECK_THROWS_WITH(
        predictions_from_string(
            "{\"index\":0,\"scene_id\":\"s\",\"predicted_db\":1.0}\nnot json\n", "p.jsonl"),
        Catch::Matchers::ContainsSubstring("p.jsonl:2"));
}

TEST_CASE("align_predictions names the first inconsistency")
{
    const auto truth = truth_records({100.0, 101.0, 102.0}, {true, true, false});
    auto preds = make_predictions(truth, {1.0, 2.0, 3.0});

    SECTION("aligned input passes through values in order")
    {
        const auto vals = align_predictions(preds, truth);
        CHECK(vals == std::vector<double>{1.0, 2.0, 3.0});
    }
    SECTION("bad index")
    {
        preds[1].index = 5;
        CHECK_THROWS_WITH(align_predictions(preds, truth, "x.jsonl"),
                          Catch::Matchers::ContainsSubstring("x.jsonl: link 1 has index 5"));
    }
    SECTION("bad scene id")
    {
        preds[2].scene_id = "scene_b";
        CHECK_THROWS_WITH(align_predictions(preds, truth),
                          Catch::Matchers::ContainsSubstring("link 2 is for scene scene_b"));
    }
    SECTION("missing tail link")
    {
        preds.pop_back();
        CHECK_THROWS_WITH(align_predictions(preds, truth),
                          Catch::Matchers::ContainsSubstring("missing link 2 (scene_a)"));
    }
    SECTION("surplus predictions")
    {
        preds.push_back(Prediction{3, "scene_a", 4.0});
        CHECK_THROWS_WITH(align_predictions(preds, truth),
                          Catch::Matchers::ContainsSubstring("has 4 links, truth has 3"));
    }
}

TEST_CASE("report json and cdf csv are deterministic and well-formed")
{
    Rng rng(43);
    std::vector<double> pl, preds;
    std::vector<bool> los;
    for (int i = 0; i < 40; ++i) {
        pl.push_back(rng.uniform(70.0, 150.0));
        preds.push_back(pl.back() + rng.normal() * 4.0);
        los.push_back(i % 3 == 0);
    }
    const auto truth = truth_records(pl, los);
    const SplitEval ev = evaluate(preds, truth);

    const std::string a = split_eval_json(ev).dump(2);
    const std::string b = split_eval_json(evaluate(preds, truth)).dump(2);
    CHECK(a == b);
    CHECK(a.find("\"all\"") != std::string::npos);
    CHECK(a.find("\"quantiles\"") != std::string::npos);

    const std::string csv = cdf_csv(ev);
    CHECK(csv.rfind("abs_error_db,cum_fraction\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 41);
    CHECK(csv.substr(csv.size() - 4) == "1.0\n"); // cdf reaches exactly one
}

TEST_CASE("cells enforce MAE at most RMSE")
{
    Rng rng(47);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> errors;
        const int n = 1 + static_cast<int>(rng.uniform_int(0, 30));
        for (int i = 0; i < n; ++i)
            errors.push_back(rng.normal() * rng.uniform(0.1, 10.0));
        const MetricCell c = detail::cell_from_errors(errors);
        CHECK(c.mae_db <= c.rmse_db + 1e-12);
    }
}
