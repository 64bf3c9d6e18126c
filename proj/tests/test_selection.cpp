#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>
#include <vector>

#include "msheet/errors.hpp"
#include "msheet/selection.hpp"

using namespace msheet;

namespace {

RunConfig cfg(std::uint64_t seed) {
    RunConfig run;
    run.seed = seed;
    return run;
}

std::vector<ScoreRecord> metric_scores(const std::string& metric,
                                       const std::vector<double>& values) {
    std::vector<ScoreRecord> out;
    for (std::size_t i = 0; i < values.size(); ++i)
        out.push_back({cfg(i), metric, values[i]});
    return out;
}

std::set<std::string> keys_of(const std::vector<RunConfig>& runs) {
    std::set<std::string> keys;
    for (const auto& run : runs) keys.insert(config_key(run));
    return keys;
}

// Rank-count oracle: a run survives iff fewer than ceil(k/100*N) runs beat it
// on every criterion. Beating = higher score, or equal score and lower config
// in the RunConfig field order.
std::vector<RunConfig> brute_force_selection(const SelectionSpec& spec,
                                             const std::vector<ScoreRecord>& all_scores) {
    std::vector<RunConfig> configs;
    for (const auto& rec : all_scores)
        if (rec.metric_id == spec.criteria.front()) configs.push_back(rec.run);
    const std::size_t n = configs.size();
    const auto needed =
        static_cast<std::size_t>(std::ceil(spec.k * static_cast<double>(n) / 100.0 - 1e-9));

    auto score_of = [&](const std::string& metric, const RunConfig& run) {
        for (const auto& rec : all_scores)
            if (rec.metric_id == metric && config_key(rec.run) == config_key(run))
                return rec.score;
        throw DataError("score lookup failed");
    };

    std::vector<RunConfig> out;
    for (const auto& candidate : configs) {
        bool keep = true;
        for (const auto& metric : spec.criteria) {
            std::size_t beaten_by = 0;
            const double mine = score_of(metric, candidate);
            for (const auto& other : configs) {
                if (config_key(other) == config_key(candidate)) continue;
                const double theirs = score_of(metric, other);
                if (theirs > mine || (theirs == mine && other < candidate)) ++beaten_by;
            }
            if (beaten_by >= needed) {
                keep = false;
                break;
            }
        }
        if (keep) out.push_back(candidate);
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

TEST_CASE("selection spec validation") {
    SelectionSpec spec{{"a"}, 50.0};
    CHECK_NOTHROW(validate(spec));
    CHECK_THROWS_AS(validate(SelectionSpec{{}, 50.0}), ValidationError);
    CHECK_THROWS_AS(validate(SelectionSpec{{"a", "a"}, 50.0}), ValidationError);
    CHECK_THROWS_AS(validate(SelectionSpec{{"a"}, 0.0}), ValidationError);
    CHECK_THROWS_AS(validate(SelectionSpec{{"a"}, -5.0}), ValidationError);
    CHECK_THROWS_AS(validate(SelectionSpec{{"a"}, 100.5}), ValidationError);
}

TEST_CASE("top_k keeps the best ceil(k% of N)") {
    auto scores = metric_scores("m", {90, 80, 70, 60});

    SUBCASE("half of four") {
        auto kept = top_k(scores, 50);
        CHECK(keys_of(kept) ==
              std::set<std::string>{config_key(cfg(0)), config_key(cfg(1))});
    }
    SUBCASE("k=100 keeps everything") {
        CHECK(top_k(scores, 100).size() == 4);
    }
    SUBCASE("tiny k keeps exactly the best run") {
        auto kept = top_k(scores, 0.5);
        REQUIRE(kept.size() == 1);
        CHECK(config_key(kept[0]) == config_key(cfg(0)));
    }
    SUBCASE("ceiling arithmetic at 45 runs") {
        std::vector<double> values(45);
        for (std::size_t i = 0; i < 45; ++i) values[i] = 50.0 + static_cast<double>(i);
        CHECK(top_k(metric_scores("m", values), 75).size() == 34);  // ceil(33.75)
        CHECK(top_k(metric_scores("m", values), 50).size() == 23);  // ceil(22.5)
    }
}

TEST_CASE("top_k breaks score ties by config order") {
    std::vector<ScoreRecord> scores;
    RunConfig a = cfg(7), b = cfg(7), c = cfg(7);
    a.batch_size = 256;
    b.batch_size = 128;
    c.batch_size = 640;
    scores.push_back({a, "m", 80.0});
    scores.push_back({b, "m", 80.0});
    scores.push_back({c, "m", 80.0});
    auto kept = top_k(scores, 34);  // ceil(1.02) = 2
    REQUIRE(kept.size() == 2);
    CHECK(kept[0].batch_size == 128);
    CHECK(kept[1].batch_size == 256);
}

TEST_CASE("top_k input order does not matter") {
    std::mt19937 rng(99);
    std::vector<double> values(12);
    for (auto& v : values) v = std::uniform_real_distribution<>(60, 95)(rng);
    auto scores = metric_scores("m", values);
    auto baseline = top_k(scores, 40);
    for (int trial = 0; trial < 10; ++trial) {
        std::shuffle(scores.begin(), scores.end(), rng);
        CHECK(keys_of(top_k(scores, 40)) == keys_of(baseline));
    }
}

TEST_CASE("top_k rejects duplicates and mixed metrics") {
    auto scores = metric_scores("m", {90, 80});
    SUBCASE("duplicate config") {
        scores.push_back({cfg(0), "m", 70.0});
        CHECK_THROWS_AS(top_k(scores, 50), DataError);
    }
    SUBCASE("mixed metric ids") {
        scores.push_back({cfg(2), "other", 70.0});
        CHECK_THROWS_AS(top_k(scores, 50), ValidationError);
    }
    SUBCASE("empty input") {
        CHECK_THROWS_AS(top_k(std::vector<ScoreRecord>{}, 50), ValidationError);
    }
}

TEST_CASE("top_k is monotone in k") {
    std::mt19937 rng(4242);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> values(1 + static_cast<std::size_t>(rng() % 30));
        for (auto& v : values) v = std::uniform_real_distribution<>(0, 100)(rng);
        // Duplicate scores exercise the tie order.
        if (values.size() > 3) values[1] = values[0];
        auto scores = metric_scores("m", values);
        double k1 = std::uniform_real_distribution<>(1, 100)(rng);
        double k2 = std::uniform_real_distribution<>(k1, 100)(rng);
        auto small = keys_of(top_k(scores, k1));
        auto large = keys_of(top_k(scores, k2));
        CHECK(std::includes(large.begin(), large.end(), small.begin(), small.end()));
    }
}

TEST_CASE("intersect_selection with a single criterion equals top_k") {
    auto scores = metric_scores("m", {90, 80, 70, 60, 85});
    auto via_intersect = intersect_selection({{"m"}, 60.0}, scores);
    auto direct = top_k(scores, 60.0);
    CHECK(keys_of(via_intersect) == keys_of(direct));
}

TEST_CASE("anti-correlated criteria can share exactly one run") {
    std::vector<ScoreRecord> scores;
    for (auto [i, x, y] : {std::tuple{0, 90.0, 60.0},
                           std::tuple{1, 80.0, 75.0},
                           std::tuple{2, 70.0, 85.0},
                           std::tuple{3, 60.0, 50.0}}) {
        scores.push_back({cfg(static_cast<std::uint64_t>(i)), "x", x});
        scores.push_back({cfg(static_cast<std::uint64_t>(i)), "y", y});
    }
    auto kept = intersect_selection({{"x", "y"}, 50.0}, scores);
    REQUIRE(kept.size() == 1);
    CHECK(config_key(kept[0]) == config_key(cfg(1)));
}

TEST_CASE("k=100 keeps all runs regardless of criteria") {
    std::mt19937 rng(7);
    std::vector<ScoreRecord> scores;
    for (std::uint64_t i = 0; i < 9; ++i) {
        scores.push_back({cfg(i), "x", std::uniform_real_distribution<>(0, 100)(rng)});
        scores.push_back({cfg(i), "y", std::uniform_real_distribution<>(0, 100)(rng)});
    }
    CHECK(intersect_selection({{"x", "y"}, 100.0}, scores).size() == 9);
}

TEST_CASE("intersect_selection matches the rank-count oracle") {
    std::mt19937 rng(2026);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t n = 2 + rng() % 7;  // up to 8 configs
        const std::size_t m = 1 + rng() % 3;  // up to 3 criteria
        std::vector<ScoreRecord> scores;
        for (std::size_t c = 0; c < m; ++c) {
            std::string metric = "m" + std::to_string(c);
            for (std::uint64_t i = 0; i < n; ++i) {
                // Coarse grid of scores forces frequent ties.
                double v = static_cast<double>(rng() % 5) * 10.0;
                scores.push_back({cfg(i), metric, v});
            }
        }
        SelectionSpec spec;
        for (std::size_t c = 0; c < m; ++c) spec.criteria.push_back("m" + std::to_string(c));
        spec.k = std::uniform_real_distribution<>(5, 100)(rng);
        CAPTURE(trial);
        CHECK(keys_of(intersect_selection(spec, scores)) ==
              keys_of(brute_force_selection(spec, scores)));
    }
}

TEST_CASE("intersect_selection rejects incomplete score tables") {
    auto scores = metric_scores("x", {90, 80, 70});
    SUBCASE("criterion entirely absent") {
        CHECK_THROWS_AS(intersect_selection({{"x", "y"}, 50.0}, scores), DataError);
    }
    SUBCASE("criterion covering fewer runs") {
        scores.push_back({cfg(0), "y", 70.0});
        scores.push_back({cfg(1), "y", 60.0});
        CHECK_THROWS_AS(intersect_selection({{"x", "y"}, 50.0}, scores), DataError);
    }
}

TEST_CASE("unforeseen_report before/after distributions") {
    std::vector<ScoreRecord> scores;
    std::vector<double> values{78.0, 84.5, 80.0, 71.25, 90.0};
    for (std::uint64_t i = 0; i < values.size(); ++i)
        scores.push_back({cfg(i), "u", values[i]});
    std::vector<std::string> unforeseen{"u"};

    SUBCASE("selected = everything leaves the distribution unchanged") {
        std::vector<RunConfig> all;
        for (std::uint64_t i = 0; i < values.size(); ++i) all.push_back(cfg(i));
        auto report = unforeseen_report(all, scores, unforeseen);
        REQUIRE(report.metrics.size() == 1);
        const auto& dist = report.metrics[0];
        CHECK(dist.before.count == 5);
        CHECK(dist.before.min == 71.25);
        CHECK(dist.before.max == 90.0);
        CHECK(dist.before.range == 90.0 - 71.25);
        CHECK(dist.after.count == dist.before.count);
        CHECK(dist.after.min == dist.before.min);
        CHECK(dist.after.max == dist.before.max);
        CHECK(dist.after.range == dist.before.range);
    }
    SUBCASE("singleton selection collapses the range") {
        std::vector<RunConfig> one{cfg(2)};
        auto report = unforeseen_report(one, scores, unforeseen);
        CHECK(report.metrics[0].after.count == 1);
        CHECK(report.metrics[0].after.min == 80.0);
        CHECK(report.metrics[0].after.range == 0.0);
    }
    SUBCASE("empty selection is flagged, not fabricated") {
        auto report = unforeseen_report(std::vector<RunConfig>{}, scores, unforeseen);
        CHECK(report.metrics[0].after.count == 0);
        CHECK(report.metrics[0].after.range == 0.0);
        CHECK(render_report_text(report).find("empty (count 0)") != std::string::npos);
        CHECK(render_report_csv(report).find(",,,,0") != std::string::npos);
    }
    SUBCASE("selected run without a score is an error") {
        std::vector<RunConfig> ghost{cfg(77)};
        CHECK_THROWS_AS(unforeseen_report(ghost, scores, unforeseen), DataError);
    }
    SUBCASE("metric with no scores at all is an error") {
        std::vector<std::string> missing{"nope"};
        CHECK_THROWS_AS(
            unforeseen_report(std::vector<RunConfig>{cfg(0)}, scores, missing), DataError);
    }
}

TEST_CASE("after-selection range never exceeds the before range") {
    std::mt19937 rng(515);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = 3 + rng() % 10;
        std::vector<ScoreRecord> scores;
        for (std::uint64_t i = 0; i < n; ++i)
            scores.push_back({cfg(i), "u", std::uniform_real_distribution<>(40, 99)(rng)});
        std::vector<RunConfig> subset;
        for (std::uint64_t i = 0; i < n; ++i)
            if (rng() % 2) subset.push_back(cfg(i));
        std::vector<std::string> unforeseen{"u"};
        auto report = unforeseen_report(subset, scores, unforeseen);
        CHECK(report.metrics[0].after.range <= report.metrics[0].before.range);
        if (!subset.empty()) {
            CHECK(report.metrics[0].after.min >= report.metrics[0].before.min);
            CHECK(report.metrics[0].after.max <= report.metrics[0].before.max);
        }
    }
}

TEST_CASE("report renders label the after stage") {
    auto scores = metric_scores("u", {70, 80});
    std::vector<RunConfig> one{cfg(1)};
    std::vector<std::string> unforeseen{"u"};
    auto report = unforeseen_report(one, scores, unforeseen);
    report.after_label = "k=50";
    std::string text = render_report_text(report);
    CHECK(text.find("k=50:") != std::string::npos);
    CHECK(text.find("[u]") != std::string::npos);
    std::string csv = render_report_csv(report);
    CHECK(csv.find("metric,stage,min,max,range,count") == 0);
    CHECK(csv.find("u,before,70.00,80.00,10.00,2") != std::string::npos);
    CHECK(csv.find("u,k=50,80.00,80.00,0.00,1") != std::string::npos);
}
