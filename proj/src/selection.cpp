#include "msheet/selection.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "msheet/errors.hpp"
#include "msheet/sheets.hpp"

namespace msheet {

void validate(const SelectionSpec& spec) {
    if (spec.criteria.empty()) throw ValidationError("selection needs at least one criterion");
    std::set<std::string> unique(spec.criteria.begin(), spec.criteria.end());
    if (unique.size() != spec.criteria.size())
        throw ValidationError("selection criteria must be unique");
    if (!(spec.k > 0.0) || spec.k > 100.0)
        throw ValidationError("selection k must be in (0, 100]");
}

namespace {

// ceil(k/100 * n) with a guard against the quotient landing a hair above an
// integer it should equal.
std::size_t rank_count(double k, std::size_t n) {
    const double raw = k * static_cast<double>(n) / 100.0;
    auto count = static_cast<std::size_t>(std::ceil(raw - 1e-9));
    if (count < 1) count = 1;
    return std::min(count, n);
}

void check_single_metric(std::span<const ScoreRecord> scores) {
    if (scores.empty()) throw ValidationError("top_k needs at least one score");
    for (const auto& rec : scores)
        if (rec.metric_id != scores.front().metric_id)
            throw ValidationError("top_k expects scores for a single metric, got " +
                                  scores.front().metric_id + " and " + rec.metric_id);
}

ScoreStats stats_of(const std::vector<double>& values) {
    ScoreStats s;
    s.count = values.size();
    if (values.empty()) return s;
    auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    s.min = *lo;
    s.max = *hi;
    s.range = *hi - *lo;
    return s;
}

std::string stats_line(const ScoreStats& s) {
    if (s.count == 0) return "empty (count 0)";
    return "min " + format_round2(s.min) + "  max " + format_round2(s.max) + "  range " +
           format_round2(s.range) + "  count " + std::to_string(s.count);
}

}  // namespace

std::vector<RunConfig> top_k(std::span<const ScoreRecord> scores, double k) {
    if (!(k > 0.0) || k > 100.0) throw ValidationError("selection k must be in (0, 100]");
    check_single_metric(scores);

    std::vector<const ScoreRecord*> ranked;
    ranked.reserve(scores.size());
    std::set<std::string> seen;
    for (const auto& rec : scores) {
        if (!seen.insert(config_key(rec.run)).second)
            throw DataError("duplicate score for " + config_key(rec.run) + " on " +
                            rec.metric_id);
        ranked.push_back(&rec);
    }
    std::sort(ranked.begin(), ranked.end(), [](const ScoreRecord* a, const ScoreRecord* b) {
        if (a->score != b->score) return a->score > b->score;
        return a->run < b->run;
    });

    std::vector<RunConfig> out;
    out.reserve(rank_count(k, ranked.size()));
    for (std::size_t i = 0; i < rank_count(k, ranked.size()); ++i)
        out.push_back(ranked[i]->run);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<RunConfig> intersect_selection(const SelectionSpec& spec,
                                           std::span<const ScoreRecord> all_scores) {
    validate(spec);

    std::map<std::string, std::vector<ScoreRecord>> by_metric;
    for (const auto& rec : all_scores) by_metric[rec.metric_id].push_back(rec);

    std::vector<RunConfig> result;
    bool first = true;
    for (const auto& metric : spec.criteria) {
        auto it = by_metric.find(metric);
        if (it == by_metric.end())
            throw DataError("no scores for selection criterion " + metric);
        std::vector<RunConfig> kept = top_k(it->second, spec.k);
        if (first) {
            result = std::move(kept);
            first = false;
        } else {
            std::vector<RunConfig> merged;
            std::set_intersection(result.begin(), result.end(), kept.begin(), kept.end(),
                                  std::back_inserter(merged));
            result = std::move(merged);
        }
    }

    // All criteria must cover the same run population or ranks are not
    // comparable across metrics.
    std::set<std::string> universe;
    for (const auto& metric : spec.criteria)
        for (const auto& rec : by_metric[metric]) universe.insert(config_key(rec.run));
    for (const auto& metric : spec.criteria)
        if (by_metric[metric].size() != universe.size())
            throw DataError("criterion " + metric + " is missing scores for some runs");

    return result;
}

SelectionReport unforeseen_report(std::span<const RunConfig> selected,
                                  std::span<const ScoreRecord> all_scores,
                                  std::span<const std::string> unforeseen_metric_ids) {
    if (unforeseen_metric_ids.empty())
        throw ValidationError("unforeseen_report needs at least one metric");

    SelectionReport report;
    report.selected.assign(selected.begin(), selected.end());
    std::sort(report.selected.begin(), report.selected.end());
    report.selected.erase(std::unique(report.selected.begin(), report.selected.end()),
                          report.selected.end());

    std::set<std::string> selected_keys;
    for (const auto& run : report.selected) selected_keys.insert(config_key(run));

    for (const auto& metric : unforeseen_metric_ids) {
        std::vector<double> before;
        std::vector<double> after;
        std::set<std::string> covered;
        for (const auto& rec : all_scores) {
            if (rec.metric_id != metric) continue;
            if (!covered.insert(config_key(rec.run)).second)
                throw DataError("duplicate score for " + config_key(rec.run) + " on " + metric);
            before.push_back(rec.score);
            if (selected_keys.count(config_key(rec.run))) after.push_back(rec.score);
        }
        if (before.empty()) throw DataError("no scores for unforeseen metric " + metric);
        for (const auto& key : selected_keys)
            if (!covered.count(key))
                throw DataError("unforeseen metric " + metric + " has no score for " + key);
        report.metrics.push_back({metric, stats_of(before), stats_of(after)});
    }
    return report;
}

std::string render_report_text(const SelectionReport& report) {
    std::string out = "selected: " + std::to_string(report.selected.size()) + " run(s)\n";
    for (const auto& run : report.selected) out += "  " + config_key(run) + "\n";
    for (const auto& dist : report.metrics) {
        out += "[" + dist.metric_id + "]\n";
        out += "  before: " + stats_line(dist.before) + "\n";
        out += "  " + report.after_label + ": " + stats_line(dist.after) + "\n";
    }
    return out;
}

std::string render_report_csv(const SelectionReport& report) {
    std::string out = "metric,stage,min,max,range,count\n";
    auto row = [&](const std::string& metric, const std::string& stage, const ScoreStats& s) {
        if (s.count == 0) {
            out += metric + "," + stage + ",,,,0\n";
            return;
        }
        out += metric + "," + stage + "," + format_round2(s.min) + "," + format_round2(s.max) +
               "," + format_round2(s.range) + "," + std::to_string(s.count) + "\n";
    };
    for (const auto& dist : report.metrics) {
        row(dist.metric_id, "before", dist.before);
        row(dist.metric_id, report.after_label, dist.after);
    }
    return out;
}

}  // namespace msheet
