// Acceptance gate: one [PASS]/[FAIL] line per criterion, exit 1 on any FAIL.
// Tolerances are pinned here and nowhere else.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "msheet/attacks.hpp"
#include "msheet/errors.hpp"
#include "msheet/fixtures.hpp"
#include "msheet/metrics.hpp"
#include "msheet/pipeline.hpp"
#include "msheet/rng.hpp"
#include "msheet/selection.hpp"
#include "msheet/sheets.hpp"
#include "msheet/toymodel.hpp"

using namespace msheet;
namespace fs = std::filesystem;

namespace {

constexpr double kFixtureGlobalTol = 0.01;  // printed delta_max_all
constexpr double kFixtureCellTol = 0.02;    // printed row/col deltas
constexpr double kFixtureSeconds = 1.0;
constexpr int kPipelineEpochs = 18;
constexpr double kPipelineSeconds = 300.0;
constexpr double kGradRelTol = 1e-4;
// Central differences at h=1e-5 carry ~eps*loss/h = 1e-11 roundoff; the floor
// keeps that from failing near-zero components while still catching any real
// backprop error, which shows up at the component's own magnitude.
constexpr double kGradAbsFloor = 1e-10;
constexpr int kGradNets = 24;
constexpr double kMcSigmas = 3.0;

int criteria_failed = 0;
bool current_ok = true;

bool check(bool cond, const char* expr, const char* file, int line) {
    if (!cond) {
        std::printf("       %s:%d: %s\n", file, line, expr);
        current_ok = false;
    }
    return cond;
}
#define ACCEPT(cond) check((cond), #cond, __FILE__, __LINE__)

template <typename Fn>
void criterion(int number, const char* label, Fn&& body) {
    current_ok = true;
    try {
        body();
    } catch (const std::exception& e) {
        std::printf("       exception: %s\n", e.what());
        current_ok = false;
    }
    std::printf("[%s] criterion %d: %s\n", current_ok ? "PASS" : "FAIL", number, label);
    std::fflush(stdout);
    if (!current_ok) ++criteria_failed;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

int worker_count() {
    unsigned hw = std::thread::hardware_concurrency();
    return static_cast<int>(std::clamp(hw, 1u, 4u));
}

void for_each_index(std::size_t count, const std::function<void(std::size_t)>& body) {
    const int jobs = worker_count();
    if (jobs <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < jobs; ++w)
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                body(i);
            }
        });
    for (auto& t : pool) t.join();
}

PipelineConfig acceptance_config(const fs::path& out) {
    PipelineConfig config =
        load_pipeline_config(fs::path(MSHEET_TEST_DIR).parent_path() / "configs" / "default.json");
    config.output_dir = out;
    config.epochs = kPipelineEpochs;
    return config;
}

fs::path fresh_dir(const std::string& tag) {
    fs::path dir = fs::temp_directory_path() / ("msheet-acceptance-" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void run_full_pipeline(const PipelineConfig& config) {
    run_train_grid(config, worker_count());
    run_eval(config, worker_count());
    run_sheet(config, {}, {RenderFormat::Text, RenderFormat::Csv, RenderFormat::Html});
    run_select(config);
}

// Central finite differences on every parameter of a random network.
bool gradients_match(std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    const std::vector<std::string> archs{"linear", "mlp-small", "mlp-wide", "mlp-deep"};
    const std::string arch = archs[gen() % archs.size()];
    const std::size_t input_dim = 1 + gen() % 4;
    const std::size_t num_classes = 2 + gen() % 3;
    const std::size_t batch = 1 + gen() % 5;

    MLPParams params = init_params(arch, input_dim, num_classes, gen());
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Matrix inputs(batch, input_dim);
    std::vector<int> labels(batch);
    for (std::size_t r = 0; r < batch; ++r) {
        for (std::size_t c = 0; c < input_dim; ++c) inputs.at(r, c) = unit(gen);
        labels[r] = static_cast<int>(gen() % num_classes);
    }

    auto [loss, grads] = loss_and_grads(params, inputs, labels);
    const double h = 1e-5;
    auto check_one = [&](double& slot, double analytic) {
        const double saved = slot;
        slot = saved + h;
        const double up = loss_and_grads(params, inputs, labels).first;
        slot = saved - h;
        const double down = loss_and_grads(params, inputs, labels).first;
        slot = saved;
        const double fd = (up - down) / (2.0 * h);
        const double tol = kGradRelTol * std::max(std::abs(fd), std::abs(analytic));
        return std::abs(fd - analytic) <= tol + kGradAbsFloor;
    };
    for (std::size_t l = 0; l < params.weights.size(); ++l) {
        for (std::size_t i = 0; i < params.weights[l].data.size(); ++i)
            if (!check_one(params.weights[l].data[i], grads.weights[l].data[i])) return false;
        for (std::size_t i = 0; i < params.biases[l].size(); ++i)
            if (!check_one(params.biases[l][i], grads.biases[l][i])) return false;
    }
    return true;
}

}  // namespace

int main() {
    const fs::path out_a = fresh_dir("a");
    const fs::path out_b = fresh_dir("b");

    // 1. Ten bundled fixtures reproduce every printed aggregate.
    criterion(1, "fixtures reproduce printed deltas (global +-0.01, row/col +-0.02, <1s)", [&] {
        const auto start = std::chrono::steady_clock::now();
        for (const auto& name : fixture_names()) {
            Fixture fx = load_fixture(name);
            MultiplicitySheet sheet = build_sheet(fx.scores, fx.grid, fx.metric_id, fx.dataset);
            ACCEPT(std::abs(sheet.delta_max_all - fx.printed_delta_max_all) <=
                   kFixtureGlobalTol + 1e-12);
            for (std::size_t t = 0; t < sheet.tables.size(); ++t) {
                const SheetTable& table = sheet.tables[t];
                for (std::size_t i = 0; i < table.row_deltas.size(); ++i)
                    ACCEPT(std::abs(table.row_deltas[i] - fx.printed_row_deltas[t][i]) <=
                           kFixtureCellTol + 1e-12);
                for (std::size_t j = 0; j < table.col_deltas.size(); ++j)
                    ACCEPT(std::abs(table.col_deltas[j] - fx.printed_col_deltas[t][j]) <=
                           kFixtureCellTol + 1e-12);
            }
        }
        ACCEPT(seconds_since(start) < kFixtureSeconds);
    });

    // 2. Full 45-run toy pipeline at <=20 epochs inside five minutes.
    PipelineConfig config_a = acceptance_config(out_a);
    criterion(2, "45-run toy pipeline (<=20 epochs) end-to-end in <5min", [&] {
        const auto start = std::chrono::steady_clock::now();
        run_full_pipeline(config_a);
        const double elapsed = seconds_since(start);
        std::printf("       pipeline took %.1fs\n", elapsed);
        ACCEPT(elapsed < kPipelineSeconds);
        ACCEPT(expand_grid(config_a.grid).size() == 45);
        ACCEPT(read_score_file(scores_path(config_a)).size() == 45 * config_a.metrics.size());
        for (const auto& run : expand_grid(config_a.grid))
            ACCEPT(fs::exists(run_dir(config_a, run) / "manifest.json"));
    });

    // 3. Analytic gradients match central finite differences.
    criterion(3, "analytic vs finite-difference gradients (rel 1e-4, >=20 nets)", [&] {
        int passed = 0;
        for (int i = 0; i < kGradNets; ++i)
            if (ACCEPT(gradients_match(1000 + static_cast<std::uint64_t>(i)))) ++passed;
        ACCEPT(passed >= 20);
    });

    // 4. Exact intervention identities on a freshly trained model.
    criterion(4, "delta=0 / lambda=0 / all-records-group equal plain accuracy exactly", [&] {
        DatasetSpec spec;
        spec.num_classes = 2;
        spec.input_dim = 2;
        spec.samples_per_class = 120;
        spec.class_means = {{0.35, 0.35}, {0.65, 0.65}};
        spec.cluster_stddev = 0.12;
        spec.style_offset = {0.10, 0.10};
        spec.extra_attributes["cohort"] = CategoricalSpec{{{"all", 1.0}}};
        spec.seed = 21;
        LabeledDataset train_set = generate_skewed(spec, "train");
        DatasetSpec eval_spec = spec;
        eval_spec.samples_per_class = 90;
        eval_spec.seed = 22;
        LabeledDataset eval_set = generate_skewed(eval_spec);

        TrainSpec train_spec;
        train_spec.run.batch_size = 32;
        train_spec.run.seed = 5;
        train_spec.epochs = 8;
        train_spec.jitter_scales = {{"jitter-a", 0.02}};
        MLPParams params = train(train_spec, train_set).params;
        PredictionSet preds = predict(params, eval_set, train_spec.run);
        const double plain = plain_accuracy(preds);

        ACCEPT(pgd_accuracy(params, eval_set, pgd_spec(0.0, 9)) == plain);
        ACCEPT(output_perturbation_accuracy(
                   preds, NoiseSpec{0.0, 50, 7, NoiseTarget::OutputLogits}) == plain);
        ACCEPT(input_perturbation_accuracy(
                   params, eval_set, NoiseSpec{0.0, 50, 7, NoiseTarget::InputFeatures}) == plain);
        ACCEPT(group_accuracy(preds, {{"cohort", "all"}}) == plain);
    });

    // 5. Grid-mean accuracy is non-increasing in attack and noise strength.
    criterion(5, "grid-mean PGD and output-noise accuracies non-increasing", [&] {
        const std::vector<RunConfig> runs = expand_grid(config_a.grid);
        const auto eval_sets = build_eval_sets(config_a);
        const LabeledDataset& eval_set = eval_sets.at("in-dist");

        const std::vector<double> deltas{0.0, 1e-4, 5e-4, 1e-3, 5e-3, 1e-2};
        std::vector<std::vector<double>> pgd_scores(deltas.size(),
                                                    std::vector<double>(runs.size()));
        for_each_index(runs.size(), [&](std::size_t i) {
            MLPParams params = load_params(run_dir(config_a, runs[i]) / "params.txt");
            for (std::size_t d = 0; d < deltas.size(); ++d)
                pgd_scores[d][i] = pgd_accuracy(params, eval_set, pgd_spec(deltas[d], 17));
        });
        std::vector<double> pgd_means;
        for (const auto& column : pgd_scores) {
            double sum = 0;
            for (double v : column) sum += v;
            pgd_means.push_back(sum / static_cast<double>(column.size()));
        }
        std::printf("       pgd grid means:");
        for (double m : pgd_means) std::printf(" %.3f", m);
        std::printf("\n");
        for (std::size_t d = 1; d < pgd_means.size(); ++d)
            ACCEPT(pgd_means[d] <= pgd_means[d - 1]);

        const std::vector<double> lams{0, 1, 2, 3, 4, 5};
        std::vector<std::vector<double>> noise_scores(lams.size(),
                                                      std::vector<double>(runs.size()));
        for_each_index(runs.size(), [&](std::size_t i) {
            PredictionSet preds = read_prediction_file(
                run_dir(config_a, runs[i]) / "preds-in-dist.jsonl", runs[i], "in-dist");
            for (std::size_t d = 0; d < lams.size(); ++d)
                noise_scores[d][i] = output_perturbation_accuracy(
                    preds, NoiseSpec{lams[d], 100, 23, NoiseTarget::OutputLogits});
        });
        std::vector<double> noise_means;
        for (const auto& column : noise_scores) {
            double sum = 0;
            for (double v : column) sum += v;
            noise_means.push_back(sum / static_cast<double>(column.size()));
        }
        std::printf("       output-noise grid means:");
        for (double m : noise_means) std::printf(" %.3f", m);
        std::printf("\n");
        for (std::size_t d = 1; d < noise_means.size(); ++d)
            ACCEPT(noise_means[d] <= noise_means[d - 1]);
    });

    // 6. Selection correctness on synthetic tables and the trained grid.
    criterion(6, "top_k monotone; intersection matches brute force; subset bound at k=75,50", [&] {
        std::mt19937 gen(606);
        auto make_cfg = [](std::uint64_t seed) {
            RunConfig run;
            run.seed = seed;
            return run;
        };

        for (int trial = 0; trial < 20; ++trial) {
            const std::size_t n = 1 + gen() % 20;
            std::vector<ScoreRecord> scores;
            for (std::uint64_t i = 0; i < n; ++i)
                scores.push_back(
                    {make_cfg(i), "m", static_cast<double>(gen() % 400) / 4.0});
            const double k1 = std::uniform_real_distribution<>(1, 100)(gen);
            const double k2 = std::uniform_real_distribution<>(k1, 100)(gen);
            auto to_keys = [](const std::vector<RunConfig>& runs) {
                std::set<std::string> keys;
                for (const auto& run : runs) keys.insert(config_key(run));
                return keys;
            };
            auto small = to_keys(top_k(scores, k1));
            auto large = to_keys(top_k(scores, k2));
            ACCEPT(std::includes(large.begin(), large.end(), small.begin(), small.end()));
        }

        for (int trial = 0; trial < 40; ++trial) {
            const std::size_t n = 2 + gen() % 7;
            const std::size_t m = 1 + gen() % 3;
            std::vector<ScoreRecord> scores;
            SelectionSpec spec;
            for (std::size_t c = 0; c < m; ++c) {
                const std::string metric = "m" + std::to_string(c);
                spec.criteria.push_back(metric);
                for (std::uint64_t i = 0; i < n; ++i)
                    scores.push_back({make_cfg(i), metric,
                                      static_cast<double>(gen() % 5) * 10.0});
            }
            spec.k = std::uniform_real_distribution<>(5, 100)(gen);
            const std::size_t needed = static_cast<std::size_t>(
                std::ceil(spec.k * static_cast<double>(n) / 100.0 - 1e-9));

            std::set<std::string> brute;
            for (std::uint64_t i = 0; i < n; ++i) {
                bool keep = true;
                for (const auto& metric : spec.criteria) {
                    auto score_of = [&](std::uint64_t run_seed) {
                        for (const auto& rec : scores)
                            if (rec.metric_id == metric && rec.run.seed == run_seed)
                                return rec.score;
                        throw DataError("lookup");
                    };
                    std::size_t beaten = 0;
                    for (std::uint64_t j = 0; j < n; ++j) {
                        if (j == i) continue;
                        const double mine = score_of(i), theirs = score_of(j);
                        if (theirs > mine || (theirs == mine && make_cfg(j) < make_cfg(i)))
                            ++beaten;
                    }
                    if (beaten >= needed) {
                        keep = false;
                        break;
                    }
                }
                if (keep) brute.insert(config_key(make_cfg(i)));
            }
            std::set<std::string> got;
            for (const auto& run : intersect_selection(spec, scores))
                got.insert(config_key(run));
            ACCEPT(got == brute);
        }

        const std::vector<ScoreRecord> scores = read_score_file(scores_path(config_a));
        for (double k : {75.0, 50.0}) {
            SelectionSpec spec{config_a.criteria, k};
            auto selected = intersect_selection(spec, scores);
            auto report = unforeseen_report(selected, scores, config_a.unforeseen);
            for (const auto& dist : report.metrics) {
                ACCEPT(dist.after.count <= dist.before.count);
                if (dist.after.count > 0) ACCEPT(dist.after.range <= dist.before.range);
            }
        }
    });

    // 7. Byte-identical rerun of the entire pipeline.
    criterion(7, "two pipeline executions are byte-identical", [&] {
        PipelineConfig config_b = acceptance_config(out_b);
        run_full_pipeline(config_b);

        std::vector<fs::path> rel_a;
        for (const auto& entry : fs::recursive_directory_iterator(out_a))
            if (entry.is_regular_file()) rel_a.push_back(fs::relative(entry.path(), out_a));
        std::vector<fs::path> rel_b;
        for (const auto& entry : fs::recursive_directory_iterator(out_b))
            if (entry.is_regular_file()) rel_b.push_back(fs::relative(entry.path(), out_b));
        std::sort(rel_a.begin(), rel_a.end());
        std::sort(rel_b.begin(), rel_b.end());
        ACCEPT(rel_a == rel_b);
        ACCEPT(!rel_a.empty());
        for (const auto& rel : rel_a)
            if (!check(read_text(out_a / rel) == read_text(out_b / rel),
                       "files differ", __FILE__, __LINE__)) {
                std::printf("       differing file: %s\n", rel.string().c_str());
                break;
            }
    });

    // 8. Monte Carlo estimate calibrated against an independent oracle.
    criterion(8, "output noise at R=1e5 within 3 SE of a 1e6-draw oracle", [&] {
        const double margin = 0.8;
        const double lam = 0.7;
        PredictionSet preds;
        preds.records.push_back({"s0", {margin, 0.0}, 0, {}});
        const double estimate = output_perturbation_accuracy(
                                    preds, NoiseSpec{lam, 100000, 99, NoiseTarget::OutputLogits}) /
                                100.0;

        // Same flip event sampled with std:: machinery: correct unless the
        // label logit loses after both coordinates get Laplace(lam) noise.
        std::mt19937_64 gen(424242);
        std::exponential_distribution<double> expo(1.0 / lam);
        std::bernoulli_distribution coin(0.5);
        auto laplace = [&] { return (coin(gen) ? -1.0 : 1.0) * expo(gen); };
        const long oracle_draws = 1000000;
        long correct = 0;
        for (long i = 0; i < oracle_draws; ++i) {
            const double l0 = margin + laplace();
            const double l1 = 0.0 + laplace();
            if (l0 >= l1) ++correct;  // argmax ties resolve to the lower index
        }
        const double oracle = static_cast<double>(correct) / oracle_draws;

        // Closed form for the Laplace-difference tail as a sanity anchor.
        const double exact = 1.0 - (2.0 + margin / lam) * std::exp(-margin / lam) / 4.0;
        ACCEPT(std::abs(oracle - exact) < 0.002);

        const double p = oracle;
        const double se = std::sqrt(p * (1.0 - p) * (1.0 / 100000.0 + 1.0 / oracle_draws));
        std::printf("       estimate %.5f oracle %.5f exact %.5f tolerance %.5f\n", estimate,
                    oracle, exact, kMcSigmas * se);
        ACCEPT(std::abs(estimate - oracle) <= kMcSigmas * se);
    });

    std::printf("%d of 8 criteria passed\n", 8 - criteria_failed);
    return criteria_failed == 0 ? 0 : 1;
}
