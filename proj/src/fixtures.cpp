#include "msheet/fixtures.hpp"

#include <map>
#include <utility>

#include "msheet/errors.hpp"

namespace msheet {

namespace {

struct AxisTable {
    std::string axis;
    std::vector<std::string> choices;        // default first
    std::vector<std::vector<double>> cells;  // seeds x choices
    std::vector<double> row_deltas;
    std::vector<double> col_deltas;
};

struct FixtureDef {
    std::string name;
    std::string metric_id;
    std::string dataset;
    double delta_max_all;
    HeatmapConfig palette;
    std::vector<AxisTable> tables;
};

RunConfig reference_default() {
    RunConfig cfg;
    cfg.learning_rate = 0.1;
    cfg.batch_size = 128;
    cfg.augmentation = "Rand";
    cfg.optimizer = Optimizer::SGD;
    cfg.architecture = "R18";
    cfg.seed = 0;
    return cfg;
}

HeatmapConfig palette(double lo, double hi, double cap, Rgb color) {
    HeatmapConfig p;
    p.raw_low = lo;
    p.raw_high = hi;
    p.delta_cap = cap;
    p.raw_color = color;
    return p;
}

constexpr Rgb kAccuracyColor{78, 123, 38};
constexpr Rgb kFairnessColor{66, 106, 127};
constexpr Rgb kRobustnessColor{180, 38, 36};
constexpr Rgb kPrivacyColor{0, 120, 120};
constexpr Rgb kSecurityColor{199, 21, 133};

FixtureDef utkface_accuracy() {
    return {
        "utkface-accuracy",
        "accuracy",
        "UTKFace",
        1.12,
        palette(92, 94, 2, kAccuracyColor),
        {
            {kAxisLearningRate,
             {"0.1", "0.05", "0.01"},
             {{92.85, 92.85, 92.37},
              {92.89, 92.64, 92.60},
              {92.47, 92.51, 92.43},
              {93.17, 92.91, 92.64},
              {92.60, 92.98, 92.66}},
             {0.49, 0.30, 0.08, 0.53, 0.38},
             {0.70, 0.46, 0.30}},
            {kAxisBatchSize,
             {"128", "256", "640"},
             {{92.85, 92.81, 92.18},
              {92.89, 92.98, 92.62},
              {92.47, 92.66, 92.60},
              {93.17, 93.08, 92.68},
              {92.60, 92.32, 92.07}},
             {0.68, 0.36, 0.19, 0.49, 0.53},
             {0.70, 0.76, 0.61}},
            {kAxisAugmentation,
             {"Rand", "Trivial"},
             {{92.85, 92.51},
              {92.89, 92.89},
              {92.47, 92.87},
              {93.17, 92.79},
              {92.60, 92.87}},
             {0.34, 0.00, 0.40, 0.38, 0.27},
             {0.70, 0.38}},
            {kAxisOptimizer,
             {"SGD", "Adam"},
             {{92.85, 92.60},
              {92.89, 92.55},
              {92.47, 92.68},
              {93.17, 92.87},
              {92.60, 92.45}},
             {0.25, 0.34, 0.21, 0.30, 0.15},
             {0.70, 0.42}},
            {kAxisArchitecture,
             {"R18", "R50", "WR50"},
             {{92.85, 92.22, 92.13},
              {92.89, 92.49, 92.05},
              {92.47, 92.24, 92.45},
              {93.17, 92.05, 92.20},
              {92.60, 92.30, 92.18}},
             {0.72, 0.84, 0.23, 1.12, 0.42},
             {0.70, 0.44, 0.40}},
        },
    };
}

FixtureDef utkface_fairness() {
    return {
        "utkface-fairness",
        "group-asian",
        "UTKFace",
        3.24,
        palette(87, 91, 4, kFairnessColor),
        {
            {kAxisLearningRate,
             {"0.1", "0.05", "0.01"},
             {{89.56, 88.15, 88.15},
              {89.00, 88.58, 89.56},
              {87.45, 88.43, 88.15},
              {90.41, 89.56, 89.00},
              {89.00, 89.42, 89.28}},
             {1.41, 0.99, 0.99, 1.41, 0.42},
             {2.96, 1.41, 1.41}},
            {kAxisBatchSize,
             {"128", "256", "640"},
             {{89.56, 87.31, 87.45},
              {89.00, 90.13, 88.43},
              {87.45, 89.42, 88.43},
              {90.41, 89.70, 87.87},
              {89.00, 88.01, 88.58}},
             {2.26, 1.69, 1.98, 2.54, 0.99},
             {2.96, 2.82, 1.13}},
            {kAxisAugmentation,
             {"Rand", "Trivial"},
             {{89.56, 89.00},
              {89.00, 89.28},
              {87.45, 89.14},
              {90.41, 90.55},
              {89.00, 89.14}},
             {0.56, 0.28, 1.69, 0.14, 0.14},
             {2.96, 1.55}},
            {kAxisOptimizer,
             {"SGD", "Adam"},
             {{89.56, 88.86},
              {89.00, 88.01},
              {87.45, 88.29},
              {90.41, 89.70},
              {89.00, 87.73}},
             {0.71, 0.99, 0.85, 0.71, 1.27},
             {2.96, 1.98}},
            {kAxisArchitecture,
             {"R18", "R50", "WR50"},
             {{89.56, 87.59, 88.01},
              {89.00, 88.72, 89.00},
              {87.45, 89.56, 89.00},
              {90.41, 87.45, 88.15},
              {89.00, 87.73, 87.45}},
             {1.98, 0.28, 2.12, 2.96, 1.55},
             {2.96, 2.12, 1.55}},
        },
    };
}

FixtureDef utkface_robustness() {
    return {
        "utkface-robustness",
        "pgd-d0.005",
        "UTKFace",
        3.51,
        palette(79, 83, 4, kRobustnessColor),
        {
            {kAxisLearningRate,
             {"0.1", "0.05", "0.01"},
             {{81.99, 81.51, 80.10},
              {81.31, 81.34, 79.99},
              {81.86, 81.89, 80.05},
              {81.19, 81.81, 80.01},
              {82.24, 81.35, 79.91}},
             {1.89, 1.35, 1.84, 1.80, 2.33},
             {1.05, 0.55, 0.19}},
            {kAxisBatchSize,
             {"128", "256", "640"},
             {{81.99, 81.26, 80.07},
              {81.31, 80.59, 80.44},
              {81.86, 81.30, 79.83},
              {81.19, 80.61, 80.46},
              {82.24, 81.30, 80.17}},
             {1.92, 0.88, 2.03, 0.73, 2.06},
             {1.05, 0.70, 0.62}},
            {kAxisAugmentation,
             {"Rand", "Trivial"},
             {{81.99, 80.76},
              {81.31, 81.63},
              {81.86, 81.21},
              {81.19, 81.54},
              {82.24, 80.06}},
             {1.23, 0.32, 0.65, 0.36, 2.17},
             {1.05, 1.57}},
            {kAxisOptimizer,
             {"SGD", "Adam"},
             {{81.99, 81.39},
              {81.31, 81.05},
              {81.86, 80.58},
              {81.19, 80.71},
              {82.24, 81.63}},
             {0.60, 0.27, 1.28, 0.48, 0.60},
             {1.05, 1.05}},
            {kAxisArchitecture,
             {"R18", "R50", "WR50"},
             {{81.99, 79.10, 78.73},
              {81.31, 80.56, 79.61},
              {81.86, 80.26, 79.21},
              {81.19, 80.22, 80.35},
              {82.24, 80.19, 80.67}},
             {3.26, 1.71, 2.65, 0.97, 2.05},
             {1.05, 1.46, 1.95}},
        },
    };
}

FixtureDef utkface_privacy() {
    return {
        "utkface-privacy",
        "output-noise-l5",
        "UTKFace",
        5.30,
        palette(84, 89, 6, kPrivacyColor),
        {
            {kAxisLearningRate,
             {"0.1", "0.05", "0.01"},
             {{88.76, 87.43, 85.00},
              {88.53, 87.62, 84.92},
              {88.55, 87.56, 85.19},
              {88.42, 87.20, 85.66},
              {87.96, 87.39, 85.05}},
             {3.76, 3.61, 3.35, 2.76, 2.91},
             {0.80, 0.42, 0.74}},
            {kAxisBatchSize,
             {"128", "256", "640"},
             {{88.76, 86.52, 84.71},
              {88.53, 87.68, 83.46},
              {88.55, 87.62, 84.22},
              {88.42, 87.34, 85.55},
              {87.96, 86.92, 84.14}},
             {4.05, 5.06, 4.32, 2.87, 3.82},
             {0.80, 1.16, 2.09}},
            {kAxisAugmentation,
             {"Rand", "Trivial"},
             {{88.76, 87.47},
              {88.53, 87.43},
              {88.55, 87.68},
              {88.42, 87.39},
              {87.96, 86.71}},
             {1.29, 1.10, 0.87, 1.03, 1.25},
             {0.80, 0.97}},
            {kAxisOptimizer,
             {"SGD", "Adam"},
             {{88.76, 86.90},
              {88.53, 87.03},
              {88.55, 86.88},
              {88.42, 87.51},
              {87.96, 87.11}},
             {1.86, 1.50, 1.67, 0.91, 0.84},
             {0.80, 0.63}},
            {kAxisArchitecture,
             {"R18", "R50", "WR50"},
             {{88.76, 86.16, 86.23},
              {88.53, 87.24, 86.37},
              {88.55, 86.78, 86.50},
              {88.42, 86.75, 86.75},
              {87.96, 86.84, 87.01}},
             {2.60, 2.15, 2.05, 1.67, 1.12},
             {0.80, 1.08, 0.78}},
        },
    };
}

FixtureDef utkface_security() {
    return {
        "utkface-security",
        "ood-fairface",
        "UTKFace",
        5.53,
        palette(82, 88, 5, kSecurityColor),
        {
            {kAxisLearningRate,
             {"0.1", "0.05", "0.01"},
             {{84.79, 85.00, 83.27},
              {84.69, 84.48, 82.68},
              {85.13, 84.75, 82.85},
              {84.18, 84.81, 82.32},
              {84.14, 84.24, 82.37}},
             {1.73, 2.00, 2.28, 2.49, 1.88},
             {0.99, 0.76, 0.95}},
            {kAxisBatchSize,
             {"128", "256", "640"},
             {{84.79, 83.72, 83.72},
              {84.69, 85.66, 83.95},
              {85.13, 83.36, 83.51},
              {84.18, 82.98, 83.40},
              {84.14, 83.42, 83.72}},
             {1.08, 1.71, 1.77, 1.20, 0.72},
             {0.99, 2.68, 0.55}},
            {kAxisAugmentation,
             {"Rand", "Trivial"},
             {{84.79, 83.95},
              {84.69, 83.91},
              {85.13, 84.75},
              {84.18, 82.94},
              {84.14, 83.59}},
             {0.84, 0.78, 0.38, 1.25, 0.55},
             {0.99, 1.81}},
            {kAxisOptimizer,
             {"SGD", "Adam"},
             {{84.79, 83.63},
              {84.69, 83.49},
              {85.13, 83.70},
              {84.18, 83.51},
              {84.14, 83.89}},
             {1.16, 1.20, 1.43, 0.68, 0.25},
             {0.99, 0.40}},
            {kAxisArchitecture,
             {"R18", "R50", "WR50"},
             {{84.79, 84.77, 86.94},
              {84.69, 83.34, 84.71},
              {85.13, 83.38, 87.58},
              {84.18, 82.05, 84.48},
              {84.14, 84.05, 85.40}},
             {2.17, 1.37, 4.20, 2.43, 1.35},
             {0.99, 2.72, 3.10}},
        },
    };
}

FixtureDef cifar10s_accuracy() {
    return {
        "cifar10s-accuracy",
        "accuracy",
        "CIFAR10-Skewed",
        1.63,
        palette(90.5, 92.5, 2, kAccuracyColor),
        {
            {kAxisLearningRate,
             {"0.1", "0.05", "0.01"},
             {{92.04, 91.87, 91.65},
              {91.93, 91.87, 91.43},
              {91.90, 92.21, 91.78},
              {91.65, 91.89, 91.38},
              {91.98, 91.81, 91.68}},
             {0.39, 0.50, 0.43, 0.51, 0.30},
             {0.39, 0.40, 0.40}},
            {kAxisBatchSize,
             {"128", "256", "640"},
             {{92.04, 91.78, 91.29},
              {91.93, 91.94, 91.26},
              {91.90, 91.68, 91.00},
              {91.65, 91.53, 91.30},
              {91.98, 92.11, 91.13}},
             {0.75, 0.68, 0.90, 0.35, 0.98},
             {0.39, 0.58, 0.30}},
            {kAxisAugmentation,
             {"Rand", "Trivial"},
             {{92.04, 90.80},
              {91.93, 91.08},
              {91.90, 90.58},
              {91.65, 90.80},
              {91.98, 90.96}},
             {1.24, 0.85, 1.32, 0.85, 1.02},
             {0.39, 0.50}},
            {kAxisOptimizer,
             {"SGD", "Adam"},
             {{92.04, 91.94},
              {91.93, 91.49},
              {91.90, 91.63},
              {91.65, 91.85},
              {91.98, 92.01}},
             {0.10, 0.44, 0.27, 0.20, 0.03},
             {0.39, 0.52}},
        },
    };
}

FixtureDef cifar10s_fairness() {
    return {
        "cifar10s-fairness",
        "group-gs-minority",
        "CIFAR10-Skewed",
        11.16,
        palette(51, 63, 8, kFairnessColor),
        {
            {kAxisLearningRate,
             {"0.1", "0.05", "0.01"},
             {{62.81, 59.50, 57.03},
              {54.96, 54.13, 52.89},
              {58.27, 58.68, 54.96},
              {59.09, 57.85, 55.37},
              {60.33, 57.03, 57.85}},
             {5.79, 2.07, 3.72, 3.72, 3.31},
             {7.85, 5.37, 4.96}},
            {kAxisBatchSize,
             {"128", "256", "640"},
             {{62.81, 58.68, 61.57},
              {54.96, 55.79, 54.96},
              {58.27, 61.98, 54.55},
              {59.09, 55.37, 57.44},
              {60.33, 59.09, 54.13}},
             {4.13, 0.83, 7.44, 3.72, 6.20},
             {7.85, 6.61, 7.44}},
            {kAxisAugmentation,
             {"Rand", "Trivial"},
             {{62.81, 56.20},
              {54.96, 57.85},
              {58.27, 51.65},
              {59.09, 54.96},
              {60.33, 58.27}},
             {6.61, 2.89, 6.61, 4.13, 2.07},
             {7.85, 6.61}},
            {kAxisOptimizer,
             {"SGD", "Adam"},
             {{62.81, 57.44},
              {54.96, 53.72},
              {58.27, 60.74},
              {59.09, 59.50},
              {60.33, 58.68}},
             {5.37, 1.24, 2.48, 0.41, 1.65},
             {7.85, 7.03}},
        },
    };
}

FixtureDef cifar10s_robustness() {
    return {
        "cifar10s-robustness",
        "pgd-d0.005",
        "CIFAR10-Skewed",
        4.01,
        palette(75, 79, 4, kRobustnessColor),
        {
            {kAxisLearningRate,
             {"0.1", "0.05", "0.01"},
             {{78.79, 78.32, 78.00},
              {77.63, 76.53, 75.76},
              {78.98, 78.01, 77.53},
              {78.30, 77.37, 77.26},
              {78.17, 77.28, 76.91}},
             {0.79, 1.87, 1.45, 1.04, 1.26},
             {1.35, 1.79, 2.24}},
            {kAxisBatchSize,
             {"128", "256", "640"},
             {{78.79, 78.39, 76.96},
              {77.63, 76.48, 75.50},
              {78.98, 78.00, 76.46},
              {78.30, 77.56, 76.36},
              {78.17, 77.41, 75.55}},
             {1.83, 2.13, 2.52, 1.94, 2.62},
             {1.35, 1.91, 1.46}},
            {kAxisAugmentation,
             {"Rand", "Trivial"},
             {{78.79, 75.78},
              {77.63, 76.71},
              {78.98, 74.97},
              {78.30, 76.06},
              {78.17, 76.97}},
             {3.01, 0.92, 4.01, 2.24, 1.20},
             {1.35, 2.00}},
            {kAxisOptimizer,
             {"SGD", "Adam"},
             {{78.79, 77.20},
              {77.63, 75.54},
              {78.98, 77.43},
              {78.30, 78.70},
              {78.17, 77.83}},
             {1.59, 2.09, 1.55, 0.40, 0.34},
             {1.35, 3.16}},
        },
    };
}

FixtureDef cifar10s_privacy() {
    return {
        "cifar10s-privacy",
        "output-noise-l5",
        "CIFAR10-Skewed",
        10.28,
        palette(67, 77, 10, kPrivacyColor),
        {
            {kAxisLearningRate,
             {"0.1", "0.05", "0.01"},
             {{76.57, 73.13, 68.47},
              {76.47, 74.36, 68.83},
              {76.06, 72.01, 68.20},
              {76.29, 73.70, 68.28},
              {76.88, 72.94, 68.41}},
             {8.10, 7.64, 7.86, 8.01, 8.47},
             {0.82, 2.35, 0.63}},
            {kAxisBatchSize,
             {"128", "256", "640"},
             {{76.57, 73.66, 67.71},
              {76.47, 73.86, 68.48},
              {76.06, 72.68, 66.60},
              {76.29, 72.63, 67.42},
              {76.88, 73.47, 67.07}},
             {8.86, 7.99, 9.46, 8.87, 9.81},
             {0.82, 1.23, 1.88}},
            {kAxisAugmentation,
             {"Rand", "Trivial"},
             {{76.57, 68.55},
              {76.47, 68.74},
              {76.06, 68.06},
              {76.29, 67.89},
              {76.88, 68.32}},
             {8.02, 7.73, 8.00, 8.40, 8.56},
             {0.82, 0.85}},
            {kAxisOptimizer,
             {"SGD", "Adam"},
             {{76.57, 69.50},
              {76.47, 68.22},
              {76.06, 67.56},
              {76.29, 69.33},
              {76.88, 69.23}},
             {7.07, 8.25, 8.50, 6.96, 7.65},
             {0.82, 1.94}},
        },
    };
}

FixtureDef cifar10s_security() {
    return {
        "cifar10s-security",
        "ood-gs",
        "CIFAR10-Skewed",
        4.51,
        palette(80, 86, 4, kSecurityColor),
        {
            {kAxisLearningRate,
             {"0.1", "0.05", "0.01"},
             {{84.10, 84.32, 84.62},
              {83.67, 84.06, 84.47},
              {84.11, 84.02, 83.87},
              {83.08, 83.78, 84.02},
              {83.98, 84.18, 85.36}},
             {0.52, 0.80, 0.24, 0.94, 1.38},
             {1.03, 0.54, 1.49}},
            {kAxisBatchSize,
             {"128", "256", "640"},
             {{84.10, 84.34, 84.51},
              {83.67, 84.40, 84.65},
              {84.11, 84.44, 84.59},
              {83.08, 84.57, 84.39},
              {83.98, 84.56, 85.33}},
             {0.41, 0.98, 0.48, 1.49, 1.35},
             {1.03, 0.23, 0.94}},
            {kAxisAugmentation,
             {"Rand", "Trivial"},
             {{84.10, 82.87},
              {83.67, 81.10},
              {84.11, 82.27},
              {83.08, 80.85},
              {83.98, 81.19}},
             {1.23, 2.57, 1.84, 2.23, 2.79},
             {1.03, 2.02}},
            {kAxisOptimizer,
             {"SGD", "Adam"},
             {{84.10, 83.06},
              {83.67, 81.87},
              {84.11, 84.44},
              {83.08, 82.97},
              {83.98, 83.46}},
             {1.04, 1.80, 0.33, 0.11, 0.52},
             {1.03, 2.57}},
        },
    };
}

std::vector<FixtureDef (*)()> fixture_builders() {
    return {
        utkface_accuracy,  utkface_fairness,  utkface_robustness,
        utkface_privacy,   utkface_security,  cifar10s_accuracy,
        cifar10s_fairness, cifar10s_robustness, cifar10s_privacy,
        cifar10s_security,
    };
}

Fixture assemble(const FixtureDef& def) {
    Fixture fx;
    fx.name = def.name;
    fx.metric_id = def.metric_id;
    fx.dataset = def.dataset;
    fx.printed_delta_max_all = def.delta_max_all;
    fx.palette = def.palette;

    fx.grid.default_config = reference_default();
    fx.grid.seeds = {1, 2, 3, 4, 5};
    for (const auto& table : def.tables)
        fx.grid.axes.push_back(GridAxis{table.axis, table.choices});
    validate(fx.grid);

    // Shared-default cells appear once per table; the map dedups them and
    // rejects any transcription drift between tables.
    std::map<std::string, ScoreRecord> by_key;
    for (const auto& table : def.tables) {
        if (table.cells.size() != fx.grid.seeds.size() ||
            table.row_deltas.size() != fx.grid.seeds.size() ||
            table.col_deltas.size() != table.choices.size())
            throw DataError("fixture " + def.name + ": axis " + table.axis +
                            " has inconsistent dimensions");
        fx.printed_row_deltas.push_back(table.row_deltas);
        fx.printed_col_deltas.push_back(table.col_deltas);
        for (std::size_t i = 0; i < fx.grid.seeds.size(); ++i) {
            if (table.cells[i].size() != table.choices.size())
                throw DataError("fixture " + def.name + ": axis " + table.axis +
                                " has a ragged cell row");
            for (std::size_t j = 0; j < table.choices.size(); ++j) {
                RunConfig run = fx.grid.default_config;
                run.seed = fx.grid.seeds[i];
                apply_axis_value(run, table.axis, table.choices[j]);
                ScoreRecord rec{run, def.metric_id, table.cells[i][j]};
                auto [it, inserted] = by_key.emplace(config_key(run), rec);
                if (!inserted && it->second.score != rec.score)
                    throw DataError("fixture " + def.name +
                                    ": conflicting scores for " + config_key(run));
            }
        }
    }
    fx.scores.reserve(by_key.size());
    for (auto& [key, rec] : by_key) fx.scores.push_back(std::move(rec));
    return fx;
}

}  // namespace

std::vector<std::string> fixture_names() {
    std::vector<std::string> names;
    for (auto builder : fixture_builders()) names.push_back(builder().name);
    return names;
}

Fixture load_fixture(const std::string& name) {
    for (auto builder : fixture_builders()) {
        FixtureDef def = builder();
        if (def.name == name) return assemble(def);
    }
    throw ValidationError("unknown fixture: " + name);
}

}  // namespace msheet
