#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "ensel/report.hpp"
#include "ensel/runner.hpp"

namespace ensel {

// Every output document embeds the resolved configuration and seed; floating
// point values are written with 9 significant digits.
nlohmann::json run_result_to_json(const RunResult& r);
RunResult run_result_from_json(const nlohmann::json& j);

nlohmann::json selection_config_to_json(const SelectionConfig& cfg);
SelectionConfig selection_config_from_json(const nlohmann::json& j, SelectionConfig base = {});

// Grid document: {"entries": [{"id", "method", "seed"?, "prune"?, "config"?}]}.
std::vector<GridEntry> parse_grid(const nlohmann::json& doc);

// Bench score document: per-dataset scores of every grid entry on both
// splits, plus the single-best baseline. Test scores may be missing when a
// task has no test labels.
struct BenchTable {
    std::vector<std::string> datasets;
    std::vector<std::string> configs;
    std::vector<std::string> config_methods;
    std::vector<std::vector<double>> validation;
    std::vector<std::vector<std::optional<double>>> test;
    std::vector<double> baseline_validation;
    std::vector<std::optional<double>> baseline_test;
};

nlohmann::json bench_table_to_json(const BenchTable& t);
BenchTable bench_table_from_json(const nlohmann::json& j);

// Extracts one split as a ScoreTable; errors when the split has missing cells.
ScoreTable to_score_table(const BenchTable& t, bool test_split);

}  // namespace ensel
