#include "ensel/task.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace ensel {

std::string format_g9(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

double quantize9(double v) { return std::strtod(format_g9(v).c_str(), nullptr); }

namespace {

double parse_double(const std::string& text, const std::string& where) {
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (end == text.c_str() || *end != '\0') {
        throw Error(where + ": cannot parse number '" + text + "'");
    }
    return v;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

std::string expected_header(int n_classes) {
    std::string h;
    for (int c = 0; c < n_classes; ++c) {
        if (c > 0) h += ',';
        h += 'c' + std::to_string(c);
    }
    return h;
}

std::vector<int> load_labels(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw Error("cannot open " + file.string());
    std::vector<int> labels;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) {
            if (in.peek() == EOF) break;  // trailing newline
            throw Error(file.string() + ": empty line at row " + std::to_string(row));
        }
        char* end = nullptr;
        const long v = std::strtol(line.c_str(), &end, 10);
        if (end == line.c_str() || *end != '\0') {
            throw Error(file.string() + ": cannot parse label '" + line + "' at row " +
                        std::to_string(row));
        }
        labels.push_back(static_cast<int>(v));
    }
    if (labels.empty()) throw Error(file.string() + ": no labels");
    return labels;
}

Matrix load_predictions(const fs::path& file, int n_classes) {
    std::ifstream in(file);
    if (!in) throw Error("cannot open " + file.string());
    std::string line;
    if (!std::getline(in, line)) throw Error(file.string() + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != expected_header(n_classes)) {
        throw Error(file.string() + ": bad header '" + line + "', expected '" +
                    expected_header(n_classes) + "'");
    }
    std::vector<double> values;
    std::size_t rows = 0;
    std::size_t row_no = 1;
    while (std::getline(in, line)) {
        ++row_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) {
            if (in.peek() == EOF) break;
            throw Error(file.string() + ": empty line at row " + std::to_string(row_no));
        }
        const std::vector<std::string> fields = split_csv_line(line);
        if (static_cast<int>(fields.size()) != n_classes) {
            throw Error(file.string() + ": row " + std::to_string(row_no) + " has " +
                        std::to_string(fields.size()) + " fields, expected " +
                        std::to_string(n_classes));
        }
        for (const std::string& f : fields) {
            values.push_back(parse_double(f, file.string() + ": row " + std::to_string(row_no)));
        }
        ++rows;
    }
    if (rows == 0) throw Error(file.string() + ": no data rows");
    Matrix m(rows, n_classes);
    for (std::size_t r = 0; r < rows; ++r) {
        for (int c = 0; c < n_classes; ++c) {
            m(static_cast<Eigen::Index>(r), c) = values[r * n_classes + c];
        }
    }
    return m;
}

struct PoolMeta {
    std::vector<std::string> ids;
    std::vector<std::string> algorithms;
    std::vector<ConfigMap> configs;
    std::vector<double> val_scores;
};

PredictionSet load_split(const fs::path& dir, const PoolMeta& meta, int n_classes,
                         bool labels_required) {
    PredictionSet p;
    p.model_ids = meta.ids;
    p.algorithms = meta.algorithms;
    p.configs = meta.configs;
    p.val_scores = meta.val_scores;
    const fs::path labels_file = dir / "labels.csv";
    if (fs::exists(labels_file)) {
        p.labels = load_labels(labels_file);
    } else if (labels_required) {
        throw Error("missing " + labels_file.string());
    }
    for (const std::string& id : meta.ids) {
        p.probabilities.push_back(load_predictions(dir / ("pred_" + id + ".csv"), n_classes));
    }
    return PredictionSet::validated(std::move(p), dir.string());
}

void save_labels(const fs::path& file, const std::vector<int>& labels) {
    std::ofstream out(file);
    if (!out) throw Error("cannot write " + file.string());
    for (int y : labels) out << y << '\n';
}

void save_predictions(const fs::path& file, const Matrix& m) {
    std::ofstream out(file);
    if (!out) throw Error("cannot write " + file.string());
    out << expected_header(static_cast<int>(m.cols())) << '\n';
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            if (c > 0) out << ',';
            out << format_g9(m(r, c));
        }
        out << '\n';
    }
}

}  // namespace

Task load_task(const fs::path& dir) {
    const fs::path meta_file = dir / "task.json";
    std::ifstream in(meta_file);
    if (!in) throw Error("cannot open " + meta_file.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw Error(meta_file.string() + ": " + e.what());
    }

    Task task;
    try {
        task.name = doc.at("name").get<std::string>();
        task.n_classes = doc.at("n_classes").get<int>();
        task.metric = Metric::parse(doc.at("metric").get<std::string>());

        PoolMeta meta;
        for (const json& model : doc.at("models")) {
            meta.ids.push_back(model.at("id").get<std::string>());
            meta.algorithms.push_back(model.at("algorithm").get<std::string>());
            meta.val_scores.push_back(model.at("val_score").get<double>());
            ConfigMap config;
            for (const auto& [key, value] : model.at("config").items()) {
                if (value.is_number()) {
                    config[key] = value.get<double>();
                } else if (value.is_string()) {
                    config[key] = value.get<std::string>();
                } else {
                    throw Error(meta_file.string() + ": config value '" + key + "' of model '" +
                                meta.ids.back() + "' must be a number or a string");
                }
            }
            meta.configs.push_back(std::move(config));
        }
        if (task.n_classes < 2) throw Error(meta_file.string() + ": n_classes must be at least 2");
        task.validation = load_split(dir / "val", meta, task.n_classes, true);
        task.test = load_split(dir / "test", meta, task.n_classes, false);
    } catch (const json::exception& e) {
        throw Error(meta_file.string() + ": " + e.what());
    }

    if (task.validation.n_classes() != task.n_classes) {
        throw Error(meta_file.string() + ": prediction columns do not match n_classes");
    }
    return task;
}

void save_task(const Task& task, const fs::path& dir) {
    fs::create_directories(dir / "val");
    fs::create_directories(dir / "test");

    json models = json::array();
    for (std::size_t i = 0; i < task.validation.n_models(); ++i) {
        json config = json::object();
        for (const auto& [key, value] : task.validation.configs[i]) {
            if (std::holds_alternative<double>(value)) {
                config[key] = quantize9(std::get<double>(value));
            } else {
                config[key] = std::get<std::string>(value);
            }
        }
        models.push_back({{"id", task.validation.model_ids[i]},
                          {"algorithm", task.validation.algorithms[i]},
                          {"config", config},
                          {"val_score", quantize9(task.validation.val_scores[i])}});
    }
    const json doc = {{"name", task.name},
                      {"n_classes", task.n_classes},
                      {"metric", task.metric.name()},
                      {"models", models}};
    std::ofstream out(dir / "task.json");
    if (!out) throw Error("cannot write " + (dir / "task.json").string());
    out << doc.dump(2) << '\n';

    save_labels(dir / "val" / "labels.csv", task.validation.labels);
    if (task.test.has_labels()) save_labels(dir / "test" / "labels.csv", task.test.labels);
    for (std::size_t i = 0; i < task.validation.n_models(); ++i) {
        const std::string file = "pred_" + task.validation.model_ids[i] + ".csv";
        save_predictions(dir / "val" / file, task.validation.probabilities[i]);
        save_predictions(dir / "test" / file, task.test.probabilities[i]);
    }
}

Task prune_task(const Task& task, const PruneSpec& spec) {
    const std::vector<std::size_t> keep = prune_indices(task.validation, spec);
    Task out;
    out.name = task.name;
    out.n_classes = task.n_classes;
    out.metric = task.metric;
    out.validation = task.validation.subset(keep);
    out.test = task.test.subset(keep);
    return out;
}

}  // namespace ensel
