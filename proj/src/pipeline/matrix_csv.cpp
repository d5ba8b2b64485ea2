#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "scefis/error.hpp"
#include "scefis/pipeline.hpp"

namespace scefis {
namespace fs = std::filesystem;

namespace {

std::string full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        if (!cell.empty() && cell.back() == '\r') cell.pop_back();
        out.push_back(cell);
    }
    return out;
}

}  // namespace

void write_f3_csv(const std::vector<ImageFeatureBlock>& blocks, const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "image_id,stat";
    for (const auto& c : feature_column_names()) out << "," << c;
    out << "\n";
    for (const auto& b : blocks) {
        require(b.rows.rows() == kNumStatRows, "write_f3_csv: block is not 8 rows");
        for (int r = 0; r < kNumStatRows; ++r) {
            out << b.image_id << "," << kStatRowNames[r];
            for (Eigen::Index j = 0; j < b.rows.cols(); ++j) out << "," << full(b.rows(r, j));
            out << "\n";
        }
    }
}

F3Csv read_f3_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw IoError(path.string() + ": empty file");
    const auto header = split_csv(line);
    if (header.size() < 3 || header[0] != "image_id" || header[1] != "stat")
        throw IoError(path.string() + ": header must start with image_id,stat");
    F3Csv m;
    m.column_names.assign(header.begin() + 2, header.end());
    std::vector<std::vector<double>> rows;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        const auto cells = split_csv(line);
        if (cells.size() != header.size())
            throw IoError(path.string() + ":" + std::to_string(lineno) + ": expected " + std::to_string(header.size()) +
                          " cells");
        m.image_ids.push_back(cells[0]);
        m.stats.push_back(cells[1]);
        std::vector<double> r;
        for (std::size_t k = 2; k < cells.size(); ++k) {
            try {
                r.push_back(std::stod(cells[k]));
            } catch (const std::exception&) {
                throw IoError(path.string() + ":" + std::to_string(lineno) + ": not a number: " + cells[k]);
            }
        }
        rows.push_back(std::move(r));
    }
    m.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(m.column_names.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return m;
}

void write_best_params_csv(const std::vector<BestParamRecord>& records, const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "image_id,param,score\n";
    for (const auto& r : records) out << r.image_id << "," << full(r.param) << "," << full(r.score) << "\n";
}

std::string self_config_to_json(const SelfConfig& sc) {
    nlohmann::json j;
    j["format"] = "scefis-selfconfig";
    j["version"] = 1;
    j["window_z"] = sc.window_z;
    j["n_total_features"] = sc.n_total_features;
    j["selected_columns"] = sc.selected_columns;
    std::vector<std::string> names;
    for (int c : sc.selected_columns) names.push_back(feature_column_names()[static_cast<std::size_t>(c)]);
    j["selected_names"] = names;
    j["normalization"] = {{"mean", sc.normalization.mean}, {"sd", sc.normalization.sd}};
    return j.dump(1);
}

SelfConfig self_config_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("self-config file: ") + e.what());
    }
    if (j.value("format", "") != "scefis-selfconfig") throw IoError("self-config file: unknown format");
    SelfConfig sc;
    sc.window_z = j.at("window_z").get<int>();
    sc.n_total_features = j.at("n_total_features").get<int>();
    sc.selected_columns = j.at("selected_columns").get<std::vector<int>>();
    sc.normalization.mean = j.at("normalization").at("mean").get<std::vector<double>>();
    sc.normalization.sd = j.at("normalization").at("sd").get<std::vector<double>>();
    sc.validate();
    return sc;
}

}  // namespace scefis
