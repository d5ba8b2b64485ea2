#include <algorithm>
#include <fstream>
#include <sstream>

#include "scefis/error.hpp"
#include "scefis/pipeline.hpp"

namespace scefis {
namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used == v.size()) return d;
    } catch (const std::exception&) {
    }
    throw ContractViolation("config: '" + key + "' expects a number, got '" + v + "'");
}

int to_int(const std::string& key, const std::string& v) {
    const double d = to_double(key, v);
    require(d == static_cast<int>(d), "config: '" + key + "' expects an integer");
    return static_cast<int>(d);
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ContractViolation("config: '" + key + "' expects true/false");
}

std::optional<double> auto_or_double(const std::string& key, const std::string& v) {
    if (v == "auto") return std::nullopt;
    return to_double(key, v);
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

PipelineConfig PipelineConfig::parse(const std::string& text) {
    PipelineConfig cfg;
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ContractViolation("config line " + std::to_string(lineno) + ": expected key = value");
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }

    // The segmenter decides grid and default before any override applies.
    if (auto it = kv.find("segmenter"); it != kv.end()) {
        cfg.segmenter = SegmenterSpec::defaults(segmenter_kind_from_string(it->second));
        kv.erase(it);
    }
    for (const auto& [key, v] : kv) {
        if (key == "grid") {
            std::vector<double> grid;
            std::istringstream gs(v);
            std::string tok;
            while (std::getline(gs, tok, ',')) grid.push_back(to_double(key, trim(tok)));
            std::sort(grid.begin(), grid.end());
            cfg.segmenter.grid = grid;
        } else if (key == "default") {
            cfg.segmenter.default_value = to_double(key, v);
        } else if (key == "polarity") {
            if (v == "dark")
                cfg.segmenter.polarity = Polarity::Dark;
            else if (v == "bright")
                cfg.segmenter.polarity = Polarity::Bright;
            else
                throw ContractViolation("config: polarity must be dark or bright");
        } else if (key == "keep_all_components") {
            cfg.segmenter.keep_all_components = to_bool(key, v);
        } else if (key == "eps_x") {
            cfg.eps_x = auto_or_double(key, v);
        } else if (key == "eps_o") {
            cfg.eps_o = auto_or_double(key, v);
        } else if (key == "knn") {
            cfg.selectors.knn = to_int(key, v);
        } else if (key == "clusters") {
            cfg.selectors.clusters = to_int(key, v);
        } else if (key == "bandwidth") {
            cfg.selectors.bandwidth = auto_or_double(key, v).value_or(0.0);
        } else if (key == "mcfs_ridge") {
            cfg.selectors.ridge = to_double(key, v);
        } else if (key == "cluster_radius") {
            cfg.clustering.radius = to_double(key, v);
        } else if (key == "cluster_squash") {
            cfg.clustering.squash = to_double(key, v);
        } else if (key == "cluster_accept") {
            cfg.clustering.accept = to_double(key, v);
        } else if (key == "cluster_reject") {
            cfg.clustering.reject = to_double(key, v);
        } else if (key == "consequent_ridge") {
            cfg.consequent_ridge = to_double(key, v);
        } else if (key == "seed_order") {
            if (v == "response")
                cfg.seed_order = SeedOrder::Response;
            else if (v == "descriptor")
                cfg.seed_order = SeedOrder::DescriptorNorm;
            else
                throw ContractViolation("config: seed_order must be response or descriptor");
        } else if (key == "normalization") {
            if (v != "train" && v != "all") throw ContractViolation("config: normalization must be train or all");
            cfg.normalize_on_all_images = v == "all";
        } else if (key == "train_count") {
            cfg.train_count = v == "auto" ? std::nullopt : std::optional<int>(to_int(key, v));
        } else if (key == "runs") {
            cfg.runs = to_int(key, v);
        } else if (key == "seed") {
            cfg.seed = static_cast<std::uint64_t>(std::stoull(v));
        } else if (key == "feedback_timeout_ms") {
            cfg.feedback_timeout_ms = to_int(key, v);
        } else {
            throw ContractViolation("config: unknown key '" + key + "'");
        }
    }
    cfg.segmenter.validate();
    require(cfg.runs >= 1, "config: runs must be >= 1");
    require(cfg.consequent_ridge >= 0.0, "config: consequent_ridge must be >= 0");
    return cfg;
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

std::string PipelineConfig::to_text() const {
    std::ostringstream os;
    os << "segmenter = " << to_string(segmenter.kind) << "\n";
    os << "grid = ";
    for (std::size_t i = 0; i < segmenter.grid.size(); ++i) os << (i ? "," : "") << fmt(segmenter.grid[i]);
    os << "\n";
    os << "default = " << fmt(segmenter.default_value) << "\n";
    os << "polarity = " << (segmenter.polarity == Polarity::Dark ? "dark" : "bright") << "\n";
    os << "keep_all_components = " << (segmenter.keep_all_components ? "true" : "false") << "\n";
    os << "eps_x = " << (eps_x ? fmt(*eps_x) : "auto") << "\n";
    os << "eps_o = " << (eps_o ? fmt(*eps_o) : "auto") << "\n";
    os << "knn = " << selectors.knn << "\n";
    os << "clusters = " << selectors.clusters << "\n";
    os << "bandwidth = " << (selectors.bandwidth > 0 ? fmt(selectors.bandwidth) : "auto") << "\n";
    os << "mcfs_ridge = " << fmt(selectors.ridge) << "\n";
    os << "cluster_radius = " << fmt(clustering.radius) << "\n";
    os << "cluster_squash = " << fmt(clustering.squash) << "\n";
    os << "cluster_accept = " << fmt(clustering.accept) << "\n";
    os << "cluster_reject = " << fmt(clustering.reject) << "\n";
    os << "consequent_ridge = " << fmt(consequent_ridge) << "\n";
    os << "seed_order = " << (seed_order == SeedOrder::Response ? "response" : "descriptor") << "\n";
    os << "normalization = " << (normalize_on_all_images ? "all" : "train") << "\n";
    os << "train_count = " << (train_count ? std::to_string(*train_count) : "auto") << "\n";
    os << "runs = " << runs << "\n";
    os << "seed = " << seed << "\n";
    os << "feedback_timeout_ms = " << feedback_timeout_ms << "\n";
    return os.str();
}

}  // namespace scefis
