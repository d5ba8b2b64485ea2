#include <fstream>
#include <json.hpp>
#include <sstream>

#include "scefis/error.hpp"
#include "scefis/fuzzy.hpp"

namespace scefis {
namespace {

constexpr int kFormatVersion = 1;
using nlohmann::json;

json vec_to_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vec_from_json(const json& j) {
    const auto v = j.get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json mat_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(vec_to_json(m.row(i).transpose()));
    return rows;
}

Eigen::MatrixXd mat_from_json(const json& j, Eigen::Index cols) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(j.size()), cols);
    for (std::size_t i = 0; i < j.size(); ++i) {
        const auto row = vec_from_json(j[i]);
        require(row.size() == cols, "rule base file: matrix row width mismatch");
        m.row(static_cast<Eigen::Index>(i)) = row.transpose();
    }
    return m;
}

}  // namespace

std::string rule_base_to_json(const RuleBase& rb) {
    json j;
    j["format"] = "scefis-rulebase";
    j["version"] = kFormatVersion;
    j["input_dim"] = rb.input_dim;
    const auto& s = rb.settings;
    j["settings"] = {{"radius", s.clustering.radius},
                     {"squash", s.clustering.squash},
                     {"accept", s.clustering.accept},
                     {"reject", s.clustering.reject},
                     {"eps_x", s.eps_x},
                     {"eps_o", s.eps_o},
                     {"consequent_ridge", s.consequent_ridge}};
    j["normalization"] = {{"mean", s.normalization.mean}, {"sd", s.normalization.sd}};
    j["m"] = mat_to_json(rb.m);
    j["o"] = vec_to_json(rb.o);
    json rules = json::array();
    for (const auto& r : rb.rules)
        rules.push_back({{"center", vec_to_json(r.center)}, {"sigma", vec_to_json(r.sigma)},
                         {"consequent", vec_to_json(r.consequent)}});
    j["rules"] = rules;
    return j.dump(1);
}

RuleBase rule_base_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw IoError(std::string("rule base file: ") + e.what());
    }
    if (j.value("format", "") != "scefis-rulebase") throw IoError("rule base file: unknown format");
    if (j.value("version", 0) != kFormatVersion) throw IoError("rule base file: unsupported version");

    RuleBase rb;
    rb.input_dim = j.at("input_dim").get<int>();
    auto& s = rb.settings;
    const auto& js = j.at("settings");
    s.clustering.radius = js.at("radius");
    s.clustering.squash = js.at("squash");
    s.clustering.accept = js.at("accept");
    s.clustering.reject = js.at("reject");
    s.eps_x = js.at("eps_x");
    s.eps_o = js.at("eps_o");
    s.consequent_ridge = js.value("consequent_ridge", 0.0);
    s.normalization.mean = j.at("normalization").at("mean").get<std::vector<double>>();
    s.normalization.sd = j.at("normalization").at("sd").get<std::vector<double>>();
    rb.m = mat_from_json(j.at("m"), rb.input_dim);
    rb.o = vec_from_json(j.at("o"));
    require(rb.o.size() == rb.m.rows(), "rule base file: |O| != rows(M)");
    for (const auto& r : j.at("rules"))
        rb.rules.push_back({vec_from_json(r.at("center")), vec_from_json(r.at("sigma")), vec_from_json(r.at("consequent"))});
    return rb;
}

void save_rule_base(const RuleBase& rb, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw IoError("cannot write " + tmp);
        out << rule_base_to_json(rb);
    }
    std::filesystem::rename(tmp, path);
}

RuleBase load_rule_base(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return rule_base_from_json(ss.str());
}

}  // namespace scefis
