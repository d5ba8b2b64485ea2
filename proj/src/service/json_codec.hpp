#pragma once

#include <json.hpp>

#include "scefis/pipeline.hpp"

namespace scefis::codec {

inline nlohmann::json entry_to_json(const EvolutionEntry& e) {
    return {{"image_id", e.image_id},           {"t_o", e.t_o},
            {"t_star", e.t_star},               {"score", e.score},
            {"t_b", e.t_b},                     {"best_score", e.best_score},
            {"appended_rows", e.appended_rows}, {"rule_count", e.rule_count},
            {"rows_m", e.rows_m},               {"skipped", e.skipped}};
}

inline EvolutionEntry entry_from_json(const nlohmann::json& j) {
    EvolutionEntry e;
    e.image_id = j.at("image_id").get<std::string>();
    e.t_o = j.at("t_o").get<std::vector<double>>();
    e.t_star = j.at("t_star").get<double>();
    e.score = j.at("score").get<double>();
    e.t_b = j.at("t_b").get<double>();
    e.best_score = j.at("best_score").get<double>();
    e.appended_rows = j.at("appended_rows").get<int>();
    e.rule_count = j.at("rule_count").get<std::size_t>();
    e.rows_m = j.at("rows_m").get<std::size_t>();
    e.skipped = j.at("skipped").get<bool>();
    return e;
}

}  // namespace scefis::codec
