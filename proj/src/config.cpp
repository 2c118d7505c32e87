#include "hisp/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace hisp {

FilterSelection parse_filter_selection(const std::string& name) {
    if (name == "hisp") return FilterSelection::hisp;
    if (name == "phd") return FilterSelection::phd;
    if (name == "both") return FilterSelection::both;
    throw std::invalid_argument("filter must be one of hisp, phd, both (got '" + name + "')");
}

MergeScope parse_merge_scope(const std::string& name) {
    if (name == "tail") return MergeScope::same_tail;
    if (name == "any") return MergeScope::any;
    throw std::invalid_argument("merge scope must be tail or any (got '" + name + "')");
}

void RunConfig::validate() const {
    if (case_id && (*case_id < 1 || *case_id > 3)) throw std::invalid_argument("case must be 1, 2 or 3");
    if (runs < 1) throw std::invalid_argument("runs must be >= 1");
    if (!(ospa.cutoff > 0.0)) throw std::invalid_argument("ospa-c must be > 0");
    if (!(ospa.order >= 1.0)) throw std::invalid_argument("ospa-p must be >= 1");
    filter_config.validate();
}

std::string default_output_dir() {
    if (const char* env = std::getenv("HISP_OUT_DIR"); env && *env) return env;
    return "results";
}

namespace {

Scenario parse_impl(const std::string& json_text, RunConfig* run) {
    using nlohmann::json;
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("scenario file is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw std::invalid_argument("scenario file must hold a JSON object");

    static const std::set<std::string> known = {
        "case", "dt", "duration", "r_min", "r_max", "cell_dr", "cell_dtheta", "sigma_r", "sigma_theta",
        "p_d", "p_fa", "p_b", "sigma_v", "q_var", "truth_q_var", "p_s", "initial_states",
        "runs", "seed", "filter", "out", "ospa_c", "ospa_p", "tau", "dm", "merge_scope", "tau_c", "tau_uc", "gate"};
    for (const auto& [key, value] : j.items())
        if (!known.count(key)) throw std::invalid_argument("unknown scenario key '" + key + "'");

    auto number = [&](const char* key) -> std::optional<double> {
        if (!j.contains(key)) return std::nullopt;
        if (!j[key].is_number()) throw std::invalid_argument(std::string("key '") + key + "' must be a number");
        return j[key].get<double>();
    };

    Scenario s = Scenario::for_case(j.contains("case") ? j["case"].get<int>() : 1);
    if (auto v = number("dt")) s.motion.dt = *v;
    if (auto v = number("duration")) s.duration = *v;
    if (auto v = number("q_var")) s.motion.q_var = *v;
    if (auto v = number("truth_q_var")) s.truth_q_var = *v;
    if (auto v = number("p_s")) s.motion.p_survival = *v;
    if (j.contains("r_min") || j.contains("r_max") || j.contains("cell_dr") || j.contains("cell_dtheta")) {
        const auto& g = s.sensor.grid;
        s.sensor.grid = SensorGrid(number("r_min").value_or(g.r_min()), number("r_max").value_or(g.r_max()),
                                   number("cell_dr").value_or(g.cell_dr()),
                                   number("cell_dtheta").value_or(g.cell_dtheta()));
    }
    if (auto v = number("sigma_r")) s.sensor.observation.sigma_r = *v;
    if (auto v = number("sigma_theta")) s.sensor.observation.sigma_theta = *v;
    if (auto v = number("p_d")) s.sensor.observation.p_detect = *v;
    if (auto v = number("p_fa")) s.sensor.clutter.p_false_alarm = *v;
    if (auto v = number("p_b")) s.sensor.birth.p_birth = *v;
    if (auto v = number("sigma_v")) s.sensor.birth.sigma_v = *v;
    if (j.contains("initial_states")) {
        s.initial_states.clear();
        for (const auto& row : j["initial_states"]) {
            if (!row.is_array() || row.size() != 4)
                throw std::invalid_argument("initial_states entries must be [x, y, vx, vy]");
            s.initial_states.emplace_back(row[0].get<double>(), row[1].get<double>(), row[2].get<double>(),
                                          row[3].get<double>());
        }
    }
    s.validate();

    if (run) {
        if (j.contains("case")) run->case_id = j["case"].get<int>();
        if (j.contains("runs")) run->runs = j["runs"].get<int>();
        if (j.contains("seed")) run->seed = j["seed"].get<std::uint64_t>();
        if (j.contains("filter")) run->filter = parse_filter_selection(j["filter"].get<std::string>());
        if (j.contains("out")) run->out_dir = j["out"].get<std::string>();
        if (auto v = number("ospa_c")) run->ospa.cutoff = *v;
        if (auto v = number("ospa_p")) run->ospa.order = *v;
        if (auto v = number("tau")) run->filter_config.prune_threshold = *v;
        if (auto v = number("dm")) run->filter_config.merge_threshold = *v;
        if (j.contains("merge_scope"))
            run->filter_config.merge_scope = parse_merge_scope(j["merge_scope"].get<std::string>());
        if (auto v = number("tau_c")) run->filter_config.confirmation.confirm = *v;
        if (auto v = number("tau_uc")) run->filter_config.confirmation.keep = *v;
        if (auto v = number("gate")) run->filter_config.gate = *v;
    }
    return s;
}

}  // namespace

Scenario parse_scenario(const std::string& json_text, RunConfig* run) {
    try {
        return parse_impl(json_text, run);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("bad scenario value: ") + e.what());
    }
}

Scenario load_scenario(const std::string& path, RunConfig* run) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open scenario file '" + path + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_scenario(text.str(), run);
}

}  // namespace hisp
