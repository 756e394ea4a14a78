#include "formstab/io.hpp"

#include "formstab/errors.hpp"

#include <cmath>
#include <fstream>

namespace formstab {

json matrix_to_json(const Eigen::MatrixXd& M) {
    json rows = json::array();
    for (int i = 0; i < M.rows(); ++i) {
        json row = json::array();
        for (int j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j, const std::string& name) {
    if (!j.is_array()) throw ConfigError("'" + name + "' must be an array of rows");
    const auto rows = static_cast<Eigen::Index>(j.size());
    if (rows == 0) return Eigen::MatrixXd(0, 0);
    if (!j[0].is_array()) throw ConfigError("'" + name + "' must be an array of rows");
    const auto cols = static_cast<Eigen::Index>(j[0].size());
    Eigen::MatrixXd M(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
            throw ConfigError("'" + name + "' row " + std::to_string(r) + " has the wrong length");
        for (Eigen::Index c = 0; c < cols; ++c) {
            const auto& v = row[static_cast<std::size_t>(c)];
            if (!v.is_number()) throw ConfigError("'" + name + "' has a non-numeric entry");
            M(r, c) = v.get<double>();
        }
    }
    return M;
}

json model_to_json(const LtiModel& m, const AircraftParams& p) {
    json j;
    j["A"] = matrix_to_json(m.A);
    j["B"] = matrix_to_json(m.B);
    j["params"] = {{"mass_kg", p.mass},
                   {"wingspan_m", p.wingspan},
                   {"mean_chord_m", p.mean_chord},
                   {"cruise_speed_m_s", p.cruise_speed},
                   {"air_density_kg_m3", p.air_density},
                   {"tail_span_m", p.tail_span},
                   {"vertical_tail_span_m", p.vertical_tail_span},
                   {"trimmed_thrust_N", p.trimmed_thrust},
                   {"zero_lift_drag", p.zero_lift_drag},
                   {"wake_circulation_m2_s", p.wake_circulation}};
    return j;
}

BuiltinModel model_from_json(const json& j) {
    if (!j.contains("A") || !j.contains("B") || !j.contains("params"))
        throw ConfigError("model document needs A, B and params");
    BuiltinModel out;
    out.model.A = matrix_from_json(j["A"], "A");
    out.model.B = matrix_from_json(j["B"], "B");
    if (out.model.A.rows() != 12 || out.model.A.cols() != 12 || out.model.B.rows() != 12 || out.model.B.cols() != 4)
        throw ConfigError("model document must hold a 12x12 A and a 12x4 B");
    out.model.Cp = position_selector();
    out.model.Cv = velocity_selector();
    out.model.Calpha = attitude_selector();
    const auto& p = j["params"];
    const auto get = [&](const char* key) {
        if (!p.contains(key) || !p[key].is_number()) throw ConfigError(std::string("model params lack '") + key + "'");
        return p[key].get<double>();
    };
    auto& a = out.params;
    a.mass = get("mass_kg");
    a.wingspan = get("wingspan_m");
    a.mean_chord = get("mean_chord_m");
    a.cruise_speed = get("cruise_speed_m_s");
    a.air_density = get("air_density_kg_m3");
    a.tail_span = get("tail_span_m");
    a.vertical_tail_span = get("vertical_tail_span_m");
    a.trimmed_thrust = get("trimmed_thrust_N");
    a.zero_lift_drag = get("zero_lift_drag");
    a.wake_circulation = get("wake_circulation_m2_s");
    a.validate();
    return out;
}

json controller_to_json(const Controller& c) {
    json j;
    if (const auto* sf = std::get_if<StateFeedbackGain>(&c)) {
        j["kind"] = sf->flavor == GainFlavor::integral ? "state_feedback_integral" : "state_feedback";
        j["K"] = matrix_to_json(sf->K);
        return j;
    }
    const auto& g = std::get<GainSet>(c);
    j["kind"] = "structured";
    j["K_alpha"] = matrix_to_json(g.K_alpha);
    j["K_v"] = matrix_to_json(g.K_v);
    j["K_p"] = matrix_to_json(g.K_p);
    j["K_d"] = matrix_to_json(g.K_d);
    j["K_xv"] = matrix_to_json(g.K_xv);
    return j;
}

Controller controller_from_json(const json& j) {
    if (!j.is_object() || !j.contains("kind")) throw ConfigError("controller document needs a 'kind'");
    const std::string kind = j["kind"].get<std::string>();
    const auto need = [&](const char* key) -> const json& {
        if (!j.contains(key)) throw ConfigError(std::string("controller document lacks '") + key + "'");
        return j[key];
    };
    if (kind == "state_feedback" || kind == "state_feedback_integral") {
        StateFeedbackGain g{matrix_from_json(need("K"), "K"),
                            kind == "state_feedback" ? GainFlavor::plain : GainFlavor::integral};
        const int cols = g.flavor == GainFlavor::plain ? 12 : 15;
        if (g.K.rows() != 4 || g.K.cols() != cols)
            throw ConfigError("K must be 4x" + std::to_string(cols) + " for kind " + kind);
        return g;
    }
    if (kind == "structured") {
        GainSet g;
        g.K_alpha = matrix_from_json(need("K_alpha"), "K_alpha");
        g.K_v = matrix_from_json(need("K_v"), "K_v");
        g.K_p = matrix_from_json(need("K_p"), "K_p");
        g.K_d = matrix_from_json(need("K_d"), "K_d");
        g.K_xv = matrix_from_json(need("K_xv"), "K_xv");
        g.validate();
        return g;
    }
    throw ConfigError("unknown controller kind '" + kind + "'");
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("'" + path + "': " + e.what());
    }
}

Controller load_controller(const std::string& spec) {
    if (spec == "lqr") return preset_lqr();
    if (spec == "lqr-int") return preset_lqr_integral();
    if (spec == "structured") return preset_structured();
    if (spec.rfind("file:", 0) == 0) return controller_from_json(read_json_file(spec.substr(5)));
    throw ConfigError("unknown controller '" + spec + "' (expected lqr, lqr-int, structured or file:<path>)");
}

BuiltinModel load_model(const std::string& spec) {
    if (spec == "builtin" || spec.empty()) return builtin_a320();
    if (spec.rfind("file:", 0) == 0) return model_from_json(read_json_file(spec.substr(5)));
    throw ConfigError("unknown model '" + spec + "' (expected builtin or file:<path>)");
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

} // namespace formstab
