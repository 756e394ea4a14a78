#pragma once

#include "formstab/control.hpp"
#include "formstab/linmodel.hpp"

#include <json.hpp>
#include <string>

namespace formstab {

using json = nlohmann::ordered_json;

json matrix_to_json(const Eigen::MatrixXd& M);
/// Row-major nested arrays; throws ConfigError on ragged or non-numeric input.
Eigen::MatrixXd matrix_from_json(const json& j, const std::string& name);

json model_to_json(const LtiModel& model, const AircraftParams& params);
BuiltinModel model_from_json(const json& j);

json controller_to_json(const Controller& c);
Controller controller_from_json(const json& j);

/// "lqr", "lqr-int", "structured" or "file:<path>" (JSON written by controller_to_json).
Controller load_controller(const std::string& spec);

/// "builtin" or "file:<path>" with a model JSON document.
BuiltinModel load_model(const std::string& spec);

json read_json_file(const std::string& path);

/// Non-finite values become null.
json number_or_null(double v);

} // namespace formstab
