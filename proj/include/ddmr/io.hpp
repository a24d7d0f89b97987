#pragma once

#include <string>

#include <json.hpp>

#include "ddmr/linalg.hpp"
#include "ddmr/lti.hpp"

namespace ddmr::io {

using nlohmann::json;

/// Row-major nested arrays.
json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const json& j, const std::string& what);

json model_to_json(const StateSpaceModel& model);
StateSpaceModel model_from_json(const json& j);

json reference_to_json(const ReferenceModel& ref);
ReferenceModel reference_from_json(const json& j);

json gains_to_json(const ControllerGains& gains);
ControllerGains gains_from_json(const json& j);

json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

}  // namespace ddmr::io
