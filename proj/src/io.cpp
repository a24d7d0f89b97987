#include "ddmr/io.hpp"

#include <fstream>
#include <sstream>

#include "ddmr/errors.hpp"

namespace ddmr::io {

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& j, const std::string& what) {
  if (!j.is_array()) throw FormatError(what + ": expected an array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  if (rows == 0) return Matrix(0, 0);
  if (!j[0].is_array()) throw FormatError(what + ": expected an array of rows");
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw FormatError(what + ": ragged matrix rows");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      const json& v = row[static_cast<std::size_t>(c)];
      if (!v.is_number()) throw FormatError(what + ": non-numeric entry");
      m(i, c) = v.get<double>();
    }
  }
  return m;
}

namespace {

const json& field(const json& j, const char* key, const std::string& ctx) {
  if (!j.is_object() || !j.contains(key)) throw FormatError(ctx + ": missing field '" + key + "'");
  return j.at(key);
}

}  // namespace

json model_to_json(const StateSpaceModel& model) {
  return json{{"A", matrix_to_json(model.A())}, {"B", matrix_to_json(model.B())}};
}

StateSpaceModel model_from_json(const json& j) {
  return StateSpaceModel(matrix_from_json(field(j, "A", "plant"), "plant.A"),
                         matrix_from_json(field(j, "B", "plant"), "plant.B"));
}

json reference_to_json(const ReferenceModel& ref) {
  return json{{"A_M", matrix_to_json(ref.A())}, {"B_M", matrix_to_json(ref.B())}};
}

ReferenceModel reference_from_json(const json& j) {
  return ReferenceModel(matrix_from_json(field(j, "A_M", "reference"), "reference.A_M"),
                        matrix_from_json(field(j, "B_M", "reference"), "reference.B_M"));
}

json gains_to_json(const ControllerGains& gains) {
  return json{{"K_x", matrix_to_json(gains.Kx)}, {"K_r", matrix_to_json(gains.Kr)}};
}

ControllerGains gains_from_json(const json& j) {
  ControllerGains g{matrix_from_json(field(j, "K_x", "gains"), "gains.K_x"),
                    matrix_from_json(field(j, "K_r", "gains"), "gains.K_r")};
  g.validate();
  return g;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json_file(const std::string& path) {
  const std::string text = read_text_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError("malformed JSON in '" + path + "': " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write file '" + path + "'");
  out << text;
}

}  // namespace ddmr::io
