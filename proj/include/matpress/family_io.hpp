// Family file format: JSON with a format version, a field tag, the
// dimension, and the matrices as nested entry arrays.  Real entries are
// plain numbers; complex entries are two-element [re, im] arrays (accepted
// for real families too, as long as the imaginary part is exactly zero).
#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "matpress/errors.hpp"
#include "matpress/family.hpp"

namespace matpress {

inline constexpr int kFamilyFormatVersion = 1;

inline MatrixFamily family_from_json(const nlohmann::json& doc) {
  try {
    if (!doc.is_object()) throw input_error("family file: expected a JSON object");
    if (doc.value("format-version", -1) != kFamilyFormatVersion) {
      throw input_error("family file: unsupported or missing format-version");
    }
    const std::string field_name = doc.at("field").get<std::string>();
    Field field;
    if (field_name == "real") {
      field = Field::real;
    } else if (field_name == "complex") {
      field = Field::complex;
    } else {
      throw input_error("family file: field must be 'real' or 'complex'");
    }
    const int d = doc.at("dimension").get<int>();
    if (d < 1) throw input_error("family file: dimension must be positive");
    const auto& mats = doc.at("matrices");
    if (!mats.is_array() || mats.empty()) {
      throw input_error("family file: matrices must be a non-empty array");
    }
    std::vector<Matrix> matrices;
    for (const auto& mat : mats) {
      if (!mat.is_array() || static_cast<int>(mat.size()) != d) {
        throw input_error("family file: each matrix needs " + std::to_string(d) +
                          " rows");
      }
      Matrix m(d, d);
      for (int i = 0; i < d; ++i) {
        const auto& row = mat[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<int>(row.size()) != d) {
          throw input_error("family file: each row needs " + std::to_string(d) +
                            " entries");
        }
        for (int j = 0; j < d; ++j) {
          const auto& entry = row[static_cast<std::size_t>(j)];
          if (entry.is_number()) {
            m(i, j) = Complex(entry.get<double>(), 0.0);
          } else if (entry.is_array() && entry.size() == 2 &&
                     entry[0].is_number() && entry[1].is_number()) {
            m(i, j) = Complex(entry[0].get<double>(), entry[1].get<double>());
          } else {
            throw input_error(
                "family file: entries must be numbers or [re, im] pairs");
          }
        }
      }
      matrices.push_back(std::move(m));
    }
    return MatrixFamily(field, std::move(matrices));
  } catch (const nlohmann::json::exception& e) {
    throw input_error(std::string("family file: ") + e.what());
  }
}

inline nlohmann::json family_to_json(const MatrixFamily& fam) {
  nlohmann::json doc;
  doc["format-version"] = kFamilyFormatVersion;
  doc["field"] = to_string(fam.field());
  doc["dimension"] = fam.dim();
  nlohmann::json mats = nlohmann::json::array();
  for (const Matrix& m : fam.matrices()) {
    nlohmann::json mat = nlohmann::json::array();
    for (int i = 0; i < fam.dim(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (int j = 0; j < fam.dim(); ++j) {
        if (fam.field() == Field::real) {
          row.push_back(m(i, j).real());
        } else {
          row.push_back(nlohmann::json::array({m(i, j).real(), m(i, j).imag()}));
        }
      }
      mat.push_back(std::move(row));
    }
    mats.push_back(std::move(mat));
  }
  doc["matrices"] = std::move(mats);
  return doc;
}

inline MatrixFamily read_family_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open family file '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw input_error("family file '" + path + "': " + e.what());
  }
  return family_from_json(doc);
}

inline void write_family_file(const std::string& path, const MatrixFamily& fam) {
  std::ofstream out(path);
  if (!out) throw input_error("cannot write family file '" + path + "'");
  out << family_to_json(fam).dump(2) << "\n";
}

}  // namespace matpress
