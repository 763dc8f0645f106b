#include "conformax/report.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "conformax/errors.hpp"

namespace conformax {

namespace {

using nlohmann::json;

const char* const kReportSchema = R"JSON({
  "schema_version": "string",
  "generator": "string",
  "config": {
    "surface": "string",
    "subdivision": "integer",
    "nx": "integer",
    "ny": "integer",
    "width": "number",
    "height": "number",
    "k": "integer",
    "caps": ["number"],
    "lower_bound_mode": "string",
    "budget": "integer",
    "solver_tol": "number",
    "group_gap": "number",
    "seed": "integer",
    "threads": "integer",
    "out": "string",
    "atom_threshold": "number",
    "atom_radius_edges": "number",
    "quantization_tol": "number",
    "membership_tol": "number",
    "certificate_tol": "number",
    "class_table_mode": "string"
  },
  "surface": {
    "kind": "string",
    "vertex_count": "integer",
    "triangle_count": "integer",
    "area": "number",
    "mean_edge_length": "number"
  },
  "stages": [{
    "stage": "integer",
    "cap": "number",
    "best_lambda": "number",
    "iterations": "integer",
    "cap_set_area": "number",
    "n_times_cap_area": "number",
    "neg_set_area": "number",
    "note": "string"
  }],
  "lambda_estimate": "number",
  "lambda_group": ["number"],
  "decomposition": {
    "K": "integer",
    "k_bound_satisfied": "boolean",
    "regular_area": "number",
    "mass_check": "number",
    "atoms": [{
      "vertex": "integer",
      "weight": "number",
      "ball_radius": "number",
      "position": ["number"],
      "stage_masses": ["number"]
    }],
    "warnings": ["string"]
  },
  "quantization": {
    "tolerance": "number",
    "lambda_reference": "number",
    "sphere_candidates": ["number"],
    "class_candidates": ["number"],
    "atoms": [{
      "value": "number",
      "nearest_candidate": "number",
      "candidate_j": "integer",
      "relative_distance": "number",
      "pass": "boolean"
    }],
    "regular_area": {
      "value": "number",
      "nearest_candidate": "number",
      "candidate_j": "integer",
      "relative_distance": "number",
      "pass": "boolean"
    },
    "all_pass": "boolean"
  },
  "singular_spectra": [{
    "atom_vertex": "integer",
    "radii": ["number"],
    "stage_caps": ["number"],
    "modes": [{
      "mode": "integer",
      "values_by_stage": [["number"]],
      "extrapolated": "number",
      "error_bar": "number",
      "monotone_in_radius": "boolean"
    }],
    "no_atom": "boolean",
    "warnings": ["string"]
  }],
  "membership": {
    "lambda": "number",
    "tolerance": "number",
    "vacuous": "boolean",
    "atoms": [{
      "vertex": "integer",
      "nearest_singular": "number",
      "relative_distance": "number",
      "pass": "boolean"
    }],
    "regular": {
      "defined": "boolean",
      "nearest": "number",
      "relative_distance": "number",
      "pass": "boolean"
    }
  },
  "certificate": {
    "computed": "boolean",
    "ell": "integer",
    "sphere_defect": "number",
    "dirichlet_energy": "number",
    "energy_identity_reference": "number",
    "valid": "boolean",
    "tolerance": "number",
    "group": ["number"]
  },
  "timings_seconds": {
    "total": "number",
    "continuation": "number",
    "analysis": "number"
  },
  "exit": {
    "completed": "boolean",
    "message": "string"
  }
})JSON";

void walk(const json& doc, const json& schema, const std::string& path,
          std::vector<std::string>& violations) {
  if (schema.is_string()) {
    const std::string type = schema.get<std::string>();
    bool ok = false;
    if (type == "number") {
      ok = doc.is_number();
    } else if (type == "integer") {
      ok = doc.is_number_integer();
    } else if (type == "string") {
      ok = doc.is_string();
    } else if (type == "boolean") {
      ok = doc.is_boolean();
    } else {
      violations.push_back(path + ": unknown schema type '" + type + "'");
      return;
    }
    if (!ok) {
      violations.push_back(path + ": expected " + type + ", got " +
                           std::string(doc.type_name()));
    }
    return;
  }
  if (schema.is_array()) {
    if (!doc.is_array()) {
      violations.push_back(path + ": expected array, got " +
                           std::string(doc.type_name()));
      return;
    }
    for (std::size_t i = 0; i < doc.size(); ++i) {
      walk(doc[i], schema[0], path + "[" + std::to_string(i) + "]", violations);
    }
    return;
  }
  if (schema.is_object()) {
    if (!doc.is_object()) {
      violations.push_back(path + ": expected object, got " +
                           std::string(doc.type_name()));
      return;
    }
    for (const auto& [key, sub] : schema.items()) {
      if (!doc.contains(key)) {
        violations.push_back(path + ": missing required key '" + key + "'");
        continue;
      }
      walk(doc.at(key), sub, path + "/" + key, violations);
    }
    for (const auto& [key, value] : doc.items()) {
      (void)value;
      if (!schema.contains(key)) {
        violations.push_back(path + ": unexpected key '" + key + "'");
      }
    }
    return;
  }
  violations.push_back(path + ": unsupported schema node");
}

}  // namespace

const std::string& report_schema_text() {
  static const std::string text = json::parse(kReportSchema).dump(2) + "\n";
  return text;
}

std::vector<std::string> schema_violations(const std::string& document_text,
                                           const std::string& schema_text) {
  json doc, schema;
  try {
    doc = json::parse(document_text);
  } catch (const json::exception& err) {
    throw Error(std::string("report is not valid JSON: ") + err.what());
  }
  try {
    schema = json::parse(schema_text);
  } catch (const json::exception& err) {
    throw Error(std::string("schema is not valid JSON: ") + err.what());
  }
  std::vector<std::string> violations;
  walk(doc, schema, "", violations);
  return violations;
}

void validate_report_file(const std::string& report_path) {
  std::ifstream in(report_path);
  if (!in) throw Error("cannot open report " + report_path);
  std::ostringstream text;
  text << in.rdbuf();
  const auto violations = schema_violations(text.str(), report_schema_text());
  if (!violations.empty()) {
    std::ostringstream msg;
    msg << "report " << report_path << " violates the schema:";
    for (const auto& v : violations) msg << "\n  " << v;
    throw Error(msg.str());
  }
}

}  // namespace conformax
