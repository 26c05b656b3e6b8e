#include "rpsolve/cli/schema.hpp"

#include <cmath>

#include <fmt/format.h>

#include "embedded_schemas.hpp"

namespace rpsolve::cli {

namespace {

using nlohmann::json;

bool has_type(const json& value, const std::string& type) {
  if (type == "object") return value.is_object();
  if (type == "array") return value.is_array();
  if (type == "string") return value.is_string();
  if (type == "boolean") return value.is_boolean();
  if (type == "null") return value.is_null();
  if (type == "number") return value.is_number();
  if (type == "integer") {
    if (value.is_number_integer()) return true;
    if (!value.is_number_float()) return false;
    const double x = value.get<double>();
    return std::isfinite(x) && std::floor(x) == x;
  }
  return false;
}

std::string describe(const json& schema_types) {
  if (schema_types.is_string()) return schema_types.get<std::string>();
  std::string out;
  for (const auto& t : schema_types) {
    if (!out.empty()) out += " or ";
    out += t.get<std::string>();
  }
  return out;
}

void check(const json& value, const json& schema, const std::string& path,
           std::vector<std::string>& out) {
  if (const auto it = schema.find("type"); it != schema.end()) {
    bool ok = false;
    if (it->is_string()) {
      ok = has_type(value, it->get<std::string>());
    } else {
      for (const auto& t : *it) ok = ok || has_type(value, t.get<std::string>());
    }
    if (!ok) {
      out.push_back(fmt::format("{}: expected {}, got {}", path, describe(*it), value.type_name()));
      return;
    }
  }

  if (const auto it = schema.find("enum"); it != schema.end()) {
    bool found = false;
    for (const auto& allowed : *it) found = found || allowed == value;
    if (!found) out.push_back(fmt::format("{}: {} is not one of {}", path, value.dump(), it->dump()));
  }

  if (value.is_number()) {
    const double x = value.get<double>();
    if (const auto it = schema.find("minimum"); it != schema.end() && x < it->get<double>()) {
      out.push_back(fmt::format("{}: {} is below the minimum {}", path, x, it->get<double>()));
    }
    if (const auto it = schema.find("exclusiveMinimum");
        it != schema.end() && !(x > it->get<double>())) {
      out.push_back(fmt::format("{}: {} must exceed {}", path, x, it->get<double>()));
    }
  }

  if (value.is_object()) {
    if (const auto it = schema.find("required"); it != schema.end()) {
      for (const auto& key : *it) {
        if (!value.contains(key.get<std::string>())) {
          out.push_back(fmt::format("{}: missing required property \"{}\"", path,
                                    key.get<std::string>()));
        }
      }
    }
    const auto props = schema.find("properties");
    const auto extra = schema.find("additionalProperties");
    for (const auto& [key, member] : value.items()) {
      const std::string member_path = path + "." + key;
      if (props != schema.end() && props->contains(key)) {
        check(member, (*props)[key], member_path, out);
      } else if (extra != schema.end() && extra->is_boolean() && !extra->get<bool>()) {
        out.push_back(fmt::format("{}: unknown property", member_path));
      }
    }
  }

  if (value.is_array()) {
    if (const auto it = schema.find("minItems");
        it != schema.end() && value.size() < it->get<std::size_t>()) {
      out.push_back(fmt::format("{}: needs at least {} items, has {}", path,
                                it->get<std::size_t>(), value.size()));
    }
    if (const auto it = schema.find("items"); it != schema.end()) {
      for (std::size_t k = 0; k < value.size(); ++k) {
        check(value[k], *it, fmt::format("{}[{}]", path, k), out);
      }
    }
  }

  // Report the closest alternative's problems when none (or, for oneOf, more
  // than one) matches.
  for (const char* keyword : {"oneOf", "anyOf"}) {
    const auto it = schema.find(keyword);
    if (it == schema.end()) continue;
    std::size_t matches = 0;
    std::vector<std::string> closest;
    bool first = true;
    for (const auto& alternative : *it) {
      std::vector<std::string> errors;
      check(value, alternative, path, errors);
      if (errors.empty()) {
        ++matches;
      } else if (first || errors.size() < closest.size()) {
        closest = std::move(errors);
        first = false;
      }
    }
    const bool exclusive = std::string_view(keyword) == "oneOf";
    if (matches == 0) {
      out.push_back(fmt::format("{}: matches none of the allowed forms", path));
      out.insert(out.end(), closest.begin(), closest.end());
    } else if (exclusive && matches > 1) {
      out.push_back(fmt::format("{}: matches more than one allowed form", path));
    }
  }
}

}  // namespace

std::vector<std::string> schema_violations(const nlohmann::json& instance,
                                           const nlohmann::json& schema) {
  std::vector<std::string> out;
  check(instance, schema, "$", out);
  return out;
}

const nlohmann::json& config_schema() {
  static const auto schema = nlohmann::json::parse(embedded::kConfigSchema);
  return schema;
}

const nlohmann::json& identities_schema() {
  static const auto schema = nlohmann::json::parse(embedded::kIdentitiesSchema);
  return schema;
}

const nlohmann::json& output_schema() {
  static const auto schema = nlohmann::json::parse(embedded::kOutputSchema);
  return schema;
}

}  // namespace rpsolve::cli
