#pragma once

// The subset of JSON Schema the shipped schemas use: type, enum, required,
// properties, additionalProperties (boolean), items, minItems, minimum,
// exclusiveMinimum (numeric form), oneOf and anyOf.

#include <string>
#include <vector>

#include <json.hpp>

namespace rpsolve::cli {

/// Human-readable violations, each prefixed with a JSON path such as
/// `$.settings.newton_tolerance`. Empty when the instance conforms.
std::vector<std::string> schema_violations(const nlohmann::json& instance,
                                           const nlohmann::json& schema);

const nlohmann::json& config_schema();
const nlohmann::json& identities_schema();
const nlohmann::json& output_schema();

}  // namespace rpsolve::cli
