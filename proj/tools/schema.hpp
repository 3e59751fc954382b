#pragma once

#include <json.hpp>
#include <string>
#include <vector>

namespace rdmft::cli {

struct SchemaIssue {
  /// JSON pointer to the offending value ("" is the document root).
  std::string pointer;
  std::string message;
};

/// Checks `document` against the subset of JSON Schema used by the run
/// configuration: type, enum, properties, required, additionalProperties
/// (boolean), items, minItems, minimum, maximum, exclusiveMinimum.
std::vector<SchemaIssue> validate(const nlohmann::json& schema, const nlohmann::json& document);

/// The run-configuration schema compiled into the binary.
const nlohmann::json& run_config_schema();

}  // namespace rdmft::cli
