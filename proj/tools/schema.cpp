#include "schema.hpp"

#include <cmath>

namespace rdmft::cli {

extern const char* const kRunConfigSchemaText;

namespace {

std::string escape_token(const std::string& token) {
  std::string out;
  for (char ch : token) {
    if (ch == '~') {
      out += "~0";
    } else if (ch == '/') {
      out += "~1";
    } else {
      out += ch;
    }
  }
  return out;
}

bool has_type(const nlohmann::json& value, const std::string& type) {
  if (type == "object") return value.is_object();
  if (type == "array") return value.is_array();
  if (type == "string") return value.is_string();
  if (type == "boolean") return value.is_boolean();
  if (type == "null") return value.is_null();
  if (type == "number") return value.is_number();
  if (type == "integer") {
    if (value.is_number_integer()) return true;
    if (!value.is_number_float()) return false;
    const double d = value.get<double>();
    return std::isfinite(d) && std::floor(d) == d;
  }
  return false;
}

std::string type_name(const nlohmann::json& value) {
  if (value.is_number_integer()) return "integer";
  if (value.is_number()) return "number";
  return value.type_name();
}

class Validator {
 public:
  std::vector<SchemaIssue> issues;

  void check(const nlohmann::json& schema, const nlohmann::json& value, const std::string& pointer) {
    if (auto it = schema.find("type"); it != schema.end()) {
      bool ok = false;
      if (it->is_array()) {
        for (const auto& t : *it) ok = ok || has_type(value, t.get<std::string>());
      } else {
        ok = has_type(value, it->get<std::string>());
      }
      if (!ok) {
        fail(pointer, "expected " + it->dump() + ", got " + type_name(value));
        return;
      }
    }
    if (auto it = schema.find("enum"); it != schema.end()) {
      bool ok = false;
      for (const auto& option : *it) ok = ok || option == value;
      if (!ok) fail(pointer, "value " + value.dump() + " is not one of " + it->dump());
    }
    if (value.is_number()) check_bounds(schema, value.get<double>(), pointer);
    if (value.is_object()) check_object(schema, value, pointer);
    if (value.is_array()) check_array(schema, value, pointer);
  }

 private:
  void fail(const std::string& pointer, std::string message) { issues.push_back({pointer, std::move(message)}); }

  void check_bounds(const nlohmann::json& schema, double v, const std::string& pointer) {
    if (auto it = schema.find("minimum"); it != schema.end() && v < it->get<double>()) {
      fail(pointer, "must be >= " + it->dump());
    }
    if (auto it = schema.find("maximum"); it != schema.end() && v > it->get<double>()) {
      fail(pointer, "must be <= " + it->dump());
    }
    if (auto it = schema.find("exclusiveMinimum"); it != schema.end() && v <= it->get<double>()) {
      fail(pointer, "must be > " + it->dump());
    }
  }

  void check_object(const nlohmann::json& schema, const nlohmann::json& value, const std::string& pointer) {
    const auto props = schema.find("properties");
    if (auto it = schema.find("required"); it != schema.end()) {
      for (const auto& key : *it) {
        if (!value.contains(key.get<std::string>())) {
          fail(pointer + "/" + escape_token(key.get<std::string>()), "required key is missing");
        }
      }
    }
    const bool closed = schema.value("additionalProperties", true) == false;
    for (const auto& [key, child] : value.items()) {
      const std::string child_pointer = pointer + "/" + escape_token(key);
      if (props != schema.end() && props->contains(key)) {
        check(props->at(key), child, child_pointer);
      } else if (closed) {
        fail(child_pointer, "unknown key");
      }
    }
  }

  void check_array(const nlohmann::json& schema, const nlohmann::json& value, const std::string& pointer) {
    if (auto it = schema.find("minItems"); it != schema.end() && value.size() < it->get<std::size_t>()) {
      fail(pointer, "needs at least " + it->dump() + " items");
    }
    if (auto it = schema.find("items"); it != schema.end()) {
      for (std::size_t i = 0; i < value.size(); ++i) check(*it, value[i], pointer + "/" + std::to_string(i));
    }
  }
};

}  // namespace

std::vector<SchemaIssue> validate(const nlohmann::json& schema, const nlohmann::json& document) {
  Validator v;
  v.check(schema, document, "");
  return v.issues;
}

const nlohmann::json& run_config_schema() {
  static const nlohmann::json schema = nlohmann::json::parse(kRunConfigSchemaText);
  return schema;
}

}  // namespace rdmft::cli
