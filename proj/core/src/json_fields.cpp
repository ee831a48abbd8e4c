#include "agentic/json_fields.hpp"

#include <cmath>

#include <fmt/format.h>

#include "agentic/errors.hpp"

namespace agentic {

FieldReader::FieldReader(const nlohmann::json& object, std::string path)
    : object_(object), path_(std::move(path)) {
  if (!object_.is_object()) {
    throw ConfigError(fmt::format("{} must be an object", path_.empty() ? "document" : path_));
  }
}

std::string FieldReader::key_path(std::string_view key) const {
  return path_.empty() ? std::string(key) : fmt::format("{}.{}", path_, key);
}

bool FieldReader::has(std::string_view key) const {
  const auto it = object_.find(std::string(key));
  return it != object_.end() && !it->is_null();
}

const nlohmann::json* FieldReader::find(std::string_view key) {
  seen_.emplace(key);
  const auto it = object_.find(std::string(key));
  if (it == object_.end() || it->is_null()) return nullptr;
  return &*it;
}

const nlohmann::json& FieldReader::raw(std::string_view key) {
  const nlohmann::json* value = find(key);
  if (value == nullptr) throw ConfigError(fmt::format("missing key '{}'", key_path(key)));
  return *value;
}

double FieldReader::number(std::string_view key) {
  const nlohmann::json& value = raw(key);
  if (!value.is_number()) throw ConfigError(fmt::format("'{}' must be a number", key_path(key)));
  const double v = value.get<double>();
  if (!std::isfinite(v)) throw ConfigError(fmt::format("'{}' must be finite", key_path(key)));
  return v;
}

double FieldReader::number(std::string_view key, double fallback) {
  return find(key) == nullptr ? fallback : number(key);
}

long long FieldReader::integer(std::string_view key, long long fallback) {
  const nlohmann::json* value = find(key);
  if (value == nullptr) return fallback;
  if (!value->is_number_integer()) {
    throw ConfigError(fmt::format("'{}' must be an integer", key_path(key)));
  }
  return value->get<long long>();
}

bool FieldReader::boolean(std::string_view key, bool fallback) {
  const nlohmann::json* value = find(key);
  if (value == nullptr) return fallback;
  if (!value->is_boolean()) throw ConfigError(fmt::format("'{}' must be true or false", key_path(key)));
  return value->get<bool>();
}

std::string FieldReader::text(std::string_view key) {
  const nlohmann::json& value = raw(key);
  if (!value.is_string()) throw ConfigError(fmt::format("'{}' must be a string", key_path(key)));
  return value.get<std::string>();
}

std::string FieldReader::text(std::string_view key, std::string fallback) {
  return find(key) == nullptr ? fallback : text(key);
}

FieldReader FieldReader::object(std::string_view key) { return FieldReader(raw(key), key_path(key)); }

void FieldReader::finish() const {
  for (const auto& [key, value] : object_.items()) {
    if (seen_.find(key) == seen_.end()) {
      throw ConfigError(fmt::format("unknown key '{}'", key_path(key)));
    }
  }
}

}  // namespace agentic
