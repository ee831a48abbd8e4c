#pragma once

#include <set>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace agentic {

// Typed access to one JSON object with a dotted path for diagnostics.
// `finish()` rejects keys that were never read. Every failure is a
// ConfigError naming the full key path.
class FieldReader {
 public:
  FieldReader(const nlohmann::json& object, std::string path);

  bool has(std::string_view key) const;
  const nlohmann::json& raw(std::string_view key);

  double number(std::string_view key, double fallback);
  double number(std::string_view key);
  long long integer(std::string_view key, long long fallback);
  bool boolean(std::string_view key, bool fallback);
  std::string text(std::string_view key, std::string fallback);
  std::string text(std::string_view key);

  FieldReader object(std::string_view key);

  std::string key_path(std::string_view key) const;
  const std::string& path() const noexcept { return path_; }

  void finish() const;

 private:
  const nlohmann::json* find(std::string_view key);

  const nlohmann::json& object_;
  std::string path_;
  std::set<std::string, std::less<>> seen_;
};

}  // namespace agentic
