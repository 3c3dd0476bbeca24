#pragma once

#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "json.hpp"
#include "motiv/analytics.hpp"
#include "motiv/corpus.hpp"

namespace motiv::api {

using nlohmann::json;

enum class ErrorCode { kBadRequest, kNotFound, kDegenerateModel, kInternal };

std::string_view to_string(ErrorCode c);
int http_status(ErrorCode c);

/// Error surfaced to clients as {"error": {"code", "message", "detail"?}}.
class ApiError : public std::runtime_error {
 public:
  ApiError(ErrorCode code, const std::string& message, json detail = nullptr)
      : std::runtime_error(message), code_(code), detail_(std::move(detail)) {}

  ErrorCode code() const { return code_; }
  const json& detail() const { return detail_; }
  json to_json() const;

 private:
  ErrorCode code_;
  json detail_;
};

struct Response {
  int status = 200;
  std::string body;
};

using Query = std::map<std::string, std::string, std::less<>>;

/// Read-only view of one dataset answering every endpoint. Safe to share
/// between threads: nothing is mutated after construction.
class Service {
 public:
  explicit Service(std::shared_ptr<const Dataset> dataset);

  const Dataset& dataset() const { return *dataset_; }
  const analytics::FeatureTable& features() const { return features_; }

  /// Routes a request; never throws.
  Response handle(std::string_view method, std::string_view path, const Query& query, std::string_view body) const;

  json frames() const;
  json summary(std::optional<std::string_view> sort, std::optional<std::string_view> dir) const;
  json timeline(std::optional<std::string_view> frame, std::optional<std::string_view> color) const;
  json map(std::optional<std::string_view> frame, std::optional<std::string_view> color) const;
  json gam(const json& spec) const;
  json gam(std::string_view body) const;
  json brush_county(std::string_view fips) const;
  json tweet(std::string_view id) const;
  json dataset_info() const;

 private:
  std::shared_ptr<const Dataset> dataset_;
  analytics::FeatureTable features_;
};

inline constexpr std::string_view kDefaultTimelineColor = "sentiment";
inline constexpr std::string_view kDefaultMapColor = "leaning";

/// Serialized form shared by the server and the CLI.
std::string to_body(const json& payload);

/// Replaces NaN/Inf numbers by null, recursively.
json finite(json value);

}  // namespace motiv::api
