#pragma once

#include <string>

#include <json.hpp>

#include "btk/util.hpp"

namespace btk {

class HttpError : public Error {
 public:
  using Error::Error;
};

// POSTs `body` as application/json and returns the parsed 200 reply.
// Retries non-200s and transport errors with exponential backoff; throws
// HttpError after the attempts are exhausted.
nlohmann::json post_json(const std::string& endpoint, const std::string& path,
                         const nlohmann::json& body, double timeout_s, int retries,
                         int backoff_ms);

}  // namespace btk
