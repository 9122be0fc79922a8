#include "btk/http.hpp"

#include <chrono>
#include <sstream>
#include <thread>

#include <httplib.h>

namespace btk {

nlohmann::json post_json(const std::string& endpoint, const std::string& path,
                         const nlohmann::json& body, double timeout_s, int retries,
                         int backoff_ms) {
  const std::string payload = body.dump();
  std::string last_error;
  for (int attempt = 0; attempt <= retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms << (attempt - 1)));
    }
    httplib::Client client(endpoint);
    client.set_connection_timeout(std::chrono::duration<double>(timeout_s));
    client.set_read_timeout(std::chrono::duration<double>(timeout_s));
    auto res = client.Post(path, payload, "application/json");
    if (!res) {
      last_error = "connection error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status != 200) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    try {
      return nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception&) {
      last_error = "malformed JSON reply";
    }
  }
  std::ostringstream msg;
  msg << "POST " << endpoint << path << " failed after " << retries + 1 << " attempts ("
      << last_error << ")";
  throw HttpError(msg.str());
}

}  // namespace btk
