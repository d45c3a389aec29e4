#include "rplan/data/backend.hpp"

#include <cstdlib>
#include <filesystem>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "rplan/data/types.hpp"
#include "rplan/util/errors.hpp"
#include "rplan/util/rng.hpp"

namespace rplan::data {

namespace fs = std::filesystem;
using nlohmann::json;

std::string cache_key(const std::string& prompt, const LlmGenConfig& cfg) {
  json j;
  j["temperature"] = cfg.temperature;
  j["top_k"] = cfg.top_k;
  j["top_p"] = cfg.top_p;
  j["max_tokens"] = cfg.max_tokens;
  const std::uint64_t h = fnv1a(prompt + "\x1f" + j.dump());
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ReplayBackend::ReplayBackend(std::string cache_dir) : dir_(std::move(cache_dir)) {}

std::string ReplayBackend::complete(const std::string& prompt, const LlmGenConfig& cfg) {
  const fs::path p = fs::path(dir_) / (cache_key(prompt, cfg) + ".json");
  if (!fs::exists(p)) throw ReplayMiss("no cached completion for key " + cache_key(prompt, cfg));
  const auto j = json::parse(read_file(p.string()));
  return j.at("completion").get<std::string>();
}

RecordingBackend::RecordingBackend(LLMBackend& inner, std::string cache_dir)
    : inner_(&inner), dir_(std::move(cache_dir)) {
  fs::create_directories(dir_);
}

std::string RecordingBackend::complete(const std::string& prompt, const LlmGenConfig& cfg) {
  const std::string out = inner_->complete(prompt, cfg);
  json j;
  j["key"] = cache_key(prompt, cfg);
  j["backend"] = inner_->identity();
  j["completion"] = out;
  write_file((fs::path(dir_) / (cache_key(prompt, cfg) + ".json")).string(), j.dump() + "\n");
  return out;
}

HttpBackend::HttpBackend(std::string url, std::string auth_env_var)
    : url_(std::move(url)), auth_env_(std::move(auth_env_var)) {}

std::string HttpBackend::complete(const std::string& prompt, const LlmGenConfig& cfg) {
  // split "http://host:port/path" into client base and request path
  auto path_start = url_.find('/', url_.find("//") == std::string::npos ? 0 : url_.find("//") + 2);
  const std::string base = path_start == std::string::npos ? url_ : url_.substr(0, path_start);
  const std::string path = path_start == std::string::npos ? "/" : url_.substr(path_start);

  httplib::Client client(base);
  client.set_read_timeout(60, 0);
  httplib::Headers headers;
  if (!auth_env_.empty()) {
    const char* key = std::getenv(auth_env_.c_str());
    if (key && *key) headers.emplace("Authorization", std::string("Bearer ") + key);
  }
  json body;
  body["prompt"] = prompt;
  body["temperature"] = cfg.temperature;
  body["top_k"] = cfg.top_k;
  body["top_p"] = cfg.top_p;
  body["max_tokens"] = cfg.max_tokens;

  auto res = client.Post(path, headers, body.dump(), "application/json");
  if (!res) throw BackendError("http request failed: " + httplib::to_string(res.error()));
  if (res->status != 200) {
    int retry_after = 0;
    if (res->has_header("Retry-After")) retry_after = std::atoi(res->get_header_value("Retry-After").c_str());
    throw BackendError("http status " + std::to_string(res->status), retry_after);
  }
  const auto j = json::parse(res->body, nullptr, false);
  if (j.is_discarded() || !j.contains("text"))
    throw BackendError("malformed completion response");
  return j.at("text").get<std::string>();
}

}  // namespace rplan::data
