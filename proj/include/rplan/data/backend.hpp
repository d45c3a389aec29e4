#pragma once

#include <functional>
#include <memory>
#include <string>

namespace rplan::data {

// Generation settings sent with every completion request.
struct LlmGenConfig {
  double temperature = 0.1;
  int top_k = 5;
  double top_p = 0.3;
  int max_tokens = 40;

  bool operator==(const LlmGenConfig&) const = default;
};

class LLMBackend {
 public:
  virtual ~LLMBackend() = default;
  virtual std::string complete(const std::string& prompt, const LlmGenConfig& cfg) = 0;
  virtual std::string identity() const = 0;
};

// content hash of (prompt, gen_config); the replay cache key
std::string cache_key(const std::string& prompt, const LlmGenConfig& cfg);

// Serves completions from a directory of recorded responses. A miss raises
// ReplayMiss and never touches the network.
class ReplayBackend : public LLMBackend {
 public:
  explicit ReplayBackend(std::string cache_dir);
  std::string complete(const std::string& prompt, const LlmGenConfig& cfg) override;
  std::string identity() const override { return "replay"; }

 private:
  std::string dir_;
};

// Forwards to an inner backend and records every completion into the cache.
class RecordingBackend : public LLMBackend {
 public:
  RecordingBackend(LLMBackend& inner, std::string cache_dir);
  std::string complete(const std::string& prompt, const LlmGenConfig& cfg) override;
  std::string identity() const override { return inner_->identity(); }

 private:
  LLMBackend* inner_;
  std::string dir_;
};

// POSTs {prompt, temperature, top_k, top_p, max_tokens} to a completion
// endpoint; expects {"text": "..."}. The API key is read from the named
// environment variable, never from configuration files.
class HttpBackend : public LLMBackend {
 public:
  HttpBackend(std::string url, std::string auth_env_var);
  std::string complete(const std::string& prompt, const LlmGenConfig& cfg) override;
  std::string identity() const override { return "http:" + url_; }

 private:
  std::string url_;
  std::string auth_env_;
};

// Test helper: completions produced by an arbitrary function.
class ScriptedBackend : public LLMBackend {
 public:
  using Fn = std::function<std::string(const std::string&, const LlmGenConfig&)>;
  explicit ScriptedBackend(Fn fn, std::string id = "scripted")
      : fn_(std::move(fn)), id_(std::move(id)) {}
  std::string complete(const std::string& prompt, const LlmGenConfig& cfg) override {
    return fn_(prompt, cfg);
  }
  std::string identity() const override { return id_; }

 private:
  Fn fn_;
  std::string id_;
};

}  // namespace rplan::data
