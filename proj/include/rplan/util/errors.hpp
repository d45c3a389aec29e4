#pragma once

#include <stdexcept>
#include <string>

namespace rplan {

struct SymbolError : std::runtime_error {
  explicit SymbolError(const std::string& what) : std::runtime_error(what) {}
};

struct IntegrityError : std::runtime_error {
  explicit IntegrityError(const std::string& what) : std::runtime_error(what) {}
};

struct InfeasibleTask : std::runtime_error {
  explicit InfeasibleTask(const std::string& what) : std::runtime_error(what) {}
};

struct EmbeddingError : std::runtime_error {
  explicit EmbeddingError(const std::string& what) : std::runtime_error(what) {}
};

struct VocabError : std::runtime_error {
  explicit VocabError(const std::string& what) : std::runtime_error(what) {}
};

struct BackendError : std::runtime_error {
  explicit BackendError(const std::string& what, int retry_after_s = 0)
      : std::runtime_error(what), retry_after(retry_after_s) {}
  int retry_after;
};

// Replay cache miss. Deliberately not a BackendError: a miss must never be
// retried against the network.
struct ReplayMiss : std::runtime_error {
  explicit ReplayMiss(const std::string& what) : std::runtime_error(what) {}
};

struct MalformedRationale : std::runtime_error {
  explicit MalformedRationale(const std::string& what) : std::runtime_error(what) {}
};

struct CheckpointError : std::runtime_error {
  explicit CheckpointError(const std::string& what) : std::runtime_error(what) {}
};

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace rplan
