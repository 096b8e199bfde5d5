#pragma once

#include <stdexcept>
#include <string>

namespace expo {

// Invalid configuration: bad hyperparameter, shape mismatch, malformed file.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// API misuse: empty batch, sampling from an empty buffer, seeding twice.
struct UsageError : std::runtime_error {
  explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// Demo generation exhausted its episode budget without enough successes.
struct GenerationError : std::runtime_error {
  explicit GenerationError(const std::string& what) : std::runtime_error(what) {}
};

// A structured file (metrics CSV) whose header or rows do not match the
// documented schema.
struct SchemaError : std::runtime_error {
  explicit SchemaError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace expo
