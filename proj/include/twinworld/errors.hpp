#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace twinworld {

// Broad failure classes. The CLI maps each to a distinct exit code.
enum class ErrorKind { config, input, gate, transport };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

class InputError : public Error {
 public:
  explicit InputError(const std::string& what) : Error(ErrorKind::input, what) {}
};

class ParseError : public InputError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : InputError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ReferentialError : public InputError {
 public:
  explicit ReferentialError(std::vector<std::string> missing)
      : InputError(describe(missing)), missing_(std::move(missing)) {}
  const std::vector<std::string>& missing() const noexcept { return missing_; }

 private:
  static std::string describe(const std::vector<std::string>& ids) {
    std::string s = "dangling fact endpoint(s):";
    for (const auto& id : ids) s += " " + id;
    return s;
  }
  std::vector<std::string> missing_;
};

class UnresolvedTypeError : public InputError {
 public:
  UnresolvedTypeError(std::string entity, std::string partial)
      : InputError("type label of " + entity + " did not resolve within depth cap: \"" + partial + "\""),
        entity_(std::move(entity)),
        partial_(std::move(partial)) {}
  const std::string& entity() const noexcept { return entity_; }
  const std::string& partial_label() const noexcept { return partial_; }

 private:
  std::string entity_;
  std::string partial_;
};

class AlignmentError : public InputError {
 public:
  explicit AlignmentError(const std::string& what) : InputError("alignment: " + what) {}
};

class UndefinedInputError : public InputError {
 public:
  explicit UndefinedInputError(const std::string& what) : InputError("undefined input: " + what) {}
};

class DependencyError : public InputError {
 public:
  DependencyError(std::string stage, const std::string& what)
      : InputError(what + " (re-run stage '" + stage + "')"), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

class RemapError : public InputError {
 public:
  explicit RemapError(const std::string& what) : InputError("remap: " + what) {}
};

class PerturbationError : public InputError {
 public:
  explicit PerturbationError(const std::string& what) : InputError("perturbation: " + what) {}
};

class CompletenessError : public InputError {
 public:
  explicit CompletenessError(const std::string& what) : InputError("rename plan incomplete: " + what) {}
};

class RequestError : public InputError {
 public:
  explicit RequestError(const std::string& what) : InputError("generation request: " + what) {}
};

class GateFailure : public Error {
 public:
  GateFailure(std::string reason, const std::string& detail)
      : Error(ErrorKind::gate, reason + ": " + detail), reason_(std::move(reason)) {}
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::string reason_;
};

class SamplingFailure : public Error {
 public:
  explicit SamplingFailure(const std::string& what) : Error(ErrorKind::gate, what) {}
};

class RenameFailure : public Error {
 public:
  RenameFailure(std::string entity, const std::string& what)
      : Error(ErrorKind::gate, "rename of " + entity + " failed: " + what), entity_(std::move(entity)) {}
  const std::string& entity() const noexcept { return entity_; }

 private:
  std::string entity_;
};

class TransportError : public Error {
 public:
  explicit TransportError(const std::string& what) : Error(ErrorKind::transport, what) {}
};

}  // namespace twinworld
