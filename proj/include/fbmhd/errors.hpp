#pragma once

#include <stdexcept>
#include <string>

namespace fbmhd {

/// Process exit codes used by the command-line driver.
enum class ExitCode : int {
  ok = 0,
  config = 2,
  numerics = 3,
  verification = 4,
  io = 5,
};

/// Base class for domain errors that map onto an exit code.
class Error : public std::runtime_error {
 public:
  Error(ExitCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  [[nodiscard]] ExitCode code() const noexcept { return code_; }

 private:
  ExitCode code_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ExitCode::config, what) {}
};

/// CFL violation, Jacobian floor, overflow or non-finite values.
class NumericsError : public Error {
 public:
  explicit NumericsError(const std::string& what) : Error(ExitCode::numerics, what) {}
};

class VerificationError : public Error {
 public:
  explicit VerificationError(const std::string& what) : Error(ExitCode::verification, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ExitCode::io, what) {}
};

}  // namespace fbmhd
