#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace gcedmd {

// Malformed input: files, configs, flags, refused requests. CLI exit code 1.
class io_error : public std::runtime_error {
 public:
  io_error(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

// Computation cannot produce a valid result: non-finite state, failed
// eigensolve, degenerate eigenfunction, non-equivariant input. CLI exit code 2.
class numeric_error : public std::runtime_error {
 public:
  numeric_error(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

inline void require_input(bool cond, const std::string& code, const std::string& msg) {
  if (!cond) throw io_error(code, msg);
}

inline void require_numeric(bool cond, const std::string& code, const std::string& msg) {
  if (!cond) throw numeric_error(code, msg);
}

}  // namespace gcedmd
