#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace logsieve {

// Base for every error the library raises on purpose. The CLI maps each
// subclass onto an exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller misuse: mismatched signatures, bad config values, unknown flags.
class UsageError : public Error {
 public:
  using Error::Error;
};

// Unreadable or malformed input. `offset` is a byte offset for raw streams
// or a 1-based line number for record files; position() says which.
class InputError : public Error {
 public:
  enum class Position { kNone, kByteOffset, kLine };

  explicit InputError(const std::string& what)
      : Error(what), message_(what), position_(Position::kNone), offset_(0) {}
  InputError(const std::string& what, Position position, std::uint64_t offset)
      : Error(what + (position == Position::kLine
                          ? " (line " + std::to_string(offset) + ")"
                          : position == Position::kByteOffset
                                ? " (byte offset " + std::to_string(offset) + ")"
                                : std::string())),
        message_(what),
        position_(position),
        offset_(offset) {}

  // Message without the position suffix.
  const std::string& message() const { return message_; }
  Position position() const { return position_; }
  std::uint64_t offset() const { return offset_; }

 private:
  std::string message_;
  Position position_;
  std::uint64_t offset_;
};

// An internal invariant did not hold. Always a bug.
class InvariantError : public Error {
 public:
  using Error::Error;
};

}  // namespace logsieve
