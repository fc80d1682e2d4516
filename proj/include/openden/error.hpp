#pragma once

#include <stdexcept>
#include <string>

namespace openden {

enum class ErrorKind {
  shape,
  index,
  numerical,
  config,
  usage,
  protocol,
  data,
  io,
};

const char* to_string(ErrorKind kind) noexcept;

// Process exit code for a failure of the given kind (0 is reserved for success).
int exit_code(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

#define OPENDEN_DEFINE_ERROR(Name, Kind)                                  \
  class Name : public Error {                                             \
   public:                                                                \
    explicit Name(const std::string& what) : Error(ErrorKind::Kind, what) {} \
  };

OPENDEN_DEFINE_ERROR(ShapeError, shape)
OPENDEN_DEFINE_ERROR(IndexError, index)
OPENDEN_DEFINE_ERROR(NumericalError, numerical)
OPENDEN_DEFINE_ERROR(ConfigError, config)
OPENDEN_DEFINE_ERROR(UsageError, usage)
OPENDEN_DEFINE_ERROR(ProtocolError, protocol)
OPENDEN_DEFINE_ERROR(DataError, data)
OPENDEN_DEFINE_ERROR(IoError, io)

#undef OPENDEN_DEFINE_ERROR

}  // namespace openden
