#include "openden/error.hpp"

namespace openden {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::shape: return "shape error";
    case ErrorKind::index: return "index error";
    case ErrorKind::numerical: return "numerical error";
    case ErrorKind::config: return "config error";
    case ErrorKind::usage: return "usage error";
    case ErrorKind::protocol: return "protocol error";
    case ErrorKind::data: return "data error";
    case ErrorKind::io: return "io error";
  }
  return "error";
}

int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::config:
    case ErrorKind::usage:
      return 2;
    case ErrorKind::data:
    case ErrorKind::io:
    case ErrorKind::shape:
      return 3;
    case ErrorKind::numerical:
      return 4;
    case ErrorKind::index:
    case ErrorKind::protocol:
      return 1;
  }
  return 1;
}

}  // namespace openden
