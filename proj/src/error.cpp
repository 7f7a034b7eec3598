#include "idnet/error.hpp"

namespace idnet {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::input:
      return "input";
    case ErrorKind::numerical:
      return "numerical";
    case ErrorKind::io:
      return "io";
  }
  return "unknown";
}

}  // namespace idnet
