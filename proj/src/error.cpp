#include "morphalign/error.hpp"

namespace morphalign {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::io: return "io";
    case ErrorKind::parameter: return "parameter";
    case ErrorKind::format: return "format";
    case ErrorKind::geometry: return "geometry";
    case ErrorKind::numerical: return "numerical";
    case ErrorKind::range: return "range";
  }
  return "unknown";
}

}  // namespace morphalign
