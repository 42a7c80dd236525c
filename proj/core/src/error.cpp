#include "ampeq/error.hpp"

namespace ampeq {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::Dimension: return "dimension error";
    case ErrorCode::BlowUp: return "blow-up";
    case ErrorCode::SingularOperator: return "singular operator";
    case ErrorCode::Domain: return "domain error";
    case ErrorCode::InvalidModel: return "invalid model";
    case ErrorCode::NotPsd: return "matrix not positive semidefinite";
    case ErrorCode::Integration: return "integration error";
    case ErrorCode::Alignment: return "alignment error";
    case ErrorCode::Precondition: return "precondition violated";
    case ErrorCode::Config: return "config error";
    case ErrorCode::Io: return "i/o error";
  }
  return "error";
}

}  // namespace ampeq
