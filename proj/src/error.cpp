#include "statmodel/error.hpp"

namespace statmodel {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::UnsupportedConstruct: return "UnsupportedConstruct";
    case ErrorCode::MalformedAnnotation: return "MalformedAnnotation";
    case ErrorCode::UnknownAnnotationKey: return "UnknownAnnotationKey";
    case ErrorCode::NonAffineBound: return "NonAffineBound";
    case ErrorCode::NonAffineCondition: return "NonAffineCondition";
    case ErrorCode::EnumerationTooLarge: return "EnumerationTooLarge";
    case ErrorCode::UnboundParameter: return "UnboundParameter";
    case ErrorCode::NotAnElf: return "NotAnElf";
    case ErrorCode::MissingDebugInfo: return "MissingDebugInfo";
    case ErrorCode::UnsupportedDwarfVersion: return "UnsupportedDwarfVersion";
    case ErrorCode::CorruptLineProgram: return "CorruptLineProgram";
    case ErrorCode::UnparsableLine: return "UnparsableLine";
    case ErrorCode::MalformedArchDescription: return "MalformedArchDescription";
    case ErrorCode::ModelGap: return "ModelGap";
    case ErrorCode::AnnotationMismatch: return "AnnotationMismatch";
    case ErrorCode::DuplicateFunction: return "DuplicateFunction";
    case ErrorCode::UnresolvedCallee: return "UnresolvedCallee";
    case ErrorCode::UnknownFunction: return "UnknownFunction";
    case ErrorCode::SchemaVersionMismatch: return "SchemaVersionMismatch";
    case ErrorCode::MalformedModel: return "MalformedModel";
    case ErrorCode::ZeroDenominator: return "ZeroDenominator";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace statmodel
