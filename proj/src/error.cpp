#include "eea/error.hpp"

namespace eea {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::UnexpectedColumn: return "UnexpectedColumn";
    case ErrorCode::BadCategoryLevel: return "BadCategoryLevel";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::DuplicateDayId: return "DuplicateDayId";
    case ErrorCode::PairingViolation: return "PairingViolation";
    case ErrorCode::InsufficientSpan: return "InsufficientSpan";
    case ErrorCode::DegenerateConfig: return "DegenerateConfig";
    case ErrorCode::ProbabilityOutOfRange: return "ProbabilityOutOfRange";
    case ErrorCode::SingleClassTraining: return "SingleClassTraining";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::EmptyGrid: return "EmptyGrid";
    case ErrorCode::SingleClass: return "SingleClass";
    case ErrorCode::DegenerateReference: return "DegenerateReference";
    case ErrorCode::AllZeroWeights: return "AllZeroWeights";
    case ErrorCode::NonPositiveMean: return "NonPositiveMean";
    case ErrorCode::ZeroMean: return "ZeroMean";
    case ErrorCode::MisalignedPair: return "MisalignedPair";
    case ErrorCode::InSampleLeakage: return "InSampleLeakage";
    case ErrorCode::DegenerateResample: return "DegenerateResample";
    case ErrorCode::NonPositiveRR: return "NonPositiveRR";
    case ErrorCode::SingleModel: return "SingleModel";
    case ErrorCode::AllClipped: return "AllClipped";
    case ErrorCode::TooFewPerBin: return "TooFewPerBin";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::DegenerateTruth: return "DegenerateTruth";
    case ErrorCode::SingleClassReplicate: return "SingleClassReplicate";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::InsufficientModels: return "InsufficientModels";
    case ErrorCode::ConfigParse: return "ConfigParse";
    case ErrorCode::IoFailure: return "IoFailure";
  }
  return "UnknownError";
}

}  // namespace eea
