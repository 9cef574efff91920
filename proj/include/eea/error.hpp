#pragma once

#include <stdexcept>
#include <string>

namespace eea {

enum class ErrorCode {
  // data ingestion / pairing
  MissingColumn,
  UnexpectedColumn,
  BadCategoryLevel,
  NonFiniteValue,
  DuplicateDayId,
  PairingViolation,
  InsufficientSpan,
  DegenerateConfig,
  ProbabilityOutOfRange,
  // model zoo
  SingleClassTraining,
  NonConvergence,
  SchemaMismatch,
  EmptyGrid,
  // metrics
  SingleClass,
  DegenerateReference,
  AllZeroWeights,
  NonPositiveMean,
  // attribution
  ZeroMean,
  MisalignedPair,
  InSampleLeakage,
  DegenerateResample,
  // multiplicity
  NonPositiveRR,
  SingleModel,
  // shift diagnostics
  AllClipped,
  TooFewPerBin,
  RankDeficient,
  // simulation harness
  DegenerateTruth,
  SingleClassReplicate,
  ZeroVariance,
  InsufficientModels,
  // CLI / orchestration
  ConfigParse,
  IoFailure,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace eea
