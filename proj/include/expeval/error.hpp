#pragma once

#include <stdexcept>
#include <string>

namespace expeval {

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A ranking refers to a document the judgments do not know about, or a
/// document set is internally inconsistent.
struct JudgmentMismatchError : Error {
  using Error::Error;
};

/// Two vectors that must live over the same pool have different sizes.
struct DimensionError : Error {
  using Error::Error;
};

/// Exact enumeration was requested for a pool larger than the cap.
struct EnumerationCapError : Error {
  using Error::Error;
};

/// A policy's enumerated probabilities do not form a distribution.
struct PolicyIntegrityError : Error {
  using Error::Error;
};

/// Disparity normalization is undefined (pool of size <= 1).
struct DegenerateNormalizationError : Error {
  using Error::Error;
};

/// A curve has too few points for area computation.
struct InsufficientPointsError : Error {
  using Error::Error;
};

/// Generalized entropy is undefined (no exposure mass on relevant documents).
struct UndefinedEntropyError : Error {
  using Error::Error;
};

/// A relevance-dependent quantity was requested but no document is relevant.
struct EmptyRelevanceError : Error {
  using Error::Error;
};

/// Invalid configuration or parameters.
struct ConfigurationError : Error {
  using Error::Error;
};

/// All retrieval scores collapsed to zero after preprocessing.
struct DegenerateScoresError : Error {
  using Error::Error;
};

/// Training produced a non-finite loss.
struct DivergenceError : Error {
  using Error::Error;
};

/// Malformed input file. Messages carry the 1-based line number.
struct ParseError : Error {
  using Error::Error;
};

}  // namespace expeval
