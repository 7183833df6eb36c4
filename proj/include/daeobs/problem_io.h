#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "daeobs/associated_lti.h"
#include "daeobs/dae_model.h"
#include "daeobs/linalg.h"
#include "daeobs/lq_riccati.h"
#include "daeobs/observer.h"
#include "daeobs/signal.h"

namespace daeobs {

using Json = nlohmann::ordered_json;

inline constexpr const char* kToolVersion = "0.1.0";

enum class ProblemKind { kEstimation, kControl };

/// Optional settings carried by a problem file; command-line flags take
/// precedence.
struct ProblemOptions {
  std::optional<double> rank_tol;
  std::optional<double> are_tol;
  std::optional<double> step;
  std::optional<double> horizon;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
};

/// Parsed problem document:
///
///   {"kind": "estimation" | "control",
///    "matrices": {"F": {"rows": 2, "cols": 2, "data": [row-major values]}, ...},
///    "options": {"rank_tol": 1e-10, ...}}
///
/// Estimation problems need F, A, H, Q, R, Q0, ell (n×1); control problems
/// need E, A_hat, B_hat, Q, R, Q0.
struct ProblemFile {
  ProblemKind kind = ProblemKind::kEstimation;
  std::map<std::string, Matrix> matrices;
  ProblemOptions options;
  /// SHA-256 of the raw document text.
  std::string digest;

  const Matrix& matrix(const std::string& name) const;
};

/// Throws InputError on malformed JSON, missing or extra-dimensional
/// matrices, non-numeric or non-finite entries, and unknown kinds.
ProblemFile parse_problem(const std::string& text);
ProblemFile load_problem(const std::string& path);

/// Problem data with dimension and definiteness checks applied.
EstimationProblem to_estimation_problem(const ProblemFile& file);

struct ControlProblem {
  DaeSystem sys;
  LqWeights weights;
};
ControlProblem to_control_problem(const ProblemFile& file);

std::string sha256_hex(const std::string& data);

Json matrix_to_json(const Matrix& m);
/// Reads {"rows", "cols", "data"}; `name` is used in error messages.
Matrix matrix_from_json(const Json& j, const std::string& name);

Json checks_to_json(const std::vector<InvariantCheck>& checks);
Json spectrum_to_json(const std::vector<std::complex<double>>& spectrum);

/// Serializes a problem back to the document format (used to write
/// fixtures and to test round trips).
Json problem_to_json(const ProblemFile& file);

/// Writes the trace CSV: header `t,y_1,...,y_p,estimate,true_value,error`,
/// every value as %.12e, LF line endings.
void write_trace_csv(std::ostream& out, const SampledSignal& y,
                     const SampledSignal& estimate, const SampledSignal& truth,
                     const SampledSignal& error);

/// Reads a whole file; throws InputError when it cannot be opened.
std::string read_text_file(const std::string& path);
/// Writes a file in binary mode (no newline translation).
void write_text_file(const std::string& path, const std::string& text);

}  // namespace daeobs
