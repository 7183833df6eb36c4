#include "daeobs/problem_io.h"

#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "daeobs/errors.h"

namespace daeobs {
namespace {

const char* kind_name(ProblemKind kind) {
  return kind == ProblemKind::kEstimation ? "estimation" : "control";
}

void expect_shape(const ProblemFile& file, const std::string& name, int rows, int cols) {
  const Matrix& m = file.matrix(name);
  if (m.rows() != rows || m.cols() != cols) {
    throw InputError(fmt::format("{} must be {}x{}, got {}x{}", name, rows, cols,
                                 m.rows(), m.cols()));
  }
}

template <typename T>
std::optional<T> optional_number(const Json& options, const char* key) {
  if (!options.contains(key)) return std::nullopt;
  const Json& v = options.at(key);
  if (!v.is_number()) throw InputError(fmt::format("option '{}' must be a number", key));
  if constexpr (std::is_floating_point_v<T>) {
    const double d = v.get<double>();
    if (!std::isfinite(d) || d <= 0.0) {
      throw InputError(fmt::format("option '{}' must be positive and finite", key));
    }
    return d;
  } else {
    if (!v.is_number_integer() || v.get<long long>() < 0) {
      throw InputError(fmt::format("option '{}' must be a non-negative integer", key));
    }
    return static_cast<T>(v.get<unsigned long long>());
  }
}

}  // namespace

const Matrix& ProblemFile::matrix(const std::string& name) const {
  const auto it = matrices.find(name);
  if (it == matrices.end()) {
    throw InputError(fmt::format("{} problem requires matrix '{}'", kind_name(kind), name));
  }
  return it->second;
}

Json matrix_to_json(const Matrix& m) {
  Json data = Json::array();
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
  }
  return Json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Matrix matrix_from_json(const Json& j, const std::string& name) {
  if (!j.is_object() || !j.contains("rows") || !j.contains("cols") || !j.contains("data")) {
    throw InputError(fmt::format("matrix '{}' needs \"rows\", \"cols\" and \"data\"", name));
  }
  const Json& rows = j.at("rows");
  const Json& cols = j.at("cols");
  const Json& data = j.at("data");
  if (!rows.is_number_integer() || !cols.is_number_integer() || rows.get<long long>() < 0 ||
      cols.get<long long>() < 0) {
    throw InputError(fmt::format("matrix '{}': rows and cols must be non-negative integers",
                                 name));
  }
  const auto r = rows.get<long long>();
  const auto c = cols.get<long long>();
  if (!data.is_array() || static_cast<long long>(data.size()) != r * c) {
    throw InputError(fmt::format("matrix '{}': data must be an array of {} numbers", name,
                                 r * c));
  }
  Matrix m(r, c);
  for (long long i = 0; i < r; ++i) {
    for (long long jj = 0; jj < c; ++jj) {
      const Json& v = data.at(i * c + jj);
      if (!v.is_number()) {
        throw InputError(fmt::format("matrix '{}': entry ({}, {}) is not a number", name, i, jj));
      }
      const double d = v.get<double>();
      if (!std::isfinite(d)) {
        throw InputError(fmt::format("matrix '{}': entry ({}, {}) is not finite", name, i, jj));
      }
      m(i, jj) = d;
    }
  }
  return m;
}

ProblemFile parse_problem(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw InputError(fmt::format("problem file is not valid JSON: {}", e.what()));
  }
  if (!doc.is_object()) throw InputError("problem file must be a JSON object");
  ProblemFile file;
  file.digest = sha256_hex(text);

  if (!doc.contains("kind") || !doc.at("kind").is_string()) {
    throw InputError("problem file needs a string \"kind\"");
  }
  const std::string kind = doc.at("kind").get<std::string>();
  if (kind == "estimation") {
    file.kind = ProblemKind::kEstimation;
  } else if (kind == "control") {
    file.kind = ProblemKind::kControl;
  } else {
    throw InputError(fmt::format("unknown problem kind '{}'", kind));
  }

  if (!doc.contains("matrices") || !doc.at("matrices").is_object()) {
    throw InputError("problem file needs a \"matrices\" object");
  }
  for (const auto& [name, value] : doc.at("matrices").items()) {
    file.matrices.emplace(name, matrix_from_json(value, name));
  }
  for (const char* name : file.kind == ProblemKind::kEstimation
                              ? std::vector<const char*>{"F", "A", "H", "Q", "R", "Q0", "ell"}
                              : std::vector<const char*>{"E", "A_hat", "B_hat", "Q", "R", "Q0"}) {
    file.matrix(name);
  }

  if (doc.contains("options")) {
    const Json& opts = doc.at("options");
    if (!opts.is_object()) throw InputError("\"options\" must be an object");
    file.options.rank_tol = optional_number<double>(opts, "rank_tol");
    file.options.are_tol = optional_number<double>(opts, "are_tol");
    file.options.step = optional_number<double>(opts, "step");
    file.options.horizon = optional_number<double>(opts, "horizon");
    file.options.seed = optional_number<std::uint64_t>(opts, "seed");
    if (auto trials = optional_number<std::uint64_t>(opts, "trials")) {
      file.options.trials = static_cast<int>(*trials);
    }
  }
  return file;
}

ProblemFile load_problem(const std::string& path) { return parse_problem(read_text_file(path)); }

EstimationProblem to_estimation_problem(const ProblemFile& file) {
  if (file.kind != ProblemKind::kEstimation) {
    throw InputError("expected an estimation problem (kind \"estimation\")");
  }
  const Matrix& f = file.matrix("F");
  const int n = static_cast<int>(f.rows());
  expect_shape(file, "F", n, n);
  expect_shape(file, "A", n, n);
  const int p = static_cast<int>(file.matrix("H").rows());
  expect_shape(file, "H", p, n);
  expect_shape(file, "Q", n, n);
  expect_shape(file, "R", p, p);
  expect_shape(file, "Q0", n, n);
  expect_shape(file, "ell", n, 1);
  EstimationProblem prob{ObservedDae(f, file.matrix("A"), file.matrix("H")),
                         file.matrix("Q0"), file.matrix("Q"), file.matrix("R"),
                         file.matrix("ell").col(0)};
  prob.validate();
  return prob;
}

ControlProblem to_control_problem(const ProblemFile& file) {
  if (file.kind != ProblemKind::kControl) {
    throw InputError("expected a control problem (kind \"control\")");
  }
  const Matrix& e = file.matrix("E");
  const int n = static_cast<int>(e.rows());
  expect_shape(file, "E", n, n);
  expect_shape(file, "A_hat", n, n);
  const int m = static_cast<int>(file.matrix("B_hat").cols());
  expect_shape(file, "B_hat", n, m);
  ControlProblem prob{DaeSystem(e, file.matrix("A_hat"), file.matrix("B_hat")),
                      LqWeights{file.matrix("Q"), file.matrix("R"), file.matrix("Q0")}};
  prob.weights.validate(n, m);
  return prob;
}

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 digest failed");
  }
  std::string out;
  out.reserve(2 * length);
  for (unsigned int i = 0; i < length; ++i) out += fmt::format("{:02x}", digest[i]);
  return out;
}

Json checks_to_json(const std::vector<InvariantCheck>& checks) {
  Json out = Json::array();
  for (const auto& c : checks) {
    out.push_back({{"name", c.name}, {"value", c.value}, {"tol", c.tol}, {"pass", c.pass}});
  }
  return out;
}

Json spectrum_to_json(const std::vector<std::complex<double>>& spectrum) {
  Json out = Json::array();
  for (const auto& z : spectrum) out.push_back({z.real(), z.imag()});
  return out;
}

Json problem_to_json(const ProblemFile& file) {
  Json matrices = Json::object();
  for (const auto& [name, m] : file.matrices) matrices[name] = matrix_to_json(m);
  Json doc{{"kind", kind_name(file.kind)}, {"matrices", std::move(matrices)}};
  Json opts = Json::object();
  const ProblemOptions& o = file.options;
  if (o.rank_tol) opts["rank_tol"] = *o.rank_tol;
  if (o.are_tol) opts["are_tol"] = *o.are_tol;
  if (o.step) opts["step"] = *o.step;
  if (o.horizon) opts["horizon"] = *o.horizon;
  if (o.seed) opts["seed"] = *o.seed;
  if (o.trials) opts["trials"] = *o.trials;
  if (!opts.empty()) doc["options"] = std::move(opts);
  return doc;
}

void write_trace_csv(std::ostream& out, const SampledSignal& y,
                     const SampledSignal& estimate, const SampledSignal& truth,
                     const SampledSignal& error) {
  const int n = y.size();
  if (estimate.size() != n || truth.size() != n || error.size() != n) {
    throw InputError("write_trace_csv: traces have different lengths");
  }
  std::string header = "t";
  for (int i = 0; i < y.dim(); ++i) header += fmt::format(",y_{}", i + 1);
  header += ",estimate,true_value,error\n";
  out << header;
  std::string line;
  for (int j = 0; j < n; ++j) {
    line = fmt::format("{:.12e}", y.times[j]);
    for (int i = 0; i < y.dim(); ++i) line += fmt::format(",{:.12e}", y.values(i, j));
    line += fmt::format(",{:.12e},{:.12e},{:.12e}\n", estimate.values(0, j),
                        truth.values(0, j), error.values(0, j));
    out << line;
  }
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(fmt::format("cannot open '{}'", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError(fmt::format("cannot write '{}'", path));
  out << text;
  if (!out) throw InputError(fmt::format("failed writing '{}'", path));
}

}  // namespace daeobs
