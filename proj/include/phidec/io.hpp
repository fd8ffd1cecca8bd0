#ifndef PHIDEC_IO_HPP
#define PHIDEC_IO_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "phidec/decomp.hpp"

namespace phidec {

inline constexpr const char* kToolVersion = "0.3.0";

using json = nlohmann::json;

/// Instance or report rejected while parsing; field() is a JSON pointer such as /sequence/1/kind.
class ParseError : public Error {
 public:
  ParseError(const std::string& field, const std::string& what)
      : Error(field.empty() ? what : field + ": " + what), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct Instance {
  std::string name;
  SuperOperator target;
  MapSequence sequence;
  FeasibilityOptions options;
  std::optional<std::uint64_t> seed;
};

// complex scalars are [re, im]; matrices are row-major nested arrays of them
json to_json(const Matrix& m);
Matrix matrix_from_json(const json& j, const std::string& field);

/// Accepts the instance schema; throws ParseError naming the offending field and
/// NotHermitianError (with the defect) for a non-Hermitian target or non-* entry.
Instance parse_instance(const json& j);
Instance load_instance(const std::filesystem::path& path);

/// Writes an instance with every sequence entry in "custom" form.
json instance_to_json(const Instance& inst);

struct VerdictReport {
  Verdict verdict = Verdict::undetermined;
  std::optional<DecompositionCertificate> certificate;
  std::optional<InfeasibilityWitness> witness;
  double residual = 0.0;         // certificate: ||sum P_k(X_k) - J||_F
  double min_eigenvalue = 0.0;   // certificate: min_k lambda_min(X_k)
  double pairing = 0.0;          // witness: <W, J>
  double min_dual_margin = 0.0;  // witness: min_k lambda_min(P_k^*(W))
  int iterations = 0;
  bool kernel_condition_holds = true;
  double tail_slack = 0.0;
  double wall_time = 0.0;
  std::uint64_t seed = 0;
  std::string version = kToolVersion;
  std::string diagnostics;
};

VerdictReport make_report(const FeasibilityResult& res, const FeasibilityProblem& prob, double wall_time,
                          std::uint64_t seed);

json to_json(const VerdictReport& r);
VerdictReport report_from_json(const json& j);

/// The payload of a feasible/infeasible report re-verified against prob; undetermined
/// reports carry nothing to check and return true.
bool reverify(const VerdictReport& r, const FeasibilityProblem& prob);

json read_json_file(const std::filesystem::path& path);
void write_json_file(const json& j, const std::filesystem::path& path);

}  // namespace phidec

#endif  // PHIDEC_IO_HPP
