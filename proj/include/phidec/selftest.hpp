#ifndef PHIDEC_SELFTEST_HPP
#define PHIDEC_SELFTEST_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "phidec/decomp.hpp"

namespace phidec {

// random instance generators shared by the self-test and the test suites

SuperOperator random_cp_map(Index d, Index h, Rng& rng, Index rank = -1);
/// One of (id), (t), (id, t), (U.U^dagger), (id, U.U^dagger), (t, U.U^dagger).
MapSequence random_sequence(Index d, Rng& rng);
/// sum_k psi_k o phi_k with random CP psi_k, so the target is feasible by construction.
SuperOperator random_member(const MapSequence& seq, Index h, Rng& rng, Index rank = -1);

struct SelftestConfig {
  bool full = false;
  std::uint64_t seed = 0;
  FeasibilityOptions options;
  /// Instances with an "expect" field are checked against it when set.
  std::optional<std::filesystem::path> corpus_dir;
};

struct SuiteResult {
  std::string name;
  int cases = 0;
  int failures = 0;
  double worst = 0.0;  // suite-specific worst-case quantity
  std::string detail;

  bool passed() const { return failures == 0; }
};

std::vector<SuiteResult> run_selftest(const SelftestConfig& config);

/// One line per suite plus a total; contains no timings so equal seeds give equal text.
std::string format_summary(const std::vector<SuiteResult>& results);

}  // namespace phidec

#endif  // PHIDEC_SELFTEST_HPP
