#ifndef PHIDEC_SDPA_HPP
#define PHIDEC_SDPA_HPP

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "phidec/decomp.hpp"

namespace phidec {

/// A real SDP feasibility problem in SDPA sparse form:
///   find Y = diag(Y_1, ..., Y_m) PSD with tr(F_c Y) = rhs_c for every constraint c.
/// The objective matrix F_0 is zero. Indices are 1-based as in the file format,
/// and only the upper triangle (i <= j) of each symmetric F_c is stored.
struct SdpaProblem {
  struct Entry {
    int constraint;  // 1..m (0 would be the objective, never emitted)
    int block;       // 1..blocks
    int i;
    int j;
    double value;
    bool operator==(const Entry&) const = default;
  };

  std::vector<int> block_sizes;
  std::vector<double> rhs;
  std::vector<Entry> entries;

  bool operator==(const SdpaProblem&) const = default;
};

/// Real symmetric embedding [[Re X, -Im X], [Im X, Re X]] of a complex matrix.
Eigen::MatrixXd real_embedding(const Matrix& x);

/// Encodes sum_k P_k(X_k) = J(phi) with one 2dh x 2dh real block per X_k.
/// Constraints run over the upper triangle (r <= c) of the equation: the real part for
/// every (r, c), then the imaginary part for r < c, in row-major order.
SdpaProblem build_sdpa(const FeasibilityProblem& prob);

void write_sdpa(const SdpaProblem& sdp, std::ostream& os);
SdpaProblem read_sdpa(std::istream& is);

void export_sdpa(const FeasibilityProblem& prob, const std::filesystem::path& path);
SdpaProblem import_sdpa(const std::filesystem::path& path);

/// Dense constraint matrices F_c, per block, rebuilt from the sparse entries.
std::vector<std::vector<Eigen::MatrixXd>> constraint_matrices(const SdpaProblem& sdp);

}  // namespace phidec

#endif  // PHIDEC_SDPA_HPP
