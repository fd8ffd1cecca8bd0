#include "phidec/sdpa.hpp"

#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace phidec {

Eigen::MatrixXd real_embedding(const Matrix& x) {
  const Index n = x.rows();
  Eigen::MatrixXd y(2 * n, 2 * n);
  y.topLeftCorner(n, n) = x.real();
  y.bottomRightCorner(n, n) = x.real();
  y.topRightCorner(n, n) = -x.imag();
  y.bottomLeftCorner(n, n) = x.imag();
  return y;
}

SdpaProblem build_sdpa(const FeasibilityProblem& prob) {
  const Index dim = prob.choi_dim();
  const Index n = dim * dim;
  const Index m = prob.terms();
  const Matrix& j = prob.target().choi();

  SdpaProblem sdp;
  sdp.block_sizes.assign(static_cast<size_t>(m), static_cast<int>(2 * dim));

  // coefficient of Y(u, v) in a real functional of the embedded block
  std::vector<Eigen::MatrixXd> g(static_cast<size_t>(m));

  auto emit = [&](double rhs) {
    const int cons = static_cast<int>(sdp.rhs.size()) + 1;
    sdp.rhs.push_back(rhs);
    for (Index k = 0; k < m; ++k) {
      const Eigen::MatrixXd f = 0.5 * (g[static_cast<size_t>(k)] + g[static_cast<size_t>(k)].transpose());
      for (Index u = 0; u < f.rows(); ++u)
        for (Index v = u; v < f.cols(); ++v)
          if (f(u, v) != 0.0)
            sdp.entries.push_back({cons, static_cast<int>(k + 1), static_cast<int>(u + 1), static_cast<int>(v + 1), f(u, v)});
    }
  };

  auto accumulate = [&](Index row, bool imaginary) {
    for (Index k = 0; k < m; ++k) {
      auto& gk = g[static_cast<size_t>(k)];
      gk.setZero(2 * dim, 2 * dim);
      const Matrix& p = prob.precomps()[static_cast<size_t>(k)].op.matrix();
      for (Index e = 0; e < n; ++e) {
        const cplx c = p(row, e);
        if (c == cplx(0.0)) continue;
        const Index s = e / dim;
        const Index t = e % dim;
        // Re(c x) = Re(c) A - Im(c) B,  Im(c x) = Im(c) A + Re(c) B, with x = A + iB
        const double coef_a = imaginary ? c.imag() : c.real();
        const double coef_b = imaginary ? c.real() : -c.imag();
        gk(s, t) += 0.5 * coef_a;
        gk(dim + s, dim + t) += 0.5 * coef_a;
        gk(dim + s, t) += 0.5 * coef_b;
        gk(s, dim + t) -= 0.5 * coef_b;
      }
    }
  };

  for (Index r = 0; r < dim; ++r)
    for (Index c = r; c < dim; ++c) {
      accumulate(r * dim + c, false);
      emit(j(r, c).real());
    }
  for (Index r = 0; r < dim; ++r)
    for (Index c = r + 1; c < dim; ++c) {
      accumulate(r * dim + c, true);
      emit(j(r, c).imag());
    }
  return sdp;
}

void write_sdpa(const SdpaProblem& sdp, std::ostream& os) {
  os << "\"phidec decomposability feasibility problem (objective F0 = 0)\n";
  os << sdp.rhs.size() << " = mDIM\n";
  os << sdp.block_sizes.size() << " = nBLOCK\n";
  for (size_t b = 0; b < sdp.block_sizes.size(); ++b) os << (b ? " " : "") << sdp.block_sizes[b];
  os << " = bLOCKsTRUCT\n";
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (size_t c = 0; c < sdp.rhs.size(); ++c) os << (c ? " " : "") << sdp.rhs[c];
  os << "\n";
  for (const auto& e : sdp.entries)
    os << e.constraint << " " << e.block << " " << e.i << " " << e.j << " " << e.value << "\n";
}

namespace {

// Strips SDPA decorations: everything after '=' and the punctuation ",(){}".
std::string clean_line(std::string line) {
  if (auto pos = line.find('='); pos != std::string::npos) line.erase(pos);
  for (char& ch : line)
    if (ch == ',' || ch == '(' || ch == ')' || ch == '{' || ch == '}') ch = ' ';
  return line;
}

}  // namespace

SdpaProblem read_sdpa(std::istream& is) {
  std::string line;
  std::ostringstream body;
  bool header_done = false;
  while (std::getline(is, line)) {
    if (!header_done && (line.empty() || line[0] == '"' || line[0] == '*')) continue;
    header_done = true;
    body << clean_line(line) << "\n";
  }
  std::istringstream in(body.str());
  SdpaProblem sdp;
  long m = 0, nblocks = 0;
  if (!(in >> m >> nblocks) || m < 0 || nblocks <= 0) throw Error("read_sdpa: malformed header");
  for (long b = 0; b < nblocks; ++b) {
    int size = 0;
    if (!(in >> size)) throw Error("read_sdpa: malformed block structure");
    if (size <= 0) throw Error("read_sdpa: diagonal (LP) blocks are not supported");
    sdp.block_sizes.push_back(size);
  }
  for (long c = 0; c < m; ++c) {
    double v = 0;
    if (!(in >> v)) throw Error("read_sdpa: malformed constraint vector");
    sdp.rhs.push_back(v);
  }
  SdpaProblem::Entry e{};
  while (in >> e.constraint >> e.block >> e.i >> e.j >> e.value) {
    if (e.constraint < 0 || e.constraint > m || e.block < 1 || e.block > nblocks)
      throw Error("read_sdpa: entry index out of range");
    const int size = sdp.block_sizes[static_cast<size_t>(e.block - 1)];
    if (e.i < 1 || e.j < 1 || e.i > size || e.j > size) throw Error("read_sdpa: entry position out of range");
    sdp.entries.push_back(e);
  }
  if (!in.eof()) throw Error("read_sdpa: trailing garbage in entry list");
  return sdp;
}

void export_sdpa(const FeasibilityProblem& prob, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw Error("export_sdpa: cannot open " + path.string());
  write_sdpa(build_sdpa(prob), os);
  if (!os) throw Error("export_sdpa: write failed for " + path.string());
}

SdpaProblem import_sdpa(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error("import_sdpa: cannot open " + path.string());
  return read_sdpa(is);
}

std::vector<std::vector<Eigen::MatrixXd>> constraint_matrices(const SdpaProblem& sdp) {
  std::vector<std::vector<Eigen::MatrixXd>> out(sdp.rhs.size() + 1);
  for (auto& per_block : out)
    for (int size : sdp.block_sizes) per_block.push_back(Eigen::MatrixXd::Zero(size, size));
  for (const auto& e : sdp.entries) {
    auto& f = out[static_cast<size_t>(e.constraint)][static_cast<size_t>(e.block - 1)];
    f(e.i - 1, e.j - 1) = e.value;
    f(e.j - 1, e.i - 1) = e.value;
  }
  return out;
}

}  // namespace phidec
