#include "phidec/io.hpp"

#include <cmath>
#include <fstream>

namespace phidec {

namespace {

double number_at(const json& j, const std::string& field) {
  if (!j.is_number()) throw ParseError(field, "expected a number");
  return j.get<double>();
}

cplx complex_from_json(const json& j, const std::string& field) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_array() || j.size() != 2) throw ParseError(field, "expected [re, im]");
  return {number_at(j[0], field + "/0"), number_at(j[1], field + "/1")};
}

Index dimension_at(const json& obj, const char* key) {
  const std::string field = std::string("/") + key;
  if (!obj.contains(key)) throw ParseError(field, "missing");
  const json& v = obj.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 1) throw ParseError(field, "expected a positive integer");
  return static_cast<Index>(v.get<long long>());
}

Matrix sized_matrix(const json& j, const std::string& field, Index rows, Index cols) {
  Matrix m = matrix_from_json(j, field);
  if (m.rows() != rows || m.cols() != cols)
    throw ParseError(field, "expected " + std::to_string(rows) + "x" + std::to_string(cols) + " matrix, got " +
                                std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  return m;
}

SuperOperator parse_entry(const json& e, Index d, const std::string& field) {
  if (!e.is_object()) throw ParseError(field, "expected an object");
  if (!e.contains("kind") || !e["kind"].is_string()) throw ParseError(field + "/kind", "missing or not a string");
  const std::string kind = e["kind"].get<std::string>();
  if (kind == "identity") return SuperOperator::identity(d);
  if (kind == "transpose") return SuperOperator::transpose(d);
  if (kind == "unitary_conjugation") {
    if (!e.contains("matrix")) throw ParseError(field + "/matrix", "missing");
    Matrix u = sized_matrix(e["matrix"], field + "/matrix", d, d);
    const double defect = (u.adjoint() * u - Matrix::Identity(d, d)).norm();
    if (defect > 1e-8) throw ParseError(field + "/matrix", "not unitary (defect " + std::to_string(defect) + ")");
    return SuperOperator::conjugation(u);
  }
  if (kind == "custom") {
    if (!e.contains("coeffs")) throw ParseError(field + "/coeffs", "missing");
    SuperOperator phi(d, d, sized_matrix(e["coeffs"], field + "/coeffs", d * d, d * d));
    if (!phi.is_star_map()) throw NotHermitianError(field + ": entry is not a *-map", phi.star_defect());
    return phi;
  }
  throw ParseError(field + "/kind", "unknown kind '" + kind + "'");
}

void parse_options(const json& o, FeasibilityOptions& opt, std::optional<std::uint64_t>& seed) {
  if (!o.is_object()) throw ParseError("/options", "expected an object");
  auto tolerance = [&](const char* key, double& dst) {
    if (!o.contains(key)) return;
    const double v = number_at(o[key], std::string("/options/") + key);
    if (!(v >= 0) || !std::isfinite(v)) throw ParseError(std::string("/options/") + key, "must be a finite non-negative number");
    dst = v;
  };
  auto budget = [&](const char* key, int& dst) {
    if (!o.contains(key)) return;
    const json& v = o[key];
    if (!v.is_number_integer() || v.get<long long>() < 1) throw ParseError(std::string("/options/") + key, "expected a positive integer");
    dst = static_cast<int>(v.get<long long>());
  };
  tolerance("tol", opt.feas_rel_tol);
  tolerance("feas_rel_tol", opt.feas_rel_tol);
  tolerance("psd_tol", opt.psd_tol);
  tolerance("kernel_tol", opt.kernel_tol);
  tolerance("pairing_tol", opt.pairing_tol);
  tolerance("dual_tol", opt.dual_tol);
  budget("max_iter", opt.max_iter);
  budget("stall_window", opt.stall_window);
  if (!(opt.feas_rel_tol > 0)) throw ParseError("/options/tol", "must be positive");
  if (o.contains("seed")) {
    const json& sv = o["seed"];
    if (!sv.is_number_unsigned() && !(sv.is_number_integer() && sv.get<long long>() >= 0))
      throw ParseError("/options/seed", "expected a non-negative integer");
    seed = o["seed"].get<std::uint64_t>();
  }
}

}  // namespace

json to_json(const Matrix& m) {
  json rows = json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) throw ParseError(field, "expected a non-empty array of rows");
  const Index rows = static_cast<Index>(j.size());
  if (!j[0].is_array() || j[0].empty()) throw ParseError(field + "/0", "expected a non-empty row");
  const Index cols = static_cast<Index>(j[0].size());
  Matrix m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    const std::string rf = field + "/" + std::to_string(r);
    const json& row = j[static_cast<size_t>(r)];
    if (!row.is_array() || static_cast<Index>(row.size()) != cols) throw ParseError(rf, "ragged row");
    for (Index c = 0; c < cols; ++c) m(r, c) = complex_from_json(row[static_cast<size_t>(c)], rf + "/" + std::to_string(c));
  }
  return m;
}

Instance parse_instance(const json& j) {
  if (!j.is_object()) throw ParseError("", "instance must be a JSON object");
  const Index d = dimension_at(j, "d");
  const Index h = dimension_at(j, "h");

  if (!j.contains("target")) throw ParseError("/target", "missing");
  const Matrix choi = sized_matrix(j["target"], "/target", d * h, d * h);
  const double defect = hermitian_defect(choi);
  if (defect > kHermitianSymmetrizeTol * std::max(1.0, choi.norm()))
    throw NotHermitianError("/target: Choi matrix is not Hermitian", defect);
  SuperOperator target = SuperOperator::from_choi(d, h, 0.5 * (choi + choi.adjoint()));

  if (!j.contains("sequence") || !j["sequence"].is_array() || j["sequence"].empty())
    throw ParseError("/sequence", "expected a non-empty array");
  std::vector<SuperOperator> entries;
  for (size_t k = 0; k < j["sequence"].size(); ++k)
    entries.push_back(parse_entry(j["sequence"][k], d, "/sequence/" + std::to_string(k)));

  if (j.contains("weights")) {
    const json& w = j["weights"];
    if (!w.is_array() || w.size() != entries.size()) throw ParseError("/weights", "expected one weight per entry");
    for (size_t k = 0; k < entries.size(); ++k) {
      const double v = number_at(w[k], "/weights/" + std::to_string(k));
      if (!(v > 0)) throw ParseError("/weights/" + std::to_string(k), "weights must be positive");
      entries[k] = entries[k] * cplx(v);
    }
  }

  std::optional<double> tail;
  if (j.contains("tail_bound")) {
    tail = number_at(j["tail_bound"], "/tail_bound");
    if (!(*tail >= 0)) throw ParseError("/tail_bound", "must be non-negative");
  }

  FeasibilityOptions options;
  std::optional<std::uint64_t> seed;
  if (j.contains("options")) parse_options(j["options"], options, seed);

  std::string name;
  if (j.contains("name")) {
    if (!j["name"].is_string()) throw ParseError("/name", "expected a string");
    name = j["name"].get<std::string>();
  }

  auto seq = [&] {
    try {
      return tail ? MapSequence::truncated_vanishing(std::move(entries), tail) : MapSequence::finite(std::move(entries));
    } catch (const NotHermitianError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError("/sequence", e.what());
    }
  }();
  return Instance{std::move(name), std::move(target), std::move(seq), options, seed};
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ParseError("", "cannot open " + path.string());
  try {
    return json::parse(is);
  } catch (const json::parse_error& e) {
    throw ParseError("", path.string() + ": " + e.what());
  }
}

void write_json_file(const json& j, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  os << j.dump(1) << "\n";
  if (!os) throw Error("write failed for " + path.string());
}

Instance load_instance(const std::filesystem::path& path) { return parse_instance(read_json_file(path)); }

json instance_to_json(const Instance& inst) {
  json j;
  if (!inst.name.empty()) j["name"] = inst.name;
  j["d"] = inst.target.in_dim();
  j["h"] = inst.target.out_dim();
  j["target"] = to_json(inst.target.choi());
  json seq = json::array();
  for (const auto& e : inst.sequence.entries()) seq.push_back({{"kind", "custom"}, {"coeffs", to_json(e.coeffs())}});
  j["sequence"] = std::move(seq);
  if (inst.sequence.kind() == SequenceKind::truncated_vanishing) j["tail_bound"] = inst.sequence.tail_bound();
  const auto& o = inst.options;
  j["options"] = {{"feas_rel_tol", o.feas_rel_tol}, {"psd_tol", o.psd_tol},   {"kernel_tol", o.kernel_tol},
                  {"pairing_tol", o.pairing_tol},   {"dual_tol", o.dual_tol}, {"max_iter", o.max_iter},
                  {"stall_window", o.stall_window}};
  if (inst.seed) j["options"]["seed"] = *inst.seed;
  return j;
}

VerdictReport make_report(const FeasibilityResult& res, const FeasibilityProblem& prob, double wall_time,
                          std::uint64_t seed) {
  VerdictReport r;
  r.verdict = res.verdict;
  r.certificate = res.certificate;
  r.witness = res.witness;
  r.iterations = res.iterations;
  r.kernel_condition_holds = res.kernel_condition_holds;
  r.tail_slack = res.tail_slack;
  r.wall_time = wall_time;
  r.seed = seed;
  r.diagnostics = res.diagnostics;
  if (res.certificate) {
    const auto c = verify_certificate(*res.certificate, prob, prob.options().psd_tol);
    r.residual = c.residual;
    r.min_eigenvalue = c.min_eigenvalue;
  }
  if (res.witness) {
    const auto c = verify_witness(res.witness->w, prob, prob.options().dual_tol, prob.options().pairing_tol);
    r.pairing = c.pairing;
    r.min_dual_margin = c.min_dual_margin;
  }
  return r;
}

json to_json(const VerdictReport& r) {
  json j;
  j["verdict"] = to_string(r.verdict);
  j["iterations"] = r.iterations;
  j["kernel_condition_holds"] = r.kernel_condition_holds;
  j["tail_slack"] = r.tail_slack;
  j["wall_time"] = r.wall_time;
  j["seed"] = r.seed;
  j["version"] = r.version;
  if (!r.diagnostics.empty()) j["diagnostics"] = r.diagnostics;
  if (r.certificate) {
    json xs = json::array();
    for (const auto& x : r.certificate->choi) xs.push_back(to_json(x));
    j["certificate"] = {{"choi", std::move(xs)}};
    j["margins"] = {{"residual", r.residual}, {"min_eigenvalue", r.min_eigenvalue}};
  }
  if (r.witness) {
    j["witness"] = {{"w", to_json(r.witness->w)}, {"gap", r.witness->gap}};
    j["margins"] = {{"pairing", r.pairing}, {"min_dual_margin", r.min_dual_margin}};
  }
  return j;
}

VerdictReport report_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("", "report must be a JSON object");
  VerdictReport r;
  if (!j.contains("verdict") || !j["verdict"].is_string()) throw ParseError("/verdict", "missing or not a string");
  const std::string v = j["verdict"].get<std::string>();
  if (v == "feasible")
    r.verdict = Verdict::feasible;
  else if (v == "infeasible")
    r.verdict = Verdict::infeasible;
  else if (v == "undetermined")
    r.verdict = Verdict::undetermined;
  else
    throw ParseError("/verdict", "unknown verdict '" + v + "'");

  auto get = [&](const char* key, auto& dst) {
    if (j.contains(key)) dst = j[key].get<std::decay_t<decltype(dst)>>();
  };
  try {
    get("iterations", r.iterations);
    get("kernel_condition_holds", r.kernel_condition_holds);
    get("tail_slack", r.tail_slack);
    get("wall_time", r.wall_time);
    get("seed", r.seed);
    get("version", r.version);
    get("diagnostics", r.diagnostics);
    if (j.contains("margins")) {
      const json& m = j["margins"];
      if (m.contains("residual")) r.residual = m["residual"].get<double>();
      if (m.contains("min_eigenvalue")) r.min_eigenvalue = m["min_eigenvalue"].get<double>();
      if (m.contains("pairing")) r.pairing = m["pairing"].get<double>();
      if (m.contains("min_dual_margin")) r.min_dual_margin = m["min_dual_margin"].get<double>();
    }
  } catch (const json::type_error& e) {
    throw ParseError("", e.what());
  }

  if (j.contains("certificate")) {
    const json& c = j["certificate"];
    if (!c.contains("choi") || !c["choi"].is_array()) throw ParseError("/certificate/choi", "expected an array");
    DecompositionCertificate cert;
    for (size_t k = 0; k < c["choi"].size(); ++k)
      cert.choi.push_back(matrix_from_json(c["choi"][k], "/certificate/choi/" + std::to_string(k)));
    cert.residual = r.residual;
    r.certificate = std::move(cert);
  }
  if (j.contains("witness")) {
    const json& w = j["witness"];
    if (!w.contains("w")) throw ParseError("/witness/w", "missing");
    InfeasibilityWitness wit{matrix_from_json(w["w"], "/witness/w"), 0.0};
    if (w.contains("gap")) wit.gap = number_at(w["gap"], "/witness/gap");
    r.witness = std::move(wit);
  }
  if (r.verdict == Verdict::feasible && !r.certificate) throw ParseError("/certificate", "feasible report without certificate");
  if (r.verdict == Verdict::infeasible && !r.witness) throw ParseError("/witness", "infeasible report without witness");
  return r;
}

bool reverify(const VerdictReport& r, const FeasibilityProblem& prob) {
  const auto& opt = prob.options();
  switch (r.verdict) {
    case Verdict::feasible: {
      if (!r.certificate || static_cast<Index>(r.certificate->choi.size()) != prob.terms()) return false;
      for (const auto& x : r.certificate->choi)
        if (x.rows() != prob.choi_dim() || x.cols() != prob.choi_dim()) return false;
      return verify_certificate(*r.certificate, prob, opt.psd_tol).valid;
    }
    case Verdict::infeasible: {
      if (!r.witness || r.witness->w.rows() != prob.choi_dim() || r.witness->w.cols() != prob.choi_dim()) return false;
      return verify_witness(r.witness->w, prob, opt.dual_tol, opt.pairing_tol).valid;
    }
    case Verdict::undetermined:
      return true;
  }
  return false;
}

}  // namespace phidec
