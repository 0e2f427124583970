#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "pvm/problem.hpp"
#include "pvm/solver.hpp"

namespace pvm {

struct ProblemFormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::vector<Triplet> read_triplets(const nlohmann::json& arr,
                                          int rows, int cols,
                                          const std::string& key) {
  std::vector<Triplet> out;
  out.reserve(arr.size());
  for (const auto& e : arr) {
    if (!e.is_array() || e.size() != 3)
      throw ProblemFormatError(key + ": entries must be [row, col, value]");
    const int r = e[0].get<int>();
    const int c = e[1].get<int>();
    const double v = e[2].get<double>();
    if (r < 0 || r >= rows || c < 0 || c >= cols)
      throw ProblemFormatError(key + ": index out of range");
    if (!std::isfinite(v))
      throw ProblemFormatError(key + ": non-finite value");
    out.emplace_back(r, c, v);
  }
  return out;
}

inline Vec read_vector(const nlohmann::json& arr, const std::string& key) {
  Vec out(arr.size());
  Eigen::Index i = 0;
  for (const auto& e : arr) {
    const double v = e.get<double>();
    if (!std::isfinite(v)) throw ProblemFormatError(key + ": non-finite value");
    out[i++] = v;
  }
  return out;
}

}  // namespace detail

inline ProblemData problem_from_json(const nlohmann::json& j) {
  for (const char* key : {"Q", "A", "p", "b", "cone"})
    if (!j.contains(key))
      throw ProblemFormatError(std::string("missing key: ") + key);

  ProblemData prob;
  prob.p = detail::read_vector(j.at("p"), "p");
  prob.b = detail::read_vector(j.at("b"), "b");
  const int n = prob.n();
  const int m = prob.m();
  prob.Q = make_symmetric_upper(n, detail::read_triplets(j.at("Q"), n, n, "Q"));
  prob.A = make_sparse(m, n, detail::read_triplets(j.at("A"), m, n, "A"));
  prob.cone.zero_dim = j.at("cone").at("zero").get<int>();
  prob.cone.nonneg_dim = j.at("cone").at("nonneg").get<int>();
  if (j.contains("t0")) prob.t0 = j.at("t0").get<double>();
  if (j.contains("name")) prob.name = j.at("name").get<std::string>();

  const auto violations = validate(prob);
  if (!violations.empty()) {
    std::string msg = "invalid problem:";
    for (auto v : violations) msg += std::string(" ") + to_string(v);
    throw ProblemFormatError(msg);
  }
  return prob;
}

inline nlohmann::json problem_to_json(const ProblemData& prob) {
  nlohmann::json j;
  auto triplets = [](const SpMat& M) {
    nlohmann::json arr = nlohmann::json::array();
    for (int c = 0; c < M.outerSize(); ++c)
      for (SpMat::InnerIterator it(M, c); it; ++it)
        arr.push_back({it.row(), it.col(), it.value()});
    return arr;
  };
  j["Q"] = triplets(prob.Q);
  j["A"] = triplets(prob.A);
  j["p"] = std::vector<double>(prob.p.data(), prob.p.data() + prob.p.size());
  j["b"] = std::vector<double>(prob.b.data(), prob.b.data() + prob.b.size());
  j["cone"] = {{"zero", prob.cone.zero_dim}, {"nonneg", prob.cone.nonneg_dim}};
  if (prob.t0) j["t0"] = *prob.t0;
  if (!prob.name.empty()) j["name"] = prob.name;
  return j;
}

inline ProblemData load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ProblemFormatError("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ProblemFormatError(std::string("parse error: ") + e.what());
  }
  try {
    return problem_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw ProblemFormatError(std::string("schema error: ") + e.what());
  }
}

inline nlohmann::json report_to_json(const SolveReport& rep) {
  nlohmann::json j;
  j["status"] = to_string(rep.status);
  j["t_final"] = rep.t_final;
  j["r_final"] = rep.r_final;
  j["rq_final"] = rep.rq_final;
  j["M_estimate"] = rep.M_estimate;
  j["cumulative_newton"] = rep.cumulative_newton;
  j["x_final"] = std::vector<double>(rep.x_final.data(),
                                     rep.x_final.data() + rep.x_final.size());
  j["s_final"] = std::vector<double>(rep.s_final.data(),
                                     rep.s_final.data() + rep.s_final.size());
  nlohmann::json trace = nlohmann::json::array();
  for (const auto& r : rep.trace)
    trace.push_back({{"k", r.k},
                     {"t", r.t},
                     {"r", r.r},
                     {"sigma", r.sigma},
                     {"delta_beta", r.delta_beta},
                     {"newton_pa", r.newton_pa},
                     {"newton_pb", r.newton_pb}});
  j["trace"] = trace;
  return j;
}

inline void save_problem(const ProblemData& prob, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ProblemFormatError("cannot open " + path + " for writing");
  out << problem_to_json(prob).dump(2) << "\n";
}

}  // namespace pvm
