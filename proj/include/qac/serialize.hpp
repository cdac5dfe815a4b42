#ifndef QAC_SERIALIZE_HPP
#define QAC_SERIALIZE_HPP

#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qac/adversary.hpp"
#include "qac/analysis.hpp"
#include "qac/engine.hpp"
#include "qac/sweep.hpp"

namespace qac {

/// One JSON object per event: {k, kind, from, to, y, z}.  LF line endings,
/// bit-exact across platforms for identical configs.
inline std::string events_to_jsonl(const RunResult& res) {
  std::ostringstream os;
  for (const Event& e : res.events) {
    nlohmann::json j;
    j["k"] = e.k;
    j["kind"] = e.kind;
    j["from"] = e.from;
    j["to"] = e.to;
    j["y"] = e.y;
    j["z"] = e.z;
    os << j.dump() << '\n';
  }
  return os.str();
}

/// CSV snapshots: k, node, q_s, y_alpha, z_alpha, w_star.
inline std::string snapshots_to_csv(const RunResult& res) {
  std::ostringstream os;
  os << "k,node,q_s,y_alpha,z_alpha,w_star\n";
  for (const Snapshot& s : res.snapshots)
    os << s.k << ',' << s.node << ',' << s.q_s << ',' << s.y_alpha << ','
       << s.z_alpha << ',' << s.w_star << '\n';
  return os.str();
}

inline std::string summary_to_json(const RunResult& res) {
  nlohmann::json j;
  j["terminated"] = res.terminated;
  j["k_end"] = res.k_end;
  j["q_num"] = res.q.num;
  j["q_den"] = res.q.den;
  j["q_ceil"] = res.q.ceil();
  j["q_floor"] = res.q.floor();
  j["final_q_s"] = res.final_qs;
  j["final_w_star"] = res.final_w;
  j["last_injection_round"] = res.last_injection_round;
  j["n"] = res.graph.n;
  j["diameter"] = res.graph.diameter;
  j["seed"] = res.config.seed;
  return j.dump(2) + "\n";
}

/// Wide per-node trajectory of the state variable q_s, one column per node.
inline std::string plot_qs_csv(const RunResult& res) {
  std::ostringstream os;
  os << "# figure: per-node state variable q_s over iterations\n";
  os << "k";
  for (int j = 0; j < res.graph.n; ++j) os << ",q_s_" << j;
  os << '\n';
  std::map<i64, std::vector<i64>> rows;
  for (const Snapshot& s : res.snapshots) {
    auto& row = rows[s.k];
    row.resize(res.graph.n, 0);
    row[s.node] = s.q_s;
  }
  for (const auto& [k, row] : rows) {
    os << k;
    for (i64 v : row) os << ',' << v;
    os << '\n';
  }
  return os.str();
}

inline std::string sweep_to_csv(const std::vector<SweepRow>& rows,
                                const std::string& figure_note) {
  std::ostringstream os;
  os << "# figure: " << figure_note << "\n";
  os << "param_name,param_value,runs,terminated,mean_k,std_k,mean_k_alg1,"
        "mean_k_alg2,mean_diff\n";
  for (const SweepRow& r : rows)
    os << r.param_name << ',' << r.param_value << ',' << r.runs << ','
       << r.terminated << ',' << r.mean_k << ',' << r.std_k << ','
       << r.mean_k_alg1 << ',' << r.mean_k_alg2 << ',' << r.mean_diff << '\n';
  return os.str();
}

inline std::string bounds_to_json(const BoundReport& r) {
  nlohmann::json j;
  j["eps1"] = r.eps1;
  j["eps2"] = r.eps2;
  j["tau1"] = r.tau1;
  j["tau2"] = r.tau2;
  j["d_max"] = r.d_max;
  j["y_init"] = r.y_init;
  j["k0"] = r.k0;
  j["k0_prime"] = r.k0_prime;
  j["k0_double_prime"] = r.k0_double_prime;
  j["probability"] = r.probability;
  j["privacy_product"] = r.privacy_product;
  return j.dump(2) + "\n";
}

inline std::string attack_to_json(int target, i64 k, const InferenceResult& inf,
                                  i64 truth_y, i64 truth_z, i64 feasible_count) {
  nlohmann::json j;
  j["target"] = target;
  j["k"] = k;
  j["det"] = inf.det;
  if (inf.indeterminate) {
    j["inferred"] = nullptr;
  } else {
    j["inferred"] = {{"y0", inf.y0}, {"z0", inf.z0}};
    j["approximate"] = inf.approximate;
  }
  j["truth"] = {{"y0", truth_y}, {"z0", truth_z}};
  j["match"] = !inf.indeterminate && inf.y0 == truth_y && inf.z0 == truth_z;
  j["feasible_count"] = feasible_count;
  return j.dump(2) + "\n";
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

}  // namespace qac

#endif  // QAC_SERIALIZE_HPP
