#include "doublethink/json_io.hpp"

#include <cmath>

namespace doublethink {

Json number(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

Json names_of(const std::vector<int>& indices, const std::vector<std::string>& names) {
  Json out = Json::array();
  for (int j : indices) out.push_back(names.at(j));
  return out;
}

Json to_json(const inference::Hyperparams& hyper) {
  return {{"mu", hyper.mu}, {"h", hyper.h}, {"tau", hyper.tau}, {"n", hyper.n}, {"xi", hyper.xi()}};
}

Json to_json(const inference::TestReport& r) {
  Json out = {{"po", number(r.po)},
              {"log_po", number(r.log_po)},
              {"p_unadj", r.p_unadj},
              {"p_adj", r.p_adj},
              {"p_adj_raw", r.p_adj_raw},
              {"fdr_bound", r.fdr_bound},
              {"rejected_bayes", r.rejected_bayes},
              {"rejected_freq", r.rejected_freq},
              {"tested_count", r.tested_count},
              {"nu_total", r.nu_total},
              {"mode", r.sub_analysis ? "sub_analysis" : "full"}};
  if (r.sub_analysis) {
    out["excluded_count"] = r.excluded_count;
    out["excluded"] = r.excluded;
  }
  return out;
}

Json to_json(const inference::CoefficientEstimate& e, const std::vector<std::string>& names) {
  return {{"variable", names.at(e.variable)},
          {"index", e.variable},
          {"classical_mean", e.classical_mean},
          {"classical_se", e.classical_se},
          {"bayes_mean", e.bayes_mean},
          {"bayes_se", e.bayes_se},
          {"inclusion_prob", e.inclusion_prob}};
}

Json to_json(const ctp::GroupingPolicy& policy, const std::vector<std::string>& names) {
  Json blocks = Json::array();
  for (const auto& b : policy.blocks) blocks.push_back(names_of(b, names));
  return {{"rho", policy.rho}, {"blocks", blocks}, {"block_indices", policy.blocks}, {"block_of", policy.block_of}};
}

Json to_json(const simlab::Estimate& e) {
  return {{"p", e.p}, {"se", e.se}, {"events", e.events}, {"trials", e.trials}};
}

Json to_json(const simlab::TwoVarReport& r) {
  Json points = Json::array();
  for (const auto& p : r.points)
    points.push_back({{"beta2", p.beta2}, {"fpr", to_json(p.fpr)}, {"reference", p.reference}});
  return {{"target", r.target == simlab::TwoVarTarget::GrandNull ? "grand_null" : "test_beta1"}, {"points", points}};
}

Json to_json(const simlab::PriorSimReport& r) {
  Json points = Json::array();
  for (const auto& p : r.points)
    points.push_back({{"rho", p.rho}, {"bfwer", to_json(p.bfwer)}, {"afwer", to_json(p.afwer)}});
  return {{"points", points},
          {"replicates", r.replicates},
          {"grand_null_replicates", r.grand_null_replicates},
          {"rejections", r.rejections},
          {"mean_post_null", r.mean_post_null},
          {"mean_post_null_se", r.mean_post_null_se},
          {"false_discovery", to_json(r.false_discovery)},
          {"evalue_bound", r.evalue_bound},
          {"fwer_threshold", r.fwer_threshold}};
}

Json to_json(const ctp::XcritResult& r) {
  return {{"x_crit", r.x_crit}, {"tail_prob", r.tail_prob}, {"iterations", r.iterations}};
}

}  // namespace doublethink
