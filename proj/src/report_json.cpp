#include "svol/report_json.hpp"

namespace svol::report {

namespace {

const char* status_name(model::CheckStatus s) {
  switch (s) {
    case model::CheckStatus::Pass: return "pass";
    case model::CheckStatus::Warn: return "warn";
    case model::CheckStatus::Fail: return "fail";
  }
  return "?";
}

}  // namespace

Json to_json(const feller::FellerReport& r) {
  Json j;
  j["verdict"] = feller::to_string(r.verdict);
  j["reference_point"] = r.c;
  if (r.value) {
    j["value"] = *r.value;
    j["error_bound"] = r.error ? *r.error : 0.0;
  }
  if (r.p_hat_valid) j["tail_exponent"] = r.p_hat;
  j["cutoffs"] = r.cutoffs;
  j["note"] = r.note;
  Json stages = Json::array();
  for (const auto& s : r.stages) {
    Json js;
    js["name"] = s.name;
    js["verdict"] = feller::to_string(s.verdict);
    if (s.p_hat_valid) js["tail_exponent"] = s.p_hat;
    js["cutoffs"] = s.cutoffs;
    js["log_increments"] = s.log_increments;
    js["log_partial_sums"] = s.log_partial_sums;
    js["note"] = s.note;
    stages.push_back(std::move(js));
  }
  j["stages"] = std::move(stages);
  return j;
}

Json to_json(const model::ValidationReport& r) {
  Json j;
  j["hard_ok"] = r.hard_ok;
  Json checks = Json::array();
  for (const auto& c : r.checks) {
    Json jc;
    jc["name"] = c.name;
    jc["status"] = status_name(c.status);
    jc["detail"] = c.detail;
    checks.push_back(std::move(jc));
  }
  j["checks"] = std::move(checks);
  j["linear_growth_constant"] = r.linear_growth_constant;
  j["linear_growth_exponent"] = r.linear_growth_exponent;
  j["b2prime_growth_constant"] = r.b2prime_growth_constant;
  j["b2prime_growth_exponent"] = r.b2prime_growth_exponent;
  return j;
}

Json to_json(const model::ZeroBoundaryClass& z) {
  Json j;
  j["kind"] = z.kind ? model::to_string(*z.kind) : "Inconclusive";
  j["attainability"] = to_json(z.attainability);
  return j;
}

Json to_json(const mc::Estimate& e) {
  Json j;
  j["mean"] = e.mean;
  j["std_error"] = e.std_error;
  j["n_effective"] = e.n_effective;
  return j;
}

Json to_json(const mc::ExplosionEstimate& e) {
  Json j;
  j["probability"] = to_json(e.prob);
  j["extrapolation_error"] = e.extrapolation_error;
  j["barriers"] = e.barriers;
  j["hit_fraction"] = e.hit_fraction;
  j["monotone"] = e.monotone;
  j["censored_paths"] = e.censored_paths;
  return j;
}

Json to_json(const analysis::ClassificationReport& r) {
  Json j;
  j["martingale"] = analysis::to_string(r.martingale);
  j["uniqueness"] = analysis::to_string(r.uniqueness);
  j["eta"] = r.eta;
  j["reason"] = r.reason;
  j["explosion_test"] = to_json(r.explosion);
  j["zero_boundary"] = to_json(r.boundary);
  return j;
}

Json to_json(const analysis::CrossValidation& x) {
  Json j;
  j["pde_value"] = x.pde_value;
  j["pde_error_estimate"] = x.pde_error_estimate;
  j["mc_mean"] = x.mc_mean;
  j["mc_std_error"] = x.mc_std_error;
  j["mc_bias_estimate"] = x.mc_bias_estimate;
  j["discrepancy"] = x.discrepancy;
  j["tolerance"] = x.tolerance;
  j["pass"] = x.pass;
  return j;
}

Json demo_summary_json(const analysis::NonUniquenessDemo& d) {
  Json j;
  j["refused"] = d.refused;
  if (d.refused) {
    j["refusal_reason"] = d.refusal_reason;
    return j;
  }
  j["eta"] = d.eta;
  j["residual_u_l2"] = d.residual_u_l2;
  j["residual_w_l2"] = d.residual_w_l2;
  j["residual_u_max"] = d.residual_u_max;
  j["residual_w_max"] = d.residual_w_max;
  j["residual_parity"] = d.residual_parity;
  j["initial_gap_max"] = d.initial_gap_max;
  j["initial_agreement"] = d.initial_agreement;
  j["domination_violation"] = d.domination_violation;
  j["truncation_budget"] = d.truncation_budget;
  j["domination_ok"] = d.domination_ok;
  j["gap_at_eval"] = d.gap_at_eval;
  j["max_gap"] = d.max_gap;
  j["gap_significant"] = d.gap_significant;
  j["marginal"] = d.marginal;
  j["all_checks_pass"] = d.all_checks_pass;
  return j;
}

Json config_json(const cli::RunConfig& cfg) {
  Json j;
  for (const auto& [k, v] : cfg.entries) j[k] = v;
  return j;
}

}  // namespace svol::report
