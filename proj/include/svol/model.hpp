#pragma once

// Model assembly and validation: drift mu, vol-of-vol sigma, asset
// volatility map b (all expressions in y), correlation rho. Validation
// enforces the boundary values sigma(0) = b(0) = 0, mu(0) >= 0, strict
// positivity on the interior, and samples the growth bounds; boundary
// classification at y = 0 runs the attainability test.

#include <optional>
#include <string>
#include <vector>

#include "svol/expr.hpp"
#include "svol/feller.hpp"

namespace svol::model {

struct ModelSpec {
  Expr mu;
  Expr sigma;
  Expr b;
  double rho = 0.0;
  std::string name;
};

enum class CheckStatus { Pass, Warn, Fail };

struct CheckRecord {
  std::string name;
  CheckStatus status;
  std::string detail;
};

struct ValidationReport {
  std::vector<CheckRecord> checks;
  bool hard_ok = true;            // no Fail entries
  double linear_growth_constant = 0.0;   // fitted C in |mu| + sigma <= C(1+y)
  double linear_growth_exponent = 0.0;   // fitted kappa in ~ C(1+y)^kappa
  double b2prime_growth_constant = 0.0;  // fitted C in |(b^2)'| <= C(1+y^m)
  double b2prime_growth_exponent = 0.0;  // fitted m
};

ValidationReport validate(const ModelSpec& spec, double y_probe = 10.0,
                          int n_samples = 64);

enum class BoundaryKind { Unattainable, Absorbing, Reflecting };

const char* to_string(BoundaryKind k);

struct ZeroBoundaryClass {
  // empty when the attainability test is Inconclusive; downstream PDE case
  // selection then requires an explicit user override
  std::optional<BoundaryKind> kind;
  feller::FellerReport attainability;
};

ZeroBoundaryClass classify_zero_boundary(const ModelSpec& spec, double c = 1.0,
                                         double tol = 1e-6);

// mu + rho * b * sigma, the drift of the auxiliary diffusion whose explosion
// decides the martingale property.
Expr auxiliary_drift(const ModelSpec& spec);

}  // namespace svol::model
