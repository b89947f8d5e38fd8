#include "svol/model.hpp"

#include <cmath>
#include <sstream>

namespace svol::model {

namespace {

constexpr double kBoundaryTol = 1e-12;

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

void add(ValidationReport& rep, const std::string& name, CheckStatus st,
         std::string detail) {
  rep.checks.push_back({name, st, std::move(detail)});
  if (st == CheckStatus::Fail) rep.hard_ok = false;
}

// least-squares fit of log f ~ log C + k * log y over the top sampling
// decade, where an affine bound C(1+y) looks like slope 1; returns {C, k}
std::pair<double, double> fit_growth(const std::vector<double>& ys,
                                     const std::vector<double>& fs) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t i = 0; i < ys.size(); ++i) {
    if (!(fs[i] > 0.0) || !(ys[i] > 0.0)) continue;
    const double x = std::log(ys[i]);
    const double v = std::log(fs[i]);
    sx += x;
    sy += v;
    sxx += x * x;
    sxy += x * v;
    ++n;
  }
  if (n < 2 || sxx * n - sx * sx <= 0) return {0.0, 0.0};
  const double k = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double logc = (sy - k * sx) / n;
  return {std::exp(logc), k};
}

}  // namespace

const char* to_string(BoundaryKind k) {
  switch (k) {
    case BoundaryKind::Unattainable: return "Unattainable";
    case BoundaryKind::Absorbing: return "Absorbing";
    case BoundaryKind::Reflecting: return "Reflecting";
  }
  return "?";
}

ValidationReport validate(const ModelSpec& spec, double y_probe, int n_samples) {
  if (!(y_probe > 0.0)) throw std::invalid_argument("validate: y_probe must be positive");
  if (n_samples < 16) throw std::invalid_argument("validate: need n_samples >= 16");
  ValidationReport rep;

  // boundary values at y = 0
  auto check_at_zero = [&](const char* name, const Expr& e, bool want_zero,
                           bool nonneg) {
    try {
      const double v = e.eval(0.0);
      if (want_zero) {
        if (std::abs(v) <= kBoundaryTol)
          add(rep, std::string(name) + "(0)=0", CheckStatus::Pass, fmt(v));
        else
          add(rep, std::string(name) + "(0)=0", CheckStatus::Fail,
              std::string(name) + "(0) = " + fmt(v));
      } else if (nonneg) {
        if (v >= -kBoundaryTol)
          add(rep, std::string(name) + "(0)>=0", CheckStatus::Pass, fmt(v));
        else
          add(rep, std::string(name) + "(0)>=0", CheckStatus::Fail,
              std::string(name) + "(0) = " + fmt(v));
      }
    } catch (const ExprError& err) {
      add(rep, std::string(name) + " at 0", CheckStatus::Fail,
          std::string("evaluation failed at y = 0: ") + err.what());
    }
  };
  check_at_zero("sigma", spec.sigma, true, false);
  check_at_zero("b", spec.b, true, false);
  check_at_zero("mu", spec.mu, false, true);

  if (!(spec.rho > -1.0 && spec.rho < 1.0))
    add(rep, "rho in (-1,1)", CheckStatus::Fail, "rho = " + fmt(spec.rho));
  else
    add(rep, "rho in (-1,1)", CheckStatus::Pass, fmt(spec.rho));

  // geometric sample grid in (0, y_probe]
  std::vector<double> ys(n_samples);
  const double y_lo = y_probe * 1e-6;
  for (int i = 0; i < n_samples; ++i)
    ys[i] = y_lo * std::pow(y_probe / y_lo, double(i) / (n_samples - 1));

  bool positive = true;
  std::string pos_detail;
  std::vector<double> musig(n_samples), b2p(n_samples);
  const Expr b2prime = mul(spec.b, spec.b).differentiate();
  try {
    for (int i = 0; i < n_samples; ++i) {
      const double s = spec.sigma.eval(ys[i]);
      const double bv = spec.b.eval(ys[i]);
      if (!(s > 0.0) || !(bv > 0.0)) {
        positive = false;
        pos_detail = "nonpositive coefficient at y = " + fmt(ys[i]);
        break;
      }
      musig[i] = std::abs(spec.mu.eval(ys[i])) + s;
      b2p[i] = std::abs(b2prime.eval(ys[i]));
    }
  } catch (const ExprError& err) {
    add(rep, "interior sampling", CheckStatus::Fail,
        std::string("evaluation failed at y = ") + fmt(err.y) + ": " + err.what());
    return rep;
  }
  add(rep, "sigma,b > 0 on (0, y_probe]",
      positive ? CheckStatus::Pass : CheckStatus::Fail, pos_detail);
  if (!positive) return rep;

  // growth bounds: fitted by least squares on log-transformed samples over
  // the upper decade; sampling cannot certify asymptotics, so violations
  // only warn
  std::vector<double> ys_hi, ms_hi, bp_hi;
  for (int i = 0; i < n_samples; ++i) {
    if (ys[i] >= y_probe / 10.0) {
      ys_hi.push_back(ys[i]);
      ms_hi.push_back(musig[i]);
      bp_hi.push_back(b2p[i]);
    }
  }
  auto [c1, k1] = fit_growth(ys_hi, ms_hi);
  rep.linear_growth_constant = c1;
  rep.linear_growth_exponent = k1;
  add(rep, "|mu|+sigma linear growth", k1 <= 1.1 ? CheckStatus::Pass : CheckStatus::Warn,
      "fitted |mu|+sigma ~ " + fmt(c1) + "*y^" + fmt(k1));

  auto [c2, k2] = fit_growth(ys_hi, bp_hi);
  rep.b2prime_growth_constant = c2;
  rep.b2prime_growth_exponent = k2;
  add(rep, "(b^2)' polynomial growth", CheckStatus::Pass,
      "fitted |(b^2)'| ~ " + fmt(c2) + "*y^" + fmt(k2));

  // abs() makes derivatives discontinuous wherever its argument changes
  // sign; flag it so the smoothness assumption is a conscious choice
  if (spec.mu.contains_abs() || spec.sigma.contains_abs() || spec.b.contains_abs())
    add(rep, "abs in coefficients", CheckStatus::Warn,
        "derivative may be discontinuous where the abs argument vanishes");

  return rep;
}

ZeroBoundaryClass classify_zero_boundary(const ModelSpec& spec, double c, double tol) {
  ZeroBoundaryClass out;
  out.attainability = feller::test_attainability_at_zero(spec.mu, spec.sigma, c, tol);
  switch (out.attainability.verdict) {
    case feller::Verdict::Infinite:
      out.kind = BoundaryKind::Unattainable;
      break;
    case feller::Verdict::Finite: {
      const double mu0 = spec.mu.eval(0.0);
      out.kind = mu0 > kBoundaryTol ? BoundaryKind::Reflecting : BoundaryKind::Absorbing;
      break;
    }
    case feller::Verdict::Inconclusive:
      out.kind.reset();
      break;
  }
  return out;
}

Expr auxiliary_drift(const ModelSpec& spec) {
  return add(spec.mu, mul(Expr::literal(spec.rho), mul(spec.b, spec.sigma)));
}

}  // namespace svol::model
