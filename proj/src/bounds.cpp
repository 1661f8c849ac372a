#include "respred/bounds.hpp"

#include <cmath>

namespace respred {

namespace {

double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * 3.14159265358979323846);
}

// Acklam's rational approximation of the inverse normal CDF.
double quantile_estimate(double p) {
  static const double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                              -2.759285104469687e+02, 1.383577518672690e+02,
                              -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                              -1.556989798598866e+02, 6.680131188771972e+01,
                              -1.328068155288572e+01};
  static const double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                              -2.400758277161838e+00, -2.549732539343734e+00,
                              4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                              2.445134137142996e+00, 3.754408661907416e+00};
  const double p_low = 0.02425;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - p_low) {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

const char* to_string(BoundFamily family) {
  switch (family) {
    case BoundFamily::cheb2: return "cheb2";
    case BoundFamily::cheb4: return "cheb4";
    case BoundFamily::gauss: return "gauss";
  }
  return "?";
}

BoundFamily bound_family_from_string(const std::string& name) {
  if (name == "cheb2") return BoundFamily::cheb2;
  if (name == "cheb4") return BoundFamily::cheb4;
  if (name == "gauss") return BoundFamily::gauss;
  throw DomainError("unknown bound family '" + name + "'");
}

double normal_quantile(double p) {
  if (!(p > 0.0) || !(p < 1.0)) {
    throw DomainError("normal_quantile: probability must lie in (0, 1)");
  }
  double x = quantile_estimate(p);
  // Two Halley refinements against the erfc-based CDF.
  for (int it = 0; it < 2; ++it) {
    const double err = normal_cdf(x) - p;
    const double pdf = normal_pdf(x);
    if (pdf <= 0.0) break;
    x -= 2.0 * err / (2.0 * pdf + x * err);
  }
  return x;
}

double radius(const BoundSpec& spec, double mu2, double mu4) {
  if (!(spec.gamma > 0.0) || !(spec.gamma < 1.0)) {
    throw DomainError("radius: gamma must lie in (0, 1)");
  }
  if (mu2 < 0.0) throw DomainError("radius: negative variance");
  switch (spec.family) {
    case BoundFamily::cheb2:
      return std::sqrt(mu2 / (1.0 - spec.gamma));
    case BoundFamily::cheb4:
      if (mu4 < mu2 * mu2 * (1.0 - 1e-9)) {
        throw DomainError("radius: fourth moment below squared variance");
      }
      return std::pow(std::max(mu4, 0.0) / (1.0 - spec.gamma), 0.25);
    case BoundFamily::gauss:
      return normal_quantile(0.5 * (1.0 + spec.gamma)) * std::sqrt(mu2);
  }
  throw DomainError("radius: unknown family");
}

bool cheb4_is_tighter(double mu2, double mu4, double gamma) {
  if (!(gamma > 0.0) || !(gamma < 1.0)) {
    throw DomainError("cheb4_is_tighter: gamma must lie in (0, 1)");
  }
  if (!(mu2 > 0.0)) throw DomainError("cheb4_is_tighter: variance must be positive");
  return mu4 <= mu2 * mu2 / (1.0 - gamma);
}

}  // namespace respred
