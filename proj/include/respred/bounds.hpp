#pragma once

#include <string>

#include "respred/errors.hpp"

namespace respred {

enum class BoundFamily { cheb2, cheb4, gauss };

const char* to_string(BoundFamily family);
BoundFamily bound_family_from_string(const std::string& name);

/// Confidence-interval family at level gamma in (0, 1).
struct BoundSpec {
  BoundFamily family = BoundFamily::cheb2;
  double gamma = 0.9;
};

/// Half-width of the symmetric confidence interval around the mean:
///   cheb2: sqrt(mu2 / (1 - gamma))
///   cheb4: (mu4 / (1 - gamma))^(1/4)
///   gauss: normal_quantile((1 + gamma) / 2) * sqrt(mu2)
/// mu4 is only consulted by cheb4 and must dominate mu2^2 there.
double radius(const BoundSpec& spec, double mu2, double mu4 = 0.0);

/// Inverse standard-normal CDF, accurate to well below 1e-9 in probability.
double normal_quantile(double p);

/// True iff the fourth-moment interval is no wider than the second-moment one
/// at level gamma, i.e. mu4 <= mu2^2 / (1 - gamma).
bool cheb4_is_tighter(double mu2, double mu4, double gamma);

}  // namespace respred
