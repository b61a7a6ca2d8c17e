#pragma once

#include <array>

namespace hmrf {

/// Gaussian emission parameters: Y | Z = +1 ~ N(mu_plus, sigma2),
/// Y | Z = -1 ~ N(mu_minus, sigma2).
struct Emission {
  double mu_plus = 1.0;
  double mu_minus = -1.0;
  double sigma2 = 1.0;

  /// Throws ArgumentError unless sigma2 is positive and finite.
  void validate() const;

  /// log g(y | +1) - log g(y | -1).
  double log_odds(double y) const {
    const double dp = y - mu_plus;
    const double dm = y - mu_minus;
    return (dm * dm - dp * dp) / (2.0 * sigma2);
  }

  double mean_of(int spin) const { return spin > 0 ? mu_plus : mu_minus; }

  friend bool operator==(const Emission&, const Emission&) = default;
};

/// Spatial coupling beta and temporal (autoregressive) coupling alpha.
/// alpha is ignored by single-frame models.
struct Coupling {
  double beta = 0.0;
  double alpha = 0.0;

  friend bool operator==(const Coupling&, const Coupling&) = default;
};

struct HmrfParams {
  Emission emission;
  Coupling coupling;

  /// (mu_plus, mu_minus, sigma2, beta, alpha)
  std::array<double, 5> as_array() const {
    return {emission.mu_plus, emission.mu_minus, emission.sigma2, coupling.beta, coupling.alpha};
  }

  friend bool operator==(const HmrfParams&, const HmrfParams&) = default;
};

}  // namespace hmrf
