#include "hmrf/params.hpp"

#include <cmath>

#include "hmrf/errors.hpp"

namespace hmrf {

void Emission::validate() const {
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw ArgumentError("sigma2 must be positive and finite");
  if (!std::isfinite(mu_plus) || !std::isfinite(mu_minus)) throw ArgumentError("emission means must be finite");
}

}  // namespace hmrf
