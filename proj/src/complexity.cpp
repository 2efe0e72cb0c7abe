#include "exogait/complexity.hpp"

#include <cmath>

#include "exogait/error.hpp"

namespace exogait {

void ComplexityInputs::validate() const {
  if (limbs < 0 || dof < 0 || sensors < 0 || actuators < 0) {
    throw Error(ErrorCode::InvalidArgument, "complexity counts must be >= 0");
  }
  const double w[] = {weights.limbs, weights.dof, weights.sensors, weights.actuators};
  bool any = false;
  for (double x : w) {
    if (!std::isfinite(x) || x < 0.0) throw Error(ErrorCode::InvalidArgument, "complexity weights must be >= 0");
    any = any || x > 0.0;
  }
  if (!any) throw Error(ErrorCode::AllWeightsZero, "at least one complexity weight must be positive");
}

double complexity_index(const ComplexityInputs& in) {
  in.validate();
  return in.weights.limbs * in.limbs + in.weights.dof * in.dof + in.weights.sensors * in.sensors +
         in.weights.actuators * in.actuators;
}

}  // namespace exogait
