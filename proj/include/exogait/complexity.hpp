#pragma once

namespace exogait {

struct ComplexityWeights {
  double limbs = 0.0;
  double dof = 0.0;
  double sensors = 0.0;
  double actuators = 0.0;
};

struct ComplexityInputs {
  int limbs = 0;
  int dof = 0;
  int sensors = 0;
  int actuators = 0;
  ComplexityWeights weights;

  void validate() const;
};

/// w_L L + w_D D + w_S S + w_A A. There is no default weighting.
double complexity_index(const ComplexityInputs& inputs);

}  // namespace exogait
