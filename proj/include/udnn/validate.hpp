#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "udnn/model.hpp"

namespace udnn {

struct CheckResult {
  std::string name;
  bool passed = false;
  double metric = 0.0;   // the worst observed value for the check
  double budget = 0.0;   // the bound it was held against
  std::string detail;
};

struct ValidateOptions {
  std::uint64_t seed = 202401;
  // Negative control: perturb one initialized weight so the
  // init-equivalence check must fail.
  bool inject_init_fault = false;
};

struct ValidateReport {
  std::vector<CheckResult> checks;
  bool all_passed() const;
  std::string to_json() const;
};

// Cross-module invariant suite on seeded random instances: split/native
// complex equivalence, Hermitian involution, power-iteration bounds,
// dictionary column norms, atom phase law, ISTA objective monotonicity and
// KKT conditions, initialization equivalence, gradient checks, zero
// preservation, threshold contraction, matched-filter approximation bounds.
ValidateReport run_validation(const ValidateOptions& options);

// Central-difference check of backward() against the forward pass. Layers
// whose pre-threshold values lie within 10h of a kink are excluded together
// with every layer feeding them (one-sided differences are invalid there).
// The model is taken by value: probing mutates parameters in place.
struct GradCheckResult {
  double max_rel_err = 0.0;
  int compared = 0;
  int excluded_layers = 0;
};

GradCheckResult finite_difference_check(UdnnModel model,
                                        const SplitComplexVector& y,
                                        const SplitComplexVector& x_true,
                                        double h);

}  // namespace udnn
