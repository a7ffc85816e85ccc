// Copyright 2026 The eggcodec Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef EGGCODEC_GRADCHECK_H_
#define EGGCODEC_GRADCHECK_H_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace eggcodec {

enum class GradScope { kLosses, kLayers, kModel };

std::string_view to_string(GradScope scope);
std::optional<GradScope> parse_grad_scope(std::string_view name);

struct GradCheckOptions {
  double step = 1e-4;  // central-difference step
  // Coordinates probed per differentiated array; smaller arrays are checked
  // exhaustively.
  int max_coords = 24;
  std::uint64_t seed = 1;
  // Test hook: analytic gradients are scaled by (1 + perturb) before the
  // comparison, which a working harness must flag.
  double perturb = 0.0;
};

struct GradCheckResult {
  std::string name;
  GradScope scope;
  double max_rel_err = 0.0;
  double tolerance = 0.0;
  std::size_t coords = 0;
  bool passed = false;
};

struct GradCheck {
  std::string name;
  GradScope scope;
  double tolerance;
  std::function<GradCheckResult(const GradCheckOptions&)> run;
};

// Every finite-difference check of the loss functions, layers and the model.
// Relative error per coordinate is |a - n| / max(|a|, |n|, 1e-3 * max|n|),
// with n the central difference and the max taken over the probed
// coordinates of the same array.
const std::vector<GradCheck>& gradcheck_registry();

std::vector<GradCheckResult> run_gradchecks(std::optional<GradScope> scope,
                                            const GradCheckOptions& opts = {});

void write_gradcheck_csv(const std::vector<GradCheckResult>& results, std::ostream& out);

}  // namespace eggcodec

#endif  // EGGCODEC_GRADCHECK_H_
