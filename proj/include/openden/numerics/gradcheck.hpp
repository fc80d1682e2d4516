#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace openden::numerics {

using ScalarFunction = std::function<double(std::span<const double>)>;

struct GradientCheckOptions {
  double epsilon = 1e-5;
  // 0 checks every coordinate; otherwise a seeded sample of this many.
  std::size_t max_coords = 0;
  std::uint64_t seed = 0;
};

// Central-difference comparison of `analytic` against f around `params`.
// Returns max over checked coordinates of |analytic - numeric| / max(1, |numeric|).
double finite_difference_check(const ScalarFunction& f, std::span<const double> params,
                               std::span<const double> analytic,
                               const GradientCheckOptions& options = {});

}  // namespace openden::numerics
