#include "openden/numerics/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "openden/error.hpp"

namespace openden::numerics {

double finite_difference_check(const ScalarFunction& f, std::span<const double> params,
                               std::span<const double> analytic,
                               const GradientCheckOptions& options) {
  if (!(options.epsilon > 0.0)) throw ConfigError("finite_difference_check: epsilon must be > 0");
  if (analytic.size() != params.size()) {
    throw ShapeError("finite_difference_check: analytic gradient size differs from params");
  }

  std::vector<std::size_t> coords(params.size());
  std::iota(coords.begin(), coords.end(), std::size_t{0});
  if (options.max_coords != 0 && options.max_coords < coords.size()) {
    std::mt19937_64 rng(options.seed);
    std::shuffle(coords.begin(), coords.end(), rng);
    coords.resize(options.max_coords);
  }

  std::vector<double> probe(params.begin(), params.end());
  double worst = 0.0;
  for (std::size_t c : coords) {
    const double original = probe[c];
    probe[c] = original + options.epsilon;
    const double up = f(probe);
    probe[c] = original - options.epsilon;
    const double down = f(probe);
    probe[c] = original;
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw NumericalError("finite_difference_check: non-finite loss at coordinate " +
                           std::to_string(c));
    }
    const double numeric = (up - down) / (2.0 * options.epsilon);
    const double err = std::abs(analytic[c] - numeric) / std::max(1.0, std::abs(numeric));
    worst = std::max(worst, err);
  }
  return worst;
}

}  // namespace openden::numerics
