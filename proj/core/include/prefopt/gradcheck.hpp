#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace prefopt {

// |a - n| / max(|a|, |n|, floor). The floor keeps coordinates whose true
// derivative is ~0 from turning rounding noise into large relative errors.
inline constexpr double kGradCheckFloor = 1e-4;
double relative_error(double analytic, double numeric, double floor = kGradCheckFloor) noexcept;

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t checked = 0;
  std::size_t skipped = 0;  // probes that crossed a relu kink

  bool passed(double tol) const noexcept { return max_rel_error < tol; }
};

using ScalarFn = std::function<double(std::span<const double>)>;
using KinkSignatureFn = std::function<std::vector<std::uint8_t>(std::span<const double>)>;

// Central differences (f(x+h e_i) - f(x-h e_i)) / 2h against `analytic` at
// the listed coordinates (all coordinates when `coords` is empty). When a
// signature function is given, coordinates whose probes change it are
// skipped rather than compared.
GradCheckResult check_gradient(const ScalarFn& f, std::span<const double> x, std::span<const double> analytic,
                               std::span<const std::size_t> coords = {}, double h = 1e-5,
                               const KinkSignatureFn& signature = {});

std::vector<double> central_difference(const ScalarFn& f, std::span<const double> x, double h = 1e-5);

}  // namespace prefopt
