#include "prefopt/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace prefopt {

double relative_error(double analytic, double numeric, double floor) noexcept {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

GradCheckResult check_gradient(const ScalarFn& f, std::span<const double> x, std::span<const double> analytic,
                               std::span<const std::size_t> coords, double h, const KinkSignatureFn& signature) {
  if (analytic.size() != x.size()) throw std::invalid_argument("check_gradient: gradient length mismatch");
  std::vector<double> probe(x.begin(), x.end());
  std::vector<std::uint8_t> base_sig;
  if (signature) base_sig = signature(probe);

  GradCheckResult result;
  auto check_one = [&](std::size_t i) {
    const double orig = probe[i];
    probe[i] = orig + h;
    const double fp = f(probe);
    const bool kink_p = signature && signature(probe) != base_sig;
    probe[i] = orig - h;
    const double fm = f(probe);
    const bool kink_m = signature && signature(probe) != base_sig;
    probe[i] = orig;
    if (kink_p || kink_m) {
      ++result.skipped;
      return;
    }
    const double numeric = (fp - fm) / (2.0 * h);
    const double err = relative_error(analytic[i], numeric);
    ++result.checked;
    if (err > result.max_rel_error || !std::isfinite(err)) {
      result.max_rel_error = std::isfinite(err) ? err : INFINITY;
      result.worst_index = i;
      result.worst_analytic = analytic[i];
      result.worst_numeric = numeric;
    }
  };
  if (coords.empty()) {
    for (std::size_t i = 0; i < x.size(); ++i) check_one(i);
  } else {
    for (std::size_t i : coords) check_one(i);
  }
  return result;
}

std::vector<double> central_difference(const ScalarFn& f, std::span<const double> x, double h) {
  std::vector<double> probe(x.begin(), x.end());
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = probe[i];
    probe[i] = orig + h;
    const double fp = f(probe);
    probe[i] = orig - h;
    const double fm = f(probe);
    probe[i] = orig;
    out[i] = (fp - fm) / (2.0 * h);
  }
  return out;
}

}  // namespace prefopt
