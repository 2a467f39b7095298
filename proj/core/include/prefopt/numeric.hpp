#pragma once

#include <span>

namespace prefopt {

double sigmoid(double x) noexcept;

// log σ(x) = −log1p(e^{−x}) for x ≥ 0, x − log1p(e^{x}) otherwise.
double log_sigmoid(double x) noexcept;

double logsumexp(std::span<const double> x) noexcept;

// out[i] = x[i] − logsumexp(x). out may alias x.
void log_softmax(std::span<const double> x, std::span<double> out) noexcept;

// Max-logit-stabilized softmax. out may alias x.
void softmax(std::span<const double> x, std::span<double> out) noexcept;

}  // namespace prefopt
