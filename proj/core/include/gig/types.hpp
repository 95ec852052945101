#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace gig {

/// Dense f64 vector used for inputs, baselines, gradients and attributions.
using Vec = std::vector<double>;
using Points = std::vector<Vec>;

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
double distance(std::span<const double> a, std::span<const double> b);
bool all_finite(std::span<const double> a);

}  // namespace gig
