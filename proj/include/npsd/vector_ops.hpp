#pragma once

#include "npsd/types.hpp"

namespace npsd {

double dot(const Vector& x, const Vector& y);
double norm2(const Vector& x);

/// Returns a*x + y.
Vector axpy(double a, const Vector& x, const Vector& y);

/// y += a*x in place.
void axpy_inplace(double a, const Vector& x, Vector& y);

void scale_inplace(double a, Vector& x);

double mean(const Vector& x);

/// Subtracts the mean from every entry (projection onto the complement of
/// the constant vector, used for singular pure-Neumann systems).
void mean_project(Vector& x);

}  // namespace npsd
