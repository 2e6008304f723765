#include "npsd/vector_ops.hpp"

#include <cmath>

namespace npsd {

double dot(const Vector& x, const Vector& y) {
    require(x.size() == y.size(), "dot: length mismatch (" + std::to_string(x.size()) +
                                      " vs " + std::to_string(y.size()) + ")");
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

double norm2(const Vector& x) { return std::sqrt(dot(x, x)); }

Vector axpy(double a, const Vector& x, const Vector& y) {
    require(x.size() == y.size(), "axpy: length mismatch");
    Vector out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = a * x[i] + y[i];
    return out;
}

void axpy_inplace(double a, const Vector& x, Vector& y) {
    require(x.size() == y.size(), "axpy: length mismatch");
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

void scale_inplace(double a, Vector& x) {
    for (double& v : x) v *= a;
}

double mean(const Vector& x) {
    if (x.empty()) return 0.0;
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

void mean_project(Vector& x) {
    const double m = mean(x);
    for (double& v : x) v -= m;
}

}  // namespace npsd
