#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace npsd {

using index_t = std::int64_t;

/// Dense f64 vector. All solver-side arithmetic runs on these; the network
/// keeps its own f32 fields internally.
using Vector = std::vector<double>;

/// Thrown when a solver's line-search denominator collapses (curvature
/// d'Ad non-positive or underflowed).
class SolverBreakdown : public std::runtime_error {
public:
    explicit SolverBreakdown(const std::string& what) : std::runtime_error(what) {}
};

/// Thrown by reduce() when an image contains no fluid cells.
class EmptySystemError : public std::runtime_error {
public:
    explicit EmptySystemError(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

inline bool all_finite(const double* p, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        if (!std::isfinite(p[i])) return false;
    return true;
}

inline bool all_finite(const Vector& v) { return all_finite(v.data(), v.size()); }

/// Row-major 2D scalar field; data[y*nx + x].
template <typename T>
struct Field2D {
    index_t nx = 0, ny = 0;
    std::vector<T> data;

    Field2D() = default;
    Field2D(index_t nx_, index_t ny_, T fill = T(0))
        : nx(nx_), ny(ny_), data(static_cast<std::size_t>(nx_ * ny_), fill) {}

    T& at(index_t x, index_t y) { return data[static_cast<std::size_t>(y * nx + x)]; }
    T at(index_t x, index_t y) const { return data[static_cast<std::size_t>(y * nx + x)]; }
    index_t size() const { return nx * ny; }

    bool same_shape(const Field2D& o) const { return nx == o.nx && ny == o.ny; }
};

}  // namespace npsd
