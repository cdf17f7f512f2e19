#pragma once

#include <cmath>
#include <complex>

#include "krummp/error.hpp"

namespace krummp {

/// Circle metric on [0,1): d_w(t1,t2) = min{|t1-t2|, 1-|t1-t2|}, in [0, 1/2].
inline double wrap_distance(double t1, double t2)
{
    if (!(t1 >= 0.0 && t1 < 1.0) || !(t2 >= 0.0 && t2 < 1.0))
        throw InvalidArgument("wrap_distance: locations must lie in [0,1)");
    const double d = std::abs(t1 - t2);
    return std::min(d, 1.0 - d);
}

/// Chordal metric |u-v| / (sqrt(1+|u|^2) sqrt(1+|v|^2)); bounded by 1.
inline double chordal_distance(std::complex<double> u, std::complex<double> v)
{
    return std::abs(u - v) /
           (std::sqrt(1.0 + std::norm(u)) * std::sqrt(1.0 + std::norm(v)));
}

/// Maps any real number onto [0,1).
inline double wrap_unit(double t)
{
    double r = t - std::floor(t);
    if (r >= 1.0) // t slightly below an integer rounds up to exactly 1
        r = 0.0;
    return r;
}

} // namespace krummp
