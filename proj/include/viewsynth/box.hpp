#pragma once

#include <algorithm>

namespace viewsynth {

/// Axis-aligned box in pixel coordinates [left, right) x [top, bottom).
struct Box
{
    double left = 0.0;
    double top = 0.0;
    double right = 0.0;
    double bottom = 0.0;

    double width() const { return right - left; }
    double height() const { return bottom - top; }
    double area() const { return std::max(0.0, width()) * std::max(0.0, height()); }
    bool valid() const { return right > left && bottom > top; }

    friend bool operator==(const Box&, const Box&) = default;
};

inline Box intersect(const Box& a, const Box& b)
{
    return {std::max(a.left, b.left), std::max(a.top, b.top), std::min(a.right, b.right),
            std::min(a.bottom, b.bottom)};
}

} // namespace viewsynth
