#pragma once

namespace shadowrl {

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point2&, const Point2&) = default;
};

// Closed line segment with distinct endpoints.
struct Segment2 {
    Point2 p;
    Point2 q;
};

// Throws std::invalid_argument if the endpoints coincide or are not finite.
Segment2 make_segment(Point2 p, Point2 q);

// Signed area of the triangle (o, a, b), doubled. Positive when (o,a,b)
// turn counter-clockwise. Exact-zero means collinear.
double orient2d(const Point2& o, const Point2& a, const Point2& b);

// True iff the closed segments share at least one point. Endpoint contact
// and collinear overlap both count. Both segments must be non-degenerate.
bool segments_intersect(const Segment2& a, const Segment2& b);

// Componentwise clamp into [lo, hi]. Requires lo < hi.
Point2 clamp_to_arena(const Point2& p, double lo, double hi);

// Euclidean distance.
double distance(const Point2& p, const Point2& q);

}  // namespace shadowrl
