#include "shadowrl/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace shadowrl {

Segment2 make_segment(Point2 p, Point2 q) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(q.x) || !std::isfinite(q.y))
        throw std::invalid_argument("segment endpoints must be finite");
    if (p == q)
        throw std::invalid_argument("degenerate segment: endpoints coincide");
    return Segment2{p, q};
}

double orient2d(const Point2& o, const Point2& a, const Point2& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

namespace {

// r is known to be collinear with (p, q); check containment via bounding box.
bool on_segment(const Point2& p, const Point2& q, const Point2& r) {
    return std::min(p.x, q.x) <= r.x && r.x <= std::max(p.x, q.x) &&
           std::min(p.y, q.y) <= r.y && r.y <= std::max(p.y, q.y);
}

}  // namespace

bool segments_intersect(const Segment2& a, const Segment2& b) {
    const double d1 = orient2d(b.p, b.q, a.p);
    const double d2 = orient2d(b.p, b.q, a.q);
    const double d3 = orient2d(a.p, a.q, b.p);
    const double d4 = orient2d(a.p, a.q, b.q);

    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
        ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
        return true;

    // Collinear / endpoint-contact cases; exact-zero comparison by design.
    if (d1 == 0 && on_segment(b.p, b.q, a.p)) return true;
    if (d2 == 0 && on_segment(b.p, b.q, a.q)) return true;
    if (d3 == 0 && on_segment(a.p, a.q, b.p)) return true;
    if (d4 == 0 && on_segment(a.p, a.q, b.q)) return true;
    return false;
}

Point2 clamp_to_arena(const Point2& p, double lo, double hi) {
    if (!(lo < hi)) throw std::invalid_argument("clamp_to_arena requires lo < hi");
    return Point2{std::clamp(p.x, lo, hi), std::clamp(p.y, lo, hi)};
}

double distance(const Point2& p, const Point2& q) {
    const double dx = p.x - q.x;
    const double dy = p.y - q.y;
    return std::sqrt(dx * dx + dy * dy);
}

}  // namespace shadowrl
