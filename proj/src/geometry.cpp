#include "slef/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "slef/errors.hpp"

namespace slef {

namespace {
constexpr int kLipschitzSamples = 1 << 14;
}

GraphDomain::GraphDomain(std::function<double(double)> g, double lipschitz, double x_min, double x_max,
                         double top, std::string label)
    : g_(std::move(g)), lipschitz_(lipschitz), x_min_(x_min), x_max_(x_max), top_(top), label_(std::move(label)) {
    if (!(x_max > x_min)) throw InvalidArgument("GraphDomain: empty x range");
    if (!(lipschitz >= 0.0)) throw InvalidArgument("GraphDomain: negative Lipschitz bound");
    const double dx = (x_max - x_min) / kLipschitzSamples;
    double prev = g_(x_min);
    bottom_ = prev;
    for (int k = 1; k <= kLipschitzSamples; ++k) {
        const double gx = g_(x_min + k * dx);
        if (!std::isfinite(gx)) throw InvalidArgument("GraphDomain: g not finite on x range");
        if (std::fabs(gx - prev) > lipschitz * dx * (1.0 + 1e-9) + 1e-14)
            throw InvalidArgument("GraphDomain: sampled slope exceeds declared Lipschitz bound");
        bottom_ = std::min(bottom_, gx);
        prev = gx;
    }
    if (!(top > bottom_)) throw InvalidArgument("GraphDomain: top below the graph");
}

GraphDomain GraphDomain::flat(double x_min, double x_max, double top) {
    return GraphDomain([](double) { return 0.0; }, 0.0, x_min, x_max, top, "flat");
}

GraphDomain GraphDomain::tilted(double slope, double x_min, double x_max, double top) {
    return GraphDomain([slope](double x) { return slope * x; }, std::fabs(slope), x_min, x_max, top, "tilted");
}

bool GraphDomain::contains(Point2 p) const {
    return p.x > x_min_ && p.x < x_max_ && p.y < top_ && p.y > g_(p.x);
}

void validate(const CylinderSpec& c) {
    if (!(c.r > 0.0)) throw InvalidArgument("cylinder radius must be positive");
    if (!(c.delta > 0.0 && c.delta <= 0.1)) throw InvalidArgument("cylinder delta must lie in (0, 1/10]");
}

bool cylinder_contains(const CylinderSpec& cyl, const GraphDomain& dom, Point2 x) {
    validate(cyl);
    if (std::fabs(x.x - cyl.center_xprime) > cyl.r) return false;
    const double d = x.y - dom.g(x.x);
    switch (cyl.kind) {
        case CylinderKind::grounded: return d >= 0.0 && d <= cyl.r;
        case CylinderKind::doubled: return std::fabs(d) <= cyl.r;
        case CylinderKind::suspended: return d >= cyl.delta * cyl.r && d <= cyl.r;
    }
    return false;
}

SectorDomain make_sector(double theta, double radius) {
    if (!(theta > 0.0 && theta < 2.0 * M_PI)) throw InvalidArgument("sector angle must lie in (0, 2pi)");
    if (!(radius > 0.0)) throw InvalidArgument("sector radius must be positive");
    return {theta, radius, 2};
}

double bump_half_width(double R, int i) {
    const double a = 1.0 / i;
    return R - std::sqrt(R * R - a * a);
}

double bump_height(const BumpCurve& c, double x1) {
    for (int i = 1; i <= c.i_max; ++i) {
        const double w = bump_half_width(c.R, i);
        for (double s : {1.0, -1.0}) {
            const double d = std::fabs(x1 - s / i);
            if (d <= w) return d - w;
        }
    }
    return 0.0;
}

bool bump_overlap_free(double R, int i_max) {
    if (!(R > 1.0) || i_max < 1) throw InvalidArgument("bump_overlap_free: need R > 1 and i_max >= 1");
    struct Iv {
        double lo, hi;
    };
    std::vector<Iv> iv;
    for (int i = 1; i <= i_max; ++i) {
        const double w = bump_half_width(R, i);
        iv.push_back({1.0 / i - w, 1.0 / i + w});
        iv.push_back({-1.0 / i - w, -1.0 / i + w});
    }
    for (std::size_t a = 0; a < iv.size(); ++a)
        for (std::size_t b = a + 1; b < iv.size(); ++b)
            if (iv[a].lo <= iv[b].hi && iv[b].lo <= iv[a].hi) return false;
    return true;
}

double circle_signed_distance(Point2 x, double R) {
    if (!(R > 0.0)) throw InvalidArgument("circle radius must be positive");
    return std::hypot(x.x, x.y + R) - R;
}

GraphDomain bumpy_domain(const BumpCurve& curve, double top) {
    if (!bump_overlap_free(curve.R, curve.i_max)) throw InvalidArgument("bump intervals overlap");
    return GraphDomain([curve](double x) { return bump_height(curve, x); }, 1.0, -1.0, 1.0, top, "bumpy");
}

double PlanarRegion::crossing_fraction(Point2 p, Point2 q) const {
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 64 && hi - lo > 1e-15; ++it) {
        const double m = 0.5 * (lo + hi);
        if (inside({p.x + m * (q.x - p.x), p.y + m * (q.y - p.y)}))
            lo = m;
        else
            hi = m;
    }
    return hi;
}

std::array<double, 4> GraphRegion::bounding_box() const {
    return {dom_.x_min(), dom_.x_max(), dom_.bottom(), dom_.top()};
}

double GraphRegion::crossing_fraction(Point2 p, Point2 q) const {
    const double dx = q.x - p.x, dy = q.y - p.y;
    if (dx == 0.0) {
        if (dy > 0.0) return std::min(1.0, (dom_.top() - p.y) / dy);
        // straight down: the graph is crossed exactly at g(x)
        return std::clamp((p.y - dom_.g(p.x)) / (-dy), 0.0, 1.0);
    }
    // horizontal: the box side, unless the graph cuts first
    const double side = dx > 0.0 ? dom_.x_max() : dom_.x_min();
    const double s_side = (side - p.x) / dx;
    const double s_end = std::min(1.0, s_side);
    auto above = [&](double s) { return p.y > dom_.g(p.x + s * dx); };
    if (above(s_end) && s_side <= 1.0) return s_side;
    double lo = 0.0, hi = s_end;
    for (int it = 0; it < 64 && hi - lo > 1e-15; ++it) {
        const double m = 0.5 * (lo + hi);
        if (above(m))
            lo = m;
        else
            hi = m;
    }
    return hi;
}

int GraphRegion::boundary_part(Point2 b) const {
    const double dg = b.y - dom_.g(b.x);
    const double dbox = std::min({b.x - dom_.x_min(), dom_.x_max() - b.x, dom_.top() - b.y});
    return dg <= dbox ? 0 : 1;
}

DiskRegion::DiskRegion(Point2 center, double radius) : c_(center), r_(radius) {
    if (!(radius > 0.0)) throw InvalidArgument("disk radius must be positive");
}

bool DiskRegion::inside(Point2 p) const { return std::hypot(p.x - c_.x, p.y - c_.y) < r_; }

std::array<double, 4> DiskRegion::bounding_box() const {
    return {c_.x - r_, c_.x + r_, c_.y - r_, c_.y + r_};
}

double DiskRegion::crossing_fraction(Point2 p, Point2 q) const {
    // |p - c + s (q - p)| = r, take the root in (0, 1]
    const double ax = p.x - c_.x, ay = p.y - c_.y, dx = q.x - p.x, dy = q.y - p.y;
    const double a = dx * dx + dy * dy, b = 2.0 * (ax * dx + ay * dy), c = ax * ax + ay * ay - r_ * r_;
    const double disc = std::max(0.0, b * b - 4.0 * a * c);
    // c < 0 (p inside): the positive root, written to avoid cancellation
    const double s = (2.0 * -c) / (b + std::sqrt(disc));
    return std::clamp(s, 0.0, 1.0);
}

BoxRegion::BoxRegion(double x0, double x1, double y0, double y1) : x0_(x0), x1_(x1), y0_(y0), y1_(y1) {
    if (!(x1 > x0 && y1 > y0)) throw InvalidArgument("empty box");
}

bool BoxRegion::inside(Point2 p) const { return p.x > x0_ && p.x < x1_ && p.y > y0_ && p.y < y1_; }

double BoxRegion::crossing_fraction(Point2 p, Point2 q) const {
    double s = 1.0;
    const double dx = q.x - p.x, dy = q.y - p.y;
    if (dx > 0) s = std::min(s, (x1_ - p.x) / dx);
    if (dx < 0) s = std::min(s, (x0_ - p.x) / dx);
    if (dy > 0) s = std::min(s, (y1_ - p.y) / dy);
    if (dy < 0) s = std::min(s, (y0_ - p.y) / dy);
    return s;
}

int BoxRegion::boundary_part(Point2 b) const {
    const double d[4] = {b.y - y0_, x1_ - b.x, y1_ - b.y, b.x - x0_};
    return static_cast<int>(std::min_element(d, d + 4) - d);
}

}  // namespace slef
