#pragma once

#include <array>
#include <functional>
#include <memory>
#include <string>

namespace slef {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

struct Point3 {
    double x = 0.0, y = 0.0, z = 0.0;
};

// Region above the graph y = g(x) inside the box (x_min, x_max) x (.., top).
class GraphDomain {
public:
    // Throws InvalidArgument if sampled slopes exceed the declared Lipschitz bound.
    GraphDomain(std::function<double(double)> g, double lipschitz, double x_min, double x_max, double top,
                std::string label = "graph");

    static GraphDomain flat(double x_min, double x_max, double top);
    static GraphDomain tilted(double slope, double x_min, double x_max, double top);

    double g(double x) const { return g_(x); }
    double lipschitz() const { return lipschitz_; }
    double x_min() const { return x_min_; }
    double x_max() const { return x_max_; }
    double top() const { return top_; }
    // min of g over the sampled x range
    double bottom() const { return bottom_; }
    const std::string& label() const { return label_; }
    bool contains(Point2 p) const;

private:
    std::function<double(double)> g_;
    double lipschitz_, x_min_, x_max_, top_, bottom_;
    std::string label_;
};

enum class CylinderKind { grounded, doubled, suspended };

struct CylinderSpec {
    double center_xprime = 0.0;
    double r = 1.0;
    double delta = 0.1;
    CylinderKind kind = CylinderKind::grounded;
};

void validate(const CylinderSpec& c);
bool cylinder_contains(const CylinderSpec& cyl, const GraphDomain& dom, Point2 x);

struct SectorDomain {
    double theta;
    double radius;
    int dimension = 2;
};

SectorDomain make_sector(double theta, double radius);

struct BumpCurve {
    double R;
    int i_max;
};

double bump_half_width(double R, int i);
double bump_height(const BumpCurve& curve, double x1);
bool bump_overlap_free(double R, int i_max);
double circle_signed_distance(Point2 x, double R);
// bumpy graph domain on [-1,1] x [g, top]; requires the curve to be overlap free
GraphDomain bumpy_domain(const BumpCurve& curve, double top = 1.0);

// Abstract planar region for Cartesian meshing. Boundary parts are small integer tags
// (for graph domains: 0 is the graph, 1 the box sides and top).
class PlanarRegion {
public:
    virtual ~PlanarRegion() = default;
    virtual bool inside(Point2 p) const = 0;
    // x_min, x_max, y_min, y_max
    virtual std::array<double, 4> bounding_box() const = 0;
    // fraction s in (0,1] such that p + s (q - p) is on the boundary; p inside, q not
    virtual double crossing_fraction(Point2 p, Point2 q) const;
    virtual int boundary_part(Point2 on_boundary) const = 0;
};

class GraphRegion final : public PlanarRegion {
public:
    explicit GraphRegion(GraphDomain dom) : dom_(std::move(dom)) {}
    bool inside(Point2 p) const override { return dom_.contains(p); }
    std::array<double, 4> bounding_box() const override;
    double crossing_fraction(Point2 p, Point2 q) const override;
    int boundary_part(Point2 b) const override;
    const GraphDomain& domain() const { return dom_; }

private:
    GraphDomain dom_;
};

class DiskRegion final : public PlanarRegion {
public:
    DiskRegion(Point2 center, double radius);
    bool inside(Point2 p) const override;
    std::array<double, 4> bounding_box() const override;
    double crossing_fraction(Point2 p, Point2 q) const override;
    int boundary_part(Point2) const override { return 0; }
    Point2 center() const { return c_; }
    double radius() const { return r_; }

private:
    Point2 c_;
    double r_;
};

// Axis-aligned rectangle; parts 0..3 = bottom, right, top, left.
class BoxRegion final : public PlanarRegion {
public:
    BoxRegion(double x0, double x1, double y0, double y1);
    bool inside(Point2 p) const override;
    std::array<double, 4> bounding_box() const override { return {x0_, x1_, y0_, y1_}; }
    double crossing_fraction(Point2 p, Point2 q) const override;
    int boundary_part(Point2 b) const override;

private:
    double x0_, x1_, y0_, y1_;
};

}  // namespace slef
