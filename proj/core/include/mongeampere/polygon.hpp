#pragma once

#include <span>
#include <vector>

#include "mongeampere/geometry.hpp"

namespace mongeampere {

// Convex polygon with vertices in counterclockwise order. An empty vertex
// list is the empty set; one or two vertices are degenerate (zero area).
using Polygon = std::vector<Vec2>;

// Shoelace area anchored at vertex 0. Summation runs in storage order so results
// are reproducible bit for bit.
double polygon_area(std::span<const Vec2> poly);

// Intersection of a convex polygon with the half-plane {p : dot(normal, p) <= offset}.
Polygon clip_half_plane(std::span<const Vec2> poly, Vec2 normal, double offset);

Polygon axis_box(double half_width, Vec2 center = {});

// Convex hull (Andrew's monotone chain), counterclockwise, collinear points dropped.
Polygon convex_hull(std::vector<Vec2> points);

// Intersection of two convex polygons (second one used as the clipper).
Polygon intersect_convex(std::span<const Vec2> subject, std::span<const Vec2> clipper);

bool contains_point(std::span<const Vec2> poly, Vec2 p, double tol = 0.0);

// Closest point of a convex polygon to the origin (the least-norm element).
Vec2 least_norm_point(std::span<const Vec2> poly);

}  // namespace mongeampere
