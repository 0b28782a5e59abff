#pragma once

#include <Eigen/Dense>

namespace countergm {

/// Largest t >= 0 such that origin + t * direction lies in the convex hull of the rows of
/// `points`, found by a dense two-phase simplex on the barycentric-weight LP.
///
/// Returns +infinity for a zero direction or an unbounded ray, and -1 when `origin`
/// itself is outside the hull. Coordinates are rescaled per column before solving.
double ray_hull_extent(const Eigen::MatrixXd& points, const Eigen::VectorXd& origin,
                       const Eigen::VectorXd& direction);

/// True when `x` lies strictly inside the hull along the ray from the rows' centroid,
/// i.e. it can be pushed slightly further outward and remain inside.
bool strictly_inside_hull(const Eigen::MatrixXd& points, const Eigen::VectorXd& x);

}  // namespace countergm
