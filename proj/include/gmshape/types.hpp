#pragma once

#include <Eigen/Core>

#include <vector>

namespace gmshape {

using Scalar = double;

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Mat23 = Eigen::Matrix<double, 2, 3>;
using VecX = Eigen::VectorXd;
using Vec3i = Eigen::Vector3i;

using PointList = std::vector<Vec3>;

}  // namespace gmshape
