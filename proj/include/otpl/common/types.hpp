#pragma once

#include <cstdint>

#include <Eigen/Core>

namespace otpl {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix3d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

/// Identifier shared by landmarks, tracks and keyframes.
using Id = std::int64_t;

}  // namespace otpl
