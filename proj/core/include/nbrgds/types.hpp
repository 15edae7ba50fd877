#pragma once

#include <cstdint>

#include <Eigen/Dense>

namespace nbrgds {

using Count = std::int64_t;

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CountMatrixData = Eigen::Matrix<Count, Eigen::Dynamic, Eigen::Dynamic>;
using CountVector = Eigen::Matrix<Count, Eigen::Dynamic, 1>;

}  // namespace nbrgds
