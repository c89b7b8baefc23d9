#pragma once

#include <Eigen/Core>

namespace lqrlab {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

}  // namespace lqrlab
