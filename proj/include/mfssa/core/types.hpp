#pragma once

#include <Eigen/Dense>

namespace mfssa {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Evaluation sites, one row per site and one column per domain axis.
using Sites = Eigen::MatrixXd;

}  // namespace mfssa
