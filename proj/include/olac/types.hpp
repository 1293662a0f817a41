#ifndef OLAC_TYPES_HPP
#define OLAC_TYPES_HPP

#include <Eigen/Dense>

namespace olac {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Lagrange multiplier estimate over the r queues: gamma, beta, or a
/// backlog vector used in its place. Solver outputs are componentwise >= 0.
template <typename Scalar>
using Multiplier = Vector<Scalar>;

using Multiplierd = Multiplier<double>;

}  // namespace olac

#endif  // OLAC_TYPES_HPP
