/*
 * Licensed under the Apache License, Version 2.0 (the "License"); you may not
 * use this file except in compliance with the License. You may obtain a copy
 * of the License at http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
 * WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
 * License for the specific language governing permissions and limitations
 * under the License.
 */
#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cmath>
#include <stdexcept>
#include <string>

namespace lfslab {

template <typename Scalar>
using Vec3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using Mat3 = Eigen::Matrix<Scalar, 3, 3>;

using Eigen::Matrix3d;
using Eigen::Vector3d;
using Box3d = Eigen::AlignedBox3d;

enum class ErrorKind {
  Domain,
  DegenerateGradient,
  Convergence,
  MedialAmbiguity,
  InsufficientSampling,
  InvalidPatch,
  RejectedPair,
  Trace,
  Config,
  Io,
};

std::string_view to_string(ErrorKind kind);

/// Base of every failure raised by the library. The kind lets callers
/// (campaigns in particular) sort outcomes without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

#define LFSLAB_DEFINE_ERROR(Name, Kind)                              \
  class Name : public Error {                                        \
   public:                                                           \
    explicit Name(const std::string& what) : Error(Kind, what) {}    \
  };

LFSLAB_DEFINE_ERROR(DomainError, ErrorKind::Domain)
LFSLAB_DEFINE_ERROR(DegenerateGradientError, ErrorKind::DegenerateGradient)
LFSLAB_DEFINE_ERROR(ConvergenceError, ErrorKind::Convergence)
LFSLAB_DEFINE_ERROR(MedialAmbiguityError, ErrorKind::MedialAmbiguity)
LFSLAB_DEFINE_ERROR(InsufficientSamplingError, ErrorKind::InsufficientSampling)
LFSLAB_DEFINE_ERROR(InvalidPatchError, ErrorKind::InvalidPatch)
LFSLAB_DEFINE_ERROR(RejectedPairError, ErrorKind::RejectedPair)
LFSLAB_DEFINE_ERROR(TraceError, ErrorKind::Trace)
LFSLAB_DEFINE_ERROR(ConfigError, ErrorKind::Config)
LFSLAB_DEFINE_ERROR(IoError, ErrorKind::Io)

#undef LFSLAB_DEFINE_ERROR

/// Principal angle in [0, pi] between two unit vectors.
///
/// Uses atan2(|a x b|, a . b) rather than acos of the inner product: acos
/// loses about half the significant digits for nearly parallel normals,
/// which is exactly the regime small-epsilon pairs live in.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar angle_between(const Eigen::MatrixBase<DerivedA>& a,
                                        const Eigen::MatrixBase<DerivedB>& b) {
  using std::atan2;
  return atan2(a.cross(b).norm(), a.dot(b));
}

/// Orthonormal basis (t1, t2) of the plane orthogonal to the unit vector n.
template <typename Derived>
std::pair<Vec3<typename Derived::Scalar>, Vec3<typename Derived::Scalar>>
tangent_basis(const Eigen::MatrixBase<Derived>& n) {
  using Scalar = typename Derived::Scalar;
  Vec3<Scalar> t1 = n.unitOrthogonal();
  Vec3<Scalar> t2 = n.cross(t1).normalized();
  return {t1, t2};
}

}  // namespace lfslab
