#ifndef CSQ_TYPES_HPP
#define CSQ_TYPES_HPP

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace csq {

using Complex = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RealMat = Eigen::MatrixXd;
using RealVec = Eigen::VectorXd;

inline constexpr Complex I{0.0, 1.0};

/// Thrown when a phase-space label lies outside the region the truncated
/// basis can represent to tolerance.
class truncation_error : public std::runtime_error {
public:
  explicit truncation_error(const std::string& what) : std::runtime_error(what) {}
};

/// Truncated Fock-space parameters: dimension D, hbar, and the fiducial
/// frequency Omega that fixes the number-basis convention.
struct SpaceConfig {
  int dim = 64;
  double hbar = 1.0;
  double omega = 1.0;

  void validate() const {
    if (dim < 2) throw std::invalid_argument("SpaceConfig: dim must be >= 2");
    if (!(hbar > 0.0)) throw std::invalid_argument("SpaceConfig: hbar must be > 0");
    if (!(omega > 0.0)) throw std::invalid_argument("SpaceConfig: omega must be > 0");
  }
};

using StateVector = Vec;

/// Dense operator on the truncated number basis.
struct Operator {
  Mat mat;
  bool hermitian = false;

  int dim() const { return static_cast<int>(mat.rows()); }
};

inline double max_abs(const Mat& m) { return m.cwiseAbs().maxCoeff(); }

inline double hermiticity_defect(const Mat& m) {
  return max_abs(m - m.adjoint().eval());
}

/// Wraps a matrix as an Operator, verifying hermiticity when claimed.
inline Operator make_operator(Mat m, bool hermitian = false, double tol = 1e-12) {
  if (hermitian && hermiticity_defect(m) > tol)
    throw std::invalid_argument("make_operator: matrix fails hermiticity check");
  return Operator{std::move(m), hermitian};
}

inline Complex expectation(const StateVector& v, const Operator& op) {
  return v.dot(op.mat * v);  // Eigen's dot conjugates the left argument
}

inline double real_expectation(const StateVector& v, const Operator& op) {
  return expectation(v, op).real();
}

}  // namespace csq

#endif
