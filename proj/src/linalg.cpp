#include "spnet/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <sstream>

#include "spnet/errors.hpp"

namespace spnet {

double spectral_radius(const Mat& m) {
  if (m.rows() == 0) return 0.0;
  Eigen::EigenSolver<Mat> es(m, /*computeEigenvectors=*/false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

Mat psd_factor(const Mat& s, double tol) {
  const int n = static_cast<int>(s.rows());
  double scale = std::max(1.0, max_abs(s));
  Eigen::LDLT<Mat> ldlt(s);
  Vec d = ldlt.vectorD();
  for (int i = 0; i < n; ++i) {
    if (d(i) < -tol * scale) {
      throw NotPsdError("covariance has negative pivot " + std::to_string(d(i)));
    }
  }
  Mat l = ldlt.matrixL();
  Vec sq = d.cwiseMax(0.0).cwiseSqrt();
  Mat f = ldlt.transpositionsP().transpose() * Mat(l * sq.asDiagonal());
  return f;
}

std::string format_vec(const Vec& v, int precision) {
  std::ostringstream os;
  os.precision(precision);
  os << "(";
  for (int i = 0; i < v.size(); ++i) {
    if (i) os << ", ";
    os << v(i);
  }
  os << ")";
  return os.str();
}

std::string format_mat(const Mat& m, int precision) {
  std::ostringstream os;
  os.precision(precision);
  for (int r = 0; r < m.rows(); ++r) {
    os << (r ? "; " : "[");
    for (int c = 0; c < m.cols(); ++c) {
      if (c) os << " ";
      os << m(r, c);
    }
  }
  os << "]";
  return os.str();
}

}  // namespace spnet
