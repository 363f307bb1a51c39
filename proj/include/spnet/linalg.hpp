#pragma once
#include <Eigen/Dense>
#include <string>

namespace spnet {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using IMat = Eigen::MatrixXi;
using IVec = Eigen::VectorXi;

inline double max_abs(const Mat& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }
inline double max_abs(const Vec& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

// Largest |eigenvalue|; used for contraction and stability checks.
double spectral_radius(const Mat& m);

// Symmetric PSD square root factor F with F*F' ~= s (pivoted LDL^T, small
// negative pivots clamped to zero). Throws NotPsdError below -tol.
Mat psd_factor(const Mat& s, double tol = 1e-10);

std::string format_vec(const Vec& v, int precision = 6);
std::string format_mat(const Mat& m, int precision = 6);

}  // namespace spnet
