#pragma once
#include <boost/multiprecision/cpp_int.hpp>
#include <vector>

#include "spnet/errors.hpp"
#include "spnet/linalg.hpp"

namespace spnet {

using BigRat = boost::multiprecision::cpp_rational;

// Small dense rational matrix for exact identity checks. Doubles convert
// exactly (every finite double is dyadic), so checks on data that entered as
// doubles are genuinely exact.
struct RatMatrix {
  int rows = 0, cols = 0;
  std::vector<BigRat> a;

  RatMatrix() = default;
  RatMatrix(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c) {}

  BigRat& at(int r, int c) { return a[static_cast<size_t>(r) * cols + c]; }
  const BigRat& at(int r, int c) const {
    return a[static_cast<size_t>(r) * cols + c];
  }

  static RatMatrix identity(int n) {
    RatMatrix m(n, n);
    for (int i = 0; i < n; ++i) m.at(i, i) = 1;
    return m;
  }

  static RatMatrix from_double(const Mat& src) {
    RatMatrix m(static_cast<int>(src.rows()), static_cast<int>(src.cols()));
    for (int r = 0; r < m.rows; ++r) {
      for (int c = 0; c < m.cols; ++c) m.at(r, c) = BigRat(src(r, c));
    }
    return m;
  }

  Mat to_double() const {
    Mat out(rows, cols);
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) {
        out(r, c) = at(r, c).convert_to<double>();
      }
    }
    return out;
  }

  RatMatrix operator*(const RatMatrix& o) const {
    RatMatrix out(rows, o.cols);
    for (int r = 0; r < rows; ++r) {
      for (int k = 0; k < cols; ++k) {
        const BigRat& v = at(r, k);
        if (v == 0) continue;
        for (int c = 0; c < o.cols; ++c) {
          if (o.at(k, c) != 0) out.at(r, c) += v * o.at(k, c);
        }
      }
    }
    return out;
  }

  RatMatrix operator-(const RatMatrix& o) const {
    RatMatrix out(rows, cols);
    for (size_t i = 0; i < a.size(); ++i) out.a[i] = a[i] - o.a[i];
    return out;
  }

  bool is_zero() const {
    for (const BigRat& v : a) {
      if (v != 0) return false;
    }
    return true;
  }

  // Gauss-Jordan with exact pivots; throws on a singular input.
  RatMatrix inverse() const {
    if (rows != cols) throw SpnetError("inverse of a non-square matrix");
    int n = rows;
    RatMatrix w = *this;
    RatMatrix inv = identity(n);
    for (int col = 0; col < n; ++col) {
      int piv = -1;
      for (int r = col; r < n; ++r) {
        if (w.at(r, col) != 0) {
          piv = r;
          break;
        }
      }
      if (piv < 0) throw SpnetError("matrix is singular (exact)");
      if (piv != col) {
        for (int c = 0; c < n; ++c) {
          std::swap(w.at(piv, c), w.at(col, c));
          std::swap(inv.at(piv, c), inv.at(col, c));
        }
      }
      BigRat p = w.at(col, col);
      for (int c = 0; c < n; ++c) {
        w.at(col, c) /= p;
        inv.at(col, c) /= p;
      }
      for (int r = 0; r < n; ++r) {
        if (r == col || w.at(r, col) == 0) continue;
        BigRat f = w.at(r, col);
        for (int c = 0; c < n; ++c) {
          w.at(r, c) -= f * w.at(col, c);
          inv.at(r, c) -= f * inv.at(col, c);
        }
      }
    }
    return inv;
  }

  int rank() const {
    RatMatrix w = *this;
    int rk = 0;
    for (int col = 0; col < cols && rk < rows; ++col) {
      int piv = -1;
      for (int r = rk; r < rows; ++r) {
        if (w.at(r, col) != 0) {
          piv = r;
          break;
        }
      }
      if (piv < 0) continue;
      if (piv != rk) {
        for (int c = 0; c < cols; ++c) std::swap(w.at(piv, c), w.at(rk, c));
      }
      for (int r = rk + 1; r < rows; ++r) {
        if (w.at(r, col) == 0) continue;
        BigRat f = w.at(r, col) / w.at(rk, col);
        for (int c = col; c < cols; ++c) w.at(r, c) -= f * w.at(rk, c);
      }
      ++rk;
    }
    return rk;
  }
};

}  // namespace spnet
