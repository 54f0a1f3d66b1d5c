#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

namespace btvtvar {

// Dense matrices are stored row-major throughout; N stays small (<= ~100)
// so sparse storage is not worth the indirection.
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vec = Eigen::VectorXd;

// One rank-1 base: A*_{j} = alpha3[j] * alpha1 * alpha2^T, j = 1..P.
struct TensorComponent {
  Vec alpha1;  // length N
  Vec alpha2;  // length N
  Vec alpha3;  // length P (lag mode)

  int n() const { return static_cast<int>(alpha1.size()); }
  int p() const { return static_cast<int>(alpha3.size()); }
};

// Ordered list of P dense N x N coefficient matrices [A_1, ..., A_P].
struct CoefMatrixSet {
  std::vector<Mat> matrices;

  int p() const { return static_cast<int>(matrices.size()); }
  int n() const { return matrices.empty() ? 0 : static_cast<int>(matrices[0].rows()); }
};

// Binary activation series gamma_t for t = P+1..T (stored 0-based, length T-P).
struct ActivationPath {
  std::vector<int> gamma;

  int length() const { return static_cast<int>(gamma.size()); }
};

// T x N observation matrix, rows = time points.
struct TimeSeries {
  Mat values;
  std::vector<std::string> names;  // column labels, kept for reports

  int t_len() const { return static_cast<int>(values.rows()); }
  int n_dim() const { return static_cast<int>(values.cols()); }
};

inline void check_component(const TensorComponent& c, int n, int p) {
  if (c.alpha1.size() != n || c.alpha2.size() != n || c.alpha3.size() != p)
    throw std::invalid_argument("TensorComponent: margin lengths do not match (N, N, P)");
  if (!c.alpha1.allFinite() || !c.alpha2.allFinite() || !c.alpha3.allFinite())
    throw std::invalid_argument("TensorComponent: non-finite entry");
}

inline void check_path(const ActivationPath& path) {
  for (int g : path.gamma)
    if (g != 0 && g != 1) throw std::invalid_argument("ActivationPath: entries must be 0/1");
}

}  // namespace btvtvar
