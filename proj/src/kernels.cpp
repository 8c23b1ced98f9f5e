#include "udft/kernels.hpp"

namespace udft::kernels {

std::vector<double> row_sq_norms(const MatrixD& m) {
  std::vector<double> out(m.rows(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double s = 0.0;
    for (double v : m.row(i)) s += v * v;
    out[i] = s;
  }
  return out;
}

}  // namespace udft::kernels
