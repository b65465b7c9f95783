#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cmath>
#include <filesystem>
#include <functional>
#include <random>
#include <string>

#include "vgcrl/ndmath/graph.hpp"
#include "vgcrl/rng.hpp"

namespace testutil {

inline vgcrl::nd::Tensor random_tensor(std::size_t rows, std::size_t cols, vgcrl::Rng& rng,
                                       double scale = 1.0) {
  vgcrl::nd::Tensor t = vgcrl::nd::Tensor::zeros(rows, cols);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = scale * rng.normal();
  return t;
}

// Independent spectral-norm oracle (full SVD via Eigen).
inline double svd_sigma_max(const vgcrl::nd::Tensor& w) {
  Eigen::MatrixXd m(w.rows(), w.cols());
  for (std::size_t i = 0; i < w.rows(); ++i)
    for (std::size_t j = 0; j < w.cols(); ++j) m(i, j) = w.at(i, j);
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues()(0);
}

// Central-difference gradient check for a scalar loss over a set of
// parameters. `loss` must rebuild the graph from the current parameter
// values. Returns the worst relative error.
inline double gradcheck(const std::function<double()>& loss,
                        const std::function<void()>& backward_into_grads,
                        std::vector<vgcrl::nd::Parameter*> params, double h = 1e-5) {
  for (auto* p : params) p->zero_grad();
  backward_into_grads();
  double worst = 0.0;
  for (auto* p : params) {
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const double saved = p->value[i];
      p->value[i] = saved + h;
      const double fp = loss();
      p->value[i] = saved - h;
      const double fm = loss();
      p->value[i] = saved;
      const double numeric = (fp - fm) / (2.0 * h);
      const double analytic = p->grad[i];
      const double rel =
          std::abs(analytic - numeric) / std::max({1.0, std::abs(analytic), std::abs(numeric)});
      worst = std::max(worst, rel);
    }
  }
  return worst;
}

// Scratch directory unique to a test binary.
inline std::filesystem::path scratch_dir(const std::string& tag) {
  auto dir = std::filesystem::temp_directory_path() / ("vgcrl_test_" + tag);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testutil
