#include "r2f/na_attention.hpp"

#include <cmath>
#include <iomanip>
#include <random>

namespace r2f
{

void PatchGrid::validate() const
{
  if (rows == 0 || cols == 0) {
    throw InvalidArgument("PatchGrid: empty grid");
  }
  const std::size_t n = size();
  if (keys.size() != n || values.size() != n || centers.size() != n) {
    throw InvalidArgument("PatchGrid: keys/values/centers must all hold rows*cols entries");
  }
  for (std::size_t i = 1; i < n; ++i) {
    if (keys[i].size() != keys[0].size() || values[i].size() != values[0].size()) {
      throw InvalidArgument("PatchGrid: inconsistent vector dimensions");
    }
  }
}

PatchGrid PatchGrid::random(std::size_t rows, std::size_t cols, std::size_t key_dim,
                            std::size_t value_dim, double patch_px, std::uint64_t seed)
{
  std::mt19937_64 rng(mix64(seed));
  std::normal_distribution<double> normal(0.0, 1.0);
  PatchGrid grid;
  grid.rows = rows;
  grid.cols = cols;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      Eigen::VectorXd k(static_cast<Eigen::Index>(key_dim));
      Eigen::VectorXd v(static_cast<Eigen::Index>(value_dim));
      for (auto & x : k) x = normal(rng);
      for (auto & x : v) x = normal(rng);
      grid.keys.push_back(std::move(k));
      grid.values.push_back(std::move(v));
      grid.centers.emplace_back((static_cast<double>(c) + 0.5) * patch_px,
                                (static_cast<double>(r) + 0.5) * patch_px);
    }
  }
  return grid;
}

double standard_sim(const Eigen::VectorXd & q, const Eigen::VectorXd & k)
{
  if (q.size() != k.size() || q.size() == 0) {
    throw InvalidArgument("standard_sim: dimension mismatch");
  }
  return q.dot(k) / std::sqrt(static_cast<double>(q.size()));
}

double naclip_sim(const Eigen::VectorXd & k_i, const Eigen::VectorXd & k_j, const Vec2 & u_i,
                  const Vec2 & u_j, double sigma)
{
  if (!(sigma > 0.0)) {
    throw InvalidArgument("naclip_sim: sigma must be > 0");
  }
  const double d2 = (u_i - u_j).squaredNorm();
  return standard_sim(k_i, k_j) * std::exp(-d2 / (2.0 * sigma * sigma));
}

Eigen::MatrixXd na_attention_weights(const PatchGrid & grid, double sigma)
{
  grid.validate();
  if (!(sigma > 0.0)) {
    throw InvalidArgument("na_attention_weights: sigma must be > 0");
  }
  const auto n = static_cast<Eigen::Index>(grid.size());
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(grid.keys[0].size()));
  const double inv_two_s2 = 1.0 / (2.0 * sigma * sigma);

  // Gram matrix of keys, scaled, then modulated by the spatial Gaussian.
  Eigen::MatrixXd keys(grid.keys[0].size(), n);
  for (Eigen::Index j = 0; j < n; ++j) {
    keys.col(j) = grid.keys[static_cast<std::size_t>(j)];
  }
  Eigen::MatrixXd logits = (keys.transpose() * keys) * inv_sqrt_d;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double d2 =
        (grid.centers[static_cast<std::size_t>(i)] - grid.centers[static_cast<std::size_t>(j)])
          .squaredNorm();
      logits(i, j) *= std::exp(-d2 * inv_two_s2);
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const double m = logits.row(i).maxCoeff();
    logits.row(i) = (logits.row(i).array() - m).exp();
    logits.row(i) /= logits.row(i).sum();
  }
  return logits;
}

std::vector<Eigen::VectorXd> na_attend(const PatchGrid & grid, double sigma)
{
  const Eigen::MatrixXd w = na_attention_weights(grid, sigma);
  const auto n = static_cast<Eigen::Index>(grid.size());
  Eigen::MatrixXd values(grid.values[0].size(), n);
  for (Eigen::Index j = 0; j < n; ++j) {
    values.col(j) = grid.values[static_cast<std::size_t>(j)];
  }
  const Eigen::MatrixXd out = values * w.transpose();
  std::vector<Eigen::VectorXd> result;
  result.reserve(grid.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    result.emplace_back(out.col(i));
  }
  return result;
}

void write_attention_csv(std::ostream & out, const Eigen::MatrixXd & weights)
{
  out << "i,j,weight\n";
  out << std::setprecision(17);
  for (Eigen::Index i = 0; i < weights.rows(); ++i) {
    for (Eigen::Index j = 0; j < weights.cols(); ++j) {
      out << i << ',' << j << ',' << weights(i, j) << '\n';
    }
  }
}

}  // namespace r2f
