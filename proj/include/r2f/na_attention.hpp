#ifndef R2F_NA_ATTENTION_HPP
#define R2F_NA_ATTENTION_HPP

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <vector>

#include <Eigen/Core>

#include "r2f/common.hpp"

namespace r2f
{

/// Row-major grid of patch tokens: a key, a value and an image-plane centre
/// (pixels) per patch.
struct PatchGrid
{
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<Eigen::VectorXd> keys;
  std::vector<Eigen::VectorXd> values;
  std::vector<Vec2> centers;

  std::size_t size() const { return rows * cols; }

  /// Throws InvalidArgument on shape or dimension inconsistencies.
  void validate() const;

  /// rows x cols grid of seeded Gaussian keys/values with centres on a
  /// regular lattice of `patch_px` pixels.
  static PatchGrid random(std::size_t rows, std::size_t cols, std::size_t key_dim,
                          std::size_t value_dim, double patch_px, std::uint64_t seed);
};

/// q.k / sqrt(D).
double standard_sim(const Eigen::VectorXd & q, const Eigen::VectorXd & k);

/// Key-key similarity modulated by a Gaussian of the patch-centre distance:
/// (k_i.k_j / sqrt(D)) * exp(-|u_i - u_j|^2 / (2 sigma^2)).
double naclip_sim(const Eigen::VectorXd & k_i, const Eigen::VectorXd & k_j, const Vec2 & u_i,
                  const Vec2 & u_j, double sigma);

/// N x N row-stochastic matrix: row i is softmax_j(naclip_sim(i, j)).
Eigen::MatrixXd na_attention_weights(const PatchGrid & grid, double sigma);

/// Per-patch attention output: sum_j weight_ij * value_j.
std::vector<Eigen::VectorXd> na_attend(const PatchGrid & grid, double sigma);

/// Writes an attention matrix as CSV ("i,j,weight" rows with a header).
void write_attention_csv(std::ostream & out, const Eigen::MatrixXd & weights);

}  // namespace r2f

#endif  // R2F_NA_ATTENTION_HPP
