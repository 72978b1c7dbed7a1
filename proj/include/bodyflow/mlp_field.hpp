#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "bodyflow/body_model.hpp"

namespace bodyflow {

enum class Activation { Softplus, Tanh, Silu };

/// Fully connected network whose hidden outputs are each concatenated with
/// the encoded input before the next layer. Input layout before encoding:
/// [x (3), theta(t) (d), theta_1 (d), dt (1)].
struct MlpWeights {
  static constexpr int kLayers = 6;
  int fourier_frequencies = 20;
  int pose_dim = 0;
  Activation activation = Activation::Softplus;
  std::vector<Eigen::MatrixXd> weight;
  std::vector<Eigen::VectorXd> bias;

  int raw_input_dim() const { return 4 + 2 * pose_dim; }
  int encoded_input_dim() const { return raw_input_dim() * (2 * fourier_frequencies + 1); }
  /// Throws ValidationError unless the six layers chain consistently.
  void validate() const;
};

/// [s, sin(2^0 pi s), cos(2^0 pi s), ..., sin(2^(n-1) pi s), cos(2^(n-1) pi s)]
/// for every scalar s of v.
Eigen::VectorXd fourier_encode(const Eigen::VectorXd& v, int frequencies);

/// Raw 3-vector output for one encoded input.
Eigen::Vector3d mlp_forward(const MlpWeights& weights, const Eigen::VectorXd& encoded);

/// Per-sample network output scaled by the expected speed
/// mean_i |x_i(theta_1) - x_i(theta_t)| / dt.
Eigen::VectorXd mlp_field_eval(const MlpWeights& weights, const SkinnedModel& model,
                               const SampleSet& samples, const PointCloud& positions,
                               const Pose& theta_t, const Pose& theta_1, double dt);

/// Random weights with the given hidden width (for tests and demos).
MlpWeights random_mlp(int pose_dim, int hidden, int frequencies, double scale, std::uint64_t seed);

MlpWeights load_mlp(const std::string& path);
void save_mlp(const MlpWeights& weights, const std::string& path);

}  // namespace bodyflow
