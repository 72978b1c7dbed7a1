#include "bodyflow/mlp_field.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include <json.hpp>

#include "bodyflow/error.hpp"
#include "bodyflow/rng.hpp"
#include "bodyflow/surface_sampling.hpp"

namespace bodyflow {

namespace {

double activate(Activation a, double z) {
  switch (a) {
    case Activation::Softplus:
      return z > 30.0 ? z : std::log1p(std::exp(z));
    case Activation::Tanh:
      return std::tanh(z);
    case Activation::Silu:
      return z / (1.0 + std::exp(-z));
  }
  return z;
}

const char* activation_name(Activation a) {
  switch (a) {
    case Activation::Softplus:
      return "softplus";
    case Activation::Tanh:
      return "tanh";
    case Activation::Silu:
      return "silu";
  }
  return "softplus";
}

}  // namespace

void MlpWeights::validate() const {
  if (static_cast<int>(weight.size()) != kLayers || static_cast<int>(bias.size()) != kLayers)
    throw ValidationError("MLP must have exactly 6 layers");
  if (fourier_frequencies < 0) throw ValidationError("negative Fourier frequency count");
  if (pose_dim < 6 || (pose_dim - 3) % 3 != 0) throw ValidationError("MLP pose_dim is not 3 + 3J");
  const int enc = encoded_input_dim();
  int in = enc;
  for (int l = 0; l < kLayers; ++l) {
    if (weight[l].cols() != in)
      throw ValidationError("MLP layer " + std::to_string(l) + " expects " + std::to_string(weight[l].cols()) +
                            " inputs, chain provides " + std::to_string(in));
    if (bias[l].size() != weight[l].rows())
      throw ValidationError("MLP layer " + std::to_string(l) + " bias length mismatch");
    if (!weight[l].allFinite() || !bias[l].allFinite())
      throw ValidationError("MLP layer " + std::to_string(l) + " has non-finite values");
    in = static_cast<int>(weight[l].rows()) + enc;
  }
  if (weight.back().rows() != 3) throw ValidationError("MLP output layer must have 3 rows");
}

Eigen::VectorXd fourier_encode(const Eigen::VectorXd& v, int frequencies) {
  if (frequencies < 0) throw ValidationError("negative Fourier frequency count");
  const int block = 2 * frequencies + 1;
  Eigen::VectorXd out(v.size() * block);
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double s = v(i);
    out(i * block) = s;
    double freq = std::numbers::pi;
    for (int k = 0; k < frequencies; ++k) {
      out(i * block + 1 + 2 * k) = std::sin(freq * s);
      out(i * block + 2 + 2 * k) = std::cos(freq * s);
      freq *= 2.0;
    }
  }
  return out;
}

Eigen::Vector3d mlp_forward(const MlpWeights& weights, const Eigen::VectorXd& encoded) {
  Eigen::VectorXd h = encoded;
  for (int l = 0; l < MlpWeights::kLayers; ++l) {
    Eigen::VectorXd z = weights.weight[l] * h + weights.bias[l];
    if (l + 1 == MlpWeights::kLayers) return z.head<3>();
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = activate(weights.activation, z(i));
    h.resize(z.size() + encoded.size());
    h << z, encoded;
  }
  return Eigen::Vector3d::Zero();
}

Eigen::VectorXd mlp_field_eval(const MlpWeights& weights, const SkinnedModel& model,
                               const SampleSet& samples, const PointCloud& positions,
                               const Pose& theta_t, const Pose& theta_1, double dt) {
  if (!(dt > 0.0)) throw ValidationError("time left must be positive");
  if (weights.pose_dim != model.pose_dim() || theta_t.theta.size() != model.pose_dim() ||
      theta_1.theta.size() != model.pose_dim())
    throw ValidationError("MLP pose dimension does not match the model");
  if (positions.size() != samples.size()) throw ValidationError("positions do not match samples");

  const int S = samples.size();
  const PointCloud goal = evaluate_attachments(model, theta_1, samples);
  double speed = 0.0;
  for (int i = 0; i < S; ++i) speed += (goal.points.row(i) - positions.points.row(i)).norm();
  speed /= S * dt;

  Eigen::VectorXd out = Eigen::VectorXd::Zero(3 * S);
  if (speed == 0.0) return out;

  const int d = model.pose_dim();
  const int block = 2 * weights.fourier_frequencies + 1;
  Eigen::VectorXd raw(weights.raw_input_dim());
  raw.segment(3, d) = theta_t.theta;
  raw.segment(3 + d, d) = theta_1.theta;
  raw(3 + 2 * d) = dt;
  // Shared part of the encoding is computed once; only x changes per sample.
  Eigen::VectorXd encoded = fourier_encode(raw, weights.fourier_frequencies);
  for (int i = 0; i < S; ++i) {
    encoded.head(3 * block) = fourier_encode(positions.points.row(i).transpose(), weights.fourier_frequencies);
    out.segment<3>(3 * i) = speed * mlp_forward(weights, encoded);
  }
  return out;
}

MlpWeights random_mlp(int pose_dim, int hidden, int frequencies, double scale, std::uint64_t seed) {
  MlpWeights w;
  w.pose_dim = pose_dim;
  w.fourier_frequencies = frequencies;
  std::mt19937_64 rng(seed);
  const int enc = w.encoded_input_dim();
  int in = enc;
  for (int l = 0; l < MlpWeights::kLayers; ++l) {
    const int out = l + 1 == MlpWeights::kLayers ? 3 : hidden;
    Eigen::MatrixXd m(out, in);
    const double s = scale / std::sqrt(static_cast<double>(in));
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = uniform(rng, -s, s);
    Eigen::VectorXd b(out);
    for (int i = 0; i < out; ++i) b(i) = uniform(rng, -0.1, 0.1);
    w.weight.push_back(std::move(m));
    w.bias.push_back(std::move(b));
    in = hidden + enc;
  }
  return w;
}

MlpWeights load_mlp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open MLP weights file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("malformed MLP weights file: " + std::string(e.what()));
  }
  try {
    MlpWeights w;
    w.fourier_frequencies = j.at("fourier_frequencies").get<int>();
    w.pose_dim = j.at("pose_dim").get<int>();
    const std::string act = j.value("activation", "softplus");
    if (act == "softplus")
      w.activation = Activation::Softplus;
    else if (act == "tanh")
      w.activation = Activation::Tanh;
    else if (act == "silu")
      w.activation = Activation::Silu;
    else
      throw ValidationError("unknown activation: " + act);
    const std::vector<std::string> layout = j.value("input_layout", std::vector<std::string>{"x", "theta_t", "theta_1", "dt"});
    if (layout != std::vector<std::string>{"x", "theta_t", "theta_1", "dt"})
      throw ValidationError("unsupported MLP input layout");
    for (const auto& layer : j.at("layers")) {
      const int rows = layer.at("rows").get<int>();
      const int cols = layer.at("cols").get<int>();
      const auto values = layer.at("weight").get<std::vector<double>>();
      const auto bias = layer.at("bias").get<std::vector<double>>();
      if (static_cast<long>(values.size()) != static_cast<long>(rows) * cols)
        throw ValidationError("MLP layer weight count does not match its shape");
      w.weight.push_back(Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
          values.data(), rows, cols));
      w.bias.push_back(Eigen::Map<const Eigen::VectorXd>(bias.data(), static_cast<Eigen::Index>(bias.size())));
    }
    w.validate();
    return w;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("malformed MLP weights file: " + std::string(e.what()));
  }
}

void save_mlp(const MlpWeights& weights, const std::string& path) {
  nlohmann::json j;
  j["format"] = "bodyflow-mlp";
  j["fourier_frequencies"] = weights.fourier_frequencies;
  j["pose_dim"] = weights.pose_dim;
  j["activation"] = activation_name(weights.activation);
  j["input_layout"] = {"x", "theta_t", "theta_1", "dt"};
  j["layers"] = nlohmann::json::array();
  for (int l = 0; l < static_cast<int>(weights.weight.size()); ++l) {
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> m = weights.weight[l];
    j["layers"].push_back({{"rows", m.rows()},
                           {"cols", m.cols()},
                           {"weight", std::vector<double>(m.data(), m.data() + m.size())},
                           {"bias", std::vector<double>(weights.bias[l].data(), weights.bias[l].data() + weights.bias[l].size())}});
  }
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write MLP weights file: " + path);
  out << j.dump() << '\n';
}

}  // namespace bodyflow
