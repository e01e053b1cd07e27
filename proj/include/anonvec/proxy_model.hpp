// anonvec/proxy_model.hpp

// Copyright 2026  The anonvec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Frozen feed-forward stand-in for the synthesis model and its loss.
//
// The network input is the embedding followed by the conditioning features,
// [x' ; cond]. Each layer computes act(W a + b) with act in {identity, tanh}.
// The loss is the mean squared error against a target output. Only the
// gradient with respect to x' is ever needed; weights never change after
// construction.

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "anonvec/embedding.hpp"
#include "anonvec/embedding_io.hpp"
#include "anonvec/error.hpp"
#include "anonvec/random.hpp"

namespace anonvec {

enum class Activation { Identity, Tanh };

inline std::string_view to_string(Activation a) {
  return a == Activation::Tanh ? "tanh" : "identity";
}

struct DenseLayer {
  std::size_t rows = 0;
  std::size_t cols = 0;
  Vector weights;  // row-major, rows x cols
  Vector bias;     // rows
  Activation activation = Activation::Identity;

  double w(std::size_t r, std::size_t c) const { return weights[r * cols + c]; }
};

struct ProxyTarget {
  Vector target;
};

class ProxyModel {
 public:
  ProxyModel() = default;

  /// `input_dim` is the full network input, embedding plus cond.
  ProxyModel(std::size_t input_dim, std::size_t cond_dim,
             std::vector<DenseLayer> layers)
      : input_dim_(input_dim), cond_dim_(cond_dim), layers_(std::move(layers)) {
    if (layers_.empty())
      fail(ErrorKind::DimensionChainBroken, "model has no layers");
    if (cond_dim_ > input_dim_)
      fail(ErrorKind::DimensionChainBroken, "cond_dim exceeds input_dim");
    std::size_t prev = input_dim_;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      const auto &l = layers_[i];
      const std::string tag = "layer " + std::to_string(i);
      if (l.cols != prev)
        fail(ErrorKind::DimensionChainBroken,
             tag + " expects " + std::to_string(l.cols) + " inputs, gets " +
                 std::to_string(prev));
      if (l.weights.size() != l.rows * l.cols)
        fail(ErrorKind::DimensionChainBroken,
             tag + " weight count does not match rows x cols");
      if (l.bias.size() != l.rows)
        fail(ErrorKind::DimensionChainBroken,
             tag + " bias length does not match rows");
      if (!all_finite(l.weights) || !all_finite(l.bias))
        fail(ErrorKind::InvalidArgument, tag + " has non-finite parameters");
      prev = l.rows;
    }
  }

  std::size_t input_dim() const { return input_dim_; }
  std::size_t cond_dim() const { return cond_dim_; }
  std::size_t embedding_dim() const { return input_dim_ - cond_dim_; }
  std::size_t output_dim() const { return layers_.back().rows; }
  const std::vector<DenseLayer> &layers() const { return layers_; }

 private:
  std::size_t input_dim_ = 0;
  std::size_t cond_dim_ = 0;
  std::vector<DenseLayer> layers_;
};

namespace detail {

inline Vector model_input(const ProxyModel &model,
                          std::span<const double> x_prime,
                          std::span<const double> cond) {
  if (x_prime.size() + cond.size() != model.input_dim() ||
      cond.size() != model.cond_dim())
    fail(ErrorKind::DimensionMismatch,
         "proxy expects " + std::to_string(model.embedding_dim()) + " + " +
             std::to_string(model.cond_dim()) + " inputs, got " +
             std::to_string(x_prime.size()) + " + " +
             std::to_string(cond.size()));
  Vector a(x_prime.begin(), x_prime.end());
  a.insert(a.end(), cond.begin(), cond.end());
  return a;
}

inline Vector dense(const DenseLayer &l, std::span<const double> a) {
  Vector z(l.bias);
  for (std::size_t r = 0; r < l.rows; ++r) {
    double s = 0.0;
    const double *row = l.weights.data() + r * l.cols;
    for (std::size_t c = 0; c < l.cols; ++c) s += row[c] * a[c];
    z[r] += s;
  }
  return z;
}

inline void activate(Activation act, Vector &z) {
  if (act == Activation::Tanh)
    for (double &v : z) v = std::tanh(v);
}

inline void check_target(const ProxyModel &model, const ProxyTarget &t) {
  if (t.target.size() != model.output_dim())
    fail(ErrorKind::DimensionMismatch,
         "target has dimension " + std::to_string(t.target.size()) +
             ", model output is " + std::to_string(model.output_dim()));
}

}  // namespace detail

inline Vector forward(const ProxyModel &model, std::span<const double> x_prime,
                      std::span<const double> cond = {}) {
  Vector a = detail::model_input(model, x_prime, cond);
  for (const auto &l : model.layers()) {
    a = detail::dense(l, a);
    detail::activate(l.activation, a);
  }
  return a;
}

inline double mse(std::span<const double> out, std::span<const double> target) {
  double s = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double e = out[i] - target[i];
    s += e * e;
  }
  return s / static_cast<double>(out.size());
}

inline double loss(const ProxyModel &model, std::span<const double> x_prime,
                   std::span<const double> cond, const ProxyTarget &target) {
  detail::check_target(model, target);
  return mse(forward(model, x_prime, cond), target.target);
}

struct LossAndGrad {
  double loss = 0.0;
  Vector grad;  // d loss / d x_prime
};

/// Loss and its exact reverse-mode gradient with respect to x_prime.
inline LossAndGrad loss_and_grad(const ProxyModel &model,
                                 std::span<const double> x_prime,
                                 std::span<const double> cond,
                                 const ProxyTarget &target) {
  detail::check_target(model, target);
  const auto &layers = model.layers();
  // activations[0] is the input, activations[i + 1] the output of layer i
  std::vector<Vector> activations;
  activations.reserve(layers.size() + 1);
  activations.push_back(detail::model_input(model, x_prime, cond));
  for (const auto &l : layers) {
    Vector z = detail::dense(l, activations.back());
    detail::activate(l.activation, z);
    activations.push_back(std::move(z));
  }

  const Vector &out = activations.back();
  const double m = static_cast<double>(out.size());
  LossAndGrad result;
  result.loss = mse(out, target.target);

  Vector delta(out.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    delta[i] = 2.0 / m * (out[i] - target.target[i]);

  for (std::size_t li = layers.size(); li-- > 0;) {
    const auto &l = layers[li];
    if (l.activation == Activation::Tanh) {
      const Vector &y = activations[li + 1];
      for (std::size_t r = 0; r < l.rows; ++r) delta[r] *= 1.0 - y[r] * y[r];
    }
    Vector prev(l.cols, 0.0);
    for (std::size_t r = 0; r < l.rows; ++r) {
      const double *row = l.weights.data() + r * l.cols;
      const double d = delta[r];
      for (std::size_t c = 0; c < l.cols; ++c) prev[c] += row[c] * d;
    }
    delta = std::move(prev);
  }
  delta.resize(x_prime.size());
  result.grad = std::move(delta);
  return result;
}

inline Vector grad_wrt_input(const ProxyModel &model,
                             std::span<const double> x_prime,
                             std::span<const double> cond,
                             const ProxyTarget &target) {
  return loss_and_grad(model, x_prime, cond, target).grad;
}

// Weight file:
//   {"input_dim":..., "cond_dim":..., "layers":[{"rows","cols","weights",
//    "bias","activation"}]}
// where input_dim counts embedding and cond inputs together.

inline Json to_json(const ProxyModel &model) {
  Json layers = Json::array();
  for (const auto &l : model.layers())
    layers.push_back({{"rows", l.rows},
                      {"cols", l.cols},
                      {"weights", l.weights},
                      {"bias", l.bias},
                      {"activation", std::string(to_string(l.activation))}});
  return {{"input_dim", model.input_dim()},
          {"cond_dim", model.cond_dim()},
          {"layers", std::move(layers)}};
}

inline ProxyModel proxy_from_json(const Json &j) {
  auto need = [&](const Json &obj, const char *key) -> const Json & {
    if (!obj.is_object() || !obj.contains(key))
      fail(ErrorKind::ParseError, std::string("missing field '") + key + "'");
    return obj.at(key);
  };
  auto need_size = [&](const Json &obj, const char *key) {
    const Json &v = need(obj, key);
    if (!v.is_number_unsigned())
      fail(ErrorKind::ParseError,
           std::string("field '") + key + "' must be a non-negative integer");
    return v.get<std::size_t>();
  };
  const std::size_t input_dim = need_size(j, "input_dim");
  const std::size_t cond_dim = need_size(j, "cond_dim");
  const Json &jl = need(j, "layers");
  if (!jl.is_array()) fail(ErrorKind::ParseError, "'layers' must be an array");
  std::vector<DenseLayer> layers;
  for (const auto &e : jl) {
    DenseLayer l;
    l.rows = need_size(e, "rows");
    l.cols = need_size(e, "cols");
    l.weights = detail::parse_number_array(need(e, "weights"), "weights", 0);
    l.bias = detail::parse_number_array(need(e, "bias"), "bias", 0);
    const Json &act = need(e, "activation");
    if (act == "tanh")
      l.activation = Activation::Tanh;
    else if (act == "identity")
      l.activation = Activation::Identity;
    else
      fail(ErrorKind::ParseError, "activation must be 'identity' or 'tanh'");
    layers.push_back(std::move(l));
  }
  return ProxyModel(input_dim, cond_dim, std::move(layers));
}

inline ProxyModel load_proxy(const std::string &path) {
  auto in = detail::open_input(path);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error &e) {
    fail(ErrorKind::ParseError, path + ": " + e.what());
  }
  try {
    return proxy_from_json(j);
  } catch (const Error &e) {
    throw Error(e.kind(), path + ": " + e.message());
  }
}

inline void save_proxy(const ProxyModel &model, const std::string &path) {
  auto out = detail::open_output(path);
  out << to_json(model).dump() << '\n';
  if (!out) fail(ErrorKind::Io, "write failed: " + path);
}

inline ProxyModel identity_proxy(std::size_t dim) {
  DenseLayer l{dim, dim, Vector(dim * dim, 0.0), Vector(dim, 0.0),
               Activation::Identity};
  for (std::size_t i = 0; i < dim; ++i) l.weights[i * dim + i] = 1.0;
  return ProxyModel(dim, 0, {std::move(l)});
}

/// Seeded tanh -> identity network, the desk-scale "pretrained" synthesizer.
/// Weights are N(0, 1/fan_in), biases N(0, 0.1^2).
inline ProxyModel random_proxy(std::size_t embedding_dim, std::size_t cond_dim,
                               std::size_t hidden, std::size_t output,
                               std::uint64_t seed) {
  Rng rng(seed);
  auto make = [&](std::size_t rows, std::size_t cols, Activation act) {
    DenseLayer l{rows, cols, Vector(rows * cols), Vector(rows), act};
    const double sd = 1.0 / std::sqrt(static_cast<double>(cols));
    for (double &w : l.weights) w = rng.normal(0.0, sd);
    for (double &b : l.bias) b = rng.normal(0.0, 0.1);
    return l;
  };
  const std::size_t in = embedding_dim + cond_dim;
  std::vector<DenseLayer> layers;
  layers.push_back(make(hidden, in, Activation::Tanh));
  layers.push_back(make(output, hidden, Activation::Identity));
  return ProxyModel(in, cond_dim, std::move(layers));
}

}  // namespace anonvec
