/*
 * Copyright 2026 The KAN-MCP Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef KANMCP_DRD_MIB_HPP
#define KANMCP_DRD_MIB_HPP

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "kanmcp/autodiff.hpp"
#include "kanmcp/modality.hpp"
#include "kanmcp/rng.hpp"

namespace kanmcp::mib {

/// y = x W + b, with W: [in, out] and b: [out].
class Affine {
 public:
  Affine() = default;
  Affine(const std::string& name, std::size_t in, std::size_t out);

  Var forward(const Var& x) const;
  /// W ~ U(-1/sqrt(in), 1/sqrt(in)), b = 0.
  void init_uniform(Rng& rng);

  std::size_t in() const { return weight_.shape()[0]; }
  std::size_t out() const { return weight_.shape()[1]; }
  Parameter& weight() { return weight_; }
  const Parameter& weight() const { return weight_; }
  Parameter& bias() { return bias_; }
  const Parameter& bias() const { return bias_; }

 private:
  Parameter weight_;
  Parameter bias_;
};

/// Diagonal-Gaussian encoder: separate mean and log-variance networks, each
/// affine -> silu -> affine. Log-variances are clamped to [-10, 10].
class GaussianEncoder {
 public:
  static constexpr Scalar kLogVarMin = -10;
  static constexpr Scalar kLogVarMax = 10;

  GaussianEncoder() = default;
  GaussianEncoder(const std::string& name, std::size_t d_in, std::size_t mid_dim, std::size_t d_code);

  std::size_t d_in() const { return mu_hidden_.in(); }
  std::size_t mid_dim() const { return mu_hidden_.out(); }
  std::size_t d_code() const { return mu_out_.out(); }

  Var mean(const Var& x) const;
  Var log_variance(const Var& x) const;

  Affine& mu_hidden() { return mu_hidden_; }
  Affine& mu_out() { return mu_out_; }
  Affine& logvar_hidden() { return logvar_hidden_; }
  Affine& logvar_out() { return logvar_out_; }

  /// Layers in a fixed order: mu.fc1, mu.fc2, logvar.fc1, logvar.fc2.
  std::vector<const Affine*> layers() const { return {&mu_hidden_, &mu_out_, &logvar_hidden_, &logvar_out_}; }
  std::vector<Parameter*> parameters();

  void init(Rng& rng);

 private:
  Affine mu_hidden_;
  Affine mu_out_;
  Affine logvar_hidden_;
  Affine logvar_out_;
};

/// Reparameterized code h = mu + exp(logvar / 2) * eps.
struct Code {
  Var mu;
  Var logvar;
  Var sample;
  Tensor eps;
};

/// x: [batch, d_in], eps: [batch, d_code].
Code encode(const GaussianEncoder& enc, const Var& x, const Tensor& eps);

/// 1/2 sum (mu^2 + exp(logvar) - 1 - logvar): KL(N(mu, diag) || N(0, I))
/// summed over every entry (and so over the batch).
Var kl_std_normal(const Var& mu, const Var& logvar);

/// Mean over the batch (rows) of the L1 distance between prediction and
/// target rows.
Var nll_mae(const Var& prediction, const Var& target);

struct LossTerms {
  Var total;
  Var multimodal;                 // nll_mae(y_multi, y)
  PerModality<Var> unimodal;      // nll_mae(y^m, y) + beta * KL^m / batch
  PerModality<Var> unimodal_mae;  // nll_mae(y^m, y)
  PerModality<Var> kl;            // KL^m / batch
};

/// Negated DRD-MIB objective with its per-term decomposition. Throws
/// MissingModality unless every modality has a prediction and a code.
LossTerms drd_mib_loss(const Var& y_multi, const std::map<Modality, Var>& y_unimodal,
                       const std::map<Modality, Code>& codes, const Var& y, Scalar beta);

}  // namespace kanmcp::mib

#endif  // KANMCP_DRD_MIB_HPP
