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

#include "kanmcp/drd_mib.hpp"

#include <cmath>

#include "kanmcp/error.hpp"

namespace kanmcp::mib {

Affine::Affine(const std::string& name, std::size_t in, std::size_t out)
    : weight_(name + ".weight", Tensor::zeros({in, out})), bias_(name + ".bias", Tensor::zeros({out})) {}

Var Affine::forward(const Var& x) const {
  const Var xw = matmul(x, weight_.var());
  return add(xw, repeat_rows(bias_.var(), xw.shape()[0]));
}

void Affine::init_uniform(Rng& rng) {
  const Scalar bound = Scalar{1} / std::sqrt(static_cast<Scalar>(in()));
  for (Scalar& w : weight_.mutable_data()) w = static_cast<Scalar>(rng.uniform(-bound, bound));
  for (Scalar& b : bias_.mutable_data()) b = 0;
}

GaussianEncoder::GaussianEncoder(const std::string& name, std::size_t d_in, std::size_t mid_dim, std::size_t d_code)
    : mu_hidden_(name + ".mu.fc1", d_in, mid_dim),
      mu_out_(name + ".mu.fc2", mid_dim, d_code),
      logvar_hidden_(name + ".logvar.fc1", d_in, mid_dim),
      logvar_out_(name + ".logvar.fc2", mid_dim, d_code) {}

Var GaussianEncoder::mean(const Var& x) const { return mu_out_.forward(silu(mu_hidden_.forward(x))); }

Var GaussianEncoder::log_variance(const Var& x) const {
  return clamp(logvar_out_.forward(silu(logvar_hidden_.forward(x))), kLogVarMin, kLogVarMax);
}

std::vector<Parameter*> GaussianEncoder::parameters() {
  return {&mu_hidden_.weight(),     &mu_hidden_.bias(),     &mu_out_.weight(),     &mu_out_.bias(),
          &logvar_hidden_.weight(), &logvar_hidden_.bias(), &logvar_out_.weight(), &logvar_out_.bias()};
}

void GaussianEncoder::init(Rng& rng) {
  mu_hidden_.init_uniform(rng);
  mu_out_.init_uniform(rng);
  logvar_hidden_.init_uniform(rng);
  logvar_out_.init_uniform(rng);
}

Code encode(const GaussianEncoder& enc, const Var& x, const Tensor& eps) {
  const Tensor& xv = x.value();
  if (xv.rank() != 2 || xv.cols() != enc.d_in()) {
    fail(ErrorKind::ShapeMismatch, "encoder expects [batch, " + std::to_string(enc.d_in()) + "], got " +
                                       shape_string(xv.shape()));
  }
  const Shape code_shape{xv.rows(), enc.d_code()};
  if (eps.shape() != code_shape) {
    fail(ErrorKind::ShapeMismatch, "noise shape " + shape_string(eps.shape()) + ", expected " +
                                       shape_string(code_shape));
  }
  Code code;
  code.mu = enc.mean(x);
  code.logvar = enc.log_variance(x);
  code.eps = eps;
  const Var sigma = exp(scale(code.logvar, Scalar{0.5}));
  code.sample = add(code.mu, mul(sigma, constant(eps)));
  return code;
}

Var kl_std_normal(const Var& mu, const Var& logvar) {
  if (mu.shape() != logvar.shape()) {
    fail(ErrorKind::ShapeMismatch, "kl_std_normal: " + shape_string(mu.shape()) + " vs " +
                                       shape_string(logvar.shape()));
  }
  const Var terms = sub(add(square(mu), exp(logvar)), add(logvar, constant(Tensor::scalar(1))));
  return scale(sum(terms), Scalar{0.5});
}

Var nll_mae(const Var& prediction, const Var& target) {
  if (prediction.shape() != target.shape()) {
    fail(ErrorKind::ShapeMismatch, "nll_mae: " + shape_string(prediction.shape()) + " vs " +
                                       shape_string(target.shape()));
  }
  const std::size_t batch = prediction.shape().empty() ? 1 : prediction.shape()[0];
  return scale(sum(abs(sub(target, prediction))), Scalar{1} / static_cast<Scalar>(batch));
}

LossTerms drd_mib_loss(const Var& y_multi, const std::map<Modality, Var>& y_unimodal,
                       const std::map<Modality, Code>& codes, const Var& y, Scalar beta) {
  if (!(beta >= 0)) fail(ErrorKind::DomainError, "beta must be >= 0");
  const std::size_t batch = y.shape().empty() ? 1 : y.shape()[0];
  LossTerms terms;
  terms.multimodal = nll_mae(y_multi, y);
  terms.total = terms.multimodal;
  for (Modality m : kModalities) {
    const auto pred = y_unimodal.find(m);
    const auto code = codes.find(m);
    if (pred == y_unimodal.end() || code == codes.end()) {
      fail(ErrorKind::MissingModality, "no " + std::string(long_name(m)) + " prediction or code");
    }
    const std::size_t i = index_of(m);
    terms.unimodal_mae[i] = nll_mae(pred->second, y);
    terms.kl[i] = scale(kl_std_normal(code->second.mu, code->second.logvar), Scalar{1} / static_cast<Scalar>(batch));
    terms.unimodal[i] = add(terms.unimodal_mae[i], scale(terms.kl[i], beta));
    terms.total = add(terms.total, terms.unimodal[i]);
  }
  return terms;
}

}  // namespace kanmcp::mib
