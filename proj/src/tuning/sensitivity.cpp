// Copyright 2026 The PAST Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "past/tuning/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace past::tuning {

SetGradient mean_loss_and_gradient(const nn::ParameterStore& params,
                                   const nn::ModelSpec& spec,
                                   const data::Dataset& dataset,
                                   std::optional<int> batch_limit,
                                   int batch_size) {
  if (dataset.size() == 0) {
    throw std::invalid_argument("mean_loss_and_gradient: empty dataset");
  }
  if (batch_size < 1) {
    throw std::invalid_argument("mean_loss_and_gradient: batch_size < 1");
  }
  if (batch_limit && *batch_limit < 1) {
    throw std::invalid_argument("mean_loss_and_gradient: batch_limit < 1");
  }

  const std::size_t bs = static_cast<std::size_t>(batch_size);
  std::size_t used = dataset.size();
  if (batch_limit) {
    used = std::min(used, bs * static_cast<std::size_t>(*batch_limit));
  }

  SetGradient out;
  out.grad.assign(params.size(), 0.0);
  double loss_sum = 0.0;

  for (std::size_t start = 0; start < used; start += bs) {
    const std::size_t len = std::min(bs, used - start);
    Matrix batch(len, dataset.features.cols);
    std::vector<int> labels(len);
    for (std::size_t i = 0; i < len; ++i) {
      const auto src = dataset.features.row(start + i);
      std::copy(src.begin(), src.end(), batch.row(i).begin());
      labels[i] = dataset.labels[start + i];
    }
    nn::BatchCache cache;
    const Matrix logits = nn::forward(params, spec, batch, &cache);
    const auto ce = nn::cross_entropy(logits, labels);
    const auto batch_grad = nn::backward(params, spec, cache, ce.probs, labels);

    // Batch gradients are means; reweight by batch size to get a sum.
    const double weight = static_cast<double>(len);
    for (std::size_t i = 0; i < out.grad.size(); ++i) {
      out.grad[i] += weight * batch_grad[i];
    }
    loss_sum += ce.mean_loss * weight;
  }

  const double inv_used = 1.0 / static_cast<double>(used);
  for (double& g : out.grad) g *= inv_used;
  out.mean_loss = loss_sum * inv_used;
  return out;
}

double loss_gap(const nn::ParameterStore& params, const nn::ModelSpec& spec,
                const data::Dataset& members,
                const data::Dataset& nonmembers) {
  if (members.size() == 0 || nonmembers.size() == 0) {
    throw std::invalid_argument("loss_gap: empty member or non-member set");
  }
  const auto member_eval = nn::evaluate(params, spec, members);
  const auto nonmember_eval = nn::evaluate(params, spec, nonmembers);
  return std::fabs(member_eval.mean_loss - nonmember_eval.mean_loss);
}

namespace {

struct GapGradient {
  double gap_signed = 0.0;           // Lm - Ln
  std::vector<double> grad_diff;     // grad Lm - grad Ln
};

GapGradient gap_gradient_parts(const nn::ParameterStore& params,
                               const nn::ModelSpec& spec,
                               const data::Dataset& members,
                               const data::Dataset& nonmembers,
                               std::optional<int> batch_limit) {
  const auto member_side =
      mean_loss_and_gradient(params, spec, members, batch_limit);
  const auto nonmember_side =
      mean_loss_and_gradient(params, spec, nonmembers, batch_limit);
  GapGradient out;
  out.gap_signed = member_side.mean_loss - nonmember_side.mean_loss;
  out.grad_diff.resize(member_side.grad.size());
  for (std::size_t i = 0; i < out.grad_diff.size(); ++i) {
    out.grad_diff[i] = member_side.grad[i] - nonmember_side.grad[i];
  }
  return out;
}

}  // namespace

std::vector<double> privacy_sensitivity(const nn::ParameterStore& params,
                                        const nn::ModelSpec& spec,
                                        const data::Dataset& members,
                                        const data::Dataset& nonmembers,
                                        std::optional<int> batch_limit) {
  auto parts = gap_gradient_parts(params, spec, members, nonmembers, batch_limit);
  for (double& g : parts.grad_diff) g = std::fabs(g);
  return std::move(parts.grad_diff);
}

std::vector<double> loss_gap_gradient(const nn::ParameterStore& params,
                                      const nn::ModelSpec& spec,
                                      const data::Dataset& members,
                                      const data::Dataset& nonmembers,
                                      std::optional<int> batch_limit) {
  auto parts = gap_gradient_parts(params, spec, members, nonmembers, batch_limit);
  double sign = 0.0;
  if (parts.gap_signed > 1e-12) sign = 1.0;
  if (parts.gap_signed < -1e-12) sign = -1.0;
  for (double& g : parts.grad_diff) g *= sign;
  return std::move(parts.grad_diff);
}

std::vector<double> normalize_gamma(std::span<const double> raw,
                                    const std::vector<nn::Segment>& segments) {
  std::size_t covered = 0;
  for (const auto& seg : segments) covered += seg.length;
  if (covered != raw.size()) {
    throw std::invalid_argument("normalize_gamma: segments do not cover raw");
  }
  for (double r : raw) {
    if (r < 0.0) {
      throw std::invalid_argument("normalize_gamma: negative raw sensitivity");
    }
  }

  std::vector<double> gamma(raw.size(), 0.0);
  for (const auto& seg : segments) {
    double seg_sum = 0.0;
    for (std::size_t i = seg.offset; i < seg.offset + seg.length; ++i) {
      seg_sum += raw[i];
    }
    if (seg_sum < 1e-12) {
      for (std::size_t i = seg.offset; i < seg.offset + seg.length; ++i) {
        gamma[i] = 1.0;
      }
    } else {
      const double scale = static_cast<double>(seg.length) / seg_sum;
      for (std::size_t i = seg.offset; i < seg.offset + seg.length; ++i) {
        gamma[i] = raw[i] * scale;
      }
    }
  }
  return gamma;
}

PenaltyResult past_penalty(const nn::ParameterStore& params,
                           std::span<const double> gamma, double alpha,
                           double lambda) {
  if (gamma.size() != params.size()) {
    throw std::invalid_argument("past_penalty: gamma length mismatch");
  }
  if (alpha < 0.0) throw std::invalid_argument("past_penalty: alpha < 0");
  if (lambda < 0.0) throw std::invalid_argument("past_penalty: lambda < 0");
  for (double g : gamma) {
    if (g < 0.0) throw std::invalid_argument("past_penalty: negative gamma");
  }

  PenaltyResult out;
  out.per_param_strength.resize(gamma.size());
  const auto& theta = params.values();
  double penalty = 0.0;
  for (std::size_t i = 0; i < gamma.size(); ++i) {
    // std::pow(x, 0) == 1 for every x, which realizes the gamma^0 == 1
    // convention and makes alpha = 0 plain L1.
    const double strength = lambda * std::pow(gamma[i], alpha);
    out.per_param_strength[i] = strength;
    penalty += strength * std::fabs(theta[i]);
  }
  out.value = penalty;
  return out;
}

void proximal_shrink(nn::ParameterStore& params,
                     std::span<const double> per_param_strength, double lr) {
  if (per_param_strength.size() != params.size()) {
    throw std::invalid_argument("proximal_shrink: strength length mismatch");
  }
  if (lr < 0.0) throw std::invalid_argument("proximal_shrink: negative lr");
  for (double s : per_param_strength) {
    if (s < 0.0) {
      throw std::invalid_argument("proximal_shrink: negative strength");
    }
  }
  auto& theta = params.mutable_values();
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double threshold = lr * per_param_strength[i];
    const double magnitude = std::fabs(theta[i]) - threshold;
    theta[i] = magnitude > 0.0 ? std::copysign(magnitude, theta[i]) : 0.0;
  }
}

SensitivityConcentration::SensitivityConcentration(
    std::span<const double> raw) {
  if (raw.empty()) {
    throw std::invalid_argument("SensitivityConcentration: empty vector");
  }
  sorted_desc_.assign(raw.begin(), raw.end());
  for (double v : sorted_desc_) {
    if (v < 0.0) {
      throw std::invalid_argument("SensitivityConcentration: negative entry");
    }
    total_ += v;
  }
  if (total_ <= 0.0) {
    throw std::invalid_argument("SensitivityConcentration: all-zero vector");
  }
  std::sort(sorted_desc_.begin(), sorted_desc_.end(), std::greater<double>());
  prefix_sums_.resize(sorted_desc_.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < sorted_desc_.size(); ++i) {
    acc += sorted_desc_[i];
    prefix_sums_[i] = acc;
  }
  // Same summation order as the prefix sums, so the full share is exactly 1.
  total_ = prefix_sums_.back();
}

double SensitivityConcentration::top_quantile_share(double q) const {
  if (q < 0.0 || q > 1.0) {
    throw std::invalid_argument("top_quantile_share: q out of [0, 1]");
  }
  const std::size_t count = static_cast<std::size_t>(
      std::ceil(q * static_cast<double>(sorted_desc_.size())));
  if (count == 0) return 0.0;
  return prefix_sums_[count - 1] / total_;
}

double SensitivityConcentration::fraction_below(double t) const {
  std::size_t count = 0;
  for (double v : sorted_desc_) {
    if (v < t) ++count;
  }
  return static_cast<double>(count) / static_cast<double>(sorted_desc_.size());
}

}  // namespace past::tuning
