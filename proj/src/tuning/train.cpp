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

#include "past/tuning/train.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include "past/metrics/metrics.hpp"
#include "past/rng.hpp"

namespace past::tuning {

void PastConfig::validate() const {
  if (lambda < 0.0) throw std::invalid_argument("PastConfig: lambda < 0");
  if (alpha < 0.0) throw std::invalid_argument("PastConfig: alpha < 0");
  if (tuning_epochs < 1) {
    throw std::invalid_argument("PastConfig: tuning_epochs must be >= 1");
  }
  if (standard_epochs < 1) {
    throw std::invalid_argument("PastConfig: standard_epochs must be >= 1");
  }
  if (gap_batch_limit && *gap_batch_limit < 1) {
    throw std::invalid_argument("PastConfig: gap_batch_limit must be >= 1");
  }
}

namespace {

using GradHook = std::function<void(std::vector<double>&)>;
using StepHook = std::function<void()>;

void run_sgd_epoch(nn::ParameterStore& params, const nn::ModelSpec& spec,
                   const data::Dataset& train, nn::OptimizerState& state,
                   double lr, std::uint64_t seed, int epoch,
                   const GradHook& grad_hook, const StepHook& step_hook) {
  const auto batches =
      data::batch_indices(train.size(), state.hyper.batch_size, seed, epoch);
  for (const auto& indices : batches) {
    Matrix batch(indices.size(), train.features.cols);
    std::vector<int> labels(indices.size());
    for (std::size_t i = 0; i < indices.size(); ++i) {
      const auto src = train.features.row(indices[i]);
      std::copy(src.begin(), src.end(), batch.row(i).begin());
      labels[i] = train.labels[indices[i]];
    }
    nn::BatchCache cache;
    const Matrix logits = nn::forward(params, spec, batch, &cache);
    const auto ce = nn::cross_entropy(logits, labels);
    auto grad = nn::backward(params, spec, cache, ce.probs, labels);
    if (grad_hook) grad_hook(grad);
    nn::sgd_step(params, grad, state, lr);
    if (step_hook) step_hook();
  }
}

std::map<std::string, double> per_module_mean(
    const std::vector<double>& raw, const std::vector<nn::Segment>& segments) {
  std::map<std::string, double> out;
  for (const auto& seg : segments) {
    double sum = 0.0;
    for (std::size_t i = seg.offset; i < seg.offset + seg.length; ++i) {
      sum += raw[i];
    }
    out[seg.name] = sum / static_cast<double>(seg.length);
  }
  return out;
}

EpochRecord make_record(int epoch, double lr, const nn::ParameterStore& params,
                        const nn::ModelSpec& spec, const data::Dataset& train,
                        const data::Dataset& test,
                        const data::Dataset& gap_nonmembers,
                        const data::Dataset& sens_members,
                        const data::Dataset& sens_nonmembers,
                        std::optional<int> batch_limit,
                        const data::Dataset* inference,
                        const data::Dataset* leak_reference) {
  EpochRecord rec;
  rec.epoch = epoch;
  rec.lr = lr;

  const auto train_eval = nn::evaluate(params, spec, train);
  const auto test_eval = nn::evaluate(params, spec, test);
  const auto gap_eval = nn::evaluate(params, spec, gap_nonmembers);
  rec.train_loss = train_eval.mean_loss;
  rec.train_acc = train_eval.accuracy;
  rec.test_loss = test_eval.mean_loss;
  rec.test_acc = test_eval.accuracy;
  rec.loss_gap = std::fabs(train_eval.mean_loss - gap_eval.mean_loss);

  double max_abs = 0.0;
  for (double v : params.values()) max_abs = std::max(max_abs, std::fabs(v));
  rec.gini = max_abs > 0.0 ? metrics::gini_index(params.values())
                           : std::numeric_limits<double>::quiet_NaN();
  rec.near_zero_fraction = metrics::near_zero_fraction(params.values());

  if (inference != nullptr && leak_reference != nullptr) {
    const auto inf_eval = nn::evaluate(params, spec, *inference);
    const auto leak_eval = nn::evaluate(params, spec, *leak_reference);
    rec.inference_leak_gap =
        std::fabs(inf_eval.mean_loss - leak_eval.mean_loss);
  } else {
    rec.inference_leak_gap = std::numeric_limits<double>::quiet_NaN();
  }

  const auto raw = privacy_sensitivity(params, spec, sens_members,
                                       sens_nonmembers, batch_limit);
  rec.module_sensitivity = per_module_mean(raw, params.segments());
  return rec;
}

data::Dataset draw_member_sample(const data::Dataset& train,
                                 std::size_t target_size, std::uint64_t seed) {
  const std::size_t k = std::min(train.size(), target_size);
  Rng rng(derive_seed(seed, seed_tag::kMemberSample));
  const auto indices = sample_indices(train.size(), k, rng);
  return train.subset(indices);
}

}  // namespace

TuningTrace standard_train(nn::ParameterStore& params,
                           const nn::ModelSpec& spec,
                           const data::Dataset& train,
                           const data::Dataset& test,
                           const data::Dataset& gap_nonmembers, int epochs,
                           const nn::OptimHyper& opt, std::uint64_t seed) {
  if (epochs < 1) throw std::invalid_argument("standard_train: epochs < 1");
  opt.validate();
  train.validate();
  test.validate();
  gap_nonmembers.validate();

  nn::OptimizerState state(params.size(), opt);
  TuningTrace trace;
  trace.reserve(static_cast<std::size_t>(epochs));
  for (int epoch = 0; epoch < epochs; ++epoch) {
    const double lr = nn::cosine_lr(epoch, epochs, opt.lr0);
    run_sgd_epoch(params, spec, train, state, lr, seed, epoch, nullptr,
                  nullptr);
    trace.push_back(make_record(epoch, lr, params, spec, train, test,
                                gap_nonmembers, train, gap_nonmembers,
                                std::nullopt, nullptr, nullptr));
  }
  return trace;
}

TuningTrace past_tune(nn::ParameterStore& params, const nn::ModelSpec& spec,
                      const SplitView& split, const PastConfig& cfg,
                      const nn::OptimHyper& opt, std::uint64_t seed,
                      SensitivityMap* last_sensitivity) {
  cfg.validate();
  opt.validate();
  split.train.validate();
  split.test.validate();
  split.inference.validate();

  const data::Dataset member_sample =
      draw_member_sample(split.train, split.inference.size(), seed);

  nn::OptimizerState state(params.size(), opt);
  TuningTrace trace;
  trace.reserve(static_cast<std::size_t>(cfg.tuning_epochs));
  for (int epoch = 0; epoch < cfg.tuning_epochs; ++epoch) {
    // gamma is refreshed once per epoch and held constant through it.
    const auto raw = privacy_sensitivity(params, spec, member_sample,
                                         split.inference, cfg.gap_batch_limit);
    const auto gamma = normalize_gamma(raw, params.segments());
    const auto strengths =
        past_penalty(params, gamma, cfg.alpha, cfg.lambda).per_param_strength;
    if (last_sensitivity) {
      last_sensitivity->raw = raw;
      last_sensitivity->gamma = gamma;
      last_sensitivity->computed_at_epoch = epoch;
    }

    const double lr = nn::cosine_lr(epoch, cfg.tuning_epochs, opt.lr0);
    run_sgd_epoch(params, spec, split.train, state, lr, seed, epoch, nullptr,
                  [&] { proximal_shrink(params, strengths, lr); });
    trace.push_back(make_record(epoch, lr, params, spec, split.train,
                                split.test, split.inference, member_sample,
                                split.inference, cfg.gap_batch_limit,
                                &split.inference, split.leak_reference));
  }
  return trace;
}

TuningTrace uniform_reg_tune(nn::ParameterStore& params,
                             const nn::ModelSpec& spec, const SplitView& split,
                             double lambda, NormOrder order, int epochs,
                             const nn::OptimHyper& opt, std::uint64_t seed) {
  if (lambda < 0.0) throw std::invalid_argument("uniform_reg_tune: lambda < 0");
  if (epochs < 1) throw std::invalid_argument("uniform_reg_tune: epochs < 1");
  opt.validate();
  split.train.validate();
  split.test.validate();
  split.inference.validate();

  const std::vector<double> strengths(params.size(), lambda);
  nn::OptimizerState state(params.size(), opt);
  TuningTrace trace;
  trace.reserve(static_cast<std::size_t>(epochs));
  for (int epoch = 0; epoch < epochs; ++epoch) {
    const double lr = nn::cosine_lr(epoch, epochs, opt.lr0);
    if (order == NormOrder::kL1) {
      run_sgd_epoch(params, spec, split.train, state, lr, seed, epoch, nullptr,
                    [&] { proximal_shrink(params, strengths, lr); });
    } else {
      run_sgd_epoch(
          params, spec, split.train, state, lr, seed, epoch,
          [&](std::vector<double>& grad) {
            const auto& theta = params.values();
            for (std::size_t i = 0; i < grad.size(); ++i) {
              grad[i] += 2.0 * lambda * theta[i];
            }
          },
          nullptr);
    }
    trace.push_back(make_record(epoch, lr, params, spec, split.train,
                                split.test, split.inference, split.train,
                                split.inference, std::nullopt,
                                &split.inference, split.leak_reference));
  }
  return trace;
}

TuningTrace lossgap_reg_tune(nn::ParameterStore& params,
                             const nn::ModelSpec& spec, const SplitView& split,
                             double mu, int epochs, const nn::OptimHyper& opt,
                             std::uint64_t seed,
                             std::optional<int> gap_batch_limit) {
  if (mu < 0.0) throw std::invalid_argument("lossgap_reg_tune: mu < 0");
  if (epochs < 1) throw std::invalid_argument("lossgap_reg_tune: epochs < 1");
  opt.validate();
  split.train.validate();
  split.test.validate();
  split.inference.validate();

  const data::Dataset member_sample =
      draw_member_sample(split.train, split.inference.size(), seed);

  GradHook gap_hook = nullptr;
  if (mu > 0.0) {
    gap_hook = [&](std::vector<double>& grad) {
      const auto gap_grad = loss_gap_gradient(
          params, spec, member_sample, split.inference, gap_batch_limit);
      for (std::size_t i = 0; i < grad.size(); ++i) {
        grad[i] += mu * gap_grad[i];
      }
    };
  }

  nn::OptimizerState state(params.size(), opt);
  TuningTrace trace;
  trace.reserve(static_cast<std::size_t>(epochs));
  for (int epoch = 0; epoch < epochs; ++epoch) {
    const double lr = nn::cosine_lr(epoch, epochs, opt.lr0);
    run_sgd_epoch(params, spec, split.train, state, lr, seed, epoch, gap_hook,
                  nullptr);
    trace.push_back(make_record(epoch, lr, params, spec, split.train,
                                split.test, split.inference, member_sample,
                                split.inference, gap_batch_limit,
                                &split.inference, split.leak_reference));
  }
  return trace;
}

}  // namespace past::tuning
