#include "atlasbench/planner/train.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "atlasbench/errors.hpp"
#include "atlasbench/random.hpp"

namespace atlasbench::planner {

double learning_rate(long step, long total_steps, const TrainConfig& c) {
  if (total_steps <= 0) return 0.0;
  const long warmup = static_cast<long>(std::ceil(c.warmup_fraction * static_cast<double>(total_steps)));
  const double peak = c.peak_lr();
  if (step < warmup) return peak * static_cast<double>(step) / static_cast<double>(warmup);
  if (step >= total_steps) return 0.0;
  const double span = static_cast<double>(total_steps - warmup);
  return 0.5 * peak * (1.0 + std::cos(M_PI * static_cast<double>(step - warmup) / span));
}

AdamW::AdamW(const PlannerConfig& model, int vocab_size, const TrainConfig& config)
    : config_(config), m_(Params::zeros(model, vocab_size)), v_(Params::zeros(model, vocab_size)) {}

void AdamW::step(Params& params, Params& grad, double lr) {
  ++t_;
  const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  auto p = params.tensors();
  auto g = grad.tensors();
  auto m = m_.tensors();
  auto v = v_.tensors();
  for (std::size_t i = 0; i < p.size(); ++i) {
    auto pf = p[i].flat();
    const auto gf = g[i].flat();
    auto mf = m[i].flat();
    auto vf = v[i].flat();
    mf = config_.beta1 * mf + (1.0 - config_.beta1) * gf;
    vf = config_.beta2 * vf + (1.0 - config_.beta2) * gf.cwiseAbs2();
    if (p[i].decay) pf *= 1.0 - lr * config_.weight_decay;
    pf.array() -= lr * (mf.array() / c1) / ((vf.array() / c2).sqrt() + config_.eps);
  }
}

double grad_norm(Params& grad) {
  double s = 0.0;
  for (const auto& t : grad.tensors()) s += t.flat().squaredNorm();
  return std::sqrt(s);
}

double mean_loss(const Model& model, std::span<const TokenStream> data, std::size_t limit) {
  if (data.empty()) throw DomainError("mean loss over an empty dataset");
  const std::size_t n = std::min(limit, data.size());
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += model.loss(data[i * data.size() / n]);
  return total / static_cast<double>(n);
}

TrainStats train(Model& model, std::span<const TokenStream> data, const TrainConfig& config,
                 const std::function<void(long, double)>& on_step) {
  config.validate();
  if (data.empty()) throw DomainError("training needs at least one sample");
  TrainStats stats;
  stats.initial_loss = mean_loss(model, data);

  const long total = static_cast<long>(data.size()) * config.epochs;
  AdamW opt(model.config(), model.vocab_size(), config);
  Params grad = Params::zeros(model.config(), model.vocab_size());
  std::vector<std::size_t> order(data.size());
  long step = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    Rng rng(mix64(config.seed, static_cast<std::uint64_t>(epoch)));
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(i) - 1))]);
    }
    double running = 0.0;
    for (std::size_t idx : order) {
      grad.set_zero();
      const double loss = model.loss_and_grad(data[idx], grad);
      if (!std::isfinite(loss)) throw NumericError("non-finite training loss", step);
      if (config.grad_clip > 0.0) {
        const double norm = grad_norm(grad);
        if (!std::isfinite(norm)) throw NumericError("non-finite gradient", step);
        if (norm > config.grad_clip) {
          for (auto& t : grad.tensors()) t.flat() *= config.grad_clip / norm;
        }
      }
      opt.step(model.params(), grad, learning_rate(step, total, config));
      running += loss;
      ++step;
      if (on_step) on_step(step, loss);
    }
    stats.epoch_loss.push_back(running / static_cast<double>(order.size()));
  }
  stats.steps = step;
  stats.final_loss = mean_loss(model, data);
  return stats;
}

}  // namespace atlasbench::planner
