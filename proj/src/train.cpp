#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <string>
#include <vector>

#include "biasforge/clas.hpp"
#include "biasforge/errors.hpp"
#include "biasforge/parallel.hpp"
#include "biasforge/rng.hpp"
#include "biasforge/text.hpp"

namespace biasforge {

std::string train_log_csv(const std::vector<TrainLogRow>& log) {
  std::string out = "step,loss,grad_norm\n";
  char buf[96];
  for (const TrainLogRow& row : log) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g\n", row.step, row.loss,
                  row.grad_norm);
    out += buf;
  }
  return out;
}

TrainResult train(const std::vector<DatasetExample>& dataset,
                  const DistractorPool& pool, const FuzzyLookup& fuzzy,
                  const SchemeConfig& scheme, const ModelConfig& mcfg,
                  const TrainConfig& tcfg) {
  mcfg.validate();
  scheme.validate();
  if (tcfg.epochs < 1) throw ConfigError("epochs must be >= 1");
  if (tcfg.batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(tcfg.lr > 0.0)) throw ConfigError("lr must be positive");
  if (!(tcfg.clip_norm > 0.0)) throw ConfigError("clip_norm must be positive");
  if (!(tcfg.init_scale > 0.0)) throw ConfigError("init_scale must be positive");
  if (tcfg.threads < 1) throw ConfigError("threads must be >= 1");
  if (dataset.empty()) throw DataError("empty training dataset");

  const std::size_t n = dataset.size();
  std::vector<std::vector<int>> refs(n);
  std::vector<TaggedTranscript> tags(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (dataset[i].frames.dim != mcfg.frame_dim) {
      throw ConfigError("example " + dataset[i].utt_id + " frame dim " +
                        std::to_string(dataset[i].frames.dim) +
                        " does not match model frame_dim " +
                        std::to_string(mcfg.frame_dim));
    }
    refs[i] = Vocab::encode(join(dataset[i].transcript));
    refs[i].push_back(Vocab::kEnd);
    tags[i].tokens = dataset[i].transcript;
    tags[i].nnp_spans = dataset[i].nnp_spans;
  }

  Rng init_rng(derive_seed(tcfg.seed, "init"));
  TrainResult res{ModelParams::random_init(mcfg, init_rng, tcfg.init_scale), {}};
  const std::size_t np = res.params.size();

  std::vector<BiasSet> sets(n);
  std::vector<std::size_t> order(n);
  std::vector<std::vector<double>> slot_grads;
  std::vector<double> slot_loss;
  std::vector<std::string> slot_err;
  std::vector<double> batch_grad(np);
  int step = 0;

  for (int epoch = 0; epoch < tcfg.epochs; ++epoch) {
    // Fresh bias sets each epoch, seeded per example so any thread count and
    // any visit order produce the same sets.
    const std::string bias_tag = "bias|e" + std::to_string(epoch) + "|";
    parallel_for(n, tcfg.threads, [&](std::size_t i) {
      Rng r(derive_seed(tcfg.seed, bias_tag + dataset[i].utt_id));
      sets[i] = build_training_bias_set(dataset[i].transcript, tags[i], pool,
                                        fuzzy, scheme, r);
    });

    std::iota(order.begin(), order.end(), static_cast<std::size_t>(0));
    Rng order_rng(derive_seed(tcfg.seed, "order|e" + std::to_string(epoch)));
    order_rng.shuffle(order);

    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(tcfg.batch_size)) {
      const std::size_t stop = std::min(n, start + static_cast<std::size_t>(tcfg.batch_size));
      const std::size_t bn = stop - start;
      slot_grads.resize(bn);
      slot_loss.assign(bn, 0.0);
      slot_err.assign(bn, std::string());
      // Per-example gradients land in private slots; exceptions must not
      // escape the parallel region.
      parallel_for(bn, tcfg.threads, [&](std::size_t s) {
        const std::size_t idx = order[start + s];
        try {
          TrainingExample ex;
          ex.frames = &dataset[idx].frames;
          ex.reference = refs[idx];
          ex.bias = &sets[idx];
          slot_loss[s] = loss_and_gradients(ex, res.params, slot_grads[s]);
        } catch (const std::exception& e) {
          slot_err[s] = e.what();
        }
      });
      for (std::size_t s = 0; s < bn; ++s) {
        if (!slot_err[s].empty()) {
          throw TrainingFault(step + 1, slot_err[s], train_log_csv(res.log));
        }
      }

      // Mean over the batch, summed in slot order so the reduction is
      // independent of the thread count.
      std::fill(batch_grad.begin(), batch_grad.end(), 0.0);
      double batch_loss = 0.0;
      for (std::size_t s = 0; s < bn; ++s) {
        batch_loss += slot_loss[s];
        const std::vector<double>& g = slot_grads[s];
        for (std::size_t j = 0; j < np; ++j) batch_grad[j] += g[j];
      }
      const double inv = 1.0 / static_cast<double>(bn);
      batch_loss *= inv;
      double norm_sq = 0.0;
      for (std::size_t j = 0; j < np; ++j) {
        batch_grad[j] *= inv;
        norm_sq += batch_grad[j] * batch_grad[j];
      }
      const double norm = std::sqrt(norm_sq);

      ++step;
      res.log.push_back({step, batch_loss, norm});
      if (!std::isfinite(batch_loss) || !std::isfinite(norm)) {
        throw TrainingFault(step, "non-finite loss", train_log_csv(res.log));
      }

      double rate = tcfg.lr;
      if (norm > tcfg.clip_norm) rate = tcfg.lr * (tcfg.clip_norm / norm);
      std::vector<double>& p = res.params.data();
      for (std::size_t j = 0; j < np; ++j) p[j] -= rate * batch_grad[j];
    }
  }
  return res;
}

}  // namespace biasforge
