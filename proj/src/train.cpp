#include "ird/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ird {

namespace {

constexpr double kTinyNorm = 1e-30;

std::vector<double> normalized(const std::vector<double>& v, double* norm_out) {
  double n = 0.0;
  for (double x : v) n += x * x;
  n = std::sqrt(n);
  *norm_out = n;
  std::vector<double> out(v.size(), 0.0);
  if (n >= kTinyNorm) {
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] / n;
  }
  return out;
}

// Adam over one parameter tensor.
struct AdamParam {
  std::vector<double>* values = nullptr;
  std::vector<double> grad, m, v;

  explicit AdamParam(std::vector<double>* p)
      : values(p), grad(p->size(), 0.0), m(p->size(), 0.0), v(p->size(), 0.0) {}

  void zero_grad() { std::fill(grad.begin(), grad.end(), 0.0); }

  void step(double lr, int t) {
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    const double corr1 = 1.0 - std::pow(b1, t);
    const double corr2 = 1.0 - std::pow(b2, t);
    for (std::size_t i = 0; i < grad.size(); ++i) {
      m[i] = b1 * m[i] + (1.0 - b1) * grad[i];
      v[i] = b2 * v[i] + (1.0 - b2) * grad[i] * grad[i];
      (*values)[i] -= lr * (m[i] / corr1) / (std::sqrt(v[i] / corr2) + eps);
    }
  }
};

struct EmbeddingCache {
  std::vector<Embedding> images;
  std::vector<std::vector<Embedding>> captions;  // per entry
};

EmbeddingCache embed_gallery(const EncoderModel& model,
                             const std::vector<const ManifestEntry*>& entries) {
  EmbeddingCache cache;
  cache.images.reserve(entries.size());
  cache.captions.reserve(entries.size());
  for (const auto* e : entries) {
    cache.images.push_back(model.encode_image(e->image));
    std::vector<Embedding> caps;
    for (const auto& c : e->captions) caps.push_back(model.encode_text(c));
    cache.captions.push_back(std::move(caps));
  }
  return cache;
}

}  // namespace

std::pair<double, double> retrieval_r1(const EncoderModel& model,
                                       const std::vector<const ManifestEntry*>& entries) {
  if (entries.size() < 2) {
    throw std::invalid_argument("retrieval_r1: need at least 2 entries");
  }
  const EmbeddingCache cache = embed_gallery(model, entries);

  int tr_hits = 0;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    double best = -2.0;
    std::size_t best_entry = 0;
    for (std::size_t j = 0; j < entries.size(); ++j) {
      for (const auto& cap : cache.captions[j]) {
        const double s = cosine_similarity(cache.images[i], cap);
        if (s > best) {
          best = s;
          best_entry = j;
        }
      }
    }
    if (best_entry == i) ++tr_hits;
  }

  int ir_hits = 0, ir_total = 0;
  for (std::size_t j = 0; j < entries.size(); ++j) {
    for (const auto& cap : cache.captions[j]) {
      double best = -2.0;
      std::size_t best_entry = 0;
      for (std::size_t i = 0; i < entries.size(); ++i) {
        const double s = cosine_similarity(cache.images[i], cap);
        if (s > best) {
          best = s;
          best_entry = i;
        }
      }
      if (best_entry == j) ++ir_hits;
      ++ir_total;
    }
  }
  return {static_cast<double>(tr_hits) / static_cast<double>(entries.size()),
          static_cast<double>(ir_hits) / static_cast<double>(ir_total)};
}

namespace {

struct TowerGrads {
  std::vector<LayerGrads> image_layers;
  std::vector<LayerGrads> text_layers;
  std::vector<double> token_table;
};

void train_one(ToyDualEncoder& model, const DatasetManifest& dataset,
               const TrainOptions& opt, RngStream& stream, TrainSummary& summary) {
  const auto train_entries = dataset.split("train");
  const auto val_entries = dataset.split("val");
  if (train_entries.size() < 2) {
    throw std::invalid_argument("train_toy_models: train split too small");
  }
  if (val_entries.size() < 2) {
    throw std::invalid_argument("train_toy_models: val split too small");
  }

  std::vector<AdamParam> params;
  std::vector<std::vector<double>*> image_tensors, text_tensors;
  for (auto& layer : model.image_layers()) {
    params.emplace_back(&layer.weight);
    params.emplace_back(&layer.bias);
  }
  const std::size_t token_param_idx = params.size();
  params.emplace_back(&model.token_table());
  for (auto& layer : model.text_layers()) {
    params.emplace_back(&layer.weight);
    params.emplace_back(&layer.bias);
  }
  const int token_dim = model.architecture().token_dim;

  int adam_t = 0;
  double last_loss = 0.0;
  const double tau = opt.temperature;

  for (int epoch = 0; epoch < opt.max_epochs; ++epoch) {
    double lr =
        opt.learning_rate *
        std::pow(opt.lr_decay, static_cast<double>(epoch / std::max(1, opt.lr_decay_every)));
    if (opt.warmup_epochs > 0 && epoch < opt.warmup_epochs) {
      lr *= static_cast<double>(epoch + 1) / opt.warmup_epochs;
    }
    auto epoch_rng = stream.fork("epoch" + std::to_string(epoch));
    std::vector<std::size_t> order(train_entries.size());
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[epoch_rng.index(i)]);
    }

    for (std::size_t start = 0; start + 2 <= order.size();
         start += static_cast<std::size_t>(opt.batch_size)) {
      const std::size_t stop =
          std::min(order.size(), start + static_cast<std::size_t>(opt.batch_size));
      const std::size_t B = stop - start;

      std::vector<ToyDualEncoder::ImageTrace> img_traces(B);
      std::vector<ToyDualEncoder::TextTrace> txt_traces(B);
      std::vector<std::vector<double>> u_hat(B), w_hat(B);
      std::vector<double> u_norm(B), w_norm(B);
      for (std::size_t k = 0; k < B; ++k) {
        const ManifestEntry* entry = train_entries[order[start + k]];
        const std::size_t cap = epoch_rng.index(entry->captions.size());
        img_traces[k] = model.trace_image(entry->image);
        txt_traces[k] = model.trace_text(entry->captions[cap]);
        u_hat[k] = normalized(img_traces[k].layer_out.back(), &u_norm[k]);
        w_hat[k] = normalized(txt_traces[k].layer_out.back(), &w_norm[k]);
      }

      // s_ij = cos(u_i, w_j) / tau with row- and column-wise cross entropy
      std::vector<double> s(B * B);
      for (std::size_t i = 0; i < B; ++i) {
        for (std::size_t j = 0; j < B; ++j) {
          double d = 0.0;
          for (std::size_t e = 0; e < u_hat[i].size(); ++e) d += u_hat[i][e] * w_hat[j][e];
          s[i * B + j] = d / tau;
        }
      }
      auto softmax_rows = [&](bool by_row) {
        std::vector<double> p(B * B);
        for (std::size_t a = 0; a < B; ++a) {
          double mx = -1e300;
          for (std::size_t b = 0; b < B; ++b) {
            mx = std::max(mx, by_row ? s[a * B + b] : s[b * B + a]);
          }
          double z = 0.0;
          for (std::size_t b = 0; b < B; ++b) {
            const double e = std::exp((by_row ? s[a * B + b] : s[b * B + a]) - mx);
            p[a * B + b] = e;
            z += e;
          }
          for (std::size_t b = 0; b < B; ++b) p[a * B + b] /= z;
        }
        return p;
      };
      const std::vector<double> p_row = softmax_rows(true);   // p_row[i*B+j]
      const std::vector<double> p_col = softmax_rows(false);  // p_col[j*B+i]

      double loss = 0.0;
      for (std::size_t i = 0; i < B; ++i) {
        loss += -std::log(std::max(p_row[i * B + i], 1e-300)) -
                std::log(std::max(p_col[i * B + i], 1e-300));
      }
      loss /= 2.0 * static_cast<double>(B);
      last_loss = loss;

      // dL/ds then back through normalization into both towers
      std::vector<double> ds(B * B);
      const double scale = 1.0 / (2.0 * static_cast<double>(B));
      for (std::size_t i = 0; i < B; ++i) {
        for (std::size_t j = 0; j < B; ++j) {
          const double delta = i == j ? 1.0 : 0.0;
          ds[i * B + j] = scale * ((p_row[i * B + j] - delta) + (p_col[j * B + i] - delta));
        }
      }

      for (auto& p : params) p.zero_grad();
      std::vector<LayerGrads> img_grads, txt_grads;
      for (const auto& layer : model.image_layers()) {
        img_grads.push_back(LayerGrads{std::vector<double>(layer.weight.size(), 0.0),
                                       std::vector<double>(layer.bias.size(), 0.0)});
      }
      for (const auto& layer : model.text_layers()) {
        txt_grads.push_back(LayerGrads{std::vector<double>(layer.weight.size(), 0.0),
                                       std::vector<double>(layer.bias.size(), 0.0)});
      }
      std::vector<double>& table_grad = params[token_param_idx].grad;

      const std::size_t ed = u_hat.empty() ? 0 : u_hat[0].size();
      for (std::size_t i = 0; i < B; ++i) {
        // image side: dL/du_hat_i = sum_j ds_ij * w_hat_j / tau
        std::vector<double> d_hat(ed, 0.0);
        for (std::size_t j = 0; j < B; ++j) {
          const double g = ds[i * B + j] / tau;
          for (std::size_t e = 0; e < ed; ++e) d_hat[e] += g * w_hat[j][e];
        }
        if (u_norm[i] >= kTinyNorm) {
          double along = 0.0;
          for (std::size_t e = 0; e < ed; ++e) along += d_hat[e] * u_hat[i][e];
          std::vector<double> du(ed);
          for (std::size_t e = 0; e < ed; ++e) {
            du[e] = (d_hat[e] - along * u_hat[i][e]) / u_norm[i];
          }
          backprop_layers(model.image_layers(), img_traces[i].features,
                          img_traces[i].layer_out, std::move(du), &img_grads);
        }

        // text side: dL/dw_hat_i = sum_j ds_ji * u_hat_j / tau
        std::vector<double> d_hat_t(ed, 0.0);
        for (std::size_t j = 0; j < B; ++j) {
          const double g = ds[j * B + i] / tau;
          for (std::size_t e = 0; e < ed; ++e) d_hat_t[e] += g * u_hat[j][e];
        }
        if (w_norm[i] >= kTinyNorm) {
          double along = 0.0;
          for (std::size_t e = 0; e < ed; ++e) along += d_hat_t[e] * w_hat[i][e];
          std::vector<double> dw(ed);
          for (std::size_t e = 0; e < ed; ++e) {
            dw[e] = (d_hat_t[e] - along * w_hat[i][e]) / w_norm[i];
          }
          std::vector<double> d_mean =
              backprop_layers(model.text_layers(), txt_traces[i].mean_embed,
                              txt_traces[i].layer_out, std::move(dw), &txt_grads);
          const double inv_len = 1.0 / static_cast<double>(txt_traces[i].ids.size());
          for (std::size_t tok : txt_traces[i].ids) {
            double* row = table_grad.data() + tok * static_cast<std::size_t>(token_dim);
            for (int e = 0; e < token_dim; ++e) row[e] += d_mean[static_cast<std::size_t>(e)] * inv_len;
          }
        }
      }

      // copy tower grads into the flat Adam slots (same order as registration)
      std::size_t pi = 0;
      for (std::size_t li = 0; li < img_grads.size(); ++li) {
        params[pi++].grad = img_grads[li].weight;
        params[pi++].grad = img_grads[li].bias;
      }
      pi = token_param_idx + 1;
      for (std::size_t li = 0; li < txt_grads.size(); ++li) {
        params[pi++].grad = txt_grads[li].weight;
        params[pi++].grad = txt_grads[li].bias;
      }

      ++adam_t;
      for (auto& p : params) p.step(lr, adam_t);
    }

    summary.epochs_run = epoch + 1;
    if ((epoch + 1) % opt.eval_every == 0 || epoch + 1 == opt.max_epochs) {
      const auto [tr, ir] = retrieval_r1(model, val_entries);
      summary.val_tr_r1 = tr;
      summary.val_ir_r1 = ir;
      if (std::min(tr, ir) >= opt.target_r1) {
        summary.reached_target = true;
        break;
      }
    }
  }
  summary.final_loss = last_loss;

  if (opt.max_epochs > 0 && !summary.reached_target &&
      std::min(summary.val_tr_r1, summary.val_ir_r1) < opt.min_r1) {
    throw TrainingError("train_toy_models: " + summary.model_id +
                        " stalled below minimum validation R@1 (" +
                        std::to_string(std::min(summary.val_tr_r1, summary.val_ir_r1)) + ")");
  }
}

}  // namespace

std::vector<ToyDualEncoder> train_toy_models(const DatasetManifest& dataset,
                                             const std::vector<std::string>& spec_tags,
                                             std::uint64_t seed,
                                             const TrainOptions& options,
                                             std::vector<TrainSummary>* summaries) {
  if (spec_tags.empty()) {
    throw std::invalid_argument("train_toy_models: no specs");
  }
  std::size_t caption_pairs = 0;
  for (const auto& e : dataset.entries) caption_pairs += e.captions.size();
  if (caption_pairs < 200) {
    throw std::invalid_argument("train_toy_models: dataset has fewer than 200 image-caption pairs");
  }

  std::vector<ToyDualEncoder> models;
  models.reserve(spec_tags.size());
  for (std::size_t i = 0; i < spec_tags.size(); ++i) {
    const ToyArchitecture arch = ToyArchitecture::parse(spec_tags[i]);
    const std::string model_id = arch.tag() + "@m" + std::to_string(i);
    RngStream stream(seed, model_id);
    ToyDualEncoder model(arch, dataset.vocabulary, model_id, stream.fork("init"));

    TrainSummary summary;
    summary.model_id = model_id;
    train_one(model, dataset, options, stream, summary);
    if (summaries) summaries->push_back(summary);
    models.push_back(std::move(model));
  }
  return models;
}

}  // namespace ird
