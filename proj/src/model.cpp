#include "ird/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "ird/container.hpp"

namespace ird {

namespace {

constexpr double kTinyNorm = 1e-30;

double norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

bool Embedding::finite() const {
  return std::all_of(values.begin(), values.end(),
                     [](double x) { return std::isfinite(x); });
}

double cosine_similarity(const Embedding& a, const Embedding& b) {
  if (a.values.size() != b.values.size()) {
    throw std::invalid_argument("cosine_similarity: dimension mismatch");
  }
  const double na = norm2(a.values);
  const double nb = norm2(b.values);
  if (na < kTinyNorm || nb < kTinyNorm) return 0.0;
  return dot(a.values, b.values) / (na * nb);
}

double negative_cosine(const Embedding& image_embedding, const Embedding& text_embedding) {
  return -cosine_similarity(image_embedding, text_embedding);
}

double EncoderModel::loss_J(const ImageTensor& image, const TokenSequence& text) const {
  return negative_cosine(encode_image(image), encode_text(text));
}

std::vector<double> AffineLayer::apply(const std::vector<double>& x) const {
  if (static_cast<int>(x.size()) != in_dim) {
    throw std::invalid_argument("AffineLayer: input dimension mismatch");
  }
  std::vector<double> y(static_cast<std::size_t>(out_dim));
  for (int r = 0; r < out_dim; ++r) {
    double s = bias[static_cast<std::size_t>(r)];
    const double* row = weight.data() + static_cast<std::size_t>(r) * in_dim;
    for (int c = 0; c < in_dim; ++c) s += row[c] * x[static_cast<std::size_t>(c)];
    y[static_cast<std::size_t>(r)] = tanh_activation ? std::tanh(s) : s;
  }
  return y;
}

std::vector<double> backprop_layers(const std::vector<AffineLayer>& layers,
                                    const std::vector<double>& input,
                                    const std::vector<std::vector<double>>& layer_out,
                                    std::vector<double> delta,
                                    std::vector<LayerGrads>* param_grads) {
  for (int li = static_cast<int>(layers.size()) - 1; li >= 0; --li) {
    const AffineLayer& layer = layers[static_cast<std::size_t>(li)];
    const std::vector<double>& out = layer_out[static_cast<std::size_t>(li)];
    const std::vector<double>& in =
        li == 0 ? input : layer_out[static_cast<std::size_t>(li - 1)];
    if (layer.tanh_activation) {
      for (int r = 0; r < layer.out_dim; ++r) {
        const double y = out[static_cast<std::size_t>(r)];
        delta[static_cast<std::size_t>(r)] *= 1.0 - y * y;
      }
    }
    if (param_grads) {
      LayerGrads& g = (*param_grads)[static_cast<std::size_t>(li)];
      for (int r = 0; r < layer.out_dim; ++r) {
        const double d = delta[static_cast<std::size_t>(r)];
        g.bias[static_cast<std::size_t>(r)] += d;
        double* grow = g.weight.data() + static_cast<std::size_t>(r) * layer.in_dim;
        for (int c = 0; c < layer.in_dim; ++c) grow[c] += d * in[static_cast<std::size_t>(c)];
      }
    }
    std::vector<double> prev(static_cast<std::size_t>(layer.in_dim), 0.0);
    for (int r = 0; r < layer.out_dim; ++r) {
      const double d = delta[static_cast<std::size_t>(r)];
      const double* row = layer.weight.data() + static_cast<std::size_t>(r) * layer.in_dim;
      for (int c = 0; c < layer.in_dim; ++c) prev[static_cast<std::size_t>(c)] += d * row[c];
    }
    delta = std::move(prev);
  }
  return delta;
}

std::string ToyArchitecture::tag() const {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s-h%d-e%d-t%d",
                stem == StemKind::PatchPool ? "vit" : "cnn", hidden, embed_dim, token_dim);
  return buf;
}

ToyArchitecture ToyArchitecture::parse(const std::string& tag) {
  ToyArchitecture arch;
  std::string rest;
  if (tag.rfind("vit-", 0) == 0) {
    arch.stem = StemKind::PatchPool;
    rest = tag.substr(4);
  } else if (tag.rfind("cnn-", 0) == 0) {
    arch.stem = StemKind::StridedAvg;
    rest = tag.substr(4);
  } else {
    throw std::invalid_argument("ToyArchitecture: unknown family in tag " + tag);
  }
  int hidden = 0, embed = 0, token = 16;
  const int matched = std::sscanf(rest.c_str(), "h%d-e%d-t%d", &hidden, &embed, &token);
  if (matched < 2 || hidden < 1 || embed < 1 || token < 1) {
    throw std::invalid_argument("ToyArchitecture: cannot parse tag " + tag);
  }
  arch.hidden = hidden;
  arch.embed_dim = embed;
  arch.token_dim = token;
  return arch;
}

int ToyArchitecture::stem_dim() const {
  // PatchPool: 4x4 cells over 16x16 -> 4x4 grid; StridedAvg: 3x3 window,
  // stride 2, no padding -> 7x7 grid. Both keep 3 channels.
  return stem == StemKind::PatchPool ? 4 * 4 * 3 : 7 * 7 * 3;
}

namespace {

AffineLayer init_layer(int in_dim, int out_dim, bool tanh_activation, RngStream& rng) {
  AffineLayer layer;
  layer.in_dim = in_dim;
  layer.out_dim = out_dim;
  layer.tanh_activation = tanh_activation;
  layer.weight.resize(static_cast<std::size_t>(in_dim) * out_dim);
  layer.bias.assign(static_cast<std::size_t>(out_dim), 0.0);
  const double bound = 1.0 / std::sqrt(static_cast<double>(in_dim));
  for (auto& w : layer.weight) w = rng.uniform(-bound, bound);
  return layer;
}

}  // namespace

ToyDualEncoder::ToyDualEncoder(ToyArchitecture arch, Vocabulary vocab, std::string model_id,
                               RngStream init_rng)
    : arch_(arch), arch_tag_(arch.tag()), vocab_(std::move(vocab)),
      model_id_(std::move(model_id)) {
  if (vocab_.size() < 2) {
    throw std::invalid_argument("ToyDualEncoder: vocabulary too small");
  }
  auto image_rng = init_rng.fork("image");
  image_layers_.push_back(init_layer(arch_.stem_dim(), arch_.hidden, true, image_rng));
  image_layers_.push_back(init_layer(arch_.hidden, arch_.embed_dim, false, image_rng));

  auto table_rng = init_rng.fork("tokens");
  token_table_.resize(vocab_.size() * static_cast<std::size_t>(arch_.token_dim));
  for (auto& e : token_table_) e = table_rng.uniform(-0.5, 0.5);

  auto text_rng = init_rng.fork("text");
  text_layers_.push_back(init_layer(arch_.token_dim, arch_.hidden, true, text_rng));
  text_layers_.push_back(init_layer(arch_.hidden, arch_.embed_dim, false, text_rng));
}

std::vector<double> ToyDualEncoder::stem_forward(const std::vector<double>& native) const {
  const int ch = kNativeShape.channels;
  const int w = kNativeShape.width;
  std::vector<double> features(static_cast<std::size_t>(arch_.stem_dim()), 0.0);
  if (arch_.stem == StemKind::PatchPool) {
    for (int py = 0; py < 4; ++py) {
      for (int px = 0; px < 4; ++px) {
        for (int c = 0; c < ch; ++c) {
          double s = 0.0;
          for (int dy = 0; dy < 4; ++dy) {
            for (int dx = 0; dx < 4; ++dx) {
              s += native[(static_cast<std::size_t>(py * 4 + dy) * w + px * 4 + dx) * ch + c];
            }
          }
          features[static_cast<std::size_t>((py * 4 + px) * ch + c)] = s / 16.0;
        }
      }
    }
  } else {
    for (int oy = 0; oy < 7; ++oy) {
      for (int ox = 0; ox < 7; ++ox) {
        for (int c = 0; c < ch; ++c) {
          double s = 0.0;
          for (int dy = 0; dy < 3; ++dy) {
            for (int dx = 0; dx < 3; ++dx) {
              s += native[(static_cast<std::size_t>(oy * 2 + dy) * w + ox * 2 + dx) * ch + c];
            }
          }
          features[static_cast<std::size_t>((oy * 7 + ox) * ch + c)] = s / 9.0;
        }
      }
    }
  }
  return features;
}

std::vector<double> ToyDualEncoder::stem_transpose(const std::vector<double>& feature_delta) const {
  const int ch = kNativeShape.channels;
  const int w = kNativeShape.width;
  std::vector<double> native(kNativeShape.pixel_count(), 0.0);
  if (arch_.stem == StemKind::PatchPool) {
    for (int py = 0; py < 4; ++py) {
      for (int px = 0; px < 4; ++px) {
        for (int c = 0; c < ch; ++c) {
          const double d = feature_delta[static_cast<std::size_t>((py * 4 + px) * ch + c)] / 16.0;
          for (int dy = 0; dy < 4; ++dy) {
            for (int dx = 0; dx < 4; ++dx) {
              native[(static_cast<std::size_t>(py * 4 + dy) * w + px * 4 + dx) * ch + c] += d;
            }
          }
        }
      }
    }
  } else {
    for (int oy = 0; oy < 7; ++oy) {
      for (int ox = 0; ox < 7; ++ox) {
        for (int c = 0; c < ch; ++c) {
          const double d = feature_delta[static_cast<std::size_t>((oy * 7 + ox) * ch + c)] / 9.0;
          for (int dy = 0; dy < 3; ++dy) {
            for (int dx = 0; dx < 3; ++dx) {
              native[(static_cast<std::size_t>(oy * 2 + dy) * w + ox * 2 + dx) * ch + c] += d;
            }
          }
        }
      }
    }
  }
  return native;
}

ToyDualEncoder::ImageTrace ToyDualEncoder::trace_image(const ImageTensor& image) const {
  if (image.shape().channels != kNativeShape.channels) {
    throw std::invalid_argument("ToyDualEncoder: expects 3-channel images");
  }
  ImageTrace trace;
  if (image.shape() == kNativeShape) {
    trace.native = image.pixels();
  } else {
    trace.native = BilinearResizer(image.shape(), kNativeShape).forward(image).pixels();
  }
  trace.features = stem_forward(trace.native);
  std::vector<double> h = trace.features;
  for (const auto& layer : image_layers_) {
    h = layer.apply(h);
    trace.layer_out.push_back(h);
  }
  return trace;
}

ToyDualEncoder::TextTrace ToyDualEncoder::trace_text(const TokenSequence& text) const {
  if (text.empty()) {
    throw std::invalid_argument("ToyDualEncoder: empty token sequence");
  }
  TextTrace trace;
  trace.ids.reserve(text.size());
  for (const auto& tok : text.tokens()) trace.ids.push_back(vocab_.id_of(tok));
  trace.mean_embed.assign(static_cast<std::size_t>(arch_.token_dim), 0.0);
  for (std::size_t id : trace.ids) {
    const double* row = token_table_.data() + id * static_cast<std::size_t>(arch_.token_dim);
    for (int d = 0; d < arch_.token_dim; ++d) trace.mean_embed[static_cast<std::size_t>(d)] += row[d];
  }
  const double inv = 1.0 / static_cast<double>(trace.ids.size());
  for (auto& x : trace.mean_embed) x *= inv;
  std::vector<double> h = trace.mean_embed;
  for (const auto& layer : text_layers_) {
    h = layer.apply(h);
    trace.layer_out.push_back(h);
  }
  return trace;
}

Embedding ToyDualEncoder::encode_image(const ImageTensor& image) const {
  return Embedding{trace_image(image).layer_out.back()};
}

Embedding ToyDualEncoder::encode_text(const TokenSequence& text) const {
  return Embedding{trace_text(text).layer_out.back()};
}

std::vector<double> ToyDualEncoder::grad_J_image(const ImageTensor& image,
                                                 const TokenSequence& text) const {
  const ImageTrace trace = trace_image(image);
  const std::vector<double>& u = trace.layer_out.back();
  const std::vector<double> w = trace_text(text).layer_out.back();

  const double nu = norm2(u);
  const double nw = norm2(w);
  std::vector<double> delta(u.size(), 0.0);
  if (nu >= kTinyNorm && nw >= kTinyNorm) {
    // J = -(u.w)/(|u||w|)
    const double d = dot(u, w);
    const double inv = 1.0 / (nu * nw);
    const double proj = d / (nu * nu * nu * nw);
    for (std::size_t i = 0; i < u.size(); ++i) {
      delta[i] = -w[i] * inv + u[i] * proj;
    }
  }

  std::vector<double> feature_delta =
      backprop_layers(image_layers_, trace.features, trace.layer_out, std::move(delta), nullptr);
  std::vector<double> native_grad = stem_transpose(feature_delta);
  if (image.shape() == kNativeShape) return native_grad;
  return BilinearResizer(image.shape(), kNativeShape).transpose(native_grad);
}

GradCheckReport finite_difference_check(const EncoderModel& model, int trials, double tol,
                                        RngStream& rng, double step) {
  if (trials < 1) {
    throw std::invalid_argument("finite_difference_check: trials must be >= 1");
  }
  const Vocabulary* vocab = model.vocabulary();
  if (vocab == nullptr || vocab->size() < 2) {
    throw std::invalid_argument("finite_difference_check: model does not expose a vocabulary");
  }
  const ImageShape shapes[] = {{16, 16, 3}, {8, 8, 3}, {20, 24, 3}};

  GradCheckReport report;
  report.trials = trials;
  report.tolerance = tol;
  for (int trial = 0; trial < trials; ++trial) {
    const ImageShape shape = shapes[trial % 3];
    std::vector<double> pixels(shape.pixel_count());
    for (auto& p : pixels) p = rng.uniform();
    const ImageTensor v(shape, std::move(pixels));

    const std::size_t len = 3 + rng.index(6);
    std::vector<std::string> words;
    for (std::size_t i = 0; i < len; ++i) {
      words.push_back(vocab->word(1 + rng.index(vocab->size() - 1)));
    }
    const TokenSequence t{std::move(words)};

    const std::vector<double> analytic = model.grad_J_image(v, t);
    for (std::size_t i = 0; i < v.size(); ++i) {
      std::vector<double> plus = v.pixels();
      std::vector<double> minus = v.pixels();
      plus[i] += step;
      minus[i] -= step;
      const double jp = model.loss_J(ImageTensor(shape, std::move(plus)), t);
      const double jm = model.loss_J(ImageTensor(shape, std::move(minus)), t);
      const double numeric = (jp - jm) / (2.0 * step);
      const double denom = std::max(std::abs(analytic[i]), std::abs(numeric));
      if (denom < 1e-9) continue;
      const double rel = std::abs(analytic[i] - numeric) / denom;
      if (rel > report.max_rel_err) {
        report.max_rel_err = rel;
        report.worst_trial = trial;
        report.worst_coord = i;
        report.worst_analytic = analytic[i];
        report.worst_numeric = numeric;
      }
    }
  }
  report.passed = report.max_rel_err <= tol;
  return report;
}

namespace {

constexpr std::string_view kVocabMark = ";v=";

void push_layer_arrays(std::vector<ArrayF64>& arrays, const AffineLayer& layer) {
  arrays.push_back(ArrayF64{{static_cast<std::uint64_t>(layer.out_dim),
                             static_cast<std::uint64_t>(layer.in_dim)},
                            layer.weight});
  arrays.push_back(ArrayF64{{static_cast<std::uint64_t>(layer.out_dim)}, layer.bias});
}

void take_layer_arrays(const std::vector<ArrayF64>& arrays, std::size_t& next,
                       AffineLayer& layer, const std::string& what) {
  const ArrayF64& w = arrays.at(next++);
  const ArrayF64& b = arrays.at(next++);
  if (w.dims.size() != 2 || b.dims.size() != 1 ||
      w.dims[0] != static_cast<std::uint64_t>(layer.out_dim) ||
      w.dims[1] != static_cast<std::uint64_t>(layer.in_dim) ||
      b.dims[0] != static_cast<std::uint64_t>(layer.out_dim)) {
    throw ContainerError("checkpoint: " + what + " has unexpected dimensions");
  }
  layer.weight = w.data;
  layer.bias = b.data;
}

}  // namespace

void save_model(const ToyDualEncoder& model, const std::filesystem::path& path) {
  char fp[32];
  std::snprintf(fp, sizeof(fp), "%016llx",
                static_cast<unsigned long long>(model.vocabulary()->fingerprint()));
  Container container;
  container.tag = model.model_id() + std::string(kVocabMark) + fp;
  for (const auto& layer : model.image_layers()) push_layer_arrays(container.arrays, layer);
  container.arrays.push_back(
      ArrayF64{{static_cast<std::uint64_t>(model.vocabulary()->size()),
                static_cast<std::uint64_t>(model.architecture().token_dim)},
               model.token_table()});
  for (const auto& layer : model.text_layers()) push_layer_arrays(container.arrays, layer);
  write_container(path, container);
}

ToyDualEncoder load_model(const std::filesystem::path& path, const Vocabulary& vocab) {
  const Container container = read_container(path);
  const auto mark = container.tag.rfind(kVocabMark);
  if (mark == std::string::npos) {
    throw ContainerError("checkpoint: tag lacks vocabulary fingerprint: " + container.tag);
  }
  const std::string model_id = container.tag.substr(0, mark);
  const std::string fp_hex = container.tag.substr(mark + kVocabMark.size());
  char expect[32];
  std::snprintf(expect, sizeof(expect), "%016llx",
                static_cast<unsigned long long>(vocab.fingerprint()));
  if (fp_hex != expect) {
    throw ContainerError("checkpoint: vocabulary fingerprint mismatch for " + model_id +
                         " (checkpoint " + fp_hex + ", dataset " + expect + ")");
  }
  const auto at = model_id.rfind('@');
  const std::string arch_tag = at == std::string::npos ? model_id : model_id.substr(0, at);
  const ToyArchitecture arch = ToyArchitecture::parse(arch_tag);

  ToyDualEncoder model(arch, vocab, model_id, RngStream(0, "checkpoint-load"));
  std::size_t next = 0;
  for (std::size_t li = 0; li < model.image_layers().size(); ++li) {
    take_layer_arrays(container.arrays, next, model.image_layers()[li], "image layer");
  }
  const ArrayF64& table = container.arrays.at(next++);
  if (table.dims.size() != 2 || table.dims[0] != vocab.size() ||
      table.dims[1] != static_cast<std::uint64_t>(arch.token_dim)) {
    throw ContainerError("checkpoint: token table has unexpected dimensions");
  }
  model.token_table() = table.data;
  for (std::size_t li = 0; li < model.text_layers().size(); ++li) {
    take_layer_arrays(container.arrays, next, model.text_layers()[li], "text layer");
  }
  if (next != container.arrays.size()) {
    throw ContainerError("checkpoint: trailing arrays in " + path.string());
  }
  return model;
}

}  // namespace ird
