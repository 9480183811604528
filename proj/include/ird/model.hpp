#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "ird/core.hpp"
#include "ird/resize.hpp"

namespace ird {

struct Embedding {
  std::vector<double> values;

  int dim() const { return static_cast<int>(values.size()); }
  bool finite() const;
};

/// Cosine similarity; returns 0 when either vector has (near-)zero norm.
double cosine_similarity(const Embedding& a, const Embedding& b);

/// The attack loss J = -cos(image embedding, text embedding). Larger J
/// means the pair is further apart.
double negative_cosine(const Embedding& image_embedding, const Embedding& text_embedding);

/// Attacked/surrogate model surface: image encoder, text encoder, loss J,
/// and the gradient of J with respect to the image.
class EncoderModel {
 public:
  virtual ~EncoderModel() = default;

  virtual Embedding encode_image(const ImageTensor& image) const = 0;
  virtual Embedding encode_text(const TokenSequence& text) const = 0;
  virtual double loss_J(const ImageTensor& image, const TokenSequence& text) const;
  /// Gradient of loss_J w.r.t. every pixel of `image` (same length/layout).
  virtual std::vector<double> grad_J_image(const ImageTensor& image,
                                           const TokenSequence& text) const = 0;
  virtual const std::string& model_id() const = 0;
  /// Token mapping when the model owns one (toy encoders do).
  virtual const Vocabulary* vocabulary() const { return nullptr; }
};

/// y = W x + b with optional tanh. Weights are row-major out_dim x in_dim.
struct AffineLayer {
  int in_dim = 0;
  int out_dim = 0;
  std::vector<double> weight;
  std::vector<double> bias;
  bool tanh_activation = false;

  std::vector<double> apply(const std::vector<double>& x) const;
};

struct LayerGrads {
  std::vector<double> weight;
  std::vector<double> bias;
};

/// Backward pass through an affine(+tanh) stack. `layer_out` holds each
/// layer's post-activation output from the forward pass. Returns the delta
/// at the stack input; per-layer parameter grads are accumulated into
/// `param_grads` when non-null (sized like the stack).
std::vector<double> backprop_layers(const std::vector<AffineLayer>& layers,
                                    const std::vector<double>& input,
                                    const std::vector<std::vector<double>>& layer_out,
                                    std::vector<double> delta,
                                    std::vector<LayerGrads>* param_grads);

enum class StemKind { PatchPool, StridedAvg };

/// Toy tower geometry. The tag encodes everything needed to rebuild the
/// layer shapes, e.g. "vit-h64-e32-t16" (4x4 patch pooling stem) or
/// "cnn-h64-e32-t16" (3x3 stride-2 averaging stem).
struct ToyArchitecture {
  StemKind stem = StemKind::PatchPool;
  int hidden = 64;
  int embed_dim = 32;
  int token_dim = 16;

  std::string tag() const;
  static ToyArchitecture parse(const std::string& tag);
  int stem_dim() const;
};

/// Small deterministic dual encoder with analytic gradients, float64
/// end-to-end. Images of any spatial size are first resized (bilinear) to
/// the native 16x16x3 resolution; text is the mean token embedding pushed
/// through a 2-layer MLP. Treat instances as immutable once trained.
class ToyDualEncoder final : public EncoderModel {
 public:
  static constexpr ImageShape kNativeShape{16, 16, 3};

  ToyDualEncoder(ToyArchitecture arch, Vocabulary vocab, std::string model_id,
                 RngStream init_rng);

  Embedding encode_image(const ImageTensor& image) const override;
  Embedding encode_text(const TokenSequence& text) const override;
  std::vector<double> grad_J_image(const ImageTensor& image,
                                   const TokenSequence& text) const override;
  const std::string& model_id() const override { return model_id_; }
  const Vocabulary* vocabulary() const override { return &vocab_; }

  const ToyArchitecture& architecture() const { return arch_; }
  const std::string& architecture_tag() const { return arch_tag_; }

  std::vector<AffineLayer>& image_layers() { return image_layers_; }
  const std::vector<AffineLayer>& image_layers() const { return image_layers_; }
  std::vector<AffineLayer>& text_layers() { return text_layers_; }
  const std::vector<AffineLayer>& text_layers() const { return text_layers_; }
  /// vocab_size x token_dim, row-major.
  std::vector<double>& token_table() { return token_table_; }
  const std::vector<double>& token_table() const { return token_table_; }

  // Forward passes with intermediate activations, for backprop.
  struct ImageTrace {
    std::vector<double> native;    // pixels at native resolution
    std::vector<double> features;  // stem output
    std::vector<std::vector<double>> layer_out;
  };
  struct TextTrace {
    std::vector<std::size_t> ids;
    std::vector<double> mean_embed;
    std::vector<std::vector<double>> layer_out;
  };
  ImageTrace trace_image(const ImageTensor& image) const;
  TextTrace trace_text(const TokenSequence& text) const;

  /// Pulls a delta at the stem features back to native pixels.
  std::vector<double> stem_transpose(const std::vector<double>& feature_delta) const;
  std::vector<double> stem_forward(const std::vector<double>& native_pixels) const;

 private:
  ToyArchitecture arch_{};
  std::string arch_tag_{};
  Vocabulary vocab_{};
  std::string model_id_{};
  std::vector<AffineLayer> image_layers_{};
  std::vector<double> token_table_{};
  std::vector<AffineLayer> text_layers_{};
};

struct GradCheckReport {
  int trials = 0;
  double tolerance = 0.0;
  double max_rel_err = 0.0;
  bool passed = false;
  int worst_trial = -1;
  std::size_t worst_coord = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

/// Compares grad_J_image against central finite differences of loss_J over
/// `trials` random (image, caption) pairs; image shapes cycle through the
/// native resolution and two non-native ones to exercise the resize path.
/// Requires the model to expose a vocabulary.
GradCheckReport finite_difference_check(const EncoderModel& model, int trials, double tol,
                                        RngStream& rng, double step = 1e-5);

/// Checkpoint io (container tag carries model id, architecture, and a
/// vocabulary fingerprint; the vocabulary itself lives with the dataset).
void save_model(const ToyDualEncoder& model, const std::filesystem::path& path);
ToyDualEncoder load_model(const std::filesystem::path& path, const Vocabulary& vocab);

}  // namespace ird
