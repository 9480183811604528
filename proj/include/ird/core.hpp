#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ird {

/// Contract failure that should abort the surrounding experiment (CLI exit code 2).
struct InvariantViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ImageShape {
  int height = 0;
  int width = 0;
  int channels = 0;

  bool operator==(const ImageShape&) const = default;
  bool valid() const { return height > 0 && width > 0 && channels > 0; }
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(height) * static_cast<std::size_t>(width) *
           static_cast<std::size_t>(channels);
  }
};

/// H x W x C grid of float64 intensities, row-major (h, w, c).
///
/// Real images keep every value in [0, 1]. Attack intermediates (unprojected
/// steps, finite-difference probes) may leave that range; project_linf
/// re-establishes the box. in_unit_range() checks it explicitly.
class ImageTensor {
 public:
  ImageTensor() = default;
  ImageTensor(ImageShape shape, std::vector<double> pixels);
  static ImageTensor filled(ImageShape shape, double value);

  const ImageShape& shape() const { return shape_; }
  const std::vector<double>& pixels() const { return pixels_; }
  std::size_t size() const { return pixels_.size(); }
  double at(int h, int w, int c) const;
  bool in_unit_range() const;

  bool operator==(const ImageTensor&) const = default;

 private:
  ImageShape shape_{};
  std::vector<double> pixels_{};
};

/// Largest absolute pixel difference between two same-shape images.
double linf_distance(const ImageTensor& a, const ImageTensor& b);

/// Ordered caption tokens; every token is a nonempty word string.
class TokenSequence {
 public:
  TokenSequence() = default;
  explicit TokenSequence(std::vector<std::string> tokens);

  std::size_t size() const { return tokens_.size(); }
  bool empty() const { return tokens_.empty(); }
  const std::string& token(std::size_t pos) const { return tokens_.at(pos); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  TokenSequence with_token(std::size_t pos, std::string word) const;

  bool operator==(const TokenSequence&) const = default;

 private:
  std::vector<std::string> tokens_{};
};

/// Token-level Hamming distance; sequences must have equal length.
std::size_t hamming_distance(const TokenSequence& a, const TokenSequence& b);

struct PerturbationBudget {
  double xi_v = 8.0 / 255.0;  ///< L-inf radius, intensity units
  int xi_t = 1;               ///< max substituted words

  void validate() const;
};

/// Convex coefficients locating a point in the triangle
/// (clean image, previous iterate, current iterate).
struct SimplexWeights {
  double beta = 0.0;   ///< clean-image share
  double gamma = 0.0;  ///< previous-iterate share
  double eta = 0.0;    ///< current-iterate share

  double sum() const { return beta + gamma + eta; }
  bool valid(double tol = 1e-9) const;
};

enum class AttackMethod { PGD, SGA, IRD };

std::string_view to_string(AttackMethod method);
AttackMethod attack_method_from_string(std::string_view name);

struct AttackConfig {
  AttackMethod method = AttackMethod::IRD;
  PerturbationBudget budget{};
  double alpha = 2.0 / 255.0;  ///< step size per iteration
  int steps = 10;              ///< iteration count T
  int num_samples = 5;         ///< triangle samples per step, N
  std::vector<double> scale_set{0.50, 0.75, 1.00, 1.25, 1.50};
  double lambda_w = 0.6;  ///< clean-image weight in the text objective
  double mu_w = 0.2;      ///< final-iterate weight
  double nu_w = 0.2;      ///< previous-iterate weight
  int word_list = 10;     ///< candidate words per position, W
  std::uint64_t seed = 0;
  bool sga_augmentation = true;  ///< SGA: build the resized set each step
  bool text_region = true;       ///< text deviates from the last triangle (off: final iterate only)
  bool use_caption_set = false;  ///< image-side objective sums J over all captions
  /// Diagnostic: overrides triangle sampling with fixed weights.
  std::optional<SimplexWeights> forced_weights{};
  /// Diagnostic: keep every iterate in the attack record.
  bool record_iterates = false;

  int num_scales() const { return static_cast<int>(scale_set.size()); }
  void validate() const;
};

/// Deterministic random stream keyed by (seed, stream_key).
///
/// A copyable value; identical (seed, stream_key) replays the identical
/// sequence. fork() derives an independent child stream without advancing
/// the parent. Draw helpers avoid std distributions so the byte stream is
/// pinned by the standardized mt19937_64 engine alone.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::string stream_key);

  RngStream fork(std::string_view subkey) const;

  std::uint64_t next_u64();
  double uniform();                        ///< [0, 1)
  double uniform(double lo, double hi);    ///< [lo, hi)
  std::size_t index(std::size_t n);        ///< [0, n)

  std::uint64_t seed() const { return seed_; }
  const std::string& stream_key() const { return key_; }

 private:
  std::uint64_t seed_ = 0;
  std::string key_{};
  std::mt19937_64 engine_{};
};

/// sign(0) = 0.
double sign(double x);

/// Clamps every pixel to [origin - xi_v, origin + xi_v] intersected with
/// [0, 1]. Idempotent bitwise.
ImageTensor project_linf(const ImageTensor& candidate, const ImageTensor& origin,
                         const PerturbationBudget& budget);

/// n draws uniform over the 2-simplex (sorted-uniform spacings).
std::vector<SimplexWeights> sample_simplex(int n, RngStream& rng);

/// beta*v + gamma*v_prev + eta*v_cur. Each output pixel is additionally
/// clamped to the hull [min, max] of its three inputs so float rounding can
/// never push a convex combination outside the feasible box.
ImageTensor blend_point(const ImageTensor& v, const ImageTensor& v_prev,
                        const ImageTensor& v_cur, const SimplexWeights& w);

/// Ordered word list with the reserved unknown token at index 0.
class Vocabulary {
 public:
  static constexpr std::size_t kUnkId = 0;
  static constexpr std::string_view kUnkToken = "<unk>";

  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> words);

  std::size_t size() const { return words_.size(); }
  std::size_t id_of(const std::string& word) const;  ///< unknown words map to kUnkId
  bool contains(const std::string& word) const;
  const std::string& word(std::size_t id) const { return words_.at(id); }
  const std::vector<std::string>& words() const { return words_; }
  std::uint64_t fingerprint() const;

 private:
  std::vector<std::string> words_{};
  std::vector<std::pair<std::string, std::size_t>> sorted_index_{};
};

std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace ird
