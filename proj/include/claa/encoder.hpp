#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "claa/kernels.hpp"
#include "claa/linalg.hpp"

namespace claa {

enum class EncoderKind { Registry, Lightweight };
enum class Pooling { Mean, First };

inline constexpr std::size_t kDefaultMaxTokens = 160;

struct EncoderSpec {
  EncoderKind kind = EncoderKind::Lightweight;
  // Required for Registry; one of model_registry() names.
  std::string registry_name;
  // Required for Lightweight; for Registry 0 means "model hidden size".
  std::size_t embedding_dim = 32;
  std::size_t max_tokens = kDefaultMaxTokens;
  Pooling pooling = Pooling::Mean;

  // Throws ValidationError on an inconsistent combination.
  void validate() const;
  std::string to_json() const;
  static EncoderSpec from_json(std::string_view text);
  // "lightweight" or "registry:<name>" (the --encoder flag syntax).
  static EncoderSpec parse_flag(std::string_view flag, std::size_t embedding_dim = 32);
};

// Architecture metadata for the supported pre-trained checkpoints.
struct ModelInfo {
  std::string name;
  std::string architecture;
  int layers = 0;
  int heads = 0;
  int params_millions = 0;
  std::size_t hidden_dim = 0;
};

std::span<const ModelInfo> model_registry();
const ModelInfo* find_model(std::string_view name);

// Row-wise L2 normalized embeddings (or raw pooled outputs).
struct EmbeddingMatrix {
  Matrix values;
  bool normalized = false;

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }
};

// Backend-specific data a forward pass keeps for backward.
struct ForwardState {
  virtual ~ForwardState() = default;
};

struct ForwardPass {
  Matrix output;  // n x dim, unnormalized pooled representations
  std::unique_ptr<ForwardState> state;
};

class Encoder {
 public:
  virtual ~Encoder() = default;

  virtual const EncoderSpec& spec() const = 0;
  virtual std::size_t dim() const = 0;
  virtual ForwardPass forward(std::span<const std::string> texts) const = 0;
  // Adds d(loss)/d(parameters) to grad, given d(loss)/d(output).
  virtual void backward(const ForwardPass& pass, const Matrix& grad_output,
                        std::span<double> grad) const = 0;
  virtual std::span<double> parameters() = 0;
  virtual std::span<const double> parameters() const = 0;
  virtual std::unique_ptr<Encoder> clone() const = 0;
  virtual void save_parameters(const std::filesystem::path& dir) const = 0;
  virtual void load_parameters(const std::filesystem::path& dir) = 0;
  virtual const ModelInfo* model_info() const { return nullptr; }

  std::size_t parameter_count() const { return parameters().size(); }
};

// Hashed character n-gram features + trainable linear projection.
class LightweightEncoder final : public Encoder {
 public:
  static constexpr std::uint32_t kFeatureBits = 15;
  static constexpr std::size_t kFeatureDim = std::size_t{1} << kFeatureBits;
  static constexpr std::size_t kMinGram = 3;
  static constexpr std::size_t kMaxGram = 5;
  static constexpr std::uint32_t kHashSeed = 0x9747b28cU;

  LightweightEncoder(EncoderSpec spec, std::uint64_t seed);

  const EncoderSpec& spec() const override { return spec_; }
  std::size_t dim() const override { return spec_.embedding_dim; }
  ForwardPass forward(std::span<const std::string> texts) const override;
  void backward(const ForwardPass& pass, const Matrix& grad_output,
                std::span<double> grad) const override;
  std::span<double> parameters() override { return params_; }
  std::span<const double> parameters() const override { return params_; }
  std::unique_ptr<Encoder> clone() const override;
  void save_parameters(const std::filesystem::path& dir) const override;
  void load_parameters(const std::filesystem::path& dir) override;

  // Pooled sparse features of one sentence after truncation.
  kernels::SparseRow features(std::string_view text) const;

 private:
  EncoderSpec spec_;
  // feature-major: params_[feature * dim + r]
  std::vector<double> params_;
};

// A registry backend builds the encoder for one checkpoint. Backends are
// registered by the embedding application; none ship with the core.
using BackendFactory =
    std::function<std::unique_ptr<Encoder>(const EncoderSpec&, const ModelInfo&, std::uint64_t seed)>;

// name = a model_registry() name, or "*" for a catch-all backend.
void register_backend(const std::string& name, BackendFactory factory);
void unregister_backend(const std::string& name);

// Throws ValidationError for unknown registry names and BackendUnavailable
// when no backend serves a known name.
std::unique_ptr<Encoder> build_encoder(const EncoderSpec& spec, std::uint64_t seed);

// Pooled outputs, optionally L2-normalized. Throws on empty input.
EmbeddingMatrix encode(const Encoder& encoder, std::span<const std::string> texts, bool normalize);

// Normalizes rows of u in place; returns the pre-normalization norms.
Vector normalize_rows(Matrix& u);
// Gradient w.r.t. u given z = u/|u| (row-wise), the norms and dL/dz.
Matrix normalize_backward(const Matrix& z, const Vector& norms, const Matrix& grad_z);

// Directory layout: encoder.json (spec) + parameter files.
void save_encoder(const Encoder& encoder, const std::filesystem::path& dir);
std::unique_ptr<Encoder> load_encoder(const std::filesystem::path& dir);

}  // namespace claa
