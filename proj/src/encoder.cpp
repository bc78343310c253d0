#include "claa/encoder.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <map>
#include <mutex>

#include "json.hpp"

#include "claa/error.hpp"
#include "claa/text.hpp"
#include "claa/util.hpp"

namespace claa {

using nlohmann::json;

namespace {

const std::array<ModelInfo, 7> kRegistry = {{
    {"bert-base-uncased", "BERT", 12, 12, 110, 768},
    {"roberta-base", "RoBERTa", 12, 12, 123, 768},
    {"jeniya/BERTOverflow", "BERTOverflow", 12, 12, 149, 768},
    {"albert-base-v2", "ALBERT", 12, 12, 11, 768},
    {"xlnet-base-cased", "XLNet", 12, 12, 110, 768},
    {"google/electra-base-discriminator", "ELECTRA", 12, 12, 110, 768},
    {"t5-small", "T5", 6, 8, 60, 512},
}};

std::mutex& registry_mutex() {
  static std::mutex m;
  return m;
}

std::map<std::string, BackendFactory>& backends() {
  static std::map<std::string, BackendFactory> b;
  return b;
}

std::string pooling_name(Pooling p) { return p == Pooling::Mean ? "mean" : "first"; }

struct LightweightState final : ForwardState {
  std::vector<kernels::SparseRow> rows;
};

// Forwards everything to the backend-provided encoder and reports the
// checkpoint metadata.
class RegistryAdapter final : public Encoder {
 public:
  RegistryAdapter(EncoderSpec spec, ModelInfo info, std::unique_ptr<Encoder> inner)
      : spec_(std::move(spec)), info_(std::move(info)), inner_(std::move(inner)) {}

  const EncoderSpec& spec() const override { return spec_; }
  std::size_t dim() const override { return inner_->dim(); }
  ForwardPass forward(std::span<const std::string> texts) const override {
    // Backends tokenize themselves; the token budget is passed through spec.
    return inner_->forward(texts);
  }
  void backward(const ForwardPass& pass, const Matrix& grad_output,
                std::span<double> grad) const override {
    inner_->backward(pass, grad_output, grad);
  }
  std::span<double> parameters() override { return inner_->parameters(); }
  std::span<const double> parameters() const override {
    return static_cast<const Encoder&>(*inner_).parameters();
  }
  std::unique_ptr<Encoder> clone() const override {
    return std::make_unique<RegistryAdapter>(spec_, info_, inner_->clone());
  }
  void save_parameters(const std::filesystem::path& dir) const override { inner_->save_parameters(dir); }
  void load_parameters(const std::filesystem::path& dir) override { inner_->load_parameters(dir); }
  const ModelInfo* model_info() const override { return &info_; }

 private:
  EncoderSpec spec_;
  ModelInfo info_;
  std::unique_ptr<Encoder> inner_;
};

void put_f32_le(std::string& out, float f) {
  const auto bits = std::bit_cast<std::uint32_t>(f);
  for (int b = 0; b < 4; ++b) out += static_cast<char>((bits >> (8 * b)) & 0xFF);
}

float get_f32_le(const unsigned char* p) {
  std::uint32_t bits = 0;
  for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(p[b]) << (8 * b);
  return std::bit_cast<float>(bits);
}

}  // namespace

// ---------------------------------------------------------------------------
// EncoderSpec

void EncoderSpec::validate() const {
  if (max_tokens == 0) throw ValidationError("max_tokens must be positive");
  if (kind == EncoderKind::Registry) {
    if (registry_name.empty()) throw ValidationError("registry encoder requires registry_name");
  } else if (embedding_dim == 0) {
    throw ValidationError("lightweight encoder requires a positive embedding_dim");
  }
}

std::string EncoderSpec::to_json() const {
  json j;
  j["kind"] = kind == EncoderKind::Registry ? "registry" : "lightweight";
  j["registry_name"] = kind == EncoderKind::Registry ? json(registry_name) : json(nullptr);
  j["embedding_dim"] = embedding_dim;
  j["max_tokens"] = max_tokens;
  j["pooling"] = pooling_name(pooling);
  if (kind == EncoderKind::Lightweight) {
    j["feature_dim"] = LightweightEncoder::kFeatureDim;
    j["hash_seed"] = LightweightEncoder::kHashSeed;
    j["ngram_range"] = {LightweightEncoder::kMinGram, LightweightEncoder::kMaxGram};
  }
  return j.dump(2);
}

EncoderSpec EncoderSpec::from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed encoder spec: ") + e.what());
  }
  EncoderSpec s;
  try {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "registry") {
      s.kind = EncoderKind::Registry;
      s.registry_name = j.at("registry_name").get<std::string>();
    } else if (kind == "lightweight") {
      s.kind = EncoderKind::Lightweight;
    } else {
      throw ValidationError("unknown encoder kind '" + kind + "'");
    }
    s.embedding_dim = j.at("embedding_dim").get<std::size_t>();
    s.max_tokens = j.value("max_tokens", kDefaultMaxTokens);
    const auto pooling = j.value("pooling", std::string("mean"));
    if (pooling == "mean") {
      s.pooling = Pooling::Mean;
    } else if (pooling == "first") {
      s.pooling = Pooling::First;
    } else {
      throw ValidationError("unknown pooling '" + pooling + "'");
    }
    if (s.kind == EncoderKind::Lightweight && j.contains("feature_dim") &&
        j["feature_dim"].get<std::size_t>() != LightweightEncoder::kFeatureDim) {
      throw ValidationError("encoder spec feature_dim does not match this build");
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("invalid encoder spec: ") + e.what());
  }
  s.validate();
  return s;
}

EncoderSpec EncoderSpec::parse_flag(std::string_view flag, std::size_t embedding_dim) {
  EncoderSpec s;
  if (flag == "lightweight") {
    s.kind = EncoderKind::Lightweight;
    s.embedding_dim = embedding_dim;
  } else if (flag.starts_with("registry:")) {
    s.kind = EncoderKind::Registry;
    s.registry_name = std::string(flag.substr(9));
    s.embedding_dim = 0;
  } else {
    throw ValidationError("--encoder must be 'lightweight' or 'registry:<name>', got '" +
                          std::string(flag) + "'");
  }
  s.validate();
  return s;
}

std::span<const ModelInfo> model_registry() { return kRegistry; }

const ModelInfo* find_model(std::string_view name) {
  for (const auto& m : kRegistry) {
    if (m.name == name) return &m;
  }
  return nullptr;
}

// ---------------------------------------------------------------------------
// LightweightEncoder

LightweightEncoder::LightweightEncoder(EncoderSpec spec, std::uint64_t seed) : spec_(std::move(spec)) {
  spec_.kind = EncoderKind::Lightweight;
  spec_.validate();
  params_.resize(kFeatureDim * spec_.embedding_dim);
  Rng rng(seed);
  for (auto& p : params_) p = standard_normal(rng);
}

kernels::SparseRow LightweightEncoder::features(std::string_view text) const {
  auto tokens = encoder_tokens(text);
  if (tokens.size() > spec_.max_tokens) tokens.resize(spec_.max_tokens);
  if (spec_.pooling == Pooling::First && tokens.size() > 1) tokens.resize(1);

  std::vector<std::pair<std::uint32_t, double>> entries;
  constexpr std::uint32_t kMask = static_cast<std::uint32_t>(kFeatureDim - 1);
  if (tokens.empty()) {
    entries.emplace_back(fnv1a32("<empty>", kHashSeed) & kMask, 1.0);
  }
  const double token_weight = tokens.empty() ? 0.0 : 1.0 / static_cast<double>(tokens.size());
  for (const auto& tok : tokens) {
    const std::string marked = "<" + tok + ">";
    std::size_t grams = 0;
    for (std::size_t n = kMinGram; n <= kMaxGram; ++n) {
      if (marked.size() >= n) grams += marked.size() - n + 1;
    }
    const double w = token_weight / static_cast<double>(grams);
    for (std::size_t n = kMinGram; n <= kMaxGram; ++n) {
      for (std::size_t i = 0; i + n <= marked.size(); ++i) {
        entries.emplace_back(fnv1a32(std::string_view(marked).substr(i, n), kHashSeed) & kMask, w);
      }
    }
  }
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  kernels::SparseRow row;
  for (const auto& [idx, v] : entries) {
    if (!row.index.empty() && row.index.back() == idx) {
      row.value.back() += v;
    } else {
      row.index.push_back(idx);
      row.value.push_back(v);
    }
  }
  return row;
}

ForwardPass LightweightEncoder::forward(std::span<const std::string> texts) const {
  auto state = std::make_unique<LightweightState>();
  state->rows.resize(texts.size());
  const auto n = static_cast<std::ptrdiff_t>(texts.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    state->rows[static_cast<std::size_t>(i)] = features(texts[static_cast<std::size_t>(i)]);
  }
  ForwardPass pass;
  kernels::omp::sparse_project(state->rows, params_, spec_.embedding_dim, pass.output);
  pass.state = std::move(state);
  return pass;
}

void LightweightEncoder::backward(const ForwardPass& pass, const Matrix& grad_output,
                                  std::span<double> grad) const {
  const auto* state = dynamic_cast<const LightweightState*>(pass.state.get());
  if (state == nullptr) throw ValidationError("forward pass was not produced by this encoder");
  if (grad.size() != params_.size()) throw ValidationError("gradient buffer has the wrong size");
  const std::size_t dim = spec_.embedding_dim;
  for (std::size_t i = 0; i < state->rows.size(); ++i) {
    const auto& row = state->rows[i];
    const double* g = grad_output.row(static_cast<Eigen::Index>(i)).data();
    for (std::size_t k = 0; k < row.index.size(); ++k) {
      double* dst = grad.data() + static_cast<std::size_t>(row.index[k]) * dim;
      const double v = row.value[k];
      for (std::size_t r = 0; r < dim; ++r) dst[r] += v * g[r];
    }
  }
}

std::unique_ptr<Encoder> LightweightEncoder::clone() const {
  return std::make_unique<LightweightEncoder>(*this);
}

void LightweightEncoder::save_parameters(const std::filesystem::path& dir) const {
  json header;
  header["dtype"] = "float32";
  header["byte_order"] = "little";
  header["layout"] = "row-major";
  header["shape"] = {kFeatureDim, spec_.embedding_dim};
  write_file(dir / "params.json", header.dump(2));
  std::string blob;
  blob.reserve(params_.size() * 4);
  for (double p : params_) put_f32_le(blob, static_cast<float>(p));
  write_file(dir / "params.bin", blob);
}

void LightweightEncoder::load_parameters(const std::filesystem::path& dir) {
  json header;
  try {
    header = json::parse(read_file(dir / "params.json"));
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed params.json: ") + e.what());
  }
  if (header.value("dtype", "") != "float32" || header.value("byte_order", "") != "little") {
    throw ValidationError("params.json: expected little-endian float32");
  }
  const auto shape = header.at("shape").get<std::vector<std::size_t>>();
  if (shape.size() != 2 || shape[0] != kFeatureDim || shape[1] != spec_.embedding_dim) {
    throw ValidationError("params.json: shape does not match encoder spec");
  }
  const std::string blob = read_file(dir / "params.bin");
  if (blob.size() != params_.size() * 4) throw ValidationError("params.bin: unexpected size");
  const auto* bytes = reinterpret_cast<const unsigned char*>(blob.data());
  for (std::size_t i = 0; i < params_.size(); ++i) params_[i] = get_f32_le(bytes + 4 * i);
}

// ---------------------------------------------------------------------------

void register_backend(const std::string& name, BackendFactory factory) {
  std::lock_guard lock(registry_mutex());
  backends()[name] = std::move(factory);
}

void unregister_backend(const std::string& name) {
  std::lock_guard lock(registry_mutex());
  backends().erase(name);
}

std::unique_ptr<Encoder> build_encoder(const EncoderSpec& spec, std::uint64_t seed) {
  spec.validate();
  if (spec.kind == EncoderKind::Lightweight) return std::make_unique<LightweightEncoder>(spec, seed);

  const ModelInfo* info = find_model(spec.registry_name);
  if (info == nullptr) {
    std::string names;
    for (const auto& m : kRegistry) names += (names.empty() ? "" : ", ") + m.name;
    throw ValidationError("unknown registry model '" + spec.registry_name + "'; known: " + names);
  }
  BackendFactory factory;
  {
    std::lock_guard lock(registry_mutex());
    auto it = backends().find(info->name);
    if (it == backends().end()) it = backends().find("*");
    if (it != backends().end()) factory = it->second;
  }
  if (!factory) {
    throw BackendUnavailable("backend unavailable for registry model '" + info->name +
                             "': no transformer backend is registered in this build");
  }
  EncoderSpec resolved = spec;
  if (resolved.embedding_dim == 0) resolved.embedding_dim = info->hidden_dim;
  auto inner = factory(resolved, *info, seed);
  if (!inner) throw BackendUnavailable("backend for '" + info->name + "' returned no encoder");
  return std::make_unique<RegistryAdapter>(resolved, *info, std::move(inner));
}

EmbeddingMatrix encode(const Encoder& encoder, std::span<const std::string> texts, bool normalize) {
  if (texts.empty()) throw ValidationError("encode: empty input sequence");
  EmbeddingMatrix out;
  out.values = encoder.forward(texts).output;
  if (normalize) {
    normalize_rows(out.values);
    out.normalized = true;
  }
  if (!out.values.allFinite()) throw NumericError("encoder produced non-finite embeddings");
  return out;
}

Vector normalize_rows(Matrix& u) {
  Vector norms(u.rows());
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    const double n = u.row(i).norm();
    norms(i) = n;
    if (n > 0.0) u.row(i) /= n;
  }
  return norms;
}

Matrix normalize_backward(const Matrix& z, const Vector& norms, const Matrix& grad_z) {
  Matrix g(z.rows(), z.cols());
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    if (norms(i) <= 0.0) {
      g.row(i).setZero();
      continue;
    }
    const double proj = z.row(i).dot(grad_z.row(i));
    g.row(i) = (grad_z.row(i) - proj * z.row(i)) / norms(i);
  }
  return g;
}

void save_encoder(const Encoder& encoder, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_file(dir / "encoder.json", encoder.spec().to_json());
  encoder.save_parameters(dir);
}

std::unique_ptr<Encoder> load_encoder(const std::filesystem::path& dir) {
  const auto spec = EncoderSpec::from_json(read_file(dir / "encoder.json"));
  auto enc = build_encoder(spec, 0);
  enc->load_parameters(dir);
  return enc;
}

}  // namespace claa
