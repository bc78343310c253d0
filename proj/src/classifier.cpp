#include "claa/classifier.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>

#include "claa/contrastive.hpp"
#include "claa/error.hpp"
#include "claa/metrics.hpp"
#include "claa/util.hpp"

namespace claa {

using nlohmann::json;

namespace {

constexpr std::uint64_t kHeadStream = 0x68656164ULL;
constexpr std::uint64_t kDropoutStream = 0x64726f70ULL;
constexpr const char* kBundleFormat = "claa-bundle/1";

double clamp_probability(double p) {
  return std::clamp(p, kProbabilityEpsilon, 1.0 - kProbabilityEpsilon);
}

void check_label(int y) {
  if (y != 0 && y != 1) throw ValidationError("y_true must be 0 or 1, got " + std::to_string(y));
}

std::string encoder_family(const EncoderSpec& spec) {
  return spec.kind == EncoderKind::Lightweight ? "lightweight" : "registry:" + spec.registry_name;
}

struct TrainedHead {
  ClassifierHead head;
  TrainingHistory history;
};

// Single learning rate, encoder updated in place.
TrainedHead fit_head(Encoder& encoder, const BinaryDataset& dataset, const TrainingConfig& config) {
  const auto started = std::chrono::steady_clock::now();
  const std::size_t dim = encoder.dim();
  const double bound = 1.0 / std::sqrt(static_cast<double>(dim));
  Rng init(sub_seed(config.seed, kHeadStream));
  // [weights..., bias]
  std::vector<double> head(dim + 1, 0.0);
  for (std::size_t r = 0; r < dim; ++r) head[r] = (2.0 * uniform_unit(init) - 1.0) * bound;

  TrainingHistory history;
  history.config = config;
  history.seed = config.seed;
  auto params = encoder.parameters();
  const bool update_encoder = !config.freeze_encoder && !params.empty();
  AdamW enc_opt(update_encoder ? params.size() : 0, adamw_config(config));
  AdamW head_opt(head.size(), adamw_config(config));
  std::vector<double> enc_grad(update_encoder ? params.size() : 0);
  std::vector<double> head_grad(head.size());
  const double keep = 1.0 - config.dropout;

  std::vector<std::size_t> order(dataset.items.size());
  std::uint64_t step = 0;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle_rng(sub_seed(config.seed, epoch));
    shuffle_in_place(order, shuffle_rng);
    double sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      ++step;
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      std::vector<std::string> texts;
      std::vector<int> labels;
      for (std::size_t k = start; k < end; ++k) {
        texts.push_back(dataset.items[order[k]].sentence.text);
        labels.push_back(dataset.items[order[k]].label);
      }
      auto pass = encoder.forward(texts);
      Matrix z = pass.output;
      const Vector norms = normalize_rows(z);
      const auto n = z.rows();
      Rng drop_rng(sub_seed(config.seed ^ kDropoutStream, step));
      Matrix mask = Matrix::Ones(n, z.cols());
      if (config.dropout > 0.0) {
        for (Eigen::Index i = 0; i < n; ++i) {
          for (Eigen::Index c = 0; c < z.cols(); ++c) {
            mask(i, c) = uniform_unit(drop_rng) < config.dropout ? 0.0 : 1.0 / keep;
          }
        }
      }
      const Matrix dropped = z.cwiseProduct(mask);
      std::fill(head_grad.begin(), head_grad.end(), 0.0);
      Matrix grad_z(n, z.cols());
      double loss = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        double logit = head[dim];
        for (std::size_t r = 0; r < dim; ++r) logit += head[r] * dropped(i, static_cast<Eigen::Index>(r));
        const double p = sigmoid(logit);
        const int y = labels[static_cast<std::size_t>(i)];
        loss += bce_loss(p, y);
        const double g = (p - y) / static_cast<double>(n);
        for (std::size_t r = 0; r < dim; ++r) {
          const auto c = static_cast<Eigen::Index>(r);
          head_grad[r] += g * dropped(i, c);
          grad_z(i, c) = g * head[r] * mask(i, c);
        }
        head_grad[dim] += g;
      }
      loss /= static_cast<double>(n);
      if (!std::isfinite(loss)) {
        throw NumericError("non-finite classification loss at epoch " + std::to_string(epoch + 1));
      }
      if (update_encoder) {
        const Matrix grad_u = normalize_backward(z, norms, grad_z);
        std::fill(enc_grad.begin(), enc_grad.end(), 0.0);
        encoder.backward(pass, grad_u, enc_grad);
        enc_opt.step(params, enc_grad);
      }
      head_opt.step(head, head_grad);
      sum += loss;
      ++batches;
    }
    history.epoch_loss.push_back(sum / static_cast<double>(std::max<std::size_t>(batches, 1)));
  }
  history.steps = head_opt.steps();
  history.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  TrainedHead out;
  out.head.weights.assign(head.begin(), head.begin() + static_cast<std::ptrdiff_t>(dim));
  out.head.bias = head[dim];
  out.head.dropout = config.dropout;
  out.history = std::move(history);
  return out;
}

json head_to_json(const AspectClassifier& c) {
  return json{{"aspect", aspect_name(c.aspect())},
              {"weights", c.head().weights},
              {"bias", c.head().bias},
              {"dropout", c.head().dropout},
              {"threshold", c.threshold()}};
}

json read_json(const std::filesystem::path& p) {
  try {
    return json::parse(read_file(p));
  } catch (const json::exception& e) {
    throw ValidationError("malformed JSON in " + p.string() + ": " + e.what());
  }
}

void write_aspect_dir(const AspectClassifier& c, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_file(dir / "head.json", head_to_json(c).dump(2));
  write_file(dir / "manifest.json", (c.manifest.is_null() ? json::object() : c.manifest).dump(2));
}

}  // namespace

// ---------------------------------------------------------------------------

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double bce_loss(double y_pred, int y_true) {
  check_label(y_true);
  const double p = clamp_probability(y_pred);
  return -(y_true * std::log(p) + (1 - y_true) * std::log(1.0 - p));
}

double bce_loss_grad(double y_pred, int y_true) {
  check_label(y_true);
  const double p = clamp_probability(y_pred);
  return -(y_true / p) + (1 - y_true) / (1.0 - p);
}

double bce_loss(std::span<const double> y_pred, std::span<const int> y_true) {
  if (y_pred.size() != y_true.size() || y_pred.empty()) {
    throw ValidationError("bce_loss: inputs must be aligned and non-empty");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < y_pred.size(); ++i) s += bce_loss(y_pred[i], y_true[i]);
  return s / static_cast<double>(y_pred.size());
}

AspectClassifier::AspectClassifier(Aspect aspect, std::shared_ptr<Encoder> encoder, ClassifierHead head,
                                   double threshold)
    : aspect_(aspect), encoder_(std::move(encoder)), head_(std::move(head)), threshold_(threshold) {
  if (!encoder_) throw ValidationError("classifier needs an encoder");
  if (head_.weights.size() != encoder_->dim()) {
    throw ValidationError("head width " + std::to_string(head_.weights.size()) +
                          " does not match encoder dim " + std::to_string(encoder_->dim()));
  }
}

std::vector<double> AspectClassifier::logits(std::span<const std::string> sentences) const {
  if (sentences.empty()) throw ValidationError("predict: empty input");
  const auto z = encode(*encoder_, sentences, true);
  const Eigen::Map<const Vector> w(head_.weights.data(), static_cast<Eigen::Index>(head_.weights.size()));
  const Vector l = z.values * w;
  std::vector<double> out(static_cast<std::size_t>(l.size()));
  for (Eigen::Index i = 0; i < l.size(); ++i) out[static_cast<std::size_t>(i)] = l(i) + head_.bias;
  return out;
}

std::vector<double> AspectClassifier::predict(std::span<const std::string> sentences) const {
  auto out = logits(sentences);
  for (auto& v : out) v = sigmoid(v);
  return out;
}

AspectClassifier train_classifier(std::unique_ptr<Encoder> encoder, const BinaryDataset& dataset,
                                  const TrainingConfig& config, ClassifierTraining* report) {
  config.validate();
  if (!encoder) throw ValidationError("train_classifier needs an encoder");
  if (dataset.positives() == 0 || dataset.negatives() == 0) {
    throw ValidationError("train_classifier: single-class dataset for aspect " +
                          std::string(aspect_name(dataset.aspect)) + " (" +
                          std::to_string(dataset.positives()) + " positives, " +
                          std::to_string(dataset.negatives()) + " negatives)");
  }
  ClassifierTraining local;
  ClassifierTraining& rep = report ? *report : local;
  TrainingConfig chosen = config;

  if (!config.lr_grid.empty()) {
    const auto plan = make_folds(dataset, 10, sub_seed(config.seed, 0x677269640ULL));
    const auto split = split_fold(dataset, plan, 0);
    std::vector<int> gold;
    std::vector<std::string> texts;
    for (const auto& it : split.test.items) {
      gold.push_back(it.label);
      texts.push_back(it.sentence.text);
    }
    double best = -1.0;
    for (double lr : config.lr_grid) {
      TrainingConfig trial = config;
      trial.learning_rate = lr;
      trial.lr_grid.clear();
      auto candidate = encoder->clone();
      auto fitted = fit_head(*candidate, split.train, trial);
      AspectClassifier probe(dataset.aspect, std::shared_ptr<Encoder>(std::move(candidate)), fitted.head);
      const auto probs = probe.predict(texts);
      std::vector<int> pred;
      for (double p : probs) pred.push_back(p >= kDefaultThreshold ? 1 : 0);
      const double f1 = weighted_prf(gold, pred).f1;
      rep.grid_scores.emplace_back(lr, f1);
      if (f1 > best) {
        best = f1;
        chosen.learning_rate = lr;
      }
    }
    chosen.lr_grid.clear();
  }

  auto fitted = fit_head(*encoder, dataset, chosen);
  rep.history = fitted.history;
  rep.learning_rate = chosen.learning_rate;
  AspectClassifier out(dataset.aspect, std::shared_ptr<Encoder>(std::move(encoder)), fitted.head);
  json grid = json::array();
  for (const auto& [lr, f1] : rep.grid_scores) grid.push_back({{"learning_rate", lr}, {"validation_f1", f1}});
  out.manifest = json{{"aspect", aspect_name(dataset.aspect)},
                      {"encoder", json::parse(out.encoder().spec().to_json())},
                      {"classifier", to_json(rep.history)},
                      {"selected_learning_rate", rep.learning_rate},
                      {"lr_grid_scores", grid},
                      {"train_items", dataset.size()},
                      {"train_positives", dataset.positives()}};
  return out;
}

AspectClassifier train_aspect_pipeline(const BinaryDataset& train, const PipelineOptions& options,
                                       std::uint64_t seed, PipelineResult* result,
                                       std::optional<std::size_t> augment_decision_count) {
  auto encoder = build_encoder(options.encoder, sub_seed(seed, 0));
  const BinaryDataset data =
      train.augmented ? train
                      : augment_minority_with_count(train, augment_decision_count.value_or(train.positives()),
                                                    options.augment_threshold);
  PipelineResult local;
  PipelineResult& res = result ? *result : local;
  if (options.with_contrastive) {
    TrainingConfig cfg = options.contrastive;
    cfg.seed = sub_seed(seed, 1);
    res.contrastive = train_contrastive(*encoder, data, cfg);
  }
  TrainingConfig cls = options.classifier;
  cls.seed = sub_seed(seed, 2);
  auto classifier = train_classifier(std::move(encoder), data, cls, &res.classifier);
  classifier.manifest["with_contrastive"] = options.with_contrastive;
  classifier.manifest["pipeline_seed"] = seed;
  classifier.manifest["augmented_duplicates"] = data.size() - train.size();
  classifier.manifest["augment_threshold"] = options.augment_threshold;
  classifier.manifest["contrastive"] = res.contrastive ? to_json(*res.contrastive) : json(nullptr);
  return classifier;
}

// ---------------------------------------------------------------------------

std::vector<std::string> SentenceLabels::names() const {
  if (aspects.empty()) return {std::string(kNoneMarker)};
  std::vector<std::string> out;
  for (auto a : aspects) out.emplace_back(aspect_name(a));
  return out;
}

void AspectModelBundle::set(AspectClassifier classifier) {
  const auto idx = aspect_index(classifier.aspect());
  if (encoder_family.empty()) encoder_family = claa::encoder_family(classifier.encoder().spec());
  classifiers_[idx].emplace(std::move(classifier));
}

const AspectClassifier* AspectModelBundle::find(Aspect aspect) const {
  const auto& slot = classifiers_[aspect_index(aspect)];
  return slot ? &*slot : nullptr;
}

const AspectClassifier& AspectModelBundle::at(Aspect aspect) const {
  if (const auto* c = find(aspect)) return *c;
  throw ValidationError("bundle has no classifier for " + std::string(aspect_name(aspect)));
}

bool AspectModelBundle::complete() const { return missing().empty(); }

std::vector<Aspect> AspectModelBundle::missing() const {
  std::vector<Aspect> out;
  for (auto a : kAllAspects) {
    if (!find(a)) out.push_back(a);
  }
  return out;
}

std::size_t AspectModelBundle::size() const { return kAspectCount - missing().size(); }

std::vector<SentenceLabels> label_sentences(const AspectModelBundle& bundle,
                                            std::span<const std::string> sentences,
                                            std::optional<double> threshold) {
  if (const auto miss = bundle.missing(); !miss.empty()) {
    std::string names;
    for (auto a : miss) names += (names.empty() ? "" : ", ") + std::string(aspect_name(a));
    throw ValidationError("incomplete bundle: missing " + names);
  }
  if (sentences.empty()) throw ValidationError("label_sentences: empty input");
  const double t = threshold.value_or(bundle.threshold);
  std::vector<SentenceLabels> out(sentences.size());
  for (auto a : kAllAspects) {
    const auto probs = bundle.at(a).predict(sentences);
    for (std::size_t i = 0; i < sentences.size(); ++i) {
      out[i].probabilities[aspect_index(a)] = probs[i];
      if (probs[i] >= t) out[i].aspects.push_back(a);
    }
  }
  return out;
}

SentenceLabels label_sentence(const AspectModelBundle& bundle, const std::string& sentence,
                              std::optional<double> threshold) {
  return label_sentences(bundle, std::span<const std::string>(&sentence, 1), threshold).front();
}

// ---------------------------------------------------------------------------

void save_bundle(const AspectModelBundle& bundle, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  json index{{"format", kBundleFormat},
             {"threshold", bundle.threshold},
             {"encoder_family", bundle.encoder_family},
             {"aspects", json::array()}};
  std::map<const Encoder*, std::string> saved;
  for (auto a : kAllAspects) {
    const auto* c = bundle.find(a);
    if (!c) continue;
    const std::string name(aspect_name(a));
    auto [it, fresh] = saved.emplace(&c->encoder(), "encoders/" + name);
    if (fresh) save_encoder(c->encoder(), dir / it->second);
    write_aspect_dir(*c, dir / name);
    index["aspects"].push_back({{"name", name}, {"dir", name}, {"encoder", it->second}});
  }
  write_file(dir / "bundle.json", index.dump(2));
}

void save_aspect_into_bundle(const AspectClassifier& classifier, const std::filesystem::path& dir) {
  json index;
  if (std::filesystem::exists(dir / "bundle.json")) {
    index = read_json(dir / "bundle.json");
  } else {
    index = json{{"format", kBundleFormat},
                 {"threshold", kDefaultThreshold},
                 {"encoder_family", encoder_family(classifier.encoder().spec())},
                 {"aspects", json::array()}};
  }
  const std::string name(aspect_name(classifier.aspect()));
  const std::string enc_dir = "encoders/" + name;
  save_encoder(classifier.encoder(), dir / enc_dir);
  write_aspect_dir(classifier, dir / name);
  json aspects = json::array();
  for (auto a : kAllAspects) {
    if (a == classifier.aspect()) {
      aspects.push_back({{"name", name}, {"dir", name}, {"encoder", enc_dir}});
      continue;
    }
    for (const auto& e : index["aspects"]) {
      if (e.value("name", "") == aspect_name(a)) aspects.push_back(e);
    }
  }
  index["aspects"] = std::move(aspects);
  write_file(dir / "bundle.json", index.dump(2));
}

AspectModelBundle load_bundle(const std::filesystem::path& dir) {
  if (!std::filesystem::exists(dir / "bundle.json")) {
    throw IoError("bundle not found: " + (dir / "bundle.json").string());
  }
  const json index = read_json(dir / "bundle.json");
  if (index.value("format", "") != kBundleFormat) {
    throw ValidationError("unsupported bundle format in " + dir.string());
  }
  AspectModelBundle bundle;
  bundle.threshold = index.value("threshold", kDefaultThreshold);
  bundle.encoder_family = index.value("encoder_family", "");
  std::map<std::string, std::shared_ptr<Encoder>> encoders;
  try {
    for (const auto& e : index.at("aspects")) {
      const Aspect aspect = require_aspect(e.at("name").get<std::string>());
      const auto enc_rel = e.at("encoder").get<std::string>();
      auto& enc = encoders[enc_rel];
      if (!enc) enc = std::shared_ptr<Encoder>(load_encoder(dir / enc_rel));
      const auto aspect_dir = dir / e.at("dir").get<std::string>();
      const json h = read_json(aspect_dir / "head.json");
      ClassifierHead head;
      head.weights = h.at("weights").get<std::vector<double>>();
      head.bias = h.at("bias").get<double>();
      head.dropout = h.value("dropout", 0.1);
      AspectClassifier c(aspect, enc, std::move(head), h.value("threshold", kDefaultThreshold));
      if (std::filesystem::exists(aspect_dir / "manifest.json")) c.manifest = read_json(aspect_dir / "manifest.json");
      bundle.set(std::move(c));
    }
  } catch (const json::exception& e) {
    throw ValidationError("invalid bundle index in " + dir.string() + ": " + e.what());
  }
  return bundle;
}

AspectModelBundle train_bundle(const Corpus& corpus, const PipelineOptions& options, std::uint64_t seed) {
  AspectModelBundle bundle;
  for (auto a : kAllAspects) {
    const auto task = derive_binary_task(corpus, a);
    bundle.set(train_aspect_pipeline(task, options, sub_seed(seed, aspect_index(a))));
  }
  return bundle;
}

}  // namespace claa
