// claa: command-line front end for every pipeline stage.

#include <csignal>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "claa/aspect.hpp"
#include "claa/classifier.hpp"
#include "claa/contrastive.hpp"
#include "claa/corpus.hpp"
#include "claa/encoder.hpp"
#include "claa/error.hpp"
#include "claa/evaluation.hpp"
#include "claa/explain.hpp"
#include "claa/ingest.hpp"
#include "claa/log.hpp"
#include "claa/manifest.hpp"
#include "claa/projection.hpp"
#include "claa/service.hpp"
#include "claa/util.hpp"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr int kUsageExit = 2;
constexpr int kDomainExit = 1;

// Desk-scale learning rate for the hashed encoder; registry checkpoints
// use the fine-tuning default.
constexpr double kLightweightLr = 2e-2;
constexpr double kRegistryLr = 5e-5;

struct Options {
  std::string data, input, output, out_dir, bundle, bundle_b, name_a = "A", name_b = "B";
  std::string aspect;
  std::string loss = "ntxent";
  double temperature = 0.1;
  double margin = 1.0;
  std::size_t epochs = 5;
  std::size_t batch_size = 32;
  std::optional<double> lr;
  std::size_t ctr_epochs = 5;
  std::optional<double> ctr_lr;
  std::vector<double> lr_grid;
  std::size_t folds = 10;
  std::uint64_t seed = 0;
  int port = 8080;
  std::string host = "127.0.0.1";
  std::optional<double> threshold;
  std::string encoder = "lightweight";
  std::size_t embedding_dim = 32;
  std::size_t max_tokens = claa::kDefaultMaxTokens;
  std::string from_encoder;
  bool contrastive = true;
  bool freeze = false;
  std::vector<std::string> texts;
  std::string text_file;
  std::string preds_a, preds_b;
  std::size_t resamples = claa::kDefaultResamples;
  std::size_t samples = 1000;
  std::size_t features = 10;
  std::string html;
  std::string dump;
  std::vector<std::string> tags;
  bool keep_block_code = false;
  std::size_t min_length = 3;
  std::string method = "pca";
  double perplexity = 30.0;
  std::size_t iterations = 1000;
  std::string request;
};

claa::EncoderSpec encoder_spec(const Options& o) {
  auto spec = claa::EncoderSpec::parse_flag(o.encoder, o.embedding_dim);
  spec.max_tokens = o.max_tokens;
  spec.validate();
  return spec;
}

double default_lr(const Options& o) {
  return encoder_spec(o).kind == claa::EncoderKind::Lightweight ? kLightweightLr : kRegistryLr;
}

claa::TrainingConfig contrastive_config(const Options& o, std::size_t epochs, std::optional<double> lr) {
  claa::TrainingConfig c;
  c.objective = claa::parse_objective(o.loss);
  c.temperature = o.temperature;
  c.margin = o.margin;
  c.epochs = epochs;
  c.batch_size = o.batch_size;
  c.learning_rate = lr.value_or(default_lr(o));
  c.max_tokens = o.max_tokens;
  c.seed = o.seed;
  c.validate();
  return c;
}

claa::TrainingConfig classifier_config(const Options& o) {
  auto c = contrastive_config(o, o.epochs, o.lr);
  c.freeze_encoder = o.freeze;
  c.lr_grid = o.lr_grid;
  c.validate();
  return c;
}

claa::PipelineOptions pipeline_options(const Options& o) {
  claa::PipelineOptions p;
  p.encoder = encoder_spec(o);
  p.contrastive = contrastive_config(o, o.ctr_epochs, o.ctr_lr);
  p.classifier = classifier_config(o);
  p.with_contrastive = o.contrastive;
  return p;
}

json pipeline_json(const claa::PipelineOptions& p) {
  return {{"encoder", json::parse(p.encoder.to_json())},
          {"contrastive", claa::to_json(p.contrastive)},
          {"classifier", claa::to_json(p.classifier)},
          {"with_contrastive", p.with_contrastive},
          {"augment_threshold", p.augment_threshold}};
}

std::vector<claa::Aspect> selected_aspects(const Options& o) {
  if (o.aspect.empty() || claa::to_lower_ascii(o.aspect) == "all") {
    return {claa::kAllAspects.begin(), claa::kAllAspects.end()};
  }
  return {claa::require_aspect(o.aspect)};
}

fs::path out_dir(const Options& o, const std::string& fallback) {
  return o.out_dir.empty() ? claa::data_dir() / fallback : fs::path(o.out_dir);
}

void emit(const json& j) { std::cout << j.dump(2) << '\n'; }

claa::RunManifest manifest(std::string command) {
  claa::RunManifest m;
  m.command = std::move(command);
  return m;
}

void finish(const claa::RunManifest& m) {
  const auto path = claa::write_manifest(m);
  std::cerr << "manifest: " << path.string() << "\n";
}

std::vector<std::string> input_texts(const Options& o) {
  std::vector<std::string> out = o.texts;
  if (!o.text_file.empty()) {
    std::istringstream in(claa::read_file(o.text_file));
    std::string line;
    while (std::getline(in, line)) {
      if (!claa::trim(line).empty()) out.push_back(line);
    }
  }
  if (out.empty()) throw claa::ValidationError("no input sentences (use --text or --input-file)");
  return out;
}

// ---------------------------------------------------------------------------

int cmd_convert(const Options& o) {
  std::ifstream in(o.input, std::ios::binary);
  if (!in) throw claa::IoError("cannot read " + o.input);
  const auto corpus = claa::convert_csv(in);
  claa::write_corpus(corpus, o.output);
  auto m = manifest("convert");
  m.inputs["csv"] = claa::file_fingerprint(o.input);
  m.outputs["corpus"] = claa::file_fingerprint(o.output);
  finish(m);
  emit({{"sentences", corpus.size()}, {"output", o.output}});
  return 0;
}

int cmd_train_contrastive(const Options& o) {
  const auto corpus = claa::load_benchmark(o.data);
  const auto aspect = claa::require_aspect(o.aspect);
  const auto task = claa::augment_minority(claa::derive_binary_task(corpus, aspect));
  const auto cfg = contrastive_config(o, o.epochs, o.lr);
  auto encoder = claa::build_encoder(encoder_spec(o), claa::sub_seed(o.seed, 0));
  const auto history = claa::train_contrastive(*encoder, task, cfg);
  const fs::path dir = out_dir(o, "encoders/" + std::string(claa::aspect_name(aspect)));
  claa::save_encoder(*encoder, dir);
  const json hist = claa::to_json(history);
  claa::write_file(dir / "history.json", hist.dump(2) + "\n");
  auto m = manifest("train-contrastive");
  m.config = {{"aspect", claa::aspect_name(aspect)}, {"training", claa::to_json(cfg)},
              {"encoder", json::parse(encoder_spec(o).to_json())}};
  m.seeds = {{"seed", o.seed}};
  m.inputs["data"] = claa::file_fingerprint(o.data);
  m.outputs["encoder"] = claa::path_fingerprint(dir);
  finish(m);
  emit({{"encoder_dir", dir.string()}, {"history", hist}});
  return 0;
}

int cmd_train_classifier(const Options& o) {
  const auto corpus = claa::load_benchmark(o.data);
  const auto opts = pipeline_options(o);
  const fs::path bundle = o.bundle.empty() ? claa::data_dir() / "bundle" : fs::path(o.bundle);
  json trained = json::array();
  for (auto aspect : selected_aspects(o)) {
    const auto task = claa::derive_binary_task(corpus, aspect);
    const std::uint64_t seed = claa::sub_seed(o.seed, claa::aspect_index(aspect));
    if (!o.from_encoder.empty()) {
      // Stage 2 on top of a saved stage-1 encoder.
      auto encoder = claa::load_encoder(o.from_encoder);
      auto cfg = opts.classifier;
      cfg.seed = claa::sub_seed(seed, 2);
      claa::ClassifierTraining rep;
      auto c = claa::train_classifier(std::move(encoder), claa::augment_minority(task, opts.augment_threshold), cfg, &rep);
      c.manifest["from_encoder"] = claa::path_fingerprint(o.from_encoder);
      claa::save_aspect_into_bundle(c, bundle);
      trained.push_back({{"aspect", claa::aspect_name(aspect)}, {"classifier", claa::to_json(rep.history)}});
      continue;
    }
    claa::PipelineResult res;
    const auto c = claa::train_aspect_pipeline(task, opts, seed, &res);
    claa::save_aspect_into_bundle(c, bundle);
    trained.push_back({{"aspect", claa::aspect_name(aspect)},
                       {"contrastive", res.contrastive ? claa::to_json(*res.contrastive) : json(nullptr)},
                       {"classifier", claa::to_json(res.classifier.history)},
                       {"learning_rate", res.classifier.learning_rate}});
  }
  auto m = manifest("train-classifier");
  m.config = pipeline_json(opts);
  m.config["aspects"] = o.aspect.empty() ? "all" : o.aspect;
  m.seeds = {{"seed", o.seed}};
  m.inputs["data"] = claa::file_fingerprint(o.data);
  if (!o.from_encoder.empty()) m.inputs["encoder"] = claa::path_fingerprint(o.from_encoder);
  m.outputs["bundle"] = claa::path_fingerprint(bundle);
  finish(m);
  emit({{"bundle", bundle.string()}, {"trained", trained}});
  return 0;
}

int cmd_evaluate(const Options& o) {
  const auto corpus = claa::load_benchmark(o.data);
  const auto opts = pipeline_options(o);
  const auto dir = out_dir(o, "reports");
  std::vector<claa::CVReport> reports;
  auto m = manifest("evaluate");
  for (auto aspect : selected_aspects(o)) {
    auto r = claa::cross_validate(corpus, aspect, opts, o.contrastive, o.folds, o.seed);
    const std::string base = "cv-" + std::string(claa::aspect_name(aspect)) + (o.contrastive ? "-claa" : "-baseline");
    claa::write_file(dir / (base + ".json"), claa::to_json(r).dump(2) + "\n");
    claa::write_file(dir / (base + "-predictions.jsonl"), claa::predictions_jsonl(r));
    m.outputs[base + ".json"] = claa::file_fingerprint(dir / (base + ".json"));
    reports.push_back(std::move(r));
  }
  const std::string tag = o.contrastive ? "claa" : "baseline";
  claa::write_file(dir / ("cv-" + tag + ".csv"), claa::cv_reports_csv(reports));
  json out = {{"reports", json::array()}};
  for (const auto& r : reports) {
    out["reports"].push_back(
        {{"aspect", claa::aspect_name(r.aspect)}, {"summary", claa::to_json(r)["summary"]}, {"notes", r.notes}});
  }
  if (reports.size() > 1) {
    const auto agg = claa::to_json(claa::aggregate_reports(reports));
    claa::write_file(dir / ("aggregate-" + tag + ".json"), agg.dump(2) + "\n");
    out["aggregate"] = agg;
  }
  out["output_dir"] = dir.string();
  m.config = pipeline_json(opts);
  m.config["folds"] = o.folds;
  m.config["aspects"] = o.aspect.empty() ? "all" : o.aspect;
  m.seeds = {{"seed", o.seed}};
  m.inputs["data"] = claa::file_fingerprint(o.data);
  finish(m);
  emit(out);
  return 0;
}

// Aligns two held-out prediction files by id.
struct Aligned {
  std::vector<std::string> ids, texts;
  std::vector<int> gold, a, b;
};

Aligned align_predictions(const Options& o) {
  const auto pa = claa::read_predictions(o.preds_a);
  const auto pb = claa::read_predictions(o.preds_b);
  std::map<std::string, const claa::HeldOutPrediction*> by_id;
  for (const auto& p : pb) by_id[p.id] = &p;
  if (pa.size() != pb.size()) {
    throw claa::ValidationError("prediction files differ in length: " + std::to_string(pa.size()) + " vs " +
                                std::to_string(pb.size()));
  }
  Aligned out;
  for (const auto& p : pa) {
    const auto it = by_id.find(p.id);
    if (it == by_id.end()) throw claa::ValidationError("id " + p.id + " missing from " + o.preds_b);
    if (it->second->gold != p.gold) throw claa::ValidationError("gold label mismatch for id " + p.id);
    out.ids.push_back(p.id);
    out.texts.push_back(p.text);
    out.gold.push_back(p.gold);
    out.a.push_back(p.pred);
    out.b.push_back(it->second->pred);
  }
  return out;
}

int cmd_bootstrap(const Options& o) {
  const auto al = align_predictions(o);
  const auto r = claa::paired_bootstrap(al.gold, al.a, al.b, o.resamples, o.seed);
  const json j = claa::to_json(r);
  if (!o.output.empty()) claa::write_file(o.output, j.dump(2) + "\n");
  auto m = manifest("bootstrap");
  m.config = {{"n_resamples", o.resamples}};
  m.seeds = {{"seed", o.seed}};
  m.inputs = {{"A", claa::file_fingerprint(o.preds_a)}, {"B", claa::file_fingerprint(o.preds_b)}};
  if (!o.output.empty()) m.outputs["report"] = claa::file_fingerprint(o.output);
  finish(m);
  emit(j);
  return 0;
}

int cmd_cross_correct(const Options& o) {
  const auto al = align_predictions(o);
  auto r = claa::cross_correction(al.gold, al.a, al.b, al.ids, al.texts);
  if (!o.aspect.empty()) r.aspect = claa::require_aspect(o.aspect);
  const auto dir = out_dir(o, "reports");
  const json j = claa::to_json(r);
  claa::write_file(dir / "correction.json", j.dump(2) + "\n");
  claa::write_file(dir / "correction.csv", claa::correction_csv(std::span(&r, 1)));
  claa::write_file(dir / "disagreements.jsonl", claa::disagreements_jsonl(r));
  auto m = manifest("cross-correct");
  m.inputs = {{"A", claa::file_fingerprint(o.preds_a)}, {"B", claa::file_fingerprint(o.preds_b)}};
  m.outputs["report"] = claa::file_fingerprint(dir / "correction.json");
  m.outputs["disagreements"] = claa::file_fingerprint(dir / "disagreements.jsonl");
  finish(m);
  emit(j);
  return 0;
}

claa::ExplainConfig explain_config(const Options& o) {
  claa::ExplainConfig c;
  c.n_samples = o.samples;
  c.max_features = o.features;
  c.seed = o.seed;
  return c;
}

int cmd_explain(const Options& o) {
  const auto bundle = claa::load_bundle(o.bundle);
  const auto aspect = claa::require_aspect(o.aspect);
  const auto texts = input_texts(o);
  json out = claa::explain_response(bundle, texts.front(), aspect, explain_config(o));
  if (!o.html.empty()) claa::write_file(o.html, out["html"].get<std::string>() + "\n");
  auto m = manifest("explain");
  m.config = {{"aspect", claa::aspect_name(aspect)}, {"n_samples", o.samples}, {"max_features", o.features},
              {"sentence", texts.front()}};
  m.seeds = {{"seed", o.seed}};
  m.inputs["bundle"] = claa::path_fingerprint(o.bundle);
  m.outputs["explanation"] = claa::text_fingerprint(out.dump());
  finish(m);
  emit(out);
  return 0;
}

int cmd_ingest(const Options& o) {
  claa::IngestOptions opts;
  for (const auto& t : o.tags) opts.tags.insert(t);
  opts.strip.drop_block_code = !o.keep_block_code;
  opts.min_length = o.min_length;
  const auto result = claa::ingest_dump(o.dump, opts);
  const fs::path out = o.output.empty() ? claa::data_dir() / "sentences.jsonl" : fs::path(o.output);
  claa::write_corpus(result.corpus, out);
  const json stats = claa::to_json(result.stats);
  fs::path stats_path = out;
  stats_path.replace_extension(".stats.json");
  claa::write_file(stats_path, stats.dump(2) + "\n");
  auto m = manifest("ingest");
  m.config = {{"tags", o.tags}, {"drop_block_code", opts.strip.drop_block_code}, {"min_length", o.min_length}};
  m.inputs["dump"] = claa::path_fingerprint(o.dump);
  m.outputs["sentences"] = claa::file_fingerprint(out);
  finish(m);
  emit({{"output", out.string()}, {"stats", stats}});
  return 0;
}

int cmd_distribution(const Options& o) {
  const auto corpus = claa::load_benchmark(o.data);
  const auto a = claa::load_bundle(o.bundle);
  std::optional<claa::AspectModelBundle> b;
  std::vector<std::pair<std::string, const claa::AspectModelBundle*>> systems{{o.name_a, &a}};
  if (!o.bundle_b.empty()) {
    b = claa::load_bundle(o.bundle_b);
    systems.emplace_back(o.name_b, &*b);
  }
  const auto report = claa::aspect_distribution(systems, corpus, o.threshold);
  const json j = claa::to_json(report);
  const auto dir = out_dir(o, "reports");
  claa::write_file(dir / "distribution.json", j.dump(2) + "\n");
  claa::write_file(dir / "distribution.csv", claa::distribution_csv(report));
  auto m = manifest("distribution");
  m.config = {{"threshold", o.threshold ? json(*o.threshold) : json(nullptr)}, {"names", {o.name_a, o.name_b}}};
  m.inputs["data"] = claa::file_fingerprint(o.data);
  m.inputs["bundle_a"] = claa::path_fingerprint(o.bundle);
  if (!o.bundle_b.empty()) m.inputs["bundle_b"] = claa::path_fingerprint(o.bundle_b);
  m.outputs["report"] = claa::file_fingerprint(dir / "distribution.json");
  finish(m);
  emit(j);
  return 0;
}

int cmd_project(const Options& o) {
  const auto corpus = claa::load_benchmark(o.data);
  const auto aspect = claa::require_aspect(o.aspect);
  const auto task = claa::derive_binary_task(corpus, aspect);
  std::unique_ptr<claa::Encoder> owned;
  std::optional<claa::AspectModelBundle> bundle;
  const claa::Encoder* encoder = nullptr;
  if (!o.from_encoder.empty()) {
    owned = claa::load_encoder(o.from_encoder);
    encoder = owned.get();
  } else if (!o.bundle.empty()) {
    bundle = claa::load_bundle(o.bundle);
    encoder = &bundle->at(aspect).encoder();
  } else {
    owned = claa::build_encoder(encoder_spec(o), claa::sub_seed(o.seed, 0));
    encoder = owned.get();
  }
  std::vector<std::string> texts;
  std::vector<int> labels;
  for (const auto& it : task.items) {
    texts.push_back(it.sentence.text);
    labels.push_back(it.label);
  }
  const auto emb = claa::encode(*encoder, texts, true);
  claa::ProjectionParams params;
  params.perplexity = o.perplexity;
  params.iterations = o.iterations;
  params.seed = o.seed;
  const auto points = claa::project_2d(emb, labels, claa::parse_method(o.method), params);
  const fs::path out = o.output.empty() ? claa::data_dir() / "points.tsv" : fs::path(o.output);
  claa::export_points(points, out);
  const double silhouette = claa::silhouette_score(points.points, labels);
  auto m = manifest("project");
  m.config = {{"aspect", claa::aspect_name(aspect)}, {"method", o.method}, {"params", claa::to_json(params)}};
  m.seeds = {{"seed", o.seed}};
  m.inputs["data"] = claa::file_fingerprint(o.data);
  if (!o.from_encoder.empty()) m.inputs["encoder"] = claa::path_fingerprint(o.from_encoder);
  if (!o.bundle.empty()) m.inputs["bundle"] = claa::path_fingerprint(o.bundle);
  m.outputs["points"] = claa::file_fingerprint(out);
  finish(m);
  emit({{"output", out.string()},
        {"points", texts.size()},
        {"method", o.method},
        {"effective_perplexity", points.effective_perplexity},
        {"silhouette", silhouette}});
  return 0;
}

claa::Service* g_service = nullptr;

void on_signal(int) {
  if (g_service) g_service->stop();
}

int cmd_serve(const Options& o) {
  claa::ServiceConfig cfg;
  cfg.threshold = o.threshold;
  claa::Service service(cfg);
  if (!o.bundle.empty()) service.load_bundle(o.bundle);
  const int port = service.bind(o.host, o.port);
  auto m = manifest("serve");
  m.config = {{"host", o.host}, {"port", o.port}};
  if (!o.bundle.empty()) m.inputs["bundle"] = claa::path_fingerprint(o.bundle);
  finish(m);
  std::cout << "listening on " << o.host << ':' << port << std::endl;
  g_service = &service;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  service.run();
  g_service = nullptr;
  return 0;
}

int cmd_predict(const Options& o) {
  const auto bundle = claa::load_bundle(o.bundle);
  const auto texts = input_texts(o);
  const json out = claa::predict_response(bundle, texts, o.threshold);
  auto m = manifest("predict");
  m.config = {{"threshold", o.threshold ? json(*o.threshold) : json(nullptr)}};
  m.inputs["bundle"] = claa::path_fingerprint(o.bundle);
  m.inputs["sentences"] = claa::text_fingerprint(json(texts).dump());
  m.outputs["response"] = claa::text_fingerprint(out.dump());
  finish(m);
  emit(out);
  return 0;
}

int cmd_compare(const Options& o) {
  const auto bundle = claa::load_bundle(o.bundle);
  const auto body = claa::read_file(o.request);
  claa::ServiceConfig cfg;
  cfg.threshold = o.threshold;
  const auto r = claa::handle_compare(body, &bundle, cfg);
  if (r.status != 200) throw claa::ValidationError(r.body.value("error", "invalid compare request"));
  auto m = manifest("compare");
  m.inputs["bundle"] = claa::path_fingerprint(o.bundle);
  m.inputs["request"] = claa::file_fingerprint(o.request);
  m.outputs["response"] = claa::text_fingerprint(r.body.dump());
  finish(m);
  emit(r.body);
  return 0;
}

// ---------------------------------------------------------------------------

void add_training_flags(CLI::App* c, Options& o) {
  c->add_option("--encoder", o.encoder, "lightweight or registry:<name>")->capture_default_str();
  c->add_option("--embedding-dim", o.embedding_dim, "Lightweight encoder width")->capture_default_str();
  c->add_option("--max-tokens", o.max_tokens, "Truncation length")->capture_default_str();
  c->add_option("--loss", o.loss, "ntxent, triplet or pairwise")
      ->check(CLI::IsMember({"ntxent", "triplet", "pairwise"}))
      ->capture_default_str();
  c->add_option("--temperature", o.temperature, "NT-Xent temperature")->capture_default_str();
  c->add_option("--margin", o.margin, "Triplet / pairwise margin")->capture_default_str();
  c->add_option("--epochs", o.epochs, "Epochs")->capture_default_str();
  c->add_option("--batch-size", o.batch_size, "Batch size")->capture_default_str();
  c->add_option("--lr", o.lr, "Learning rate (default 2e-2 lightweight, 5e-5 registry)");
  c->add_option("--seed", o.seed, "Seed")->capture_default_str();
}

void add_pipeline_flags(CLI::App* c, Options& o) {
  add_training_flags(c, o);
  c->add_flag("--contrastive,!--no-contrastive", o.contrastive, "Run the contrastive stage first")
      ->capture_default_str();
  c->add_option("--contrastive-epochs", o.ctr_epochs, "Contrastive-stage epochs")->capture_default_str();
  c->add_option("--contrastive-lr", o.ctr_lr, "Contrastive-stage learning rate");
  c->add_option("--lr-grid", o.lr_grid, "Classifier learning-rate candidates")->delimiter(',');
  c->add_flag("--freeze-encoder", o.freeze, "Train only the classification head");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Aspect detection for API review sentences"};
  app.require_subcommand(1, 1);
  Options o;

  auto* convert = app.add_subcommand("convert", "Two-column CSV to a dataset file");
  convert->add_option("--input", o.input, "CSV file")->required();
  convert->add_option("--output", o.output, "JSONL dataset")->required();

  auto* tc = app.add_subcommand("train-contrastive", "Contrastive stage for one aspect");
  tc->add_option("--data", o.data, "Dataset file")->required();
  tc->add_option("--aspect", o.aspect, "Aspect")->required();
  tc->add_option("--out", o.out_dir, "Encoder output directory");
  add_training_flags(tc, o);

  auto* tcl = app.add_subcommand("train-classifier", "Train aspect classifiers into a bundle");
  tcl->add_option("--data", o.data, "Dataset file")->required();
  tcl->add_option("--aspect", o.aspect, "Aspect (default: all)");
  tcl->add_option("--bundle", o.bundle, "Bundle directory");
  tcl->add_option("--from-encoder", o.from_encoder, "Start from a saved contrastive-stage encoder");
  add_pipeline_flags(tcl, o);

  auto* ev = app.add_subcommand("evaluate", "k-fold cross validation");
  ev->add_option("--data", o.data, "Dataset file")->required();
  ev->add_option("--aspect", o.aspect, "Aspect (default: all)");
  ev->add_option("--folds", o.folds, "Folds")->capture_default_str();
  ev->add_option("--out", o.out_dir, "Report directory");
  add_pipeline_flags(ev, o);

  auto* bs = app.add_subcommand("bootstrap", "Paired bootstrap over two prediction files");
  bs->add_option("--a", o.preds_a, "Predictions of system A")->required();
  bs->add_option("--b", o.preds_b, "Predictions of system B")->required();
  bs->add_option("--resamples", o.resamples, "Resamples")->capture_default_str();
  bs->add_option("--seed", o.seed, "Seed")->capture_default_str();
  bs->add_option("--output", o.output, "Report file");

  auto* cc = app.add_subcommand("cross-correct", "Cross-correction report of two prediction files");
  cc->add_option("--a", o.preds_a, "Predictions of system A")->required();
  cc->add_option("--b", o.preds_b, "Predictions of system B")->required();
  cc->add_option("--aspect", o.aspect, "Aspect label for the report");
  cc->add_option("--out", o.out_dir, "Report directory");

  auto* ex = app.add_subcommand("explain", "Token importances for one sentence");
  ex->add_option("--bundle", o.bundle, "Bundle directory")->required();
  ex->add_option("--aspect", o.aspect, "Aspect")->required();
  ex->add_option("--text", o.texts, "Sentence")->required();
  ex->add_option("--samples", o.samples, "Perturbed samples")->capture_default_str();
  ex->add_option("--features", o.features, "Max features")->capture_default_str();
  ex->add_option("--seed", o.seed, "Seed")->capture_default_str();
  ex->add_option("--html", o.html, "Write highlighted HTML here");

  auto* in = app.add_subcommand("ingest", "Stack Exchange dump to sentences");
  in->add_option("--dump", o.dump, "Dump directory or Posts.xml")->required();
  in->add_option("--tags", o.tags, "Tags to keep")->delimiter(',')->required();
  in->add_option("--output", o.output, "Sentence file");
  in->add_flag("--keep-block-code", o.keep_block_code, "Keep <pre> blocks");
  in->add_option("--min-length", o.min_length, "Minimum sentence length")->capture_default_str();

  auto* di = app.add_subcommand("distribution", "Aspect distribution of a sentence file");
  di->add_option("--bundle", o.bundle, "Bundle directory")->required();
  di->add_option("--bundle-b", o.bundle_b, "Second bundle");
  di->add_option("--name", o.name_a, "Column name of the first bundle")->capture_default_str();
  di->add_option("--name-b", o.name_b, "Column name of the second bundle")->capture_default_str();
  di->add_option("--data", o.data, "Sentence file")->required();
  di->add_option("--threshold", o.threshold, "Decision threshold");
  di->add_option("--out", o.out_dir, "Report directory");

  auto* pr = app.add_subcommand("project", "2-D projection of sentence embeddings");
  pr->add_option("--data", o.data, "Dataset file")->required();
  pr->add_option("--aspect", o.aspect, "Aspect")->required();
  pr->add_option("--method", o.method, "tsne or pca")->check(CLI::IsMember({"tsne", "pca"}))->capture_default_str();
  pr->add_option("--perplexity", o.perplexity, "t-SNE perplexity")->capture_default_str();
  pr->add_option("--iterations", o.iterations, "t-SNE iterations")->capture_default_str();
  pr->add_option("--from-encoder", o.from_encoder, "Encoder directory");
  pr->add_option("--bundle", o.bundle, "Use this bundle's encoder for the aspect");
  pr->add_option("--encoder", o.encoder, "Fresh encoder when no directory is given")->capture_default_str();
  pr->add_option("--seed", o.seed, "Seed")->capture_default_str();
  pr->add_option("--output", o.output, "TSV file");

  auto* sv = app.add_subcommand("serve", "HTTP inference service");
  sv->add_option("--bundle", o.bundle, "Bundle directory");
  sv->add_option("--port", o.port, "Port (0 = any free port)")->capture_default_str();
  sv->add_option("--host", o.host, "Bind address")->capture_default_str();
  sv->add_option("--threshold", o.threshold, "Decision threshold");

  auto* pd = app.add_subcommand("predict", "Label sentences with a bundle");
  pd->add_option("--bundle", o.bundle, "Bundle directory")->required();
  pd->add_option("--text", o.texts, "Sentence (repeatable)");
  pd->add_option("--input-file", o.text_file, "One sentence per line");
  pd->add_option("--threshold", o.threshold, "Decision threshold");

  auto* cp = app.add_subcommand("compare", "Aspect comparison of two APIs");
  cp->add_option("--bundle", o.bundle, "Bundle directory")->required();
  cp->add_option("--request", o.request, "Compare request JSON file")->required();
  cp->add_option("--threshold", o.threshold, "Decision threshold");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    if (argc <= 1) std::cerr << app.help();
    return kUsageExit;
  }

  const std::map<CLI::App*, int (*)(const Options&)> handlers{
      {convert, cmd_convert}, {tc, cmd_train_contrastive}, {tcl, cmd_train_classifier}, {ev, cmd_evaluate},
      {bs, cmd_bootstrap},    {cc, cmd_cross_correct},     {ex, cmd_explain},          {in, cmd_ingest},
      {di, cmd_distribution}, {pr, cmd_project},           {sv, cmd_serve},            {pd, cmd_predict},
      {cp, cmd_compare}};
  try {
    for (const auto& [sub, fn] : handlers) {
      if (sub->parsed()) return fn(o);
    }
  } catch (const claa::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDomainExit;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDomainExit;
  }
  return kUsageExit;
}
