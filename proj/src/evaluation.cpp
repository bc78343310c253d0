#include "claa/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "claa/error.hpp"
#include "claa/kernels.hpp"
#include "claa/log.hpp"
#include "claa/util.hpp"

namespace claa {

using nlohmann::json;

namespace {

std::string id_fingerprint(const BinaryDataset& d) {
  std::set<std::string> ids;
  for (const auto& it : d.items) ids.insert(it.sentence.id);
  std::string joined;
  for (const auto& id : ids) joined += id + '\n';
  return text_fingerprint(joined);
}

void guard_leakage(const FoldSplit& split, std::size_t fold) {
  std::set<std::string> test_ids;
  for (const auto& it : split.test.items) {
    if (it.duplicate) throw Error("fold " + std::to_string(fold) + ": augmentation duplicate in test fold");
    test_ids.insert(it.sentence.id);
  }
  for (const auto& it : split.train.items) {
    if (test_ids.count(it.sentence.id)) {
      throw Error("fold " + std::to_string(fold) + ": training data contains test id " + it.sentence.id);
    }
  }
}

json summary_json(const MetricSummary& s) { return {{"mean", s.mean}, {"stdev", s.stdev}, {"count", s.count}}; }

json aggregate_json(const AggregateMetric& m) {
  return {{"over_aspects", m.over_aspects}, {"over_folds", m.over_folds}};
}

json optional_pct(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string csv_number(double v) {
  std::ostringstream os;
  os.precision(6);
  os << std::fixed << v;
  return os.str();
}

}  // namespace

MetricSummary summarize(std::span<const double> values) {
  MetricSummary s;
  s.count = values.size();
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double sq = 0.0;
    for (double v : values) sq += (v - s.mean) * (v - s.mean);
    s.stdev = std::sqrt(sq / static_cast<double>(values.size() - 1));
  }
  return s;
}

CVReport cross_validate(const Corpus& corpus, Aspect aspect, const PipelineOptions& options,
                        bool with_contrastive, std::size_t k, std::uint64_t seed) {
  const auto task = derive_binary_task(corpus, aspect);
  const std::size_t decision = task.positives();
  const auto plan = make_folds(task, k, seed);

  CVReport report;
  report.aspect = aspect;
  report.k = k;
  report.seed = seed;
  report.with_contrastive = with_contrastive;
  report.augmented = decision < options.augment_threshold;
  report.config = {{"encoder", json::parse(options.encoder.to_json())},
                   {"contrastive", to_json(options.contrastive)},
                   {"classifier", to_json(options.classifier)},
                   {"augment_threshold", options.augment_threshold},
                   {"positives", decision},
                   {"sentences", task.size()}};

  PipelineOptions opts = options;
  opts.with_contrastive = with_contrastive;
  std::vector<std::optional<HeldOutPrediction>> held(task.size());
  std::map<std::string, std::size_t> index_of;
  for (std::size_t i = 0; i < task.size(); ++i) index_of.emplace(task.items[i].sentence.id, i);

  std::vector<double> p, r, f, m, a, acc;
  for (std::size_t fold = 0; fold < k; ++fold) {
    auto split = split_fold(task, plan, fold);
    split.train = augment_minority_with_count(split.train, decision, options.augment_threshold);
    guard_leakage(split, fold);

    FoldResult fr;
    fr.fold = fold;
    fr.train_size = split.train.size();
    for (const auto& it : split.train.items) fr.train_duplicates += it.duplicate;
    fr.test_size = split.test.size();
    fr.test_positives = split.test.positives();
    fr.train_fingerprint = id_fingerprint(split.train);
    fr.test_fingerprint = id_fingerprint(split.test);

    const auto classifier = train_aspect_pipeline(split.train, opts, sub_seed(seed, fold));
    std::vector<std::string> texts;
    std::vector<int> gold;
    for (const auto& it : split.test.items) {
      texts.push_back(it.sentence.text);
      gold.push_back(it.label);
    }
    const auto probs = classifier.predict(texts);
    std::vector<int> pred;
    for (double pr : probs) pred.push_back(pr >= classifier.threshold() ? 1 : 0);
    fr.metrics = compute_metrics(gold, pred, probs);
    if (!fr.metrics.auc) {
      fr.note = "single-class test fold: AUC undefined, excluded from the AUC mean";
      report.notes.push_back("fold " + std::to_string(fold) + ": " + *fr.note);
    } else {
      a.push_back(*fr.metrics.auc);
    }
    p.push_back(fr.metrics.weighted_precision);
    r.push_back(fr.metrics.weighted_recall);
    f.push_back(fr.metrics.weighted_f1);
    m.push_back(fr.metrics.mcc);
    acc.push_back(fr.metrics.accuracy);
    for (std::size_t i = 0; i < split.test.size(); ++i) {
      const auto& it = split.test.items[i];
      held[index_of.at(it.sentence.id)] = HeldOutPrediction{it.sentence.id, it.sentence.text, gold[i], pred[i], probs[i], fold};
    }
    log_info(std::string(aspect_name(aspect)) + " fold " + std::to_string(fold + 1) + "/" + std::to_string(k) +
             ": F1 " + std::to_string(fr.metrics.weighted_f1));
    report.folds.push_back(std::move(fr));
  }
  report.precision = summarize(p);
  report.recall = summarize(r);
  report.f1 = summarize(f);
  report.mcc = summarize(m);
  report.accuracy = summarize(acc);
  if (!a.empty()) report.auc = summarize(a);
  for (auto& h : held) {
    if (!h) throw Error("cross validation left a sentence without a held-out prediction");
    report.predictions.push_back(std::move(*h));
  }
  return report;
}

AggregateReport aggregate_reports(std::span<const CVReport> reports) {
  if (reports.empty()) throw ValidationError("aggregate_reports: no reports");
  AggregateReport out;
  out.aspects = reports.size();
  auto both = [&](auto summary_of, auto fold_value) {
    AggregateMetric agg;
    double means = 0.0, pooled = 0.0;
    std::size_t folds = 0;
    for (const auto& r : reports) {
      means += summary_of(r).mean;
      for (const auto& fr : r.folds) {
        pooled += fold_value(fr.metrics);
        ++folds;
      }
    }
    agg.over_aspects = means / static_cast<double>(reports.size());
    agg.over_folds = folds ? pooled / static_cast<double>(folds) : 0.0;
    return agg;
  };
  out.precision = both([](const CVReport& r) { return r.precision; },
                       [](const MetricSet& m) { return m.weighted_precision; });
  out.recall = both([](const CVReport& r) { return r.recall; }, [](const MetricSet& m) { return m.weighted_recall; });
  out.f1 = both([](const CVReport& r) { return r.f1; }, [](const MetricSet& m) { return m.weighted_f1; });
  out.mcc = both([](const CVReport& r) { return r.mcc; }, [](const MetricSet& m) { return m.mcc; });
  out.accuracy = both([](const CVReport& r) { return r.accuracy; }, [](const MetricSet& m) { return m.accuracy; });

  double means = 0.0, pooled = 0.0;
  std::size_t with_auc = 0, folds = 0;
  for (const auto& r : reports) {
    if (!r.auc) continue;
    means += r.auc->mean;
    ++with_auc;
    for (const auto& fr : r.folds) {
      if (!fr.metrics.auc) continue;
      pooled += *fr.metrics.auc;
      ++folds;
    }
  }
  if (with_auc) out.auc = AggregateMetric{means / static_cast<double>(with_auc), pooled / static_cast<double>(folds)};
  return out;
}

// ---------------------------------------------------------------------------

BootstrapResult paired_bootstrap(std::span<const int> y_true, std::span<const int> preds_a,
                                 std::span<const int> preds_b, std::size_t n_resamples, std::uint64_t seed) {
  if (n_resamples == 0) throw ValidationError("paired_bootstrap: n_resamples must be > 0");
  const auto scores = kernels::omp::bootstrap_scores(y_true, preds_a, preds_b, n_resamples, seed);
  std::size_t f1_wins = 0, acc_wins = 0;
  for (std::size_t i = 0; i < n_resamples; ++i) {
    f1_wins += scores.f1_a[i] > scores.f1_b[i];
    acc_wins += scores.acc_a[i] > scores.acc_b[i];
  }
  BootstrapResult out;
  out.n_resamples = n_resamples;
  out.seed = seed;
  out.fraction_a_better = static_cast<double>(f1_wins) / static_cast<double>(n_resamples);
  out.fraction_a_better_accuracy = static_cast<double>(acc_wins) / static_cast<double>(n_resamples);
  out.significant = out.fraction_a_better >= out.level;
  return out;
}

// ---------------------------------------------------------------------------

CorrectionReport cross_correction(std::span<const int> y_true, std::span<const int> preds_a,
                                  std::span<const int> preds_b, std::span<const std::string> ids,
                                  std::span<const std::string> texts) {
  const std::size_t n = y_true.size();
  if (preds_a.size() != n || preds_b.size() != n || ids.size() != n || (!texts.empty() && texts.size() != n)) {
    throw ValidationError("cross_correction: inputs must be aligned");
  }
  CorrectionReport out;
  out.items = n;
  std::size_t fixed_by_b = 0, fixed_by_a = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (int v : {y_true[i], preds_a[i], preds_b[i]}) {
      if (v != 0 && v != 1) throw ValidationError("cross_correction: labels must be 0 or 1");
    }
    const bool a_ok = preds_a[i] == y_true[i];
    const bool b_ok = preds_b[i] == y_true[i];
    out.errors_a += !a_ok;
    out.errors_b += !b_ok;
    fixed_by_b += !a_ok && b_ok;
    fixed_by_a += !b_ok && a_ok;
    out.both_wrong += !a_ok && !b_ok;
    if (preds_a[i] != preds_b[i]) {
      out.disagreements.push_back({ids[i], texts.empty() ? std::string() : texts[i], y_true[i], preds_a[i], preds_b[i]});
    }
  }
  if (out.errors_a) out.corrected_by_b_pct = 100.0 * static_cast<double>(fixed_by_b) / static_cast<double>(out.errors_a);
  if (out.errors_b) out.corrected_by_a_pct = 100.0 * static_cast<double>(fixed_by_a) / static_cast<double>(out.errors_b);
  return out;
}

// ---------------------------------------------------------------------------

json to_json(const MetricSet& m) {
  return {{"weighted_precision", m.weighted_precision},
          {"weighted_recall", m.weighted_recall},
          {"weighted_f1", m.weighted_f1},
          {"mcc", m.mcc},
          {"auc", m.auc ? json(*m.auc) : json(nullptr)},
          {"accuracy", m.accuracy}};
}

json to_json(const CVReport& r) {
  json folds = json::array();
  for (const auto& f : r.folds) {
    folds.push_back({{"fold", f.fold},
                     {"metrics", to_json(f.metrics)},
                     {"train_size", f.train_size},
                     {"train_duplicates", f.train_duplicates},
                     {"test_size", f.test_size},
                     {"test_positives", f.test_positives},
                     {"train_fingerprint", f.train_fingerprint},
                     {"test_fingerprint", f.test_fingerprint},
                     {"note", f.note ? json(*f.note) : json(nullptr)}});
  }
  return {{"aspect", aspect_name(r.aspect)},
          {"k", r.k},
          {"seed", r.seed},
          {"with_contrastive", r.with_contrastive},
          {"augmented", r.augmented},
          {"folds", folds},
          {"summary",
           {{"weighted_precision", summary_json(r.precision)},
            {"weighted_recall", summary_json(r.recall)},
            {"weighted_f1", summary_json(r.f1)},
            {"mcc", summary_json(r.mcc)},
            {"auc", r.auc ? summary_json(*r.auc) : json(nullptr)},
            {"accuracy", summary_json(r.accuracy)}}},
          {"notes", r.notes},
          {"conventions", {{"auc_ties", "half credit"}, {"single_class_fold_auc", "excluded"}}},
          {"config", r.config}};
}

json to_json(const AggregateReport& r) {
  return {{"aspects", r.aspects},
          {"weighted_precision", aggregate_json(r.precision)},
          {"weighted_recall", aggregate_json(r.recall)},
          {"weighted_f1", aggregate_json(r.f1)},
          {"mcc", aggregate_json(r.mcc)},
          {"auc", r.auc ? aggregate_json(*r.auc) : json(nullptr)},
          {"accuracy", aggregate_json(r.accuracy)}};
}

json to_json(const BootstrapResult& r) {
  return {{"n_resamples", r.n_resamples},
          {"fraction_A_better", r.fraction_a_better},
          {"fraction_A_better_accuracy", r.fraction_a_better_accuracy},
          {"significant", r.significant},
          {"level", r.level},
          {"seed", r.seed}};
}

json to_json(const CorrectionReport& r) {
  return {{"aspect", r.aspect ? json(std::string(aspect_name(*r.aspect))) : json(nullptr)},
          {"items", r.items},
          {"errors_A", r.errors_a},
          {"errors_B", r.errors_b},
          {"corrected_by_B_pct", optional_pct(r.corrected_by_b_pct)},
          {"corrected_by_A_pct", optional_pct(r.corrected_by_a_pct)},
          {"both_wrong", r.both_wrong},
          {"disagreements", r.disagreements.size()}};
}

std::string cv_reports_csv(std::span<const CVReport> reports) {
  std::string out = "aspect,fold,with_contrastive,precision,recall,f1,mcc,auc,accuracy,train,test\n";
  for (const auto& r : reports) {
    for (const auto& f : r.folds) {
      out += std::string(aspect_name(r.aspect)) + ',' + std::to_string(f.fold) + ',' +
             (r.with_contrastive ? "1" : "0") + ',' + csv_number(f.metrics.weighted_precision) + ',' +
             csv_number(f.metrics.weighted_recall) + ',' + csv_number(f.metrics.weighted_f1) + ',' +
             csv_number(f.metrics.mcc) + ',' + (f.metrics.auc ? csv_number(*f.metrics.auc) : "") + ',' +
             csv_number(f.metrics.accuracy) + ',' + std::to_string(f.train_size) + ',' +
             std::to_string(f.test_size) + '\n';
    }
  }
  return out;
}

std::string correction_csv(std::span<const CorrectionReport> reports) {
  std::string out = "aspect,items,errors_A,errors_B,corrected_by_B_pct,corrected_by_A_pct,both_wrong\n";
  for (const auto& r : reports) {
    out += (r.aspect ? std::string(aspect_name(*r.aspect)) : "") + ',' + std::to_string(r.items) + ',' +
           std::to_string(r.errors_a) + ',' + std::to_string(r.errors_b) + ',' +
           (r.corrected_by_b_pct ? csv_number(*r.corrected_by_b_pct) : "") + ',' +
           (r.corrected_by_a_pct ? csv_number(*r.corrected_by_a_pct) : "") + ',' + std::to_string(r.both_wrong) +
           '\n';
  }
  return out;
}

std::string disagreements_jsonl(const CorrectionReport& report) {
  std::string out;
  for (const auto& d : report.disagreements) {
    out += json{{"id", d.id}, {"text", d.text}, {"gold", d.gold}, {"pred_A", d.pred_a}, {"pred_B", d.pred_b}}.dump() +
           '\n';
  }
  return out;
}

std::string predictions_jsonl(const CVReport& report) {
  std::string out;
  for (const auto& p : report.predictions) {
    out += json{{"id", p.id},
                {"text", p.text},
                {"aspect", aspect_name(report.aspect)},
                {"gold", p.gold},
                {"pred", p.pred},
                {"probability", p.probability},
                {"fold", p.fold}}
               .dump() +
           '\n';
  }
  return out;
}

std::vector<HeldOutPrediction> read_predictions(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::vector<HeldOutPrediction> out;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    try {
      const auto j = json::parse(line);
      out.push_back({j.at("id").get<std::string>(), j.value("text", ""), j.at("gold").get<int>(),
                     j.at("pred").get<int>(), j.value("probability", 0.0), j.value("fold", std::size_t{0})});
    } catch (const json::exception& e) {
      throw ValidationError(path.string() + ": row " + std::to_string(row) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace claa
