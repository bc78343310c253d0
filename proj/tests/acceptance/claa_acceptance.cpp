// Acceptance harness: one PASS/FAIL line per criterion, exit 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "claa/classifier.hpp"
#include "claa/contrastive.hpp"
#include "claa/evaluation.hpp"
#include "claa/explain.hpp"
#include "claa/html.hpp"
#include "claa/ingest.hpp"
#include "claa/losses.hpp"
#include "claa/metrics.hpp"
#include "claa/projection.hpp"
#include "claa/service.hpp"
#include "claa/text.hpp"
#include "claa/util.hpp"
#include "fixtures.hpp"

// After Eigen: <resolv.h> defines a _res macro.
#include "httplib.h"

namespace {

using namespace claa;
using nlohmann::json;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[failed: " << what << "] ";
    }
  }
};

struct Criterion {
  std::string name;
  double limit_seconds;
  std::function<void(Outcome&)> run;
};

Matrix rows(std::initializer_list<std::initializer_list<double>> r) {
  Matrix m(r.size(), r.begin()->size());
  Eigen::Index i = 0;
  for (const auto& row : r) {
    Eigen::Index j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

std::vector<int> random_bits(std::size_t n, Rng& rng) {
  std::vector<int> v(n);
  for (auto& x : v) x = static_cast<int>(uniform_index(rng, 2));
  return v;
}

// ---------------------------------------------------------------------------

void loss_oracles(Outcome& o) {
  const Matrix z = rows({{1, 0}, {1, 0}, {0, 1}, {0, 1}});
  const std::vector<int> y{1, 1, 0, 0};
  const double v = supcon_loss(z, y, 1.0).value;
  o.require(std::abs(v - std::log(1 + 2 / std::exp(1.0))) <= 1e-4, "supcon 4-vector");
  const Matrix same = rows({{0.6, 0.8}, {0.6, 0.8}, {0.6, 0.8}, {0.6, 0.8}});
  const double l3 = supcon_loss(same, y, 0.1).value;
  o.require(std::abs(l3 - std::log(3.0)) <= 1e-6, "supcon identical rows");

  const std::vector<Triplet> t{{0, 1, 2}};
  o.require(triplet_loss(rows({{0, 0}, {1, 0}, {3, 0}}), t, 1.0).value == 0.0, "triplet margin satisfied");
  o.require(triplet_loss(rows({{0, 0}, {2, 0}, {0, 1}}), t, 0.5).value == 1.5, "triplet 2-1+0.5");
  o.require(triplet_loss(rows({{0, 0}, {0, 0}, {2, 0}}), t, 1.0).value == 0.0, "triplet a=p");
  o.require(pairwise_contrastive_loss(rows({{1, 1}, {1, 1}}), std::vector<Pair>{{0, 1, true}}, 1.0).value == 0.0,
            "pairwise similar d=0");
  o.require(pairwise_contrastive_loss(rows({{0, 0}, {1.5, 0}}), std::vector<Pair>{{0, 1, false}}, 1.0).value == 0.0,
            "pairwise beyond margin");
  const double mixed = pairwise_contrastive_loss(rows({{0, 0}, {0.5, 0}, {1, 0}, {1.2, 0}}),
                                                 std::vector<Pair>{{0, 1, true}, {2, 3, false}}, 1.0)
                           .value;
  o.require(std::abs(mixed - 0.445) < 1e-12, "pairwise mean(0.25, 0.64)");
  o.detail << "supcon=" << v << " identical=" << l3 << " pairwise=" << mixed;
}

void gradient_checks(Outcome& o) {
  constexpr int kBatches = 50;
  double worst[4] = {0, 0, 0, 0};
  Rng rng(1);
  const auto labels = [&](std::size_t n) {
    auto y = random_bits(n, rng);
    y[0] = 1;
    y[1] = 1;
    y[2] = 0;
    return y;
  };
  for (int b = 0; b < kBatches; ++b) {
    const std::size_t n = 4 + uniform_index(rng, 5);
    const std::size_t d = 3 + uniform_index(rng, 4);
    const Matrix z = testing::random_unit_rows(n, d, 1000 + b);
    const auto y = labels(n);
    const double tau = 0.1 + uniform_unit(rng);

    const auto s = supcon_loss(z, y, tau, false);
    worst[0] = std::max(worst[0], testing::relative_error(s.grad, testing::numeric_gradient(
                                                                       [&](const Matrix& x) {
                                                                         return supcon_loss(x, y, tau, false).value;
                                                                       },
                                                                       z)));
    const auto trip = mine_triplets(y, b).triplets;
    const auto tr = triplet_loss(z, trip, 3.0);
    worst[1] = std::max(worst[1], testing::relative_error(
                                      tr.grad, testing::numeric_gradient(
                                                   [&](const Matrix& x) { return triplet_loss(x, trip, 3.0).value; },
                                                   z)));
    const auto pairs = mine_pairs(y);
    const auto pr = pairwise_contrastive_loss(z, pairs, 2.5);
    worst[2] = std::max(worst[2], testing::relative_error(pr.grad, testing::numeric_gradient(
                                                                       [&](const Matrix& x) {
                                                                         return pairwise_contrastive_loss(x, pairs, 2.5)
                                                                             .value;
                                                                       },
                                                                       z)));
    const double p = 0.02 + 0.96 * uniform_unit(rng);
    const int t = static_cast<int>(uniform_index(rng, 2));
    const double numeric = (bce_loss(p + 1e-5, t) - bce_loss(p - 1e-5, t)) / 2e-5;
    worst[3] = std::max(worst[3], std::abs(bce_loss_grad(p, t) - numeric) / std::abs(numeric));
  }
  const char* names[4] = {"supcon", "triplet", "pairwise", "bce"};
  for (int i = 0; i < 4; ++i) {
    o.require(worst[i] < 1e-4, names[i]);
    o.detail << names[i] << "=" << worst[i] << " ";
  }
  o.detail << "batches=" << kBatches;
}

void metric_oracles(Outcome& o) {
  Rng rng(21);
  double worst_mcc = 0, worst_auc = 0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 2 + uniform_index(rng, 49);
    auto y = random_bits(n, rng);
    const auto p = random_bits(n, rng);
    y[0] = 1;
    y[1] = 0;
    std::vector<double> s(n);
    for (auto& v : s) v = static_cast<double>(uniform_index(rng, 8)) / 8;
    double tp = 0, tn = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < n; ++i) (y[i] ? (p[i] ? tp : fn) : (p[i] ? fp : tn)) += 1;
    const double den = std::sqrt((tp + fp) * (tp + fn) * (tn + fp) * (tn + fn));
    const double expected = den == 0 ? 0.0 : (tp * tn - fp * fn) / den;
    worst_mcc = std::max(worst_mcc, std::abs(mcc(confusion(y, p)) - expected));
    double wins = 0, pairs = 0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (y[i] != 1 || y[j] != 0) continue;
        pairs += 1;
        wins += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
      }
    }
    worst_auc = std::max(worst_auc, std::abs(roc_auc(y, s) - wins / pairs));
  }
  o.require(worst_mcc < 1e-12, "mcc vs confusion formula");
  o.require(worst_auc <= 1e-9, "auc vs pairwise oracle");
  const auto w = weighted_prf(std::vector<int>{1, 1, 1, 0}, std::vector<int>{1, 0, 1, 0});
  o.require(std::abs(w.precision - 0.875) < 1e-12 && std::abs(w.recall - 0.75) < 1e-12 &&
                std::abs(w.f1 - 0.7666666666666667) < 1e-9,
            "weighted_prf example");
  o.detail << "instances=200 max|dmcc|=" << worst_mcc << " max|dauc|=" << worst_auc << " prf=(" << w.precision << ", "
           << w.recall << ", " << w.f1 << ")";
}

BinaryDataset synthetic_task(std::size_t positives, std::size_t negatives, std::uint64_t seed) {
  BinaryDataset d;
  Rng rng(seed);
  for (std::size_t i = 0; i < positives + negatives; ++i) {
    BinaryItem it;
    it.sentence.id = "s" + std::to_string(i);
    it.sentence.text = "t" + std::to_string(i);
    it.label = i < positives ? 1 : 0;
    d.items.push_back(it);
  }
  shuffle_in_place(d.items, rng);
  return d;
}

void corpus_properties(Outcome& o) {
  Rng rng(77);
  std::size_t batches = 0, bad_batches = 0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t pos = 1 + uniform_index(rng, 150);
    const std::size_t neg = uniform_index(rng, 600);
    const auto d = augment_minority(synthetic_task(pos, neg, t));
    for (const auto& b : make_batches(d, 32, t)) {
      std::size_t p = 0;
      for (auto i : b.indices) p += d.items[i].label;
      ++batches;
      bad_batches += p == 0;
    }
  }
  o.require(bad_batches == 0, "every batch has a positive");

  const auto port = augment_minority(synthetic_task(70, 4452, 1));
  o.require(port.positives() == 140, "70 positives double to 140");

  // Fold partition and duplicate co-location over random augmented tasks.
  bool partition_ok = true, spread_ok = true, colocated = true;
  for (int t = 0; t < 50; ++t) {
    const auto d = augment_minority(synthetic_task(5 + uniform_index(rng, 90), 50 + uniform_index(rng, 300), t));
    const auto plan = make_folds(d, 10, t);
    std::set<std::string> unique_ids;
    for (const auto& it : d.items) unique_ids.insert(it.sentence.id);
    std::set<std::string> seen;
    std::vector<std::size_t> unique_per_fold(10, 0);
    for (std::size_t f = 0; f < 10; ++f) {
      const auto split = split_fold(d, plan, f);
      std::set<std::string> test_ids, train_ids;
      for (const auto& it : split.test.items) test_ids.insert(it.sentence.id);
      for (const auto& it : split.train.items) train_ids.insert(it.sentence.id);
      for (const auto& id : test_ids) {
        if (train_ids.count(id)) colocated = false;
        if (!seen.insert(id).second) partition_ok = false;
      }
      unique_per_fold[f] = test_ids.size();
    }
    if (seen != unique_ids) partition_ok = false;
    const auto [mn, mx] = std::minmax_element(unique_per_fold.begin(), unique_per_fold.end());
    if (*mx - *mn > 1) spread_ok = false;
  }
  o.require(partition_ok, "folds partition the ids");
  o.require(spread_ok, "fold size spread <= 1");
  o.require(colocated, "duplicates co-located");

  // Leakage across full CV runs on augmented tasks.
  std::size_t cv_runs = 0;
  bool leak_free = true;
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const auto corpus = testing::two_aspect_corpus(12, seed);
    auto opts = testing::fixture_pipeline(seed % 2 == 0);
    opts.contrastive.epochs = 1;
    opts.classifier.epochs = 1;
    const auto r = cross_validate(corpus, Aspect::Security, opts, seed % 2 == 0, 10, seed);
    ++cv_runs;
    if (!r.augmented) leak_free = false;
    std::map<std::size_t, std::size_t> held;
    std::set<std::string> ids;
    for (const auto& p : r.predictions) {
      ++held[p.fold];
      if (!ids.insert(p.id).second) leak_free = false;
    }
    for (const auto& f : r.folds) {
      if (held[f.fold] != f.test_size) leak_free = false;
      if (f.train_fingerprint == f.test_fingerprint) leak_free = false;
    }
    if (ids.size() != corpus.size()) leak_free = false;
  }
  o.require(leak_free, "no test-fold augmentation leakage");
  o.detail << "datasets=1000 batches=" << batches << " empty=" << bad_batches << " portability=" << port.positives()
           << " cv_runs=" << cv_runs;
}

void bootstrap(Outcome& o) {
  Rng rng(5);
  auto gold = random_bits(500, rng);
  const auto a = random_bits(500, rng);
  const auto b = random_bits(500, rng);
  const auto same = paired_bootstrap(gold, a, a, 1000, 1);
  o.require(same.fraction_a_better == 0.0 && !same.significant, "identical systems");
  std::vector<int> wrong(gold.size());
  for (std::size_t i = 0; i < gold.size(); ++i) wrong[i] = 1 - gold[i];
  const auto best = paired_bootstrap(gold, gold, wrong, 1000, 1);
  o.require(best.fraction_a_better == 1.0 && best.significant, "all-correct vs all-wrong");
  const auto r1 = paired_bootstrap(gold, a, b, 1000, 42);
  const auto r2 = paired_bootstrap(gold, a, b, 1000, 42);
  o.require(to_json(r1) == to_json(r2), "seeded determinism");
  o.detail << "identical=" << same.fraction_a_better << " extreme=" << best.fraction_a_better
           << " seeded=" << r1.fraction_a_better;
}

void claa_direction(Outcome& o) {
  const auto corpus = testing::two_aspect_corpus(150, 11);
  o.require(corpus.size() >= 400, "corpus size");
  double f1_with = 0, f1_without = 0;
  bool separation = true;
  const std::vector<Aspect> aspects{Aspect::Security, Aspect::Performance};
  for (auto aspect : aspects) {
    const auto with = cross_validate(corpus, aspect, testing::fixture_pipeline(true), true, 10, 1);
    const auto without = cross_validate(corpus, aspect, testing::fixture_pipeline(false), false, 10, 1);
    f1_with += with.f1.mean / aspects.size();
    f1_without += without.f1.mean / aspects.size();
    o.detail << aspect_name(aspect) << ": " << with.f1.mean << " vs " << without.f1.mean << "; ";

    const auto task = augment_minority(derive_binary_task(corpus, aspect));
    std::vector<std::string> texts;
    std::vector<int> labels;
    for (const auto& it : task.items) {
      texts.push_back(it.sentence.text);
      labels.push_back(it.label);
    }
    auto enc = build_encoder(EncoderSpec{}, 0);
    const auto before = class_separation(encode(*enc, texts, true).values, labels);
    train_contrastive(*enc, task, testing::fixture_pipeline().contrastive);
    const auto after = class_separation(encode(*enc, texts, true).values, labels);
    if (!(after.gap() > before.gap())) separation = false;
    o.detail << "gap " << before.gap() << " -> " << after.gap() << "; ";
  }
  o.require(f1_with >= f1_without, "F1 with stage 1 >= without");
  o.require(f1_with >= 0.95, "F1 >= 0.95");
  o.require(separation, "separation improves");
  o.detail << "mean F1 " << f1_with << " vs " << f1_without << " (n=" << corpus.size() << ")";
}

bool has_token(const std::string& text, const std::string& token) {
  const auto t = word_tokens(text);
  return std::find(t.begin(), t.end(), token) != t.end();
}

void explainer(Outcome& o) {
  const PredictFn oracle = [](std::span<const std::string> texts) {
    std::vector<double> out;
    for (const auto& t : texts) out.push_back(has_token(t, "encryption") ? 0.9 : 0.1);
    return out;
  };
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    ExplainConfig c;
    c.seed = seed;
    const auto e = explain(oracle, "CBC encryption in itself is not thread safe", c);
    if (!e.token_weights.empty() && e.token_weights[0].token == "encryption" && e.token_weights[0].weight > 0) ++hits;
  }
  o.require(hits >= 19, "keyword top weight in >= 19/20 seeds");

  const std::map<std::string, double> w{{"alpha", 0.3}, {"beta", -0.2}, {"gamma", 0.1},
                                        {"delta", 0.05}, {"eps", -0.15}, {"zeta", 0.25}};
  const PredictFn linear = [&](std::span<const std::string> texts) {
    std::vector<double> out;
    for (const auto& t : texts) {
      double p = 0.3;
      for (const auto& tok : word_tokens(t)) p += w.at(tok);
      out.push_back(p);
    }
    return out;
  };
  double min_fidelity = 1.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    ExplainConfig c;
    c.seed = seed;
    min_fidelity = std::min(min_fidelity, explain(linear, "alpha beta gamma delta eps zeta", c).fidelity);
  }
  o.require(min_fidelity >= 0.99, "linear fidelity >= 0.99");

  const PredictFn constant = [](std::span<const std::string> texts) {
    return std::vector<double>(texts.size(), 0.42);
  };
  double max_w = 0;
  for (const auto& tw : explain(constant, "the docs are thin here", {}).token_weights) {
    max_w = std::max(max_w, std::abs(tw.weight));
  }
  o.require(max_w < 1e-6, "constant classifier weights");
  o.detail << "hits=" << hits << "/20 fidelity=" << min_fidelity << " constant max|w|=" << max_w;
}

void ingestion(Outcome& o) {
  IngestOptions opts;
  opts.tags = {"json"};
  const auto r = ingest_dump(testing::fixture_dir() / "dump", opts);
  o.require(r.stats.posts == 2 && r.stats.comments == 1 && r.stats.sentences == 6, "fixture counts");
  o.require(strip_html("<p>Use <code>GSON</code> now.</p>") == "Use GSON now.", "inline code golden");
  o.require(strip_html("plain text") == "plain text", "plain golden");
  o.require(strip_html("<pre><code>int x = 0;</code></pre>After.") == "After.", "block code golden");
  std::size_t violations = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const auto once = strip_html(testing::random_markup(seed));
    if (strip_html(once) != once) ++violations;
  }
  o.require(violations == 0, "idempotent over fuzz corpus");
  o.detail << "posts=" << r.stats.posts << " comments=" << r.stats.comments << " sentences=" << r.stats.sentences
           << " fuzz_docs=1000 non_idempotent=" << violations;
}

void cross_correction_check(Outcome& o) {
  const auto r = cross_correction(std::vector<int>{1, 1, 0}, std::vector<int>{1, 0, 0}, std::vector<int>{1, 1, 1},
                                  std::vector<std::string>{"a", "b", "c"});
  o.require(r.errors_a == 1 && r.errors_b == 1 && r.corrected_by_b_pct == 100.0 && r.corrected_by_a_pct == 100.0 &&
                r.both_wrong == 0,
            "enumerated example");
  Rng rng(4);
  std::size_t bad = 0;
  for (int t = 0; t < 2000; ++t) {
    const std::size_t n = 1 + uniform_index(rng, 80);
    const auto g = random_bits(n, rng), a = random_bits(n, rng), b = random_bits(n, rng);
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < n; ++i) ids.push_back(std::to_string(i));
    const auto c = cross_correction(g, a, b, ids);
    // corrected counts recovered from the percentages
    for (const auto& [pct, errors] : {std::pair{c.corrected_by_b_pct, c.errors_a}, {c.corrected_by_a_pct, c.errors_b}}) {
      if (!pct) {
        bad += errors != 0;
        continue;
      }
      if (*pct < 0 || *pct > 100) ++bad;
      if (*pct * errors / 100.0 > errors + 1e-9) ++bad;
    }
    if (c.both_wrong > std::min(c.errors_a, c.errors_b)) ++bad;
  }
  o.require(bad == 0, "fuzzed bounds");
  o.detail << "example=(100%, 100%, both_wrong 0) fuzzed=2000 violations=" << bad;
}

void projection(Outcome& o) {
  double worst = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    Matrix x(15, 2);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = standard_normal(rng);
    const Matrix y = pca_2d(x);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      for (Eigen::Index j = 0; j < x.rows(); ++j) {
        worst = std::max(worst, std::abs((x.row(i) - x.row(j)).norm() - (y.row(i) - y.row(j)).norm()));
      }
    }
  }
  o.require(worst < 1e-6, "pca isometry");

  const auto task = augment_minority(derive_binary_task(testing::two_aspect_corpus(40, 3), Aspect::Security));
  std::vector<std::string> texts;
  std::vector<int> labels;
  for (const auto& it : task.items) {
    texts.push_back(it.sentence.text);
    labels.push_back(it.label);
  }
  auto enc = build_encoder(EncoderSpec{}, 2);
  const double before = silhouette_score(project_2d(encode(*enc, texts, true), labels, ProjectionMethod::Pca).points,
                                         labels);
  train_contrastive(*enc, task, testing::fixture_pipeline().contrastive);
  const double after = silhouette_score(project_2d(encode(*enc, texts, true), labels, ProjectionMethod::Pca).points,
                                        labels);
  o.require(after > before, "silhouette increases after stage 1");
  o.detail << "max|ddist|=" << worst << " silhouette " << before << " -> " << after;
}

json cli_json(const std::string& args) {
  int code = 0;
  const auto out = testing::run_command(std::string(CLAA_CLI_PATH) + " " + args + " 2>/dev/null", code);
  if (code != 0) throw std::runtime_error("cli exited " + std::to_string(code) + ": " + args);
  return json::parse(out);
}

void service_contracts(Outcome& o) {
  const auto bundle = testing::fixture_dir() / "bundle";
  ServiceConfig cfg;
  cfg.selections_log = testing::temp_dir("acceptance-selections") / "selections.jsonl";
  Service service(cfg);
  service.load_bundle(bundle);
  const int port = service.bind("127.0.0.1", 0);
  std::thread server([&] { service.run(); });
  httplib::Client client("127.0.0.1", port);
  const auto post = [&](const std::string& path, const json& body) {
    auto r = client.Post(path, body.dump(), "application/json");
    if (!r) throw std::runtime_error("no response from " + path);
    return std::pair{r->status, json::parse(r->body)};
  };
  try {
    const std::string b = " --bundle '" + bundle.string() + "'";
    const auto [ps, pj] = post("/predict", json{{"sentences", {"CBC encryption is not thread safe", "fast docs"}}});
    const auto pc = cli_json("predict" + b + " --text 'CBC encryption is not thread safe' --text 'fast docs'");
    o.require(ps == 200 && pj == pc, "/predict equals CLI");
    const auto assigned = pj["results"][0]["assigned"];
    o.require(std::find(assigned.begin(), assigned.end(), "Security") != assigned.end(), "security example");

    const json creq{{"api_a", {{"name", "A"}, {"sentences", {"It is easy to use", "very intuitive"}}}},
                    {"api_b", {{"name", "B"}, {"sentences", {"found a crash", "license terms"}}}},
                    {"aspects", {"Usability", "Legal", "Performance"}}};
    const auto req_file = testing::temp_dir("acceptance-compare") / "request.json";
    write_file(req_file, creq.dump());
    const auto [cs, cj] = post("/compare", creq);
    const auto cc = cli_json("compare" + b + " --request '" + req_file.string() + "'");
    o.require(cs == 200 && cj == cc, "/compare equals CLI");

    const auto [es, ej] = post("/explain", json{{"sentence", "the cipher is slow"}, {"aspect", "Security"},
                                                {"n_samples", 500}, {"seed", 2}});
    const auto ec = cli_json("explain" + b + " --aspect Security --samples 500 --seed 2 --text 'the cipher is slow'");
    o.require(es == 200 && ej == ec, "/explain equals CLI");

    std::size_t rejected = 0;
    const std::vector<std::pair<std::string, std::string>> bad{
        {"/predict", "{oops"},
        {"/predict", R"({"sentences": []})"},
        {"/compare", R"({"api_a": {"name": "a", "sentences": ["x"]}, "api_b": {"name": "b", "sentences": ["y"]},
                        "aspects": ["Usabilty"]})"},
        {"/explain", R"({"sentence": "x"})"},
        {"/selections", R"({"task_id": "t", "chosen_api": "A"})"}};
    for (const auto& [path, body] : bad) {
      auto r = client.Post(path, body, "application/json");
      rejected += r && r->status == 400;
    }
    o.require(rejected == bad.size(), "malformed requests -> 400");
    o.detail << "predict/compare/explain equal to CLI; malformed rejected " << rejected << "/" << bad.size()
             << "; port " << port;
  } catch (...) {
    service.stop();
    server.join();
    throw;
  }
  service.stop();
  server.join();
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"Loss oracles", 1, loss_oracles},
      {"Gradient checks", 30, gradient_checks},
      {"Metric oracles", 10, metric_oracles},
      {"Corpus properties", 120, corpus_properties},
      {"Bootstrap", 5, bootstrap},
      {"Desk-scale CLAA direction", 300, claa_direction},
      {"Explainer", 60, explainer},
      {"Ingestion goldens", 30, ingestion},
      {"Cross-correction", 30, cross_correction_check},
      {"Projection", 60, projection},
      {"Service contracts", 120, service_contracts},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "[exception: " << e.what() << "]";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > c.limit_seconds) o.require(false, "runtime limit " + std::to_string(c.limit_seconds) + "s");
    failed += !o.pass;
    std::printf("%s  %-28s %7.2fs  %s\n", o.pass ? "PASS" : "FAIL", c.name.c_str(), secs, o.detail.str().c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
