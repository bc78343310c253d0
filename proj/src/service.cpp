#include "claa/service.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <numeric>

#include "httplib.h"

#include "claa/error.hpp"
#include "claa/log.hpp"
#include "claa/manifest.hpp"
#include "claa/util.hpp"

namespace claa {

using nlohmann::json;

namespace {

struct RequestError {
  int status;
  std::string message;
  std::string field;
};

ServiceResponse error_response(int status, const std::string& message, const std::string& field = "") {
  json body{{"error", message}};
  if (!field.empty()) body["field"] = field;
  return {status, body};
}

json parse_body(std::string_view body) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::exception& e) {
    throw RequestError{400, std::string("malformed JSON: ") + e.what(), ""};
  }
  if (!j.is_object()) throw RequestError{400, "request body must be a JSON object", ""};
  return j;
}

std::vector<std::string> sentence_list(const json& parent, const std::string& key, const std::string& path,
                                       std::size_t limit) {
  if (!parent.contains(key)) throw RequestError{400, "missing field", path};
  const auto& arr = parent.at(key);
  if (!arr.is_array()) throw RequestError{400, "expected an array of strings", path};
  if (arr.empty()) throw RequestError{400, "empty input", path};
  if (arr.size() > limit) {
    throw RequestError{413, "too many sentences: " + std::to_string(arr.size()) + " > " + std::to_string(limit), path};
  }
  std::vector<std::string> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const auto field = path + "[" + std::to_string(i) + "]";
    if (!arr[i].is_string()) throw RequestError{400, "expected a string", field};
    auto s = arr[i].get<std::string>();
    if (trim(s).empty()) throw RequestError{400, "empty sentence", field};
    out.push_back(std::move(s));
  }
  return out;
}

Aspect aspect_field(const json& value, const std::string& path) {
  if (!value.is_string()) throw RequestError{400, "expected an aspect name", path};
  const auto parsed = parse_aspect(value.get<std::string>());
  if (!parsed) {
    throw RequestError{400, "unknown aspect '" + value.get<std::string>() + "'; valid aspects: " + valid_aspect_names(),
                       path};
  }
  return *parsed;
}

std::string string_field(const json& j, const std::string& key, const std::string& path, bool required = true) {
  if (!j.contains(key)) {
    if (required) throw RequestError{400, "missing field", path};
    return "";
  }
  if (!j.at(key).is_string()) throw RequestError{400, "expected a string", path};
  auto s = j.at(key).get<std::string>();
  if (required && trim(s).empty()) throw RequestError{400, "empty string", path};
  return s;
}

template <typename T>
T unsigned_field(const json& j, const std::string& key, T fallback, T min_value) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < static_cast<long long>(min_value)) {
    throw RequestError{400, "expected an integer >= " + std::to_string(min_value), key};
  }
  return v.get<T>();
}

template <typename Fn>
ServiceResponse guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const RequestError& e) {
    return error_response(e.status, e.message, e.field);
  } catch (const ValidationError& e) {
    return error_response(400, e.what());
  } catch (const std::exception& e) {
    return error_response(500, e.what());
  }
}

json api_summary(const AspectModelBundle& bundle, const ApiSentences& api, std::span<const Aspect> aspects,
                 std::optional<double> threshold) {
  const auto labels = label_sentences(bundle, api.sentences, threshold);
  json per = json::object();
  for (auto a : aspects) {
    const auto idx = aspect_index(a);
    std::vector<std::size_t> hits;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (std::find(labels[i].aspects.begin(), labels[i].aspects.end(), a) != labels[i].aspects.end()) hits.push_back(i);
    }
    std::stable_sort(hits.begin(), hits.end(), [&](std::size_t x, std::size_t y) {
      return labels[x].probabilities[idx] > labels[y].probabilities[idx];
    });
    json top = json::array();
    for (std::size_t k = 0; k < std::min(hits.size(), kTopSentences); ++k) {
      const auto& text = api.sentences[hits[k]];
      top.push_back({{"text", text},
                     {"probability", labels[hits[k]].probabilities[idx]},
                     {"explanation", {{"sentence", text}, {"aspect", aspect_name(a)}}}});
    }
    per[std::string(aspect_name(a))] = {
        {"count", hits.size()},
        {"share", static_cast<double>(hits.size()) / static_cast<double>(api.sentences.size())},
        {"top_sentences", top}};
  }
  return {{"name", api.name}, {"total", api.sentences.size()}, {"aspects", per}};
}

ApiSentences api_field(const json& req, const std::string& key, std::size_t limit) {
  if (!req.contains(key)) throw RequestError{400, "missing field", key};
  const auto& obj = req.at(key);
  if (!obj.is_object()) throw RequestError{400, "expected an object", key};
  ApiSentences out;
  out.name = string_field(obj, "name", key + ".name");
  out.sentences = sentence_list(obj, "sentences", key + ".sentences", limit);
  return out;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const auto t = std::chrono::system_clock::to_time_t(now);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday,
                tm.tm_hour, tm.tm_min, tm.tm_sec, static_cast<int>(ms));
  return buf;
}

}  // namespace

// ---------------------------------------------------------------------------

json predict_response(const AspectModelBundle& bundle, std::span<const std::string> sentences,
                      std::optional<double> threshold) {
  const auto labels = label_sentences(bundle, sentences, threshold);
  json results = json::array();
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    json aspects = json::array();
    for (auto a : kAllAspects) {
      aspects.push_back({{"name", aspect_name(a)}, {"probability", labels[i].probabilities[aspect_index(a)]}});
    }
    results.push_back({{"sentence", sentences[i]}, {"aspects", aspects}, {"assigned", labels[i].names()}});
  }
  return {{"results", results}};
}

json compare_response(const AspectModelBundle& bundle, const ApiSentences& a, const ApiSentences& b,
                      std::span<const Aspect> aspects, std::optional<double> threshold) {
  if (a.sentences.empty() || b.sentences.empty()) throw ValidationError("compare: both APIs need sentences");
  json names = json::array();
  for (auto x : aspects) names.push_back(aspect_name(x));
  return {{"aspects", names},
          {"api_a", api_summary(bundle, a, aspects, threshold)},
          {"api_b", api_summary(bundle, b, aspects, threshold)}};
}

json explain_response(const AspectModelBundle& bundle, const std::string& sentence, Aspect aspect,
                      const ExplainConfig& config) {
  const auto& classifier = bundle.at(aspect);
  const PredictFn fn = [&](std::span<const std::string> texts) { return classifier.predict(texts); };
  const auto e = explain(fn, sentence, config, std::string(aspect_name(aspect)));
  auto j = to_json(e);
  j["html"] = render_html(e);
  return j;
}

ServiceResponse handle_predict(std::string_view body, const AspectModelBundle* bundle, const ServiceConfig& config) {
  return guarded([&]() -> ServiceResponse {
    const auto req = parse_body(body);
    const auto sentences = sentence_list(req, "sentences", "sentences", config.max_sentences);
    if (!bundle) return error_response(503, "no model bundle loaded");
    return {200, predict_response(*bundle, sentences, config.threshold)};
  });
}

ServiceResponse handle_compare(std::string_view body, const AspectModelBundle* bundle, const ServiceConfig& config) {
  return guarded([&]() -> ServiceResponse {
    const auto req = parse_body(body);
    const auto a = api_field(req, "api_a", config.max_sentences);
    const auto b = api_field(req, "api_b", config.max_sentences);
    std::vector<Aspect> aspects;
    if (req.contains("aspects")) {
      const auto& arr = req.at("aspects");
      if (!arr.is_array()) throw RequestError{400, "expected an array of aspect names", "aspects"};
      if (arr.empty()) throw RequestError{400, "empty aspect list", "aspects"};
      for (std::size_t i = 0; i < arr.size(); ++i) {
        const auto x = aspect_field(arr[i], "aspects[" + std::to_string(i) + "]");
        if (std::find(aspects.begin(), aspects.end(), x) == aspects.end()) aspects.push_back(x);
      }
    } else {
      aspects.assign(kAllAspects.begin(), kAllAspects.end());
    }
    if (!bundle) return error_response(503, "no model bundle loaded");
    return {200, compare_response(*bundle, a, b, aspects, config.threshold)};
  });
}

ServiceResponse handle_explain(std::string_view body, const AspectModelBundle* bundle, const ServiceConfig& config) {
  return guarded([&]() -> ServiceResponse {
    const auto req = parse_body(body);
    const auto sentence = string_field(req, "sentence", "sentence");
    if (!req.contains("aspect")) throw RequestError{400, "missing field", "aspect"};
    const auto aspect = aspect_field(req.at("aspect"), "aspect");
    ExplainConfig cfg = config.explain;
    cfg.n_samples = unsigned_field<std::size_t>(req, "n_samples", cfg.n_samples, 1);
    cfg.max_features = unsigned_field<std::size_t>(req, "max_features", cfg.max_features, 1);
    cfg.seed = unsigned_field<std::uint64_t>(req, "seed", cfg.seed, 0);
    if (cfg.n_samples > 20000) throw RequestError{413, "n_samples above 20000", "n_samples"};
    if (!bundle) return error_response(503, "no model bundle loaded");
    return {200, explain_response(*bundle, sentence, aspect, cfg)};
  });
}

ServiceResponse handle_aspects(const AspectModelBundle* bundle) {
  json names = json::array();
  for (auto a : kAllAspects) names.push_back(aspect_name(a));
  json body{{"aspects", names}, {"none_marker", kNoneMarker}};
  if (bundle) {
    body["threshold"] = bundle->threshold;
    body["encoder_family"] = bundle->encoder_family;
  }
  return {200, body};
}

ServiceResponse handle_health(const AspectModelBundle* bundle) {
  return {200,
          {{"status", "ok"},
           {"bundle_loaded", bundle != nullptr},
           {"aspects_loaded", bundle ? bundle->size() : 0},
           {"complete", bundle ? bundle->complete() : false}}};
}

// ---------------------------------------------------------------------------

SelectionLog::SelectionLog(std::filesystem::path path) : path_(std::move(path)) {}

ServiceResponse SelectionLog::append(std::string_view body) {
  return guarded([&]() -> ServiceResponse {
    const auto req = parse_body(body);
    json entry;
    entry["task_id"] = string_field(req, "task_id", "task_id");
    entry["chosen_api"] = string_field(req, "chosen_api", "chosen_api");
    if (!req.contains("confidence")) throw RequestError{400, "missing field", "confidence"};
    const auto& c = req.at("confidence");
    if (!c.is_number_integer() || c.get<long long>() < 1 || c.get<long long>() > 5) {
      throw RequestError{400, "confidence must be an integer from 1 to 5", "confidence"};
    }
    entry["confidence"] = c.get<int>();
    entry["reasoning"] = string_field(req, "reasoning", "reasoning", false);
    std::lock_guard lock(mutex_);
    entry["seq"] = ++next_;
    entry["timestamp"] = utc_timestamp();
    std::filesystem::create_directories(path_.parent_path().empty() ? "." : path_.parent_path());
    std::ofstream out(path_, std::ios::app);
    if (!out) throw IoError("cannot append to " + path_.string());
    out << entry.dump() << '\n';
    return {200, entry};
  });
}

// ---------------------------------------------------------------------------

struct Service::Http {
  httplib::Server server;
  std::string host;
  int port = 0;
};

Service::Service(ServiceConfig config)
    : config_(std::move(config)),
      selections_(config_.selections_log.empty() ? data_dir() / "selections.jsonl" : config_.selections_log),
      http_(std::make_unique<Http>()) {}

Service::~Service() { stop(); }

void Service::load_bundle(const std::filesystem::path& dir) {
  auto fresh = std::make_shared<const AspectModelBundle>(claa::load_bundle(dir));
  set_bundle(std::move(fresh));
}

void Service::set_bundle(std::shared_ptr<const AspectModelBundle> bundle) {
  std::lock_guard lock(bundle_mutex_);
  bundle_ = std::move(bundle);
}

std::shared_ptr<const AspectModelBundle> Service::bundle() const {
  std::lock_guard lock(bundle_mutex_);
  return bundle_;
}

ServiceResponse Service::dispatch(std::string_view method, std::string_view path, std::string_view body) {
  const auto current = bundle();
  const AspectModelBundle* b = current.get();
  if (method == "GET" && path == "/health") return handle_health(b);
  if (method == "GET" && path == "/aspects") return handle_aspects(b);
  if (method == "POST" && path == "/predict") return handle_predict(body, b, config_);
  if (method == "POST" && path == "/compare") return handle_compare(body, b, config_);
  if (method == "POST" && path == "/explain") return handle_explain(body, b, config_);
  if (method == "POST" && path == "/selections") return selections_.append(body);
  for (const char* known : {"/health", "/aspects", "/predict", "/compare", "/explain", "/selections"}) {
    if (path == known) return error_response(405, "method not allowed");
  }
  return error_response(404, "no such endpoint: " + std::string(path));
}

int Service::bind(const std::string& host, int port) {
  auto route = [this](const char* method) {
    return [this, method](const httplib::Request& req, httplib::Response& res) {
      const auto r = dispatch(method, req.path, req.body);
      res.status = r.status;
      res.set_content(r.body.dump(), "application/json");
    };
  };
  // Every endpoint under both methods so dispatch owns 404 vs 405.
  for (const char* p : {"/health", "/aspects", "/predict", "/compare", "/explain", "/selections"}) {
    http_->server.Get(p, route("GET"));
    http_->server.Post(p, route("POST"));
  }
  http_->server.Get(".*", route("GET"));
  http_->server.Post(".*", route("POST"));
  http_->host = host;
  http_->port = port == 0 ? http_->server.bind_to_any_port(host) : (http_->server.bind_to_port(host, port) ? port : -1);
  if (http_->port <= 0) throw IoError("cannot bind " + host + ":" + std::to_string(port));
  return http_->port;
}

void Service::run() {
  log_info("serving on " + http_->host + ":" + std::to_string(http_->port));
  http_->server.listen_after_bind();
}

void Service::stop() {
  if (http_ && http_->server.is_running()) http_->server.stop();
}

}  // namespace claa
