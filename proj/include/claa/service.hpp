#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "json.hpp"

#include "claa/classifier.hpp"
#include "claa/explain.hpp"

namespace claa {

inline constexpr std::size_t kMaxRequestSentences = 512;
inline constexpr std::size_t kTopSentences = 5;

struct ServiceResponse {
  int status = 200;
  nlohmann::json body;
};

struct ServiceConfig {
  std::size_t max_sentences = kMaxRequestSentences;
  // Overrides the bundle threshold when set.
  std::optional<double> threshold;
  ExplainConfig explain;
  // Append-only selection log; empty = <data_dir>/selections.jsonl.
  std::filesystem::path selections_log;
};

// Response bodies shared by the service and the CLI.
nlohmann::json predict_response(const AspectModelBundle& bundle, std::span<const std::string> sentences,
                                std::optional<double> threshold);

struct ApiSentences {
  std::string name;
  std::vector<std::string> sentences;
};

nlohmann::json compare_response(const AspectModelBundle& bundle, const ApiSentences& a, const ApiSentences& b,
                                std::span<const Aspect> aspects, std::optional<double> threshold);

nlohmann::json explain_response(const AspectModelBundle& bundle, const std::string& sentence, Aspect aspect,
                                const ExplainConfig& config);

// Request handlers: parse and validate the JSON body, then answer.
// 400 carries {"error", "field"}; 413 above max_sentences; 503 without a bundle.
ServiceResponse handle_predict(std::string_view body, const AspectModelBundle* bundle, const ServiceConfig& config);
ServiceResponse handle_compare(std::string_view body, const AspectModelBundle* bundle, const ServiceConfig& config);
ServiceResponse handle_explain(std::string_view body, const AspectModelBundle* bundle, const ServiceConfig& config);
ServiceResponse handle_aspects(const AspectModelBundle* bundle);
ServiceResponse handle_health(const AspectModelBundle* bundle);

// Validated {task_id, chosen_api, confidence 1..5, reasoning} entries, each
// stamped with a sequence number and UTC time, appended one per line.
class SelectionLog {
 public:
  explicit SelectionLog(std::filesystem::path path);
  ServiceResponse append(std::string_view body);
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::mutex mutex_;
  std::size_t next_ = 0;
};

class Service {
 public:
  explicit Service(ServiceConfig config = {});
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Loads completely, then swaps the active bundle in one step.
  void load_bundle(const std::filesystem::path& dir);
  void set_bundle(std::shared_ptr<const AspectModelBundle> bundle);
  std::shared_ptr<const AspectModelBundle> bundle() const;

  // Routing without a socket.
  ServiceResponse dispatch(std::string_view method, std::string_view path, std::string_view body);

  // Port 0 picks a free port. Returns the bound port; throws IoError.
  int bind(const std::string& host, int port);
  // Blocks until stop().
  void run();
  void stop();

 private:
  struct Http;
  ServiceConfig config_;
  mutable std::mutex bundle_mutex_;
  std::shared_ptr<const AspectModelBundle> bundle_;
  SelectionLog selections_;
  std::unique_ptr<Http> http_;
};

}  // namespace claa
