#include <atomic>
#include <mutex>
#include <thread>

#include <fmt/format.h>

#include "facemt/errors.hpp"
#include "facemt/gateway.hpp"
#include "httplib.h"
#include "json.hpp"
#include "transports.hpp"

namespace facemt::detail {

namespace {

using Clock = std::chrono::steady_clock;

struct Url {
  std::string origin;  // scheme://host[:port]
  std::string path;    // request path for /classify
};

Url split_url(const std::string& address) {
  const auto scheme = address.find("://");
  if (scheme == std::string::npos) throw ParameterError("http endpoint '" + address + "' lacks a scheme");
  const auto slash = address.find('/', scheme + 3);
  Url u;
  u.origin = address.substr(0, slash);
  std::string prefix = slash == std::string::npos ? "" : address.substr(slash);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  u.path = prefix + "/classify";
  return u;
}

}  // namespace

class HttpClassifier final : public Classifier {
 public:
  explicit HttpClassifier(ClassifierEndpoint endpoint) : ep_(std::move(endpoint)), url_(split_url(ep_.address)) {}

  std::string describe() const override { return "http:" + ep_.address; }

  std::vector<ScoreOutcome> score_all(std::span<const ClassifyItem> items) override {
    std::vector<ScoreOutcome> out(items.size());
    if (items.empty()) return out;
    if (!hello_done_) {
      const auto problem = hello();
      if (!problem.empty()) {
        for (auto& o : out) o = ScoreOutcome{std::nullopt, problem, true};
        return out;
      }
      hello_done_ = true;
    }

    std::atomic<std::size_t> next{0};
    std::atomic<bool> aborted{false};
    std::mutex abort_mutex;
    std::string abort_reason;
    std::vector<char> finished(items.size(), 0);

    auto worker = [&] {
      auto client = make_client();
      for (;;) {
        if (aborted.load()) return;
        const std::size_t idx = next.fetch_add(1);
        if (idx >= items.size()) return;
        std::string why;
        for (int attempt = 0;; ++attempt) {
          if (aborted.load()) return;
          const auto r = attempt_one(*client, idx, items[idx], why);
          if (r) {
            out[idx] = *r;
            finished[idx] = 1;
            break;
          }
          if (attempt >= ep_.max_retries) {
            std::lock_guard lock(abort_mutex);
            if (!aborted.exchange(true)) abort_reason = why;
            return;
          }
          std::this_thread::sleep_for(ep_.backoff_base * (1 << attempt));
          client = make_client();
        }
      }
    };

    std::vector<std::thread> pool;
    const auto workers = std::min<std::size_t>(static_cast<std::size_t>(ep_.max_in_flight), items.size());
    for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    if (aborted.load()) {
      for (std::size_t i = 0; i < items.size(); ++i) {
        if (!finished[i]) out[i] = ScoreOutcome{std::nullopt, "transport failure: " + abort_reason, true};
      }
    }
    return out;
  }

 private:
  std::unique_ptr<httplib::Client> make_client() const {
    auto c = std::make_unique<httplib::Client>(url_.origin);
    c->set_connection_timeout(ep_.timeout);
    c->set_read_timeout(ep_.timeout);
    c->set_write_timeout(ep_.timeout);
    return c;
  }

  std::string hello() const {
    std::string last;
    for (int attempt = 0;; ++attempt) {
      auto client = make_client();
      const auto body = nlohmann::json{{"hello", kProtocolVersion}}.dump();
      const auto res = client->Post(url_.path, body, "application/json");
      if (res) {
        const auto doc = nlohmann::json::parse(res->body, nullptr, false);
        if (res->status == 200 && doc.is_object() && doc.contains("hello") && doc["hello"].is_string()) {
          const auto v = doc["hello"].get<std::string>();
          if (v == kProtocolVersion) return {};
          return "classifier speaks " + v + ", expected " + std::string(kProtocolVersion);
        }
        return fmt::format("malformed hello response (HTTP {})", res->status);
      }
      last = httplib::to_string(res.error());
      if (attempt >= ep_.max_retries) return "transport failure: " + last;
      std::this_thread::sleep_for(ep_.backoff_base * (1 << attempt));
    }
  }

  // nullopt means a transport failure worth retrying; `why` says what happened.
  std::optional<ScoreOutcome> attempt_one(httplib::Client& client, std::size_t idx, const ClassifyItem& item,
                                          std::string& why) const {
    std::string body;
    try {
      body = request_document(idx + 1, item, ep_.inline_images);
    } catch (const Error& e) {
      return ScoreOutcome{std::nullopt, e.what(), false};
    }
    const auto started = Clock::now();
    const auto res = client.Post(url_.path, body, "application/json");
    if (!res) {
      const bool timed_out = res.error() == httplib::Error::Read && Clock::now() - started >= ep_.timeout;
      if (timed_out) return ScoreOutcome{std::nullopt, fmt::format("timed out after {} ms", ep_.timeout.count()), false};
      why = httplib::to_string(res.error());
      return std::nullopt;
    }
    const auto parsed = parse_response(res->body);
    if (parsed && parsed->id == idx + 1) return ScoreOutcome{parsed->score, parsed->error, false};
    if (res->status >= 500) {
      why = fmt::format("HTTP {}", res->status);
      return std::nullopt;
    }
    return ScoreOutcome{std::nullopt, fmt::format("bad response (HTTP {})", res->status), false};
  }

  ClassifierEndpoint ep_;
  Url url_;
  bool hello_done_ = false;
};

std::unique_ptr<Classifier> make_http_classifier(const ClassifierEndpoint& endpoint) {
  return std::make_unique<HttpClassifier>(endpoint);
}

}  // namespace facemt::detail

namespace facemt {

std::unique_ptr<Classifier> connect(const ClassifierEndpoint& endpoint) {
  endpoint.validate();
  switch (endpoint.transport) {
    case Transport::SubprocessLines:
      return detail::make_line_classifier(endpoint);
    case Transport::Http:
      return detail::make_http_classifier(endpoint);
    case Transport::InProcess:
      break;
  }
  throw ParameterError("in-process endpoints are built with the stub_* factories");
}

}  // namespace facemt
