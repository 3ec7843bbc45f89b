#include <algorithm>
#include <deque>
#include <functional>
#include <thread>
#include <unordered_map>

#include <fmt/format.h>

#include "facemt/errors.hpp"
#include "facemt/gateway.hpp"
#include "facemt/subprocess.hpp"
#include "json.hpp"
#include "transports.hpp"

namespace facemt::detail {

namespace {

using Clock = Subprocess::Clock;

struct InFlight {
  std::size_t index;
  Clock::time_point deadline;
};

std::string hello_line() { return nlohmann::json{{"hello", kProtocolVersion}}.dump() + "\n"; }

}  // namespace

class LineProtocolClassifier final : public Classifier {
 public:
  explicit LineProtocolClassifier(ClassifierEndpoint endpoint) : ep_(std::move(endpoint)) {}

  std::string describe() const override { return "cmd:" + ep_.address; }

  std::vector<ScoreOutcome> score_all(std::span<const ClassifyItem> items) override {
    std::vector<ScoreOutcome> out(items.size());
    std::vector<bool> done(items.size(), false);
    std::deque<std::size_t> pending;
    for (std::size_t i = 0; i < items.size(); ++i) pending.push_back(i);
    std::unordered_map<std::uint64_t, InFlight> in_flight;
    int failures = 0;

    auto finish = [&](std::size_t index, ScoreOutcome outcome) {
      out[index] = std::move(outcome);
      done[index] = true;
    };

    // Returns false once the retry budget is spent.
    auto transport_failure = [&](const std::string& why) {
      proc_.reset();
      std::vector<std::size_t> requeue;
      for (const auto& [id, f] : in_flight) requeue.push_back(f.index);
      in_flight.clear();
      std::sort(requeue.begin(), requeue.end(), std::greater<>());
      for (auto idx : requeue) pending.push_front(idx);
      ++failures;
      if (failures > ep_.max_retries) {
        for (std::size_t i = 0; i < items.size(); ++i) {
          if (!done[i]) finish(i, ScoreOutcome{std::nullopt, "transport failure: " + why, true});
        }
        return false;
      }
      std::this_thread::sleep_for(ep_.backoff_base * (1 << (failures - 1)));
      return true;
    };

    while (!pending.empty() || !in_flight.empty()) {
      if (!proc_) {
        try {
          start();
        } catch (const TransportError& e) {
          if (!transport_failure(e.what())) return out;
          continue;
        } catch (const ParameterError& e) {
          for (std::size_t i = 0; i < items.size(); ++i) {
            if (!done[i]) finish(i, ScoreOutcome{std::nullopt, e.what(), true});
          }
          return out;
        }
      }

      bool write_failed = false;
      while (!pending.empty() && in_flight.size() < static_cast<std::size_t>(ep_.max_in_flight)) {
        const std::size_t idx = pending.front();
        std::string line;
        try {
          line = request_document(next_id_, items[idx], ep_.inline_images) + "\n";
        } catch (const Error& e) {
          pending.pop_front();
          finish(idx, ScoreOutcome{std::nullopt, e.what(), false});
          continue;
        }
        pending.pop_front();
        in_flight.emplace(next_id_++, InFlight{idx, Clock::now() + ep_.timeout});
        if (!proc_->write_all(line)) {
          write_failed = true;
          break;
        }
      }
      if (write_failed) {
        if (!transport_failure("classifier closed its input")) return out;
        continue;
      }
      if (in_flight.empty()) continue;

      auto deadline = Clock::time_point::max();
      for (const auto& [id, f] : in_flight) deadline = std::min(deadline, f.deadline);

      std::string line;
      const auto status = proc_->read_line(line, deadline);
      if (status == Subprocess::ReadStatus::Eof) {
        if (!transport_failure("classifier exited")) return out;
        continue;
      }
      if (status == Subprocess::ReadStatus::Timeout) {
        const auto now = Clock::now();
        for (auto it = in_flight.begin(); it != in_flight.end();) {
          if (it->second.deadline <= now) {
            finish(it->second.index,
                   ScoreOutcome{std::nullopt, fmt::format("timed out after {} ms", ep_.timeout.count()), false});
            it = in_flight.erase(it);
          } else {
            ++it;
          }
        }
        continue;
      }
      const auto response = parse_response(line);
      if (!response) {
        if (!transport_failure("unparseable response: " + line.substr(0, 120))) return out;
        continue;
      }
      const auto it = in_flight.find(response->id);
      if (it == in_flight.end()) continue;  // late answer to a timed-out request
      finish(it->second.index, ScoreOutcome{response->score, response->error, false});
      in_flight.erase(it);
      failures = 0;
    }
    return out;
  }

 private:
  void start() {
    auto proc = Subprocess::spawn(shell_command(ep_.address), Subprocess::StderrMode::Inherit);
    if (!proc.write_all(hello_line())) throw TransportError("classifier closed its input before the hello");
    std::string line;
    const auto status = proc.read_line(line, Clock::now() + ep_.timeout);
    if (status != Subprocess::ReadStatus::Line) throw TransportError("no hello from classifier");
    const auto doc = nlohmann::json::parse(line, nullptr, false);
    if (doc.is_discarded() || !doc.is_object() || !doc.contains("hello") || !doc["hello"].is_string()) {
      throw TransportError("malformed hello: " + line.substr(0, 120));
    }
    if (doc["hello"].get<std::string>() != kProtocolVersion) {
      throw ParameterError("classifier speaks " + doc["hello"].get<std::string>() + ", expected " +
                           std::string(kProtocolVersion));
    }
    proc_.emplace(std::move(proc));
  }

  ClassifierEndpoint ep_;
  std::optional<Subprocess> proc_;
  std::uint64_t next_id_ = 1;
};

std::unique_ptr<Classifier> make_line_classifier(const ClassifierEndpoint& endpoint) {
  return std::make_unique<LineProtocolClassifier>(endpoint);
}

}  // namespace facemt::detail
