#include <thread>

#include "crashrepro/llm_gateway.hpp"
#include "crashrepro/text.hpp"

namespace crashrepro::llm {

MockGateway::MockGateway(std::vector<MockEntry> entries, MockOptions options)
    : entries_(std::move(entries)), consumed_(entries_.size(), false), options_(std::move(options)) {}

std::vector<MockEntry> MockGateway::parse_script(std::string_view jsonl) {
  std::vector<MockEntry> entries;
  const auto lines = text::split_lines(jsonl);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const auto line = text::trim(lines[n]);
    if (line.empty() || line.front() == '#') continue;
    const std::string where = "mock script line " + std::to_string(n + 1);
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) throw Error(ErrorKind::FormatError, where + ": not valid JSON");
    MockEntry e;
    if (j.is_string()) {
      e.response = j.get<std::string>();
    } else if (j.is_object()) {
      e.response = j.value("response", std::string{});
      if (j.contains("contains")) {
        const auto& c = j["contains"];
        if (c.is_string()) {
          e.contains.push_back(c.get<std::string>());
        } else if (c.is_array()) {
          for (const auto& s : c) e.contains.push_back(s.get<std::string>());
        } else {
          throw Error(ErrorKind::FormatError, where + ": 'contains' must be a string or array");
        }
      }
      if (j.contains("fingerprint")) e.fingerprint = j["fingerprint"].get<std::string>();
      e.repeat = j.value("repeat", false);
      const std::string failure = j.value("error", std::string{});
      if (failure == "transport") {
        e.failure = MockEntry::Failure::Transport;
      } else if (failure == "timeout") {
        e.failure = MockEntry::Failure::Timeout;
      } else if (!failure.empty()) {
        throw Error(ErrorKind::FormatError, where + ": unknown error kind '" + failure + "'");
      }
    } else {
      throw Error(ErrorKind::FormatError, where + ": expected a string or an object");
    }
    entries.push_back(std::move(e));
  }
  return entries;
}

MockGateway MockGateway::from_file(const std::string& path, MockOptions options) {
  return MockGateway(parse_script(text::read_file(path)), std::move(options));
}

void MockGateway::reset() {
  consumed_.assign(entries_.size(), false);
  calls_ = 0;
}

std::string MockGateway::complete(const std::string& prompt) {
  ++calls_;
  if (options_.real_delay.count() > 0) std::this_thread::sleep_for(options_.real_delay);
  if (options_.clock) options_.clock->advance(options_.simulated_latency);

  std::optional<std::string> fp;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (consumed_[i]) continue;
    const MockEntry& e = entries_[i];
    bool match = true;
    for (const auto& needle : e.contains) {
      if (prompt.find(needle) == std::string::npos) {
        match = false;
        break;
      }
    }
    if (match && e.fingerprint) {
      if (!fp) fp = text::fingerprint(prompt);
      match = *fp == *e.fingerprint;
    }
    if (!match) continue;
    if (!e.repeat) consumed_[i] = true;
    switch (e.failure) {
      case MockEntry::Failure::Transport:
        throw Error(ErrorKind::TransportError, "scripted transport failure");
      case MockEntry::Failure::Timeout:
        throw Error(ErrorKind::Timeout, "scripted timeout");
      case MockEntry::Failure::None:
        break;
    }
    return e.response;
  }
  throw Error(ErrorKind::ExhaustedScript,
              "mock script has no entry for call " + std::to_string(calls_));
}

}  // namespace crashrepro::llm
