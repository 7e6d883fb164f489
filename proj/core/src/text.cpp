#include "crashrepro/text.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "crashrepro/error.hpp"

namespace crashrepro {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::EmptyText: return "EmptyText";
    case ErrorKind::ProviderUnavailable: return "ProviderUnavailable";
    case ErrorKind::EmptyCorpus: return "EmptyCorpus";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::ProviderMismatch: return "ProviderMismatch";
    case ErrorKind::EmptyIndex: return "EmptyIndex";
    case ErrorKind::CorpusInvalid: return "CorpusInvalid";
    case ErrorKind::IndexInvalid: return "IndexInvalid";
    case ErrorKind::InvariantViolation: return "InvariantViolation";
    case ErrorKind::NoEntitiesFound: return "NoEntitiesFound";
    case ErrorKind::Timeout: return "Timeout";
    case ErrorKind::TransportError: return "TransportError";
    case ErrorKind::BudgetExceeded: return "BudgetExceeded";
    case ErrorKind::ExhaustedScript: return "ExhaustedScript";
    case ErrorKind::MalformedCommand: return "MalformedCommand";
    case ErrorKind::NoActionableOutput: return "NoActionableOutput";
    case ErrorKind::DeviceUnavailable: return "DeviceUnavailable";
    case ErrorKind::NoMatch: return "NoMatch";
    case ErrorKind::SpecInvalid: return "SpecInvalid";
    case ErrorKind::AlreadyCrashed: return "AlreadyCrashed";
    case ErrorKind::ElementAbsent: return "ElementAbsent";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::FormatError: return "FormatError";
  }
  return "Unknown";
}

namespace text {

std::string_view trim(std::string_view s) noexcept {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string normalize_phrase(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char c : trim(s)) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = true;
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

std::vector<std::string> split_lines(std::string_view s) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= s.size()) {
    std::size_t nl = s.find('\n', start);
    if (nl == std::string_view::npos) nl = s.size();
    std::string_view line = s.substr(start, nl - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.emplace_back(line);
    start = nl + 1;
  }
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

bool starts_with_ci(std::string_view s, std::string_view prefix) noexcept {
  if (s.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(s[i])) !=
        std::tolower(static_cast<unsigned char>(prefix[i])))
      return false;
  }
  return true;
}

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string fingerprint(std::string_view bytes) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(bytes)));
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path);
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error(ErrorKind::IoError, "write failed for " + path);
}

}  // namespace text
}  // namespace crashrepro
