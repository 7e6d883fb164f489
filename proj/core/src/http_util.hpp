#pragma once

#include <chrono>
#include <string>

namespace crashrepro::http {

struct Reply {
  bool ok = false;
  bool timed_out = false;
  int status = 0;
  std::string body;
  std::string error;
};

/// POSTs a JSON body. Never throws for transport problems; inspect `ok`.
Reply post_json(const std::string& url, const std::string& body, const std::string& bearer_token,
                std::chrono::seconds timeout);

}  // namespace crashrepro::http
