#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "crashrepro/action_command.hpp"
#include "crashrepro/error.hpp"

namespace crashrepro::device {

struct Bounds {
  int left = 0;
  int top = 0;
  int right = 0;
  int bottom = 0;

  bool well_formed() const noexcept { return left >= 0 && top >= 0 && left <= right && top <= bottom; }
  int center_x() const noexcept { return (left + right) / 2; }
  int center_y() const noexcept { return (top + bottom) / 2; }
  friend bool operator==(const Bounds&, const Bounds&) = default;
};

struct UiElement {
  std::string element_id;
  std::string class_name;
  std::optional<std::string> text;
  std::optional<std::string> content_desc;
  std::optional<std::string> resource_id;
  Bounds bounds;
  bool clickable = false;
  bool long_clickable = false;
  bool editable = false;
  bool scrollable = false;
  std::vector<UiElement> children;

  friend bool operator==(const UiElement&, const UiElement&) = default;
};

bool is_interactable(const UiElement& e) noexcept;

struct UiState {
  std::string state_id;
  std::string activity_name;
  UiElement root;  // window container; its descendants are the screen's elements
};

/// Fingerprint over the activity and the element skeleton (class, text,
/// content description, resource id). Siblings are ordered by (top, left)
/// first, so observation order does not matter. Editable text is treated as
/// user data and left out.
std::string compute_state_id(std::string_view activity_name, const UiElement& root);
UiState make_state(std::string activity_name, UiElement root);

/// Descendants of the root in canonical pre-order (siblings by top, left).
/// The encoded indices refer to this order.
std::vector<const UiElement*> canonical_elements(const UiState& state);

/// Indented outline, one line per element:
///   [3] Button text="OK" id="ok" {clickable}
std::string encode_state_text(const UiState& state);

struct CrashInfo {
  std::string exception_type;
  std::string message;
  std::string raised_in_activity;

  friend bool operator==(const CrashInfo&, const CrashInfo&) = default;
};

enum class Failure { None, NoMatch, NoEffect, Invalid };
std::string_view to_string(Failure f) noexcept;

struct ExecStatus {
  bool ok = false;
  std::string detail;
  UiState new_state;
  std::optional<CrashInfo> crash;
  Failure failure = Failure::None;
  /// Set for NoMatch failures: one line per cascade tier that missed.
  std::vector<std::string> missed_tiers;
};

/// Raised by resolve_feature; carries the tier-by-tier miss report.
class NoMatch : public Error {
 public:
  NoMatch(std::string feature, std::vector<std::string> tiers);
  const std::string& feature() const noexcept { return feature_; }
  const std::vector<std::string>& tiers() const noexcept { return tiers_; }

 private:
  std::string feature_;
  std::vector<std::string> tiers_;
};

/// Matching cascade, first non-empty tier wins:
///   1 exact text, 2 exact content_desc, 3 resource_id equal or ending in
///   "/<feature>", 4 case-insensitive text, 5 case-insensitive substring of
///   text or content_desc.
/// Within a tier the topmost, then leftmost element wins. "@<element_id>"
/// addresses an element directly (used by the explorer for unlabeled
/// widgets). Throws NoMatch.
const UiElement& resolve_feature(const UiState& state, std::string_view feature);
/// True when the feature resolves through tiers 1-3 or "@id" to an element.
bool contains_exact(const UiState& state, std::string_view feature);

/// A feature string that resolves back to `element` in `state`: its text,
/// content description or resource id when unambiguous, otherwise
/// "@<element_id>".
std::string feature_for(const UiState& state, const UiElement& element);

/// Common interface of the simulator and the real-device bridge. A session
/// is driven by exactly one loop at a time.
class Device {
 public:
  virtual ~Device() = default;
  virtual UiState capture_state() = 0;
  /// Semantic failures come back as ok=false; only transport problems
  /// throw (DeviceUnavailable).
  virtual ExecStatus execute(const ActionCommand& cmd) = 0;
  virtual UiState restart_app() = 0;
  /// Device commands issued so far, restarts included.
  virtual std::size_t commands_issued() const = 0;
};

nlohmann::json to_json(const UiElement& e);
UiElement element_from_json(const nlohmann::json& j);
nlohmann::json to_json(const UiState& s);
UiState state_from_json(const nlohmann::json& j);
nlohmann::json to_json(const CrashInfo& c);
nlohmann::json to_json(const ExecStatus& s);

}  // namespace crashrepro::device
