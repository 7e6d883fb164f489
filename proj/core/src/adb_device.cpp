#include "crashrepro/adb_device.hpp"

#include <array>
#include <cstdio>
#include <regex>
#include <sstream>
#include <sys/wait.h>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "crashrepro/text.hpp"

namespace crashrepro::device {

namespace pt = boost::property_tree;

namespace {

std::string sh_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') out += "'\\''";
    else out += c;
  }
  return out + "'";
}

std::optional<std::string> non_empty(const pt::ptree& attrs, const char* key) {
  auto v = attrs.get_optional<std::string>(key);
  if (!v || v->empty()) return std::nullopt;
  return *v;
}

bool flag(const pt::ptree& attrs, const char* key) { return attrs.get<std::string>(key, "false") == "true"; }

void convert(const pt::ptree& node, std::vector<UiElement>& out, std::size_t& counter) {
  for (const auto& [tag, child] : node) {
    if (tag != "node") continue;
    const auto& attrs = child.get_child("<xmlattr>", pt::ptree());
    UiElement e;
    e.element_id = "n" + std::to_string(counter++);
    e.class_name = attrs.get<std::string>("class", "android.view.View");
    e.text = non_empty(attrs, "text");
    e.content_desc = non_empty(attrs, "content-desc");
    e.resource_id = non_empty(attrs, "resource-id");
    e.bounds = parse_bounds(attrs.get<std::string>("bounds", "[0,0][0,0]"));
    e.clickable = flag(attrs, "clickable");
    e.long_clickable = flag(attrs, "long-clickable");
    e.scrollable = flag(attrs, "scrollable");
    e.editable = e.class_name.find("EditText") != std::string::npos;
    convert(child, e.children, counter);
    out.push_back(std::move(e));
  }
}

std::string escape_input_text(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == ' ') out += "%s";
    else out += c;
  }
  return sh_quote(out);
}

}  // namespace

CommandResult ProcessRunner::run(const std::vector<std::string>& argv) {
  std::string line;
  for (const auto& a : argv) line += (line.empty() ? "" : " ") + sh_quote(a);
  line += " 2>&1";
  FILE* pipe = ::popen(line.c_str(), "r");
  if (pipe == nullptr) throw Error(ErrorKind::DeviceUnavailable, "cannot start: " + line);
  CommandResult result;
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) result.output.append(buf.data(), n);
  const int status = ::pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

Bounds parse_bounds(std::string_view s) {
  static const std::regex re(R"(\[(-?\d+),(-?\d+)\]\[(-?\d+),(-?\d+)\])");
  std::match_results<std::string_view::const_iterator> m;
  if (!std::regex_match(s.begin(), s.end(), m, re))
    throw Error(ErrorKind::FormatError, "malformed bounds '" + std::string(s) + "'");
  return {std::stoi(m[1].str()), std::stoi(m[2].str()), std::stoi(m[3].str()), std::stoi(m[4].str())};
}

UiElement parse_uiautomator_dump(std::string_view xml) {
  pt::ptree tree;
  std::istringstream in{std::string(xml)};
  try {
    pt::read_xml(in, tree);
  } catch (const pt::xml_parser_error& e) {
    throw Error(ErrorKind::FormatError, std::string("hierarchy dump: ") + e.what());
  }
  const auto hierarchy = tree.get_child_optional("hierarchy");
  if (!hierarchy) throw Error(ErrorKind::FormatError, "hierarchy dump: missing <hierarchy>");
  UiElement root;
  root.element_id = "window";
  root.class_name = "hierarchy";
  std::size_t counter = 0;
  convert(*hierarchy, root.children, counter);
  for (const auto& c : root.children) {
    root.bounds.right = std::max(root.bounds.right, c.bounds.right);
    root.bounds.bottom = std::max(root.bounds.bottom, c.bounds.bottom);
  }
  return root;
}

std::string parse_resumed_activity(std::string_view dumpsys) {
  static const std::regex re(R"((?:mResumedActivity|topResumedActivity)[:=].*?\s([\w.$]+)/([\w.$]+))");
  std::match_results<std::string_view::const_iterator> m;
  if (!std::regex_search(dumpsys.begin(), dumpsys.end(), m, re)) return {};
  return m[2].str();
}

std::optional<CrashInfo> parse_crash_log(std::string_view log, const std::string& activity) {
  const auto lines = text::split_lines(log);
  auto payload = [](const std::string& line) {
    const auto pos = line.find("): ");
    return std::string(text::trim(pos == std::string::npos ? line : line.substr(pos + 3)));
  };
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].find("FATAL EXCEPTION") == std::string::npos) continue;
    for (std::size_t j = i + 1; j < lines.size(); ++j) {
      const std::string p = payload(lines[j]);
      if (p.empty() || p.rfind("Process:", 0) == 0 || p.rfind("PID:", 0) == 0) continue;
      CrashInfo c;
      const auto colon = p.find(": ");
      c.exception_type = colon == std::string::npos ? p : p.substr(0, colon);
      c.message = colon == std::string::npos ? "" : p.substr(colon + 2);
      c.raised_in_activity = activity;
      return c;
    }
  }
  return std::nullopt;
}

AdbDevice::AdbDevice(AdbConfig config, std::shared_ptr<CommandRunner> runner)
    : config_(std::move(config)), runner_(std::move(runner)) {
  if (config_.package.empty()) throw Error(ErrorKind::ConfigError, "adb device needs an application package");
  start_session();
}

CommandResult AdbDevice::adb(std::vector<std::string> args) {
  std::vector<std::string> argv{config_.adb_path};
  if (!config_.serial.empty()) {
    argv.push_back("-s");
    argv.push_back(config_.serial);
  }
  argv.insert(argv.end(), args.begin(), args.end());
  auto result = runner_->run(argv);
  if (result.exit_code != 0) {
    std::string cmd;
    for (const auto& a : args) cmd += (cmd.empty() ? "" : " ") + a;
    throw Error(ErrorKind::DeviceUnavailable,
                "adb " + cmd + " failed (exit " + std::to_string(result.exit_code) + "): " +
                    std::string(text::trim(result.output)));
  }
  return result;
}

CommandResult AdbDevice::shell(std::vector<std::string> args) {
  args.insert(args.begin(), "shell");
  ++issued_;
  return adb(std::move(args));
}

void AdbDevice::start_session() { adb({"logcat", "-c"}); }

UiState AdbDevice::capture_state() {
  adb({"shell", "uiautomator", "dump", config_.dump_path});
  const auto xml = adb({"exec-out", "cat", config_.dump_path});
  const auto dumpsys = adb({"shell", "dumpsys", "activity", "activities"});
  std::string activity = parse_resumed_activity(dumpsys.output);
  if (activity.empty()) activity = "unknown";
  last_state_ = make_state(activity, parse_uiautomator_dump(xml.output));
  return *last_state_;
}

std::optional<CrashInfo> AdbDevice::poll_crash() {
  const auto log = adb({"logcat", "-d", "-v", "brief", "AndroidRuntime:E", "*:S"});
  return parse_crash_log(log.output, last_state_ ? last_state_->activity_name : "unknown");
}

void AdbDevice::drag(const Bounds& area, const std::string& direction, bool finger_follows) {
  const int cx = area.center_x();
  const int cy = area.center_y();
  const int dx = static_cast<int>((area.right - area.left) * config_.drag_fraction / 2);
  const int dy = static_cast<int>((area.bottom - area.top) * config_.drag_fraction / 2);
  // Scrolling "down" reveals content below, so the finger travels up.
  int sx = cx, sy = cy, ex = cx, ey = cy;
  const int sign = finger_follows ? 1 : -1;
  if (direction == "up") { sy = cy + sign * dy; ey = cy - sign * dy; }
  if (direction == "down") { sy = cy - sign * dy; ey = cy + sign * dy; }
  if (direction == "left") { sx = cx + sign * dx; ex = cx - sign * dx; }
  if (direction == "right") { sx = cx - sign * dx; ex = cx + sign * dx; }
  shell({"input", "swipe", std::to_string(sx), std::to_string(sy), std::to_string(ex), std::to_string(ey),
         std::to_string(config_.swipe_ms)});
}

void AdbDevice::rotate(const std::optional<std::string>& direction) {
  std::string target;
  if (direction == std::string("landscape")) {
    target = "1";
  } else if (direction == std::string("portrait")) {
    target = "0";
  } else {
    const auto current = shell({"settings", "get", "system", "user_rotation"});
    target = text::trim(current.output) == "0" ? "1" : "0";
  }
  shell({"settings", "put", "system", "accelerometer_rotation", "0"});
  shell({"settings", "put", "system", "user_rotation", target});
}

ExecStatus AdbDevice::execute(const ActionCommand& cmd) {
  ExecStatus status;
  try {
    validate(cmd);
  } catch (const MalformedCommand& e) {
    status.detail = e.reason();
    status.failure = Failure::Invalid;
    status.new_state = last_state_ ? *last_state_ : capture_state();
    return status;
  }
  if (cmd.action == Verb::Restart) {
    status.new_state = restart_app();
    status.ok = true;
    status.detail = "app restarted";
    return status;
  }

  const UiState before = capture_state();
  const UiElement* target = nullptr;
  if (cmd.feature && !text::trim(*cmd.feature).empty()) {
    try {
      target = &resolve_feature(before, *cmd.feature);
    } catch (const NoMatch& e) {
      status.detail = e.what();
      status.failure = Failure::NoMatch;
      status.missed_tiers = e.tiers();
      status.new_state = before;
      return status;
    }
  }
  const Bounds area = target ? target->bounds : before.root.bounds;
  const std::string x = std::to_string(area.center_x());
  const std::string y = std::to_string(area.center_y());

  switch (cmd.action) {
    case Verb::Click:
      shell({"input", "tap", x, y});
      break;
    case Verb::DoubleClick:
      shell({"input", "tap", x, y});
      shell({"input", "tap", x, y});
      break;
    case Verb::LongClick:
      shell({"input", "swipe", x, y, x, y, std::to_string(config_.long_press_ms)});
      break;
    case Verb::SetText: {
      shell({"input", "tap", x, y});
      shell({"input", "keyevent", "KEYCODE_MOVE_END"});
      const std::size_t existing = target && target->text ? target->text->size() : 0;
      if (existing > 0) {
        std::vector<std::string> dels{"input", "keyevent"};
        for (std::size_t i = 0; i < existing; ++i) dels.push_back("KEYCODE_DEL");
        shell(dels);
      }
      if (!cmd.input_text->empty()) shell({"input", "text", escape_input_text(*cmd.input_text)});
      break;
    }
    case Verb::Scroll:
      drag(area, *cmd.direction, false);
      break;
    case Verb::Swipe:
      drag(area, *cmd.direction, true);
      break;
    case Verb::Rotate:
      rotate(cmd.direction);
      break;
    case Verb::Back:
      shell({"input", "keyevent", "4"});
      break;
    case Verb::Restart:
      break;
  }

  status.crash = poll_crash();
  status.new_state = capture_state();
  status.ok = true;
  status.detail = status.crash ? "app crashed: " + status.crash->exception_type : "executed " + describe(cmd);
  return status;
}

UiState AdbDevice::restart_app() {
  shell({"am", "force-stop", config_.package});
  shell({"monkey", "-p", config_.package, "-c", "android.intent.category.LAUNCHER", "1"});
  return capture_state();
}

}  // namespace crashrepro::device
