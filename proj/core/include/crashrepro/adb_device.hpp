#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "crashrepro/device.hpp"

namespace crashrepro::device {

struct CommandResult {
  int exit_code = 0;
  std::string output;  // stdout and stderr combined
};

/// Runs an external program. Swappable so tests can inspect the exact
/// bridge invocations without a device.
class CommandRunner {
 public:
  virtual ~CommandRunner() = default;
  virtual CommandResult run(const std::vector<std::string>& argv) = 0;
};

/// popen-based runner; every argument is single-quoted for /bin/sh.
class ProcessRunner final : public CommandRunner {
 public:
  CommandResult run(const std::vector<std::string>& argv) override;
};

struct AdbConfig {
  std::string adb_path = "adb";
  std::string serial;
  std::string package;  // application id, e.g. com.example.app
  std::string dump_path = "/sdcard/window_dump.xml";
  int swipe_ms = 300;
  int long_press_ms = 1000;
  double drag_fraction = 0.6;
};

/// Device backend speaking adb:
///   dump      shell uiautomator dump <dump_path>; exec-out cat <dump_path>
///   activity  shell dumpsys activity activities (mResumedActivity)
///   tap       shell input tap X Y            (double click: two taps)
///   long      shell input swipe X Y X Y <long_press_ms>
///   drag      shell input swipe X1 Y1 X2 Y2 <swipe_ms>
///   text      tap, keyevent MOVE_END, DEL per existing char, input text
///   back      shell input keyevent 4
///   rotate    shell settings put system accelerometer_rotation 0 / user_rotation N
///   restart   shell am force-stop PKG; shell monkey -p PKG -c android.intent.category.LAUNCHER 1
///   crashes   logcat -d -v brief AndroidRuntime:E *:S, scanned for FATAL EXCEPTION
/// The log buffer is cleared (logcat -c) when the session starts.
class AdbDevice final : public Device {
 public:
  AdbDevice(AdbConfig config, std::shared_ptr<CommandRunner> runner = std::make_shared<ProcessRunner>());

  /// Clears the crash log. Called by the constructor.
  void start_session();

  UiState capture_state() override;
  ExecStatus execute(const ActionCommand& cmd) override;
  UiState restart_app() override;
  std::size_t commands_issued() const override { return issued_; }

  std::optional<CrashInfo> poll_crash();

 private:
  CommandResult adb(std::vector<std::string> args);
  CommandResult shell(std::vector<std::string> args);
  void drag(const Bounds& area, const std::string& direction, bool finger_follows);
  void rotate(const std::optional<std::string>& direction);

  AdbConfig config_;
  std::shared_ptr<CommandRunner> runner_;
  std::size_t issued_ = 0;
  std::optional<UiState> last_state_;
};

/// uiautomator XML to an element tree. The returned root stands for the
/// window and has one descendant per <node>; element ids are pre-order
/// positions ("n0", "n1", ...).
UiElement parse_uiautomator_dump(std::string_view xml);
/// Parses "[l,t][r,b]".
Bounds parse_bounds(std::string_view s);
/// Component name of the resumed activity, e.g. ".MainActivity"; empty when
/// not found.
std::string parse_resumed_activity(std::string_view dumpsys);
/// First fatal exception in a brief-format AndroidRuntime log.
std::optional<CrashInfo> parse_crash_log(std::string_view log, const std::string& activity);

}  // namespace crashrepro::device
