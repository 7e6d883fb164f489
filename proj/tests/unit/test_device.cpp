#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>

#include "crashrepro/adb_device.hpp"
#include "crashrepro/device.hpp"
#include "crashrepro/error.hpp"

using namespace crashrepro;
using namespace crashrepro::device;

namespace {

UiElement el(std::string id, std::string cls, std::optional<std::string> text, Bounds b, bool clickable = true) {
  UiElement e;
  e.element_id = std::move(id);
  e.class_name = std::move(cls);
  e.text = std::move(text);
  e.bounds = b;
  e.clickable = clickable;
  return e;
}

UiElement window(std::vector<UiElement> children) {
  UiElement root;
  root.element_id = "root";
  root.class_name = "android.widget.FrameLayout";
  root.bounds = {0, 0, 1080, 1920};
  root.children = std::move(children);
  return root;
}

UiState sample() {
  auto ok = el("ok", "android.widget.Button", "OK", {0, 900, 500, 1000});
  ok.resource_id = "com.example:id/confirm";
  auto cancel = el("cancel", "android.widget.Button", "Cancel", {520, 900, 1000, 1000});
  cancel.content_desc = "Dismiss dialog";
  auto field = el("url", "android.widget.EditText", "https://librenews.io/api", {0, 100, 1000, 200});
  field.editable = true;
  auto label = el("label", "android.widget.TextView", "Server settings", {0, 20, 1000, 80}, false);
  auto refresh = el("refresh_upper", "android.widget.Button", "Refresh now", {0, 300, 500, 400});
  auto refresh2 = el("refresh_lower", "android.widget.Button", "refresh", {0, 500, 500, 600});
  return make_state("SettingsActivity", window({ok, cancel, field, label, refresh, refresh2}));
}

}  // namespace

TEST_CASE("state id ignores sibling order and editable text") {
  const UiState a = sample();
  auto shuffled = a.root;
  std::mt19937 rng(3);
  for (int i = 0; i < 5; ++i) {
    std::shuffle(shuffled.children.begin(), shuffled.children.end(), rng);
    CHECK(compute_state_id("SettingsActivity", shuffled) == a.state_id);
  }
  auto typed = a.root;
  typed.children[2].text = "xxyyzz";
  CHECK(compute_state_id("SettingsActivity", typed) == a.state_id);

  auto relabeled = a.root;
  relabeled.children[0].text = "Okay";
  CHECK(compute_state_id("SettingsActivity", relabeled) != a.state_id);
  CHECK(compute_state_id("OtherActivity", a.root) != a.state_id);
}

TEST_CASE("resolve cascade tiers") {
  const UiState s = sample();
  CHECK(resolve_feature(s, "OK").element_id == "ok");
  CHECK(resolve_feature(s, "Dismiss dialog").element_id == "cancel");
  CHECK(resolve_feature(s, "confirm").element_id == "ok");
  CHECK(resolve_feature(s, "com.example:id/confirm").element_id == "ok");
  CHECK(resolve_feature(s, "cancel").element_id == "cancel");
  // Exact text beats the case-insensitive and substring tiers.
  CHECK(resolve_feature(s, "refresh").element_id == "refresh_lower");
  CHECK(resolve_feature(s, "REFRESH").element_id == "refresh_lower");
  // Substring tier: both match "fresh", the topmost wins.
  CHECK(resolve_feature(s, "fresh").element_id == "refresh_upper");
  CHECK(resolve_feature(s, "@url").element_id == "url");

  try {
    resolve_feature(s, "Nonexistent");
    FAIL("expected NoMatch");
  } catch (const NoMatch& e) {
    CHECK(e.kind() == ErrorKind::NoMatch);
    CHECK(e.feature() == "Nonexistent");
    REQUIRE(e.tiers().size() == 5);
    CHECK(e.tiers()[0] == "exact text: no match");
  }
  CHECK(contains_exact(s, "OK"));
  CHECK_FALSE(contains_exact(s, "fresh"));
}

TEST_CASE("feature_for round trips through resolve") {
  const UiState s = sample();
  for (const UiElement* e : canonical_elements(s)) CHECK(resolve_feature(s, feature_for(s, *e)).element_id == e->element_id);
}

TEST_CASE("encoded screen text") {
  const UiState s = sample();
  const std::string text = encode_state_text(s);
  CHECK(text.rfind("Activity: SettingsActivity (state " + s.state_id + ")", 0) == 0);
  CHECK(text.find("Button text=\"OK\" id=\"confirm\" {clickable}") != std::string::npos);
  CHECK(text.find("EditText text=\"https://librenews.io/api\"") != std::string::npos);
  CHECK(text.find("{clickable, editable}") != std::string::npos);
  CHECK(text == encode_state_text(s));
  // Canonical order is by position: the label is first.
  CHECK(canonical_elements(s).front()->element_id == "label");
}

TEST_CASE("state json round trip") {
  const UiState s = sample();
  const UiState back = state_from_json(to_json(s));
  CHECK(back.state_id == s.state_id);
  CHECK(back.root == s.root);
  auto j = to_json(s);
  j["state_id"] = "0000000000000000";
  CHECK_THROWS_AS(state_from_json(j), Error);
}

// ---- adb bridge ----

namespace {

const char* kDump = R"(<?xml version='1.0' encoding='UTF-8' standalone='yes' ?>
<hierarchy rotation="0">
  <node index="0" text="" resource-id="" class="android.widget.FrameLayout" package="com.example" content-desc="" clickable="false" long-clickable="false" scrollable="false" bounds="[0,0][1080,1920]">
    <node index="0" text="Settings" resource-id="com.example:id/settings" class="android.widget.Button" package="com.example" content-desc="" clickable="true" long-clickable="false" scrollable="false" bounds="[40,220][520,320]" />
    <node index="1" text="" resource-id="com.example:id/url" class="android.widget.EditText" package="com.example" content-desc="Server URL" clickable="true" long-clickable="true" scrollable="false" bounds="[40,400][1040,500]" />
    <node index="2" text="" resource-id="" class="androidx.recyclerview.widget.RecyclerView" package="com.example" content-desc="" clickable="false" long-clickable="false" scrollable="true" bounds="[0,600][1080,1800]">
      <node index="0" text="Item &amp; more" resource-id="" class="android.widget.TextView" package="com.example" content-desc="" clickable="true" long-clickable="false" scrollable="false" bounds="[0,600][1080,700]" />
    </node>
  </node>
</hierarchy>)";

const char* kDumpsys = "  mResumedActivity: ActivityRecord{1 u0 com.example/.MainActivity t12}\n";

const char* kCrashLog =
    "--------- beginning of crash\n"
    "E/AndroidRuntime( 1234): FATAL EXCEPTION: main\n"
    "E/AndroidRuntime( 1234): Process: com.example, PID: 1234\n"
    "E/AndroidRuntime( 1234): java.lang.IllegalStateException: boom\n"
    "E/AndroidRuntime( 1234): \tat com.example.Main.onClick(Main.java:10)\n";

class FakeRunner : public CommandRunner {
 public:
  std::vector<std::vector<std::string>> calls;
  std::string log;
  int fail_code = 0;

  CommandResult run(const std::vector<std::string>& argv) override {
    calls.push_back(argv);
    if (fail_code) return {fail_code, "error: device offline"};
    const std::string joined = join(argv);
    if (joined.find("exec-out cat") != std::string::npos) return {0, kDump};
    if (joined.find("dumpsys activity") != std::string::npos) return {0, kDumpsys};
    if (joined.find("logcat -d") != std::string::npos) return {0, log};
    return {0, ""};
  }

  static std::string join(const std::vector<std::string>& v) {
    std::string out;
    for (const auto& s : v) out += (out.empty() ? "" : " ") + s;
    return out;
  }

  std::vector<std::string> shell_calls() const {
    std::vector<std::string> out;
    for (const auto& c : calls) {
      const std::string j = join(c);
      const auto pos = j.find(" shell ");
      if (pos != std::string::npos && j.find("uiautomator") == std::string::npos &&
          j.find("dumpsys") == std::string::npos)
        out.push_back(j.substr(pos + 7));
    }
    return out;
  }
};

AdbConfig config() {
  AdbConfig c;
  c.serial = "emulator-5554";
  c.package = "com.example";
  return c;
}

}  // namespace

TEST_CASE("uiautomator dump parsing") {
  const UiElement root = parse_uiautomator_dump(kDump);
  // Oracle: every <node> element becomes one descendant.
  std::size_t nodes = 0;
  for (std::size_t p = 0; (p = std::string_view(kDump).find("<node", p)) != std::string::npos; ++p) ++nodes;
  std::size_t count = 0;
  std::vector<const UiElement*> stack{&root};
  while (!stack.empty()) {
    const UiElement* e = stack.back();
    stack.pop_back();
    for (const auto& c : e->children) {
      ++count;
      stack.push_back(&c);
    }
  }
  CHECK(count == nodes);

  const UiState s = make_state("MainActivity", root);
  const auto& url = resolve_feature(s, "Server URL");
  CHECK(url.editable);
  CHECK(url.long_clickable);
  CHECK(url.bounds == Bounds{40, 400, 1040, 500});
  CHECK(resolve_feature(s, "Item & more").clickable);
  CHECK(resolve_feature(s, "settings").text == "Settings");

  CHECK(parse_bounds("[1,2][3,4]") == Bounds{1, 2, 3, 4});
  CHECK_THROWS_AS(parse_bounds("[1,2]"), Error);
  CHECK_THROWS_AS(parse_uiautomator_dump("<hierarchy><node"), Error);
}

TEST_CASE("dumpsys and crash log parsing") {
  CHECK(parse_resumed_activity(kDumpsys) == ".MainActivity");
  CHECK(parse_resumed_activity("nothing here").empty());
  const auto crash = parse_crash_log(kCrashLog, ".MainActivity");
  REQUIRE(crash.has_value());
  CHECK(crash->exception_type == "java.lang.IllegalStateException");
  CHECK(crash->message == "boom");
  CHECK(crash->raised_in_activity == ".MainActivity");
  CHECK_FALSE(parse_crash_log("I/Activity: started\n", "x").has_value());
}

TEST_CASE("adb commands issued per verb") {
  auto runner = std::make_shared<FakeRunner>();
  AdbDevice dev(config(), runner);
  REQUIRE(runner->calls.size() == 1);
  CHECK(FakeRunner::join(runner->calls[0]) == "adb -s emulator-5554 logcat -c");

  ActionCommand tap;
  tap.action = Verb::Click;
  tap.feature = "Settings";
  const auto st = dev.execute(tap);
  CHECK(st.ok);
  CHECK(st.new_state.activity_name == ".MainActivity");
  CHECK(runner->shell_calls() == std::vector<std::string>{"input tap 280 270"});

  runner->calls.clear();
  ActionCommand type;
  type.action = Verb::SetText;
  type.feature = "Server URL";
  type.input_text = "a b";
  dev.execute(type);
  CHECK(runner->shell_calls() ==
        std::vector<std::string>{"input tap 540 450", "input keyevent KEYCODE_MOVE_END", "input text 'a%sb'"});

  runner->calls.clear();
  ActionCommand scroll;
  scroll.action = Verb::Scroll;
  scroll.feature = "@n3";
  scroll.direction = "down";
  dev.execute(scroll);
  CHECK(runner->shell_calls() == std::vector<std::string>{"input swipe 540 1560 540 840 300"});

  runner->calls.clear();
  ActionCommand back;
  back.action = Verb::Back;
  dev.execute(back);
  CHECK(runner->shell_calls() == std::vector<std::string>{"input keyevent 4"});

  runner->calls.clear();
  dev.restart_app();
  CHECK(runner->shell_calls() ==
        std::vector<std::string>{"am force-stop com.example",
                                 "monkey -p com.example -c android.intent.category.LAUNCHER 1"});
  CHECK(dev.commands_issued() == 8);
}

TEST_CASE("adb reports misses and crashes") {
  auto runner = std::make_shared<FakeRunner>();
  AdbDevice dev(config(), runner);
  ActionCommand tap;
  tap.action = Verb::Click;
  tap.feature = "Nope";
  const auto miss = dev.execute(tap);
  CHECK_FALSE(miss.ok);
  CHECK(miss.failure == Failure::NoMatch);
  CHECK(miss.missed_tiers.size() == 5);

  runner->log = kCrashLog;
  tap.feature = "Settings";
  const auto crashed = dev.execute(tap);
  REQUIRE(crashed.crash.has_value());
  CHECK(crashed.crash->exception_type == "java.lang.IllegalStateException");
}

TEST_CASE("adb transport failure") {
  auto runner = std::make_shared<FakeRunner>();
  runner->fail_code = 1;
  try {
    AdbDevice dev(config(), runner);
    FAIL("expected DeviceUnavailable");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DeviceUnavailable);
  }
}
