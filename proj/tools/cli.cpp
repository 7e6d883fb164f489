#include "crashrepro_cli/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "crashrepro/adb_device.hpp"
#include "crashrepro/evaluator.hpp"
#include "crashrepro/extraction.hpp"
#include "crashrepro/rag_store.hpp"
#include "crashrepro/replay.hpp"
#include "crashrepro/simulator.hpp"
#include "crashrepro/text.hpp"

namespace crashrepro::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Raised for problems with the surroundings rather than the inputs: missing
// environment variables, unreachable services.
struct EnvironmentError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string corpus;
  std::string index;
  std::string sim_spec;
  std::string device_serial;
  std::string package;
  std::string adb_path = "adb";
  std::string gateway = "mock";
  std::string mock_script;
  double budget = 300.0;
  int depth = 1;
  std::size_t action_budget = 200;
  std::size_t k = 1;
  std::string output_dir = "crashrepro-out";
  bool escalation = true;
  bool wall_clock = false;
  double command_cost = 0.2;
  double llm_latency = 0.5;
  std::string embedding_endpoint;
  std::string embedding_model = "all-MiniLM-L12-v2";
  std::size_t embedding_dimension = 384;
  std::string cache_dir;

  json to_json() const {
    return {{"corpus", corpus},
            {"index", index},
            {"sim_spec", sim_spec},
            {"device_serial", device_serial},
            {"package", package},
            {"adb_path", adb_path},
            {"gateway", gateway},
            {"mock_script", mock_script},
            {"budget", budget},
            {"depth", depth},
            {"action_budget", action_budget},
            {"k", k},
            {"output_dir", output_dir},
            {"escalation", escalation},
            {"wall_clock", wall_clock},
            {"command_cost", command_cost},
            {"llm_latency", llm_latency},
            {"embedding_endpoint", embedding_endpoint},
            {"embedding_model", embedding_model},
            {"embedding_dimension", embedding_dimension},
            {"cache_dir", cache_dir}};
  }
};

RunConfig load_config(const std::string& path) {
  json j;
  try {
    j = json::parse(text::read_file(path));
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::ConfigError, path + ": " + e.what());
  }
  if (!j.is_object()) throw Error(ErrorKind::ConfigError, path + ": expected a JSON object");
  RunConfig c;
  json merged = c.to_json();
  for (const auto& [key, value] : j.items()) {
    if (!merged.contains(key)) throw Error(ErrorKind::ConfigError, path + ": unknown key '" + key + "'");
    if (value.type() != merged[key].type() && !(value.is_number() && merged[key].is_number()))
      throw Error(ErrorKind::ConfigError, path + ": wrong type for '" + key + "'");
    merged[key] = value;
  }
  try {
    c.corpus = merged["corpus"];
    c.index = merged["index"];
    c.sim_spec = merged["sim_spec"];
    c.device_serial = merged["device_serial"];
    c.package = merged["package"];
    c.adb_path = merged["adb_path"];
    c.gateway = merged["gateway"];
    c.mock_script = merged["mock_script"];
    c.budget = merged["budget"];
    c.depth = merged["depth"];
    c.action_budget = merged["action_budget"];
    c.k = merged["k"];
    c.output_dir = merged["output_dir"];
    c.escalation = merged["escalation"];
    c.wall_clock = merged["wall_clock"];
    c.command_cost = merged["command_cost"];
    c.llm_latency = merged["llm_latency"];
    c.embedding_endpoint = merged["embedding_endpoint"];
    c.embedding_model = merged["embedding_model"];
    c.embedding_dimension = merged["embedding_dimension"];
    c.cache_dir = merged["cache_dir"];
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ConfigError, path + ": " + e.what());
  }
  return c;
}

struct Flags {
  std::optional<std::string> config, corpus, index, sim_spec, device_serial, package, adb_path, gateway, mock_script,
      output_dir, embedding_endpoint, cache_dir;
  std::optional<double> budget, command_cost, llm_latency;
  std::optional<int> depth;
  std::optional<std::size_t> action_budget, k;
  bool no_escalation = false;
  bool wall_clock = false;

  RunConfig resolve() const {
    RunConfig c = config ? load_config(*config) : RunConfig{};
    auto set = [](auto& field, const auto& flag) {
      if (flag) field = *flag;
    };
    set(c.corpus, corpus);
    set(c.index, index);
    set(c.sim_spec, sim_spec);
    set(c.device_serial, device_serial);
    set(c.package, package);
    set(c.adb_path, adb_path);
    set(c.gateway, gateway);
    set(c.mock_script, mock_script);
    set(c.output_dir, output_dir);
    set(c.embedding_endpoint, embedding_endpoint);
    set(c.cache_dir, cache_dir);
    set(c.budget, budget);
    set(c.command_cost, command_cost);
    set(c.llm_latency, llm_latency);
    set(c.depth, depth);
    set(c.action_budget, action_budget);
    set(c.k, k);
    if (no_escalation) c.escalation = false;
    if (wall_clock) c.wall_clock = true;
    if (c.gateway != "mock" && c.gateway != "live")
      throw Error(ErrorKind::ConfigError, "gateway must be 'mock' or 'live'");
    if (c.budget < 0) throw Error(ErrorKind::ConfigError, "budget must not be negative");
    if (c.depth < 1) throw Error(ErrorKind::ConfigError, "depth must be positive");
    if (c.k < 1) throw Error(ErrorKind::ConfigError, "k must be positive");
    if (c.action_budget < 1) throw Error(ErrorKind::ConfigError, "action budget must be positive");
    return c;
  }
};

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "JSON config file; flags override its values");
  sub->add_option("--corpus", f.corpus, "Labeled corpus (JSONL)");
  sub->add_option("--index", f.index, "RAG index file (JSON)");
  sub->add_option("--sim-spec", f.sim_spec, "Simulator app spec (JSON)");
  sub->add_option("--device-serial", f.device_serial, "adb serial of a real device");
  sub->add_option("--package", f.package, "Application id on the real device");
  sub->add_option("--adb", f.adb_path, "adb executable");
  sub->add_option("--gateway", f.gateway, "Model gateway: mock or live")->check(CLI::IsMember({"mock", "live"}));
  sub->add_option("--mock-script", f.mock_script, "Scripted replies for the mock gateway (JSONL)");
  sub->add_option("--budget", f.budget, "Replay time budget in seconds (default 300)");
  sub->add_option("--depth", f.depth, "Exploration depth (default 1)");
  sub->add_option("--action-budget", f.action_budget, "Device commands allowed per exploration (default 200)");
  sub->add_option("-k,--top-k", f.k, "Examples retrieved per report sentence (default 1)");
  sub->add_option("--output-dir", f.output_dir, "Directory for scripts, logs, traces and reports");
  sub->add_option("--embedding-endpoint", f.embedding_endpoint, "Remote embedding service; offline trigram embedder if unset");
  sub->add_option("--cache-dir", f.cache_dir, "Directory caching exploration results");
  sub->add_option("--command-cost", f.command_cost, "Simulated seconds charged per simulator command (default 0.2)");
  sub->add_option("--llm-latency", f.llm_latency, "Simulated seconds charged per mock reply (default 0.5)");
  sub->add_flag("--no-escalation", f.no_escalation, "Never explore when stuck");
  sub->add_flag("--wall-clock", f.wall_clock, "Use real time even with the simulator and mock gateway");
}

std::unique_ptr<rag::EmbeddingProvider> make_provider(const RunConfig& c) {
  if (c.embedding_endpoint.empty()) return std::make_unique<rag::HashedTrigramProvider>(384);
  rag::HttpEmbeddingConfig hc;
  hc.endpoint = c.embedding_endpoint;
  hc.model = c.embedding_model;
  hc.dimension = c.embedding_dimension;
  if (const char* key = std::getenv("CRASHREPRO_EMBEDDING_API_KEY")) hc.api_key = key;
  return std::make_unique<rag::HttpEmbeddingProvider>(hc);
}

std::shared_ptr<Clock> make_clock(const RunConfig& c) {
  const bool simulated = c.gateway == "mock" && c.device_serial.empty() && !c.wall_clock;
  if (simulated) return std::make_shared<VirtualClock>();
  return std::make_shared<SteadyClock>();
}

std::unique_ptr<llm::LlmGateway> make_gateway(const RunConfig& c, const std::string& script,
                                              const std::shared_ptr<Clock>& clock) {
  if (c.gateway == "live") {
    const char* endpoint = std::getenv(llm::kEnvEndpoint);
    if (endpoint == nullptr || *endpoint == '\0')
      throw EnvironmentError(std::string("live gateway needs ") + llm::kEnvEndpoint + " to be set");
    return std::make_unique<llm::HttpGateway>(llm::LlmConfig::from_env());
  }
  if (script.empty()) throw Error(ErrorKind::ConfigError, "mock gateway needs --mock-script");
  llm::MockOptions opts;
  opts.clock = clock;
  opts.simulated_latency = c.wall_clock ? 0.0 : c.llm_latency;
  return std::make_unique<llm::MockGateway>(llm::MockGateway::from_file(script, opts));
}

struct DeviceHandle {
  std::unique_ptr<device::Device> device;
  std::string app_id;
};

DeviceHandle make_device(const RunConfig& c, const std::shared_ptr<Clock>& clock) {
  if (c.sim_spec.empty() == c.device_serial.empty())
    throw Error(ErrorKind::ConfigError, "give exactly one of --sim-spec and --device-serial");
  if (!c.sim_spec.empty()) {
    auto spec = std::make_shared<const sim::SimAppSpec>(sim::load_spec(c.sim_spec));
    const std::string app = spec->app_id;
    return {std::make_unique<sim::SimDevice>(spec, clock, c.command_cost), app};
  }
  device::AdbConfig ac;
  ac.adb_path = c.adb_path;
  ac.serial = c.device_serial;
  ac.package = c.package;
  return {std::make_unique<device::AdbDevice>(ac), c.package};
}

rag::RagIndex obtain_index(const RunConfig& c, rag::EmbeddingProvider& provider) {
  if (!c.index.empty() && fs::exists(c.index)) return rag::RagIndex::load(c.index);
  if (!c.corpus.empty()) return rag::RagIndex::build(rag::load_corpus(c.corpus), provider);
  if (!c.index.empty()) throw Error(ErrorKind::IoError, "cannot read " + c.index);
  throw Error(ErrorKind::ConfigError, "extraction needs --index or --corpus");
}

fs::path output_path(const RunConfig& c, const std::string& name) {
  fs::create_directories(c.output_dir);
  return fs::path(c.output_dir) / name;
}

std::string stem(const std::string& path) {
  std::string s = fs::path(path).filename().string();
  for (const char* ext : {".txt", ".json", ".md"})
    if (s.size() > std::strlen(ext) && s.compare(s.size() - std::strlen(ext), std::string::npos, ext) == 0)
      s.resize(s.size() - std::strlen(ext));
  return s;
}

std::string seconds(double s) {
  std::ostringstream o;
  o << std::fixed << std::setprecision(2) << s << " s";
  return o.str();
}

replay::ReplayOptions replay_options(const RunConfig& c, const std::shared_ptr<Clock>& clock, const std::string& app_id) {
  replay::ReplayOptions o;
  o.budget = c.budget;
  o.escalation = c.escalation;
  o.explore.depth = c.depth;
  o.explore.action_budget = c.action_budget;
  o.clock = clock;
  if (!c.cache_dir.empty()) {
    const fs::path dir = c.cache_dir;
    o.knowledge_lookup = [dir, app_id](const std::string& origin) -> std::optional<utg::Knowledge> {
      const fs::path file = dir / utg::cache_key(app_id, origin);
      if (!fs::exists(file)) return std::nullopt;
      return utg::knowledge_from_json(json::parse(text::read_file(file.string())).at("knowledge"));
    };
    o.knowledge_store = [dir, app_id](const utg::UtgGraph& g, const utg::Knowledge& k) {
      fs::create_directories(dir);
      const json doc = {{"graph", utg::to_json(g)}, {"knowledge", utg::to_json(k)}};
      text::write_file((dir / utg::cache_key(app_id, g.origin)).string(), doc.dump(2) + "\n");
    };
  }
  return o;
}

// --- subcommands ----------------------------------------------------------

int cmd_build_index(const RunConfig& c, std::ostream& out) {
  if (c.corpus.empty()) throw Error(ErrorKind::ConfigError, "build-index needs --corpus");
  if (c.index.empty()) throw Error(ErrorKind::ConfigError, "build-index needs --index");
  auto provider = make_provider(c);
  const auto index = rag::RagIndex::build(rag::load_corpus(c.corpus), *provider);
  if (const auto parent = fs::path(c.index).parent_path(); !parent.empty()) fs::create_directories(parent);
  index.save(c.index);
  out << index.size() << " records written to " << c.index << '\n';
  return kOk;
}

int cmd_extract(const RunConfig& c, const std::string& report_path, std::string script_out, std::ostream& out) {
  const std::string report = text::read_file(report_path);
  auto provider = make_provider(c);
  const auto index = obtain_index(c, *provider);
  auto clock = make_clock(c);
  auto gateway = make_gateway(c, c.mock_script, clock);
  const ExtractionRun run = extract_s2r(report, index, *provider, *gateway, *clock, c.k);
  if (script_out.empty()) script_out = output_path(c, stem(report_path) + ".s2r.json").string();
  text::write_file(script_out, s2r::script_to_json(run.script).dump(2) + "\n");
  text::write_file(output_path(c, stem(report_path) + ".extract.json").string(), to_json(run).dump(2) + "\n");
  out << s2r::format_script(run.script);
  return kOk;
}

int cmd_replay(const RunConfig& c, const std::string& report_path, const std::string& script_path,
               std::string trace_out, std::ostream& out) {
  const std::string report = text::read_file(report_path);
  s2r::S2RScript script;
  try {
    script = s2r::script_from_json(json::parse(text::read_file(script_path)));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::FormatError, script_path + ": " + e.what());
  }
  auto clock = make_clock(c);
  auto gateway = make_gateway(c, c.mock_script, clock);
  auto dev = make_device(c, clock);
  const auto result = replay::run(report, script, *dev.device, *gateway, replay_options(c, clock, dev.app_id));
  if (trace_out.empty()) trace_out = output_path(c, stem(report_path) + ".trace.jsonl").string();
  text::write_file(trace_out, replay::trace_jsonl(result));
  out << "outcome: " << replay::to_string(result.outcome) << '\n';
  out << "commands: " << result.steps_executed << '\n';
  out << "elapsed: " << seconds(result.elapsed) << " (model " << seconds(result.llm_time) << ")\n";
  if (result.crash) out << "crash: " << result.crash->exception_type << ": " << result.crash->message << '\n';
  if (result.outcome == replay::Outcome::DeviceFailure) throw Error(ErrorKind::DeviceUnavailable, result.detail);
  return result.outcome == replay::Outcome::Reproduced ? kOk : kDomainFailure;
}

struct Scenario {
  std::string file;
  std::string name;
  std::string report;
  std::string gold;
  std::string predicted;
  std::string extraction_mock;
  std::string app;
  std::string replay_mock;
  std::optional<double> budget;
  std::optional<bool> escalation;
};

Scenario load_scenario(const fs::path& file) {
  try {
    const json j = json::parse(text::read_file(file.string()));
    const fs::path dir = file.parent_path();
    auto rel = [&](const char* key) -> std::string {
      if (!j.contains(key)) return {};
      return (dir / j.at(key).get<std::string>()).lexically_normal().string();
    };
    Scenario s;
    s.file = file.string();
    s.name = j.value("name", stem(file.string()));
    s.report = rel("report");
    if (s.report.empty()) throw Error(ErrorKind::FormatError, "missing 'report'");
    s.gold = rel("gold");
    s.predicted = rel("predicted");
    s.extraction_mock = rel("extraction_mock");
    s.app = rel("app");
    s.replay_mock = rel("replay_mock");
    if (j.contains("budget")) s.budget = j.at("budget").get<double>();
    if (j.contains("escalation")) s.escalation = j.at("escalation").get<bool>();
    if (s.app.empty() != s.replay_mock.empty()) throw Error(ErrorKind::FormatError, "'app' and 'replay_mock' go together");
    return s;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::FormatError, file.string() + ": " + e.what());
  } catch (const Error& e) {
    throw Error(e.kind(), file.string() + ": " + e.what());
  }
}

s2r::S2RScript read_script(const std::string& path) {
  try {
    return s2r::script_from_json(json::parse(text::read_file(path)));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::FormatError, path + ": " + e.what());
  }
}

int cmd_eval(const RunConfig& c, const std::string& scenario_dir, std::ostream& out) {
  if (!fs::is_directory(scenario_dir)) throw Error(ErrorKind::IoError, "not a directory: " + scenario_dir);
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(scenario_dir))
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  std::sort(files.begin(), files.end());

  std::vector<Scenario> scenarios;
  for (const auto& f : files) scenarios.push_back(load_scenario(f));

  eval::EvalReport report;
  json inputs = json::object();
  std::unique_ptr<rag::EmbeddingProvider> provider;
  std::optional<rag::RagIndex> index;

  for (const auto& s : scenarios) {
    json hashes = {{"scenario", text::fingerprint(text::read_file(s.file))}};
    const std::string report_text = text::read_file(s.report);
    hashes["report"] = text::fingerprint(report_text);

    std::optional<s2r::S2RScript> predicted;
    if (!s.extraction_mock.empty()) {
      if (!provider) provider = make_provider(c);
      if (!index) index = obtain_index(c, *provider);
      auto clock = std::make_shared<VirtualClock>();
      RunConfig mock_cfg = c;
      mock_cfg.gateway = "mock";
      auto gateway = make_gateway(mock_cfg, s.extraction_mock, clock);
      predicted = extract_s2r(report_text, *index, *provider, *gateway, *clock, c.k).script;
    } else if (!s.predicted.empty()) {
      predicted = read_script(s.predicted);
    }
    std::optional<s2r::S2RScript> gold;
    if (!s.gold.empty()) {
      gold = read_script(s.gold);
      hashes["gold"] = text::fingerprint(text::read_file(s.gold));
    }
    if (gold && predicted) report.extraction.push_back({s.name, eval::score_extraction(*predicted, *gold)});

    if (!s.app.empty()) {
      RunConfig rc = c;
      rc.gateway = "mock";
      rc.sim_spec = s.app;
      rc.device_serial.clear();
      if (s.budget) rc.budget = *s.budget;
      if (s.escalation && !*s.escalation) rc.escalation = false;
      auto clock = make_clock(rc);
      auto gateway = make_gateway(rc, s.replay_mock, clock);
      auto dev = make_device(rc, clock);
      const s2r::S2RScript script = predicted ? *predicted : gold.value_or(s2r::S2RScript{});
      const auto result = replay::run(report_text, script, *dev.device, *gateway, replay_options(rc, clock, dev.app_id));
      report.runs.push_back(eval::summarize(s.name, result));
      text::write_file(output_path(c, s.name + ".trace.jsonl").string(), replay::trace_jsonl(result));
      hashes["app"] = text::fingerprint(text::read_file(s.app));
    }
    inputs[s.name] = hashes;
  }

  report.meta = {{"config_fingerprint", text::fingerprint(c.to_json().dump())}, {"inputs", inputs}};
  const std::string rendered = eval::emit_report_text(report);
  text::write_file(output_path(c, "report.txt").string(), rendered);
  text::write_file(output_path(c, "report.json").string(), eval::emit_report_json(report).dump(2) + "\n");
  out << rendered;
  return kOk;
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ConfigError:
      return kUsage;
    case ErrorKind::IoError:
    case ErrorKind::DeviceUnavailable:
    case ErrorKind::ProviderUnavailable:
    case ErrorKind::TransportError:
    case ErrorKind::Timeout:
      return kEnvironment;
    default:
      return kDomainFailure;
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Crash reproduction from bug reports: S2R extraction, guided replay, evaluation", "crashrepro"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  Flags flags;
  std::string report, script, out_file, scenarios;

  auto* build = app.add_subcommand("build-index", "Embed a labeled corpus into a retrieval index");
  add_common(build, flags);

  auto* extract = app.add_subcommand("extract", "Extract S2R entities from a bug report");
  add_common(extract, flags);
  extract->add_option("--report", report, "Bug report text file")->required();
  extract->add_option("--out", out_file, "Script output (default <output-dir>/<report>.s2r.json)");

  auto* rep = app.add_subcommand("replay", "Replay a report on a simulator or device until it crashes");
  add_common(rep, flags);
  rep->add_option("--report", report, "Bug report text file")->required();
  rep->add_option("--script", script, "S2R script from extract (JSON)")->required();
  rep->add_option("--trace", out_file, "Run log output (default <output-dir>/<report>.trace.jsonl)");

  auto* ev = app.add_subcommand("eval", "Score extraction and replay over a directory of scenarios");
  add_common(ev, flags);
  ev->add_option("--scenarios", scenarios, "Directory of *.json scenario files")->required();

  app.footer(
      "Exit status: 0 success (replay: reproduced), 1 domain failure, 2 usage or configuration error, "
      "3 environment error (missing file, device, network, " + std::string(llm::kEnvEndpoint) + ").");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    const RunConfig config = flags.resolve();
    if (build->parsed()) return cmd_build_index(config, out);
    if (extract->parsed()) return cmd_extract(config, report, out_file, out);
    if (rep->parsed()) return cmd_replay(config, report, script, out_file, out);
    if (ev->parsed()) return cmd_eval(config, scenarios, out);
  } catch (const EnvironmentError& e) {
    err << "error: " << e.what() << '\n';
    return kEnvironment;
  } catch (const Error& e) {
    err << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kEnvironment;
  }
  return kUsage;
}

}  // namespace crashrepro::cli
