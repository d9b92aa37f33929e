#include "asrh/engine.hpp"

#include <json.hpp>

#include <fstream>
#include <memory>
#include <mutex>
#include <sstream>

#include "asrh/error.hpp"
#include "asrh/process.hpp"
#include "http.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace asrh::engine {
namespace {

std::string read_all(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string last_line(const std::string& text) {
  auto end = text.find_last_not_of("\r\n");
  if (end == std::string::npos) return {};
  auto begin = text.rfind('\n', end);
  begin = begin == std::string::npos ? 0 : begin + 1;
  return text.substr(begin, end - begin + 1);
}

bool blank(const std::string& s) { return s.find_first_not_of(" \t\r\n\f\v") == std::string::npos; }

/// Parsed mock maps, loaded once per path for the life of the process.
const json& mock_map(const std::string& path) {
  static std::mutex m;
  static std::map<std::string, std::unique_ptr<json>> maps;
  std::lock_guard lock(m);
  auto& slot = maps[path];
  if (!slot) {
    std::string text;
    try {
      text = read_all(path);
    } catch (const Error& e) {
      throw Error(ErrorCode::EngineFailure, e.what());
    }
    json j = json::parse(text, nullptr, false);
    if (!j.is_object()) throw Error(ErrorCode::EngineFailure, path + ": mock map must be a JSON object");
    slot = std::make_unique<json>(std::move(j));
  }
  return *slot;
}

class SlotGuard {
 public:
  explicit SlotGuard(std::counting_semaphore<>& s) : s_(s) { s_.acquire(); }
  ~SlotGuard() { s_.release(); }
  SlotGuard(const SlotGuard&) = delete;
  SlotGuard& operator=(const SlotGuard&) = delete;

 private:
  std::counting_semaphore<>& s_;
};

}  // namespace

std::string_view to_string(EngineKind k) noexcept {
  switch (k) {
    case EngineKind::Subprocess: return "subprocess";
    case EngineKind::Http: return "http";
    case EngineKind::Mock: return "mock";
  }
  return "mock";
}

std::optional<EngineKind> parse_engine_kind(std::string_view s) noexcept {
  if (s == "subprocess") return EngineKind::Subprocess;
  if (s == "http") return EngineKind::Http;
  if (s == "mock") return EngineKind::Mock;
  return std::nullopt;
}

void validate(const EngineSpec& spec) {
  if (spec.label.empty()) throw Error(ErrorCode::ConfigError, "engine label must not be empty");
  if (spec.timeout_seconds < 1) {
    throw Error(ErrorCode::ConfigError, "engine '" + spec.label + "': timeout_seconds must be at least 1");
  }
  if (spec.endpoint_or_command.empty()) {
    throw Error(ErrorCode::ConfigError, "engine '" + spec.label + "': endpoint_or_command is empty");
  }
}

void EngineRegistry::register_engine(EngineSpec spec) {
  validate(spec);
  if (specs_.contains(spec.label)) {
    throw Error(ErrorCode::DuplicateLabel, "engine label registered twice: " + spec.label);
  }
  auto label = spec.label;
  specs_.emplace(std::move(label), std::move(spec));
}

const EngineSpec& EngineRegistry::get(const std::string& label) const {
  if (specs_.empty()) throw Error(ErrorCode::ConfigError, "no engines registered");
  auto it = specs_.find(label);
  if (it == specs_.end()) {
    std::string known;
    for (const auto& [l, _] : specs_) known += (known.empty() ? "" : ", ") + l;
    throw Error(ErrorCode::ConfigError, "unknown engine '" + label + "' (registered: " + known + ")");
  }
  return it->second;
}

std::vector<std::string> EngineRegistry::labels() const {
  std::vector<std::string> out;
  for (const auto& [l, _] : specs_) out.push_back(l);
  return out;
}

EngineRegistry EngineRegistry::parse(std::string_view document, const fs::path& base_dir) {
  const json j = json::parse(document, nullptr, false);
  if (!j.is_array()) throw Error(ErrorCode::ConfigError, "engine registry must be a JSON array");
  EngineRegistry reg;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& e = j[i];
    const std::string where = "engine registry entry " + std::to_string(i);
    if (!e.is_object()) throw Error(ErrorCode::ConfigError, where + " is not an object");
    EngineSpec spec;
    try {
      spec.label = e.at("label").get<std::string>();
      const auto kind = parse_engine_kind(e.at("kind").get<std::string>());
      if (!kind) throw Error(ErrorCode::ConfigError, where + ": kind must be subprocess, http or mock");
      spec.kind = *kind;
      spec.endpoint_or_command = e.at("endpoint_or_command").get<std::string>();
      spec.timeout_seconds = e.value("timeout_seconds", spec.timeout_seconds);
    } catch (const json::exception& ex) {
      throw Error(ErrorCode::ConfigError, where + ": " + ex.what());
    }
    if (spec.kind == EngineKind::Mock && fs::path(spec.endpoint_or_command).is_relative()) {
      spec.endpoint_or_command = (base_dir / spec.endpoint_or_command).lexically_normal().string();
    }
    reg.register_engine(std::move(spec));
  }
  return reg;
}

EngineRegistry EngineRegistry::load(const fs::path& file) {
  return parse(read_all(file), file.parent_path());
}

Transcriber::Transcriber(Clock& clock, std::ptrdiff_t concurrency)
    : clock_(clock), slots_(std::max<std::ptrdiff_t>(1, concurrency)) {}

std::string Transcriber::run_adapter(const EngineSpec& spec, const source::AudioAsset& audio) {
  const auto timeout = std::chrono::seconds(spec.timeout_seconds);
  switch (spec.kind) {
    case EngineKind::Mock: {
      const json& map = mock_map(spec.endpoint_or_command);
      auto it = map.find(audio.video_id);
      if (it == map.end()) throw Error(ErrorCode::EngineFailure, "mock engine has no transcript for " + audio.video_id);
      if (it->is_string()) return it->get<std::string>();
      if (it->is_object() && it->contains("error")) {
        throw Error(ErrorCode::EngineFailure, it->at("error").is_string() ? it->at("error").get<std::string>()
                                                                          : it->at("error").dump());
      }
      throw Error(ErrorCode::EngineFailure, "mock entry for " + audio.video_id + " is neither text nor error");
    }
    case EngineKind::Subprocess: {
      auto argv = split_command(spec.endpoint_or_command);
      argv.push_back(audio.file_path.string());
      const auto r = run_process(argv, timeout);
      if (r.timed_out) {
        throw Error(ErrorCode::EngineTimeout,
                    spec.label + " exceeded " + std::to_string(spec.timeout_seconds) + " s on " + audio.video_id);
      }
      if (r.exec_failed) throw Error(ErrorCode::EngineFailure, "cannot execute " + argv.front());
      if (r.exit_code != 0) {
        throw Error(ErrorCode::EngineFailure,
                    spec.label + " exited with " + std::to_string(r.exit_code) + ": " + last_line(r.err));
      }
      return r.out;
    }
    case EngineKind::Http: {
      std::string bytes;
      try {
        bytes = read_all(audio.file_path);
      } catch (const Error& e) {
        throw Error(ErrorCode::EngineFailure, e.what());
      }
      http::Response resp;
      try {
        resp = http::post(spec.endpoint_or_command, bytes, "application/octet-stream", timeout);
      } catch (const http::TransportError& e) {
        throw Error(e.timeout() ? ErrorCode::EngineTimeout : ErrorCode::EngineFailure, e.what());
      }
      if (resp.status != 200) {
        throw Error(ErrorCode::EngineFailure, spec.label + ": HTTP " + std::to_string(resp.status));
      }
      const json body = json::parse(resp.body, nullptr, false);
      if (!body.is_object() || !body.contains("text") || !body["text"].is_string()) {
        throw Error(ErrorCode::EngineFailure, spec.label + ": response lacks a string \"text\" member");
      }
      return body["text"].get<std::string>();
    }
  }
  throw Error(ErrorCode::ConfigError, "unknown engine kind");
}

Hypothesis Transcriber::transcribe(const EngineSpec& spec, const source::AudioAsset& audio) {
  validate(spec);
  if (spec.kind != EngineKind::Mock) {
    std::error_code ec;
    if (!fs::is_regular_file(audio.file_path, ec)) {
      throw Error(ErrorCode::EngineFailure, "audio file missing: " + audio.file_path.string());
    }
  }
  SlotGuard slot(slots_);
  const auto start = clock_.monotonic_ms();
  Hypothesis h;
  h.video_id = audio.video_id;
  h.engine_label = spec.label;
  h.text = run_adapter(spec, audio);
  h.latency_ms = std::max<std::int64_t>(0, clock_.monotonic_ms() - start);
  if (blank(h.text)) h.warnings.emplace_back(kEmptyOutputWarning);
  return h;
}

}  // namespace asrh::engine
