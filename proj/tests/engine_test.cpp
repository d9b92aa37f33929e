#include <gtest/gtest.h>

#include <httplib.h>

#include <thread>

#include "asrh/engine.hpp"
#include "asrh/error.hpp"
#include "tmpdir.hpp"

namespace asrh::engine {
namespace {

using test::TempDir;

template <class F>
ErrorCode code_of(F&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no asrh::Error thrown";
  return ErrorCode::ConfigError;
}

source::AudioAsset asset(const TempDir& d, const std::string& id) {
  const auto p = d / (id + ".wav");
  test::write_file(p, test::make_wav(100, 10));
  return {id, p, "wav", 0.1, ""};
}

TEST(RegistryTest, RegisterAndSelect) {
  EngineRegistry reg;
  EXPECT_EQ(code_of([&] { reg.get("large"); }), ErrorCode::ConfigError);
  reg.register_engine({"large", EngineKind::Subprocess, "whisper --model large", 600});
  EXPECT_EQ(reg.get("large").endpoint_or_command, "whisper --model large");
  EXPECT_EQ(code_of([&] { reg.register_engine({"large", EngineKind::Mock, "m.json", 5}); }),
            ErrorCode::DuplicateLabel);
  EXPECT_EQ(code_of([&] { reg.get("tiny"); }), ErrorCode::ConfigError);
  EXPECT_EQ(code_of([&] { reg.register_engine({"", EngineKind::Mock, "m.json", 5}); }), ErrorCode::ConfigError);
  EXPECT_EQ(code_of([&] { reg.register_engine({"x", EngineKind::Mock, "m.json", 0}); }), ErrorCode::ConfigError);
}

TEST(RegistryTest, ParseResolvesMockPaths) {
  auto reg = EngineRegistry::parse(R"([
    {"label": "mock", "kind": "mock", "endpoint_or_command": "maps/m.json", "timeout_seconds": 5},
    {"label": "remote", "kind": "http", "endpoint_or_command": "http://localhost:9/asr"}])",
                                   "/data/fixtures");
  EXPECT_EQ(reg.get("mock").endpoint_or_command, "/data/fixtures/maps/m.json");
  EXPECT_EQ(reg.get("remote").timeout_seconds, 600);
  EXPECT_EQ(reg.labels(), (std::vector<std::string>{"mock", "remote"}));
  EXPECT_EQ(code_of([] { EngineRegistry::parse(R"([{"label":"a","kind":"gpu","endpoint_or_command":"x"}])", "."); }),
            ErrorCode::ConfigError);
  EXPECT_EQ(code_of([] { EngineRegistry::parse(R"({"label":"a"})", "."); }), ErrorCode::ConfigError);
  EXPECT_EQ(code_of([] {
              EngineRegistry::parse(R"([{"label":"a","kind":"mock","endpoint_or_command":"x"},
                                        {"label":"a","kind":"mock","endpoint_or_command":"y"}])",
                                    ".");
            }),
            ErrorCode::DuplicateLabel);
}

TEST(MockEngineTest, ReplayIsDeterministic) {
  TempDir d;
  test::write_file(d / "m.json", R"({"A": "the cat sat", "B": {"error": "model crashed"}, "E": ""})");
  FixedClock clock;
  Transcriber t(clock);
  const EngineSpec spec{"mock", EngineKind::Mock, (d / "m.json").string(), 5};
  auto h1 = t.transcribe(spec, {"A", "", "", {}, ""});
  auto h2 = t.transcribe(spec, {"A", "", "", {}, ""});
  EXPECT_EQ(h1.text, "the cat sat");
  EXPECT_EQ(h1.text, h2.text);
  EXPECT_EQ(h1.latency_ms, 0);
  EXPECT_TRUE(h1.warnings.empty());
  EXPECT_EQ(code_of([&] { t.transcribe(spec, {"B", "", "", {}, ""}); }), ErrorCode::EngineFailure);
  EXPECT_EQ(code_of([&] { t.transcribe(spec, {"missing", "", "", {}, ""}); }), ErrorCode::EngineFailure);
  auto empty = t.transcribe(spec, {"E", "", "", {}, ""});
  EXPECT_EQ(empty.warnings, std::vector<std::string>{std::string(kEmptyOutputWarning)});
}

TEST(SubprocessEngineTest, ContractAndFailures) {
  TempDir d;
  test::write_script(d / "ok", "echo \"heard $(basename \"$1\")\"\n");
  test::write_script(d / "bad", "echo 'CUDA out of memory' >&2; exit 1\n");
  test::write_script(d / "slow", "sleep 5\n");
  SystemClock clock;
  Transcriber t(clock);
  const auto a = asset(d, "vid");
  EXPECT_EQ(t.transcribe({"ok", EngineKind::Subprocess, (d / "ok").string(), 5}, a).text, "heard vid.wav\n");
  EXPECT_EQ(code_of([&] { t.transcribe({"bad", EngineKind::Subprocess, (d / "bad").string(), 5}, a); }),
            ErrorCode::EngineFailure);
  EXPECT_EQ(code_of([&] { t.transcribe({"slow", EngineKind::Subprocess, (d / "slow").string(), 1}, a); }),
            ErrorCode::EngineTimeout);
  EXPECT_EQ(code_of([&] { t.transcribe({"nope", EngineKind::Subprocess, "asrh-no-such-engine", 5}, a); }),
            ErrorCode::EngineFailure);
  source::AudioAsset gone = a;
  gone.file_path = d / "gone.wav";
  EXPECT_EQ(code_of([&] { t.transcribe({"ok", EngineKind::Subprocess, (d / "ok").string(), 5}, gone); }),
            ErrorCode::EngineFailure);
}

TEST(SubprocessEngineTest, ConcurrencyLimitDefaultsToOne) {
  TempDir d;
  std::filesystem::create_directories(d / "active");
  test::write_script(d / "eng", "a=" + (d / "active").string() + R"(
touch "$a/$$"; ls "$a" | wc -l >> "$a/../counts"; sleep 0.1; rm "$a/$$"; echo ok
)");
  SystemClock clock;
  Transcriber t(clock);
  const auto a = asset(d, "v");
  std::vector<std::thread> threads;
  for (int i = 0; i < 4; ++i) {
    threads.emplace_back([&] { t.transcribe({"eng", EngineKind::Subprocess, (d / "eng").string(), 10}, a); });
  }
  for (auto& th : threads) th.join();
  std::istringstream counts(test::read_file(d / "counts"));
  int n = 0, peak = 0;
  while (counts >> n) peak = std::max(peak, n);
  EXPECT_EQ(peak, 1);
}

TEST(HttpEngineTest, ContractAndFailures) {
  httplib::Server server;
  std::string received;
  server.Post("/asr", [&](const httplib::Request& req, httplib::Response& res) {
    received = req.body;
    res.set_content(R"({"text": "hello from the server"})", "application/json");
  });
  server.Post("/broken", [](const httplib::Request&, httplib::Response& res) { res.status = 503; });
  server.Post("/garbage", [](const httplib::Request&, httplib::Response& res) { res.set_content("<html>", "text/html"); });
  server.Post("/slow", [](const httplib::Request&, httplib::Response& res) {
    std::this_thread::sleep_for(std::chrono::milliseconds(1500));
    res.set_content(R"({"text": "late"})", "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread th([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  const std::string base = "http://127.0.0.1:" + std::to_string(port);

  TempDir d;
  SystemClock clock;
  Transcriber t(clock);
  const auto a = asset(d, "v");
  EXPECT_EQ(t.transcribe({"h", EngineKind::Http, base + "/asr", 5}, a).text, "hello from the server");
  EXPECT_EQ(received, test::read_file(a.file_path));
  EXPECT_EQ(code_of([&] { t.transcribe({"h", EngineKind::Http, base + "/broken", 5}, a); }), ErrorCode::EngineFailure);
  EXPECT_EQ(code_of([&] { t.transcribe({"h", EngineKind::Http, base + "/garbage", 5}, a); }),
            ErrorCode::EngineFailure);
  EXPECT_EQ(code_of([&] { t.transcribe({"h", EngineKind::Http, base + "/slow", 1}, a); }), ErrorCode::EngineTimeout);
  server.stop();
  th.join();
}

}  // namespace
}  // namespace asrh::engine
