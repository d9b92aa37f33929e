#include <gtest/gtest.h>

#include "asrh/process.hpp"

namespace asrh {
namespace {

TEST(ProcessTest, CapturesOutputAndExitCode) {
  auto r = run_process({"sh", "-c", "printf out; printf err >&2; exit 3"});
  EXPECT_FALSE(r.exec_failed);
  EXPECT_FALSE(r.timed_out);
  EXPECT_EQ(r.exit_code, 3);
  EXPECT_EQ(r.out, "out");
  EXPECT_EQ(r.err, "err");
}

TEST(ProcessTest, LargeOutputDoesNotDeadlock) {
  auto r = run_process({"sh", "-c", "head -c 1000000 /dev/zero; head -c 500000 /dev/zero >&2"});
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_EQ(r.out.size(), 1000000u);
  EXPECT_EQ(r.err.size(), 500000u);
}

TEST(ProcessTest, TimeoutKillsProcessGroup) {
  auto r = run_process({"sh", "-c", "sleep 30 & sleep 30"}, std::chrono::milliseconds(200));
  EXPECT_TRUE(r.timed_out);
  EXPECT_EQ(r.exit_code, -1);
}

TEST(ProcessTest, MissingProgram) {
  auto r = run_process({"asrh-no-such-program-xyz"});
  EXPECT_TRUE(r.exec_failed);
  EXPECT_FALSE(find_executable("asrh-no-such-program-xyz").has_value());
  EXPECT_TRUE(find_executable("sh").has_value());
}

TEST(ProcessTest, SplitCommand) {
  EXPECT_EQ(split_command("whisper --model 'large v2' \"a b\"  c"),
            (std::vector<std::string>{"whisper", "--model", "large v2", "a b", "c"}));
  EXPECT_TRUE(split_command("   ").empty());
}

}  // namespace
}  // namespace asrh
