#include <regex>
#include <sstream>

#include <gtest/gtest.h>

#include "agentic/backends.hpp"
#include "agentic/errors.hpp"
#include "agentic/runlog.hpp"
#include "tempdir.hpp"

using namespace agentic;
using namespace agentic::orch;

namespace {

std::vector<EpisodeRecord> sample_run(std::uint64_t seed, double duration = 600.0) {
  plantio::SimulatedPlant plant({}, plantio::ClockMode::Lockstep);
  backends::ScriptedBackend backend(backends::ScriptedPolicy::flip(0.4, 0.5, seed),
                                    backends::LatencyModel::lognormal(1.5, 0.3, seed));
  RunConfig cfg;
  cfg.duration = duration;
  return ControlLoop(cfg, plant, backend, {}).run();
}

std::string write_log(const RunConfig& cfg, const std::vector<EpisodeRecord>& episodes) {
  std::string out = header_line(cfg, nlohmann::ordered_json::object()) + "\n";
  for (const auto& e : episodes) out += episode_to_line(e) + "\n";
  return out;
}

}  // namespace

TEST(RunLog, ParseEmitFixpoint) {
  RunConfig cfg;
  cfg.duration = 600.0;
  const auto episodes = sample_run(4);
  const std::string first = write_log(cfg, episodes);
  std::istringstream in(first);
  const RunLog log = parse_run_log(in);
  ASSERT_EQ(log.episodes.size(), episodes.size());
  EXPECT_EQ(write_log(log.config, log.episodes), first);
}

TEST(RunLog, EpisodeLineFieldOrder) {
  const auto episodes = sample_run(1, 20.0);
  const std::string line = episode_to_line(episodes.front());
  EXPECT_EQ(line.rfind(R"({"type":"episode","index":0,"t_start":0.000000,"t_sensor":23.00,"prev_action":"OFF","attempts":[)", 0), 0u);
  const auto keys = {"\"applied\"", "\"override\"", "\"t_end\""};
  std::size_t last = 0;
  for (const char* key : keys) {
    const auto pos = line.find(key);
    ASSERT_NE(pos, std::string::npos) << key;
    EXPECT_GT(pos, last);
    last = pos;
  }
}

TEST(RunLog, HeaderCarriesConfigAndDigest) {
  RunConfig cfg;
  cfg.max_reprompts = 2;
  cfg.validator_mode = ValidatorMode::Twin;
  cfg.twin_validation.envelope = {-std::numeric_limits<double>::infinity(), 30.0};
  const auto header = nlohmann::json::parse(header_line(cfg, {{"name", "x"}}));
  EXPECT_EQ(header["type"], "header");
  EXPECT_EQ(header["format"], kRunLogFormat);
  const std::string digest = header["config_digest"];
  EXPECT_TRUE(std::regex_match(digest, std::regex("fnv1a64:[0-9a-f]{16}"))) << digest;
  EXPECT_TRUE(header["run"]["validator"]["envelope"][0].is_null());
  const RunConfig back = run_config_from_json(header["run"]);
  EXPECT_EQ(nlohmann::json::parse(header_line(back, {{"name", "x"}}))["config_digest"], digest);
  RunConfig other = cfg;
  other.max_reprompts = 3;
  EXPECT_NE(nlohmann::json::parse(header_line(other, {{"name", "x"}}))["config_digest"], digest);
  EXPECT_NE(nlohmann::json::parse(header_line(cfg, {{"name", "y"}}))["config_digest"], digest);
  EXPECT_EQ(config_digest(""), "fnv1a64:cbf29ce484222325");
}

TEST(RunLog, WriterFlushesEveryEpisode) {
  testfs::TempDir dir;
  const auto path = dir / "run.jsonl";
  const auto episodes = sample_run(2, 60.0);
  RunLogWriter writer(path, RunConfig{});
  writer.write(episodes[0]);
  const std::string partial = testfs::read_file(path);
  EXPECT_EQ(std::count(partial.begin(), partial.end(), '\n'), 2);
}

TEST(RunLog, MalformedLinesNameTheLine) {
  RunConfig cfg;
  const auto episodes = sample_run(3, 60.0);
  std::string text = write_log(cfg, episodes);
  const auto second_nl = text.find('\n', text.find('\n') + 1);
  text.insert(second_nl + 1, "{not json}\n");
  std::istringstream in(text);
  try {
    parse_run_log(in);
    FAIL() << "expected LogFormatError";
  } catch (const LogFormatError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
}

TEST(RunLog, RejectsMissingHeaderAndIndexGaps) {
  std::istringstream empty("");
  EXPECT_THROW(parse_run_log(empty), LogFormatError);

  RunConfig cfg;
  auto episodes = sample_run(5, 60.0);
  ASSERT_GE(episodes.size(), 3u);
  episodes.erase(episodes.begin() + 1);
  std::istringstream gap(write_log(cfg, episodes));
  EXPECT_THROW(parse_run_log(gap), LogFormatError);

  std::istringstream no_header(episode_to_line(sample_run(5, 10.0)[0]) + "\n");
  EXPECT_THROW(parse_run_log(no_header), LogFormatError);
}

TEST(RunLog, MissingFileIsIoError) { EXPECT_THROW(read_run_log("/nonexistent/run.jsonl"), IoError); }
