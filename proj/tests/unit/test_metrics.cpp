#include <gtest/gtest.h>

#include "agentic/errors.hpp"
#include "agentic/metrics.hpp"

using namespace agentic;
using namespace agentic::metrics;

namespace {

const agents::Thresholds kTh{};

orch::EpisodeRecord episode(int index, double t, double temp, std::vector<bool> passes) {
  orch::EpisodeRecord e;
  e.index = index;
  e.t_start = t;
  e.t_sensor = temp;
  for (std::size_t i = 0; i < passes.size(); ++i) {
    orch::AttemptRecord a;
    a.attempt_index = static_cast<int>(i);
    a.raw_response = "ACTION: ON";
    a.parsed = HeaterAction::On;
    a.verdict = agents::Verdict{passes[i], HeaterAction::On, passes[i] ? "ok" : "wrong"};
    e.attempts.push_back(a);
  }
  e.overridden = !passes.back();
  e.t_end = t + 1.0;
  return e;
}

}  // namespace

TEST(Accuracy, CountsToPercentages) {
  auto m = accuracy_from_counts(423, 254, 107);
  EXPECT_DOUBLE_EQ(m.accuracy_first_pass, 60.05);
  EXPECT_DOUBLE_EQ(m.accuracy_with_reprompts, 85.34);
  EXPECT_EQ(m.fails, 169);
  EXPECT_EQ(m.overrides, 62);
  m = accuracy_from_counts(128, 120, 3);
  EXPECT_DOUBLE_EQ(m.accuracy_first_pass, 93.75);
  EXPECT_DOUBLE_EQ(m.accuracy_with_reprompts, 96.09);
  EXPECT_THROW(accuracy_from_counts(0, 0, 0), InvalidInput);
  EXPECT_THROW(accuracy_from_counts(10, 8, 3), InvalidInput);
}

TEST(Accuracy, FromEpisodes) {
  std::vector<orch::EpisodeRecord> log{
      episode(0, 0, 26, {true}),
      episode(1, 1, 26, {false, true}),
      episode(2, 2, 26, {false, false, false, true}),
      episode(3, 3, 26, {false, false, false, false}),
  };
  const auto m = accuracy_metrics(log);
  EXPECT_EQ(m.samples, 4);
  EXPECT_EQ(m.passes, 1);
  EXPECT_EQ(m.fails, 3);
  EXPECT_EQ(m.pass_after_reprompts, 2);
  EXPECT_EQ(m.overrides, 1);
  EXPECT_DOUBLE_EQ(m.accuracy_first_pass, 25.0);
  EXPECT_DOUBLE_EQ(m.accuracy_with_reprompts, 75.0);
  EXPECT_THROW(accuracy_metrics(std::vector<orch::EpisodeRecord>{}), LogFormatError);
}

TEST(Control, ZeroOrderHoldExample) {
  const std::vector<ControlSample> s{{0, 26}, {10, 28}, {20, 28}, {30, 26}};
  const auto m = control_metrics(s, kTh, 40.0);
  EXPECT_DOUBLE_EQ(m.time_above, 20.0);
  EXPECT_DOUBLE_EQ(m.time_below, 0.0);
  EXPECT_DOUBLE_EQ(m.time_outside, 20.0);
  EXPECT_DOUBLE_EQ(m.avg_deviation, 1.0);
  EXPECT_DOUBLE_EQ(m.midpoint, 26.0);
}

TEST(Control, ConstantInsideBand) {
  const std::vector<ControlSample> s{{0, 26}, {50, 26}};
  const auto m = control_metrics(s, kTh, 100.0);
  EXPECT_DOUBLE_EQ(m.time_outside, 0.0);
  EXPECT_DOUBLE_EQ(m.avg_deviation, 0.0);
}

TEST(Control, SingleSample) {
  const std::vector<ControlSample> s{{0, 28}};
  const auto m = control_metrics(s, kTh, 100.0);
  EXPECT_DOUBLE_EQ(m.time_above, 100.0);
  EXPECT_DOUBLE_EQ(m.avg_deviation, 2.0);
}

TEST(Control, ClampsToRunDuration) {
  const std::vector<ControlSample> s{{0, 24}, {90, 28}, {120, 28}};
  const auto m = control_metrics(s, kTh, 100.0);
  EXPECT_DOUBLE_EQ(m.time_below, 90.0);
  EXPECT_DOUBLE_EQ(m.time_above, 10.0);
  EXPECT_DOUBLE_EQ(m.time_outside, m.time_above + m.time_below);
}

TEST(Control, UnorderedTimesRejected) {
  const std::vector<ControlSample> s{{0, 26}, {10, 28}, {5, 26}};
  EXPECT_THROW(control_metrics(s, kTh, 40.0), LogFormatError);
}

namespace {

Report sample_report() {
  Report r;
  r.accuracy = accuracy_from_counts(423, 254, 107);
  const std::vector<ControlSample> s{{0, 23.5}, {100, 27.9}, {700, 25.4}, {1300, 24.2}};
  r.control = control_metrics(s, kTh, 2400.0);
  r.thresholds = kTh;
  r.duration = 2400.0;
  return r;
}

}  // namespace

TEST(ReportRendering, TableLabels) {
  const std::string table = render_report(sample_report(), ReportFormat::Table);
  EXPECT_NE(table.find("Accuracy - reprompts"), std::string::npos);
  EXPECT_NE(table.find("Accuracy- first pass"), std::string::npos);
  EXPECT_NE(table.find("60.05"), std::string::npos);
  EXPECT_NE(table.find("Time outside range"), std::string::npos);
}

TEST(ReportRendering, CsvHeaderIsStable) {
  const std::string a = render_report(sample_report(), ReportFormat::Csv);
  const std::string b = render_report(sample_report(), ReportFormat::Csv);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.substr(0, a.find('\n')), std::string(kCsvHeader));
  const std::string data = a.substr(a.find('\n') + 1);
  EXPECT_EQ(data.rfind("423,254,169,107,62,60.05,85.34,", 0), 0u);
}

TEST(ReportRendering, CsvAndMachineAgree) {
  const Report r = sample_report();
  const Report from_csv = parse_csv_report(render_report(r, ReportFormat::Csv));
  const Report from_machine = parse_machine_report(render_report(r, ReportFormat::Machine));
  EXPECT_EQ(render_report(from_csv, ReportFormat::Csv), render_report(from_machine, ReportFormat::Csv));
  EXPECT_EQ(from_csv.accuracy.samples, 423);
  EXPECT_DOUBLE_EQ(from_machine.accuracy.accuracy_with_reprompts, 85.34);
  EXPECT_DOUBLE_EQ(from_machine.control.time_outside,
                   from_machine.control.time_above + from_machine.control.time_below);
}

TEST(ReportRendering, MachineRoundTrip) {
  const Report r = sample_report();
  const std::string text = render_report(r, ReportFormat::Machine);
  EXPECT_EQ(render_report(parse_machine_report(text), ReportFormat::Machine), text);
  EXPECT_THROW(parse_machine_report("{]"), LogFormatError);
}

TEST(PointsDump, OneLinePerEpisode) {
  std::vector<orch::EpisodeRecord> log{episode(0, 0, 23.0, {true}), episode(1, 5.5, 23.456, {true})};
  log[1].applied = HeaterAction::On;
  EXPECT_EQ(points_dump(log), "0.000000,23.00,OFF\n5.500000,23.46,ON\n");
}
