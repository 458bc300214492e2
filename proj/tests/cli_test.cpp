#include <sys/wait.h>

#include <cstdlib>

#include <gtest/gtest.h>

#include "fixtures.hpp"

namespace {

namespace fs = std::filesystem;
using testutil::TempDir;

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

// Runs the CLI through the shell, capturing both streams.
RunResult run(const TempDir& tmp, const std::string& args, const std::string& env = {}) {
  const auto out = tmp / "stdout.txt";
  const auto err = tmp / "stderr.txt";
  const std::string cmd = env + " '" + std::string(MARAUG_CLI_PATH) + "' " + args + " > '" + out.string() +
                          "' 2> '" + err.string() + "'";
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = maraug::read_text_file(out);
  r.err = maraug::read_text_file(err);
  return r;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

void write_default_params(const fs::path& file) {
  maraug::write_text_file(file, maraug::params_to_json({}).dump(2));
}

TEST(CliTest, AugmentDoublesManifest) {
  TempDir tmp;
  const auto manifest = testutil::write_dataset(tmp.path() / "ds", 10, 16, 12);
  write_default_params(tmp / "params.json");
  const auto r = run(tmp, "augment --manifest " + q(manifest) + " --params " + q(tmp / "params.json") +
                              " --out " + q(tmp / "out"));
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto extended = maraug::load_manifest(tmp / "out/manifest.json");
  EXPECT_EQ(extended.records.size(), 20u);
  EXPECT_TRUE(maraug::validate_manifest(extended).empty());
  EXPECT_TRUE(fs::exists(tmp / "out/plan.json"));
}

TEST(CliTest, AugmentMissingParamsNamesPath) {
  TempDir tmp;
  const auto manifest = testutil::write_dataset(tmp.path() / "ds", 2, 8, 8);
  const auto r = run(tmp, "augment --manifest " + q(manifest) + " --params " + q(tmp / "absent-params.json") +
                              " --out " + q(tmp / "out"));
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.err.find("absent-params.json"), std::string::npos) << r.err;
}

TEST(CliTest, AugmentMissingImageNamesFile) {
  TempDir tmp;
  const auto manifest = testutil::write_dataset(tmp.path() / "ds", 3, 8, 8);
  fs::remove(tmp / "ds/images/img0001.png");
  write_default_params(tmp / "params.json");
  const auto r = run(tmp, "augment --manifest " + q(manifest) + " --params " + q(tmp / "params.json") +
                              " --out " + q(tmp / "out"));
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.err.find("img0001.png"), std::string::npos) << r.err;
}

TEST(CliTest, AugmentIsDeterministicAcrossRunsAndWorkers) {
  TempDir tmp;
  const auto manifest = testutil::write_dataset(tmp.path() / "ds", 8, 24, 24);
  write_default_params(tmp / "params.json");
  const std::string common = "--manifest " + q(manifest) + " --params " + q(tmp / "params.json");
  ASSERT_EQ(run(tmp, "augment " + common + " --out " + q(tmp / "a") + " --seed 7 --workers 1").exit_code, 0);
  ASSERT_EQ(run(tmp, "--seed 7 --workers 3 augment " + common + " --out " + q(tmp / "b")).exit_code, 0);
  ASSERT_EQ(run(tmp, "augment " + common + " --out " + q(tmp / "c"), "MARAUG_SEED=7").exit_code, 0);
  ASSERT_EQ(run(tmp, "augment " + common + " --out " + q(tmp / "d") + " --seed 8").exit_code, 0);
  const auto a = testutil::tree_digest(tmp / "a");
  EXPECT_EQ(a, testutil::tree_digest(tmp / "b"));
  EXPECT_EQ(a, testutil::tree_digest(tmp / "c"));
  EXPECT_NE(a, testutil::tree_digest(tmp / "d"));
}

TEST(CliTest, SplitIsDeterministicAndValidateFlagsLeakage) {
  TempDir tmp;
  const auto manifest = testutil::write_dataset(tmp.path() / "ds", 20, 8, 8);
  ASSERT_EQ(run(tmp, "split --manifest " + q(manifest) + " --out " + q(tmp / "s1.json")).exit_code, 0);
  ASSERT_EQ(run(tmp, "split --manifest " + q(manifest) + " --out " + q(tmp / "s2.json")).exit_code, 0);
  EXPECT_EQ(maraug::read_text_file(tmp / "s1.json"), maraug::read_text_file(tmp / "s2.json"));

  auto r = run(tmp, "validate --manifest " + q(tmp / "s1.json"));
  EXPECT_EQ(r.exit_code, 0) << r.out;

  auto leaked = maraug::load_manifest(tmp / "s1.json");
  leaked.records[1].group_id = leaked.records[0].group_id;
  leaked.records[0].split = maraug::Split::Train;
  leaked.records[1].split = maraug::Split::Test;
  maraug::save_manifest(leaked, tmp / "leaked.json");
  r = run(tmp, "validate --manifest " + q(tmp / "leaked.json"));
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.out.find("Leakage"), std::string::npos) << r.out;

  r = run(tmp, "split --manifest " + q(manifest) + " --ratios 0.5 0.5 0.5");
  EXPECT_EQ(r.exit_code, 1);
}

TEST(CliTest, EvalCompareReport) {
  TempDir tmp;
  const auto manifest = testutil::write_dataset(tmp.path() / "ds", 6, 8, 8);
  auto m = maraug::load_manifest(manifest);
  for (auto& rec : m.records) {
    rec.split = maraug::Split::Test;
    std::vector<maraug::Detection> dets;
    for (const auto& a : maraug::parse_label_file(maraug::read_text_file(m.resolve(rec.label_path)))) {
      dets.push_back({a.class_id, a.box, 0.9});
    }
    maraug::write_text_file(tmp / "perfect" / (rec.image_id + ".txt"), maraug::write_prediction_file(dets));
  }
  maraug::save_manifest(m, tmp / "test.json");
  fs::create_directories(tmp / "empty");

  auto r = run(tmp, "eval --manifest " + q(tmp / "test.json") + " --preds " + q(tmp / "perfect") + " --out " +
                        q(tmp / "perfect.json") + " --note '52 epochs and 32 batches'");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_NE(r.out.find("| perfect | Humans | 1.00 | 1.00 | 1.00 | 1.00 | 1.00 |"), std::string::npos) << r.out;
  r = run(tmp, "eval --manifest " + q(tmp / "test.json") + " --preds " + q(tmp / "empty") + " --out " +
                   q(tmp / "empty.json"));
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_EQ(maraug::load_report(tmp / "empty.json").rows.at(maraug::ReportGroup::All).recall, 0.0);
  EXPECT_EQ(maraug::load_report(tmp / "perfect.json").metadata.notes.at(0), "52 epochs and 32 batches");

  r = run(tmp, "compare --baseline " + q(tmp / "empty.json") + " --treatment " + q(tmp / "perfect.json") +
                   " --format csv");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_NE(r.out.find("Humans,Recall,0.00,1.00,+1.00,+100.0,n/a"), std::string::npos) << r.out;

  r = run(tmp, "report --runs " + q(tmp / "empty.json") + " " + q(tmp / "perfect.json") + " --out " +
                   q(tmp / "table.md"));
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto table = maraug::read_text_file(tmp / "table.md");
  EXPECT_NE(table.find("| empty | All | 0.00 |"), std::string::npos) << table;
  EXPECT_NE(table.find("| perfect | Inanimate objects | 1.00 |"), std::string::npos) << table;

  r = run(tmp, "eval --manifest " + q(tmp / "test.json") + " --preds " + q(tmp / "nowhere"));
  EXPECT_EQ(r.exit_code, 1);
}

TEST(CliTest, ComparePublishedRecalls) {
  TempDir tmp;
  auto make = [&](const std::string& label, double recall) {
    maraug::RunReport r;
    r.label = label;
    const maraug::ClassMetrics m{0.9, 0.9, 0.9, 0.9, 0.6, 0};
    auto h = m;
    h.recall = recall;
    r.rows = {{maraug::ReportGroup::All, m}, {maraug::ReportGroup::Humans, h}, {maraug::ReportGroup::Inanimate, m}};
    maraug::save_report(r, tmp / (label + ".json"));
  };
  make("base", 0.87);
  make("aug", 0.91);
  const auto r = run(tmp, "compare --baseline " + q(tmp / "base.json") + " --treatment " + q(tmp / "aug.json"));
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_NE(r.out.find("| Humans | Recall | 0.87 | 0.91 | +0.04 |"), std::string::npos) << r.out;
}

TEST(CliTest, RejectsBadInvocations) {
  TempDir tmp;
  EXPECT_EQ(run(tmp, "").exit_code, 1);
  EXPECT_EQ(run(tmp, "validate --manifest x.json --bogus").exit_code, 1);
  EXPECT_EQ(run(tmp, "frobnicate").exit_code, 1);
  EXPECT_EQ(run(tmp, "--seed notanumber validate --manifest x.json").exit_code, 1);
  EXPECT_EQ(run(tmp, "--workers 0 validate --manifest x.json").exit_code, 1);
  EXPECT_EQ(run(tmp, "validate --manifest " + q(tmp / "missing.json")).exit_code, 1);
  EXPECT_EQ(run(tmp, "--help").exit_code, 0);
}

}  // namespace
