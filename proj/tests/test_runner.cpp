#include "sagui/runner.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace {

using namespace sagui;
namespace fs = std::filesystem;

/// Fresh scratch directory per test, removed afterwards.
class RunnerTest : public ::testing::Test {
protected:
    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        root_ = fs::temp_directory_path() / (std::string("sagui_") + info->test_suite_name() + "_" + info->name());
        fs::remove_all(root_);
        fs::create_directories(root_);
    }
    void TearDown() override { fs::remove_all(root_); }

    fs::path root_;

    RunRequest request(const std::string& command, const std::string& out) {
        RunRequest r;
        r.command = command;
        r.out_dir = (root_ / out).string();
        r.overrides = {{"guide.epochs", "2"},         {"guide.steps_per_epoch", "200"}, {"guide.eval_episodes", "3"},
                       {"student.epochs", "2"},       {"student.steps_per_epoch", "200"},
                       {"student.eval_episodes", "3"}};
        return r;
    }

    int run_quiet(const RunRequest& r, std::string* errors = nullptr) {
        std::ostringstream log, err;
        const int code = run(r, log, err);
        if (errors) *errors = err.str();
        return code;
    }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

TEST(ParseOverride, SplitsAndTrims) {
    EXPECT_EQ(parse_override("guide.epochs = 7"), std::make_pair(std::string("guide.epochs"), std::string("7")));
    EXPECT_EQ(parse_override("grid.hazards=1,2;2,1"),
              std::make_pair(std::string("grid.hazards"), std::string("1,2;2,1")));
    EXPECT_THROW(parse_override("guide.epochs"), ConfigError);
}

TEST(ResolveConfig, Precedence) {
    const auto defaults = resolve_config(KeyValues{}, {});
    EXPECT_EQ(defaults.get("run.profile"), "grid");
    EXPECT_EQ(defaults.get("guide.hidden"), "none");
    EXPECT_EQ(defaults.get("nav.horizon_cap"), "1000");

    const auto file = KeyValues::parse("[run]\nprofile = nav\nseed = 3\n[nav]\nhalf_width = 3 # wider\n");
    const auto from_file = resolve_config(file, {});
    EXPECT_EQ(from_file.get("run.env"), "nav");
    EXPECT_EQ(from_file.get("nav.horizon_cap"), "100");
    EXPECT_EQ(from_file.get("nav.half_width"), "3");
    EXPECT_EQ(from_file.get("run.seed"), "3");

    const auto overridden = resolve_config(file, {{"run.seed", "5"}, {"nav.horizon_cap", "40"}, {"run.profile", "full"}});
    EXPECT_EQ(overridden.get("run.seed"), "5");
    EXPECT_EQ(overridden.get("nav.horizon_cap"), "40");
    EXPECT_EQ(overridden.get("run.profile"), "full");
    EXPECT_EQ(overridden.get("guide.epochs"), "50");
}

TEST(ResolveConfig, UnknownKeyListsValidKeys) {
    try {
        resolve_config(KeyValues{}, {{"guide.learning_rate", "0.1"}});
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("guide.learning_rate"), std::string::npos);
        EXPECT_NE(msg.find("guide.lr_policy"), std::string::npos);
        EXPECT_NE(msg.find("student.p_student_buffer"), std::string::npos);
    }
    EXPECT_THROW(resolve_config(KeyValues{}, {{"run.profile", "huge"}}), ConfigError);
}

TEST(ResolveConfig, WrittenConfigParsesBack) {
    const auto kv = resolve_config(KeyValues{}, {{"grid.hazards", "1,1"}});
    std::ostringstream out;
    write_config(out, kv);
    const auto back = KeyValues::parse(out.str());
    EXPECT_EQ(back.entries(), kv.entries());
}

TEST(ValidateConfig, RejectsBadValues) {
    for (auto bad : std::vector<std::pair<std::string, std::string>>{{"guide.optimizer", "rmsprop"},
                                                                    {"student.is_low", "1.5"},
                                                                    {"grid.source_threshold", "3"},
                                                                    {"guide.epochs", "0"},
                                                                    {"student.sampling", "mixed"},
                                                                    {"run.window", "0"},
                                                                    {"guide.hidden", "32,x"},
                                                                    {"grid.slip_prob", "abc"}})
        EXPECT_THROW(validate_config(resolve_config(KeyValues{}, {bad})), ConfigError) << bad.first;
}

TEST_F(RunnerTest, UnknownKeyExitsOneAndWritesNothing) {
    auto r = request("train-guide", "out");
    r.overrides.push_back({"guide.typo", "1"});
    std::string err;
    EXPECT_EQ(run_quiet(r, &err), exit_config);
    EXPECT_NE(err.find("guide.typo"), std::string::npos);
    EXPECT_FALSE(fs::exists(root_ / "out"));
}

TEST_F(RunnerTest, MissingGuideExitsOneAndWritesNothing) {
    auto r = request("train-student", "out");
    r.guide_path = (root_ / "absent.ckpt").string();
    EXPECT_EQ(run_quiet(r), exit_config);
    EXPECT_FALSE(fs::exists(root_ / "out"));
}

TEST_F(RunnerTest, UnknownSubcommandExitsOne) {
    EXPECT_EQ(run_quiet(request("train", "out")), exit_config);
    EXPECT_FALSE(fs::exists(root_ / "out"));
}

TEST_F(RunnerTest, GuideThenStudentThenEvaluateThenReport) {
    auto guide = request("train-guide", "guide");
    ASSERT_EQ(run_quiet(guide), exit_ok);
    for (const char* f : {"config.resolved.ini", "epochs.csv", "guide.ckpt", "guide.ckpt.meta", "summary.csv"})
        EXPECT_TRUE(fs::exists(root_ / "guide" / f)) << f;
    std::ifstream epochs(root_ / "guide" / "epochs.csv");
    EXPECT_EQ(read_epoch_csv(epochs).size(), 2u);
    EXPECT_NE(slurp(root_ / "guide" / "summary.csv").find("exact_source_cost"), std::string::npos);
    const auto resolved = KeyValues::parse(slurp(root_ / "guide" / "config.resolved.ini"));
    EXPECT_EQ(resolved.get("guide.epochs"), "2");

    auto student = request("train-student", "student");
    student.guide_path = (root_ / "guide" / "guide.ckpt").string();
    ASSERT_EQ(run_quiet(student), exit_ok);
    EXPECT_TRUE(fs::exists(root_ / "student" / "student.ckpt"));
    EXPECT_NE(slurp(root_ / "student" / "student.ckpt.meta").find("guide_hash"), std::string::npos);

    auto scratch = request("train-student", "scratch");
    scratch.guide_path = student.guide_path;
    scratch.overrides.push_back({"student.sampling", "stusam"});
    scratch.overrides.push_back({"student.regularization", "none"});
    ASSERT_EQ(run_quiet(scratch), exit_ok);

    auto eval = request("evaluate", "eval");
    eval.checkpoint_path = (root_ / "student" / "student.ckpt").string();
    ASSERT_EQ(run_quiet(eval), exit_ok);
    EXPECT_FALSE(fs::exists(root_ / "eval" / "epochs.csv"));
    const std::string episodes = slurp(root_ / "eval" / "episodes.csv");
    EXPECT_EQ(std::count(episodes.begin(), episodes.end(), '\n'), 4);

    auto report = request("report", "report");
    report.scratch_csv = (root_ / "scratch" / "epochs.csv").string();
    report.transfer_csv = (root_ / "student" / "epochs.csv").string();
    report.overrides.push_back({"run.jump_start_k", "2"});
    report.overrides.push_back({"run.window", "1"});
    ASSERT_EQ(run_quiet(report), exit_ok);
    const std::string summary = slurp(root_ / "report" / "summary.csv");
    EXPECT_NE(summary.find("safety_jump_start"), std::string::npos);

    std::ifstream sc(report.scratch_csv), tc(report.transfer_csv);
    const auto s = read_epoch_csv(sc), t = read_epoch_csv(tc);
    const double expected = safety_jump_start(column(s, &EpochRecord::cost_return_pib),
                                              column(t, &EpochRecord::cost_return_pib), 2.0, 2);
    EXPECT_NE(summary.find("safety_jump_start," + detail::format_double(expected)), std::string::npos) << summary;
}

TEST_F(RunnerTest, SameSeedGivesIdenticalEpochCsv) {
    ASSERT_EQ(run_quiet(request("train-guide", "a")), exit_ok);
    ASSERT_EQ(run_quiet(request("train-guide", "b")), exit_ok);
    EXPECT_EQ(slurp(root_ / "a" / "epochs.csv"), slurp(root_ / "b" / "epochs.csv"));
    EXPECT_EQ(slurp(root_ / "a" / "guide.ckpt"), slurp(root_ / "b" / "guide.ckpt"));
    auto other = request("train-guide", "c");
    other.overrides.push_back({"run.seed", "1"});
    ASSERT_EQ(run_quiet(other), exit_ok);
    EXPECT_NE(slurp(root_ / "a" / "epochs.csv"), slurp(root_ / "c" / "epochs.csv"));
}

TEST_F(RunnerTest, VerifyAbstractionPassesOnShippedGrid) {
    auto r = request("verify-abstraction", "verify");
    r.policies = 5;
    ASSERT_EQ(run_quiet(r), exit_ok);
    const std::string summary = slurp(root_ / "verify" / "summary.csv");
    EXPECT_NE(summary.find("qc_irrelevance,true"), std::string::npos) << summary;
}

TEST_F(RunnerTest, UnsafeGuideIsAVerificationFailure) {
    ASSERT_EQ(run_quiet(request("train-guide", "guide")), exit_ok);
    auto r = request("verify-abstraction", "verify");
    r.policies = 2;
    r.guide_path = (root_ / "guide" / "guide.ckpt").string();
    // With a zero source threshold any guide that touches a hazard fails the premise.
    r.overrides.push_back({"grid.source_threshold", "0"});
    EXPECT_EQ(run_quiet(r), exit_verification);
    EXPECT_NE(slurp(root_ / "verify" / "summary.csv").find("theorem1,premise_false"), std::string::npos);
}

TEST_F(RunnerTest, VerifyAbstractionNeedsGrid) {
    auto r = request("verify-abstraction", "verify");
    r.overrides.push_back({"run.profile", "nav"});
    EXPECT_EQ(run_quiet(r), exit_config);
}

TEST_F(RunnerTest, AblateNeedsAtLeastKStudentEpochs) {
    auto r = request("ablate", "ablate");
    EXPECT_EQ(run_quiet(r), exit_config);
    EXPECT_FALSE(fs::exists(root_ / "ablate"));
}

TEST_F(RunnerTest, DivergenceExitsTwoWithDump) {
    auto r = request("train-guide", "div");
    r.overrides.push_back({"guide.optimizer", "sgd"});
    r.overrides.push_back({"guide.lr_reward", "1e300"});
    r.overrides.push_back({"guide.lr_cost", "1e300"});
    EXPECT_EQ(run_quiet(r), exit_divergence);
    EXPECT_TRUE(fs::exists(root_ / "div" / "divergence.txt"));
}

} // namespace
