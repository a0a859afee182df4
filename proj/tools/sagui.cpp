// Command-line runner: sagui <subcommand> [--config FILE] [--set key=value ...] [--out DIR]

#include "sagui/runner.hpp"

#include <CLI11.hpp>

int main(int argc, char** argv) {
    CLI::App app{"Guided safe exploration experiments"};
    app.require_subcommand(1);

    sagui::RunRequest req;
    std::vector<std::string> sets;

    auto common = [&](CLI::App* sub) {
        sub->add_option("-c,--config", req.config_path, "key = value configuration file");
        sub->add_option("-s,--set", sets, "override, key=value (repeatable)");
        sub->add_option("-o,--out", req.out_dir, "output directory")->capture_default_str();
    };

    auto* guide = app.add_subcommand("train-guide", "train a guide on the source task");
    common(guide);
    auto* student = app.add_subcommand("train-student", "train a student with a frozen guide");
    common(student);
    student->add_option("-g,--guide", req.guide_path, "guide checkpoint")->required();
    auto* verify = app.add_subcommand("verify-abstraction", "exact abstraction and transfer checks on the grid");
    common(verify);
    verify->add_option("-g,--guide", req.guide_path, "optional guide checkpoint for the transfer check");
    verify->add_option("-n,--policies", req.policies, "random source policies")->capture_default_str();
    auto* oracle = app.add_subcommand("oracle", "exact constrained optimum of the grid target");
    common(oracle);
    auto* evaluate = app.add_subcommand("evaluate", "evaluate a checkpoint");
    common(evaluate);
    evaluate->add_option("-k,--checkpoint", req.checkpoint_path, "checkpoint to evaluate")->required();
    evaluate->add_option("-r,--role", req.role, "guide (source task) or student (target task)")
        ->check(CLI::IsMember({"guide", "student"}))
        ->capture_default_str();
    auto* ablate = app.add_subcommand("ablate", "guide x regularization x sampling matrix");
    common(ablate);
    auto* report = app.add_subcommand("report", "transfer metrics from two per-epoch CSVs");
    common(report);
    report->add_option("--scratch", req.scratch_csv, "per-epoch CSV of the from-scratch run")->required();
    report->add_option("--transfer", req.transfer_csv, "per-epoch CSV of the transfer run")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? sagui::exit_ok : sagui::exit_config;
    }

    req.command = app.get_subcommands().front()->get_name();
    try {
        for (const auto& s : sets) req.overrides.push_back(sagui::parse_override(s));
    } catch (const sagui::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return sagui::exit_config;
    }
    return sagui::run(req);
}
