#pragma once

#include "sagui/abstraction.hpp"
#include "sagui/checkpoint.hpp"
#include "sagui/config.hpp"
#include "sagui/constrained_optimum.hpp"

#include <filesystem>
#include <iomanip>
#include <iostream>

namespace sagui {

enum ExitCode : int { exit_ok = 0, exit_config = 1, exit_divergence = 2, exit_verification = 3 };

/// Thrown by a subcommand whose checks ran to completion but failed.
struct VerificationFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// One CLI invocation. Paths are only read by the subcommands that need them.
struct RunRequest {
    std::string command;
    std::string config_path;
    std::vector<std::pair<std::string, std::string>> overrides;
    std::string out_dir = "sagui-out";
    std::string guide_path;
    std::string checkpoint_path;
    std::string role = "student";
    std::string scratch_csv;
    std::string transfer_csv;
    std::size_t policies = 50;
};

inline const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> names = {"train-guide", "train-student", "verify-abstraction", "oracle",
                                                   "evaluate",    "ablate",        "report"};
    return names;
}

namespace detail {

inline std::string hex(std::uint64_t h) {
    std::ostringstream out;
    out << std::hex << std::setw(16) << std::setfill('0') << h;
    return out.str();
}

inline std::string config_text(const KeyValues& kv) {
    std::ostringstream out;
    write_config(out, kv);
    return out.str();
}

/// Hash of the environment section that the run uses.
inline std::string env_hash(const KeyValues& kv) {
    const std::string prefix = env_kind(kv) + ".";
    std::string text;
    for (const auto& [key, value] : kv.entries())
        if (key.rfind(prefix, 0) == 0) text += key + "=" + value + "\n";
    return hex(stable_hash(text));
}

inline std::string file_hash(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return hex(stable_hash(buf.str()));
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw LoadError("cannot write " + path.string());
    out << text;
}

inline void require_file(const std::string& path, const char* what) {
    if (path.empty()) throw LoadError(std::string("missing ") + what + " path");
    if (!std::filesystem::is_regular_file(path)) throw LoadError(std::string(what) + " not found: " + path);
}

inline std::string optional_epoch(const std::optional<std::size_t>& e) {
    return e ? std::to_string(*e) : std::string("never");
}

/// "metric,value" rows.
class Summary {
public:
    void add(const std::string& name, const std::string& value) { rows_.emplace_back(name, value); }
    void add(const std::string& name, double value) { add(name, format_double(value)); }

    std::string text() const {
        std::string out = "metric,value\n";
        for (const auto& [k, v] : rows_) out += k + "," + v + "\n";
        return out;
    }

private:
    std::vector<std::pair<std::string, std::string>> rows_;
};

/// Streams epoch rows to disk as they complete, so a diverged run keeps its curve.
class EpochWriter {
public:
    explicit EpochWriter(const std::filesystem::path& path) : out_(path, std::ios::binary) {
        if (!out_) throw LoadError("cannot write " + path.string());
        out_ << epoch_csv_header() << '\n';
    }
    EpochCallback callback() {
        return [this](const EpochRecord& r) {
            write_epoch_row(out_, r);
            out_.flush();
        };
    }

private:
    std::ofstream out_;
};

struct GridEnvs {
    using Agent = DiscreteAgent;
    using Policy = CategoricalPolicy;
    GridSourceEnv source;
    GridTargetEnv target;
};

struct NavEnvs {
    using Agent = ContinuousAgent;
    using Policy = SquashedGaussianPolicy;
    PointNavSourceEnv source;
    PointNavTargetEnv target;
};

template <class F> int with_envs(const KeyValues& kv, F&& f) {
    if (env_kind(kv) == "grid") {
        const auto spec = grid_spec(kv);
        GridEnvs envs{GridSourceEnv(spec), GridTargetEnv(spec)};
        return f(envs);
    }
    const auto spec = nav_spec(kv);
    NavEnvs envs{PointNavSourceEnv(spec), PointNavTargetEnv(spec)};
    return f(envs);
}

inline void write_meta(const std::filesystem::path& path, const std::vector<std::pair<std::string, std::string>>& rows) {
    std::string text;
    for (const auto& [k, v] : rows) text += k + " = " + v + "\n";
    write_file(path, text);
}

inline void add_curve_metrics(Summary& s, const std::vector<EpochRecord>& log, double d, std::size_t window) {
    const auto& last = log.back();
    s.add("final_return_pib", last.return_pib);
    s.add("final_cost_return_pib", last.cost_return_pib);
    s.add("final_return_pi_target", last.return_pi_target);
    s.add("final_cost_return_pi_target", last.cost_return_pi_target);
    s.add("final_alpha", last.alpha);
    s.add("final_beta", last.beta);
    s.add("final_coverage", last.coverage);
    s.add("time_to_safety_pib", optional_epoch(time_to_safety(column(log, &EpochRecord::cost_return_pib), d, window)));
}

template <class Envs>
void add_exact_guide(Summary& s, const Envs& envs, const typename Envs::Agent& agent, const KeyValues& kv) {
    if constexpr (std::is_same_v<Envs, GridEnvs>) {
        const auto& source = envs.source.cmdp();
        const auto pi = policy_table(agent, source.num_states);
        const auto spec = grid_spec(kv);
        s.add("exact_source_cost", expected_return(source, pi, Signal::cost));
        s.add("exact_is_safe", is_safe(source, pi, spec.source_threshold, 0.0) ? "true" : "false");
        const auto th = verify_theorem1(envs.target.cmdp(), envs.target.abstraction(), pi, spec.source_threshold,
                                        spec.target_threshold);
        s.add("exact_lifted_target_cost", th.target_cost);
    }
}

template <class Envs>
void add_exact_student(Summary& s, const Envs& envs, const typename Envs::Agent& agent) {
    if constexpr (std::is_same_v<Envs, GridEnvs>) {
        const auto& target = envs.target.cmdp();
        const auto pi = policy_table(agent, target.num_states);
        const auto opt = exact_constrained_optimum(target, target.threshold);
        s.add("exact_student_return", expected_return(target, pi, Signal::reward));
        s.add("exact_student_cost", expected_return(target, pi, Signal::cost));
        s.add("constrained_optimum", opt.value);
    }
}

template <class Policy> SacAgent<Policy> load_agent(const std::string& path) { return load_checkpoint<Policy>(path); }

inline std::vector<std::pair<std::string, std::string>> guide_meta(const KeyValues& kv, const GuideConfig& cfg, double d) {
    return {{"role", "guide"},
            {"env", env_kind(kv)},
            {"env_spec_hash", env_hash(kv)},
            {"source_threshold", format_double(d)},
            {"mode", to_string(cfg.mode)},
            {"seed", std::to_string(cfg.loop.seed)},
            {"config_hash", hex(stable_hash(config_text(kv)))}};
}

// ---- subcommands -------------------------------------------------------------

inline int cmd_train_guide(const KeyValues& kv, const std::filesystem::path& dir, std::ostream& log) {
    return with_envs(kv, [&](auto& envs) {
        using Envs = std::decay_t<decltype(envs)>;
        const auto cfg = guide_config(kv);
        EpochWriter epochs(dir / "epochs.csv");
        auto res = train_guide<typename Envs::Agent>(envs.source, cfg, epochs.callback());
        save_checkpoint((dir / "guide.ckpt").string(), res.agent);
        write_meta(dir / "guide.ckpt.meta", guide_meta(kv, cfg, envs.source.threshold()));
        Summary s;
        s.add("command", "train-guide");
        s.add("mode", to_string(cfg.mode));
        s.add("seed", std::to_string(cfg.loop.seed));
        add_curve_metrics(s, res.log, envs.source.threshold(), static_cast<std::size_t>(kv.integer("run.window")));
        add_exact_guide(s, envs, res.agent, kv);
        write_file(dir / "summary.csv", s.text());
        log << "guide trained: final cost-return " << format_double(res.log.back().cost_return_pib) << ", coverage "
            << format_double(res.log.back().coverage) << '\n';
        return exit_ok;
    });
}

inline int cmd_train_student(const KeyValues& kv, const RunRequest& req, const std::filesystem::path& dir,
                             std::ostream& log) {
    return with_envs(kv, [&](auto& envs) {
        using Envs = std::decay_t<decltype(envs)>;
        const auto guide = load_agent<typename Envs::Policy>(req.guide_path);
        const auto cfg = student_config(kv);
        EpochWriter epochs(dir / "epochs.csv");
        auto res = train_student<typename Envs::Agent>(envs.target, guide, cfg, epochs.callback());
        save_checkpoint((dir / "student.ckpt").string(), res.agent);
        write_meta(dir / "student.ckpt.meta", {{"role", "student"},
                                               {"env", env_kind(kv)},
                                               {"env_spec_hash", env_hash(kv)},
                                               {"target_threshold", format_double(envs.target.threshold())},
                                               {"sampling", to_string(cfg.sampling)},
                                               {"regularization", to_string(cfg.regularization)},
                                               {"guide_hash", file_hash(req.guide_path)},
                                               {"seed", std::to_string(cfg.loop.seed)},
                                               {"config_hash", hex(stable_hash(config_text(kv)))}});
        Summary s;
        s.add("command", "train-student");
        s.add("sampling", to_string(cfg.sampling));
        s.add("regularization", to_string(cfg.regularization));
        s.add("seed", std::to_string(cfg.loop.seed));
        s.add("buffer_fallbacks", std::to_string(res.buffer_fallbacks));
        add_curve_metrics(s, res.log, envs.target.threshold(), static_cast<std::size_t>(kv.integer("run.window")));
        add_exact_student(s, envs, res.agent);
        write_file(dir / "summary.csv", s.text());
        log << "student trained: final return " << format_double(res.log.back().return_pi_target)
            << ", cost-return " << format_double(res.log.back().cost_return_pi_target) << '\n';
        return exit_ok;
    });
}

inline int cmd_verify_abstraction(const KeyValues& kv, const RunRequest& req, const std::filesystem::path& dir,
                                  std::ostream& log) {
    const auto spec = grid_spec(kv);
    const GridTargetEnv target(spec);
    const auto& m = target.cmdp();
    const auto& abs = target.abstraction();
    Summary s;
    s.add("command", "verify-abstraction");
    const auto report = check_qc_irrelevance(m, abs, 1e-10);
    s.add("qc_irrelevance", report.holds ? "true" : "false");
    bool ok = report.holds;
    if (!report.holds) {
        s.add("irrelevance_reason", report.reason);
        log << "Q^c-irrelevance fails: " << report.reason << '\n';
    } else {
        Rng rng = SeedStreams(static_cast<std::uint64_t>(kv.integer("run.seed"))).rng("init");
        double worst = 0.0;
        for (std::size_t i = 0; i < req.policies; ++i)
            worst = std::max(worst, verify_lemma1(m, abs, StochasticPolicy::random(abs.num_source, m.num_actions, rng)));
        s.add("lemma1_policies", std::to_string(req.policies));
        s.add("lemma1_max_diff", worst);
        log << "max Lemma-1 diff over " << req.policies << " random source policies: " << format_double(worst) << '\n';
        ok = ok && worst <= 1e-8;
        if (!req.guide_path.empty()) {
            const auto guide = load_agent<CategoricalPolicy>(req.guide_path);
            const auto th = verify_theorem1(m, abs, policy_table(guide, abs.num_source), spec.source_threshold,
                                            spec.target_threshold);
            const char* outcome = th.outcome == TheoremOutcome::holds           ? "holds"
                                  : th.outcome == TheoremOutcome::premise_false ? "premise_false"
                                                                                : "violated";
            s.add("theorem1", outcome);
            s.add("theorem1_source_cost", th.source_cost);
            s.add("theorem1_target_cost", th.target_cost);
            log << "theorem check: " << outcome << " (source " << format_double(th.source_cost) << ", target "
                << format_double(th.target_cost) << ")\n";
            ok = ok && th.outcome == TheoremOutcome::holds;
        }
    }
    write_file(dir / "summary.csv", s.text());
    if (!ok) throw VerificationFailure("abstraction verification failed");
    return exit_ok;
}

inline int cmd_oracle(const KeyValues& kv, const std::filesystem::path& dir, std::ostream& log) {
    const GridTargetEnv target(grid_spec(kv));
    const auto& m = target.cmdp();
    const double count = std::pow(static_cast<double>(m.num_actions), static_cast<double>(m.num_states));
    const bool enumerate = count <= static_cast<double>(1ULL << 22);
    const auto opt = enumerate ? brute_force_constrained_optimum(m, m.threshold)
                               : exact_constrained_optimum(m, m.threshold);
    Summary s;
    s.add("command", "oracle");
    s.add("method", enumerate ? "enumeration" : "branch-and-bound");
    s.add("feasible", opt.feasible ? "true" : "false");
    s.add("optimum_return", opt.value);
    s.add("optimum_cost", opt.cost_value);
    s.add("unconstrained_return", opt.unconstrained_value);
    s.add("unconstrained_cost", opt.unconstrained_cost);
    s.add("nodes", std::to_string(opt.nodes));
    std::string policy;
    for (std::size_t a : opt.policy) policy += std::to_string(a);
    s.add("policy", policy);
    write_file(dir / "summary.csv", s.text());
    log << "constrained optimum " << format_double(opt.value) << " (cost " << format_double(opt.cost_value) << ", "
        << (enumerate ? "enumeration" : "branch and bound") << ")\n";
    return exit_ok;
}

inline int cmd_evaluate(const KeyValues& kv, const RunRequest& req, const std::filesystem::path& dir,
                        std::ostream& log) {
    return with_envs(kv, [&](auto& envs) {
        using Envs = std::decay_t<decltype(envs)>;
        const auto agent = load_agent<typename Envs::Policy>(req.checkpoint_path);
        const bool guide = req.role == "guide";
        const auto loop = loop_config(kv, guide ? "guide" : "student");
        const std::uint64_t seed = SeedStreams(loop.seed).seed("eval");
        EvaluationResult ev;
        if (guide) {
            auto p = episode_policy(agent, [&](const auto& st) { return envs.source.observe(st); });
            ev = evaluate(envs.source, p, loop.eval_episodes, seed, true);
        } else {
            auto p = episode_policy(agent, [&](const auto& st) { return envs.target.observe(st); });
            ev = evaluate(envs.target, p, loop.eval_episodes, seed, true);
        }
        std::string episodes = "episode,return,cost_return,episodic_cost\n";
        for (std::size_t i = 0; i < ev.returns.size(); ++i)
            episodes += std::to_string(i) + "," + format_double(ev.returns[i]) + "," + format_double(ev.cost_returns[i]) +
                        "," + format_double(ev.episodic_costs[i]) + "\n";
        write_file(dir / "episodes.csv", episodes);
        Summary s;
        s.add("command", "evaluate");
        s.add("role", req.role);
        s.add("episodes", std::to_string(loop.eval_episodes));
        s.add("mean_return", ev.mean_return);
        s.add("mean_cost_return", ev.mean_cost_return);
        s.add("mean_episodic_cost", ev.mean_episodic_cost);
        s.add("coverage", static_cast<double>(coverage(ev.trajectories, loop.coverage_cell)));
        if (guide) add_exact_guide(s, envs, agent, kv);
        else add_exact_student(s, envs, agent);
        write_file(dir / "summary.csv", s.text());
        log << "mean return " << format_double(ev.mean_return) << ", mean cost-return "
            << format_double(ev.mean_cost_return) << '\n';
        return exit_ok;
    });
}

struct TransferMetrics {
    double safety_jump_start = 0.0;
    double return_jump_start = 0.0;
    std::optional<std::size_t> scratch_time_to_safety, transfer_time_to_safety;
    std::optional<std::size_t> scratch_time_to_optimum, transfer_time_to_optimum;
    double optimum = 0.0;
};

/// Transfer metrics from two logged curves. Optimum is the supplied value or, when unset,
/// the best return seen on either curve.
inline TransferMetrics transfer_metrics(const std::vector<EpochRecord>& scratch, const std::vector<EpochRecord>& transfer,
                                        double d, std::size_t k, std::size_t window, double tol,
                                        std::optional<double> optimum = std::nullopt) {
    TransferMetrics m;
    const auto sc = column(scratch, &EpochRecord::cost_return_pib), tc = column(transfer, &EpochRecord::cost_return_pib);
    const auto sr = column(scratch, &EpochRecord::return_pi_target), tr = column(transfer, &EpochRecord::return_pi_target);
    m.safety_jump_start = safety_jump_start(sc, tc, d, k);
    m.return_jump_start = return_jump_start(sr, tr, k);
    m.scratch_time_to_safety = time_to_safety(sc, d, window);
    m.transfer_time_to_safety = time_to_safety(tc, d, window);
    if (optimum) {
        m.optimum = *optimum;
    } else {
        m.optimum = -std::numeric_limits<double>::infinity();
        for (double r : sr) m.optimum = std::max(m.optimum, r);
        for (double r : tr) m.optimum = std::max(m.optimum, r);
    }
    m.scratch_time_to_optimum = time_to_optimum(sr, m.optimum, tol, window);
    m.transfer_time_to_optimum = time_to_optimum(tr, m.optimum, tol, window);
    return m;
}

inline std::vector<EpochRecord> read_epoch_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw LoadError("cannot open " + path);
    return read_epoch_csv(in);
}

inline std::optional<double> grid_optimum(const KeyValues& kv) {
    if (env_kind(kv) != "grid") return std::nullopt;
    const GridTargetEnv target(grid_spec(kv));
    return exact_constrained_optimum(target.cmdp(), target.threshold()).value;
}

inline double target_threshold(const KeyValues& kv) {
    return env_kind(kv) == "grid" ? grid_spec(kv).target_threshold : nav_spec(kv).target_threshold;
}

inline int cmd_report(const KeyValues& kv, const RunRequest& req, const std::filesystem::path& dir, std::ostream& log) {
    const auto scratch = read_epoch_file(req.scratch_csv);
    const auto transfer = read_epoch_file(req.transfer_csv);
    const auto m = transfer_metrics(scratch, transfer, target_threshold(kv), count(kv, "run.jump_start_k"),
                                    count(kv, "run.window"), kv.number("run.optimum_tol"), grid_optimum(kv));
    Summary s;
    s.add("command", "report");
    s.add("safety_jump_start", m.safety_jump_start);
    s.add("return_jump_start", m.return_jump_start);
    s.add("scratch_time_to_safety", optional_epoch(m.scratch_time_to_safety));
    s.add("transfer_time_to_safety", optional_epoch(m.transfer_time_to_safety));
    s.add("optimum", m.optimum);
    s.add("scratch_time_to_optimum", optional_epoch(m.scratch_time_to_optimum));
    s.add("transfer_time_to_optimum", optional_epoch(m.transfer_time_to_optimum));
    write_file(dir / "summary.csv", s.text());
    log << "safety jump-start " << format_double(m.safety_jump_start) << ", return jump-start "
        << format_double(m.return_jump_start) << '\n';
    return exit_ok;
}

/// Runs MaxEnt/SaGui x fixreg/decreg/adaptive x guisam/stusam/linear-decay/control-switch
/// per seed, plus the from-scratch baseline that every row is compared against.
inline int cmd_ablate(const KeyValues& kv, const std::filesystem::path& dir, std::ostream& log) {
    return with_envs(kv, [&](auto& envs) {
        using Envs = std::decay_t<decltype(envs)>;
        using Agent = typename Envs::Agent;
        const std::uint64_t first = static_cast<std::uint64_t>(kv.integer("run.seed"));
        const std::size_t seeds = count(kv, "run.seeds"), k = count(kv, "run.jump_start_k"), window = count(kv, "run.window");
        const double tol = kv.number("run.optimum_tol");
        const auto optimum = grid_optimum(kv);
        std::string table = "seed,guide,regularization,sampling,final_return_pi_target,final_cost_return_pi_target,"
                            "safety_jump_start,return_jump_start,time_to_safety,time_to_optimum\n";
        const double d = envs.target.threshold();
        auto row_value = [](double x) { return format_double(x); };
        for (std::uint64_t seed = first; seed < first + seeds; ++seed) {
            const std::string tag = "_seed" + std::to_string(seed) + ".csv";
            auto gc = guide_config(kv);
            gc.loop.seed = seed;
            std::vector<std::pair<GuideMode, Agent>> guides;
            for (const auto mode : {GuideMode::maxent, GuideMode::sagui}) {
                gc.mode = mode;
                EpochWriter out(dir / (std::string("epochs_guide_") + to_string(mode) + tag));
                guides.emplace_back(mode, train_guide<Agent>(envs.source, gc, out.callback()).agent);
            }
            auto sc = student_config(kv);
            sc.loop.seed = seed;
            EpochWriter scratch_out(dir / ("epochs_scratch" + tag));
            const auto scratch = train_student<Agent>(envs.target, guides.back().second, scratch_baseline(sc),
                                                      scratch_out.callback());
            for (const auto& [mode, guide] : guides)
                for (const auto reg : {Regularization::fixed, Regularization::decayed, Regularization::adaptive})
                    for (const auto sampling : {SamplingMode::guide_only, SamplingMode::student_only,
                                                SamplingMode::linear_decay, SamplingMode::control_switch}) {
                        auto cfg = sc;
                        cfg.regularization = reg;
                        cfg.sampling = sampling;
                        const std::string name = std::string(to_string(mode)) + "_" + to_string(reg) + "_" + to_string(sampling);
                        EpochWriter out(dir / ("epochs_" + name + tag));
                        const auto res = train_student<Agent>(envs.target, guide, cfg, out.callback());
                        const auto m = transfer_metrics(scratch.log, res.log, d, k, window, tol, optimum);
                        table += std::to_string(seed) + "," + to_string(mode) + "," + to_string(reg) + "," +
                                 to_string(sampling) + "," + row_value(res.log.back().return_pi_target) + "," +
                                 row_value(res.log.back().cost_return_pi_target) + "," + row_value(m.safety_jump_start) +
                                 "," + row_value(m.return_jump_start) + "," + optional_epoch(m.transfer_time_to_safety) +
                                 "," + optional_epoch(m.transfer_time_to_optimum) + "\n";
                        log << "seed " << seed << ' ' << name << ": safety jump-start "
                            << row_value(m.safety_jump_start) << '\n';
                    }
        }
        write_file(dir / "summary.csv", table);
        log << "ablation done\n";
        return exit_ok;
    });
}

} // namespace detail

/// Resolves configuration, checks inputs, then runs the subcommand. Nothing is written
/// to disk until the configuration and every input path have been validated.
inline int run(const RunRequest& req, std::ostream& log = std::cout, std::ostream& err = std::cerr) {
    try {
        if (std::find(subcommands().begin(), subcommands().end(), req.command) == subcommands().end())
            throw ConfigError("unknown subcommand '" + req.command + "'");
        const KeyValues file = req.config_path.empty() ? KeyValues{} : read_config_file(req.config_path);
        const KeyValues kv = resolve_config(file, req.overrides);
        validate_config(kv);
        if (req.command == "train-student") detail::require_file(req.guide_path, "guide checkpoint");
        if (req.command == "evaluate") {
            detail::require_file(req.checkpoint_path, "checkpoint");
            if (req.role != "guide" && req.role != "student") throw ConfigError("role must be guide or student");
        }
        if (req.command == "report") {
            detail::require_file(req.scratch_csv, "scratch CSV");
            detail::require_file(req.transfer_csv, "transfer CSV");
        }
        if (req.command == "ablate" && kv.integer("student.epochs") < kv.integer("run.jump_start_k"))
            throw ConfigError("ablate needs student.epochs >= run.jump_start_k");
        if (req.command == "verify-abstraction" || req.command == "oracle") {
            if (env_kind(kv) != "grid") throw ConfigError(req.command + " needs run.env = grid");
            if (!req.guide_path.empty()) detail::require_file(req.guide_path, "guide checkpoint");
        }

        const std::filesystem::path dir(req.out_dir);
        std::filesystem::create_directories(dir);
        detail::write_file(dir / "config.resolved.ini", detail::config_text(kv));
        try {
            if (req.command == "train-guide") return detail::cmd_train_guide(kv, dir, log);
            if (req.command == "train-student") return detail::cmd_train_student(kv, req, dir, log);
            if (req.command == "verify-abstraction") return detail::cmd_verify_abstraction(kv, req, dir, log);
            if (req.command == "oracle") return detail::cmd_oracle(kv, dir, log);
            if (req.command == "evaluate") return detail::cmd_evaluate(kv, req, dir, log);
            if (req.command == "report") return detail::cmd_report(kv, req, dir, log);
            return detail::cmd_ablate(kv, dir, log);
        } catch (const DivergenceError& e) {
            detail::write_file(dir / "divergence.txt", std::string(e.what()) + "\n");
            err << "divergence: " << e.what() << '\n';
            return exit_divergence;
        }
    } catch (const VerificationFailure& e) {
        err << e.what() << '\n';
        return exit_verification;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return exit_config;
    } catch (const LoadError& e) {
        err << "load error: " << e.what() << '\n';
        return exit_config;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_config;
    }
}

} // namespace sagui
