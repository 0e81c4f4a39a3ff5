#include "normweaver/error.hpp"
#include "normweaver/executor.hpp"
#include "normweaver/plan_io.hpp"
#include "normweaver/satisfaction.hpp"
#include "normweaver/vacuum.hpp"
#include "normweaver/value_iteration.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;
using namespace normweaver;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kFailure = 1, kBadInput = 2, kMismatch = 3 };

struct Manifest {
    std::optional<int> scenario;
    std::string mdp_path;
    std::string norms_path;
    std::string automata_dir;
    std::string override_file;
    std::vector<std::string> overrides;
    std::optional<double> gamma;
    std::optional<double> epsilon;
    std::optional<double> tol;
    std::uint64_t seed = 1;
    std::size_t horizon = 100;
    std::size_t episodes = 1;
    std::string out_dir = "normweaver-out";
    std::string plan_path;
    bool json_stdout = false;
};

struct Inputs {
    std::shared_ptr<const LabeledMdp> mdp;
    std::vector<Norm> norms;
    PlannerConfig cfg;
    std::vector<std::optional<Dra>> automata;
    std::vector<vacuum::VacuumState> vacuum_states; // empty unless a scenario
    std::string hash;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidArgument("cannot read " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidArgument("cannot write " + path.string());
    out << text;
}

Inputs load_inputs(const Manifest& m) {
    if (m.scenario.has_value() == !m.mdp_path.empty())
        throw InvalidArgument("give exactly one of --scenario and --mdp");
    Inputs in;
    if (m.scenario) {
        auto sc = vacuum::scenario(*m.scenario);
        if (!m.override_file.empty()) vacuum::apply_overrides(sc.config, read_file(m.override_file));
        for (const auto& o : m.overrides) vacuum::apply_override(sc.config, o);
        auto vm = vacuum::build_mdp(sc.config);
        in.vacuum_states = std::move(vm.states);
        in.mdp = std::make_shared<const LabeledMdp>(std::move(vm.mdp));
        in.norms = std::move(sc.norms);
        in.cfg = sc.planner;
    } else {
        if (!m.overrides.empty() || !m.override_file.empty())
            throw InvalidArgument("--override applies to scenarios only");
        if (m.norms_path.empty()) throw InvalidArgument("--mdp needs --norms");
        in.mdp = std::make_shared<const LabeledMdp>(mdp_from_json(read_file(m.mdp_path)));
    }
    if (!m.norms_path.empty()) in.norms = parse_norm_file(read_file(m.norms_path)).norms;
    if (in.norms.empty()) throw InvalidArgument("no norms given");
    if (m.gamma) in.cfg.gamma = *m.gamma;
    if (m.epsilon) in.cfg.epsilon = *m.epsilon;
    if (m.tol) in.cfg.tolerance = *m.tol;
    in.cfg.check();

    in.hash = input_hash(*in.mdp, in.norms, in.cfg);
    std::string hoa;
    if (!m.automata_dir.empty()) {
        for (const auto& n : in.norms) {
            const auto path = fs::path(m.automata_dir) / (n.name + ".hoa");
            if (!fs::exists(path)) {
                in.automata.emplace_back();
                continue;
            }
            const auto text = read_file(path.string());
            hoa += n.name + "\n" + text;
            in.automata.emplace_back(import_hoa(text));
        }
    }
    if (!hoa.empty()) {
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(hoa)));
        in.hash += std::string("-") + buf;
    }
    return in;
}

std::shared_ptr<const ConflictProduct> rebuild_product(const Inputs& in, const PlannerConfig& cfg) {
    std::vector<Crdra> crdras;
    for (std::size_t i = 0; i < in.norms.size(); ++i) {
        const bool supplied = i < in.automata.size() && in.automata[i].has_value();
        crdras.push_back(build_crdra(in.norms[i], supplied ? *in.automata[i] : compile_norm(in.norms[i])));
    }
    ConflictProductOptions opts;
    opts.max_states = cfg.max_states;
    opts.prune_dominated = cfg.prune_dominated;
    return std::make_shared<const ConflictProduct>(in.mdp, std::move(crdras), opts);
}

std::vector<std::string> initial_actions(const AmalgamatedPolicy& policy) {
    const auto& p = *policy.product;
    HistoryInterpreter h(policy, p.env().initial());
    std::vector<std::string> out;
    for (auto c : policy.support(h.selected_state())) {
        auto name = p.env().action_name(p.choice_action(c));
        if (std::find(out.begin(), out.end(), name) == out.end()) out.push_back(name);
    }
    return out;
}

void emit(const Manifest& m, const json& summary, const std::string& text, const fs::path& file) {
    write_file(file, summary.dump(1) + "\n");
    if (m.json_stdout) {
        std::cout << summary.dump(1) << "\n";
    } else {
        std::cout << text << "summary: " << file.string() << "\n";
    }
}

int cmd_plan(const Manifest& m) {
    const auto t0 = std::chrono::steady_clock::now();
    auto in = load_inputs(m);
    auto policy = plan(in.mdp, in.norms, in.cfg, in.automata);
    const fs::path plan_file = m.plan_path.empty() ? fs::path(m.out_dir) / "plan.json" : fs::path(m.plan_path);
    {
        std::ostringstream os;
        save_plan(os, policy, in.hash);
        write_file(plan_file, os.str());
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const auto& s = policy.stats;
    const auto first = initial_actions(policy);

    json summary{{"command", "plan"},
                 {"hash", in.hash},
                 {"plan", plan_file.string()},
                 {"env_states", s.env_states},
                 {"env_actions", in.mdp->num_actions()},
                 {"product_states", s.product_states},
                 {"product_choices", s.product_choices},
                 {"product_actions", s.product_actions},
                 {"pruned_choices", s.pruned_choices},
                 {"amecs", s.amecs},
                 {"meta_components", s.meta_components},
                 {"fallback_states", s.fallback_states},
                 {"no_update_states", s.no_update_states},
                 {"amec_sweeps", s.amec_sweeps},
                 {"global_sweeps", s.global_sweeps},
                 {"tolerance", in.cfg.tolerance},
                 {"viol_initial", policy.initial_value()},
                 {"initial_actions", first},
                 {"seconds", wall}};
    std::ostringstream text;
    text.precision(10);
    text << "environment: " << s.env_states << " states, " << in.mdp->num_actions() << " actions\n"
         << "product:     " << s.product_states << " states, " << s.product_choices << " choices ("
         << s.pruned_choices << " dominated pruned)\n"
         << "AMECs:       " << s.amecs << " (" << s.meta_components << " meta, " << s.fallback_states
         << " epsilon-greedy states)\n"
         << "noUpdate:    " << s.no_update_states << " states\n"
         << "Viol*(init): " << policy.initial_value() << "\n"
         << "first move:  ";
    for (std::size_t i = 0; i < first.size(); ++i) text << (i ? ", " : "") << first[i];
    text << "\nwall time:   " << wall << " s\nplan:        " << plan_file.string() << "\n";
    emit(m, summary, text.str(), fs::path(m.out_dir) / "plan_summary.json");
    return kOk;
}

int cmd_run(const Manifest& m) {
    if (m.horizon == 0) throw InvalidArgument("--horizon must be at least 1");
    if (m.episodes == 0) throw InvalidArgument("--episodes must be at least 1");
    auto in = load_inputs(m);
    AmalgamatedPolicy policy;
    if (!m.plan_path.empty()) {
        std::ifstream f(m.plan_path);
        if (!f) throw InvalidArgument("cannot read " + m.plan_path);
        const auto header = read_plan_header(f);
        if (header.hash != in.hash)
            throw PlanMismatch("plan " + m.plan_path + " was built for inputs " + header.hash +
                               ", current inputs hash to " + in.hash);
        f.clear();
        f.seekg(0);
        policy = load_plan(f, rebuild_product(in, header.config), in.hash);
    } else {
        policy = plan(in.mdp, in.norms, in.cfg, in.automata);
    }

    std::vector<ExecutionTrace> traces(m.episodes);
    std::vector<std::exception_ptr> errors(m.episodes);
    const unsigned workers = std::max(1U, std::min<unsigned>(worker_threads(), static_cast<unsigned>(m.episodes)));
    auto work = [&](unsigned w) {
        for (std::size_t k = w; k < m.episodes; k += workers) {
            try {
                traces[k] = run_episode(policy, m.horizon, episode_seed(m.seed, k));
            } catch (...) {
                errors[k] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work, w);
    work(0);
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);

    const auto& env = *in.mdp;
    const fs::path out(m.out_dir);
    double total = 0.0;
    std::vector<std::size_t> suspensions(in.norms.size(), 0);
    std::size_t dead_visits = 0, revisions = 0, fallbacks = 0;
    json episodes = json::array();
    for (std::size_t k = 0; k < traces.size(); ++k) {
        const auto& tr = traces[k];
        write_file(out / ("episode_" + std::to_string(k) + ".csv"), trace_to_csv(tr, env));
        write_file(out / ("episode_" + std::to_string(k) + ".json"), trace_to_json(tr, env) + "\n");
        total += tr.total_cost;
        revisions += tr.revisions;
        fallbacks += tr.fallbacks;
        std::size_t dead = 0;
        for (const auto& st : tr.steps) {
            for (std::size_t i = 0; i < st.norm_actions.size(); ++i) suspensions[i] += st.norm_actions[i] == NormAction::Susp;
            if (!in.vacuum_states.empty() && in.vacuum_states[st.env_state].dead()) ++dead;
        }
        dead_visits += dead;
        episodes.push_back({{"seed", tr.seed}, {"total_cost", tr.total_cost}, {"dead_visits", dead}});
    }
    const double mean = total / static_cast<double>(traces.size());
    json per_norm = json::object();
    for (std::size_t i = 0; i < in.norms.size(); ++i) per_norm[in.norms[i].name] = suspensions[i];

    json summary{{"command", "run"},
                 {"hash", in.hash},
                 {"episodes", m.episodes},
                 {"horizon", m.horizon},
                 {"seed", m.seed},
                 {"mean_cost", mean},
                 {"suspensions", per_norm},
                 {"revisions", revisions},
                 {"fallbacks", fallbacks},
                 {"per_episode", episodes}};
    if (!in.vacuum_states.empty()) summary["dead_visits"] = dead_visits;

    std::ostringstream text;
    text.precision(10);
    text << "episodes:    " << m.episodes << " x " << m.horizon << " steps (seed " << m.seed << ")\n"
         << "mean cost:   " << mean << "\n"
         << "suspensions:";
    for (std::size_t i = 0; i < in.norms.size(); ++i) text << " " << in.norms[i].name << "=" << suspensions[i];
    text << "\nrevisions:   " << revisions << "\n";
    if (!in.vacuum_states.empty()) text << "dead visits: " << dead_visits << "\n";
    text << "traces:      " << out.string() << "/episode_*.{csv,json}\n";
    emit(m, summary, text.str(), out / "run_summary.json");
    return kOk;
}

int cmd_maxprob(const Manifest& m) {
    auto in = load_inputs(m);
    std::vector<LtlFormula> parts;
    for (const auto& n : in.norms) parts.push_back(n.formula);
    LtlFormula phi = parts.front();
    for (std::size_t i = 1; i < parts.size(); ++i) phi = LtlFormula::conjunction(phi, parts[i]);
    const Dra d = ltl_to_dra(to_nnf(phi));
    const auto product = build_product(*in.mdp, d);
    const auto amecs = accepting_components(product);
    const auto res = max_satisfaction_probability(product, amecs, in.cfg.tolerance);
    const double p = res.probability[product.initial];
    const bool zero = p <= in.cfg.tolerance;

    json summary{{"command", "maxprob"},
                 {"formula", phi.to_string()},
                 {"dra_states", d.num_states()},
                 {"product_states", product.num_states()},
                 {"accepting_components", amecs.size()},
                 {"probability", p},
                 {"conflict", zero},
                 {"sweeps", res.sweeps}};
    std::ostringstream text;
    text.precision(10);
    text << "formula:     " << phi.to_string() << "\n"
         << "automaton:   " << d.num_states() << " states; product " << product.num_states() << " states\n"
         << "probability: " << p << (zero ? "  (zero: the norms conflict)" : "") << "\n";
    emit(m, summary, text.str(), fs::path(m.out_dir) / "maxprob_summary.json");
    return kOk;
}

int cmd_export_hoa(const Manifest& m) {
    std::vector<Norm> norms;
    if (m.scenario) {
        norms = vacuum::scenario(*m.scenario).norms;
        if (!m.norms_path.empty()) norms = parse_norm_file(read_file(m.norms_path)).norms;
    } else {
        if (m.norms_path.empty()) throw InvalidArgument("export-hoa needs --norms or --scenario");
        norms = parse_norm_file(read_file(m.norms_path)).norms;
    }
    json files = json::array();
    std::ostringstream text;
    for (const auto& n : norms) {
        const Dra d = compile_norm(n);
        const auto path = fs::path(m.out_dir) / (n.name + ".hoa");
        write_file(path, export_hoa(d, n.name));
        files.push_back({{"norm", n.name}, {"file", path.string()}, {"states", d.num_states()}});
        text << n.name << ": " << d.num_states() << " states -> " << path.string() << "\n";
    }
    emit(m, json{{"command", "export-hoa"}, {"automata", files}}, text.str(),
         fs::path(m.out_dir) / "export_summary.json");
    return kOk;
}

void add_inputs(CLI::App* c, Manifest& m) {
    c->add_option("--scenario", m.scenario, "Vacuum scenario 1-4")->check(CLI::Range(1, 4));
    c->add_option("--mdp", m.mdp_path, "Labeled MDP (JSON)");
    c->add_option("--norms", m.norms_path, "Norm file");
    c->add_option("--automata", m.automata_dir, "Directory of <norm>.hoa files replacing the built-in translation");
    c->add_option("--override", m.overrides, "Scenario field override KEY=VALUE (repeatable)");
    c->add_option("--override-file", m.override_file, "Scenario overrides as a JSON object");
    c->add_option("--gamma", m.gamma, "Discount factor");
    c->add_option("--epsilon", m.epsilon, "Epsilon-greedy exploration inside AMECs");
    c->add_option("--tol", m.tol, "Value-iteration residual tolerance");
    c->add_option("--out", m.out_dir, "Output directory")->capture_default_str();
    c->add_flag("--json", m.json_stdout, "Print the structured summary instead of the text report");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"normweaver: planning under conflicting LTL norms"};
    app.require_subcommand(1);
    Manifest m;

    auto* plan_cmd = app.add_subcommand("plan", "Build the conflict product and plan; writes a plan artifact");
    add_inputs(plan_cmd, m);
    plan_cmd->add_option("--plan", m.plan_path, "Plan artifact path (default <out>/plan.json)");

    auto* run_cmd = app.add_subcommand("run", "Simulate episodes with history reinterpretation");
    add_inputs(run_cmd, m);
    run_cmd->add_option("--plan", m.plan_path, "Plan artifact from `plan` (planned afresh when omitted)");
    run_cmd->add_option("--seed", m.seed, "Master seed")->capture_default_str();
    run_cmd->add_option("--horizon", m.horizon, "Steps per episode")->capture_default_str();
    run_cmd->add_option("--episodes", m.episodes, "Number of episodes")->capture_default_str();

    auto* maxprob_cmd = app.add_subcommand("maxprob", "Maximum probability of satisfying all norms at once");
    add_inputs(maxprob_cmd, m);

    auto* hoa_cmd = app.add_subcommand("export-hoa", "Write one HOA automaton per norm");
    hoa_cmd->add_option("--scenario", m.scenario, "Vacuum scenario 1-4")->check(CLI::Range(1, 4));
    hoa_cmd->add_option("--norms", m.norms_path, "Norm file");
    hoa_cmd->add_option("--out", m.out_dir, "Output directory")->capture_default_str();
    hoa_cmd->add_flag("--json", m.json_stdout, "Print the structured summary");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // usage errors share the bad-input code; --help still exits 0
        return app.exit(e) == 0 ? kOk : kBadInput;
    }

    try {
        if (plan_cmd->parsed()) return cmd_plan(m);
        if (run_cmd->parsed()) return cmd_run(m);
        if (maxprob_cmd->parsed()) return cmd_maxprob(m);
        if (hoa_cmd->parsed()) return cmd_export_hoa(m);
    } catch (const PlanMismatch& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kMismatch;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kBadInput;
    } catch (const InvalidArgument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kBadInput;
    } catch (const ModelError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kBadInput;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFailure;
    }
    return kFailure;
}
