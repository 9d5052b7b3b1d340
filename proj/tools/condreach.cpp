#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include "condreach/bisection.hpp"
#include "condreach/colored.hpp"
#include "condreach/conditional.hpp"
#include "condreach/generator.hpp"
#include "condreach/parser.hpp"

namespace {

using namespace condreach;

enum class Mode { Exact, Float, EpsExact };

Mode mode_from_name(const std::string& name) {
    if (name == "exact") return Mode::Exact;
    if (name == "float") return Mode::Float;
    if (name == "eps-exact") return Mode::EpsExact;
    throw CLI::ValidationError("--mode", "expected exact|float|eps-exact");
}

std::string default_mode() {
    const char* env = std::getenv("CONDREACH_MODE");
    return env && *env ? env : "exact";
}

std::string float_str(double v) {
    std::ostringstream out;
    out << std::setprecision(12) << v;
    return out.str();
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

struct CommonOptions {
    std::string modelPath;
    std::string goalLabel = "goal";
    std::string evidenceLabel = "evidence";
    std::string direction = "max";
    std::string mode = default_mode();
    double zeroTol = 1e-9;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
    cmd->add_option("model", opts.modelPath, "explicit model file")->required();
    cmd->add_option("--goal", opts.goalLabel, "goal label name");
    cmd->add_option("--evidence", opts.evidenceLabel, "evidence label name");
    cmd->add_option("--direction", opts.direction, "max|min")->check(CLI::IsMember({"max", "min"}));
    cmd->add_option("--mode", opts.mode, "exact|float|eps-exact")
        ->check(CLI::IsMember({"exact", "float", "eps-exact"}));
    cmd->add_option("--zero-tol", opts.zeroTol, "float-mode tolerance around zero");
}

Query make_query(const Mdp& m, const CommonOptions& opts) {
    Query q;
    q.goal = m.labelSet(opts.goalLabel);
    q.evidence = m.labelSet(opts.evidenceLabel);
    q.direction = opts.direction == "min" ? Direction::Min : Direction::Max;
    return q;
}

Comparison comparison_from_name(const std::string& name) {
    if (name == "lt") return Comparison::Lt;
    if (name == "le") return Comparison::Le;
    if (name == "eq") return Comparison::Eq;
    if (name == "ge") return Comparison::Ge;
    if (name == "gt") return Comparison::Gt;
    throw CLI::ValidationError("--cmp", "expected lt|le|eq|ge|gt");
}

bool sign_satisfies(Sign sign, Comparison cmp) {
    int s = static_cast<int>(sign);
    switch (cmp) {
        case Comparison::Lt: return s < 0;
        case Comparison::Le: return s <= 0;
        case Comparison::Eq: return s == 0;
        case Comparison::Ge: return s >= 0;
        case Comparison::Gt: return s > 0;
    }
    return false;
}

const char* sign_name(Sign s) {
    switch (s) {
        case Sign::Negative: return "negative";
        case Sign::Zero: return "zero";
        case Sign::Positive: return "positive";
    }
    return "?";
}

// ---------------------------------------------------------------------- check

struct CheckOptions {
    CommonOptions common;
    std::string threshold;
    std::string cmp = "le";
    std::string method = "treat";
};

template <typename V>
int run_check(const Mdp& m, const CheckOptions& opts, Mode mode) {
    auto start = std::chrono::steady_clock::now();
    Query q = make_query(m, opts.common);
    Rational lambda = parse_rational(opts.threshold);
    if (lambda < 0 || lambda > 1) throw std::invalid_argument("threshold must lie in [0,1]");
    Comparison cmp = comparison_from_name(opts.cmp);

    std::cout << "method=" << opts.method << "\n";
    std::cout << "mode=" << (mode == Mode::Exact ? "exact" : mode == Mode::Float ? "float" : "eps-exact")
              << "\n";
    std::cout << "direction=" << opts.common.direction << "\n";

    if (!check_defined(m, q.evidence)) {
        std::cout << "result=undefined\n";
        std::cout << "time_ms=" << elapsed_ms(start) << "\n";
        return 2;
    }

    bool holds = false;
    std::size_t iterations = 0;
    if (opts.method == "treat") {
        TransformArtifacts<V> t = build_transform<V>(m, q, SolverOptions{});
        ThresholdOutcome<V> outcome = threshold_value(t, q, lambda, SolverOptions{}, opts.common.zeroTol);
        holds = sign_satisfies(outcome.sign, cmp);
        iterations = outcome.solverIterations;
        std::cout << "sign=" << sign_name(outcome.sign) << "\n";
        if (outcome.forcedOne) std::cout << "forced_one=true\n";
    } else {
        // the restart baseline; the min-direction edge case is consulted first
        if (q.direction == Direction::Min) {
            TransformArtifacts<V> t = build_transform<V>(m, q, SolverOptions{});
            if (min_edge_case(t, q)) {
                Sign sign = static_cast<Sign>(sgn(Rational(1) - lambda));
                std::cout << "sign=" << sign_name(sign) << "\n";
                std::cout << "forced_one=true\n";
                std::cout << "value=1\n";
                std::cout << "result=" << (sign_satisfies(sign, cmp) ? "holds" : "violated") << "\n";
                std::cout << "time_ms=" << elapsed_ms(start) << "\n";
                return sign_satisfies(sign, cmp) ? 0 : 1;
            }
        }
        RestartModel restart = build_restart(m, q);
        SolveResult<V> res = reach_prob<V>(restart.model, restart.goal, q.direction);
        V value = res.values[restart.model.initialState];
        iterations = res.iterations;
        Rational diff = ValueOps<V>::to_rational(value) - lambda;
        Sign sign = static_cast<Sign>(ValueOps<V>::exact
                                          ? sgn(diff)
                                          : ValueOps<double>::sign(to_double(diff), opts.common.zeroTol));
        holds = sign_satisfies(sign, cmp);
        std::cout << "sign=" << sign_name(sign) << "\n";
        if constexpr (ValueOps<V>::exact) {
            std::cout << "value=" << to_string(value) << "\n";
        } else {
            std::cout << "value=" << float_str(value) << "\n";
        }
    }
    std::cout << "result=" << (holds ? "holds" : "violated") << "\n";
    std::cout << "iterations=" << iterations << "\n";
    std::cout << "time_ms=" << elapsed_ms(start) << "\n";
    return holds ? 0 : 1;
}

// ------------------------------------------------------------------- optimize

struct OptimizeOptions {
    CommonOptions common;
    std::string variant = "pt-std";
    std::string eps;
    std::string method = "treat";
};

template <typename V>
int run_optimize(const Mdp& m, const OptimizeOptions& opts, Mode mode) {
    auto start = std::chrono::steady_clock::now();
    Query q = make_query(m, opts.common);

    std::cout << "method=" << opts.method << "\n";
    std::cout << "mode=" << (mode == Mode::Exact ? "exact" : mode == Mode::Float ? "float" : "eps-exact")
              << "\n";
    std::cout << "direction=" << opts.common.direction << "\n";

    if (!check_defined(m, q.evidence)) {
        std::cout << "result=undefined\n";
        std::cout << "time_ms=" << elapsed_ms(start) << "\n";
        return 2;
    }

    if (opts.method == "restart") {
        if (q.direction == Direction::Min) {
            TransformArtifacts<V> t = build_transform<V>(m, q, SolverOptions{});
            if (min_edge_case(t, q)) {
                std::cout << "result=value\nvalue=1\nforced_one=true\niterations=0\n";
                std::cout << "time_ms=" << elapsed_ms(start) << "\n";
                return 0;
            }
        }
        RestartModel restart = build_restart(m, q);
        SolveResult<V> res = reach_prob<V>(restart.model, restart.goal, q.direction);
        V value = res.values[restart.model.initialState];
        std::cout << "result=value\n";
        if constexpr (ValueOps<V>::exact) {
            std::cout << "value=" << to_string(value) << "\n";
            std::cout << "value_float=" << float_str(to_double(value)) << "\n";
        } else {
            std::cout << "value=" << float_str(value) << "\n";
        }
        std::cout << "iterations=" << res.iterations << "\n";
        std::cout << "time_ms=" << elapsed_ms(start) << "\n";
        return 0;
    }

    BisectionConfig cfg;
    auto variant = variant_from_name(opts.variant);
    if (!variant) throw std::invalid_argument("unknown variant: " + opts.variant);
    cfg.variant = *variant;
    cfg.zeroTolerance = opts.common.zeroTol;
    if (!opts.eps.empty()) {
        cfg.epsilon = parse_rational(opts.eps);
    } else if (mode == Mode::Exact) {
        cfg.epsilon = 0;
    } else {
        cfg.epsilon = parse_rational("1/1000000");
    }
    if (mode == Mode::Exact && sgn(cfg.epsilon) > 0) {
        // exact mode with a positive epsilon is the eps-exact regime
        mode = Mode::EpsExact;
    }

    OptimizeOutcome<V> outcome = optimize<V>(m, q, cfg);
    if (outcome.exact) {
        std::cout << "result=value\n";
        if constexpr (ValueOps<V>::exact) {
            std::cout << "value=" << to_string(outcome.value) << "\n";
            std::cout << "value_float=" << float_str(to_double(outcome.value)) << "\n";
        } else {
            std::cout << "value=" << float_str(outcome.value) << "\n";
        }
    } else {
        std::cout << "result=interval\n";
        std::cout << "lower=" << to_string(outcome.lower) << "\n";
        std::cout << "upper=" << to_string(outcome.upper) << "\n";
        if constexpr (ValueOps<V>::exact) {
            std::cout << "value=" << to_string(ValueOps<V>::to_rational(outcome.value)) << "\n";
        } else {
            std::cout << "value=" << float_str(outcome.value) << "\n";
        }
    }
    if (outcome.forcedOne) std::cout << "forced_one=true\n";
    std::cout << "iterations=" << outcome.iterations << "\n";
    std::cout << "probes=" << outcome.probes << "\n";
    std::cout << "time_ms=" << elapsed_ms(start) << "\n";
    return 0;
}

// ----------------------------------------------------------------- synthesize

struct SynthesizeOptions {
    CommonOptions common;
    std::string threshold;
};

template <typename V>
int run_synthesize(const Mdp& m, const SynthesizeOptions& opts, Mode mode) {
    auto start = std::chrono::steady_clock::now();
    ColoredMdp cm = make_colored(m);
    Query q = make_query(m, opts.common);
    q.comparison = Comparison::Ge;
    q.threshold = parse_rational(opts.threshold);
    if (q.threshold < 0 || q.threshold > 1) throw std::invalid_argument("threshold must lie in [0,1]");

    std::cout << "mode=" << (mode == Mode::Exact ? "exact" : mode == Mode::Float ? "float" : "eps-exact")
              << "\n";
    SynthesisResult<V> result = synthesize<V>(cm, q);
    std::cout << "feasible=" << (result.feasible ? "true" : "false") << "\n";
    if (result.feasible) {
        std::cout << "witness=";
        for (std::size_t s = 0; s < cm.base.numStates; ++s) {
            if (s) std::cout << " ";
            std::cout << s << ":" << result.witness->at(s);
        }
        std::cout << "\n";
        if constexpr (ValueOps<V>::exact) {
            std::cout << "value=" << to_string(*result.value) << "\n";
        } else {
            std::cout << "value=" << float_str(*result.value) << "\n";
        }
    }
    std::cout << "nodes=" << result.nodesExplored << "\n";
    std::cout << "it_per_s=" << float_str(result.iterationsPerSecond) << "\n";
    std::cout << "time_ms=" << elapsed_ms(start) << "\n";
    return result.feasible ? 0 : 1;
}

// ---------------------------------------------------------------------- bench

struct BenchOptions {
    std::uint64_t seed = 0;
    std::size_t count = 10;
    std::size_t states = 8;
    bool acyclic = false;
    std::string methods = "treat,restart";
    std::size_t jobs = 1;
};

struct BenchRow {
    std::size_t instance;
    std::size_t states;
    std::string method;
    std::string value;
    std::size_t iterations;
    double timeMs;
};

BenchRow bench_one(const Mdp& m, std::size_t instance, const std::string& method) {
    Query q;
    q.goal = m.labelSet("goal");
    q.evidence = m.labelSet("evidence");
    q.direction = Direction::Max;

    auto start = std::chrono::steady_clock::now();
    BenchRow row{instance, m.numStates, method, "undefined", 0, 0.0};
    if (!check_defined(m, q.evidence)) {
        row.timeMs = elapsed_ms(start);
        return row;
    }
    if (method == "restart") {
        RestartModel restart = build_restart(m, q);
        SolveResult<Rational> res = reach_prob<Rational>(restart.model, restart.goal, q.direction);
        row.value = to_string(res.values[restart.model.initialState]);
        row.iterations = res.iterations;
    } else {
        BisectionConfig cfg;
        cfg.epsilon = 0;
        if (method == "treat" || method == "pt-std") {
            cfg.variant = Variant::PtStd;
        } else {
            auto variant = variant_from_name(method);
            if (!variant) throw std::invalid_argument("unknown bench method: " + method);
            cfg.variant = *variant;
        }
        OptimizeOutcome<Rational> outcome = optimize<Rational>(m, q, cfg);
        row.value = to_string(outcome.value);
        row.iterations = outcome.iterations;
    }
    row.timeMs = elapsed_ms(start);
    return row;
}

int run_bench(const BenchOptions& opts) {
    std::vector<std::string> methods;
    std::stringstream splitter(opts.methods);
    std::string token;
    while (std::getline(splitter, token, ',')) {
        if (!token.empty()) methods.push_back(token);
    }
    if (methods.empty()) throw std::invalid_argument("no bench methods given");
    if (opts.states < 4) throw std::invalid_argument("bench requires --states >= 4");

    std::vector<Mdp> models;
    models.reserve(opts.count);
    for (std::size_t i = 0; i < opts.count; ++i) {
        GeneratorConfig cfg;
        cfg.seed = opts.seed + i;
        cfg.states = opts.states;
        cfg.acyclic = opts.acyclic;
        models.push_back(random_mdp(cfg));
    }

    std::vector<BenchRow> rows(opts.count * methods.size());
    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            for (std::size_t j = 0; j < methods.size(); ++j) {
                rows[i * methods.size() + j] = bench_one(models[i], i, methods[j]);
            }
        }
    };
    std::size_t jobs = std::max<std::size_t>(opts.jobs, 1);
    if (jobs <= 1 || opts.count <= 1) {
        work(0, opts.count);
    } else {
        std::vector<std::thread> pool;
        std::size_t chunk = (opts.count + jobs - 1) / jobs;
        for (std::size_t j = 0; j < jobs; ++j) {
            std::size_t begin = j * chunk;
            std::size_t end = std::min(opts.count, begin + chunk);
            if (begin < end) pool.emplace_back(work, begin, end);
        }
        for (auto& th : pool) th.join();
    }

    std::cout << "instance,states,method,value,iterations,time_ms\n";
    for (const auto& row : rows) {
        std::cout << row.instance << "," << row.states << "," << row.method << "," << row.value << ","
                  << row.iterations << "," << float_str(row.timeMs) << "\n";
    }
    return 0;
}

template <typename Fn>
int dispatch_mode(const std::string& modeName, Fn&& fn) {
    Mode mode = mode_from_name(modeName);
    if (mode == Mode::Float) return fn(std::type_identity<double>{}, mode);
    return fn(std::type_identity<Rational>{}, mode);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"conditional reachability on MDPs and Markov chain families"};
    app.require_subcommand(1);

    CheckOptions checkOpts;
    auto* check = app.add_subcommand("check", "decide Pr(goal | evidence) ~ threshold");
    add_common(check, checkOpts.common);
    check->add_option("--threshold", checkOpts.threshold, "rational threshold in [0,1]")->required();
    check->add_option("--cmp", checkOpts.cmp, "lt|le|eq|ge|gt")
        ->check(CLI::IsMember({"lt", "le", "eq", "ge", "gt"}));
    check->add_option("--method", checkOpts.method, "treat|restart")
        ->check(CLI::IsMember({"treat", "restart"}));

    OptimizeOptions optOpts;
    auto* opt = app.add_subcommand("optimize", "compute the optimal conditional probability");
    add_common(opt, optOpts.common);
    opt->add_option("--variant", optOpts.variant, "std|adv|pt-std|pt-adv|stern-brocot")
        ->check(CLI::IsMember({"std", "adv", "pt-std", "pt-adv", "stern-brocot"}));
    opt->add_option("--eps", optOpts.eps, "target precision (rational or decimal)");
    opt->add_option("--method", optOpts.method, "treat|restart")
        ->check(CLI::IsMember({"treat", "restart"}));

    SynthesizeOptions synOpts;
    auto* syn = app.add_subcommand("synthesize", "color-consistent policy synthesis (>= threshold)");
    add_common(syn, synOpts.common);
    syn->add_option("--threshold", synOpts.threshold, "rational threshold in [0,1]")->required();

    BenchOptions benchOpts;
    auto* bench = app.add_subcommand("bench", "generate random instances and compare methods (CSV)");
    bench->add_option("--seed", benchOpts.seed, "generator seed");
    bench->add_option("--count", benchOpts.count, "number of instances");
    bench->add_option("--states", benchOpts.states, "states per instance");
    bench->add_flag("--acyclic", benchOpts.acyclic, "generate acyclic instances");
    bench->add_option("--methods", benchOpts.methods, "comma list: treat,restart,pt-std,pt-adv,stern-brocot");
    bench->add_option("--jobs", benchOpts.jobs, "parallel bench workers");

    CLI11_PARSE(app, argc, argv);

    try {
        if (check->parsed()) {
            Mdp m = load_model(checkOpts.common.modelPath);
            return dispatch_mode(checkOpts.common.mode, [&](auto tag, Mode mode) {
                using V = typename decltype(tag)::type;
                return run_check<V>(m, checkOpts, mode);
            });
        }
        if (opt->parsed()) {
            Mdp m = load_model(optOpts.common.modelPath);
            return dispatch_mode(optOpts.common.mode, [&](auto tag, Mode mode) {
                using V = typename decltype(tag)::type;
                return run_optimize<V>(m, optOpts, mode);
            });
        }
        if (syn->parsed()) {
            Mdp m = load_model(synOpts.common.modelPath);
            return dispatch_mode(synOpts.common.mode, [&](auto tag, Mode mode) {
                using V = typename decltype(tag)::type;
                return run_synthesize<V>(m, synOpts, mode);
            });
        }
        if (bench->parsed()) {
            return run_bench(benchOpts);
        }
    } catch (const UndefinedQueryError& e) {
        std::cout << "result=undefined\n";
        std::cerr << "error=" << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error=" << e.what() << "\n";
        return 3;
    }
    return 3;
}
