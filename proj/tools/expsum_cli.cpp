// expsum: recover exponential-sum parameters from values and iterated
// integrals at scattered sample points. Subcommands: generate, recover,
// verify, selftest.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "expsum/acceptance.hpp"
#include "expsum/calculus.hpp"
#include "expsum/errors.hpp"
#include "expsum/io.hpp"
#include "expsum/model.hpp"
#include "expsum/recovery.hpp"

namespace {

using namespace expsum;

struct RunConfig {
    // generate
    GeneratorSpec gen;
    int points = 0;  // 0: pick a default for the generated model
    double t_min = 0.0;
    double t_max = 3.0;
    int integrals = 0;  // 0: one per term
    std::string out_model;
    std::string out_records;
    std::string out_dense;
    int dense_points = 4001;

    // recover / verify
    std::string records_path;
    std::string dense_path;
    std::string model_path;
    std::string out_path;
    int n_terms = 0;  // 0: infer from the records header
    std::string mode = "strict";
    std::optional<double> shift;
    std::vector<double> times;  // explicit sample times for ingestion
    int ingest_points = 0;      // or: pick this many grid times automatically
    bool reselect_rows = false;
    RecoveryTolerances tol;
    int declared_r = 0;  // verify: oversized term count
    double match_tol = 1e-6;
    double heldout_tol = 1e-6;

    // selftest
    std::uint64_t seed = 20240917u;
    bool quick = false;
};

double uniform01(std::mt19937_64& eng) { return static_cast<double>(eng() >> 11) * 0x1.0p-53; }

std::vector<double> draw_times(std::mt19937_64& eng, int count, double lo, double hi, double gap) {
    std::vector<double> ts;
    int guard = 0;
    while (static_cast<int>(ts.size()) < count) {
        if (++guard > 200000)
            throw std::invalid_argument("cannot place " + std::to_string(count) +
                                        " sample times in (" + std::to_string(lo) + ", " +
                                        std::to_string(hi) + "] with gap " + std::to_string(gap));
        const double t = lo + uniform01(eng) * (hi - lo);
        bool ok = t > lo;
        for (double s : ts)
            if (std::abs(t - s) < gap) ok = false;
        if (ok) ts.push_back(t);
    }
    std::sort(ts.begin(), ts.end());
    return ts;
}

RecoveryMode parse_mode(const std::string& mode) {
    if (mode == "strict") return RecoveryMode::strict;
    if (mode == "shifted") return RecoveryMode::shifted;
    if (mode == "with_constant") return RecoveryMode::with_constant;
    throw std::invalid_argument("unknown mode '" + mode + "' (strict, shifted, with_constant)");
}

int needed_depth(RecoveryMode mode, int n_terms) {
    return mode == RecoveryMode::with_constant ? n_terms - 1 : n_terms;
}

int cmd_generate(const RunConfig& cfg) {
    GeneratedModel gen = generate(cfg.gen);
    const int depth = cfg.integrals > 0 ? cfg.integrals : cfg.gen.n_terms;

    int points = cfg.points;
    if (points == 0) points = 2 * cfg.gen.n_terms + (gen.model.constant() ? 1 : 0);

    std::mt19937_64 eng(cfg.gen.seed ^ 0x9e3779b97f4a7c15ull);
    std::vector<double> times = draw_times(eng, points, cfg.t_min, cfg.t_max, 0.05);
    std::vector<SampleRecord> records = exact_records(gen.model, times, depth);

    if (!cfg.out_model.empty()) io::write_file(cfg.out_model, io::model_to_json(gen.model));
    if (!cfg.out_records.empty()) io::write_file(cfg.out_records, io::records_to_csv(records));
    if (!cfg.out_dense.empty()) {
        DenseSignal sig = DenseSignal::tabulate([&](double t) { return evaluate(gen.model, t); },
                                                cfg.t_max, cfg.dense_points);
        io::write_file(cfg.out_dense, io::signal_to_csv(sig));
    }
    std::cerr << "generated " << cfg.gen.n_terms << "-term model (seed " << cfg.gen.seed << ", "
              << points << " samples";
    if (gen.nonneg_shift != 0.0) std::cerr << ", shifted by " << gen.nonneg_shift;
    std::cerr << ")\n";
    return 0;
}

RecoveryProblem build_problem(const RunConfig& cfg) {
    RecoveryProblem problem;
    problem.mode = parse_mode(cfg.mode);
    problem.shift_value = cfg.shift;
    problem.reselect_rows = cfg.reselect_rows;
    problem.tol = cfg.tol;

    if (!cfg.records_path.empty()) {
        std::istringstream in(io::read_file(cfg.records_path));
        problem.records = io::records_from_csv(in);
        const int depth = static_cast<int>(problem.records.front().integrals.size());
        problem.n_terms = cfg.n_terms > 0
                              ? cfg.n_terms
                              : (problem.mode == RecoveryMode::with_constant ? depth + 1 : depth);
    } else if (!cfg.dense_path.empty()) {
        std::istringstream in(io::read_file(cfg.dense_path));
        DenseSignal sig = io::signal_from_csv(in);
        if (cfg.n_terms <= 0)
            throw std::invalid_argument("--n is required when ingesting a dense signal");
        problem.n_terms = cfg.n_terms;
        const int depth = needed_depth(problem.mode, problem.n_terms);

        std::vector<double> times = cfg.times;
        if (times.empty()) {
            int count = cfg.ingest_points;
            if (count == 0) {
                count = 2 * problem.n_terms;
                if (problem.mode == RecoveryMode::with_constant) count = 2 * problem.n_terms - 1;
                if (problem.mode == RecoveryMode::shifted) count = 2 * problem.n_terms + 1;
            }
            // spread the samples over even grid indices so every integral ends
            // on a whole Simpson panel
            const int m = static_cast<int>(sig.size());
            for (int j = 1; j <= count; ++j) {
                int idx = static_cast<int>(static_cast<long long>(m - 1) * j / count);
                idx -= idx % 2;
                times.push_back(sig.grid()[idx]);
            }
        }
        problem.records = ingest_records(sig, times, depth);
    } else {
        throw std::invalid_argument("provide --records or --dense input");
    }
    return problem;
}

int cmd_recover(const RunConfig& cfg) {
    const auto start = std::chrono::steady_clock::now();
    RecoveryProblem problem = build_problem(cfg);
    RecoveryResult result = run(problem);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    const std::string json = io::result_to_json(result, wall);
    if (cfg.out_path.empty())
        std::cout << json;
    else
        io::write_file(cfg.out_path, json);
    for (const auto& warning : result.warnings) std::cerr << "warning: " << warning << "\n";
    return 0;
}

int cmd_verify(const RunConfig& cfg) {
    if (cfg.model_path.empty()) throw std::invalid_argument("--model is required");
    ExpSumModel truth = io::model_from_json(io::read_file(cfg.model_path));
    bool all_pass = true;
    auto report = [&](bool pass, const std::string& line) {
        std::cout << (pass ? "PASS " : "FAIL ") << line << "\n";
        all_pass = all_pass && pass;
    };

    std::optional<RecoveryResult> recovered;
    if (!cfg.records_path.empty()) {
        RunConfig rcfg = cfg;
        rcfg.dense_path.clear();
        rcfg.n_terms = static_cast<int>(truth.n_terms()) + (truth.constant() ? 1 : 0);
        rcfg.mode = truth.constant() ? "with_constant" : "strict";
        RecoveryProblem problem = build_problem(rcfg);
        try {
            recovered = run(problem);
        } catch (const FormatError&) {
            throw;  // unreadable input is an I/O error, not a failed check
        } catch (const std::exception& e) {
            report(false, std::string("parameter round-trip: recovery failed (") + e.what() + ")");
        }

        if (recovered) {
            double dev = 0.0;
            bool comparable = recovered->model.n_terms() == truth.n_terms();
            if (comparable) {
                for (std::size_t i = 0; i < truth.terms().size(); ++i) {
                    const auto& g = recovered->model.terms()[i];
                    const auto& w = truth.terms()[i];
                    dev = std::max(dev, std::abs(g.rate - w.rate) / std::abs(w.rate));
                    dev = std::max(dev, std::abs(g.coeff - w.coeff) / std::abs(w.coeff));
                }
                if (truth.constant())
                    dev = std::max(dev, std::abs(recovered->model.constant().value_or(0.0) -
                                                 *truth.constant()) /
                                            std::abs(*truth.constant()));
            }
            std::ostringstream line;
            line << "parameter round-trip: max relative deviation " << dev << " (tol "
                 << cfg.match_tol << ")";
            report(comparable && dev <= cfg.match_tol, line.str());
        }

        if (cfg.declared_r > 0) {
            try {
                RecoveryProblem over = problem;
                over.mode = RecoveryMode::strict;
                over.n_terms = cfg.declared_r;
                VerifyReport vr = verify_overdetermined(over, static_cast<int>(truth.n_terms()));
                double spurious = 0.0;
                for (const auto& term : vr.terms)
                    if (!term.significant) spurious = std::max(spurious, std::abs(term.coeff));
                std::ostringstream oline;
                oline << "overdetermined order check (r=" << cfg.declared_r
                      << "): " << vr.n_significant << " significant terms, max spurious |c| "
                      << spurious << " (tau " << vr.tau_zero << "), term deviation "
                      << vr.max_relative_deviation;
                for (const auto& note : vr.notes) oline << "; " << note;
                report(vr.pass, oline.str());
            } catch (const std::exception& e) {
                report(false, std::string("overdetermined order check failed (") + e.what() + ")");
            }
        }
    }

    if (!cfg.dense_path.empty()) {
        std::istringstream in(io::read_file(cfg.dense_path));
        DenseSignal sig = io::signal_from_csv(in);
        const ExpSumModel& model = recovered ? recovered->model : truth;
        double worst = 0.0, scale = 0.0;
        for (std::size_t i = 0; i < sig.size(); ++i) {
            worst = std::max(worst, std::abs(evaluate(model, sig.grid()[i]) - sig.values()[i]));
            scale = std::max(scale, std::abs(sig.values()[i]));
        }
        std::ostringstream line;
        line << "held-out reconstruction over " << sig.size() << " grid points: max |error| "
             << worst << " (tol " << cfg.heldout_tol * scale << ")";
        report(worst <= cfg.heldout_tol * scale, line.str());
    }

    std::cout << "overall: " << (all_pass ? "PASS" : "FAIL") << "\n";
    return all_pass ? 0 : 1;
}

int cmd_selftest(const RunConfig& cfg) {
    acceptance::Options opts;
    opts.seed = cfg.seed;
    opts.quick = cfg.quick;
    const auto results = acceptance::run_all(opts);
    bool all_pass = true;
    for (const auto& r : results) {
        std::printf("[%s] %d. %s — %s\n", r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(),
                    r.detail.c_str());
        all_pass = all_pass && r.pass;
    }
    std::printf("%zu/%zu criteria passed\n",
                static_cast<std::size_t>(std::count_if(results.begin(), results.end(),
                                                       [](const auto& r) { return r.pass; })),
                results.size());
    return all_pass ? 0 : 1;
}

int dispatch(int argc, char** argv) {
    CLI::App app{"exponential-sum parameter recovery from values and iterated integrals"};
    app.require_subcommand(1);
    RunConfig cfg;

    CLI::App* gen = app.add_subcommand("generate", "synthesize a model and sample files");
    gen->add_option("--n", cfg.gen.n_terms, "number of exponential terms")->required();
    gen->add_option("--seed", cfg.gen.seed, "random seed");
    gen->add_option("--points", cfg.points, "number of sample records (default 2N)");
    gen->add_option("--t-max", cfg.t_max, "sampling horizon");
    gen->add_option("--rate-min", cfg.gen.rate_min, "rate lower bound");
    gen->add_option("--rate-max", cfg.gen.rate_max, "rate upper bound");
    gen->add_option("--coeff-min", cfg.gen.coeff_min, "coefficient lower bound");
    gen->add_option("--coeff-max", cfg.gen.coeff_max, "coefficient upper bound");
    gen->add_option("--zero-ball", cfg.gen.zero_ball, "excluded |rate| radius around zero");
    gen->add_option("--min-separation", cfg.gen.min_rate_separation, "minimum rate separation");
    gen->add_flag("--nonneg", cfg.gen.nonneg_required, "require f >= 0 on [0, t-max]");
    gen->add_option("--integrals", cfg.integrals, "integral depth per record (default N)");
    gen->add_option("--out-model", cfg.out_model, "model JSON path");
    gen->add_option("--out-records", cfg.out_records, "records CSV path");
    gen->add_option("--out-dense", cfg.out_dense, "dense signal CSV path");
    gen->add_option("--dense-points", cfg.dense_points, "dense grid size");

    auto add_recover_options = [&cfg](CLI::App* cmd) {
        cmd->add_option("--records", cfg.records_path, "records CSV (t,f,J1..JN)");
        cmd->add_option("--dense", cfg.dense_path, "dense signal CSV to ingest (t,f)");
        cmd->add_option("--n", cfg.n_terms, "declared number of terms (default: from header)");
        cmd->add_option("--mode", cfg.mode, "strict | with_constant | shifted");
        cmd->add_option("--shift", [&cfg](const std::vector<std::string>& vals) {
            cfg.shift = std::stod(vals.front());
            return true;
        }, "shift value for shifted mode");
        cmd->add_option("--times", cfg.times, "ingestion sample times (grid points)")
            ->delimiter(',');
        cmd->add_option("--ingest-points", cfg.ingest_points,
                        "auto-pick this many grid sample times");
        cmd->add_flag("--reselect-rows", cfg.reselect_rows,
                      "greedy conditioning-based row selection");
        cmd->add_option("--root-tol", cfg.tol.root_residual, "rate-polynomial root residual bound");
        cmd->add_option("--imag-tol", cfg.tol.imag_tol, "imaginary-part projection threshold");
        cmd->add_option("--dup-tol", cfg.tol.duplicate_gap, "duplicate-rate threshold");
        cmd->add_option("--cond-warn", cfg.tol.cond_warn, "condition-estimate warning level");
        cmd->add_option("--spurious-factor", cfg.tol.spurious_factor,
                        "spurious-coefficient threshold factor");
    };

    CLI::App* rec = app.add_subcommand("recover", "recover parameters from samples");
    add_recover_options(rec);
    rec->add_option("--out", cfg.out_path, "result JSON path (default stdout)");

    CLI::App* ver = app.add_subcommand("verify", "check a recovery against a reference model");
    add_recover_options(ver);
    ver->add_option("--model", cfg.model_path, "reference model JSON")->required();
    ver->add_option("--r", cfg.declared_r, "also run the oversized-order check at this size");
    ver->add_option("--match-tol", cfg.match_tol, "parameter match tolerance");
    ver->add_option("--heldout-tol", cfg.heldout_tol, "held-out reconstruction tolerance");

    CLI::App* self = app.add_subcommand("selftest", "run the embedded acceptance suite");
    self->add_option("--seed", cfg.seed, "suite seed");
    self->add_flag("--quick", cfg.quick, "small-N subset, a few seconds");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return 2;
    }

    if (gen->parsed()) return cmd_generate(cfg);
    if (rec->parsed()) return cmd_recover(cfg);
    if (ver->parsed()) return cmd_verify(cfg);
    return cmd_selftest(cfg);
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return dispatch(argc, argv);
    } catch (const FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const InsufficientRecordsError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const SingularMatrixError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const ComplexRatesError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const DuplicateRatesError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 5;
    } catch (const ShiftTooSmallError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 6;
    } catch (const NonConvergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 7;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
