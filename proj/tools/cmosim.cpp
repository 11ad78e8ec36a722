// cmosim command line: price a CMO deal spec, compare the two credit
// models, trace one iteration month by month, or validate a spec file.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "cmosim/cmosim.hpp"

namespace {

namespace fs = std::filesystem;

struct CommonOptions {
    std::string spec_path;
    std::string out_dir = ".";
    std::vector<std::string> overrides;
    int threads = 0;  // 0: pick from hardware
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
    cmd->add_option("--spec", opts.spec_path, "Deal spec file")->required();
    cmd->add_option("--out", opts.out_dir, "Output directory");
    cmd->add_option("--set", opts.overrides,
                    "Override a spec key, e.g. --set model.default_rate=0.02 (repeatable)");
    cmd->add_option("--threads", opts.threads, "Worker threads (0 = hardware concurrency)");
}

// Shorthand flags are folded into --set form so they go through the same
// assignment path as the file keys.
void add_shorthand(CLI::App* cmd, CommonOptions& opts) {
    auto push = [&opts](const std::string& key) {
        return [&opts, key](const std::string& v) { opts.overrides.push_back(key + "=" + v); };
    };
    cmd->add_option_function<std::string>("--seed", push("simulation.seed"), "Override the RNG seed");
    cmd->add_option_function<std::string>("--iterations", push("simulation.iterations"),
                                          "Override the iteration count");
    cmd->add_option_function<std::string>("--model", push("simulation.credit_model"),
                                          "Credit model: basel or copula");
}

cmosim::ParsedDeal load(const CommonOptions& opts) {
    std::ifstream in(opts.spec_path);
    if (!in) throw cmosim::spec_error("cannot open spec file '" + opts.spec_path + "'");
    return cmosim::parse_deal_spec(in, opts.overrides);
}

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

std::string sanitize(const std::string& name) {
    std::string out;
    for (char c : name)
        out.push_back(std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
    return out;
}

void write_summary_files(const fs::path& dir, const cmosim::SimulationSummary& summary,
                         const std::string& suffix) {
    const std::string tag = suffix.empty() ? "" : "_" + suffix;
    cmosim::write_file_atomic(dir / ("summary" + tag + ".json"),
                              cmosim::summary_to_json(summary).dump(2) + "\n");
    for (const auto& series : summary.series)
        cmosim::write_file_atomic(dir / ("histogram" + tag + "_" + sanitize(series.name) + ".csv"),
                                  cmosim::histogram_csv(series.histogram));
}

int run_price(const CommonOptions& opts, bool dump_values) {
    const auto parsed = load(opts);
    const fs::path dir(opts.out_dir);
    fs::create_directories(dir);
    const auto results = cmosim::run_iterations(parsed.deal, parsed.params, parsed.config,
                                                resolve_threads(opts.threads));
    const auto summary = cmosim::summarize(results, parsed.deal, parsed.config);
    write_summary_files(dir, summary, "");
    if (dump_values)
        cmosim::write_file_atomic(dir / "values.csv", cmosim::values_csv(parsed.deal, results));
    for (const auto& series : summary.series)
        std::cout << series.name << ": mean=" << series.mean << " stddev=" << series.stddev
                  << "\n";
    std::cout << "wrote " << (dir / "summary.json").string() << "\n";
    return 0;
}

int run_compare(const CommonOptions& opts, bool dump_values) {
    auto parsed = load(opts);
    const fs::path dir(opts.out_dir);
    fs::create_directories(dir);
    const int threads = resolve_threads(opts.threads);

    std::vector<std::vector<cmosim::IterationResult>> results;
    for (auto kind : {cmosim::CreditModelKind::BaselOneFactor,
                      cmosim::CreditModelKind::GaussianCopula}) {
        cmosim::SimulationConfig cfg = parsed.config;
        cfg.credit_model = kind;
        results.push_back(cmosim::run_iterations(
            parsed.deal, parsed.params, cfg, threads,
            cmosim::comparison_rates_name(cfg.crn, kind)));
        const auto summary = cmosim::summarize(results.back(), parsed.deal, cfg);
        write_summary_files(dir, summary, cmosim::credit_model_name(kind));
        if (dump_values)
            cmosim::write_file_atomic(dir / ("values_" + cmosim::credit_model_name(kind) + ".csv"),
                                      cmosim::values_csv(parsed.deal, results.back()));
    }
    const auto report =
        cmosim::compare_results(parsed.deal, results[0], results[1], parsed.config);
    cmosim::write_file_atomic(dir / "comparison.json",
                              cmosim::comparison_to_json(report).dump(2) + "\n");
    std::cout << "mean difference (basel - copula): " << report.mean_difference << "\n"
              << "t = " << report.t_statistic << ", p = " << report.p_value << "\n"
              << (report.reject_at_99 ? "means differ at 99% confidence"
                                      : "no significant difference at 99% confidence")
              << "\n";
    std::cout << "wrote " << (dir / "comparison.json").string() << "\n";
    return 0;
}

int run_trace(const CommonOptions& opts, std::int64_t iteration) {
    const auto parsed = load(opts);
    if (iteration < 0 || iteration >= parsed.config.iterations)
        throw cmosim::spec_error("trace iteration " + std::to_string(iteration) +
                                 " outside 0.." + std::to_string(parsed.config.iterations - 1));
    const fs::path dir(opts.out_dir);
    fs::create_directories(dir);
    auto streams = cmosim::iteration_streams(parsed.config.seed,
                                             static_cast<std::uint64_t>(iteration), "rates",
                                             parsed.config.credit_model);
    cmosim::MonthTrace trace;
    cmosim::run_iteration(parsed.deal, parsed.params, parsed.config, streams, &trace);
    const fs::path out = dir / ("trace_iteration_" + std::to_string(iteration) + ".csv");
    cmosim::write_file_atomic(out, cmosim::trace_csv(parsed.deal, trace));
    std::cout << "wrote " << out.string() << "\n";
    return 0;
}

int run_validate(const CommonOptions& opts) {
    std::ifstream in(opts.spec_path);
    if (!in) {
        std::cerr << "error: cannot open spec file '" << opts.spec_path << "'\n";
        return 1;
    }
    // Parse without the build() step so all violations can be listed, not
    // just the first.
    cmosim::DealSpecBuilder builder = cmosim::parse_deal_spec_raw(in);
    for (const auto& ov : opts.overrides) {
        const auto eq = ov.find('=');
        if (eq == std::string::npos) throw cmosim::spec_error("override '" + ov + "' is not key=value");
        builder.apply_override(ov.substr(0, eq), ov.substr(eq + 1));
    }
    cmosim::ParsedDeal parsed;
    try {
        parsed = builder.build_unchecked();
    } catch (const cmosim::spec_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    const auto violations = cmosim::validate(parsed.deal, parsed.params, parsed.config);
    for (const auto& v : violations)
        (v.severity == cmosim::Severity::Error ? std::cerr : std::cout)
            << (v.severity == cmosim::Severity::Error ? "error: " : "warning: ") << v.message
            << "\n";
    if (cmosim::has_errors(violations)) return 1;
    std::cout << "spec is valid: " << parsed.deal.tranches.size() << " tranches, pool "
              << parsed.deal.pool_balance << ", wam " << parsed.deal.wam << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monte Carlo CMO pricer"};
    app.require_subcommand(1);

    CommonOptions price_opts, compare_opts, trace_opts, validate_opts;
    bool price_dump = false;
    bool compare_dump = false;
    std::int64_t trace_iteration = 0;

    CLI::App* price = app.add_subcommand("price", "Run the simulation and write summary outputs");
    add_common(price, price_opts);
    add_shorthand(price, price_opts);
    price->add_flag("--dump-values", price_dump, "Also write per-iteration values.csv");

    CLI::App* compare = app.add_subcommand("compare", "Price under both credit models and test the mean difference");
    add_common(compare, compare_opts);
    add_shorthand(compare, compare_opts);
    compare->add_flag("--dump-values", compare_dump, "Also write per-iteration values CSVs");

    CLI::App* trace = app.add_subcommand("trace", "Write the month-by-month cash flows of one iteration");
    add_common(trace, trace_opts);
    add_shorthand(trace, trace_opts);
    trace->add_option("--iteration,--trace-iteration", trace_iteration, "Iteration index to trace");

    CLI::App* validate_cmd = app.add_subcommand("validate", "Check a spec file and report violations");
    validate_cmd->add_option("--spec", validate_opts.spec_path, "Deal spec file")->required();
    validate_cmd->add_option("--set", validate_opts.overrides, "Override a spec key (repeatable)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (price->parsed()) return run_price(price_opts, price_dump);
        if (compare->parsed()) return run_compare(compare_opts, compare_dump);
        if (trace->parsed()) return run_trace(trace_opts, trace_iteration);
        if (validate_cmd->parsed()) return run_validate(validate_opts);
    } catch (const cmosim::parse_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const cmosim::spec_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
