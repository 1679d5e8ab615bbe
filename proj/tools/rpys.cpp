// rpys: command-line front end.
//
//   rpys run SCRIPT      execute a pipeline script
//   rpys check SCRIPT    parse only
//   rpys analyze ...     one-shot pipeline driven by flags
//   rpys serve           HTTP service for interactive sessions
//
// Exit codes: 0 success, 1 script or argument error, 2 I/O error.

#include <fmt/format.h>

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "rpys/disambiguation.hpp"
#include "rpys/engine.hpp"
#include "rpys/error.hpp"
#include "rpys/script.hpp"
#include "rpys/service.hpp"
#include "rpys/spectroscopy.hpp"
#include "rpys/store.hpp"

namespace fs = std::filesystem;
using namespace rpys;

namespace {

constexpr int kOk = 0;
constexpr int kScriptError = 1;
constexpr int kIoError = 2;

struct Usage : Error {
    using Error::Error;
};

// "LO:HI" or "LO:HI:keep-missing".
YearWindow parse_window(const std::string& text, const std::string& flag) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() != 2 && parts.size() != 3)
        throw Usage(fmt::format("{}: expected LO:HI[:keep-missing], got '{}'", flag, text));
    YearWindow w;
    try {
        std::size_t used = 0;
        w.lo = std::stoi(parts[0], &used);
        if (used != parts[0].size()) throw std::invalid_argument("");
        w.hi = std::stoi(parts[1], &used);
        if (used != parts[1].size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
        throw Usage(fmt::format("{}: years must be integers, got '{}'", flag, text));
    }
    w.keep_missing = false;
    if (parts.size() == 3) {
        if (parts[2] == "keep-missing")
            w.keep_missing = true;
        else if (parts[2] != "drop-missing")
            throw Usage(fmt::format("{}: third part must be keep-missing or drop-missing", flag));
    }
    if (w.lo > w.hi) throw Usage(fmt::format("{}: {} exceeds {}", flag, w.lo, w.hi));
    return w;
}

int cmd_check(const fs::path& path) {
    std::string src;
    try {
        src = read_file(path);
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kIoError;
    }
    try {
        auto prog = script::parse_script(src);
        std::set<std::string> known(engine::command_names().begin(), engine::command_names().end());
        for (const auto& c : prog.commands) {
            if (!known.count(c.name)) {
                std::cerr << fmt::format("{}:{}:{}: unknown command '{}'\n{}\n", path.string(), c.span.line,
                                         c.span.column, c.name,
                                         script::caret_excerpt(src, c.span.line, c.span.column));
                return kScriptError;
            }
        }
        std::cout << fmt::format("{}: {} commands\n", path.string(), prog.commands.size());
        return kOk;
    } catch (const script::ScriptError& e) {
        std::cerr << fmt::format("{}:{}:{}: {}\n{}\n", path.string(), e.line(), e.column(), e.message(),
                                 e.excerpt());
        return kScriptError;
    }
}

struct RunOptions {
    fs::path script;
    std::optional<fs::path> workdir;
    std::optional<fs::path> report;
    bool timings = false;
    bool serial = false;
};

int cmd_run(const RunOptions& o) {
    std::string src;
    try {
        src = read_file(o.script);
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kIoError;
    }
    script::ScriptProgram prog;
    try {
        prog = script::parse_script(src);
    } catch (const script::ScriptError& e) {
        std::cerr << fmt::format("{}:{}:{}: {}\n{}\n", o.script.string(), e.line(), e.column(), e.message(),
                                 e.excerpt());
        return kScriptError;
    }
    engine::ExecutionContext ctx;
    ctx.working_dir = o.workdir ? *o.workdir : o.script.parent_path();
    if (ctx.working_dir.empty()) ctx.working_dir = ".";
    ctx.backend = o.serial ? Backend::serial : Backend::parallel;
    auto report = engine::execute(prog, ctx);

    auto text = report.to_json(o.timings).dump(2) + "\n";
    if (o.report) {
        try {
            write_file(*o.report, text);
        } catch (const IoError& e) {
            std::cerr << "error: " << e.what() << "\n";
            return kIoError;
        }
    } else {
        std::cout << text;
    }
    if (report.failure != engine::FailureKind::none)
        std::cerr << o.script.string() << ": " << report.error << "\n";
    return report.exit_code();
}

struct AnalyzeOptions {
    std::optional<fs::path> input;
    std::optional<fs::path> load;
    std::optional<std::string> rpy, py;
    std::size_t max_cr = 0;
    std::optional<double> cluster_threshold;
    std::vector<std::string> cluster_use;
    std::optional<std::string> remove_ncr;
    std::vector<std::string> markers;
    std::string marker_mode = "any";
    double peaks_min_dev = 1.0;
    double top_share = 0.1;
    std::optional<fs::path> export_cr, export_graph, export_peaks, save;
    bool serial = false;
};

int cmd_analyze(const AnalyzeOptions& o) {
    auto backend = o.serial ? Backend::serial : Backend::parallel;
    if (o.input.has_value() == o.load.has_value()) throw Usage("give exactly one of --input and --load");

    Workspace ws;
    if (o.input) {
        ImportConfig cfg;
        if (o.rpy) cfg.rpy = parse_window(*o.rpy, "--rpy");
        if (o.py) cfg.py = parse_window(*o.py, "--py");
        cfg.max_cr_per_record = o.max_cr;
        auto parsed = parse_export_file(*o.input, cfg);
        for (const auto& m : parsed.report.malformed_lines)
            std::cerr << fmt::format("warning: {}:{}: {}\n", o.input->string(), m.line_number, m.reason);
        ws = aggregate(std::move(parsed.records), cfg);
    } else {
        if (o.rpy || o.py || o.max_cr) throw Usage("--rpy, --py and --max-cr apply to --input only");
        ws = load_workspace(*o.load);
    }

    if (!o.markers.empty()) {
        std::vector<MarkerSpec> markers;
        for (const auto& m : o.markers) markers.push_back(parse_marker(m));
        auto r = cocitation_filter(std::move(ws), markers, parse_marker_mode(o.marker_mode));
        if (r.warning) std::cerr << "warning: " << *r.warning << "\n";
        ws = std::move(r.workspace);
    }

    if (o.cluster_threshold || !o.cluster_use.empty()) {
        ClusterParams p;
        if (o.cluster_threshold) p.threshold = *o.cluster_threshold;
        for (const auto& u : o.cluster_use) {
            if (u == "volume")
                p.use_volume = true;
            else if (u == "page")
                p.use_page = true;
            else if (u == "doi")
                p.use_doi = true;
            else
                throw Usage(fmt::format("--cluster-use: unknown constraint '{}'", u));
        }
        p.validate();
        auto c = cluster(std::move(ws), p, backend);
        ws = merge(std::move(c.workspace), c.assignment);
    }

    if (o.remove_ncr) {
        auto w = parse_window(*o.remove_ncr, "--remove-ncr");
        ws = remove_by_ncr(std::move(ws), w.lo, w.hi);
    }

    if (o.export_cr) export_cr_table(ws, *o.export_cr);
    if (o.export_graph) export_graph(ws, *o.export_graph);
    if (o.save) save_workspace(ws, *o.save);

    auto i = info(ws);
    std::cout << fmt::format("records {}  cr_mentions {}  variants {}  ncr {}\n", i.records, i.cr_mentions,
                             i.distinct_variants, i.ncr_total);
    auto range = spectrum_range(ws);
    if (!range) return kOk;
    auto spec = spectrum(ws, range->first, range->second, backend);
    auto years = detect_peaks(spec, o.peaks_min_dev);
    if (o.export_peaks) {
        std::ostringstream os;
        write_peaks_csv(os, spec, years);
        write_file(*o.export_peaks, os.str());
    }
    for (const auto& p : peak_reports(ws, spec, o.peaks_min_dev, o.top_share)) {
        std::cout << fmt::format("peak {}  ncr {}  median_dev {}\n", p.rpy, p.ncr, format_number(p.median_dev));
        for (const auto& c : p.top_refs)
            std::cout << fmt::format("  {:5.1f}%  {:>4}  {}{}\n", 100.0 * c.share, c.ncr, c.raw,
                                     is_merge_product(ws, c.variant_id) ? " (M)" : "");
    }
    return kOk;
}

struct ServeOptions {
    int port = 8080;
    bool open = false;
    std::optional<fs::path> ui;
    std::size_t max_upload_mb = 64;
};

service::Service* g_service = nullptr;

int cmd_serve(const ServeOptions& o) {
    service::ServiceConfig cfg;
    cfg.port = o.port;
    cfg.max_upload_bytes = o.max_upload_mb << 20;
    if (o.ui) {
        if (!fs::is_directory(*o.ui)) {
            std::cerr << "error: --ui " << o.ui->string() << " is not a directory\n";
            return kIoError;
        }
        cfg.static_dir = *o.ui;
    }
    service::Service svc(cfg);
    int port = svc.bind();
    auto url = fmt::format("http://{}:{}/", cfg.host, port);
    std::cout << "listening on " << url << std::endl;
    if (o.open) {
        auto cmd = fmt::format("xdg-open '{}' >/dev/null 2>&1 &", url);
        if (std::system(cmd.c_str()) != 0) std::cerr << "warning: could not open a browser\n";
    }
    g_service = &svc;
    std::signal(SIGINT, [](int) {
        if (g_service) g_service->stop();
    });
    std::signal(SIGTERM, [](int) {
        if (g_service) g_service->stop();
    });
    svc.run();
    g_service = nullptr;
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Reference publication year spectroscopy workbench"};
    app.require_subcommand(1);

    RunOptions run_opts;
    auto* run = app.add_subcommand("run", "Execute a pipeline script");
    run->add_option("script", run_opts.script, "Script file")->required();
    run->add_option("--workdir", run_opts.workdir, "Directory for relative file names (default: the script's)");
    run->add_option("--report", run_opts.report, "Write the JSON run report here instead of stdout");
    run->add_flag("--timings", run_opts.timings, "Include per-command durations in the report");
    run->add_flag("--serial", run_opts.serial, "Use the serial kernels");

    fs::path check_path;
    auto* check = app.add_subcommand("check", "Parse a pipeline script without running it");
    check->add_option("script", check_path, "Script file")->required();

    AnalyzeOptions an;
    auto* analyze = app.add_subcommand("analyze", "Import, filter, cluster and report in one go");
    analyze->add_option("--input", an.input, "Tagged export file");
    analyze->add_option("--load", an.load, "Workspace file");
    analyze->add_option("--rpy", an.rpy, "Cited-year window LO:HI[:keep-missing]");
    analyze->add_option("--py", an.py, "Citing-year window LO:HI[:keep-missing]");
    analyze->add_option("--max-cr", an.max_cr, "Keep at most N cited references per record (0: all)");
    analyze->add_option("--cluster-threshold", an.cluster_threshold, "Cluster and merge at this similarity");
    analyze->add_option("--cluster-use", an.cluster_use, "Constraints: volume,page,doi")->delimiter(',');
    analyze->add_option("--remove-ncr", an.remove_ncr, "Drop variants with LO <= ncr <= HI");
    analyze->add_option("--marker", an.markers, "Marker: author=..,rpy=..,volume=..,page=..,doi=..");
    analyze->add_option("--marker-mode", an.marker_mode, "any or all")
        ->check(CLI::IsMember({"any", "all"}));
    analyze->add_option("--peaks-min-dev", an.peaks_min_dev, "Minimum median deviation of a peak");
    analyze->add_option("--top-share", an.top_share, "Share a top reference must exceed");
    analyze->add_option("--export-cr", an.export_cr, "Write CSV_CR");
    analyze->add_option("--export-graph", an.export_graph, "Write CSV_GRAPH");
    analyze->add_option("--export-peaks", an.export_peaks, "Write the peaks CSV");
    analyze->add_option("--save", an.save, "Write the workspace file");
    analyze->add_flag("--serial", an.serial, "Use the serial kernels");

    ServeOptions sv;
    auto* serve = app.add_subcommand("serve", "Serve the HTTP API (and the UI, if built)");
    serve->add_option("--port", sv.port, "Port (0 picks a free one)");
    serve->add_flag("--open", sv.open, "Open a browser");
    serve->add_option("--ui", sv.ui, "Directory with the built UI");
    serve->add_option("--max-upload-mb", sv.max_upload_mb, "Upload size cap");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kOk : kScriptError;
    }

    try {
        if (*run) return cmd_run(run_opts);
        if (*check) return cmd_check(check_path);
        if (*analyze) return cmd_analyze(an);
        if (*serve) return cmd_serve(sv);
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kIoError;
    } catch (const FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kIoError;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kScriptError;
    }
    return kOk;
}
