#include "rpys/engine.hpp"

#include <fmt/format.h>

#include <chrono>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "rpys/spectroscopy.hpp"

namespace rpys::engine {

namespace fs = std::filesystem;
using nlohmann::json;
using script::Command;
using script::List;
using script::Value;

CommandError::CommandError(const std::string& command, const script::SourceSpan& span,
                           const std::string& message, bool io)
    : Error(fmt::format("line {}, column {}: {}: {}", span.line, span.column, command, message)),
      command_(command),
      span_(span),
      message_(message),
      io_(io) {}

int RunReport::exit_code() const noexcept {
    switch (failure) {
        case FailureKind::none: return 0;
        case FailureKind::script: return 1;
        case FailureKind::io: return 2;
    }
    return 1;
}

json RunReport::to_json(bool include_timings) const {
    json cmds = json::array();
    for (const auto& c : commands) {
        json j = {{"command", c.name}, {"line", c.span.line}, {"column", c.span.column}};
        if (c.counts) j["counts"] = rpys::to_json(*c.counts);
        if (!c.output.empty()) j["output"] = c.output;
        if (include_timings) j["duration_ms"] = c.duration_ms;
        cmds.push_back(std::move(j));
    }
    json out = {{"ok", failure == FailureKind::none}, {"commands", std::move(cmds)}};
    if (failure != FailureKind::none) {
        out["error"] = error;
        out["exit_code"] = exit_code();
    }
    return out;
}

namespace {

// Typed access to a command's arguments. Every key must be consumed by the
// handler; leftovers are reported as unknown.
class Args {
public:
    explicit Args(const Command& cmd) : cmd_(cmd) {}

    [[noreturn]] void fail(const std::string& msg) const {
        throw CommandError(cmd_.name, cmd_.span, msg);
    }

    const Value* get(std::string_view key) {
        used_.insert(std::string(key));
        return cmd_.find(key);
    }

    const Value& require(std::string_view key) {
        const Value* v = get(key);
        if (!v) fail(fmt::format("missing required argument '{}'", key));
        return *v;
    }

    std::string text(const Value& v, std::string_view key) const {
        if (auto* s = std::get_if<std::string>(&v.data)) return *s;
        mismatch(v, key, "text");
    }
    std::int64_t integer(const Value& v, std::string_view key) const {
        if (auto* i = std::get_if<std::int64_t>(&v.data)) return *i;
        mismatch(v, key, "integer");
    }
    double real(const Value& v, std::string_view key) const {
        if (auto* d = std::get_if<double>(&v.data)) return *d;
        if (auto* i = std::get_if<std::int64_t>(&v.data)) return static_cast<double>(*i);
        mismatch(v, key, "number");
    }
    bool flag(const Value& v, std::string_view key) const {
        if (auto* b = std::get_if<bool>(&v.data)) return *b;
        mismatch(v, key, "flag");
    }
    const List& list(const Value& v, std::string_view key) const {
        if (auto* l = std::get_if<List>(&v.data)) return *l;
        mismatch(v, key, "list");
    }

    std::string text_or(std::string_view key, std::string def) {
        auto* v = get(key);
        return v ? text(*v, key) : def;
    }
    std::optional<std::int64_t> opt_integer(std::string_view key) {
        auto* v = get(key);
        if (!v) return std::nullopt;
        return integer(*v, key);
    }
    double real_or(std::string_view key, double def) {
        auto* v = get(key);
        return v ? real(*v, key) : def;
    }
    bool flag_or(std::string_view key, bool def) {
        auto* v = get(key);
        return v ? flag(*v, key) : def;
    }

    int year(const Value& v, std::string_view key) const {
        auto y = integer(v, key);
        if (y < -100000 || y > 100000) fail(fmt::format("argument '{}': year {} out of range", key, y));
        return static_cast<int>(y);
    }

    // [lo, hi] or [lo, hi, keep_missing]. Without the third item, values
    // with no parsable year are dropped.
    YearWindow window(std::string_view key) {
        auto* v = get(key);
        if (!v) return YearWindow{};
        const auto& l = list(*v, key);
        if (l.size() != 2 && l.size() != 3)
            fail(fmt::format("argument '{}' must be [lo, hi] or [lo, hi, keep_missing]", key));
        YearWindow w;
        w.lo = year(l[0], key);
        w.hi = year(l[1], key);
        w.keep_missing = l.size() == 3 ? flag(l[2], key) : false;
        if (w.lo > w.hi) fail(fmt::format("argument '{}': lo {} exceeds hi {}", key, w.lo, w.hi));
        return w;
    }

    void finish() const {
        for (const auto& a : cmd_.args)
            if (!used_.count(a.key)) fail(fmt::format("unknown argument '{}'", a.key));
    }

private:
    [[noreturn]] void mismatch(const Value& v, std::string_view key, std::string_view want) const {
        fail(fmt::format("argument '{}' must be {}, got {}", key, want, script::type_name(v)));
    }

    const Command& cmd_;
    std::set<std::string> used_;
};

struct Step {
    ExecutionContext& ctx;
    Args& args;
    json& output;
    const Command& cmd;

    fs::path resolve(const std::string& file) const {
        fs::path p(file);
        return p.is_absolute() ? p : ctx.working_dir / p;
    }

    Workspace& workspace() const {
        if (!ctx.workspace) args.fail("no workspace loaded; run importFile first");
        return *ctx.workspace;
    }
};

void write_output(const Step& s, const std::string& file, const std::string& bytes) {
    try {
        write_file(s.resolve(file), bytes);
    } catch (const IoError& e) {
        throw CommandError(s.cmd.name, s.cmd.span, e.what(), true);
    }
}

void cmd_import(Step& s) {
    auto file = s.args.text(s.args.require("file"), "file");
    auto type = s.args.text_or("type", "WOS");
    ImportConfig cfg;
    cfg.rpy = s.args.window("RPY");
    cfg.py = s.args.window("PY");
    auto max_cr = s.args.opt_integer("maxCR").value_or(0);
    if (max_cr < 0) s.args.fail("argument 'maxCR' must not be negative");
    cfg.max_cr_per_record = static_cast<std::size_t>(max_cr);
    s.args.finish();
    if (type != "WOS") s.args.fail(fmt::format("unsupported import type \"{}\"", type));

    ParseResult parsed;
    try {
        parsed = parse_export_file(s.resolve(file), cfg);
    } catch (const IoError& e) {
        throw CommandError(s.cmd.name, s.cmd.span, e.what(), true);
    } catch (const FormatError& e) {
        throw CommandError(s.cmd.name, s.cmd.span, fmt::format("{}: {}", file, e.what()), true);
    }
    const auto& r = parsed.report;
    s.output = {{"records_read", r.records_read},
                {"records_dropped_by_window", r.records_dropped_by_window},
                {"cr_lines_read", r.cr_lines_read},
                {"cr_lines_dropped_by_window", r.cr_lines_dropped_by_window},
                {"cr_lines_truncated", r.cr_lines_truncated},
                {"cr_lines_dropped_with_record", r.cr_lines_dropped_with_record},
                {"malformed_lines", r.malformed_lines.size()}};
    s.ctx.workspace = aggregate(std::move(parsed.records), cfg);
    s.ctx.last_assignment.reset();
}

void cmd_info(Step& s) {
    s.args.finish();
    s.output = to_json(s.ctx.workspace ? info(*s.ctx.workspace) : WorkspaceInfo{});
}

void cmd_cluster(Step& s) {
    ClusterParams p;
    p.threshold = s.args.real_or("threshold", p.threshold);
    p.use_volume = s.args.flag_or("volume", false);
    p.use_page = s.args.flag_or("page", false);
    p.use_doi = s.args.flag_or("DOI", false);
    s.args.finish();
    p.validate();
    auto res = cluster(std::move(s.workspace()), p, s.ctx.backend);
    std::size_t multi = 0;
    for (const auto& [id, members] : res.assignment.members)
        if (members.size() > 1) ++multi;
    s.output = {{"clusters", res.assignment.members.size()}, {"multi_member_clusters", multi}};
    s.ctx.workspace = std::move(res.workspace);
    s.ctx.last_assignment = std::move(res.assignment);
}

void cmd_merge(Step& s) {
    s.args.finish();
    if (!s.ctx.last_assignment) s.args.fail("merge before cluster");
    auto& ws = s.workspace();
    auto before = ws.variants.size();
    auto asg = restrict_to(*s.ctx.last_assignment, ws);
    ws = merge(std::move(ws), asg);
    s.ctx.last_assignment = restrict_to(asg, ws);
    s.output = {{"variants_removed", before - ws.variants.size()}};
}

void cmd_remove(Step& s) {
    const auto& v = s.args.require("N_CR");
    s.args.finish();
    const auto& l = s.args.list(v, "N_CR");
    if (l.size() != 2) s.args.fail("argument 'N_CR' must be [lo, hi]");
    auto lo = s.args.integer(l[0], "N_CR");
    auto hi = s.args.integer(l[1], "N_CR");
    auto& ws = s.workspace();
    auto before = ws.variants.size();
    ws = remove_by_ncr(std::move(ws), lo, hi);
    s.output = {{"variants_removed", before - ws.variants.size()}};
}

void cmd_save(Step& s) {
    auto file = s.args.text(s.args.require("file"), "file");
    s.args.finish();
    write_output(s, file, serialize_workspace(s.workspace()));
}

void cmd_export(Step& s) {
    auto file = s.args.text(s.args.require("file"), "file");
    auto type = s.args.text(s.args.require("type"), "type");
    s.args.finish();
    const auto& ws = s.workspace();
    if (type == "CSV_CR")
        write_output(s, file, export_cr_table(ws));
    else if (type == "CSV_GRAPH")
        write_output(s, file, export_graph(ws));
    else
        s.args.fail(fmt::format("unsupported export type \"{}\"", type));
}

std::vector<MarkerSpec> markers_arg(Step& s) {
    std::vector<MarkerSpec> out;
    auto add = [&](const Value& v, std::string_view key) {
        try {
            out.push_back(parse_marker(s.args.text(v, key)));
        } catch (const ArgumentError& e) {
            s.args.fail(fmt::format("argument '{}': {}", key, e.what()));
        }
    };
    if (auto* v = s.args.get("marker")) add(*v, "marker");
    if (auto* v = s.args.get("markers"))
        for (const auto& item : s.args.list(*v, "markers")) add(item, "markers");
    if (out.empty()) s.args.fail("missing required argument 'marker' or 'markers'");
    return out;
}

void cmd_cocite(Step& s) {
    auto markers = markers_arg(s);
    auto mode_text = s.args.text_or("mode", "any");
    s.args.finish();
    MarkerMode mode;
    try {
        mode = parse_marker_mode(mode_text);
    } catch (const ArgumentError& e) {
        s.args.fail(e.what());
    }
    auto& ws = s.workspace();
    auto before = ws.records.size();
    auto res = cocitation_filter(std::move(ws), markers, mode);
    s.output = {{"records_kept", res.workspace.records.size()},
                {"records_removed", before - res.workspace.records.size()}};
    if (res.warning) s.output["warning"] = *res.warning;
    ws = std::move(res.workspace);
    s.ctx.last_assignment.reset();
}

// lo/hi default to the span of cited years (see spectrum_range).
std::pair<int, int> year_range(Step& s, const Workspace& ws) {
    auto lo = s.args.opt_integer("lo");
    auto hi = s.args.opt_integer("hi");
    std::pair<int, int> r;
    if (!lo || !hi) {
        auto span = spectrum_range(ws);
        if (!span) s.args.fail("no cited reference has a publication year");
        r = *span;
    }
    if (lo) r.first = static_cast<int>(*lo);
    if (hi) r.second = static_cast<int>(*hi);
    if (r.first > r.second) s.args.fail(fmt::format("lo {} exceeds hi {}", r.first, r.second));
    return r;
}

void cmd_spectrum(Step& s) {
    const auto& ws = s.workspace();
    auto [lo, hi] = year_range(s, ws);
    auto file = s.args.text_or("file", "");
    s.args.finish();
    auto spec = spectrum(ws, lo, hi, s.ctx.backend);
    std::int64_t total = 0;
    for (const auto& p : spec) total += p.ncr;
    s.output = {{"lo", lo}, {"hi", hi}, {"ncr_total", total}};
    if (!file.empty()) {
        std::ostringstream os;
        write_graph_csv(os, spec);
        write_output(s, file, os.str());
    }
}

void cmd_peaks(Step& s) {
    const auto& ws = s.workspace();
    auto [lo, hi] = year_range(s, ws);
    auto min_dev = s.args.real_or("min_dev", 1.0);
    auto file = s.args.text_or("file", "");
    s.args.finish();
    auto spec = spectrum(ws, lo, hi, s.ctx.backend);
    auto years = detect_peaks(spec, min_dev);
    s.output = {{"peaks", years}};
    if (!file.empty()) {
        std::ostringstream os;
        write_peaks_csv(os, spec, years);
        write_output(s, file, os.str());
    }
}

void cmd_top_refs(Step& s) {
    auto rpy = s.args.year(s.args.require("rpy"), "rpy");
    auto share = s.args.real_or("share", 0.1);
    s.args.finish();
    if (!(share >= 0.0 && share < 1.0)) s.args.fail("argument 'share' must lie in [0, 1)");
    json refs = json::array();
    for (const auto& c : top_contributors(s.workspace(), rpy, share))
        refs.push_back({{"variant_id", c.variant_id}, {"raw", c.raw}, {"ncr", c.ncr}, {"share", c.share}});
    s.output = {{"rpy", rpy}, {"refs", std::move(refs)}};
}

using Handler = void (*)(Step&);

const std::map<std::string, Handler, std::less<>>& handlers() {
    static const std::map<std::string, Handler, std::less<>> table = {
        {"importFile", cmd_import}, {"info", cmd_info},         {"cluster", cmd_cluster},
        {"merge", cmd_merge},       {"removeCR", cmd_remove},   {"saveFile", cmd_save},
        {"exportFile", cmd_export}, {"cocite", cmd_cocite},     {"spectrum", cmd_spectrum},
        {"peaks", cmd_peaks},       {"topRefs", cmd_top_refs},
    };
    return table;
}

}  // namespace

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> n;
        for (const auto& [k, v] : handlers()) n.push_back(k);
        return n;
    }();
    return names;
}

RunReport execute(const script::ScriptProgram& prog, ExecutionContext& ctx) {
    RunReport report;
    for (const auto& cmd : prog.commands) {
        auto started = std::chrono::steady_clock::now();
        auto fail = [&](FailureKind kind, const std::string& msg, const script::SourceSpan& span) {
            report.failure = kind;
            report.error = fmt::format("line {}, column {}: {}: {}", span.line, span.column,
                                       cmd.name, msg);
            auto excerpt = script::caret_excerpt(prog.source, span.line, span.column);
            if (!excerpt.empty()) report.error += "\n" + excerpt;
        };

        auto it = handlers().find(cmd.name);
        if (it == handlers().end()) {
            fail(FailureKind::script, fmt::format("unknown command '{}'", cmd.name), cmd.span);
            return report;
        }

        ExecutionContext next = ctx;
        CommandReport entry;
        entry.name = cmd.name;
        entry.span = cmd.span;
        Args args(cmd);
        Step step{next, args, entry.output, cmd};
        try {
            it->second(step);
        } catch (const CommandError& e) {
            fail(e.is_io() ? FailureKind::io : FailureKind::script, e.message(), e.span());
            return report;
        } catch (const IoError& e) {
            fail(FailureKind::io, e.what(), cmd.span);
            return report;
        } catch (const Error& e) {
            fail(FailureKind::script, e.what(), cmd.span);
            return report;
        }

        ctx = std::move(next);
        if (ctx.workspace) entry.counts = info(*ctx.workspace);
        entry.duration_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started)
                .count();
        report.commands.push_back(std::move(entry));
    }
    return report;
}

}  // namespace rpys::engine
