#include "rpys/service.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <map>
#include <mutex>
#include <random>
#include <shared_mutex>
#include <sstream>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "rpys/disambiguation.hpp"
#include "rpys/error.hpp"
#include "rpys/spectroscopy.hpp"
#include "rpys/store.hpp"

namespace rpys::service {

using nlohmann::json;

namespace {

// An immutable state of one session. Readers keep their snapshot alive
// through the shared_ptr while a writer publishes the next one.
struct Snapshot {
    std::uint64_t version = 0;
    Workspace workspace;
};

struct Session {
    std::string id;
    std::mutex writer;  // one mutation at a time
    mutable std::mutex mu;
    std::shared_ptr<const Snapshot> current;

    std::shared_ptr<const Snapshot> snapshot() const {
        std::lock_guard lock(mu);
        return current;
    }
    void publish(std::shared_ptr<const Snapshot> s) {
        std::lock_guard lock(mu);
        current = std::move(s);
    }
};

// Request body or query problems, reported as 422 with one message per field.
struct Invalid {
    std::map<std::string, std::string> fields;
};

struct HttpError {
    int status;
    std::string message;
};

[[noreturn]] void invalid(const std::string& field, const std::string& msg) {
    throw Invalid{{{field, msg}}};
}

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

json parse_body(const httplib::Request& req) {
    if (req.body.empty()) return json::object();
    json j = json::parse(req.body, nullptr, false);
    if (j.is_discarded()) throw HttpError{400, "request body is not valid JSON"};
    if (!j.is_object()) throw HttpError{400, "request body must be a JSON object"};
    return j;
}

std::int64_t int_field(const json& body, const std::string& key) {
    if (!body.contains(key)) invalid(key, "required");
    const auto& v = body.at(key);
    if (!v.is_number_integer()) invalid(key, "must be an integer");
    return v.get<std::int64_t>();
}

bool bool_field(const json& body, const std::string& key, bool def) {
    if (!body.contains(key)) return def;
    const auto& v = body.at(key);
    if (!v.is_boolean()) invalid(key, "must be true or false");
    return v.get<bool>();
}

std::uint64_t expected_version(const json& body) {
    auto v = int_field(body, "expected_version");
    if (v < 0) invalid("expected_version", "must not be negative");
    return static_cast<std::uint64_t>(v);
}

// [lo, hi], [lo, hi, keep_missing] or {"lo", "hi", "keep_missing"}.
YearWindow window_field(const json& body, const std::string& key) {
    if (!body.contains(key)) return YearWindow{};
    const auto& v = body.at(key);
    YearWindow w;
    auto year = [&](const json& y) {
        if (!y.is_number_integer()) invalid(key, "years must be integers");
        return y.get<int>();
    };
    if (v.is_array() && (v.size() == 2 || v.size() == 3)) {
        w.lo = year(v[0]);
        w.hi = year(v[1]);
        w.keep_missing = false;
        if (v.size() == 3) {
            if (!v[2].is_boolean()) invalid(key, "keep_missing must be true or false");
            w.keep_missing = v[2].get<bool>();
        }
    } else if (v.is_object() && v.contains("lo") && v.contains("hi")) {
        w.lo = year(v.at("lo"));
        w.hi = year(v.at("hi"));
        w.keep_missing = bool_field(v, "keep_missing", true);
    } else {
        invalid(key, "must be [lo, hi], [lo, hi, keep_missing] or {lo, hi, keep_missing}");
    }
    if (w.lo > w.hi) invalid(key, "lo exceeds hi");
    return w;
}

std::optional<std::int64_t> int_param(const httplib::Request& req, const std::string& key) {
    if (!req.has_param(key)) return std::nullopt;
    auto text = req.get_param_value(key);
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || p != text.data() + text.size()) invalid(key, "must be an integer");
    return v;
}

std::optional<double> real_param(const httplib::Request& req, const std::string& key) {
    if (!req.has_param(key)) return std::nullopt;
    auto text = req.get_param_value(key);
    try {
        std::size_t used = 0;
        double v = std::stod(text, &used);
        if (used == text.size()) return v;
    } catch (const std::exception&) {
    }
    invalid(key, "must be a number");
}

std::pair<int, int> range_params(const httplib::Request& req, const Workspace& ws) {
    auto lo = int_param(req, "lo");
    auto hi = int_param(req, "hi");
    std::pair<int, int> r{0, 0};
    if (!lo || !hi) {
        auto span = spectrum_range(ws);
        if (!span) invalid(lo ? "hi" : "lo", "required: no cited reference has a year");
        r = *span;
    }
    if (lo) r.first = static_cast<int>(*lo);
    if (hi) r.second = static_cast<int>(*hi);
    if (r.first > r.second) invalid("lo", "exceeds hi");
    return r;
}

json point_json(const SpectrumPoint& p) {
    return {{"rpy", p.rpy}, {"ncr", p.ncr}, {"distinct_variants", p.distinct}, {"median_dev", p.median_dev}};
}

json contributor_json(const Workspace& ws, const Contributor& c) {
    return {{"variant_id", c.variant_id}, {"raw", c.raw}, {"ncr", c.ncr}, {"share", c.share},
            {"merged", is_merge_product(ws, c.variant_id)}};
}

std::string new_token() {
    static std::mutex mu;
    static std::mt19937_64 gen{std::random_device{}()};
    std::lock_guard lock(mu);
    return fmt::format("{:016x}{:016x}", gen(), gen());
}

}  // namespace

struct Service::Impl {
    ServiceConfig cfg;
    httplib::Server server;
    std::thread thread;
    int port = -1;

    std::shared_mutex sessions_mu;
    std::map<std::string, std::shared_ptr<Session>> sessions;

    explicit Impl(ServiceConfig c) : cfg(std::move(c)) { routes(); }

    std::shared_ptr<Session> session(const httplib::Request& req) {
        auto id = req.path_params.at("id");
        std::shared_lock lock(sessions_mu);
        auto it = sessions.find(id);
        if (it == sessions.end()) throw HttpError{404, fmt::format("unknown session '{}'", id)};
        return it->second;
    }

    json summary(const Session& s, const Snapshot& snap) const {
        return {{"session_id", s.id}, {"version", snap.version}, {"info", to_json(info(snap.workspace))}};
    }

    // Wraps a handler with the error-to-status mapping.
    template <typename F>
    httplib::Server::Handler guarded(F f) {
        return [f](const httplib::Request& req, httplib::Response& res) {
            try {
                f(req, res);
            } catch (const HttpError& e) {
                send_json(res, e.status, {{"error", e.message}});
            } catch (const Invalid& e) {
                send_json(res, 422, {{"error", "invalid arguments"}, {"fields", e.fields}});
            } catch (const ArgumentError& e) {
                send_json(res, 422, {{"error", e.what()}, {"fields", json::object()}});
            } catch (const ConsistencyError& e) {
                send_json(res, 422, {{"error", e.what()}, {"fields", json::object()}});
            } catch (const std::exception& e) {
                send_json(res, 500, {{"error", e.what()}});
            }
        };
    }

    // Runs `op` on a copy of the current workspace and publishes the result
    // as the next version. `op` may add fields to the response.
    template <typename Op>
    void mutate(const httplib::Request& req, httplib::Response& res, const json& body, Op op) {
        auto s = session(req);
        auto expected = expected_version(body);
        std::lock_guard writer(s->writer);
        auto cur = s->snapshot();
        if (cur->version != expected)
            throw HttpError{409, fmt::format("stale version {}: session is at version {}", expected,
                                             cur->version)};
        json extra = json::object();
        Workspace next = op(Workspace(cur->workspace), extra);
        auto snap = std::make_shared<Snapshot>(Snapshot{cur->version + 1, std::move(next)});
        s->publish(snap);
        json out = summary(*s, *snap);
        out.update(extra);
        send_json(res, 200, out);
    }

    void routes() {
        server.set_payload_max_length(cfg.max_upload_bytes);
        if (cfg.static_dir) server.set_mount_point("/", cfg.static_dir->string());

        server.Post("/sessions", guarded([this](const auto& req, auto& res) { create(req, res); }));

        server.Get("/sessions/:id", guarded([this](const auto& req, auto& res) {
            auto s = session(req);
            auto snap = s->snapshot();
            send_json(res, 200, summary(*s, *snap));
        }));

        server.Delete("/sessions/:id", guarded([this](const auto& req, auto& res) {
            auto s = session(req);
            std::unique_lock lock(sessions_mu);
            sessions.erase(s->id);
            res.status = 204;
        }));

        server.Get("/sessions/:id/spectrum", guarded([this](const auto& req, auto& res) {
            auto snap = session(req)->snapshot();
            auto [lo, hi] = range_params(req, snap->workspace);
            json arr = json::array();
            for (const auto& p : spectrum(snap->workspace, lo, hi, cfg.backend)) arr.push_back(point_json(p));
            send_json(res, 200, arr);
        }));

        server.Get("/sessions/:id/years/:rpy/refs",
                   guarded([this](const auto& req, auto& res) { year_refs(req, res); }));

        server.Get("/sessions/:id/peaks", guarded([this](const auto& req, auto& res) {
            auto snap = session(req)->snapshot();
            const auto& ws = snap->workspace;
            auto min_dev = real_param(req, "min_dev").value_or(1.0);
            auto share = real_param(req, "share").value_or(0.1);
            if (!(share >= 0.0 && share < 1.0)) invalid("share", "must lie in [0, 1)");
            json arr = json::array();
            if (spectrum_range(ws) || (req.has_param("lo") && req.has_param("hi"))) {
                auto [lo, hi] = range_params(req, ws);
                auto spec = spectrum(ws, lo, hi, cfg.backend);
                for (const auto& p : peak_reports(ws, spec, min_dev, share)) {
                    json refs = json::array();
                    for (const auto& c : p.top_refs) refs.push_back(contributor_json(ws, c));
                    arr.push_back({{"rpy", p.rpy}, {"ncr", p.ncr}, {"median_dev", p.median_dev},
                                   {"top_refs", std::move(refs)}});
                }
            }
            send_json(res, 200, arr);
        }));

        server.Get("/sessions/:id/export", guarded([this](const auto& req, auto& res) {
            auto snap = session(req)->snapshot();
            auto type = req.get_param_value("type");
            if (type == "CSV_CR") {
                res.set_content(export_cr_table(snap->workspace), "text/csv; charset=utf-8");
            } else if (type == "CSV_GRAPH") {
                res.set_content(export_graph(snap->workspace), "text/csv; charset=utf-8");
            } else if (type == "WORKSPACE") {
                res.set_content(serialize_workspace(snap->workspace), "application/json");
            } else {
                invalid("type", "must be CSV_CR, CSV_GRAPH or WORKSPACE");
            }
            res.status = 200;
        }));

        server.Get("/sessions/:id/history", guarded([this](const auto& req, auto& res) {
            auto s = session(req);
            auto snap = s->snapshot();
            json h = json::array();
            for (const auto& e : snap->workspace.history) h.push_back({{"op", e.op}, {"args", e.args}});
            send_json(res, 200, {{"session_id", s->id}, {"version", snap->version}, {"history", h}});
        }));

        server.Post("/sessions/:id/cluster", guarded([this](const auto& req, auto& res) {
            auto body = parse_body(req);
            ClusterParams p;
            if (body.contains("threshold")) {
                if (!body["threshold"].is_number()) invalid("threshold", "must be a number");
                p.threshold = body["threshold"].template get<double>();
            }
            if (!(p.threshold >= 0.0 && p.threshold <= 1.0)) invalid("threshold", "must lie in [0, 1]");
            p.use_volume = bool_field(body, "use_volume", false);
            p.use_page = bool_field(body, "use_page", false);
            p.use_doi = bool_field(body, "use_doi", false);
            mutate(req, res, body, [&](Workspace ws, json& extra) {
                auto before = ws.variants.size();
                auto c = cluster(std::move(ws), p, cfg.backend);
                auto merged = merge(std::move(c.workspace), c.assignment);
                extra["variants_removed"] = before - merged.variants.size();
                return merged;
            });
        }));

        server.Post("/sessions/:id/merge", guarded([this](const auto& req, auto& res) {
            auto body = parse_body(req);
            if (!body.contains("variant_ids") || !body["variant_ids"].is_array())
                invalid("variant_ids", "must be a list of variant ids");
            std::vector<VariantId> ids;
            for (const auto& v : body["variant_ids"]) {
                if (!v.is_string()) invalid("variant_ids", "must be a list of variant ids");
                ids.push_back(v.template get<std::string>());
            }
            if (ids.size() < 2) invalid("variant_ids", "at least two variants are needed");
            mutate(req, res, body, [&](Workspace ws, json&) {
                try {
                    return manual_merge(std::move(ws), ids);
                } catch (const ArgumentError& e) {
                    invalid("variant_ids", e.what());
                }
            });
        }));

        server.Post("/sessions/:id/split", guarded([this](const auto& req, auto& res) {
            auto body = parse_body(req);
            if (!body.contains("variant_id") || !body["variant_id"].is_string())
                invalid("variant_id", "required");
            auto id = body["variant_id"].template get<std::string>();
            mutate(req, res, body, [&](Workspace ws, json&) {
                try {
                    return manual_split(std::move(ws), id);
                } catch (const ArgumentError& e) {
                    invalid("variant_id", e.what());
                }
            });
        }));

        server.Post("/sessions/:id/filter", guarded([this](const auto& req, auto& res) {
            auto body = parse_body(req);
            if (!body.contains("markers") || !body["markers"].is_array() || body["markers"].empty())
                invalid("markers", "must be a non-empty list");
            std::vector<MarkerSpec> markers;
            for (const auto& m : body["markers"]) {
                try {
                    markers.push_back(marker_from_json(m));
                } catch (const std::exception& e) {
                    invalid("markers", e.what());
                }
            }
            MarkerMode mode = MarkerMode::any;
            if (body.contains("mode")) {
                if (!body["mode"].is_string()) invalid("mode", "must be \"any\" or \"all\"");
                try {
                    mode = parse_marker_mode(body["mode"].template get<std::string>());
                } catch (const ArgumentError& e) {
                    invalid("mode", e.what());
                }
            }
            mutate(req, res, body, [&](Workspace ws, json& extra) {
                auto r = cocitation_filter(std::move(ws), markers, mode);
                if (r.warning) extra["warning"] = *r.warning;
                return std::move(r.workspace);
            });
        }));

        server.Post("/sessions/:id/remove-ncr", guarded([this](const auto& req, auto& res) {
            auto body = parse_body(req);
            auto lo = int_field(body, "lo");
            auto hi = int_field(body, "hi");
            if (lo > hi) invalid("lo", "exceeds hi");
            mutate(req, res, body, [&](Workspace ws, json& extra) {
                auto before = ws.variants.size();
                auto out = remove_by_ncr(std::move(ws), lo, hi);
                extra["variants_removed"] = before - out.variants.size();
                return out;
            });
        }));
    }

    void create(const httplib::Request& req, httplib::Response& res) {
        auto body = parse_body(req);
        Workspace ws;
        json extra = json::object();
        if (body.contains("workspace")) {
            if (!body["workspace"].is_string()) invalid("workspace", "must be the workspace file text");
            try {
                ws = deserialize_workspace(body["workspace"].get<std::string>());
            } catch (const Error& e) {
                invalid("workspace", e.what());
            }
        } else if (body.contains("export_text")) {
            if (!body["export_text"].is_string()) invalid("export_text", "must be text");
            ImportConfig cfg;
            cfg.rpy = window_field(body, "rpy");
            cfg.py = window_field(body, "py");
            if (body.contains("max_cr")) {
                auto m = int_field(body, "max_cr");
                if (m < 0) invalid("max_cr", "must not be negative");
                cfg.max_cr_per_record = static_cast<std::size_t>(m);
            }
            ParseResult parsed;
            try {
                parsed = parse_export(std::string_view(body["export_text"].get_ref<const std::string&>()), cfg);
            } catch (const FormatError& e) {
                invalid("export_text", e.what());
            }
            extra["malformed_lines"] = parsed.report.malformed_lines.size();
            ws = aggregate(std::move(parsed.records), cfg);
        } else {
            throw Invalid{{{"export_text", "export_text or workspace is required"},
                           {"workspace", "export_text or workspace is required"}}};
        }

        auto s = std::make_shared<Session>();
        s->id = new_token();
        auto snap = std::make_shared<Snapshot>(Snapshot{0, std::move(ws)});
        s->current = snap;
        {
            std::unique_lock lock(sessions_mu);
            sessions.emplace(s->id, s);
        }
        json out = summary(*s, *snap);
        out.update(extra);
        send_json(res, 201, out);
    }

    void year_refs(const httplib::Request& req, httplib::Response& res) {
        auto snap = session(req)->snapshot();
        const auto& ws = snap->workspace;
        const auto& rpy_text = req.path_params.at("rpy");
        int rpy = 0;
        auto [p, ec] = std::from_chars(rpy_text.data(), rpy_text.data() + rpy_text.size(), rpy);
        if (ec != std::errc{} || p != rpy_text.data() + rpy_text.size()) invalid("rpy", "must be a year");
        auto sort = req.has_param("sort") ? req.get_param_value("sort") : std::string("ncr");
        if (sort != "ncr" && sort != "raw" && sort != "id") invalid("sort", "must be ncr, raw or id");
        auto threshold = real_param(req, "share").value_or(0.1);
        if (!(threshold >= 0.0 && threshold < 1.0)) invalid("share", "must lie in [0, 1)");

        std::vector<const ReferenceVariant*> year;
        std::int64_t total = 0;
        for (const auto& v : ws.variants) {
            if (v.fields.rpy != rpy) continue;
            year.push_back(&v);
            total += v.ncr();
        }
        if (sort == "ncr") {
            std::stable_sort(year.begin(), year.end(), [](const auto* a, const auto* b) {
                if (a->ncr() != b->ncr()) return a->ncr() > b->ncr();
                return a->fields.raw < b->fields.raw;
            });
        } else if (sort == "raw") {
            std::stable_sort(year.begin(), year.end(),
                             [](const auto* a, const auto* b) { return a->fields.raw < b->fields.raw; });
        }
        json refs = json::array();
        for (const auto* v : year) {
            double share = total > 0 ? static_cast<double>(v->ncr()) / static_cast<double>(total) : 0.0;
            auto j = to_json(*v);
            j.erase("citing_ids");
            j["ncr"] = v->ncr();
            j["share"] = share;
            j["top"] = share > threshold;
            j["merged"] = is_merge_product(ws, v->variant_id);
            refs.push_back(std::move(j));
        }
        send_json(res, 200, {{"rpy", rpy}, {"ncr_total", total}, {"version", snap->version}, {"refs", refs}});
    }
};

Service::Service(ServiceConfig cfg) : impl_(std::make_unique<Impl>(std::move(cfg))) {}

Service::~Service() { stop(); }

int Service::bind() {
    if (impl_->port >= 0) return impl_->port;
    int port = impl_->cfg.port == 0 ? impl_->server.bind_to_any_port(impl_->cfg.host)
                                    : (impl_->server.bind_to_port(impl_->cfg.host, impl_->cfg.port)
                                           ? impl_->cfg.port
                                           : -1);
    if (port < 0)
        throw IoError(fmt::format("cannot listen on {}:{}", impl_->cfg.host, impl_->cfg.port));
    impl_->port = port;
    return port;
}

void Service::run() {
    bind();
    impl_->server.listen_after_bind();
}

void Service::start() {
    bind();
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
}

void Service::stop() {
    impl_->server.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

int Service::port() const noexcept { return impl_->port; }

}  // namespace rpys::service
