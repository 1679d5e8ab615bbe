#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "rpys/kernels.hpp"

namespace rpys::service {

struct ServiceConfig {
    std::string host = "127.0.0.1";
    int port = 0;  // 0 picks a free port
    std::size_t max_upload_bytes = 64u << 20;
    // Directory served at "/" (the built explorer UI), if any.
    std::optional<std::filesystem::path> static_dir;
    Backend backend = Backend::parallel;
};

/// HTTP/JSON front end over in-memory analysis sessions.
///
///   POST   /sessions                       create from export text or workspace file text
///   GET    /sessions/{id}                  version and info counts
///   DELETE /sessions/{id}
///   GET    /sessions/{id}/spectrum?lo&hi
///   GET    /sessions/{id}/years/{rpy}/refs?sort=ncr|raw|id&share
///   GET    /sessions/{id}/peaks?min_dev&share&lo&hi
///   GET    /sessions/{id}/export?type=CSV_CR|CSV_GRAPH|WORKSPACE
///   GET    /sessions/{id}/history
///   POST   /sessions/{id}/cluster | merge | split | filter | remove-ncr
///
/// Mutations carry expected_version and answer 409 when it is stale. See
/// docs/service.md for bodies and responses.
class Service {
public:
    explicit Service(ServiceConfig cfg);
    ~Service();
    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    // Binds the listening socket and returns the port. Throws IoError.
    int bind();
    // Serves until stop(). Binds first if needed.
    void run();
    // run() on a background thread; returns once the server accepts requests.
    void start();
    void stop();
    int port() const noexcept;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace rpys::service
