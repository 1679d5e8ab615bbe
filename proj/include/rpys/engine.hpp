#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "rpys/disambiguation.hpp"
#include "rpys/script.hpp"
#include "rpys/store.hpp"

namespace rpys::engine {

struct ExecutionContext {
    // Relative file arguments resolve against this directory.
    std::filesystem::path working_dir = ".";
    std::optional<Workspace> workspace;
    // Set by cluster(), consumed by merge().
    std::optional<ClusterAssignment> last_assignment;
    Backend backend = Backend::parallel;
};

// A command that could not run: bad arguments, wrong order, failed operation.
class CommandError : public Error {
public:
    CommandError(const std::string& command, const script::SourceSpan& span,
                 const std::string& message, bool io = false);

    const std::string& command() const noexcept { return command_; }
    const script::SourceSpan& span() const noexcept { return span_; }
    const std::string& message() const noexcept { return message_; }
    bool is_io() const noexcept { return io_; }

private:
    std::string command_;
    script::SourceSpan span_;
    std::string message_;
    bool io_;
};

struct CommandReport {
    std::string name;
    script::SourceSpan span;
    double duration_ms = 0.0;
    // Workspace counts after the command; absent while no file is imported.
    std::optional<WorkspaceInfo> counts;
    // Command-specific result (info counts, peak years, warnings...).
    nlohmann::json output = nlohmann::json::object();
};

enum class FailureKind { none, script, io };

struct RunReport {
    std::vector<CommandReport> commands;  // the commands that completed
    FailureKind failure = FailureKind::none;
    std::string error;  // message with caret excerpt when failure != none

    // 0 success, 1 script error, 2 I/O error.
    int exit_code() const noexcept;
    // Durations are left out unless asked for, so two runs compare equal.
    nlohmann::json to_json(bool include_timings = false) const;
};

/// Runs the commands in order, stopping at the first failure. Each command
/// works on a copy of the context that replaces it only on success, so a
/// failed command leaves the workspace as the previous command left it.
RunReport execute(const script::ScriptProgram& prog, ExecutionContext& ctx);

// Names of all commands execute() understands.
const std::vector<std::string>& command_names();

}  // namespace rpys::engine
