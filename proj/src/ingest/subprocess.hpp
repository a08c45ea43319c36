#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace ponzilens::detail {

struct ProcessResult
{
    int exit_code = -1;
    std::string out;
    std::string err;
};

/// Runs `argv` with `input` on stdin and captures stdout/stderr through
/// temporary files, so arbitrarily large outputs never block on a pipe.
/// Throws std::system_error when the process cannot be started.
ProcessResult run_process(const std::vector<std::string>& argv, const std::string& input);

}  // namespace ponzilens::detail
