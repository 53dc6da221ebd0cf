#pragma once

#include <stdexcept>
#include <string>

namespace viewsynth {

/// Raised for problems with user-supplied data: malformed files, bad
/// configuration values, unreadable inputs. The CLI maps it to exit code 1.
class InputError : public std::runtime_error
{
public:
    explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace viewsynth
