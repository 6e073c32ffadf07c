#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace tpmoe
{

/// Bad user input: malformed files, invalid configuration, dimension mismatch.
class InputError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// A linear-algebra or sampler failure that cannot be recovered locally.
class NumericalError : public std::runtime_error
{
public:
    explicit NumericalError(const std::string& what,
                            std::vector<double> attempted_jitter = {})
        : std::runtime_error(what), jitter_levels(std::move(attempted_jitter))
    {}

    std::vector<double> jitter_levels;
};

}  // namespace tpmoe
