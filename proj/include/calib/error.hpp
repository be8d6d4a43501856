#pragma once

#include <stdexcept>
#include <string>

namespace calib {

// Bad input: unreadable files, malformed rows, out-of-range arguments.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A fit could not be carried out on otherwise well-formed input
// (one-class data, too few samples, non-finite objective).
class FitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace calib
