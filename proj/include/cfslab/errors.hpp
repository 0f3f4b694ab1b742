#pragma once

#include <stdexcept>
#include <string>

namespace cfslab {

// Exit-code classes used by the command line driver.
enum class ErrorClass { invalid_input = 2, numerical = 3, assertion = 4 };

class Error : public std::runtime_error {
public:
    Error(ErrorClass c, const std::string& what) : std::runtime_error(what), cls_(c) {}
    ErrorClass error_class() const { return cls_; }
    int exit_code() const { return static_cast<int>(cls_); }

private:
    ErrorClass cls_;
};

struct InvalidArgument : Error {
    explicit InvalidArgument(const std::string& w) : Error(ErrorClass::invalid_input, w) {}
};

struct NumericalFailure : Error {
    explicit NumericalFailure(const std::string& w) : Error(ErrorClass::numerical, w) {}
};

// Linearly dependent or ill-conditioned families.
struct DegenerateFamily : Error {
    explicit DegenerateFamily(const std::string& w) : Error(ErrorClass::numerical, w) {}
};

struct AssertionFailure : Error {
    explicit AssertionFailure(const std::string& w) : Error(ErrorClass::assertion, w) {}
};

}  // namespace cfslab
