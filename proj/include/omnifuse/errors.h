#pragma once

#include <stdexcept>
#include <string>

namespace omnifuse {

// Every failure raised by the library derives from Error so callers can
// isolate per-person or per-file problems with a single catch.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

#define OMNIFUSE_ERROR(Name)                                                                                           \
    class Name : public Error {                                                                                        \
      public:                                                                                                          \
        using Error::Error;                                                                                            \
    }

OMNIFUSE_ERROR(DomainError);
OMNIFUSE_ERROR(InputError);
OMNIFUSE_ERROR(NormalizationError);
OMNIFUSE_ERROR(DegenerateFitError);
OMNIFUSE_ERROR(AlignmentError);
OMNIFUSE_ERROR(LifecycleError);
OMNIFUSE_ERROR(RegistrationError);
OMNIFUSE_ERROR(SyncError);
OMNIFUSE_ERROR(NotFound);
OMNIFUSE_ERROR(ValidationError);
OMNIFUSE_ERROR(ConfigError);

#undef OMNIFUSE_ERROR

// Malformed file content. Carries the location so CLI users see file:line.
class ParseError : public Error {
  public:
    ParseError(const std::string &where, std::size_t line, const std::string &what)
        : Error(where + ":" + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const { return line_; }

  private:
    std::size_t line_;
};

} // namespace omnifuse
