#pragma once

#include <stdexcept>
#include <string>

namespace conepush {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define CONEPUSH_DEFINE_ERROR(Name)         \
  class Name : public Error {               \
   public:                                  \
    using Error::Error;                     \
  }

// contact / mechanics
CONEPUSH_DEFINE_ERROR(ZeroTwist);
CONEPUSH_DEFINE_ERROR(ZeroWrench);
CONEPUSH_DEFINE_ERROR(DegenerateRatio);
CONEPUSH_DEFINE_ERROR(EmptyPusher);
CONEPUSH_DEFINE_ERROR(NotGravityAligned);
CONEPUSH_DEFINE_ERROR(ContactOffObject);

// planner
CONEPUSH_DEFINE_ERROR(NoPlanFound);
CONEPUSH_DEFINE_ERROR(InvalidStart);
CONEPUSH_DEFINE_ERROR(NoValidPusher);

// scene / io
CONEPUSH_DEFINE_ERROR(ValidationError);
CONEPUSH_DEFINE_ERROR(IoError);

#undef CONEPUSH_DEFINE_ERROR

/// Malformed input file. Carries the offending field path and, when known,
/// the 1-based line of the document.
class ParseError : public Error {
 public:
  ParseError(const std::string& field, const std::string& what, int line = 0)
      : Error(format(field, what, line)), field_(field), line_(line) {}

  const std::string& field() const { return field_; }
  int line() const { return line_; }

 private:
  static std::string format(const std::string& field, const std::string& what, int line) {
    std::string msg = "parse error";
    if (line > 0) msg += " at line " + std::to_string(line);
    if (!field.empty()) msg += " in '" + field + "'";
    return msg + ": " + what;
  }

  std::string field_;
  int line_ = 0;
};

/// A substep of an executed plan whose push left the robust motion cone.
class StickingViolation : public Error {
 public:
  StickingViolation(int step, double margin)
      : Error("sticking violation at trace step " + std::to_string(step) +
              " (margin " + std::to_string(margin) + ")"),
        step_(step),
        margin_(margin) {}

  int step() const { return step_; }
  double margin() const { return margin_; }

 private:
  int step_;
  double margin_;
};

}  // namespace conepush
