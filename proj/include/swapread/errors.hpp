#pragma once

#include <stdexcept>
#include <string>

namespace swapread {

// Root of every error thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A box lost all its area after clipping.
class EmptyBox : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& where, const std::string& what)
      : Error(where + ": " + what), where_(where) {}
  const std::string& where() const noexcept { return where_; }

 private:
  std::string where_;
};

class MissingField : public Error {
 public:
  explicit MissingField(std::string field)
      : Error("missing field '" + field + "'"), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class DuplicateId : public Error {
 public:
  using Error::Error;
};

class BackendFailure : public Error {
 public:
  using Error::Error;
};

class InputShapeError : public Error {
 public:
  using Error::Error;
};

class MapShapeError : public Error {
 public:
  using Error::Error;
};

class EngineFailure : public Error {
 public:
  using Error::Error;
};

class EngineUnavailable : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ZeroTruth : public Error {
 public:
  using Error::Error;
};

class SpecInfeasible : public Error {
 public:
  using Error::Error;
};

// A pipeline stage failed; `stage()` names it ("detect", "text", "ocr", ...).
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what)
      : Error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace swapread
