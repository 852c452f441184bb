#ifndef GBTX_ERROR_H_
#define GBTX_ERROR_H_

#include <stdexcept>
#include <string>

namespace gbtx {

// Base of every error raised by the library. The CLI maps IoError and
// UsageError to exit code 2 and everything else to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or unsupported model dump. Carries the tree id and line when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int tree = -1, int line = -1);

  int tree() const { return tree_; }
  int line() const { return line_; }

 private:
  int tree_;
  int line_;
};

// Structural violation of a JSON document or model invariant.
class SchemaError : public Error {
 public:
  using Error::Error;
};

class OracleError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace gbtx

#endif  // GBTX_ERROR_H_
