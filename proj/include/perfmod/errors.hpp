#ifndef PERFMOD_ERRORS_HPP_
#define PERFMOD_ERRORS_HPP_

#include <stdexcept>
#include <string>
#include <vector>

namespace perfmod {

// Invalid arguments, malformed inputs, violated preconditions. CLI exit 1.
class InputError : public std::runtime_error {
public:
  explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

// A prediction needs a model the repository does not hold. CLI exit 2.
class MissingModelError : public std::runtime_error {
public:
  MissingModelError(const std::string& msg, std::vector<std::string> missing)
      : std::runtime_error(msg), missing_keys(std::move(missing)) {}
  std::vector<std::string> missing_keys;
};

// Filesystem / serialization failures. CLI exit 3.
class IoError : public std::runtime_error {
public:
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// A stored model file failed its checksum or structural validation.
class IntegrityError : public IoError {
public:
  explicit IntegrityError(const std::string& msg) : IoError(msg) {}
};

}  // namespace perfmod

#endif  // PERFMOD_ERRORS_HPP_
