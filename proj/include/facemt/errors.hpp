#pragma once

#include <stdexcept>
#include <string>

namespace facemt {

// Root of every error the harness throws. Callers that only need to report
// and exit can catch this; everything more specific derives from it.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParameterError : public Error {
 public:
  using Error::Error;
};

class ContractViolation : public Error {
 public:
  using Error::Error;
};

class DegenerateRegionError : public Error {
 public:
  using Error::Error;
};

class ImageIoError : public Error {
 public:
  ImageIoError(std::string path, const std::string& cause)
      : Error(path + ": " + cause), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

class LandmarkInvalidError : public Error {
 public:
  LandmarkInvalidError(std::string image_path, const std::string& cause)
      : Error("invalid landmarks for " + image_path + ": " + cause),
        image_path_(std::move(image_path)) {}
  const std::string& image_path() const noexcept { return image_path_; }

 private:
  std::string image_path_;
};

class DetectorError : public Error {
 public:
  enum class Kind { NoFace, ProcessFailure, Timeout, BadOutput };

  DetectorError(Kind kind, const std::string& what, std::string stderr_text = {})
      : Error(what), kind_(kind), stderr_(std::move(stderr_text)) {}
  Kind kind() const noexcept { return kind_; }
  const std::string& stderr_text() const noexcept { return stderr_; }

 private:
  Kind kind_;
  std::string stderr_;
};

class SampleFailedError : public Error {
 public:
  using Error::Error;
};

class StyleError : public Error {
 public:
  using Error::Error;
};

class SchemaError : public Error {
 public:
  using Error::Error;
};

class DuplicateError : public Error {
 public:
  using Error::Error;
};

class BalanceImpossibleError : public Error {
 public:
  using Error::Error;
};

class PairingError : public Error {
 public:
  using Error::Error;
};

class TransportError : public Error {
 public:
  using Error::Error;
};

class RunAbortedError : public Error {
 public:
  using Error::Error;
};

class EmptyEvaluationError : public Error {
 public:
  using Error::Error;
};

class FilesystemError : public Error {
 public:
  using Error::Error;
};

}  // namespace facemt
