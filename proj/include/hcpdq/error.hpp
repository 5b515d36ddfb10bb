#pragma once

#include <stdexcept>
#include <string>

namespace hcpdq {

enum class Errc {
  kZeroInverse,
  kModulusTooSmall,
  kNotFullySplit,
  kSingularSystem,
  kInconsistentSystem,
  kInvalidParams,
  kBackendMismatch,
  kLevelExhausted,
  kMissingRotationKey,
  kMissingSecretKey,
  kNoNttPrimes,
  kNoiseOverflow,
  kQueryOverflow,
  kFormat,
  kIo,
  kProtocol,
};

inline const char* errc_name(Errc code) {
  switch (code) {
    case Errc::kZeroInverse: return "ZeroInverse";
    case Errc::kModulusTooSmall: return "ModulusTooSmall";
    case Errc::kNotFullySplit: return "NotFullySplit";
    case Errc::kSingularSystem: return "SingularSystem";
    case Errc::kInconsistentSystem: return "InconsistentSystem";
    case Errc::kInvalidParams: return "InvalidParams";
    case Errc::kBackendMismatch: return "BackendMismatch";
    case Errc::kLevelExhausted: return "LevelExhausted";
    case Errc::kMissingRotationKey: return "MissingRotationKey";
    case Errc::kMissingSecretKey: return "MissingSecretKey";
    case Errc::kNoNttPrimes: return "NoNttPrimes";
    case Errc::kNoiseOverflow: return "NoiseOverflow";
    case Errc::kQueryOverflow: return "QueryOverflow";
    case Errc::kFormat: return "Format";
    case Errc::kIo: return "Io";
    case Errc::kProtocol: return "Protocol";
  }
  return "Unknown";
}

// Every failure in the library is reported as an Error carrying one of the
// codes above; callers branch on code(), not on the message text.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& detail)
      : std::runtime_error(std::string(errc_name(code)) + ": " + detail), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace hcpdq
