#ifndef BINSIM_ERRORS_HPP
#define BINSIM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace binsim {

// Error taxonomy shared by the library and the CLI exit-code contract.
enum class ErrorKind {
  InvalidInput,   // bad argument values, silent sources, shape mismatches
  Config,         // unusable configuration (non-COLA STFT, empty pools)
  Format,         // file does not match the expected schema
  Integrity,      // file parses but violates integrity rules (duplicates, ...)
  Geometry,       // source outside the room, coincident source/listener
  Sizing,         // FFT size too small for the requested delays
  Infeasible,     // acoustics that no wall absorption can realize
  Missing,        // referenced artifact does not exist
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput: return "invalid-input";
    case ErrorKind::Config: return "config";
    case ErrorKind::Format: return "format";
    case ErrorKind::Integrity: return "integrity";
    case ErrorKind::Geometry: return "geometry";
    case ErrorKind::Sizing: return "sizing";
    case ErrorKind::Infeasible: return "infeasible-acoustics";
    case ErrorKind::Missing: return "missing";
  }
  return "unknown";
}

}  // namespace binsim

#endif  // BINSIM_ERRORS_HPP
