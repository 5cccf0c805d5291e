#ifndef LORADEX_ERROR_HPP
#define LORADEX_ERROR_HPP

#include <stdexcept>
#include <string>

namespace loradex {

/// Broad failure classes. The CLI maps these onto exit codes and the
/// service maps them onto HTTP statuses.
enum class ErrorKind {
  usage,          ///< bad flags or arguments
  data,           ///< malformed, inconsistent or incomplete input data
  provider,       ///< embedding provider unreachable or failing
  zero_query,     ///< query vector has zero norm under the encoder
  not_found,      ///< unknown adapter id or resource
  capability,     ///< provider lacks the requested modality
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline Error data_error(const std::string& message) { return {ErrorKind::data, message}; }
inline Error usage_error(const std::string& message) { return {ErrorKind::usage, message}; }
inline Error provider_error(const std::string& message) { return {ErrorKind::provider, message}; }

/// Process exit code for an error kind: 1 usage, 2 data, 3 provider.
constexpr int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::usage:
      return 1;
    case ErrorKind::provider:
    case ErrorKind::capability:
      return 3;
    case ErrorKind::data:
    case ErrorKind::zero_query:
    case ErrorKind::not_found:
      return 2;
  }
  return 2;
}

}  // namespace loradex

#endif  // LORADEX_ERROR_HPP
