#include "qfgan/errors.hpp"

namespace qfgan {

const char* errc_name(Errc c) {
  switch (c) {
    case Errc::missing_file: return "missing_file";
    case Errc::io_error: return "io_error";
    case Errc::parse_error: return "parse_error";
    case Errc::config_error: return "config_error";
    case Errc::non_positive_price: return "non_positive_price";
    case Errc::non_monotone_date: return "non_monotone_date";
    case Errc::series_too_short: return "series_too_short";
    case Errc::zero_variance: return "zero_variance";
    case Errc::negative_argument: return "negative_argument";
    case Errc::length_mismatch: return "length_mismatch";
    case Errc::window_mismatch: return "window_mismatch";
    case Errc::too_many_qubits: return "too_many_qubits";
    case Errc::invalid_bond: return "invalid_bond";
    case Errc::dimension_mismatch: return "dimension_mismatch";
    case Errc::shape_mismatch: return "shape_mismatch";
    case Errc::stale_tape: return "stale_tape";
    case Errc::out_of_range: return "out_of_range";
    case Errc::empty_input: return "empty_input";
    case Errc::non_finite_loss: return "non_finite_loss";
  }
  return "unknown";
}

static std::string compose(Errc code, const std::string& message, long index) {
  std::string s(errc_name(code));
  s += ": ";
  s += message;
  if (index >= 0) {
    s += " (at ";
    s += std::to_string(index);
    s += ")";
  }
  return s;
}

Error::Error(Errc code, const std::string& message, long index)
    : std::runtime_error(compose(code, message, index)), code_(code), index_(index) {}

void raise(Errc code, const std::string& message, long index) {
  throw Error(code, message, index);
}

}  // namespace qfgan
