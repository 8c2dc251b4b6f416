#pragma once

#include <stdexcept>
#include <string>

namespace qfgan {

// Every failure the library raises on purpose. The CLI maps these to exit
// codes; tests match on the code, not the message text.
enum class Errc {
  missing_file,
  io_error,
  parse_error,
  config_error,
  non_positive_price,
  non_monotone_date,
  series_too_short,
  zero_variance,
  negative_argument,
  length_mismatch,
  window_mismatch,
  too_many_qubits,
  invalid_bond,
  dimension_mismatch,
  shape_mismatch,
  stale_tape,
  out_of_range,
  empty_input,
  non_finite_loss,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message, long index = -1);

  Errc code() const noexcept { return code_; }
  // 1-based row or element position where the problem was found, -1 if n/a.
  long index() const noexcept { return index_; }

 private:
  Errc code_;
  long index_;
};

[[noreturn]] void raise(Errc code, const std::string& message, long index = -1);

}  // namespace qfgan
