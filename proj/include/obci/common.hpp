#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace obci {

// Interval procedures. ob1..ob3 have Wiener-functional limits; ss is the
// subsampling baseline.
enum class Procedure { ob1, ob2, ob3, ss };

std::string_view to_string(Procedure p);
// Accepts "ob1".."ob3", "ss" (case-insensitive) and "OB-I".."OB-III".
Procedure parse_procedure(std::string_view text);

enum class Execution { serial, parallel };

// A functional estimator is undefined on some window (the "NA" case).
class DegenerateEstimate : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The interval cannot be formed (zero scale estimate, too few subsamples).
class DegenerateInterval : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Sets the OpenMP worker count; no-op without OpenMP.
void set_worker_count(int workers);
int worker_count();

double normal_quantile(double p);
double student_t_quantile(double p, double dof);

}  // namespace obci
