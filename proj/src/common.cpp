#include "obci/common.hpp"

#include <algorithm>
#include <cctype>
#include <string>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace obci {

std::string_view to_string(Procedure p) {
  switch (p) {
    case Procedure::ob1: return "ob1";
    case Procedure::ob2: return "ob2";
    case Procedure::ob3: return "ob3";
    case Procedure::ss: return "ss";
  }
  return "?";
}

Procedure parse_procedure(std::string_view text) {
  std::string s(text);
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (s == "ob1" || s == "ob-i") return Procedure::ob1;
  if (s == "ob2" || s == "ob-ii") return Procedure::ob2;
  if (s == "ob3" || s == "ob-iii") return Procedure::ob3;
  if (s == "ss" || s == "subsampling") return Procedure::ss;
  throw std::invalid_argument("unknown method '" + std::string(text) + "'");
}

void set_worker_count(int workers) {
#ifdef _OPENMP
  if (workers > 0) omp_set_num_threads(workers);
#else
  (void)workers;
#endif
}

int worker_count() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

double normal_quantile(double p) {
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

double student_t_quantile(double p, double dof) {
  return boost::math::quantile(boost::math::students_t_distribution<double>(dof), p);
}

}  // namespace obci
