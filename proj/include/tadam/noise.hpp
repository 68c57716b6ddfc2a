#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <numbers>
#include <vector>

#include "tadam/random.hpp"

namespace tadam {

/// Target corruption model: with probability p_percent/100 a target receives
/// additive student-t noise with nu_noise degrees of freedom and scale `scale`.
struct NoiseSpec {
  double nu_noise = 1.0;
  double scale = 0.05;
  int p_percent = 0;

  void validate() const;
  bool operator==(const NoiseSpec&) const = default;
};

struct Dataset {
  std::vector<double> xs;
  std::vector<double> ts;
  std::vector<double> clean_ts;
  std::vector<bool> corrupted;

  std::size_t size() const { return xs.size(); }
};

inline double ground_truth(double x) { return std::sin(2.0 * std::numbers::pi * x); }

/// Location-0 student-t draw, scale * z / sqrt(c / nu) with z ~ N(0,1) and
/// c ~ chi-squared(nu).
double sample_student_t(double nu, double scale, Engine& engine);

/// xs ~ U[0,1), targets sin(2*pi*x) plus masked student-t noise. The x values,
/// corruption mask and noise magnitudes come from separate streams of `seed`.
Dataset make_dataset(std::size_t n, const NoiseSpec& noise, std::uint64_t seed);

/// Columns: x,t,clean_t,corrupted_flag (flag written as 0/1).
void write_dataset_csv(std::ostream& out, const Dataset& data);
Dataset read_dataset_csv(std::istream& in);

}  // namespace tadam
