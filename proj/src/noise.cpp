#include "tadam/noise.hpp"

#include <boost/random/chi_squared_distribution.hpp>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "tadam/csv.hpp"

namespace tadam {

void NoiseSpec::validate() const {
  if (!(nu_noise > 0.0) || !std::isfinite(nu_noise)) {
    throw std::invalid_argument("noise degrees of freedom must be positive, got " +
                                format_double(nu_noise));
  }
  if (!(scale >= 0.0) || !std::isfinite(scale)) {
    throw std::invalid_argument("noise scale must be nonnegative, got " + format_double(scale));
  }
  if (p_percent < 0 || p_percent > 100) {
    throw std::invalid_argument("corruption probability must be in [0, 100], got " +
                                std::to_string(p_percent));
  }
}

double sample_student_t(double nu, double scale, Engine& engine) {
  if (!(nu > 0.0)) throw std::invalid_argument("student-t nu must be positive");
  if (!(scale >= 0.0)) throw std::invalid_argument("student-t scale must be nonnegative");
  const double z = standard_normal(engine);
  boost::random::chi_squared_distribution<double> chi2(nu);
  const double c = chi2(engine);
  return scale * z / std::sqrt(c / nu);
}

Dataset make_dataset(std::size_t n, const NoiseSpec& noise, std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("dataset size must be positive");
  noise.validate();

  auto inputs = make_stream(seed, Stream::Inputs);
  auto mask = make_stream(seed, Stream::CorruptionMask);
  auto magnitude = make_stream(seed, Stream::NoiseMagnitude);
  const double p = noise.p_percent / 100.0;

  Dataset data;
  data.xs.resize(n);
  data.ts.resize(n);
  data.clean_ts.resize(n);
  data.corrupted.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = uniform01(inputs);
    // One draw per index from each stream, whether or not it is used, so the
    // mask and the magnitudes are each a function of (seed, index) alone.
    const bool hit = uniform01(mask) < p;
    const double zeta = sample_student_t(noise.nu_noise, noise.scale, magnitude);
    data.xs[i] = x;
    data.clean_ts[i] = ground_truth(x);
    data.corrupted[i] = hit;
    data.ts[i] = hit ? data.clean_ts[i] + zeta : data.clean_ts[i];
  }
  return data;
}

void write_dataset_csv(std::ostream& out, const Dataset& data) {
  CsvTable table;
  table.header = {"x", "t", "clean_t", "corrupted_flag"};
  table.rows.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    table.rows.push_back({format_double(data.xs[i]), format_double(data.ts[i]),
                          format_double(data.clean_ts[i]), data.corrupted[i] ? "1" : "0"});
  }
  write_csv(out, table);
}

Dataset read_dataset_csv(std::istream& in) {
  const auto table = read_csv(in);
  const auto cx = table.column("x");
  const auto ct = table.column("t");
  const auto cc = table.column("clean_t");
  const auto cf = table.column("corrupted_flag");
  Dataset data;
  for (const auto& row : table.rows) {
    data.xs.push_back(parse_double(row[cx]));
    data.ts.push_back(parse_double(row[ct]));
    data.clean_ts.push_back(parse_double(row[cc]));
    const auto flag = parse_integer(row[cf]);
    if (flag != 0 && flag != 1) {
      throw std::invalid_argument("corrupted_flag must be 0 or 1, got " + row[cf]);
    }
    data.corrupted.push_back(flag == 1);
  }
  return data;
}

}  // namespace tadam
