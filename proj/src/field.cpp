#include "gl/field.hpp"

namespace gl {

FieldConfig shift(const FieldConfig& config, std::int64_t i) {
  const int n = config.size();
  std::int64_t off = i % n;
  if (off < 0) off += n;
  FieldConfig out;
  out.rho = config.rho;
  out.eta.resize(config.eta.size());
  for (int j = 0; j < n; ++j) {
    out.eta[j] = config.eta[(j + off) % n];
  }
  return out;
}

}  // namespace gl
