#include "pathattr/feature_vector.hpp"

#include <cmath>
#include <sstream>

#include "pathattr/errors.hpp"

namespace pathattr {

std::size_t Shape::size() const {
  std::size_t n = 1;
  for (std::size_t d : dims) n *= d;
  return dims.empty() ? 0 : n;
}

std::string Shape::describe() const {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) os << ", ";
    os << dims[i];
  }
  os << ")";
  return os.str();
}

FeatureVector FeatureVector::flat(std::vector<double> v) {
  const std::size_t n = v.size();
  return FeatureVector(std::move(v), Shape::flat(n));
}

void FeatureVector::validate() const {
  if (values.size() != shape.size()) {
    std::ostringstream os;
    os << "feature vector length " << values.size()
       << " does not match shape " << shape.describe();
    throw InputError(os.str());
  }
  require_finite(values, "feature vector");
}

void require_finite(const std::vector<double>& v, const std::string& what) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      std::ostringstream os;
      os << what << " has non-finite entry at index " << i;
      throw InputError(os.str());
    }
  }
}

}  // namespace pathattr
