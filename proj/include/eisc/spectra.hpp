#pragma once

// Spectral functions: a spectrum mapped onto [0,1] as a piecewise-linear
// function, and the dissimilarities used to match clusters across batches.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "eisc/error.hpp"
#include "eisc/io.hpp"
#include "eisc/laplacian.hpp"

namespace eisc {

/// CLRL: eigenvalues over the largest eigenvalue, area distance.
/// CLSSAL: eigenvalues over the sample size, area distance.
/// CLMXL: CLSSAL scaling, compared at x = 0 only.
/// NLL: normalized Laplacian eigenvalues as they are, area distance.
enum class MatchMethod { clrl, clssal, clmxl, nll };

inline std::string_view to_string(MatchMethod m) {
  switch (m) {
    case MatchMethod::clrl: return "clrl";
    case MatchMethod::clssal: return "clssal";
    case MatchMethod::clmxl: return "clmxl";
    case MatchMethod::nll: return "nll";
  }
  return "?";
}

inline MatchMethod parse_method(std::string_view name) {
  std::string lower(name);
  for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lower == "clrl") return MatchMethod::clrl;
  if (lower == "clssal") return MatchMethod::clssal;
  if (lower == "clmxl") return MatchMethod::clmxl;
  if (lower == "nll") return MatchMethod::nll;
  throw InvalidArgument("unknown match method '" + std::string(name) + "'");
}

inline constexpr MatchMethod kAllMethods[] = {MatchMethod::clrl, MatchMethod::clssal,
                                              MatchMethod::clmxl, MatchMethod::nll};

inline LaplacianKind laplacian_kind_for(MatchMethod m) {
  return m == MatchMethod::nll ? LaplacianKind::normalized
                               : LaplacianKind::combinatorial;
}

/// Piecewise-linear function on [0,1] given by its knots.
class SpectralFunction {
 public:
  SpectralFunction() = default;

  /// Knots must be strictly increasing from exactly 0 to exactly 1.
  SpectralFunction(std::vector<double> knots, std::vector<double> values,
                   MatchMethod method, std::size_t source_n)
      : knots_(std::move(knots)),
        values_(std::move(values)),
        method_(method),
        source_n_(source_n) {
    if (knots_.size() < 2 || knots_.size() != values_.size()) {
      throw InvalidArgument("spectral function needs >= 2 knots with values");
    }
    if (knots_.front() != 0.0 || knots_.back() != 1.0) {
      throw InvalidArgument("spectral function knots must span [0,1]");
    }
    for (std::size_t i = 1; i < knots_.size(); ++i) {
      if (!(knots_[i - 1] < knots_[i])) {
        throw InvalidArgument("spectral function knots must be increasing");
      }
    }
    for (double v : values_) {
      if (!std::isfinite(v)) throw InvalidArgument("non-finite knot value");
    }
  }

  const std::vector<double>& knots() const { return knots_; }
  const std::vector<double>& values() const { return values_; }
  MatchMethod method() const { return method_; }
  std::size_t source_n() const { return source_n_; }

  friend bool operator==(const SpectralFunction&, const SpectralFunction&) = default;

 private:
  std::vector<double> knots_;
  std::vector<double> values_;
  MatchMethod method_ = MatchMethod::clssal;
  std::size_t source_n_ = 0;
};

/// Eigenvalue i (1-based, non-decreasing) lands on x = (n-i)/(n-1), so the
/// largest eigenvalue sits at x = 0 and the smallest at x = 1.
inline SpectralFunction build_spectral_function(const Spectrum& e, MatchMethod method) {
  const std::size_t n = e.size();
  if (n < 2) {
    throw DegenerateSpectrum("spectral function needs at least 2 eigenvalues, got " +
                             std::to_string(n));
  }
  if (e.kind() != laplacian_kind_for(method)) {
    throw MethodMismatch(std::string(to_string(method)) + " needs a " +
                         std::string(to_string(laplacian_kind_for(method))) +
                         " spectrum");
  }
  const auto& lambda = e.eigenvalues();
  double scale = 1.0;
  switch (method) {
    case MatchMethod::clrl: scale = lambda.back(); break;
    case MatchMethod::clssal:
    case MatchMethod::clmxl: scale = static_cast<double>(n); break;
    case MatchMethod::nll: scale = 1.0; break;
  }
  std::vector<double> knots(n);
  std::vector<double> values(n);
  const auto denom = static_cast<double>(n - 1);
  for (std::size_t pos = 0; pos < n; ++pos) {
    // pos = n - i for 1-based eigenvalue index i.
    const std::size_t i = n - pos;
    knots[pos] = static_cast<double>(pos) / denom;
    // A zero spectrum under CLRL maps to F == 0.
    values[pos] = scale > 0.0 ? lambda[i - 1] / scale : 0.0;
  }
  return SpectralFunction(std::move(knots), std::move(values), method, n);
}

inline double evaluate_at(const SpectralFunction& f, double x) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw DomainError("spectral function evaluated outside [0,1]");
  }
  const auto& k = f.knots();
  const auto& v = f.values();
  auto it = std::upper_bound(k.begin(), k.end(), x);
  if (it == k.end()) return v.back();
  const auto right = static_cast<std::size_t>(it - k.begin());
  const std::size_t left = right - 1;
  if (k[left] == x) return v[left];
  const double width = k[right] - k[left];
  return v[left] * (k[right] - x) / width + v[right] * (x - k[left]) / width;
}

namespace detail {

/// Integral of |d| over [a,b] where d is linear with endpoint values da, db.
inline double abs_linear_area(double da, double db, double width) {
  if ((da >= 0.0 && db >= 0.0) || (da <= 0.0 && db <= 0.0)) {
    return 0.5 * (std::abs(da) + std::abs(db)) * width;
  }
  // Sign change: split at the root and sum the two triangles.
  return 0.5 * width * (da * da + db * db) / (std::abs(da) + std::abs(db));
}

}  // namespace detail

/// Exact integral of |F1 - F2| over [0,1]; for CLMXL, |F1(0) - F2(0)|.
inline double spectral_distance(const SpectralFunction& f1, const SpectralFunction& f2,
                                MatchMethod method) {
  if (f1.method() != method || f2.method() != method) {
    throw MethodMismatch("spectral_distance: functions built with " +
                         std::string(to_string(f1.method())) + "/" +
                         std::string(to_string(f2.method())) + ", asked for " +
                         std::string(to_string(method)));
  }
  if (method == MatchMethod::clmxl) {
    return std::abs(f1.values().front() - f2.values().front());
  }
  const auto& k1 = f1.knots();
  const auto& k2 = f2.knots();
  const auto& v1 = f1.values();
  const auto& v2 = f2.values();
  // Both functions are linear between consecutive points of the merged
  // knot set. Walk it with one cursor per function.
  auto interp = [](const std::vector<double>& k, const std::vector<double>& v,
                   std::size_t seg, double x) {
    if (k[seg] == x) return v[seg];
    if (k[seg + 1] == x) return v[seg + 1];
    const double width = k[seg + 1] - k[seg];
    return v[seg] * (k[seg + 1] - x) / width + v[seg + 1] * (x - k[seg]) / width;
  };
  std::size_t s1 = 0;
  std::size_t s2 = 0;
  double x_prev = 0.0;
  double d_prev = v1.front() - v2.front();
  double area = 0.0;
  std::size_t i1 = 1;
  std::size_t i2 = 1;
  while (i1 < k1.size() || i2 < k2.size()) {
    const double x = std::min(i1 < k1.size() ? k1[i1] : 2.0, i2 < k2.size() ? k2[i2] : 2.0);
    while (k1[s1 + 1] < x) ++s1;
    while (k2[s2 + 1] < x) ++s2;
    const double d = interp(k1, v1, s1, x) - interp(k2, v2, s2, x);
    area += detail::abs_linear_area(d_prev, d, x - x_prev);
    x_prev = x;
    d_prev = d;
    if (i1 < k1.size() && k1[i1] == x) ++i1;
    if (i2 < k2.size() && k2[i2] == x) ++i2;
  }
  return area;
}

inline std::string spectral_function_to_csv(const SpectralFunction& f) {
  std::string out = "# method=";
  out += to_string(f.method());
  out += " source_n=" + std::to_string(f.source_n()) + "\n";
  out += "x,value\n";
  for (std::size_t i = 0; i < f.knots().size(); ++i) {
    out += io::format_real(f.knots()[i]);
    out += ',';
    out += io::format_real(f.values()[i]);
    out += '\n';
  }
  return out;
}

inline SpectralFunction spectral_function_from_csv(std::string_view text) {
  std::optional<MatchMethod> method;
  std::size_t source_n = 0;
  std::vector<double> knots;
  std::vector<double> values;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string line(text.substr(pos, end - pos));
    pos = end + 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line == "x,value") continue;
    if (line.front() == '#') {
      char name[32] = {};
      if (std::sscanf(line.c_str(), "# method=%31s source_n=%zu", name, &source_n) != 2) {
        throw ParseError("spectral function: bad metadata line '" + line + "'");
      }
      method = parse_method(name);
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ParseError("spectral function: bad row '" + line + "'");
    try {
      knots.push_back(std::stod(line.substr(0, comma)));
      values.push_back(std::stod(line.substr(comma + 1)));
    } catch (const std::exception&) {
      throw ParseError("spectral function: bad row '" + line + "'");
    }
  }
  if (!method) throw ParseError("spectral function: missing '# method=' line");
  try {
    return SpectralFunction(std::move(knots), std::move(values), *method, source_n);
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("spectral function: ") + e.what());
  }
}

/// Laplacian -> spectrum -> spectral function for one similarity graph.
inline SpectralFunction spectral_function_of(const SimilarityMatrix& s, MatchMethod method) {
  return build_spectral_function(spectrum(laplacian_of(s, laplacian_kind_for(method))),
                                 method);
}

}  // namespace eisc
