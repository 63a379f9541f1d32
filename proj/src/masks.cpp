#include "ptycho/masks.hpp"

#include "ptycho/io.hpp"
#include "ptycho/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace ptycho {

Mask::Mask(Index d_, Index delta_, CVec v) : d(d_), delta(delta_), values(std::move(v)) {
  require(delta >= 1 && delta <= d, "mask: need 1 <= delta <= d");
  require_dims(values.size() == d, "mask: values must have length d");
  require(values(0) != 0.0, "mask: index 0 must be in the support");
  for (Index i = delta; i < d; ++i) require(values(i) == 0.0, "mask: support exceeds delta");
}

CMat MaskFamily::support_matrix() const {
  CMat M(D(), delta);
  for (Index j = 0; j < D(); ++j) M.row(j) = masks[j].head(delta).transpose();
  return M;
}

void MaskFamily::validate() const {
  require(D() >= 1, "mask family: at least one mask");
  for (const auto& m : masks) Mask(d, delta, m);
}

MaskFamily MaskFamily::scaled(double t) const {
  MaskFamily f = *this;
  for (auto& m : f.masks) m *= t;
  if (f.fourier) f.fourier->window.values *= t;
  return f;
}

double default_exponential_a(Index delta) { return std::max(4.0, (double(delta) - 1.0) / 2.0); }
double default_near_flat_a(Index delta) { return 2.0 * double(delta) - 1.0; }

Mask exponential_mask(Index d, Index delta, std::optional<double> a_) {
  double a = a_.value_or(default_exponential_a(delta));
  require(2 * delta <= d + 1, "exponential mask: need delta <= (d+1)/2");
  require(a > 0.0, "exponential mask: a must be positive");
  require(a != 1.0, "exponential mask: a = 1 is the constant mask; use const");
  CVec v = CVec::Zero(d);
  for (Index i = 0; i < delta; ++i) v(i) = std::pow(a, double(i));
  return Mask(d, delta, v);
}

Mask near_flat_mask(Index d, Index delta, std::optional<double> a_) {
  double a = a_.value_or(default_near_flat_a(delta));
  if (!(a > double(delta) - 1.0)) {
    std::ostringstream os;
    os << "near-flat mask: a=" << a << " must exceed delta-1=" << delta - 1
       << " for the condition-number bound to be positive";
    throw ValidationError(os.str());
  }
  CVec v = CVec::Zero(d);
  v.head(delta).setOnes();
  v(0) += a;
  return Mask(d, delta, v);
}

Mask constant_mask(Index d, Index delta) {
  CVec v = CVec::Zero(d);
  v.head(delta).setOnes();
  return Mask(d, delta, v);
}

MaskFamily local_fourier_family(const Mask& gamma, Index K, Index D) {
  const Index delta = gamma.delta;
  if (D == 0) D = 2 * delta - 1;
  if (K == 0) K = D;
  require(D >= 1, "fourier family: D must be positive");
  require(K >= std::max(delta, D), "fourier family: need K >= max(delta, D)");
  for (Index n = 0; n < delta; ++n)
    require(gamma.values(n) != 0.0, "fourier family: window support must be all of [delta]");
  MaskFamily f;
  f.d = gamma.d;
  f.delta = delta;
  f.fourier = FourierStructure{gamma, K};
  f.kind = "fourier";
  f.params["K"] = double(K);
  for (Index j = 0; j < D; ++j) {
    CVec m = CVec::Zero(gamma.d);
    for (Index n = 0; n < delta; ++n)
      m(n) = gamma.values(n) *
             std::polar(1.0, 2.0 * std::numbers::pi * double((j * n) % K) / double(K));
    f.masks.push_back(std::move(m));
  }
  return f;
}

MaskFamily random_gaussian_family(Index d, Index delta, Index D, std::uint64_t seed) {
  require(D >= 1, "random family: D must be positive");
  require(delta >= 1 && delta <= d, "random family: need 1 <= delta <= d");
  CounterRng rng(seed, 0x6d61736b);
  MaskFamily f;
  f.d = d;
  f.delta = delta;
  f.kind = "rand";
  f.params["seed"] = double(seed);
  for (Index j = 0; j < D; ++j) {
    CVec m = CVec::Zero(d);
    for (Index n = 0; n < delta; ++n) m(n) = rng.cnormal();
    f.masks.push_back(std::move(m));
  }
  return f;
}

namespace {

std::map<std::string, std::string> parse_kv(const std::string& s) {
  std::map<std::string, std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    auto eq = item.find('=');
    if (eq == std::string::npos) throw ValidationError("mask descriptor: expected key=value, got '" + item + "'");
    out[item.substr(0, eq)] = item.substr(eq + 1);
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing");
    return x;
  } catch (const std::exception&) {
    throw ValidationError("mask descriptor: '" + key + "' is not a number: '" + v + "'");
  }
}

}  // namespace

MaskFamily family_from_descriptor(const std::string& desc, Index d, Index delta, Index s) {
  auto colon = desc.find(':');
  std::string kind = desc.substr(0, colon);
  std::string rest = colon == std::string::npos ? "" : desc.substr(colon + 1);
  if (kind == "file") {
    if (rest.empty()) throw ValidationError("mask descriptor: file: needs a path");
    MaskFamily f = read_family_json(rest);
    if (f.d != d || f.delta != delta) {
      std::ostringstream os;
      os << "mask file " << rest << " has d=" << f.d << ", delta=" << f.delta << " but run asks for d=" << d
         << ", delta=" << delta;
      throw ValidationError(os.str());
    }
    return f;
  }
  auto kv = parse_kv(rest);
  auto take = [&](const std::string& key) -> std::optional<double> {
    auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    double v = to_double(key, it->second);
    kv.erase(it);
    return v;
  };
  MaskFamily f;
  if (kind == "exp") {
    auto a = take("a");
    f = local_fourier_family(exponential_mask(d, delta, a));
    f.kind = "exp";
    f.params["a"] = a.value_or(default_exponential_a(delta));
  } else if (kind == "flat") {
    auto a = take("a");
    f = local_fourier_family(near_flat_mask(d, delta, a));
    f.kind = "flat";
    f.params["a"] = a.value_or(default_near_flat_a(delta));
  } else if (kind == "expdecay") {
    auto a = take("a");
    double len = a.value_or(default_exponential_a(delta));
    require(len > 0.0, "mask descriptor: expdecay length a must be positive");
    f = local_fourier_family(exponential_mask(d, delta, std::exp(-1.0 / len)));
    f.kind = "expdecay";
    f.params["a"] = len;
  } else if (kind == "const") {
    f = local_fourier_family(constant_mask(d, delta));
    f.kind = "const";
  } else if (kind == "rand") {
    auto seed = take("seed");
    auto D = take("D");
    f = random_gaussian_family(d, delta, D ? Index(*D) : default_mask_count(delta, s),
                               std::uint64_t(seed.value_or(0.0)));
  } else {
    throw ValidationError("mask descriptor: unknown kind '" + kind +
                          "' (use exp, expdecay, flat, const, rand or file:path)");
  }
  if (!kv.empty()) throw ValidationError("mask descriptor: unknown key '" + kv.begin()->first + "' for " + kind);
  return f;
}

}  // namespace ptycho
