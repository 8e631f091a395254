#include "macres/channel.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "macres/errors.hpp"

namespace macres {

namespace {

std::string fmt_num(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

void check_pmf(std::span<const double> p, double tol, std::string_view what) {
  CompensatedSum total;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!std::isfinite(p[i]) || p[i] < 0.0 || p[i] > 1.0) {
      throw ValidationError(std::string(what) + ": entry " + std::to_string(i) +
                            " = " + fmt_num(p[i]) + " outside [0,1]");
    }
    total += p[i];
  }
  if (std::abs(total.value() - 1.0) > tol) {
    throw ValidationError(std::string(what) + ": row sum " +
                          fmt_num(total.value()) + " != 1");
  }
}

}  // namespace

void DistVector::validate(std::string_view what) const {
  const double tol =
      kMassTolerance * std::sqrt(static_cast<double>(std::max<std::size_t>(1, probs.size())));
  check_pmf(probs, tol, what);
}

DistVector make_dist(std::vector<double> probs, int n) {
  DistVector d;
  const auto size = probs.size();
  d.probs = std::move(probs);
  d.n = n;
  d.alphabet = n == 1 ? static_cast<int>(size)
                      : static_cast<int>(std::lround(std::pow(static_cast<double>(size), 1.0 / n)));
  return d;
}

std::uint64_t checked_pow(std::uint64_t base, int exponent) {
  std::uint64_t r = 1;
  for (int i = 0; i < exponent; ++i) {
    if (base != 0 && r > UINT64_MAX / base) throw BudgetError("integer overflow in alphabet power");
    r *= base;
  }
  return r;
}

void decode_index(std::uint64_t index, int alphabet, std::span<int> out) {
  for (std::size_t k = out.size(); k-- > 0;) {
    out[k] = static_cast<int>(index % alphabet);
    index /= alphabet;
  }
}

std::uint64_t encode_index(std::span<const int> symbols, int alphabet) {
  std::uint64_t index = 0;
  for (int s : symbols) index = index * alphabet + s;
  return index;
}

ChannelSpec::ChannelSpec(int size_x, int size_y, int size_z, std::vector<double> w,
                         std::vector<double> q_x, std::vector<double> q_y,
                         std::string name)
    : size_x_(size_x),
      size_y_(size_y),
      size_z_(size_z),
      w_(std::move(w)),
      q_x_(std::move(q_x)),
      q_y_(std::move(q_y)),
      name_(std::move(name)) {
  if (size_x_ < 1 || size_y_ < 1 || size_z_ < 1) {
    throw ValidationError("alphabet sizes must be positive");
  }
  const auto expect = static_cast<std::size_t>(size_x_) * size_y_ * size_z_;
  if (w_.size() != expect) {
    throw ValidationError("W has " + std::to_string(w_.size()) + " entries, expected " +
                          std::to_string(expect));
  }
  if (q_x_.size() != static_cast<std::size_t>(size_x_)) {
    throw ValidationError("qX length " + std::to_string(q_x_.size()) + " != sizeX " +
                          std::to_string(size_x_));
  }
  if (q_y_.size() != static_cast<std::size_t>(size_y_)) {
    throw ValidationError("qY length " + std::to_string(q_y_.size()) + " != sizeY " +
                          std::to_string(size_y_));
  }
  for (int x = 0; x < size_x_; ++x) {
    for (int y = 0; y < size_y_; ++y) {
      check_pmf(row(x, y), kMassTolerance,
                "W[" + std::to_string(x) + "][" + std::to_string(y) + "]");
    }
  }
  check_pmf(q_x_, kMassTolerance, "qX");
  check_pmf(q_y_, kMassTolerance, "qY");
}

ChannelSpec parse_channel(std::string_view text) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("malformed channel document: ") + e.what());
  }
  if (!doc.is_object()) throw ValidationError("channel document must be a JSON object");

  static const std::set<std::string> known = {"sizeX", "sizeY", "sizeZ", "W", "qX", "qY", "name"};
  for (const auto& [key, _] : doc.items()) {
    if (!known.count(key)) throw ValidationError("unknown field \"" + key + "\"");
  }
  for (const char* key : {"sizeX", "sizeY", "sizeZ", "W", "qX", "qY"}) {
    if (!doc.contains(key)) throw ValidationError(std::string("missing field \"") + key + "\"");
  }

  auto get_size = [&](const char* key) {
    const auto& v = doc[key];
    if (!v.is_number_integer() || v.get<long long>() < 1) {
      throw ValidationError(std::string(key) + " must be a positive integer");
    }
    return static_cast<int>(v.get<long long>());
  };
  auto get_vec = [](const json& v, std::size_t len, const std::string& what) {
    if (!v.is_array()) throw ValidationError(what + " must be an array");
    if (v.size() != len) {
      throw ValidationError(what + " has length " + std::to_string(v.size()) + ", expected " +
                            std::to_string(len));
    }
    std::vector<double> out;
    out.reserve(len);
    for (const auto& e : v) {
      if (!e.is_number()) throw ValidationError(what + " entries must be numbers");
      out.push_back(e.get<double>());
    }
    return out;
  };

  const int sx = get_size("sizeX");
  const int sy = get_size("sizeY");
  const int sz = get_size("sizeZ");

  const auto& wdoc = doc["W"];
  if (!wdoc.is_array() || wdoc.size() != static_cast<std::size_t>(sx)) {
    throw ValidationError("W must be an array of sizeX = " + std::to_string(sx) + " entries");
  }
  std::vector<double> w;
  w.reserve(static_cast<std::size_t>(sx) * sy * sz);
  for (int x = 0; x < sx; ++x) {
    const auto& wx = wdoc[x];
    if (!wx.is_array() || wx.size() != static_cast<std::size_t>(sy)) {
      throw ValidationError("W[" + std::to_string(x) + "] must have sizeY = " +
                            std::to_string(sy) + " rows");
    }
    for (int y = 0; y < sy; ++y) {
      auto r = get_vec(wx[y], sz, "W[" + std::to_string(x) + "][" + std::to_string(y) + "]");
      w.insert(w.end(), r.begin(), r.end());
    }
  }
  std::string name;
  if (doc.contains("name")) {
    if (!doc["name"].is_string()) throw ValidationError("name must be a string");
    name = doc["name"].get<std::string>();
  }
  return ChannelSpec(sx, sy, sz, std::move(w), get_vec(doc["qX"], sx, "qX"),
                     get_vec(doc["qY"], sy, "qY"), std::move(name));
}

ChannelSpec load_channel(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open channel file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_channel(ss.str());
}

std::string channel_to_json(const ChannelSpec& ch) {
  nlohmann::json doc;
  if (!ch.name().empty()) doc["name"] = ch.name();
  doc["sizeX"] = ch.size_x();
  doc["sizeY"] = ch.size_y();
  doc["sizeZ"] = ch.size_z();
  nlohmann::json w = nlohmann::json::array();
  for (int x = 0; x < ch.size_x(); ++x) {
    nlohmann::json wx = nlohmann::json::array();
    for (int y = 0; y < ch.size_y(); ++y) {
      auto r = ch.row(x, y);
      wx.push_back(std::vector<double>(r.begin(), r.end()));
    }
    w.push_back(wx);
  }
  doc["W"] = w;
  doc["qX"] = std::vector<double>(ch.q_x().begin(), ch.q_x().end());
  doc["qY"] = std::vector<double>(ch.q_y().begin(), ch.q_y().end());
  return doc.dump();
}

ChannelSpec adder_mac() { return noisy_adder_mac(0.0); }

ChannelSpec noisy_adder_mac(double flip) {
  if (flip < 0.0 || flip > 1.0) throw DomainError("flip probability must be in [0,1]");
  std::vector<double> w;
  for (int x = 0; x < 2; ++x) {
    for (int y = 0; y < 2; ++y) {
      for (int z = 0; z < 3; ++z) {
        w.push_back((1.0 - flip) * (z == x + y ? 1.0 : 0.0) + flip / 3.0);
      }
    }
  }
  return ChannelSpec(2, 2, 3, std::move(w), {0.5, 0.5}, {0.5, 0.5},
                     flip == 0.0 ? "adder" : "noisy-adder");
}

JointDist::JointDist(const ChannelSpec& ch) : ch_(ch) {
  const int sx = ch.size_x(), sy = ch.size_y(), sz = ch.size_z();
  xyz_.resize(static_cast<std::size_t>(sx) * sy * sz);
  std::vector<CompensatedSum> z(sz), yz(static_cast<std::size_t>(sy) * sz),
      xz(static_cast<std::size_t>(sx) * sz);
  for (int x = 0; x < sx; ++x) {
    for (int y = 0; y < sy; ++y) {
      for (int zz = 0; zz < sz; ++zz) {
        const double p = ch.q_x()[x] * ch.q_y()[y] * ch.w(x, y, zz);
        xyz_[(static_cast<std::size_t>(x) * sy + y) * sz + zz] = p;
        z[zz] += p;
        yz[static_cast<std::size_t>(y) * sz + zz] += p;
        xz[static_cast<std::size_t>(x) * sz + zz] += p;
      }
    }
  }
  auto collect = [](const std::vector<CompensatedSum>& acc) {
    std::vector<double> out(acc.size());
    for (std::size_t i = 0; i < acc.size(); ++i) out[i] = acc[i].value();
    return out;
  };
  z_ = collect(z);
  yz_ = collect(yz);
  xz_ = collect(xz);
}

double JointDist::q_z_given_y(int z, int y) const {
  const double py = q_y(y);
  if (py <= 0.0) throw DomainError("q(z|y) undefined for y = " + std::to_string(y) + " with qY(y) = 0");
  return q_yz(y, z) / py;
}

double JointDist::q_z_given_x(int z, int x) const {
  const double px = q_x(x);
  if (px <= 0.0) throw DomainError("q(z|x) undefined for x = " + std::to_string(x) + " with qX(x) = 0");
  return q_xz(x, z) / px;
}

double sequence_log_prob(const ChannelSpec& ch, std::span<const int> x, std::span<const int> y,
                         std::span<const int> z) {
  if (x.size() != z.size() || y.size() != z.size()) {
    throw DomainError("sequence length mismatch");
  }
  double acc = 0.0;
  for (std::size_t k = 0; k < z.size(); ++k) {
    const double p = ch.w(x[k], y[k], z[k]);
    if (p <= 0.0) return kNegInf;
    acc += std::log(p);
  }
  return acc;
}

double sequence_log_prob(std::span<const double> p, std::span<const int> s) {
  double acc = 0.0;
  for (int sym : s) {
    if (sym < 0 || static_cast<std::size_t>(sym) >= p.size()) {
      throw DomainError("symbol out of range");
    }
    if (p[sym] <= 0.0) return kNegInf;
    acc += std::log(p[sym]);
  }
  return acc;
}

}  // namespace macres
