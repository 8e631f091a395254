#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "macres/numeric.hpp"

namespace macres {

// Probability mass function over a finite index set. For sequence-level
// distributions the index encodes a length-n word over an alphabet of size
// `alphabet`, first symbol most significant.
struct DistVector {
  std::vector<double> probs;
  int n = 1;
  int alphabet = 0;

  std::size_t size() const { return probs.size(); }
  double operator[](std::size_t i) const { return probs[i]; }

  // Throws ValidationError unless entries are in [0,1] and the total mass
  // is 1 within kMassTolerance * sqrt(size).
  void validate(std::string_view what = "distribution") const;
};

DistVector make_dist(std::vector<double> probs, int n = 1);

// Decodes a sequence index into symbols (first symbol most significant).
void decode_index(std::uint64_t index, int alphabet, std::span<int> out);
std::uint64_t encode_index(std::span<const int> symbols, int alphabet);
std::uint64_t checked_pow(std::uint64_t base, int exponent);

// Finite two-input channel W(z|x,y) together with its input distributions.
class ChannelSpec {
 public:
  // `w` is laid out row-major as [x][y][z]. Validates every invariant.
  ChannelSpec(int size_x, int size_y, int size_z, std::vector<double> w,
              std::vector<double> q_x, std::vector<double> q_y,
              std::string name = {});

  int size_x() const { return size_x_; }
  int size_y() const { return size_y_; }
  int size_z() const { return size_z_; }
  const std::string& name() const { return name_; }

  double w(int x, int y, int z) const {
    return w_[(static_cast<std::size_t>(x) * size_y_ + y) * size_z_ + z];
  }
  std::span<const double> row(int x, int y) const {
    return {w_.data() + (static_cast<std::size_t>(x) * size_y_ + y) * size_z_,
            static_cast<std::size_t>(size_z_)};
  }
  std::span<const double> q_x() const { return q_x_; }
  std::span<const double> q_y() const { return q_y_; }
  std::span<const double> transition() const { return w_; }

 private:
  int size_x_;
  int size_y_;
  int size_z_;
  std::vector<double> w_;
  std::vector<double> q_x_;
  std::vector<double> q_y_;
  std::string name_;
};

// Parses the JSON channel document. Fields: sizeX, sizeY, sizeZ, W (nested
// [x][y][z]), qX, qY and an optional "name". Unknown fields are rejected.
ChannelSpec parse_channel(std::string_view text);
ChannelSpec load_channel(const std::string& path);
std::string channel_to_json(const ChannelSpec& ch);

// Reference channels used throughout the tests and the CLI.
ChannelSpec adder_mac();
// Adder output replaced by a uniform symbol with probability `flip`.
ChannelSpec noisy_adder_mac(double flip = 0.1);

// Induced joint q(x,y,z) = qX(x) qY(y) W(z|x,y) with cached marginals.
class JointDist {
 public:
  explicit JointDist(const ChannelSpec& ch);

  const ChannelSpec& channel() const { return ch_; }
  int size_x() const { return ch_.size_x(); }
  int size_y() const { return ch_.size_y(); }
  int size_z() const { return ch_.size_z(); }

  double prob(int x, int y, int z) const {
    return xyz_[(static_cast<std::size_t>(x) * size_y() + y) * size_z() + z];
  }
  std::span<const double> probs() const { return xyz_; }

  double q_x(int x) const { return ch_.q_x()[x]; }
  double q_y(int y) const { return ch_.q_y()[y]; }
  double q_z(int z) const { return z_[z]; }
  std::span<const double> q_z() const { return z_; }
  double q_yz(int y, int z) const { return yz_[static_cast<std::size_t>(y) * size_z() + z]; }
  double q_xz(int x, int z) const { return xz_[static_cast<std::size_t>(x) * size_z() + z]; }

  // q(z|y) and q(z|x). Throw DomainError when the conditioning symbol has
  // zero probability.
  double q_z_given_y(int z, int y) const;
  double q_z_given_x(int z, int x) const;

  DistVector output_distribution() const { return {z_, 1, size_z()}; }

 private:
  ChannelSpec ch_;
  std::vector<double> xyz_;
  std::vector<double> z_;
  std::vector<double> yz_;
  std::vector<double> xz_;
};

// Sum of log W(z_k|x_k,y_k). Returns -inf when any factor is zero.
double sequence_log_prob(const ChannelSpec& ch, std::span<const int> x,
                         std::span<const int> y, std::span<const int> z);
// Sum of log p(s_k) for a memoryless source with single-letter law `p`.
double sequence_log_prob(std::span<const double> p, std::span<const int> s);

}  // namespace macres
