#pragma once
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "pm/distribution.hpp"

namespace pm {

// P_{Y|X}: either a finite transition matrix (DMC, alphabets canonicalized to
// {0..|X|-1}, {0..|Y|-1}) or an additive-noise law Y = X + Z.
class MemorylessChannel {
 public:
  virtual ~MemorylessChannel() = default;
  virtual std::string label() const = 0;
  virtual DistPtr conditional(double x) const = 0;
  virtual bool is_dmc() const { return false; }
  // DMC only: row-stochastic matrix [x][y].
  virtual const std::vector<std::vector<double>>& matrix() const;
  // Additive only: noise law.
  virtual DistPtr noise() const { return nullptr; }
};

using ChannelPtr = std::shared_ptr<const MemorylessChannel>;

ChannelPtr dmc_channel(std::vector<std::vector<double>> matrix, std::string label = "dmc");
ChannelPtr bsc_channel(double crossover);
// Erasure probability eps (output 2 is the erasure), capacity 1-eps. The
// alternative spelling bec_channel_p(p) maps p -> eps = 1-p.
ChannelPtr bec_channel(double eps);
inline ChannelPtr bec_channel_p(double p) { return bec_channel(1.0 - p); }
ChannelPtr additive_channel(DistPtr noise_dist, std::string label);

struct ConstraintFunction {
  std::function<double(double)> eta;
  double bound;
};

enum class PairKind { awgn, bsc, bec, dmc, uniform_add, exp_add, exp_mean, generic };

// An input law plus a channel, with the derived objects every other module
// needs: output law, inverse channel, mutual information, and (for DMCs) the
// posterior matrix and quantile grids.
class InputChannelPair {
 public:
  PairKind kind = PairKind::generic;
  std::string label;
  DistPtr input;
  ChannelPtr channel;
  DistPtr output;   // cached P_Y
  double mi_bits = 0.0;  // cached I(X;Y)

  // Channel parameters (meaningful subset per kind).
  double P = 0, N = 0, snr = 0;  // awgn
  double p = 0;                  // bsc crossover
  double eps = 0;                // bec erasure
  double a = 0, b = 0;           // mean-constrained exponential

  // DMC caches: posterior[y][x], output pmf, cumulative input/output grids.
  std::vector<std::vector<double>> posterior;
  std::vector<double> out_pmf;
  std::vector<double> in_cum;
  std::vector<double> out_cum;

  DistPtr inverse(double y) const;  // P_{X|Y}(.|y)
  bool is_dmc() const { return channel->is_dmc(); }
};

using PairPtr = std::shared_ptr<const InputChannelPair>;

PairPtr make_awgn_pair(double input_power, double noise_variance);
PairPtr make_bsc_pair(double crossover);
PairPtr make_bec_pair(double eps);
PairPtr make_uniform_pair();
PairPtr make_exponential_pair();
PairPtr make_exp_mean_pair(double a, double b);
PairPtr make_dmc_pair(DistPtr input, ChannelPtr channel);
PairPtr make_generic_pair(DistPtr input, ChannelPtr channel);

// Module operations.
DistPtr output_distribution(const InputChannelPair& pair, double tol);
DistPtr inverse_channel(const InputChannelPair& pair, double y);
double mutual_information(const InputChannelPair& pair, double tol);
double empirical_constraint(const std::vector<double>& xs, const ConstraintFunction& cf);

// Blahut-Arimoto: unconstrained DMC capacity (bits) and an achieving input.
std::pair<double, DistPtr> capacity_dmc(const MemorylessChannel& channel, double tol);

// Differential/discrete entropy of a law, in bits (quadrature for continuous).
double entropy_bits(const ScalarDistribution& d, double tol);

}  // namespace pm
