#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "equiplan/rep.hpp"
#include "equiplan/rng.hpp"

namespace equiplan {

// Orthonormal (Frobenius) basis of {W : rho_out(g) W = W rho_in(g) for all g},
// obtained by group-averaging every canonical dim_out x dim_in matrix.
// An empty result is legal.
std::vector<Eigen::MatrixXd> build_intertwiner_basis(const Rep& rep_in, const Rep& rep_out);

// (1/|G|) sum_g rho_out(g)^T W rho_in(g)
Eigen::MatrixXd project_intertwiner(const Rep& rep_in, const Rep& rep_out,
                                    const Eigen::MatrixXd& w);

// Regular-rep copies for a hidden layer replacing `plain_width` plain units.
int hidden_copies_sqrt_rule(int plain_width, int group_order);

inline constexpr double kLeakySlope = 0.01;

/// Cached forward activations for one batch; consumed by backward().
struct Tape {
  std::vector<Eigen::MatrixXd> inputs;  // input to each layer
  std::vector<Eigen::MatrixXd> pre;     // pre-activation of each layer
  bool empty() const { return inputs.empty(); }
};

/// Gradients summed over the batch columns; layout matches params().
struct Gradients {
  Eigen::VectorXd params;
  Eigen::MatrixXd x;
};

/// One affine map. Weights live in the span of per-block intertwiner bases;
/// for plain layers every entry of the weight matrix is a free coefficient.
struct Layer {
  struct Piece {
    int out_offset, out_dim, in_offset, in_dim;
    std::shared_ptr<const std::vector<Eigen::MatrixXd>> basis;
    int coeff_offset;
  };
  Layer(Rep in, Rep out) : rep_in(std::move(in)), rep_out(std::move(out)) {}

  Rep rep_in;
  Rep rep_out;
  bool dense = false;
  std::vector<Piece> pieces;
  int n_coeffs = 0;
  std::vector<int> bias_rows;        // output coordinates that carry a bias
  std::vector<RepBlock> gated_blocks; // output blocks using the norm gate
  bool hidden = false;                // has a nonlinearity after it
};

/// Multilayer perceptron between representations.
///
/// With `equivariant` set, every linear map is an intertwiner, biases sit only
/// on trivial blocks, leaky rectifiers act on trivial and regular blocks and
/// the gate v * sigmoid(|v| - b) acts on standard and sign blocks, so the map
/// commutes with the group action. Otherwise the same widths are used with
/// dense weights, biases everywhere and leaky rectifiers throughout.
class EquivariantMLP {
 public:
  // reps[0] is the input, reps.back() the output; at least two entries.
  static EquivariantMLP build(const std::vector<Rep>& reps, bool equivariant);

  void init(Rng& rng);

  Eigen::VectorXd forward(const Eigen::VectorXd& x) const;
  // Columns are independent inputs.
  Eigen::MatrixXd forward_batch(const Eigen::MatrixXd& x, Tape* tape = nullptr) const;
  Gradients backward(const Tape& tape, const Eigen::MatrixXd& grad_out) const;

  int num_params() const { return num_params_; }
  Eigen::VectorXd params() const;
  void set_params(const Eigen::VectorXd& p);

  bool equivariant() const { return equivariant_; }
  const std::vector<Layer>& layers() const { return layers_; }
  const Rep& rep_in() const { return layers_.front().rep_in; }
  const Rep& rep_out() const { return layers_.back().rep_out; }
  const Eigen::MatrixXd& weight(int layer) const { return weights_[layer]; }
  const Eigen::VectorXd& bias(int layer) const { return biases_[layer]; }
  // Full-size basis of one layer (one dense matrix per coefficient).
  std::vector<Eigen::MatrixXd> layer_basis(int layer) const;

  nlohmann::json to_json() const;
  static EquivariantMLP from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static EquivariantMLP load(const std::filesystem::path& path);

 private:
  void assemble();

  bool equivariant_ = true;
  std::vector<Layer> layers_;
  std::vector<Eigen::VectorXd> coeffs_;
  std::vector<Eigen::VectorXd> bias_params_;
  std::vector<Eigen::VectorXd> gates_;
  std::vector<Eigen::MatrixXd> weights_;
  std::vector<Eigen::VectorXd> biases_;
  int num_params_ = 0;
};

// FNV-1a over the basis entries rounded to 1e-9.
std::uint64_t basis_hash(const Layer& layer);

}  // namespace equiplan
