#include "equiplan/net.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <tuple>

#include "equiplan/error.hpp"

namespace equiplan {

namespace {

using BasisPtr = std::shared_ptr<const std::vector<Eigen::MatrixXd>>;

bool is_gated(RepKind kind) {
  return kind == RepKind::kStandard2d || kind == RepKind::kStandard3d || kind == RepKind::kSign;
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Keyed by group identity and block shapes. The GroupPtr in the value keeps
// the address from being reused while the entry lives.
struct BasisCache {
  using Key = std::tuple<const GroupSpec*, RepKind, int, RepKind, int>;
  std::mutex mu;
  std::map<Key, std::pair<GroupPtr, BasisPtr>> entries;

  BasisPtr get(const Rep& in, const Rep& out) {
    const Key key{in.group().get(), in.kind(), in.dim(), out.kind(), out.dim()};
    {
      std::lock_guard lock(mu);
      if (auto it = entries.find(key); it != entries.end()) return it->second.second;
    }
    auto basis = std::make_shared<const std::vector<Eigen::MatrixXd>>(
        build_intertwiner_basis(in, out));
    std::lock_guard lock(mu);
    return entries.try_emplace(key, in.group(), basis).first->second.second;
  }
};

BasisCache& basis_cache() {
  static BasisCache cache;
  return cache;
}

void require_same_group(const Rep& a, const Rep& b) {
  if (a.group() != b.group() && a.group()->name() != b.group()->name())
    throw Error(ErrorCode::kGroupMismatch, "layer representations over different groups");
}

}  // namespace

Eigen::MatrixXd project_intertwiner(const Rep& rep_in, const Rep& rep_out,
                                    const Eigen::MatrixXd& w) {
  require_same_group(rep_in, rep_out);
  if (w.rows() != rep_out.dim() || w.cols() != rep_in.dim())
    throw Error(ErrorCode::kDimensionMismatch, "project_intertwiner: weight shape");
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(w.rows(), w.cols());
  const int order = rep_in.group()->order();
  for (Element g = 0; g < order; ++g)
    acc.noalias() += rep_out.matrix(g).transpose() * w * rep_in.matrix(g);
  return acc / order;
}

std::vector<Eigen::MatrixXd> build_intertwiner_basis(const Rep& rep_in, const Rep& rep_out) {
  require_same_group(rep_in, rep_out);
  const int din = rep_in.dim();
  const int dout = rep_out.dim();
  const int order = rep_in.group()->order();
  // P(E_ij) = (1/|G|) sum_g rho_out(g).row(i)^T rho_in(g).row(j)
  std::vector<Eigen::VectorXd> accepted;
  Eigen::MatrixXd projected(dout, din);
  for (int i = 0; i < dout; ++i) {
    for (int j = 0; j < din; ++j) {
      projected.setZero();
      for (Element g = 0; g < order; ++g)
        projected.noalias() +=
            rep_out.matrix(g).row(i).transpose() * rep_in.matrix(g).row(j);
      projected /= order;
      Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(projected.data(), dout * din);
      if (v.norm() < 1e-8) continue;
      for (int pass = 0; pass < 2; ++pass)
        for (const auto& q : accepted) v -= q.dot(v) * q;
      const double n = v.norm();
      if (n < 1e-8) continue;
      accepted.push_back(v / n);
    }
  }
  std::vector<Eigen::MatrixXd> basis;
  basis.reserve(accepted.size());
  for (const auto& v : accepted)
    basis.emplace_back(Eigen::Map<const Eigen::MatrixXd>(v.data(), dout, din));
  return basis;
}

int hidden_copies_sqrt_rule(int plain_width, int group_order) {
  const long copies = std::lround(plain_width / std::sqrt(static_cast<double>(group_order)));
  return static_cast<int>(std::max(1L, copies));
}

EquivariantMLP EquivariantMLP::build(const std::vector<Rep>& reps, bool equivariant) {
  if (reps.size() < 2) throw Error(ErrorCode::kEmptyInput, "network needs at least two reps");
  EquivariantMLP net;
  net.equivariant_ = equivariant;
  for (std::size_t l = 0; l + 1 < reps.size(); ++l) {
    const Rep& in = reps[l];
    const Rep& out = reps[l + 1];
    require_same_group(in, out);
    Layer layer(in, out);
    layer.hidden = l + 2 < reps.size();
    layer.dense = !equivariant;
    if (equivariant) {
      for (const auto& bo : out.blocks()) {
        const Rep sub_out = rep_block(out, bo);
        for (const auto& bi : in.blocks()) {
          BasisPtr basis = basis_cache().get(rep_block(in, bi), sub_out);
          if (basis->empty()) continue;
          layer.pieces.push_back({bo.offset, bo.dim, bi.offset, bi.dim, basis, layer.n_coeffs});
          layer.n_coeffs += static_cast<int>(basis->size());
        }
        if (bo.kind == RepKind::kTrivial)
          for (int r = 0; r < bo.dim; ++r) layer.bias_rows.push_back(bo.offset + r);
        if (layer.hidden && is_gated(bo.kind)) layer.gated_blocks.push_back(bo);
      }
    } else {
      layer.n_coeffs = in.dim() * out.dim();
      for (int r = 0; r < out.dim(); ++r) layer.bias_rows.push_back(r);
    }
    net.coeffs_.push_back(Eigen::VectorXd::Zero(layer.n_coeffs));
    net.bias_params_.push_back(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(layer.bias_rows.size())));
    net.gates_.push_back(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(layer.gated_blocks.size())));
    net.num_params_ += layer.n_coeffs + static_cast<int>(layer.bias_rows.size() + layer.gated_blocks.size());
    net.layers_.push_back(std::move(layer));
  }
  net.assemble();
  return net;
}

void EquivariantMLP::init(Rng& rng) {
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const Layer& layer = layers_[l];
    const double fan_in = layer.rep_in.dim();
    const double fan_out = layer.rep_out.dim();
    double a = std::sqrt(6.0 / (fan_in + fan_out));
    // Rescale so the assembled weight has the same entry variance as a
    // dense layer initialized with the same bound.
    if (layer.n_coeffs > 0) a *= std::sqrt(fan_in * fan_out / layer.n_coeffs);
    for (Eigen::Index k = 0; k < coeffs_[l].size(); ++k) coeffs_[l](k) = rng.uniform(-a, a);
    for (Eigen::Index k = 0; k < bias_params_[l].size(); ++k)
      bias_params_[l](k) = rng.uniform(-0.1, 0.1);
    gates_[l].setZero();
  }
  assemble();
}

void EquivariantMLP::assemble() {
  weights_.assign(layers_.size(), Eigen::MatrixXd());
  biases_.assign(layers_.size(), Eigen::VectorXd());
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const Layer& layer = layers_[l];
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(layer.rep_out.dim(), layer.rep_in.dim());
    if (layer.dense) {
      w = Eigen::Map<const Eigen::MatrixXd>(coeffs_[l].data(), w.rows(), w.cols());
    } else {
      for (const auto& piece : layer.pieces) {
        auto block = w.block(piece.out_offset, piece.in_offset, piece.out_dim, piece.in_dim);
        for (std::size_t k = 0; k < piece.basis->size(); ++k)
          block += coeffs_[l](piece.coeff_offset + static_cast<int>(k)) * (*piece.basis)[k];
      }
    }
    Eigen::VectorXd b = Eigen::VectorXd::Zero(layer.rep_out.dim());
    for (std::size_t k = 0; k < layer.bias_rows.size(); ++k)
      b(layer.bias_rows[k]) = bias_params_[l](static_cast<Eigen::Index>(k));
    weights_[l] = std::move(w);
    biases_[l] = std::move(b);
  }
}

Eigen::VectorXd EquivariantMLP::forward(const Eigen::VectorXd& x) const {
  return forward_batch(x).col(0);
}

Eigen::MatrixXd EquivariantMLP::forward_batch(const Eigen::MatrixXd& x, Tape* tape) const {
  if (x.rows() != rep_in().dim())
    throw Error(ErrorCode::kDimensionMismatch,
                "forward: input of size " + std::to_string(x.rows()) + ", expected " +
                    std::to_string(rep_in().dim()));
  if (tape) {
    tape->inputs.clear();
    tape->pre.clear();
  }
  Eigen::MatrixXd h = x;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const Layer& layer = layers_[l];
    Eigen::MatrixXd z = weights_[l] * h;
    z.colwise() += biases_[l];
    if (tape) {
      tape->inputs.push_back(std::move(h));
      tape->pre.push_back(z);
    }
    if (layer.hidden) {
      std::vector<char> gated_row(z.rows(), 0);
      for (std::size_t k = 0; k < layer.gated_blocks.size(); ++k) {
        const RepBlock& b = layer.gated_blocks[k];
        for (int r = 0; r < b.dim; ++r) gated_row[b.offset + r] = 1;
        for (Eigen::Index c = 0; c < z.cols(); ++c) {
          auto v = z.col(c).segment(b.offset, b.dim);
          v *= sigmoid(v.norm() - gates_[l](static_cast<Eigen::Index>(k)));
        }
      }
      for (Eigen::Index r = 0; r < z.rows(); ++r) {
        if (gated_row[r]) continue;
        for (Eigen::Index c = 0; c < z.cols(); ++c)
          if (z(r, c) < 0) z(r, c) *= kLeakySlope;
      }
    }
    h = std::move(z);
  }
  return h;
}

Gradients EquivariantMLP::backward(const Tape& tape, const Eigen::MatrixXd& grad_out) const {
  if (tape.empty() || tape.inputs.size() != layers_.size())
    throw Error(ErrorCode::kState, "backward called without a recorded forward pass");
  const Eigen::Index batch = tape.inputs.front().cols();
  if (grad_out.rows() != rep_out().dim() || grad_out.cols() != batch)
    throw Error(ErrorCode::kDimensionMismatch, "backward: grad_out shape");

  std::vector<Eigen::VectorXd> g_coeffs(layers_.size());
  std::vector<Eigen::VectorXd> g_bias(layers_.size());
  std::vector<Eigen::VectorXd> g_gate(layers_.size());
  Eigen::MatrixXd g = grad_out;  // gradient w.r.t. the output of layer l
  for (std::size_t li = layers_.size(); li-- > 0;) {
    const Layer& layer = layers_[li];
    const Eigen::MatrixXd& z = tape.pre[li];
    g_gate[li] = Eigen::VectorXd::Zero(gates_[li].size());
    if (layer.hidden) {
      std::vector<char> gated_row(z.rows(), 0);
      for (std::size_t k = 0; k < layer.gated_blocks.size(); ++k) {
        const RepBlock& b = layer.gated_blocks[k];
        const double bias = gates_[li](static_cast<Eigen::Index>(k));
        for (int r = 0; r < b.dim; ++r) gated_row[b.offset + r] = 1;
        for (Eigen::Index c = 0; c < batch; ++c) {
          const Eigen::VectorXd v = z.col(c).segment(b.offset, b.dim);
          auto gy = g.col(c).segment(b.offset, b.dim);
          const double n = v.norm();
          const double s = sigmoid(n - bias);
          const double vg = v.dot(gy);
          g_gate[li](static_cast<Eigen::Index>(k)) -= s * (1 - s) * vg;
          Eigen::VectorXd gv = s * gy;
          if (n > 0) gv += (s * (1 - s) * vg / n) * v;
          gy = gv;
        }
      }
      for (Eigen::Index r = 0; r < z.rows(); ++r) {
        if (gated_row[r]) continue;
        for (Eigen::Index c = 0; c < batch; ++c)
          if (z(r, c) < 0) g(r, c) *= kLeakySlope;
      }
    }
    // g is now the gradient w.r.t. the pre-activation z = W x + b
    const Eigen::MatrixXd dw = g * tape.inputs[li].transpose();
    const Eigen::VectorXd db = g.rowwise().sum();
    g_coeffs[li] = Eigen::VectorXd::Zero(layer.n_coeffs);
    if (layer.dense) {
      g_coeffs[li] = Eigen::Map<const Eigen::VectorXd>(dw.data(), dw.size());
    } else {
      for (const auto& piece : layer.pieces) {
        const auto block = dw.block(piece.out_offset, piece.in_offset, piece.out_dim, piece.in_dim);
        for (std::size_t k = 0; k < piece.basis->size(); ++k)
          g_coeffs[li](piece.coeff_offset + static_cast<int>(k)) =
              block.cwiseProduct((*piece.basis)[k]).sum();
      }
    }
    g_bias[li] = Eigen::VectorXd(static_cast<Eigen::Index>(layer.bias_rows.size()));
    for (std::size_t k = 0; k < layer.bias_rows.size(); ++k)
      g_bias[li](static_cast<Eigen::Index>(k)) = db(layer.bias_rows[k]);
    g = weights_[li].transpose() * g;
  }

  Gradients out;
  out.params.resize(num_params_);
  Eigen::Index at = 0;
  for (std::size_t l = 0; l < layers_.size(); ++l)
    for (const auto* part : {&g_coeffs[l], &g_bias[l], &g_gate[l]}) {
      out.params.segment(at, part->size()) = *part;
      at += part->size();
    }
  out.x = std::move(g);
  return out;
}

Eigen::VectorXd EquivariantMLP::params() const {
  Eigen::VectorXd p(num_params_);
  Eigen::Index at = 0;
  for (std::size_t l = 0; l < layers_.size(); ++l)
    for (const auto* part : {&coeffs_[l], &bias_params_[l], &gates_[l]}) {
      p.segment(at, part->size()) = *part;
      at += part->size();
    }
  return p;
}

void EquivariantMLP::set_params(const Eigen::VectorXd& p) {
  if (p.size() != num_params_)
    throw Error(ErrorCode::kDimensionMismatch, "set_params: wrong parameter count");
  Eigen::Index at = 0;
  for (std::size_t l = 0; l < layers_.size(); ++l)
    for (auto* part : {&coeffs_[l], &bias_params_[l], &gates_[l]}) {
      *part = p.segment(at, part->size());
      at += part->size();
    }
  assemble();
}

std::vector<Eigen::MatrixXd> EquivariantMLP::layer_basis(int l) const {
  const Layer& layer = layers_.at(l);
  const int dout = layer.rep_out.dim();
  const int din = layer.rep_in.dim();
  std::vector<Eigen::MatrixXd> out;
  out.reserve(layer.n_coeffs);
  if (layer.dense) {
    for (int k = 0; k < layer.n_coeffs; ++k) {
      Eigen::MatrixXd e = Eigen::MatrixXd::Zero(dout, din);
      e(k % dout, k / dout) = 1.0;
      out.push_back(std::move(e));
    }
    return out;
  }
  for (const auto& piece : layer.pieces)
    for (const auto& b : *piece.basis) {
      Eigen::MatrixXd e = Eigen::MatrixXd::Zero(dout, din);
      e.block(piece.out_offset, piece.in_offset, piece.out_dim, piece.in_dim) = b;
      out.push_back(std::move(e));
    }
  return out;
}

std::uint64_t basis_hash(const Layer& layer) {
  std::uint64_t h = 14695981039346656037ULL;
  auto mix = [&h](std::int64_t v) {
    for (int byte = 0; byte < 8; ++byte) {
      h ^= static_cast<std::uint64_t>(v >> (8 * byte)) & 0xffU;
      h *= 1099511628211ULL;
    }
  };
  mix(layer.dense);
  mix(layer.rep_out.dim());
  mix(layer.rep_in.dim());
  for (const auto& piece : layer.pieces) {
    mix(piece.out_offset);
    mix(piece.in_offset);
    for (const auto& b : *piece.basis)
      for (Eigen::Index k = 0; k < b.size(); ++k) mix(std::llround(b.data()[k] * 1e9));
  }
  return h;
}

nlohmann::json EquivariantMLP::to_json() const {
  nlohmann::json reps = nlohmann::json::array();
  reps.push_back(rep_structure(rep_in()));
  nlohmann::json layers = nlohmann::json::array();
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    reps.push_back(rep_structure(layers_[l].rep_out));
    const auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.begin(), v.end()); };
    layers.push_back({{"basis_hash", basis_hash(layers_[l])},
                      {"coeffs", vec(coeffs_[l])},
                      {"bias", vec(bias_params_[l])},
                      {"gate", vec(gates_[l])}});
  }
  return {{"format", "equiplan-mlp-1"},
          {"group", rep_in().group()->name()},
          {"equivariant", equivariant_},
          {"reps", std::move(reps)},
          {"layers", std::move(layers)}};
}

EquivariantMLP EquivariantMLP::from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "equiplan-mlp-1")
    throw Error(ErrorCode::kConfig, "not an equiplan network checkpoint");
  std::vector<Rep> reps;
  for (const auto& r : j.at("reps")) reps.push_back(rep_from_structure(r));
  EquivariantMLP net = build(reps, j.at("equivariant").get<bool>());
  const auto& layers = j.at("layers");
  if (layers.size() != net.layers_.size())
    throw Error(ErrorCode::kConfig, "checkpoint layer count mismatch");
  for (std::size_t l = 0; l < net.layers_.size(); ++l) {
    const auto& lj = layers[l];
    if (lj.at("basis_hash").get<std::uint64_t>() != basis_hash(net.layers_[l]))
      throw Error(ErrorCode::kConfig, "checkpoint basis hash mismatch in layer " + std::to_string(l));
    const auto load = [&](const char* key, Eigen::VectorXd& dst) {
      const auto v = lj.at(key).get<std::vector<double>>();
      if (static_cast<Eigen::Index>(v.size()) != dst.size())
        throw Error(ErrorCode::kConfig, std::string("checkpoint size mismatch for ") + key);
      dst = Eigen::Map<const Eigen::VectorXd>(v.data(), dst.size());
    };
    load("coeffs", net.coeffs_[l]);
    load("bias", net.bias_params_[l]);
    load("gate", net.gates_[l]);
  }
  net.assemble();
  return net;
}

void EquivariantMLP::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kConfig, "cannot write " + path.string());
  out << to_json().dump(1) << '\n';
}

EquivariantMLP EquivariantMLP::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kConfig, "cannot read " + path.string());
  return from_json(nlohmann::json::parse(in));
}

}  // namespace equiplan
