#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "techtrace/corpus.hpp"
#include "techtrace/error.hpp"
#include "techtrace/linalg.hpp"
#include "techtrace/random.hpp"

namespace techtrace {

// Patent text encoder: hashed word embeddings, three convolution / ReLU /
// max-pool (stride 2) stages, a global mean over positions and a linear
// projection to output_dim.
struct EncoderConfig {
  int embed_dim = 32;     // d0
  int max_tokens = 64;    // d1, pad / truncate length
  int samples = 8;        // d2, patents pooled per entity-year
  int output_dim = 32;    // d
  std::array<int, 3> windows{3, 3, 3};
  std::array<int, 3> channels{32, 32, 32};
  int hash_buckets = 4096;

  void validate() const {
    if (embed_dim < 1 || max_tokens < 1 || samples < 1 || output_dim < 1) {
      throw ValidationError("encoder dimensions d0, d1, d2, d must all be >= 1");
    }
    for (int s = 0; s < 3; ++s) {
      if (windows[s] < 1) throw ValidationError("encoder window sizes must be >= 1");
      if (channels[s] < 1) throw ValidationError("encoder channel counts must be >= 1");
    }
    if (hash_buckets < 1) throw ValidationError("encoder hash_buckets must be >= 1");
  }

  // Sequence length entering stage s (s = 3 is the length after the last pool).
  int stage_length(int s) const {
    int len = max_tokens;
    for (int k = 0; k < s; ++k) len = (len + 1) / 2;
    return len;
  }
  int stage_inputs(int s) const { return s == 0 ? embed_dim : channels[s - 1]; }
};

// Row-major patents x max_tokens bucket ids; -1 marks padding.
using TokenMatrix = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline int token_bucket(std::string_view token, int buckets) {
  return static_cast<int>(fnv1a64(token) % static_cast<std::uint64_t>(buckets));
}

inline std::vector<int> token_buckets(std::span<const std::string> tokens, const EncoderConfig& cfg) {
  std::vector<int> ids(static_cast<std::size_t>(cfg.max_tokens), -1);
  const std::size_t n = std::min(tokens.size(), ids.size());
  for (std::size_t p = 0; p < n; ++p) ids[p] = token_bucket(tokens[p], cfg.hash_buckets);
  return ids;
}

inline TokenMatrix token_matrix(const CorpusIndex& index, const EncoderConfig& cfg) {
  TokenMatrix m(index.num_patents(), cfg.max_tokens);
  for (int k = 0; k < index.num_patents(); ++k) {
    const auto ids = token_buckets(index.patent(k).tokens, cfg);
    for (int p = 0; p < cfg.max_tokens; ++p) m(k, p) = ids[static_cast<std::size_t>(p)];
  }
  return m;
}

template <typename Scalar>
struct EncoderParams {
  Matrix<Scalar> embedding;                  // hash_buckets x d0
  std::array<Matrix<Scalar>, 3> conv_weight;  // (window * c_in) x c_out, row = k * c_in + channel
  std::array<Vector<Scalar>, 3> conv_bias;    // c_out
  Matrix<Scalar> projection;                  // c_3 x d
  Vector<Scalar> projection_bias;             // d

  static EncoderParams zeros(const EncoderConfig& cfg) {
    EncoderParams p;
    p.embedding = Matrix<Scalar>::Zero(cfg.hash_buckets, cfg.embed_dim);
    for (int s = 0; s < 3; ++s) {
      p.conv_weight[s] = Matrix<Scalar>::Zero(cfg.windows[s] * cfg.stage_inputs(s), cfg.channels[s]);
      p.conv_bias[s] = Vector<Scalar>::Zero(cfg.channels[s]);
    }
    p.projection = Matrix<Scalar>::Zero(cfg.channels[2], cfg.output_dim);
    p.projection_bias = Vector<Scalar>::Zero(cfg.output_dim);
    return p;
  }
};

// Calls f(name, tensor_of_each_argument...) for every encoder tensor.
template <typename F, typename... P>
void visit_encoder_tensors(F&& f, P&... p) {
  f(std::string("encoder.embedding"), p.embedding...);
  for (int s = 0; s < 3; ++s) {
    const std::string stage = "encoder.conv" + std::to_string(s);
    f(stage + ".weight", p.conv_weight[s]...);
    f(stage + ".bias", p.conv_bias[s]...);
  }
  f(std::string("encoder.projection.weight"), p.projection...);
  f(std::string("encoder.projection.bias"), p.projection_bias...);
}

// Word vectors from a text file, one "token v_1 ... v_d0" per line, written
// into the embedding rows of the tokens' hash buckets. Buckets hit by several
// tokens receive their mean; other rows keep their values. Returns the number
// of vectors read. Throws IoError, ParseError or DimensionError.
template <typename Scalar>
int load_embedding_file(const std::filesystem::path& path, const EncoderConfig& cfg, EncoderParams<Scalar>& params);

// Activations kept by a forward pass for the matching backward pass.
template <typename Scalar>
struct EncoderTape {
  std::array<RowMatrix<Scalar>, 3> input;           // stage inputs; input[0] unused (token ids instead)
  std::array<RowMatrix<Scalar>, 3> act;             // post-ReLU conv outputs, (B * L_s) x C_s
  std::array<std::vector<std::uint8_t>, 3> argmax;  // per pooled element (row * C + c): 1 if the odd row won
  RowMatrix<Scalar> mean;                           // B x C_3
};

// Stage-0 lookup tables and accumulated encoder gradients for one pass over
// many patents. The first convolution is linear in the embeddings, so it is
// evaluated through per-offset tables embedding * W0_k instead of an im2col
// product; gradients land in the tables and are folded back in finish().
template <typename Scalar>
struct EncoderGradient {
  std::vector<RowMatrix<Scalar>> table;  // per window offset: hash_buckets x C_1
  std::array<Matrix<Scalar>, 3> conv_weight;
  std::array<Vector<Scalar>, 3> conv_bias;
  Matrix<Scalar> projection;
  Vector<Scalar> projection_bias;

  // Without tables the struct only carries the dense (non-embedding) parts.
  explicit EncoderGradient(const EncoderConfig& cfg, bool with_tables = true) {
    if (with_tables) {
      table.assign(static_cast<std::size_t>(cfg.windows[0]), RowMatrix<Scalar>::Zero(cfg.hash_buckets, cfg.channels[0]));
    }
    const auto z = EncoderParams<Scalar>::zeros(cfg);
    conv_weight = z.conv_weight;
    conv_bias = z.conv_bias;
    projection = z.projection;
    projection_bias = z.projection_bias;
  }

  void set_zero() {
    for (auto& t : table) t.setZero();
    for (int s = 0; s < 3; ++s) {
      conv_weight[s].setZero();
      conv_bias[s].setZero();
    }
    projection.setZero();
    projection_bias.setZero();
  }

  void add(const EncoderGradient& other) {
    for (std::size_t k = 0; k < std::min(table.size(), other.table.size()); ++k) table[k] += other.table[k];
    for (int s = 0; s < 3; ++s) {
      conv_weight[s] += other.conv_weight[s];
      conv_bias[s] += other.conv_bias[s];
    }
    projection += other.projection;
    projection_bias += other.projection_bias;
  }
};

template <typename Scalar>
class PatentEncoder {
 public:
  PatentEncoder(const EncoderConfig& cfg, const EncoderParams<Scalar>& params) : cfg_(cfg), params_(params) {
    const int d0 = cfg.embed_dim;
    for (int k = 0; k < cfg.windows[0]; ++k) {
      tables_.push_back(RowMatrix<Scalar>(params.embedding * params.conv_weight[0].middleRows(k * d0, d0)));
    }
  }

  const EncoderConfig& config() const { return cfg_; }

  // Encodes tokens.row(r) for r in rows; returns |rows| x output_dim.
  RowMatrix<Scalar> forward(const TokenMatrix& tokens, std::span<const int> rows, EncoderTape<Scalar>* tape) const {
    const Eigen::Index B = static_cast<Eigen::Index>(rows.size());
    EncoderTape<Scalar> local;
    EncoderTape<Scalar>& tp = tape ? *tape : local;

    // Stage 0 through the lookup tables.
    {
      const int L = cfg_.max_tokens, w = cfg_.windows[0], left = (w - 1) / 2;
      const Eigen::Index C = cfg_.channels[0];
      tp.act[0].resize(B * L, C);
      const Scalar* bias = params_.conv_bias[0].data();
      for (Eigen::Index b = 0; b < B; ++b) {
        const int* ids = tokens.row(rows[static_cast<std::size_t>(b)]).data();
        for (int p = 0; p < L; ++p) {
          Scalar* out = tp.act[0].row(b * L + p).data();
          std::copy(bias, bias + C, out);
          for (int k = 0; k < w; ++k) {
            const int q = p + k - left;
            if (q < 0 || q >= L || ids[q] < 0) continue;
            const Scalar* row = tables_[static_cast<std::size_t>(k)].row(ids[q]).data();
            for (Eigen::Index c = 0; c < C; ++c) out[c] += row[c];
          }
          for (Eigen::Index c = 0; c < C; ++c) out[c] = std::max(out[c], Scalar(0));
        }
      }
    }
    for (int s = 0; s < 3; ++s) {
      RowMatrix<Scalar> pooled = pool(tp.act[s], B, cfg_.stage_length(s), tp.argmax[s]);
      if (s == 2) {
        const int L3 = cfg_.stage_length(3);
        tp.mean.resize(B, cfg_.channels[2]);
        for (Eigen::Index b = 0; b < B; ++b) {
          tp.mean.row(b) = pooled.middleRows(b * L3, L3).colwise().sum() / Scalar(L3);
        }
        break;
      }
      const int next = s + 1;
      tp.input[next] = std::move(pooled);
      const RowMatrix<Scalar> cols = im2col(tp.input[next], B, cfg_.stage_length(next), cfg_.windows[next]);
      RowMatrix<Scalar> z = cols * params_.conv_weight[next];
      z.rowwise() += params_.conv_bias[next].transpose();
      tp.act[next] = z.cwiseMax(Scalar(0));
    }
    RowMatrix<Scalar> out = tp.mean * params_.projection;
    out.rowwise() += params_.projection_bias.transpose();
    return out;
  }

  // Accumulates the gradient of sum(d_out .* forward(...)) into grad, except
  // for the stage-0 tables: the gradient w.r.t. the stage-0 pre-activations
  // is returned and scatter_tokens() adds it to the tables.
  template <typename Derived>
  RowMatrix<Scalar> backward(const TokenMatrix& tokens, std::span<const int> rows, const EncoderTape<Scalar>& tp,
                             const Eigen::MatrixBase<Derived>& d_out, EncoderGradient<Scalar>& grad) const {
    (void)tokens;
    const Eigen::Index B = static_cast<Eigen::Index>(rows.size());
    grad.projection.noalias() += tp.mean.transpose() * d_out;
    grad.projection_bias += d_out.colwise().sum().transpose();
    const RowMatrix<Scalar> d_mean = d_out * params_.projection.transpose();

    const int L3 = cfg_.stage_length(3);
    RowMatrix<Scalar> d_pooled(B * L3, cfg_.channels[2]);
    for (Eigen::Index b = 0; b < B; ++b) {
      for (int q = 0; q < L3; ++q) d_pooled.row(b * L3 + q) = d_mean.row(b) / Scalar(L3);
    }

    for (int s = 2; s >= 0; --s) {
      const int L = cfg_.stage_length(s);
      const Eigen::Index C = cfg_.channels[s];
      const int Lp = (L + 1) / 2;
      RowMatrix<Scalar> dz = RowMatrix<Scalar>::Zero(B * L, C);
      const std::uint8_t* am = tp.argmax[s].data();
      for (Eigen::Index b = 0; b < B; ++b) {
        for (int q = 0; q < Lp; ++q) {
          const Eigen::Index r = b * Lp + q, r0 = b * L + 2 * q;
          const Scalar* g = d_pooled.row(r).data();
          const std::uint8_t* a = am + r * C;
          for (Eigen::Index c = 0; c < C; ++c) {
            const Eigen::Index src = r0 + a[c];
            if (tp.act[s](src, c) > Scalar(0)) dz(src, c) = g[c];
          }
        }
      }
      grad.conv_bias[s] += dz.colwise().sum().transpose();

      if (s > 0) {
        const int w = cfg_.windows[s];
        const RowMatrix<Scalar> cols = im2col(tp.input[s], B, L, w);
        grad.conv_weight[s].noalias() += cols.transpose() * dz;
        const RowMatrix<Scalar> d_cols = dz * params_.conv_weight[s].transpose();
        d_pooled = col2im(d_cols, B, L, w, cfg_.stage_inputs(s));
      } else {
        return dz;
      }
    }
    return {};
  }

  void scatter_tokens(const TokenMatrix& tokens, std::span<const int> rows, const RowMatrix<Scalar>& dz0,
                      EncoderGradient<Scalar>& grad) const {
    const Eigen::Index B = static_cast<Eigen::Index>(rows.size());
    const Eigen::Index C = dz0.cols();
    const int L = cfg_.max_tokens, w = cfg_.windows[0], left = (w - 1) / 2;
    for (Eigen::Index b = 0; b < B; ++b) {
      const int* ids = tokens.row(rows[static_cast<std::size_t>(b)]).data();
      for (int p = 0; p < L; ++p) {
        const Scalar* g = dz0.row(b * L + p).data();
        for (int k = 0; k < w; ++k) {
          const int q = p + k - left;
          if (q < 0 || q >= L || ids[q] < 0) continue;
          Scalar* t = grad.table[static_cast<std::size_t>(k)].row(ids[q]).data();
          for (Eigen::Index c = 0; c < C; ++c) t[c] += g[c];
        }
      }
    }
  }

  // Folds the stage-0 table gradients into embedding / conv0 gradients and
  // writes the complete parameter gradient (overwriting `out`).
  void finish(const EncoderGradient<Scalar>& grad, EncoderParams<Scalar>& out) const {
    const int d0 = cfg_.embed_dim;
    out.embedding = Matrix<Scalar>::Zero(cfg_.hash_buckets, d0);
    out.conv_weight = grad.conv_weight;
    for (int k = 0; k < cfg_.windows[0]; ++k) {
      const auto& dt = grad.table[static_cast<std::size_t>(k)];
      out.embedding.noalias() += dt * params_.conv_weight[0].middleRows(k * d0, d0).transpose();
      out.conv_weight[0].middleRows(k * d0, d0).noalias() += params_.embedding.transpose() * dt;
    }
    out.conv_bias = grad.conv_bias;
    out.projection = grad.projection;
    out.projection_bias = grad.projection_bias;
  }

 private:
  static RowMatrix<Scalar> pool(const RowMatrix<Scalar>& act, Eigen::Index B, int L, std::vector<std::uint8_t>& argmax) {
    const int Lp = (L + 1) / 2;
    const Eigen::Index C = act.cols();
    RowMatrix<Scalar> out(B * Lp, C);
    argmax.assign(static_cast<std::size_t>(B * Lp * C), 0);
    for (Eigen::Index b = 0; b < B; ++b) {
      for (int q = 0; q < Lp; ++q) {
        const Eigen::Index r0 = b * L + 2 * q;
        const Eigen::Index r = b * Lp + q;
        const Scalar* x0 = act.row(r0).data();
        Scalar* o = out.row(r).data();
        std::uint8_t* a = argmax.data() + r * C;
        if (2 * q + 1 < L) {
          const Scalar* x1 = act.row(r0 + 1).data();
          for (Eigen::Index c = 0; c < C; ++c) {
            const bool odd = x1[c] > x0[c];
            o[c] = odd ? x1[c] : x0[c];
            a[c] = odd;
          }
        } else {
          std::copy(x0, x0 + C, o);
        }
      }
    }
    return out;
  }

  static RowMatrix<Scalar> im2col(const RowMatrix<Scalar>& x, Eigen::Index B, int L, int w) {
    const Eigen::Index C = x.cols();
    const int left = (w - 1) / 2;
    RowMatrix<Scalar> cols = RowMatrix<Scalar>::Zero(B * L, w * C);
    for (Eigen::Index b = 0; b < B; ++b) {
      for (int p = 0; p < L; ++p) {
        for (int k = 0; k < w; ++k) {
          const int q = p + k - left;
          if (q >= 0 && q < L) cols.row(b * L + p).segment(k * C, C) = x.row(b * L + q);
        }
      }
    }
    return cols;
  }

  static RowMatrix<Scalar> col2im(const RowMatrix<Scalar>& cols, Eigen::Index B, int L, int w, Eigen::Index C) {
    const int left = (w - 1) / 2;
    RowMatrix<Scalar> x = RowMatrix<Scalar>::Zero(B * L, C);
    for (Eigen::Index b = 0; b < B; ++b) {
      for (int p = 0; p < L; ++p) {
        for (int k = 0; k < w; ++k) {
          const int q = p + k - left;
          if (q >= 0 && q < L) x.row(b * L + q) += cols.row(b * L + p).segment(k * C, C);
        }
      }
    }
    return x;
  }

  EncoderConfig cfg_;
  const EncoderParams<Scalar>& params_;
  std::vector<RowMatrix<Scalar>> tables_;
};

// Encoding of a single token sequence (padded / truncated to max_tokens).
template <typename Scalar>
Vector<Scalar> encode_patent(const EncoderConfig& cfg, const EncoderParams<Scalar>& params,
                             std::span<const std::string> tokens) {
  const auto ids = token_buckets(tokens, cfg);
  TokenMatrix m(1, cfg.max_tokens);
  for (int p = 0; p < cfg.max_tokens; ++p) m(0, p) = ids[static_cast<std::size_t>(p)];
  const int row = 0;
  return PatentEncoder<Scalar>(cfg, params).forward(m, std::span<const int>(&row, 1), nullptr).row(0).transpose();
}

enum class EntityKind : int { Company = 0, Technology = 1 };

// Patents pooled for one entity-year: min(samples, available) drawn without
// replacement from a stream keyed by (seed, kind, entity, year offset).
inline std::vector<int> sample_entity_year(const CorpusIndex& index, EntityKind kind, int entity, int t, int samples,
                                           std::uint64_t seed) {
  const auto pool = kind == EntityKind::Company ? index.company_year_t(entity, t) : index.tech_year_t(entity, t);
  Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(kind), static_cast<std::uint64_t>(entity),
                             static_cast<std::uint64_t>(t)}));
  return sample_without_replacement(pool, samples, rng);
}

// Mean encoding of the sampled patents; zero vector when the entity filed nothing.
template <typename Scalar>
Vector<Scalar> entity_year_vector(const EncoderConfig& cfg, const EncoderParams<Scalar>& params,
                                  const CorpusIndex& index, EntityKind kind, int entity, int year, std::uint64_t seed) {
  const auto chosen = sample_entity_year(index, kind, entity, index.year_offset(year), cfg.samples, seed);
  if (chosen.empty()) return Vector<Scalar>::Zero(cfg.output_dim);
  PatentEncoder<Scalar> enc(cfg, params);
  TokenMatrix m(static_cast<Eigen::Index>(chosen.size()), cfg.max_tokens);
  for (std::size_t r = 0; r < chosen.size(); ++r) {
    const auto ids = token_buckets(index.patent(chosen[r]).tokens, cfg);
    for (int p = 0; p < cfg.max_tokens; ++p) m(static_cast<Eigen::Index>(r), p) = ids[static_cast<std::size_t>(p)];
  }
  std::vector<int> rows(chosen.size());
  for (std::size_t r = 0; r < rows.size(); ++r) rows[r] = static_cast<int>(r);
  const RowMatrix<Scalar> e = enc.forward(m, rows, nullptr);
  return e.colwise().mean().transpose();
}

// x = a_self + sum_k weight_k * a_k. Throws DimensionError on size mismatch.
template <typename Scalar>
Vector<Scalar> relation_factor(const Vector<Scalar>& self, const std::vector<std::pair<double, Vector<Scalar>>>& related) {
  Vector<Scalar> out = self;
  for (const auto& [weight, v] : related) {
    if (v.size() != self.size()) throw DimensionError("relation vector size mismatch");
    out += Scalar(weight) * v;
  }
  return out;
}

// Company side: competitor weights from PCR.
template <typename Scalar>
Vector<Scalar> internal_factor(const Vector<Scalar>& self, const std::vector<std::pair<double, Vector<Scalar>>>& competitors) {
  return relation_factor(self, competitors);
}

// Technology side: raw collaboration weights from CTR.
template <typename Scalar>
Vector<Scalar> external_factor(const Vector<Scalar>& self, const std::vector<std::pair<double, Vector<Scalar>>>& collaborators) {
  return relation_factor(self, collaborators);
}

}  // namespace techtrace
