#pragma once

#include <Eigen/SparseCore>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <type_traits>
#include <vector>

#include "techtrace/adadelta.hpp"
#include "techtrace/corpus.hpp"
#include "techtrace/encoder.hpp"
#include "techtrace/error.hpp"
#include "techtrace/gru.hpp"
#include "techtrace/linalg.hpp"
#include "techtrace/parallel.hpp"
#include "techtrace/pcr.hpp"
#include "techtrace/random.hpp"

namespace techtrace {

struct DttConfig {
  EncoderConfig encoder;
  PcrOptions pcr;
  int ctr_n = 5;
  bool use_pcr = true;  // false: company factors ignore competitors
  bool use_ctr = true;  // false: technology factors ignore collaborators
  bool gru_bias = false;
  int epochs = 50;
  int triples_per_company = 20;
  double lambda = 1e-4;
  AdadeltaOptions adadelta;
  // Uniform: every tensor uniform in [-init_scale, init_scale].
  // Scaled: weights uniform in +-sqrt(6 / (fan_in + fan_out)), biases zero.
  enum class Init { Uniform, Scaled } init = Init::Uniform;
  double init_scale = 0.1;
  std::uint64_t seed = 11;           // parameter initialization
  std::uint64_t sampling_seed = 12;  // patent sampling per entity-year
  std::uint64_t triple_seed = 13;    // training triples
  bool freeze_samples = false;       // reuse epoch 0's patent samples every epoch
  int threads = 1;
  int chunk_size = 64;  // patents per encoder work item

  void validate() const;
};

// ---------------------------------------------------------------------------
// Parameters

template <typename Scalar>
struct DttParams {
  EncoderParams<Scalar> encoder;
  GruParams<Scalar> company;
  GruParams<Scalar> technology;

  static DttParams zeros(const DttConfig& cfg) {
    return {EncoderParams<Scalar>::zeros(cfg.encoder), GruParams<Scalar>::zeros(cfg.encoder.output_dim, cfg.gru_bias),
            GruParams<Scalar>::zeros(cfg.encoder.output_dim, cfg.gru_bias)};
  }
};

template <typename F, typename... P>
void visit_dtt_tensors(F&& f, P&... p) {
  visit_encoder_tensors(f, p.encoder...);
  visit_gru_tensors(f, "company_gru", p.company...);
  visit_gru_tensors(f, "tech_gru", p.technology...);
}

struct DttTensorVisitor {
  template <typename F, typename... P>
  void operator()(F&& f, P&... p) const {
    visit_dtt_tensors(f, p...);
  }
};

inline bool is_bias_tensor(const std::string& name) {
  return name.ends_with(".bias") || name.find(".b_") != std::string::npos;
}

// Draws every tensor in visiting order from one stream seeded by cfg.seed.
template <typename Scalar>
DttParams<Scalar> init_params(const DttConfig& cfg) {
  DttParams<Scalar> p = DttParams<Scalar>::zeros(cfg);
  Rng rng(cfg.seed);
  visit_dtt_tensors(
      [&](const std::string& name, auto& t) {
        double limit = cfg.init_scale;
        if (cfg.init == DttConfig::Init::Scaled) {
          if (is_bias_tensor(name)) return;
          const double fan_in = name == "encoder.embedding" ? 1.0 : double(t.rows());
          limit = std::sqrt(6.0 / (fan_in + double(t.cols())));
        }
        for (Eigen::Index k = 0; k < t.size(); ++k) {
          t.data()[k] = static_cast<Scalar>(uniform(rng, -limit, limit));
        }
      },
      p);
  return p;
}

template <typename Scalar>
Scalar squared_norm(const DttParams<Scalar>& p) {
  Scalar s = 0;
  visit_dtt_tensors([&](const std::string&, const auto& t) { s += t.squaredNorm(); }, p);
  return s;
}

template <typename Scalar>
Eigen::Index parameter_count(const DttParams<Scalar>& p) {
  Eigen::Index n = 0;
  visit_dtt_tensors([&](const std::string&, const auto& t) { n += t.size(); }, p);
  return n;
}

// Name of the first tensor holding a non-finite value, or empty.
template <typename Scalar>
std::string first_non_finite(const DttParams<Scalar>& p) {
  std::string bad;
  visit_dtt_tensors(
      [&](const std::string& name, const auto& t) {
        if (bad.empty() && !t.allFinite()) bad = name;
      },
      p);
  return bad;
}

// ---------------------------------------------------------------------------
// Parameter-independent inputs

struct TrainingTriple {
  friend bool operator==(const TrainingTriple&, const TrainingTriple&) = default;
  int company = 0;
  int positive = 0;
  int negative = 0;
};

// Per company with a non-constant target row: `per_company` draws with the
// positive technology drawn proportionally to the target value and the
// negative uniform among technologies with strictly smaller value.
std::vector<TrainingTriple> sample_triples(const Eigen::MatrixXd& target, int per_company, std::uint64_t seed);

using SparseRows = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// Relation operators for a window of input years. competitors[y] is M x M
// with row i holding the normalized PCR weights of i's top-m competitors;
// collaborators[y] is N x N with row j holding the raw CTR weights of j's
// top-n collaborators. Either list is all-zero when the relation is disabled.
struct RelationWindow {
  std::vector<int> years;
  std::vector<SparseRows> competitors;
  std::vector<SparseRows> collaborators;
};

RelationWindow build_relations(const CorpusIndex& index, const std::vector<int>& years, const DttConfig& cfg);

// Patents sampled for every entity-year of a window. company_pool[y] (M x P)
// and tech_pool[y] (N x P) average the encodings of `patents` into pooled
// entity vectors; rows of entities without filings are empty.
struct SamplePlan {
  std::vector<int> patents;
  std::vector<SparseRows> company_pool;
  std::vector<SparseRows> tech_pool;
};

SamplePlan plan_samples(const CorpusIndex& index, const std::vector<int>& years, int samples, std::uint64_t seed);

// Seed passed to plan_samples for a training epoch / for forecasting.
std::uint64_t epoch_sampling_seed(const DttConfig& cfg, int epoch);
std::uint64_t forecast_sampling_seed(const DttConfig& cfg);

// ---------------------------------------------------------------------------
// Prediction and loss

template <typename Scalar>
Scalar predict(const Vector<Scalar>& u, const Vector<Scalar>& v) {
  if (u.size() != v.size()) throw DimensionError("predict expects vectors of equal size");
  return sigmoid(u.dot(v));
}

// -ln sigmoid(pos - neg) for one triple.
template <typename Scalar>
Scalar bpr_term(Scalar pos, Scalar neg) {
  return softplus(neg - pos);
}

// Mean over triples of -ln sigmoid(r+ - r-) with r = sigmoid(u . v), plus
// lambda * param_sq_norm. Rows of U are companies, rows of V technologies.
template <typename Scalar>
Scalar bpr_loss(const Matrix<Scalar>& U, const Matrix<Scalar>& V, const std::vector<TrainingTriple>& triples,
                Scalar lambda, Scalar param_sq_norm) {
  Scalar sum = 0;
  for (const auto& tr : triples) {
    const Scalar pos = sigmoid(U.row(tr.company).dot(V.row(tr.positive)));
    const Scalar neg = sigmoid(U.row(tr.company).dot(V.row(tr.negative)));
    sum += bpr_term(pos, neg);
  }
  const Scalar data = triples.empty() ? Scalar(0) : sum / Scalar(triples.size());
  return data + lambda * param_sq_norm;
}

template <typename Scalar>
struct YearlyFactors {
  std::vector<int> years;
  std::vector<Matrix<Scalar>> company_pooled;    // a_i^t, M x d per year
  std::vector<Matrix<Scalar>> tech_pooled;       // a_j^t, N x d per year
  std::vector<Matrix<Scalar>> company_internal;  // x_i^t
  std::vector<Matrix<Scalar>> tech_external;     // y_j^t
};

// One fixed training problem: a window, its relations, a sample plan and a
// set of triples. Evaluates the objective and its exact gradient.
template <typename Scalar>
class DttObjective {
 public:
  DttObjective(const DttConfig& cfg, const TokenMatrix& tokens, const RelationWindow& relations,
               const SamplePlan& plan, std::vector<TrainingTriple> triples)
      : cfg_(cfg), tokens_(tokens), relations_(relations), plan_(plan), triples_(std::move(triples)) {
    for (const auto& m : relations_.competitors) competitors_.push_back(m.cast<Scalar>());
    for (const auto& m : relations_.collaborators) collaborators_.push_back(m.cast<Scalar>());
    for (const auto& m : plan_.company_pool) company_pool_.push_back(m.cast<Scalar>());
    for (const auto& m : plan_.tech_pool) tech_pool_.push_back(m.cast<Scalar>());
  }

  const std::vector<TrainingTriple>& triples() const { return triples_; }

  struct Forward {
    RowMatrix<Scalar> encodings;  // |plan.patents| x d
    std::vector<EncoderTape<Scalar>> tapes;
    YearlyFactors<Scalar> factors;
    GruTape<Scalar> company_tape, tech_tape;
    Matrix<Scalar> company_state;  // u^T, M x d
    Matrix<Scalar> tech_state;     // v^T, N x d
  };

  Forward forward(const DttParams<Scalar>& params, bool keep_tape) const {
    Forward fw;
    const int d = cfg_.encoder.output_dim;
    const PatentEncoder<Scalar> enc(cfg_.encoder, params.encoder);
    const int P = static_cast<int>(plan_.patents.size());
    const int chunks = (P + cfg_.chunk_size - 1) / cfg_.chunk_size;
    fw.encodings.resize(P, d);
    if (keep_tape) fw.tapes.resize(static_cast<std::size_t>(chunks));
    parallel_for(chunks, cfg_.threads, [&](int c) {
      const int begin = c * cfg_.chunk_size;
      const int len = std::min(cfg_.chunk_size, P - begin);
      const std::span<const int> rows(plan_.patents.data() + begin, static_cast<std::size_t>(len));
      fw.encodings.middleRows(begin, len) = enc.forward(tokens_, rows, keep_tape ? &fw.tapes[c] : nullptr);
    });

    auto& f = fw.factors;
    f.years = relations_.years;
    for (std::size_t y = 0; y < relations_.years.size(); ++y) {
      Matrix<Scalar> a_c = company_pool_[y] * fw.encodings;
      Matrix<Scalar> a_t = tech_pool_[y] * fw.encodings;
      Matrix<Scalar> x = a_c + competitors_[y] * a_c;
      Matrix<Scalar> yv = a_t + collaborators_[y] * a_t;
      f.company_pooled.push_back(std::move(a_c));
      f.tech_pooled.push_back(std::move(a_t));
      f.company_internal.push_back(std::move(x));
      f.tech_external.push_back(std::move(yv));
    }
    fw.company_state = gru_unroll(params.company, f.company_internal, keep_tape ? &fw.company_tape : nullptr);
    fw.tech_state = gru_unroll(params.technology, f.tech_external, keep_tape ? &fw.tech_tape : nullptr);
    return fw;
  }

  Scalar loss(const DttParams<Scalar>& params) const {
    const Forward fw = forward(params, false);
    return bpr_loss(fw.company_state, fw.tech_state, triples_, Scalar(cfg_.lambda), squared_norm(params));
  }

  // Returns the loss; overwrites grad with its gradient.
  Scalar loss_and_gradient(const DttParams<Scalar>& params, DttParams<Scalar>& grad) const {
    const Forward fw = forward(params, true);
    const Matrix<Scalar>& U = fw.company_state;
    const Matrix<Scalar>& V = fw.tech_state;
    const Scalar lambda(cfg_.lambda);
    const Scalar loss = bpr_loss(U, V, triples_, lambda, squared_norm(params));

    Matrix<Scalar> dU = Matrix<Scalar>::Zero(U.rows(), U.cols());
    Matrix<Scalar> dV = Matrix<Scalar>::Zero(V.rows(), V.cols());
    if (!triples_.empty()) {
      const Scalar inv = Scalar(1) / Scalar(triples_.size());
      for (const auto& tr : triples_) {
        const Scalar pos = sigmoid(U.row(tr.company).dot(V.row(tr.positive)));
        const Scalar neg = sigmoid(U.row(tr.company).dot(V.row(tr.negative)));
        // d/d margin of softplus(-margin) = -sigmoid(-margin)
        const Scalar g = -sigmoid(neg - pos) * inv;
        const Scalar gp = g * pos * (Scalar(1) - pos);
        const Scalar gn = -g * neg * (Scalar(1) - neg);
        dU.row(tr.company) += gp * V.row(tr.positive) + gn * V.row(tr.negative);
        dV.row(tr.positive) += gp * U.row(tr.company);
        dV.row(tr.negative) += gn * U.row(tr.company);
      }
    }

    grad = DttParams<Scalar>::zeros(cfg_);
    const auto dX = gru_backward(params.company, fw.company_tape, dU, grad.company);
    const auto dY = gru_backward(params.technology, fw.tech_tape, dV, grad.technology);

    RowMatrix<Scalar> dE = RowMatrix<Scalar>::Zero(fw.encodings.rows(), fw.encodings.cols());
    for (std::size_t y = 0; y < dX.size(); ++y) {
      const Matrix<Scalar> da_c = dX[y] + competitors_[y].transpose() * dX[y];
      const Matrix<Scalar> da_t = dY[y] + collaborators_[y].transpose() * dY[y];
      dE += company_pool_[y].transpose() * da_c;
      dE += tech_pool_[y].transpose() * da_t;
    }
    encoder_backward(params, fw, dE, grad.encoder);

    visit_dtt_tensors([&](const std::string&, auto& g, const auto& p) { g += (Scalar(2) * lambda) * p; }, grad,
                      params);
    return loss;
  }

 private:
  void encoder_backward(const DttParams<Scalar>& params, const Forward& fw, const RowMatrix<Scalar>& dE,
                        EncoderParams<Scalar>& out) const {
    const PatentEncoder<Scalar> enc(cfg_.encoder, params.encoder);
    const int P = static_cast<int>(plan_.patents.size());
    const int chunks = static_cast<int>(fw.tapes.size());
    EncoderGradient<Scalar> total(cfg_.encoder, true);
    const int wave = std::max(1, cfg_.threads);
    std::vector<EncoderGradient<Scalar>> partial(static_cast<std::size_t>(wave), EncoderGradient<Scalar>(cfg_.encoder, false));
    std::vector<RowMatrix<Scalar>> dz0(static_cast<std::size_t>(wave));
    // Partials are merged in chunk order, so the sum does not depend on the thread count.
    for (int first = 0; first < chunks; first += wave) {
      const int n = std::min(wave, chunks - first);
      parallel_for(n, cfg_.threads, [&](int w) {
        const int c = first + w;
        const int begin = c * cfg_.chunk_size;
        const int len = std::min(cfg_.chunk_size, P - begin);
        const std::span<const int> rows(plan_.patents.data() + begin, static_cast<std::size_t>(len));
        partial[w].set_zero();
        dz0[w] = enc.backward(tokens_, rows, fw.tapes[c], dE.middleRows(begin, len), partial[w]);
      });
      for (int w = 0; w < n; ++w) {
        const int c = first + w;
        const int begin = c * cfg_.chunk_size;
        const int len = std::min(cfg_.chunk_size, P - begin);
        const std::span<const int> rows(plan_.patents.data() + begin, static_cast<std::size_t>(len));
        total.add(partial[w]);
        enc.scatter_tokens(tokens_, rows, dz0[w], total);
      }
    }
    enc.finish(total, out);
  }

  const DttConfig& cfg_;
  const TokenMatrix& tokens_;
  const RelationWindow& relations_;
  const SamplePlan& plan_;
  std::vector<TrainingTriple> triples_;
  std::vector<Eigen::SparseMatrix<Scalar, Eigen::RowMajor>> competitors_, collaborators_, company_pool_, tech_pool_;
};

// ---------------------------------------------------------------------------
// Model, training and forecasting

template <typename Scalar>
class DttModel {
 public:
  using Optimizer = Adadelta<DttParams<Scalar>, DttTensorVisitor>;

  explicit DttModel(DttConfig cfg)
      : cfg_((cfg.validate(), cfg)),
        params_(init_params<Scalar>(cfg_)),
        optimizer_(cfg_.adadelta, DttParams<Scalar>::zeros(cfg_), DttTensorVisitor{}) {}

  const DttConfig& config() const { return cfg_; }
  DttConfig& mutable_config() { return cfg_; }
  const DttParams<Scalar>& params() const { return params_; }
  DttParams<Scalar>& params() { return params_; }
  Optimizer& optimizer() { return optimizer_; }
  const Optimizer& optimizer() const { return optimizer_; }

  const std::vector<double>& loss_history() const { return loss_history_; }
  std::vector<double>& loss_history() { return loss_history_; }
  int epochs_trained() const { return static_cast<int>(loss_history_.size()); }
  bool trained() const { return !loss_history_.empty(); }
  // Number of input years per window, fixed by the first training call.
  int window_length() const { return window_length_; }
  void set_window_length(int n) { window_length_ = n; }

 private:
  DttConfig cfg_;
  DttParams<Scalar> params_;
  Optimizer optimizer_;
  std::vector<double> loss_history_;
  int window_length_ = 0;
};

inline std::vector<int> year_range(int first, int last) {
  std::vector<int> years;
  for (int y = first; y <= last; ++y) years.push_back(y);
  return years;
}

// Runs config().epochs epochs of full-batch Adadelta on the window
// `input_years` with targets from `target_year`. Each epoch resamples
// patents (unless freeze_samples) and triples, records the pre-step loss and
// aborts with NumericalError naming the tensor if anything becomes non-finite.
template <typename Scalar>
void train(DttModel<Scalar>& model, const CorpusIndex& index, const std::vector<int>& input_years, int target_year,
           const std::function<void(int, double)>& on_epoch = {});

// sigmoid(u_i . v_j) for every company / technology from the window ending
// in the last input year (M x N). Throws StateError for an untrained model.
template <typename Scalar>
Eigen::MatrixXd forecast_scores(const DttModel<Scalar>& model, const CorpusIndex& index,
                                const std::vector<int>& input_years);

// Pooled and relation-enhanced factors for a window (no gradients).
template <typename Scalar>
YearlyFactors<Scalar> compute_factors(const DttModel<Scalar>& model, const CorpusIndex& index,
                                      const std::vector<int>& input_years, std::uint64_t sampling_seed);

// Model directory: manifest.json (config, dims, seeds, scalar type, loss
// history, config hash), params.bin and optimizer.bin (raw little-endian
// tensors in visiting order).
template <typename Scalar>
void save_model(const DttModel<Scalar>& model, const std::filesystem::path& dir);
template <typename Scalar>
DttModel<Scalar> load_model(const std::filesystem::path& dir);
// "float64" or "float32".
std::string model_scalar_type(const std::filesystem::path& dir);

std::string config_hash(const DttConfig& cfg);

extern template void train<double>(DttModel<double>&, const CorpusIndex&, const std::vector<int>&, int,
                                   const std::function<void(int, double)>&);
extern template void train<float>(DttModel<float>&, const CorpusIndex&, const std::vector<int>&, int,
                                  const std::function<void(int, double)>&);
extern template Eigen::MatrixXd forecast_scores<double>(const DttModel<double>&, const CorpusIndex&,
                                                        const std::vector<int>&);
extern template Eigen::MatrixXd forecast_scores<float>(const DttModel<float>&, const CorpusIndex&,
                                                       const std::vector<int>&);
extern template YearlyFactors<double> compute_factors<double>(const DttModel<double>&, const CorpusIndex&,
                                                              const std::vector<int>&, std::uint64_t);
extern template YearlyFactors<float> compute_factors<float>(const DttModel<float>&, const CorpusIndex&,
                                                            const std::vector<int>&, std::uint64_t);
extern template void save_model<double>(const DttModel<double>&, const std::filesystem::path&);
extern template void save_model<float>(const DttModel<float>&, const std::filesystem::path&);
extern template DttModel<double> load_model<double>(const std::filesystem::path&);
extern template DttModel<float> load_model<float>(const std::filesystem::path&);

}  // namespace techtrace
