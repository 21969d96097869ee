#include "techtrace/encoder.hpp"

#include <fstream>
#include <sstream>

namespace techtrace {

template <typename Scalar>
int load_embedding_file(const std::filesystem::path& path, const EncoderConfig& cfg, EncoderParams<Scalar>& params) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read embedding file " + path.string());
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(cfg.hash_buckets, cfg.embed_dim);
  Eigen::VectorXi hits = Eigen::VectorXi::Zero(cfg.hash_buckets);
  std::string line;
  long n = 0;
  int loaded = 0;
  while (std::getline(in, line)) {
    ++n;
    std::istringstream fields(line);
    std::string token;
    if (!(fields >> token)) continue;
    std::vector<double> v;
    double x = 0;
    while (fields >> x) v.push_back(x);
    if (!fields.eof()) throw ParseError("embedding", "non-numeric vector entry", n);
    if (static_cast<int>(v.size()) != cfg.embed_dim) {
      throw DimensionError("embedding file line " + std::to_string(n) + ": expected " + std::to_string(cfg.embed_dim) +
                           " numbers, got " + std::to_string(v.size()));
    }
    // Tokens are lowercased on ingest, so the vocabulary is too.
    std::string key;
    for (const auto& t : tokenize(token)) key += t;
    const int b = token_bucket(key, cfg.hash_buckets);
    sum.row(b) += Eigen::Map<const Eigen::RowVectorXd>(v.data(), cfg.embed_dim);
    ++hits(b);
    ++loaded;
  }
  for (int b = 0; b < cfg.hash_buckets; ++b) {
    if (hits(b) > 0) params.embedding.row(b) = (sum.row(b) / hits(b)).template cast<Scalar>();
  }
  return loaded;
}

template int load_embedding_file<double>(const std::filesystem::path&, const EncoderConfig&, EncoderParams<double>&);
template int load_embedding_file<float>(const std::filesystem::path&, const EncoderConfig&, EncoderParams<float>&);

}  // namespace techtrace
