// Scalar-loop reference implementation of the matching network forward pass.
// Deliberately framework-free: plain nested std::vector loops, no Eigen, so it
// can serve as an independent oracle for the production kernels.
#ifndef DMN_TESTS_REFERENCE_DMN_HPP
#define DMN_TESTS_REFERENCE_DMN_HPP

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace refdmn {

using Mat = std::vector<std::vector<double>>;
using Vec = std::vector<double>;

inline Mat make_mat(std::size_t rows, std::size_t cols, double fill = 0.0) {
  return Mat(rows, std::vector<double>(cols, fill));
}

inline Mat matmul(const Mat& a, const Mat& b) {
  if (a.empty() || b.empty() || a[0].size() != b.size())
    throw std::invalid_argument("refdmn::matmul: shape mismatch");
  Mat c = make_mat(a.size(), b[0].size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t t = 0; t < b.size(); ++t)
      for (std::size_t j = 0; j < b[0].size(); ++j) c[i][j] += a[i][t] * b[t][j];
  return c;
}

inline Mat transpose(const Mat& a) {
  Mat t = make_mat(a[0].size(), a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a[0].size(); ++j) t[j][i] = a[i][j];
  return t;
}

inline Mat softmax_rows(const Mat& a) {
  Mat out = make_mat(a.size(), a[0].size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    double mx = a[i][0];
    for (double x : a[i]) mx = std::max(mx, x);
    double sum = 0.0;
    for (std::size_t j = 0; j < a[i].size(); ++j) {
      out[i][j] = std::exp(a[i][j] - mx);
      sum += out[i][j];
    }
    for (double& x : out[i]) x /= sum;
  }
  return out;
}

inline Mat relu(const Mat& a) {
  Mat out = a;
  for (auto& row : out)
    for (double& x : row) x = x > 0.0 ? x : 0.0;
  return out;
}

inline Mat sigmoid(const Mat& a) {
  Mat out = a;
  for (auto& row : out)
    for (double& x : row) x = 1.0 / (1.0 + std::exp(-x));
  return out;
}

inline Vec maxpool_over_rows(const Mat& a) {
  Vec out(a[0].size());
  for (std::size_t k = 0; k < a[0].size(); ++k) {
    double mx = a[0][k];
    for (std::size_t t = 1; t < a.size(); ++t) mx = std::max(mx, a[t][k]);
    out[k] = mx;
  }
  return out;
}

// One matching direction pair.  Computes the attended representations and the
// post-activation matchings:
//   dual:    E^u = rowsoftmax(Hu W Hv^T) Hv,  E^v = rowsoftmax(Hv W^T Hu^T) Hu
//   literal: G = rowsoftmax(Hu W Hv^T),  E^u = G Hv,  E^v = G^T Hu
//   S^u = ReLU(E^u W1),  S^v = ReLU(E^v W2)
struct RefPairParams {
  Mat w, w1, w2, w3, w4; // l x l
  Vec b;                 // l
};

struct RefMatchOut {
  Mat s_u, s_v;
};

inline RefMatchOut match_pair(const Mat& hu, const Mat& hv, const RefPairParams& pp,
                              bool dual, bool bidirectional) {
  RefMatchOut out;
  const Mat scores = matmul(matmul(hu, pp.w), transpose(hv));
  const Mat g_u = softmax_rows(scores);
  const Mat e_u = matmul(g_u, hv);
  out.s_u = relu(matmul(e_u, pp.w1));
  if (bidirectional) {
    Mat e_v;
    if (dual) {
      const Mat g_v = softmax_rows(transpose(scores));
      e_v = matmul(g_v, hu);
    } else {
      e_v = matmul(transpose(g_u), hu);
    }
    out.s_v = relu(matmul(e_v, pp.w2));
  }
  return out;
}

// Fusion of the two pooled matchings:
//   gated:  g = sigma(M^u W3 + M^v W4 + b),  out = g.*M^u + (1-g).*M^v
//   concat: out = [M^u ; M^v]
//   unidirectional: out = M^u
inline Vec fuse(const RefMatchOut& m, const RefPairParams& pp, bool gated, bool bidirectional) {
  const Vec mu = maxpool_over_rows(m.s_u);
  if (!bidirectional) return mu;
  const Vec mv = maxpool_over_rows(m.s_v);
  if (!gated) {
    Vec out = mu;
    out.insert(out.end(), mv.begin(), mv.end());
    return out;
  }
  const std::size_t l = mu.size();
  Vec out(l);
  for (std::size_t k = 0; k < l; ++k) {
    double pre = pp.b[k];
    for (std::size_t t = 0; t < l; ++t) pre += mu[t] * pp.w3[t][k] + mv[t] * pp.w4[t][k];
    const double g = 1.0 / (1.0 + std::exp(-pre));
    out[k] = g * mu[k] + (1.0 - g) * mv[k];
  }
  return out;
}

struct RefConfig {
  bool dual = true;
  bool bidirectional = true;
  bool gated = true;
  bool use_qa = true;
};

struct RefParams {
  RefPairParams pq, pa, qa;
  Vec v;
};

// C = [M^{pq} ; M^{pa} ; M^{qa}] for one (passage, question, answer) triplet.
inline Vec triplet(const Mat& hp, const Mat& hq, const Mat& ha, const RefParams& params,
                   const RefConfig& cfg) {
  auto one = [&](const Mat& u, const Mat& v, const RefPairParams& pp) {
    return fuse(match_pair(u, v, pp, cfg.dual, cfg.bidirectional), pp, cfg.gated,
                cfg.bidirectional);
  };
  Vec c = one(hp, hq, params.pq);
  const Vec pa = one(hp, ha, params.pa);
  c.insert(c.end(), pa.begin(), pa.end());
  if (cfg.use_qa) {
    const Vec qa = one(hq, ha, params.qa);
    c.insert(c.end(), qa.begin(), qa.end());
  }
  return c;
}

// probs_i = exp(V.C_i) / sum_j exp(V.C_j);  loss = -log probs[gold]
inline std::pair<Vec, double> score(const std::vector<Vec>& reps, const Vec& v, int gold) {
  Vec logits(reps.size());
  for (std::size_t i = 0; i < reps.size(); ++i) {
    if (reps[i].size() != v.size()) throw std::invalid_argument("refdmn::score: length mismatch");
    double dot = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) dot += v[k] * reps[i][k];
    logits[i] = dot;
  }
  double mx = logits[0];
  for (double x : logits) mx = std::max(mx, x);
  double sum = 0.0;
  Vec probs(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    probs[i] = std::exp(logits[i] - mx);
    sum += probs[i];
  }
  for (double& p : probs) p /= sum;
  return {probs, -std::log(probs[static_cast<std::size_t>(gold)])};
}

} // namespace refdmn

#endif
