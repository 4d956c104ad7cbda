#include "dmn/matching.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace dmn;
using testutil::random_matrix;

namespace {

PairParameters random_pair(int hidden, std::mt19937_64& rng) {
  PairParameters pp;
  pp.w = random_matrix(hidden, hidden, rng);
  pp.w1 = random_matrix(hidden, hidden, rng);
  pp.w2 = random_matrix(hidden, hidden, rng);
  pp.w3 = random_matrix(hidden, hidden, rng);
  pp.w4 = random_matrix(hidden, hidden, rng);
  pp.b = random_matrix(1, hidden, rng);
  return pp;
}

refdmn::RefPairParams to_ref(const PairParameters& pp) {
  refdmn::RefPairParams out;
  out.w = testutil::to_ref(pp.w);
  out.w1 = testutil::to_ref(pp.w1);
  out.w2 = testutil::to_ref(pp.w2);
  out.w3 = testutil::to_ref(pp.w3);
  out.w4 = testutil::to_ref(pp.w4);
  out.b = testutil::to_ref_vec(pp.b);
  return out;
}

} // namespace

TEST_CASE("bidirectional_match forward") {
  std::mt19937_64 rng(101);
  MatchConfig cfg; // dual, bidirectional, gated, qa on, dropout 0.3 (off at eval)

  SUBCASE("single-token sequences: attention weight is exactly 1") {
    for (const AttentionNorm mode : {AttentionNorm::dual, AttentionNorm::literal}) {
      cfg.attention = mode;
      Tape t;
      const Matrix hu = random_matrix(1, 3, rng);
      const Matrix hv = random_matrix(1, 3, rng);
      const PairParameters pp = random_pair(3, rng);
      const PairVars vars = bind_pair(t, pp);
      const MatchHalf m = bidirectional_match(t, t.input(hu), t.input(hv), vars, cfg,
                                              DropoutMode::eval, nullptr);
      CHECK(t.value(m.attn_u)(0, 0) == 1.0);
      CHECK(t.value(m.e_u).isApprox(hv, 0.0));
      CHECK(t.value(m.e_v).isApprox(hu, 0.0));
    }
  }

  SUBCASE("identical rows of Hv make every row of E^u that row") {
    Tape t;
    const Matrix hu = random_matrix(4, 3, rng);
    Matrix hv(5, 3);
    const Matrix r = random_matrix(1, 3, rng);
    for (Index i = 0; i < 5; ++i) hv.row(i) = r;
    const PairParameters pp = random_pair(3, rng);
    const PairVars vars = bind_pair(t, pp);
    const MatchHalf m =
        bidirectional_match(t, t.input(hu), t.input(hv), vars, cfg, DropoutMode::eval, nullptr);
    for (Index i = 0; i < 4; ++i)
      CHECK((t.value(m.e_u).row(i) - r).cwiseAbs().maxCoeff() <= 1e-12);
  }

  SUBCASE("random 3x2 vs 4x2 matches the scalar-loop oracle in both modes") {
    for (const AttentionNorm mode : {AttentionNorm::dual, AttentionNorm::literal}) {
      cfg.attention = mode;
      Tape t;
      const Matrix hu = random_matrix(3, 2, rng);
      const Matrix hv = random_matrix(4, 2, rng);
      const PairParameters pp = random_pair(2, rng);
      const PairVars vars = bind_pair(t, pp);
      const MatchHalf m =
          bidirectional_match(t, t.input(hu), t.input(hv), vars, cfg, DropoutMode::eval, nullptr);
      const refdmn::RefMatchOut ref = refdmn::match_pair(
          testutil::to_ref(hu), testutil::to_ref(hv), to_ref(pp), mode == AttentionNorm::dual, true);
      CHECK(testutil::max_abs_diff(t.value(m.s_u), ref.s_u) <= 1e-12);
      CHECK(testutil::max_abs_diff(t.value(m.s_v), ref.s_v) <= 1e-12);
    }
  }

  SUBCASE("hidden-size mismatch is rejected") {
    Tape t;
    const PairParameters pp = random_pair(3, rng);
    const PairVars vars = bind_pair(t, pp);
    const Var hu = t.input(random_matrix(2, 3, rng));
    const Var hv = t.input(random_matrix(2, 4, rng));
    CHECK_THROWS_AS(bidirectional_match(t, hu, hv, vars, cfg, DropoutMode::eval, nullptr),
                    std::invalid_argument);
  }

  SUBCASE("unidirectional mode returns no S^v") {
    cfg.direction = MatchDirection::unidirectional;
    Tape t;
    const PairParameters pp = random_pair(3, rng);
    const PairVars vars = bind_pair(t, pp);
    const MatchHalf m = bidirectional_match(t, t.input(random_matrix(2, 3, rng)),
                                            t.input(random_matrix(3, 3, rng)), vars, cfg,
                                            DropoutMode::eval, nullptr);
    CHECK(m.s_u.valid());
    CHECK_FALSE(m.s_v.valid());
  }

  SUBCASE("S matrices are entrywise nonnegative") {
    Tape t;
    const PairParameters pp = random_pair(4, rng);
    const PairVars vars = bind_pair(t, pp);
    const MatchHalf m = bidirectional_match(t, t.input(random_matrix(5, 4, rng)),
                                            t.input(random_matrix(6, 4, rng)), vars, cfg,
                                            DropoutMode::eval, nullptr);
    CHECK((t.value(m.s_u).array() >= 0.0).all());
    CHECK((t.value(m.s_v).array() >= 0.0).all());
  }
}

TEST_CASE("attention rows are convex weights") {
  std::mt19937_64 rng(103);
  MatchConfig cfg;
  for (const AttentionNorm mode : {AttentionNorm::dual, AttentionNorm::literal}) {
    cfg.attention = mode;
    Tape t;
    const Matrix hu = random_matrix(5, 3, rng);
    const Matrix hv = random_matrix(4, 3, rng);
    const PairParameters pp = random_pair(3, rng);
    const PairVars vars = bind_pair(t, pp);
    const MatchHalf m =
        bidirectional_match(t, t.input(hu), t.input(hv), vars, cfg, DropoutMode::eval, nullptr);

    // Every row of E^u lies coordinate-wise inside the span of Hv's rows.
    for (Index i = 0; i < hu.rows(); ++i)
      for (Index k = 0; k < 3; ++k) {
        CHECK(t.value(m.e_u)(i, k) <= hv.col(k).maxCoeff() + 1e-12);
        CHECK(t.value(m.e_u)(i, k) >= hv.col(k).minCoeff() - 1e-12);
      }
    if (mode == AttentionNorm::dual)
      for (Index i = 0; i < hv.rows(); ++i)
        for (Index k = 0; k < 3; ++k) {
          CHECK(t.value(m.e_v)(i, k) <= hu.col(k).maxCoeff() + 1e-12);
          CHECK(t.value(m.e_v)(i, k) >= hu.col(k).minCoeff() - 1e-12);
        }
  }
}

TEST_CASE("dual-mode swap symmetry") {
  std::mt19937_64 rng(107);
  MatchConfig cfg;
  cfg.attention = AttentionNorm::dual;

  const Matrix hu = random_matrix(3, 4, rng);
  const Matrix hv = random_matrix(5, 4, rng);
  PairParameters pp = random_pair(4, rng);

  Tape t1;
  const MatchHalf fwd = bidirectional_match(t1, t1.input(hu), t1.input(hv), bind_pair(t1, pp),
                                            cfg, DropoutMode::eval, nullptr);

  PairParameters swapped = pp;
  swapped.w = pp.w.transpose();
  std::swap(swapped.w1, swapped.w2);
  Tape t2;
  const MatchHalf rev = bidirectional_match(t2, t2.input(hv), t2.input(hu),
                                            bind_pair(t2, swapped), cfg, DropoutMode::eval,
                                            nullptr);

  CHECK((t1.value(fwd.s_u) - t2.value(rev.s_v)).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((t1.value(fwd.s_v) - t2.value(rev.s_u)).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("gated_fuse") {
  std::mt19937_64 rng(109);
  MatchConfig cfg;

  SUBCASE("neutral gate averages the two pooled vectors") {
    Tape t;
    PairParameters pp = random_pair(3, rng);
    pp.w3.setZero();
    pp.w4.setZero();
    pp.b.setZero();
    const PairVars vars = bind_pair(t, pp);
    const Var s_u = t.input(random_matrix(4, 3, rng));
    const Var s_v = t.input(random_matrix(2, 3, rng));
    const FuseOut out = gated_fuse(t, s_u, s_v, vars, cfg);
    const Matrix expected = 0.5 * (t.value(out.m_u) + t.value(out.m_v));
    CHECK((t.value(out.gate).array() == 0.5).all());
    CHECK((t.value(out.fused) - expected).cwiseAbs().maxCoeff() <= 1e-12);
  }

  SUBCASE("saturated gate passes M^u through") {
    Tape t;
    PairParameters pp = random_pair(3, rng);
    pp.w3.setZero();
    pp.w4.setZero();
    pp.b = Matrix::Constant(1, 3, 50.0);
    const PairVars vars = bind_pair(t, pp);
    const Var s_u = t.input(random_matrix(4, 3, rng));
    const Var s_v = t.input(random_matrix(2, 3, rng));
    const FuseOut out = gated_fuse(t, s_u, s_v, vars, cfg);
    CHECK((t.value(out.fused) - t.value(out.m_u)).cwiseAbs().maxCoeff() <= 1e-12);
  }

  SUBCASE("random inputs match the scalar-loop oracle to 1e-12") {
    Tape t;
    const PairParameters pp = random_pair(3, rng);
    const PairVars vars = bind_pair(t, pp);
    const Matrix su = random_matrix(4, 3, rng);
    const Matrix sv = random_matrix(5, 3, rng);
    const FuseOut out = gated_fuse(t, t.input(su), t.input(sv), vars, cfg);
    refdmn::RefMatchOut ref_m;
    ref_m.s_u = testutil::to_ref(su);
    ref_m.s_v = testutil::to_ref(sv);
    const refdmn::Vec expected = refdmn::fuse(ref_m, to_ref(pp), true, true);
    CHECK(testutil::max_abs_diff_vec(t.value(out.fused), expected) <= 1e-12);
  }

  SUBCASE("gate strictly inside (0,1) and output inside the pooled interval") {
    Tape t;
    const PairParameters pp = random_pair(4, rng);
    const PairVars vars = bind_pair(t, pp);
    const FuseOut out = gated_fuse(t, t.input(random_matrix(3, 4, rng)),
                                   t.input(random_matrix(5, 4, rng)), vars, cfg);
    for (Index k = 0; k < 4; ++k) {
      const double g = t.value(out.gate)(0, k);
      CHECK(g > 0.0);
      CHECK(g < 1.0);
      const double lo = std::min(t.value(out.m_u)(0, k), t.value(out.m_v)(0, k));
      const double hi = std::max(t.value(out.m_u)(0, k), t.value(out.m_v)(0, k));
      CHECK(t.value(out.fused)(0, k) >= lo - 1e-12);
      CHECK(t.value(out.fused)(0, k) <= hi + 1e-12);
    }
  }

  SUBCASE("concat fusion stacks the pooled vectors") {
    cfg.fusion = FusionKind::concat;
    Tape t;
    const PairParameters pp = random_pair(3, rng);
    const PairVars vars = bind_pair(t, pp);
    const Matrix su = random_matrix(4, 3, rng);
    const Matrix sv = random_matrix(2, 3, rng);
    const FuseOut out = gated_fuse(t, t.input(su), t.input(sv), vars, cfg);
    CHECK(t.value(out.fused).cols() == 6);
    CHECK(t.value(out.fused).leftCols(3).isApprox(t.value(out.m_u), 0.0));
    CHECK(t.value(out.fused).rightCols(3).isApprox(t.value(out.m_v), 0.0));
  }

  SUBCASE("unidirectional fusion returns the single pooled vector") {
    Tape t;
    const PairParameters pp = random_pair(3, rng);
    const PairVars vars = bind_pair(t, pp);
    const Matrix su = random_matrix(4, 3, rng);
    const FuseOut out = gated_fuse(t, t.input(su), Var{}, vars, cfg);
    CHECK(testutil::max_abs_diff_vec(t.value(out.fused),
                                     refdmn::maxpool_over_rows(testutil::to_ref(su))) == 0.0);
  }
}

namespace {

struct TripletFixture {
  Matrix hp, hq, ha;
  MatchParameters mp;

  TripletFixture(int l, const MatchConfig& cfg, std::mt19937_64& rng) {
    hp = random_matrix(6, l, rng);
    hq = random_matrix(3, l, rng);
    ha = random_matrix(4, l, rng);
    mp.pq = random_pair(l, rng);
    mp.pa = random_pair(l, rng);
    mp.qa = random_pair(l, rng);
    mp.v = random_matrix(representation_length(cfg, l), 1, rng);
  }

  refdmn::RefParams ref_params() const {
    refdmn::RefParams out;
    out.pq = to_ref(mp.pq);
    out.pa = to_ref(mp.pa);
    out.qa = to_ref(mp.qa);
    out.v = testutil::to_ref_vec(mp.v);
    return out;
  }
};

refdmn::RefConfig ref_config(const MatchConfig& cfg) {
  refdmn::RefConfig out;
  out.dual = cfg.attention == AttentionNorm::dual;
  out.bidirectional = cfg.direction == MatchDirection::bidirectional;
  out.gated = cfg.fusion == FusionKind::gated;
  out.use_qa = cfg.use_qa_pair;
  return out;
}

TripletVars build_triplet(Tape& t, const TripletFixture& fx, const MatchConfig& cfg) {
  TripletParamVars params;
  params.pq = bind_pair(t, fx.mp.pq);
  params.pa = bind_pair(t, fx.mp.pa);
  params.qa = bind_pair(t, fx.mp.qa);
  params.v = t.param(fx.mp.v);
  return triplet_representation(t, t.input(fx.hp), t.input(fx.hq), t.input(fx.ha), params, cfg,
                                DropoutMode::eval, nullptr);
}

} // namespace

TEST_CASE("triplet_representation dimension contract") {
  std::mt19937_64 rng(113);
  const int l = 4;

  MatchConfig cfg;
  CHECK(representation_length(cfg, l) == 3 * l); // gated, qa on

  cfg.fusion = FusionKind::concat;
  CHECK(representation_length(cfg, l) == 6 * l); // concat, qa on

  cfg = MatchConfig{};
  cfg.use_qa_pair = false;
  CHECK(representation_length(cfg, l) == 2 * l); // gated, qa off

  cfg = MatchConfig{};
  cfg.direction = MatchDirection::unidirectional;
  CHECK(representation_length(cfg, l) == 3 * l); // uni keeps one vector per pair

  for (const FusionKind fusion : {FusionKind::gated, FusionKind::concat})
    for (const bool qa : {true, false}) {
      cfg = MatchConfig{};
      cfg.fusion = fusion;
      cfg.use_qa_pair = qa;
      Tape t;
      const TripletFixture fx(l, cfg, rng);
      const TripletVars tv = build_triplet(t, fx, cfg);
      CHECK(t.value(tv.c).rows() == 1);
      CHECK(t.value(tv.c).cols() == representation_length(cfg, l));
    }
}

TEST_CASE("triplet_representation matches the end-to-end oracle") {
  std::mt19937_64 rng(127);
  for (const AttentionNorm mode : {AttentionNorm::dual, AttentionNorm::literal}) {
    MatchConfig cfg;
    cfg.attention = mode;
    Tape t;
    const TripletFixture fx(3, cfg, rng);
    const TripletVars tv = build_triplet(t, fx, cfg);
    const refdmn::Vec expected = refdmn::triplet(testutil::to_ref(fx.hp), testutil::to_ref(fx.hq),
                                                 testutil::to_ref(fx.ha), fx.ref_params(),
                                                 ref_config(cfg));
    CHECK(testutil::max_abs_diff_vec(t.value(tv.c), expected) <= 1e-12);
  }
}

TEST_CASE("score_and_loss") {
  std::mt19937_64 rng(131);
  MatchConfig cfg;
  const int l = 3;
  const int rep_len = representation_length(cfg, l);

  SUBCASE("zero scorer gives uniform probs and ln N loss") {
    Tape t;
    std::vector<Var> reps;
    for (int i = 0; i < 4; ++i) reps.push_back(t.input(random_matrix(1, rep_len, rng)));
    const Var v = t.param(Matrix::Zero(rep_len, 1));
    const ScoredLoss out = score_and_loss(t, reps, v, 1);
    for (Index i = 0; i < 4; ++i) CHECK(std::abs(out.probs(i) - 0.25) <= 1e-12);
    CHECK(std::abs(t.value(out.loss)(0, 0) - std::log(4.0)) <= 1e-9);
    CHECK(std::abs(t.value(out.loss)(0, 0) - 1.386294) <= 1e-6);
  }

  SUBCASE("two candidates: ln 2") {
    Tape t;
    std::vector<Var> reps;
    for (int i = 0; i < 2; ++i) reps.push_back(t.input(random_matrix(1, rep_len, rng)));
    const Var v = t.param(Matrix::Zero(rep_len, 1));
    const ScoredLoss out = score_and_loss(t, reps, v, 0);
    CHECK(std::abs(t.value(out.loss)(0, 0) - std::log(2.0)) <= 1e-9);
    CHECK(std::abs(t.value(out.loss)(0, 0) - 0.693147) <= 1e-6);
  }

  SUBCASE("saturated logits give near-one-hot probs and near-zero loss") {
    Tape t;
    Matrix c0 = Matrix::Zero(1, rep_len), c1 = Matrix::Zero(1, rep_len);
    c0(0, 0) = 1000.0; // with v = e_0, logits are (1000, 0)
    Matrix v_val = Matrix::Zero(rep_len, 1);
    v_val(0, 0) = 1.0;
    const std::vector<Var> reps{t.input(c0), t.input(c1)};
    const ScoredLoss out = score_and_loss(t, reps, t.param(v_val), 0);
    CHECK(out.probs(0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(out.probs(1) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(t.value(out.loss)(0, 0) == doctest::Approx(0.0).epsilon(1e-12));
  }

  SUBCASE("random representations match the scalar oracle; probs sum to 1") {
    Tape t;
    std::vector<Var> reps;
    std::vector<refdmn::Vec> ref_reps;
    for (int i = 0; i < 4; ++i) {
      const Matrix c = random_matrix(1, rep_len, rng);
      reps.push_back(t.input(c));
      ref_reps.push_back(testutil::to_ref_vec(c));
    }
    const Matrix v_val = random_matrix(rep_len, 1, rng);
    const ScoredLoss out = score_and_loss(t, reps, t.param(v_val), 2);
    const auto [ref_probs, ref_loss] = refdmn::score(ref_reps, testutil::to_ref_vec(v_val), 2);
    CHECK(std::abs(out.probs.sum() - 1.0) <= 1e-12);
    for (Index i = 0; i < 4; ++i) CHECK(std::abs(out.probs(i) - ref_probs[i]) <= 1e-12);
    CHECK(std::abs(t.value(out.loss)(0, 0) - ref_loss) <= 1e-12);
  }

  SUBCASE("scorer length mismatch is rejected") {
    Tape t;
    const std::vector<Var> reps{t.input(random_matrix(1, rep_len, rng)),
                                t.input(random_matrix(1, rep_len, rng))};
    const Var v_short = t.param(random_matrix(rep_len - 1, 1, rng));
    CHECK_THROWS_AS(score_and_loss(t, reps, v_short, 0), std::invalid_argument);
  }

  SUBCASE("gold out of range is rejected") {
    Tape t;
    const std::vector<Var> reps{t.input(random_matrix(1, rep_len, rng)),
                                t.input(random_matrix(1, rep_len, rng))};
    const Var v = t.param(random_matrix(rep_len, 1, rng));
    CHECK_THROWS_AS(score_and_loss(t, reps, v, 2), std::out_of_range);
    CHECK_THROWS_AS(score_and_loss(t, reps, v, -1), std::out_of_range);
  }

  SUBCASE("fewer than two candidates is rejected") {
    Tape t;
    const std::vector<Var> reps{t.input(random_matrix(1, rep_len, rng))};
    const Var v = t.param(random_matrix(rep_len, 1, rng));
    CHECK_THROWS_AS(score_and_loss(t, reps, v, 0), std::invalid_argument);
  }
}

TEST_CASE("candidate permutation equivariance is exact") {
  std::mt19937_64 rng(137);
  const int rep_len = 9;
  std::vector<Matrix> cs;
  for (int i = 0; i < 4; ++i) cs.push_back(random_matrix(1, rep_len, rng));
  const Matrix v_val = random_matrix(rep_len, 1, rng);
  const int gold = 2;

  Tape t1;
  std::vector<Var> reps1;
  for (const Matrix& c : cs) reps1.push_back(t1.input(c));
  const ScoredLoss base = score_and_loss(t1, reps1, t1.param(v_val), gold);

  const int perm[4] = {3, 0, 2, 1}; // position i takes old candidate perm[i]
  Tape t2;
  std::vector<Var> reps2;
  for (int i = 0; i < 4; ++i) reps2.push_back(t2.input(cs[static_cast<std::size_t>(perm[i])]));
  int new_gold = 0;
  while (perm[new_gold] != gold) ++new_gold;
  const ScoredLoss permuted = score_and_loss(t2, reps2, t2.param(v_val), new_gold);

  for (int i = 0; i < 4; ++i)
    CHECK(permuted.probs(i) == base.probs(perm[i])); // bitwise equal
  CHECK(t2.value(permuted.loss)(0, 0) == t1.value(base.loss)(0, 0));
}

TEST_CASE("softmax shift invariance over candidates") {
  std::mt19937_64 rng(139);
  Matrix logits = random_matrix(1, 4, rng, -3.0, 3.0);
  const Vector base = candidate_probs(logits);
  const Vector shifted = candidate_probs((logits.array() + 17.5).matrix());
  for (Index i = 0; i < 4; ++i) CHECK(std::abs(base(i) - shifted(i)) <= 1e-12);
}

TEST_CASE("enum round trips") {
  CHECK(attention_from_string(to_string(AttentionNorm::dual)) == AttentionNorm::dual);
  CHECK(attention_from_string("literal") == AttentionNorm::literal);
  CHECK(direction_from_string("bi") == MatchDirection::bidirectional);
  CHECK(direction_from_string("uni") == MatchDirection::unidirectional);
  CHECK(fusion_from_string("concat") == FusionKind::concat);
  CHECK_THROWS_AS(attention_from_string("nope"), std::invalid_argument);
  CHECK_THROWS_AS(direction_from_string("nope"), std::invalid_argument);
  CHECK_THROWS_AS(fusion_from_string("nope"), std::invalid_argument);
}
