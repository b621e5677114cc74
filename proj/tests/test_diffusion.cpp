#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "lfdepth/diffusion.hpp"
#include "lfdepth/errors.hpp"
#include "oracles.hpp"

using namespace lfd;

namespace {

WeightMaps uniform_weights(int rows, int cols, float lambda_s) {
  WeightMaps w;
  w.lambda_data = GrayImage(rows, cols, 0.0f);
  w.target = GrayImage(rows, cols, 0.0f);
  w.lambda_right = GrayImage(rows, cols, 0.0f);
  w.lambda_down = GrayImage(rows, cols, 0.0f);
  for (int y = 0; y < rows; ++y) {
    for (int x = 0; x < cols; ++x) {
      if (x + 1 < cols) w.lambda_right.at(y, x) = lambda_s;
      if (y + 1 < rows) w.lambda_down.at(y, x) = lambda_s;
    }
  }
  return w;
}

GrayImage random_guide(std::mt19937& rng, int rows, int cols, bool smooth) {
  std::uniform_real_distribution<float> dist(0.0f, 1.0f);
  GrayImage img(rows, cols);
  for (float& v : img.data) v = dist(rng);
  if (smooth) {
    GrayImage out(rows, cols);
    for (int y = 0; y < rows; ++y) {
      for (int x = 0; x < cols; ++x) {
        float acc = 0.0f;
        int n = 0;
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int yy = y + dy, xx = x + dx;
            if (yy < 0 || yy >= rows || xx < 0 || xx >= cols) continue;
            acc += img.at(yy, xx);
            ++n;
          }
        }
        out.at(y, x) = acc / static_cast<float>(n);
      }
    }
    img = out;
  }
  return img;
}

}  // namespace

TEST_CASE("build_system: hand-checked 1x3 chain") {
  // lambda_d = (1, 0, 1), targets (0, -, 2), both edges at lambda_s = 1.
  // Normal equations: [2 -1 0; -1 2 -1; 0 -1 2] x = (0, 0, 2),
  // whose solution is (0.5, 1.0, 1.5); confirmed by the dense oracle.
  WeightMaps w = uniform_weights(1, 3, 1.0f);
  w.lambda_data.at(0, 0) = 1.0f;
  w.lambda_data.at(0, 2) = 1.0f;
  w.target.at(0, 2) = 2.0f;
  SparseSystem sys = build_system(w);

  auto direct = oracle::dense_solve(sys);
  CHECK(direct[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(direct[1] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(direct[2] == doctest::Approx(1.5).epsilon(1e-12));

  auto pcg = solve(sys, 1e-12);
  CHECK(oracle::rel_l2_diff(pcg, direct) < 1e-9);
}

TEST_CASE("build_system: symmetry and pattern") {
  std::mt19937 rng(3);
  GrayImage guide = random_guide(rng, 6, 5, false);
  WeightMaps w = make_weight_maps(guide, 0.1f, 1e-4f);
  std::uniform_real_distribution<float> dist(0.0f, 15.0f);
  for (int y = 0; y < 6; ++y) {
    for (int x = 0; x < 5; ++x) add_label(w, y, x, dist(rng), dist(rng));
  }
  SparseSystem sys = build_system(w);
  // symmetric and at most 5 entries per row
  for (int i = 0; i < sys.n; ++i) {
    CHECK(sys.row_ptr[i + 1] - sys.row_ptr[i] <= 5);
    for (int k = sys.row_ptr[i]; k < sys.row_ptr[i + 1]; ++k) {
      const int j = sys.col_idx[k];
      double aji = 0.0;
      for (int k2 = sys.row_ptr[j]; k2 < sys.row_ptr[j + 1]; ++k2) {
        if (sys.col_idx[k2] == i) aji = sys.val[k2];
      }
      CHECK(sys.val[k] == aji);
    }
  }
}

TEST_CASE("build_system: all-zero data weights are singular") {
  WeightMaps w = uniform_weights(3, 3, 1.0f);
  CHECK_THROWS_AS(build_system(w), SolverError);
}

TEST_CASE("diffuse_grid basics") {
  GrayImage flat(4, 6, 0.5f);
  DiffusionParams params;

  SUBCASE("single label floods the grid") {
    SparseLabel l{0, 0, 2, 1, 2.0f, 15.0f, LabelSource::LineGuide};
    DepthMap out = diffuse_grid(flat, std::vector<SparseLabel>{l}, params);
    for (int y = 0; y < 4; ++y) {
      for (int x = 0; x < 6; ++x) CHECK(out.at(y, x) == doctest::Approx(2.0).epsilon(1e-5));
    }
  }

  SUBCASE("smoothness off decouples the data terms") {
    DiffusionParams p = params;
    p.smooth_c = 0.0f;
    std::vector<SparseLabel> labels{{0, 0, 0, 0, 1.0f, 15.0f, LabelSource::LineGuide},
                                    {0, 0, 5, 3, 3.0f, 15.0f, LabelSource::LineGuide}};
    DepthMap out = diffuse_grid(flat, labels, p);
    CHECK(out.at(0, 0) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(out.at(3, 5) == doctest::Approx(3.0).epsilon(1e-9));
  }

  SUBCASE("uniform targets stay put") {
    std::vector<SparseLabel> labels{{0, 0, 1, 1, 4.0f, 15.0f, LabelSource::LineGuide},
                                    {0, 0, 4, 2, 4.0f, 7.0f, LabelSource::LineGuide}};
    DepthMap out = diffuse_grid(flat, labels, params);
    for (float v : out.disp.data) CHECK(v == doctest::Approx(4.0).epsilon(1e-6));
  }

  SUBCASE("two labels on a 1D grid interpolate harmonically") {
    GrayImage line(1, 9, 0.5f);
    std::vector<SparseLabel> labels{{0, 0, 0, 0, 0.0f, 15.0f, LabelSource::LineGuide},
                                    {0, 0, 8, 0, 4.0f, 15.0f, LabelSource::LineGuide}};
    DepthMap out = diffuse_grid(line, labels, params);
    SparseSystem sys = [&] {
      WeightMaps w = make_weight_maps(line, params.smooth_c, params.smooth_eps);
      add_label(w, 0, 0, 0.0f, 15.0f);
      add_label(w, 0, 8, 4.0f, 15.0f);
      return build_system(w);
    }();
    auto direct = oracle::dense_solve(sys);
    for (int x = 0; x < 9; ++x) CHECK(out.at(0, x) == doctest::Approx(direct[x]).epsilon(1e-6));
    // interior of a harmonic chain is linear: second differences vanish
    for (int x = 1; x < 8; ++x) {
      const double second = direct[x - 1] - 2.0 * direct[x] + direct[x + 1];
      CHECK(std::abs(second) < 1e-9);
    }
    CHECK(out.at(0, 4) == doctest::Approx(2.0).epsilon(1e-3));
  }

  SUBCASE("solution step aligns with an intensity edge") {
    GrayImage img(1, 16, 0.2f);
    for (int x = 8; x < 16; ++x) img.at(0, x) = 0.8f;  // edge between columns 7 and 8
    std::vector<SparseLabel> labels{{0, 0, 1, 0, 0.0f, 15.0f, LabelSource::LineGuide},
                                    {0, 0, 14, 0, 2.0f, 15.0f, LabelSource::LineGuide}};
    DepthMap out = diffuse_grid(img, labels, DiffusionParams{});
    // largest jump of the solution sits on the intensity edge
    int best_x = 0;
    float best_jump = 0.0f;
    for (int x = 0; x < 15; ++x) {
      const float jump = std::abs(out.at(0, x + 1) - out.at(0, x));
      if (jump > best_jump) {
        best_jump = jump;
        best_x = x;
      }
    }
    CHECK(std::abs(best_x - 7) <= 1);
    CHECK(out.at(0, 1) == doctest::Approx(0.0).epsilon(0.05));
    CHECK(out.at(0, 14) == doctest::Approx(2.0).epsilon(0.05));
  }
}

TEST_CASE("solve: manufactured solution recovered") {
  std::mt19937 rng(11);
  GrayImage guide = random_guide(rng, 8, 8, true);
  WeightMaps w = make_weight_maps(guide, 0.1f, 1e-4f);
  std::uniform_real_distribution<float> dist(0.0f, 15.0f);
  for (int i = 0; i < 10; ++i) {
    add_label(w, static_cast<int>(rng() % 8), static_cast<int>(rng() % 8), dist(rng), dist(rng));
  }
  SparseSystem sys = build_system(w);

  std::vector<double> x_true(sys.n);
  for (double& v : x_true) v = dist(rng);
  // b = A x*
  std::vector<double> b(sys.n, 0.0);
  for (int i = 0; i < sys.n; ++i) {
    for (int k = sys.row_ptr[i]; k < sys.row_ptr[i + 1]; ++k) {
      b[i] += sys.val[k] * x_true[sys.col_idx[k]];
    }
  }
  sys.rhs = b;
  auto x = solve(sys, 1e-10);
  CHECK(oracle::rel_l2_diff(x, x_true) < 1e-6);
}

TEST_CASE("solve: random EPI-shaped system matches the dense oracle") {
  std::mt19937 rng(23);
  GrayImage guide = random_guide(rng, 9, 16, false);
  WeightMaps w = make_weight_maps(guide, 0.1f, 1e-4f);
  std::uniform_real_distribution<float> dval(-2.0f, 2.0f);
  std::uniform_real_distribution<float> dw(0.0f, 15.0f);
  for (int i = 0; i < 25; ++i) {
    add_label(w, static_cast<int>(rng() % 9), static_cast<int>(rng() % 16), dval(rng), dw(rng));
  }
  SparseSystem sys = build_system(w);
  auto pcg = solve(sys, 1e-12);
  auto direct = oracle::dense_solve(sys);
  CHECK(oracle::rel_l2_diff(pcg, direct) <= 1e-6);
}

TEST_CASE("solve: identity-dominated system converges in few iterations") {
  GrayImage guide(16, 16, 0.5f);
  WeightMaps w = make_weight_maps(guide, 0.1f, 1e-4f);
  std::mt19937 rng(5);
  std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
  for (int y = 0; y < 16; ++y) {
    for (int x = 0; x < 16; ++x) add_label(w, y, x, dist(rng), 15.0f);
  }
  SparseSystem sys = build_system(w);
  SolveStats stats;
  solve(sys, 1e-6, 0, &stats);
  CHECK(stats.iterations <= 10);
  CHECK_FALSE(stats.used_jacobi);
}

TEST_CASE("solve: non-convergence carries the residual") {
  WeightMaps w = uniform_weights(4, 4, 1000.0f);
  w.lambda_data.at(0, 0) = 1e-6f;
  w.target.at(0, 0) = 1.0f;
  w.lambda_data.at(3, 3) = 1e-6f;
  w.target.at(3, 3) = -1.0f;
  SparseSystem sys = build_system(w);
  try {
    solve(sys, 1e-14, 2);  // starved iteration budget
    FAIL("expected SolverError");
  } catch (const SolverError& e) {
    CHECK(std::string(e.what()).find("residual") != std::string::npos);
  }
}

TEST_CASE("diffuse_epi") {
  DiffusionParams params;
  SUBCASE("dense depth stays within tolerance of itself") {
    GrayImage intensity(5, 12, 0.5f);
    GrayImage depth(5, 12);
    for (int a = 0; a < 5; ++a) {
      for (int s = 0; s < 12; ++s) depth.at(a, s) = 0.1f * static_cast<float>(s);
    }
    GrayImage out = diffuse_epi(depth, intensity, {}, 15.0f, params);
    for (int a = 0; a < 5; ++a) {
      for (int s = 0; s < 12; ++s) {
        CHECK(out.at(a, s) == doctest::Approx(depth.at(a, s)).epsilon(0.02));
      }
    }
  }

  SUBCASE("hole with a guide takes the guide value, not the neighbors") {
    const int a_count = 5, s_count = 16;
    GrayImage intensity(a_count, s_count, 0.5f);
    // intensity edges bracketing the hole, so smoothness decouples across them
    for (int a = 0; a < a_count; ++a) {
      for (int s = 6; s < 10; ++s) intensity.at(a, s) = 0.9f;
    }
    GrayImage depth(a_count, s_count, 2.0f);
    for (int a = 0; a < a_count; ++a) {
      for (int s = 6; s < 10; ++s) depth.at(a, s) = std::numeric_limits<float>::quiet_NaN();
    }
    std::vector<SparseLabel> guides;
    for (int a = 0; a < a_count; ++a) {
      guides.push_back({0, 0, 8, a, 0.0f, 15.0f, LabelSource::LineGuide});
    }
    GrayImage out = diffuse_epi(depth, intensity, guides, 15.0f, params);
    for (int a = 0; a < a_count; ++a) {
      CHECK(out.at(a, 8) == doctest::Approx(0.0).epsilon(0.05));
      CHECK(out.at(a, 0) == doctest::Approx(2.0).epsilon(0.05));
    }
  }

  SUBCASE("hole with no guide interpolates between its borders") {
    GrayImage intensity(3, 10, 0.5f);
    GrayImage depth(3, 10, 1.0f);
    for (int a = 0; a < 3; ++a) {
      for (int s = 4; s < 7; ++s) depth.at(a, s) = std::numeric_limits<float>::quiet_NaN();
    }
    for (int a = 0; a < 3; ++a) depth.at(a, 9) = 3.0f;
    GrayImage out = diffuse_epi(depth, intensity, {}, 15.0f, params);
    for (int a = 0; a < 3; ++a) {
      for (int s = 4; s < 7; ++s) {
        CHECK(out.at(a, s) >= 1.0f - 1e-3f);
        CHECK(out.at(a, s) <= 3.0f + 1e-3f);
      }
    }
  }
}

TEST_CASE("property: maximum principle") {
  std::mt19937 rng(31);
  GrayImage guide = random_guide(rng, 10, 10, true);
  std::uniform_real_distribution<float> dval(-2.0f, 2.0f);
  std::vector<SparseLabel> labels;
  float lo = 1e9f, hi = -1e9f;
  for (int i = 0; i < 8; ++i) {
    SparseLabel l{0, 0, static_cast<int>(rng() % 10), static_cast<int>(rng() % 10), dval(rng),
                  15.0f, LabelSource::LineGuide};
    lo = std::min(lo, l.d);
    hi = std::max(hi, l.d);
    labels.push_back(l);
  }
  DepthMap out = diffuse_grid(guide, labels, DiffusionParams{});
  for (float v : out.disp.data) {
    CHECK(v >= lo - 1e-5f);
    CHECK(v <= hi + 1e-5f);
  }
}

TEST_CASE("property: single-pixel perturbations never lower the energy") {
  std::mt19937 rng(37);
  GrayImage guide = random_guide(rng, 6, 7, false);
  WeightMaps w = make_weight_maps(guide, 0.1f, 1e-4f);
  std::uniform_real_distribution<float> dval(-2.0f, 2.0f);
  for (int i = 0; i < 6; ++i) {
    add_label(w, static_cast<int>(rng() % 6), static_cast<int>(rng() % 7), dval(rng), 15.0f);
  }
  SparseSystem sys = build_system(w);
  auto x = solve(sys, 1e-12);
  const double e0 = oracle::energy_of(w, x);
  for (int i = 0; i < sys.n; ++i) {
    for (double delta : {0.01, -0.01}) {
      auto xp = x;
      xp[i] += delta;
      CHECK(oracle::energy_of(w, xp) >= e0 - 1e-12);
    }
  }
}

TEST_CASE("property: PCG matches the dense oracle on random grids") {
  std::mt19937 rng(41);
  std::uniform_int_distribution<int> size_dist(2, 32);
  std::uniform_real_distribution<float> dval(-2.0f, 2.0f);
  std::uniform_real_distribution<float> dw(0.0f, 15.0f);
  for (int trial = 0; trial < 10; ++trial) {
    const int rows = size_dist(rng), cols = size_dist(rng);
    GrayImage guide = random_guide(rng, rows, cols, trial % 2 == 0);
    WeightMaps w = make_weight_maps(guide, 0.1f, 1e-4f);
    const int n_labels = 1 + static_cast<int>(rng() % 12);
    for (int i = 0; i < n_labels; ++i) {
      add_label(w, static_cast<int>(rng() % rows), static_cast<int>(rng() % cols), dval(rng),
                dw(rng) + 0.01f);
    }
    SparseSystem sys = build_system(w);
    auto pcg = solve(sys, 1e-12);
    auto direct = oracle::dense_solve(sys);
    CHECK(oracle::rel_l2_diff(pcg, direct) <= 1e-6);
  }
}

TEST_CASE("property: mirrored inputs give the mirrored solution") {
  std::mt19937 rng(43);
  GrayImage guide = random_guide(rng, 7, 9, true);
  std::uniform_real_distribution<float> dval(-2.0f, 2.0f);
  std::vector<SparseLabel> labels;
  for (int i = 0; i < 6; ++i) {
    labels.push_back({0, 0, static_cast<int>(rng() % 9), static_cast<int>(rng() % 7), dval(rng),
                      15.0f, LabelSource::LineGuide});
  }
  GrayImage mirrored(7, 9);
  for (int y = 0; y < 7; ++y) {
    for (int x = 0; x < 9; ++x) mirrored.at(y, x) = guide.at(y, 8 - x);
  }
  std::vector<SparseLabel> mirrored_labels = labels;
  for (auto& l : mirrored_labels) l.x = 8 - l.x;

  DepthMap a = diffuse_grid(guide, labels, DiffusionParams{});
  DepthMap b = diffuse_grid(mirrored, mirrored_labels, DiffusionParams{});
  for (int y = 0; y < 7; ++y) {
    for (int x = 0; x < 9; ++x) {
      CHECK(a.at(y, x) == doctest::Approx(b.at(y, 8 - x)).epsilon(1e-8));
    }
  }
}
