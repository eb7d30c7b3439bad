// Acceptance gate: one test case per release criterion, each printing a
// single "criterion NN PASS|FAIL <name>" line. Run through ctest or directly;
// the binary exercises the installed CLI (path injected at configure time)
// for the criteria that are contracts about the executable rather than the
// library.
#include <catch2/catch_amalgamated.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "test_util.hpp"

using namespace dropreg;

namespace {

struct Checks {
  bool ok = true;
  std::string notes;

  void expect(bool cond, const std::string& label) {
    if (!cond) {
      ok = false;
      if (!notes.empty()) notes += "; ";
      notes += label;
    }
  }
};

void announce(int id, const char* name, const Checks& c) {
  std::printf("criterion %02d %s %s\n", id, c.ok ? "PASS" : "FAIL", name);
  std::fflush(stdout);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

const std::filesystem::path kWorkDir = "/tmp/dropreg_acceptance";

std::filesystem::path work_file(const std::string& name) {
  std::filesystem::create_directories(kWorkDir);
  return kWorkDir / name;
}

int run_cli(const std::string& args, const std::string& tag) {
  std::string cmd = std::string(DROPREG_CLI_PATH) + " " + args + " >" +
                    (kWorkDir / (tag + ".stdout")).string() + " 2>" +
                    (kWorkDir / (tag + ".stderr")).string();
  std::filesystem::create_directories(kWorkDir);
  return std::system(cmd.c_str());
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

double accuracy(const std::vector<double>& beta, const Dataset& data) {
  std::size_t ok = 0;
  for (std::size_t i = 0; i < data.n(); ++i)
    ok += (dot(data.rows[i], beta) >= 0.0) == (data.labels[i] > 0.5);
  return static_cast<double>(ok) / static_cast<double>(data.n());
}

}  // namespace

TEST_CASE("criterion 1: rare-feature benchmark accuracies", "[acceptance]") {
  Checks c;
  auto t0 = std::chrono::steady_clock::now();
  std::filesystem::path report = work_file("c1_table3.json");
  int rc = run_cli("table3 --runs 100 --seed 1 --out " + report.string(), "c1");
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  c.expect(rc == 0, "table3 exit code " + std::to_string(rc));
  c.expect(secs < 600.0, "runtime " + fmt(secs) + "s exceeds 600s");
  if (rc == 0) {
    nlohmann::json j = nlohmann::json::parse(slurp(report));
    double da = j["aggregates"]["dropout_active"]["mean"].get<double>();
    double la = j["aggregates"]["l2_active"]["mean"].get<double>();
    double dl = j["aggregates"]["dropout_all"]["mean"].get<double>();
    double ll = j["aggregates"]["l2_all"]["mean"].get<double>();
    c.expect(da >= 0.71 && da <= 0.75, "dropout active " + fmt(da) + " outside 0.73+-0.02");
    c.expect(la >= 0.64 && la <= 0.68, "l2 active " + fmt(la) + " outside 0.66+-0.02");
    c.expect(dl >= 0.53 && dl <= 0.57, "dropout all " + fmt(dl) + " outside 0.55+-0.02");
    c.expect(ll >= 0.51 && ll <= 0.55, "l2 all " + fmt(ll) + " outside 0.53+-0.02");
  }
  announce(1, "rare-feature benchmark accuracies", c);
  INFO(c.notes);
  CHECK(c.ok);
}

TEST_CASE("criterion 2: ridge equivalence for linear additive noising", "[acceptance]") {
  Checks c;
  const std::uint64_t base = 0xac2ULL;
  for (std::size_t s = 0; s < 100; ++s) {
    std::size_t n = 12 + s % 9;
    std::uint32_t d = static_cast<std::uint32_t>(3 + s % 6);
    double sigma2 = 0.3 + 0.02 * static_cast<double>(s % 10);
    Dataset data =
        testutil::random_glm_dataset(Family::linear, n, d, 0.7, 0.6, mix_seed(base, s, 0));
    std::vector<double> beta = testutil::random_beta(d, 0.6, mix_seed(base, s, 1));
    NoiseModel noise = NoiseModel::additive(sigma2);

    double exact = exact_penalty(Family::linear, data, beta, noise).value;
    double quad = quad_penalty(Family::linear, data, beta, noise).value;
    double ridge = 0.0;
    for (double b : beta) ridge += b * b;
    ridge *= 0.5 * sigma2 * static_cast<double>(n);
    c.expect(std::abs(exact - quad) < 1e-10,
             "instance " + std::to_string(s) + " exact vs quad gap " + fmt(exact - quad));
    c.expect(std::abs(exact - ridge) < 1e-10,
             "instance " + std::to_string(s) + " exact vs ridge gap " + fmt(exact - ridge));

    BatchConfig config;
    config.gradient_tolerance = 1e-9;
    FitReport noised = fit_glm(Family::linear, data, PenaltyMode::quad_noising(noise), config);
    FitReport l2 = fit_glm(Family::linear, data,
                           PenaltyMode::l2(sigma2 * static_cast<double>(n)), config);
    double gap = 0.0;
    for (std::uint32_t j = 0; j < d; ++j)
      gap = std::max(gap, std::abs(noised.beta[j] - l2.beta[j]));
    // The tolerance above sits at the floating-point plateau for these sums,
    // so the convergence flag can stay false while beta is pinned far below
    // the comparison tolerance; gate on the final gradient instead.
    c.expect(std::max(noised.gradient_norm, l2.gradient_norm) < 1e-6,
             "instance " + std::to_string(s) + " final gradient " +
                 fmt(std::max(noised.gradient_norm, l2.gradient_norm)));
    c.expect(gap < 1e-6, "instance " + std::to_string(s) + " fit gap " + fmt(gap));
  }
  announce(2, "ridge equivalence for linear additive noising", c);
  INFO(c.notes);
  CHECK(c.ok);
}

TEST_CASE("criterion 3: enumeration oracle vs monte carlo and surrogate", "[acceptance]") {
  Checks c;
  const std::uint64_t base = 0xac3ULL;
  NoiseModel noise = NoiseModel::dropout(0.5);
  for (std::size_t s = 0; s < 20; ++s) {
    Dataset data =
        testutil::random_glm_dataset(Family::logistic, 6, 12, 0.6, 0.35, mix_seed(base, s, 0));
    std::vector<double> beta = testutil::random_beta(12, 0.35, mix_seed(base, s, 1));
    double maxz = 0.0;
    for (const SparseVector& row : data.rows) maxz = std::max(maxz, std::abs(dot(row, beta)));
    if (maxz > 1.9)
      for (double& b : beta) b *= 1.9 / maxz;

    double exact = exact_penalty(Family::logistic, data, beta, noise).value;
    double quad = quad_penalty(Family::logistic, data, beta, noise).value;
    double target = nll(Family::logistic, data, beta) + exact;
    McEstimate mc =
        mc_noised_objective(Family::logistic, data, beta, noise, 200000, mix_seed(base, s, 7));
    c.expect(exact > 0.0, "instance " + std::to_string(s) + " degenerate penalty");
    c.expect(std::abs(mc.value - target) <= 3.0 * mc.std_error,
             "instance " + std::to_string(s) + " mc off by " + fmt(mc.value - target) +
                 " (3se=" + fmt(3.0 * mc.std_error) + ")");
    c.expect(std::abs(quad - exact) <= 0.15 * exact,
             "instance " + std::to_string(s) + " surrogate off by " +
                 fmt((quad - exact) / exact));
  }
  announce(3, "enumeration oracle vs monte carlo and surrogate", c);
  INFO(c.notes);
  CHECK(c.ok);
}

TEST_CASE("criterion 4: analytic gradients match finite differences", "[acceptance]") {
  Checks c;
  const std::uint64_t base = 0xac4ULL;
  const Family families[] = {Family::linear, Family::logistic, Family::poisson};
  const char* names[] = {"linear", "logistic", "poisson"};

  for (int fi = 0; fi < 3; ++fi) {
    Family f = families[fi];
    double scale = f == Family::poisson ? 0.2 : 0.5;
    Dataset data = testutil::random_glm_dataset(f, 12, 5, 0.7, scale, mix_seed(base, fi, 0));
    std::vector<double> beta = testutil::random_beta(5, scale, mix_seed(base, fi, 1));

    std::vector<double> grad(5);
    nll(f, data, beta, &grad);
    std::vector<double> fd = testutil::central_diff(
        [&](const std::vector<double>& b) { return nll(f, data, b); }, beta);
    c.expect(testutil::rel_gap(grad, fd) < 1e-5, std::string(names[fi]) + " nll gradient");

    for (int kind = 0; kind < 2; ++kind) {
      NoiseModel noise = kind == 0 ? NoiseModel::dropout(0.4) : NoiseModel::additive(0.5);
      std::vector<double> pg = quad_penalty_grad(f, data, beta, noise);
      std::vector<double> pfd = testutil::central_diff(
          [&](const std::vector<double>& b) { return quad_penalty(f, data, b, noise).value; },
          beta);
      c.expect(testutil::rel_gap(pg, pfd) < 1e-5,
               std::string(names[fi]) + (kind == 0 ? " dropout" : " additive") +
                   " penalty gradient");
    }
  }

  Dataset labeled = testutil::random_glm_dataset(Family::logistic, 14, 6, 0.7, 0.5,
                                                 mix_seed(base, 10, 0));
  UnlabeledSet unlabeled;
  unlabeled.dim = 6;
  {
    Rng rng(mix_seed(base, 10, 1));
    for (std::size_t i = 0; i < 25; ++i) unlabeled.add(testutil::random_row(6, 0.7, rng));
  }
  std::vector<double> beta = testutil::random_beta(6, 0.5, mix_seed(base, 10, 2));
  Objective obj = semisup_objective(Family::logistic, labeled, unlabeled,
                                    NoiseModel::dropout(0.4), DiscountAlpha::of(0.3));
  std::vector<double> grad;
  obj(beta, grad);
  std::vector<double> scratch;
  std::vector<double> fd = testutil::central_diff(
      [&](const std::vector<double>& b) { return obj(b, scratch); }, beta);
  c.expect(testutil::rel_gap(grad, fd) < 1e-5, "semisup objective gradient");

  announce(4, "analytic gradients match finite differences", c);
  INFO(c.notes);
  CHECK(c.ok);
}

TEST_CASE("criterion 5: single-example logistic penalty sign pattern", "[acceptance]") {
  Checks c;
  Fig1aReport rep = run_fig1a({});
  bool found_anchor = false;
  for (const Fig1aCell& cell : rep.cells) {
    if (cell.p == 0.5 && cell.sigma2 > 0.0)
      c.expect(cell.quadratic > cell.exact,
               "no overestimate at p=0.5 sigma2=" + fmt(cell.sigma2));
    if (cell.p == 0.95 && cell.sigma2 == 4.0)
      c.expect(cell.quadratic < cell.exact, "no underestimate at p=0.95 sigma2=4");
    if (cell.p == 0.5 && cell.sigma2 == 1.0) {
      found_anchor = true;
      c.expect(std::abs(cell.quadratic - 0.125) < 1e-12,
               "quadratic anchor " + fmt(cell.quadratic));
      c.expect(std::abs(cell.exact - 0.11291200278643) < 1e-9,
               "exact anchor " + fmt(cell.exact));
    }
  }
  c.expect(found_anchor, "anchor cell missing from grid");
  announce(5, "single-example logistic penalty sign pattern", c);
  INFO(c.notes);
  CHECK(c.ok);
}

TEST_CASE("criterion 6: online diagonals estimate the same information", "[acceptance]") {
  Checks c;
  FisherReport rep = run_fisher_compare({});
  c.expect(rep.median_rel_gap < 0.05, "median relative gap " + fmt(rep.median_rel_gap));
  c.expect(rep.inactive_coords_clean, "inactive coordinate accumulated information");
  announce(6, "online diagonals estimate the same information", c);
  INFO(c.notes);
  CHECK(c.ok);
}

TEST_CASE("criterion 7: noised and clean prediction rules coincide", "[acceptance]") {
  Checks c;
  const std::uint64_t base = 0xac7ULL;
  const std::uint64_t samples = 100000;
  std::size_t matches = 0;
  for (std::size_t s = 0; s < 100; ++s) {
    std::vector<double> beta = testutil::random_beta(10, 0.5, mix_seed(base, s, 1));
    SparseVector x;
    double z = 0.0;
    std::size_t attempt = 0;
    for (; attempt < 50; ++attempt) {
      Rng rng(mix_seed(base, s, 100 + attempt));
      x = testutil::random_row(10, 0.7, rng);
      z = dot(x, beta);
      if (std::abs(z) >= 0.05) break;
    }
    REQUIRE(attempt < 50);
    NoiseModel noise = s % 2 == 0 ? NoiseModel::dropout(0.4) : NoiseModel::additive(0.5);

    Rng draw_rng(mix_seed(base, s, 2));
    double mean_a = 0.0, mean_z = 0.0;
    for (std::uint64_t k = 0; k < samples; ++k) {
      double zt = dot(draw_noised(x, noise, draw_rng), beta);
      mean_a += partition(Family::logistic, zt);
      mean_z += zt;
    }
    mean_a /= static_cast<double>(samples);
    mean_z /= static_cast<double>(samples);

    // Shared draws across both candidate labels: objective(y) = E[A] - y E[z].
    double noised_pred = (mean_a - mean_z < mean_a) ? 1.0 : 0.0;
    double clean_pred = (partition(Family::logistic, z) - z <
                         partition(Family::logistic, z))
                            ? 1.0
                            : 0.0;
    matches += noised_pred == clean_pred;
  }
  c.expect(matches == 100, "agreement on " + std::to_string(matches) + "/100 instances");
  announce(7, "noised and clean prediction rules coincide", c);
  INFO(c.notes);
  CHECK(c.ok);
}

TEST_CASE("criterion 8: unlabeled rows sharpen the penalty estimate", "[acceptance]") {
  Checks c;

  // (a) Variance reduction against the population penalty at a fixed beta.
  {
    const std::uint32_t dim = 20;
    const std::uint64_t base = 0xac8aULL;
    std::vector<double> beta(dim);
    Rng brng(mix_seed(base, 99));
    for (double& b : beta) b = 0.4 * brng.normal();
    NoiseModel noise = NoiseModel::dropout(0.5);

    double pop_sum = 0.0;
    const std::size_t pop_total = 1000000, chunk = 100000;
    for (std::size_t part = 0; part < pop_total / chunk; ++part) {
      UnlabeledSet rows = gaussian_rows(chunk, dim, mix_seed(base, 1000 + part));
      pop_sum += detail::quad_penalty_rows(Family::logistic, rows.rows, beta, noise);
    }
    double population = 50.0 * pop_sum / static_cast<double>(pop_total);

    std::size_t wins = 0;
    for (std::size_t t = 0; t < 200; ++t) {
      Dataset labeled;
      labeled.dim = dim;
      UnlabeledSet lab_rows = gaussian_rows(50, dim, mix_seed(base, t, 0));
      for (SparseVector& row : lab_rows.rows) labeled.add(std::move(row), 0.0);
      UnlabeledSet unlabeled = gaussian_rows(5000, dim, mix_seed(base, t, 1));
      double plain = quad_penalty(Family::logistic, labeled, beta, noise).value;
      double semi = semisup_quad_penalty(Family::logistic, labeled, unlabeled, beta, noise,
                                         DiscountAlpha::of(0.4))
                        .value;
      wins += std::abs(semi - population) <= std::abs(plain - population);
    }
    c.expect(wins >= 160, "variance reduction in " + std::to_string(wins) + "/200 trials");
  }

  // (b) Held-out accuracy of the semi-supervised fit on a sparse heavy-tailed
  // task where the labeled penalty weights are noisy.
  {
    const std::uint64_t base = 0xac8bULL;
    const std::uint32_t dim = 80;
    std::vector<double> beta_true(dim, 0.0);
    for (std::uint32_t j = 0; j < 30; ++j) beta_true[j] = (j % 2 ? -1.0 : 1.0) * 0.26;
    auto gen_row = [&](Rng& rng) {
      SparseVector row;
      row.dim = dim;
      for (std::uint32_t j = 0; j < dim; ++j)
        if (rng.uniform() < 0.15)
          row.push(j, (rng.uniform() < 0.5 ? -1.0 : 1.0) * std::exp(rng.normal()));
      return row;
    };
    auto gen_labeled = [&](std::size_t n, std::uint64_t seed) {
      Dataset d;
      d.dim = dim;
      Rng rng(seed);
      for (std::size_t i = 0; i < n; ++i) {
        SparseVector row = gen_row(rng);
        double y = rng.bernoulli(sigmoid(dot(row, beta_true))) ? 1.0 : 0.0;
        d.add(std::move(row), y);
      }
      return d;
    };

    NoiseModel noise = NoiseModel::dropout(0.5);
    std::size_t wins = 0;
    for (std::size_t t = 0; t < 100; ++t) {
      Dataset labeled = gen_labeled(100, mix_seed(base, t, 0));
      UnlabeledSet unlabeled;
      unlabeled.dim = dim;
      {
        Rng rng(mix_seed(base, t, 1));
        for (std::size_t i = 0; i < 10000; ++i) unlabeled.add(gen_row(rng));
      }
      Dataset test = gen_labeled(2000, mix_seed(base, t, 2));
      FitReport sup = fit_glm(Family::logistic, labeled, PenaltyMode::quad_noising(noise));
      FitReport semi =
          fit_semisup(Family::logistic, labeled, unlabeled, noise, DiscountAlpha::of(0.4));
      wins += accuracy(semi.beta, test) >= accuracy(sup.beta, test);
    }
    c.expect(wins >= 70, "held-out improvement in " + std::to_string(wins) + "/100 trials");
  }

  announce(8, "unlabeled rows sharpen the penalty estimate", c);
  INFO(c.notes);
  CHECK(c.ok);
}

TEST_CASE("criterion 9: surrogate tracks the exact penalty along a fit", "[acceptance]") {
  Checks c;
  TraceReport rep = run_penalty_trace({});
  c.expect(rep.converged, "trace fit did not converge");
  c.expect(rep.pearson_r >= 0.95, "pearson r " + fmt(rep.pearson_r));
  announce(9, "surrogate tracks the exact penalty along a fit", c);
  INFO(c.notes);
  CHECK(c.ok);
}

TEST_CASE("criterion 10: the command line interface is deterministic", "[acceptance]") {
  Checks c;
  std::filesystem::remove_all(kWorkDir);
  std::filesystem::create_directories(kWorkDir);

  auto twice = [&](const std::string& name, const std::string& args_a,
                   const std::string& args_b, const std::vector<std::string>& outputs) {
    int rc_a = run_cli(args_a, name + "_a");
    int rc_b = run_cli(args_b, name + "_b");
    c.expect(rc_a == 0 && rc_b == 0,
             name + " exit codes " + std::to_string(rc_a) + "/" + std::to_string(rc_b));
    for (std::size_t k = 0; k + 1 < outputs.size(); k += 2) {
      std::string a = slurp(kWorkDir / outputs[k]);
      std::string b = slurp(kWorkDir / outputs[k + 1]);
      c.expect(!a.empty() && a == b, name + " outputs " + outputs[k] + " vs " +
                                         outputs[k + 1] + " differ");
    }
  };

  std::string dir = kWorkDir.string() + "/";
  twice("simulate",
        "simulate --n 400 --seed 9 --out " + dir + "simA.svm --mask-out " + dir +
            "simA.mask --beta-out " + dir + "simA.beta",
        "simulate --n 400 --seed 9 --out " + dir + "simB.svm --mask-out " + dir +
            "simB.mask --beta-out " + dir + "simB.beta",
        {"simA.svm", "simB.svm", "simA.mask", "simB.mask", "simA.beta", "simB.beta"});
  twice("train",
        "train --data " + dir + "simA.svm --family logistic --penalty dropout --delta 0.5 "
            "--estimator quad --normalize --seed 3 --out " + dir + "modelA.json",
        "train --data " + dir + "simA.svm --family logistic --penalty dropout --delta 0.5 "
            "--estimator quad --normalize --seed 3 --out " + dir + "modelB.json",
        {"modelA.json", "modelB.json"});
  twice("eval",
        "eval --model " + dir + "modelA.json --data " + dir + "simA.svm --mask " + dir +
            "simA.mask --out " + dir + "evalA.json",
        "eval --model " + dir + "modelA.json --data " + dir + "simA.svm --mask " + dir +
            "simA.mask --out " + dir + "evalB.json",
        {"evalA.json", "evalB.json"});
  twice("table3", "table3 --runs 2 --seed 7 --out " + dir + "t3A.json",
        "table3 --runs 2 --seed 7 --out " + dir + "t3B.json", {"t3A.json", "t3B.json"});
  twice("trace",
        "trace --n 60 --dim 10 --mc-samples 200 --seed 3 --out " + dir + "trA.json",
        "trace --n 60 --dim 10 --mc-samples 200 --seed 3 --out " + dir + "trB.json",
        {"trA.json", "trB.json"});
  twice("fisher",
        "fisher --n 3000 --dim 9 --active-dims 8 --seed 5 --out " + dir + "fiA.json",
        "fisher --n 3000 --dim 9 --active-dims 8 --seed 5 --out " + dir + "fiB.json",
        {"fiA.json", "fiB.json"});
  twice("fig1a", "fig1a --format csv --out " + dir + "f1A.csv",
        "fig1a --format csv --out " + dir + "f1B.csv", {"f1A.csv", "f1B.csv"});

  announce(10, "the command line interface is deterministic", c);
  INFO(c.notes);
  CHECK(c.ok);
}
