// Acceptance gate: one PASS/FAIL line per criterion, CSV of every study in
// the output directory (default acceptance_out). Exit status 0 only when
// every criterion passes.
//
//   acceptance [--out DIR] [--only 1,4,7]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "spbvem/error.hpp"
#include "spbvem/io.hpp"

using namespace spbvem;
namespace fs = std::filesystem;

namespace {

// Published errors (E^u, E^p, E^psi) on the first four refinements of each
// study: h = 1/5 .. 1/40, Voronoi h = 1/4 .. 1/32.
struct Reference {
  MeshFamily family;
  Domain domain;
  int k;
  std::vector<int> n;
  double err[4][3];
};

const std::vector<Reference> kReference = {
    {MeshFamily::Hex, Domain::UnitSquare, 1, {5, 10, 20, 40},
     {{1.311720e-02, 2.449411e-02, 8.705857e-03},
      {6.428537e-03, 1.221762e-02, 4.577561e-03},
      {3.232437e-03, 6.103906e-03, 2.345729e-03},
      {1.623956e-03, 3.052641e-03, 1.187052e-03}}},
    {MeshFamily::Hex, Domain::UnitSquare, 2, {5, 10, 20, 40},
     {{2.681120e-02, 4.503502e-02, 8.103336e-04},
      {6.049456e-03, 1.181225e-02, 2.221737e-04},
      {1.533453e-03, 3.019989e-03, 5.772350e-05},
      {3.893513e-04, 7.607732e-04, 1.468018e-05}}},
    {MeshFamily::NonConvex, Domain::UnitSquare, 1, {5, 10, 20, 40},
     {{2.002868e-02, 3.248449e-02, 1.051645e-02},
      {8.161245e-03, 1.427017e-02, 5.393170e-03},
      {3.621136e-03, 6.640047e-03, 2.730142e-03},
      {1.722770e-03, 3.201921e-03, 1.373356e-03}}},
    {MeshFamily::NonConvex, Domain::UnitSquare, 2, {5, 10, 20, 40},
     {{1.434075e-02, 2.543417e-02, 1.241960e-03},
      {3.361010e-03, 6.199488e-03, 3.220434e-04},
      {8.330459e-04, 1.548879e-03, 8.184041e-05},
      {2.077321e-04, 3.889136e-04, 2.061589e-05}}},
    {MeshFamily::Composite, Domain::UnitSquare, 1, {5, 10, 20, 40},
     {{1.700467e-02, 3.324558e-02, 7.411002e-03},
      {6.418063e-03, 8.366519e-03, 3.720487e-03},
      {2.918559e-03, 3.066089e-03, 1.861992e-03},
      {1.411469e-03, 1.542844e-03, 9.312391e-04}}},
    {MeshFamily::Composite, Domain::UnitSquare, 2, {5, 10, 20, 40},
     {{1.853717e-02, 3.539204e-02, 6.973699e-04},
      {4.086304e-03, 7.855160e-03, 1.755867e-04},
      {9.677780e-04, 1.888270e-03, 4.397411e-05},
      {2.349881e-04, 4.751719e-04, 1.099864e-05}}},
    {MeshFamily::Voronoi, Domain::LShape, 1, {4, 8, 16, 32},
     {{5.412799e-03, 1.761315e-02, 1.240271e-02},
      {2.089460e-03, 4.781077e-03, 6.441351e-03},
      {7.826530e-04, 1.341547e-03, 3.300835e-03},
      {3.606618e-04, 5.436234e-04, 1.474711e-03}}},
    {MeshFamily::Voronoi, Domain::LShape, 2, {4, 8, 16, 32},
     {{9.673890e-03, 2.603108e-02, 1.745202e-03},
      {1.324590e-03, 6.156831e-03, 4.313425e-04},
      {2.939265e-04, 1.583476e-03, 1.094255e-04},
      {5.019257e-05, 3.452908e-04, 2.263689e-05}}},
};

std::string label(const Reference& r) { return to_string(r.family) + " k=" + std::to_string(r.k); }

std::string fmt(double x, int prec = 3) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(prec) << x;
  return os.str();
}

class Gate {
 public:
  explicit Gate(fs::path out) : out_(std::move(out)) { fs::create_directories(out_); }

  const ConvergenceTable& study(const Reference& r) {
    const std::string key = label(r);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    StudyConfig cfg;
    cfg.family = r.family;
    cfg.domain = r.domain;
    cfg.k = r.k;
    cfg.n_values = r.n;
    std::cerr << "running " << key << " N =";
    for (int n : r.n) std::cerr << ' ' << n;
    std::cerr << std::endl;
    ConvergenceTable t = run_convergence(cfg, [](const ConvergenceRow& row) {
      std::cerr << "  N=" << row.n << " dofs=" << row.n_dofs << " " << fmt(row.seconds, 1) << " s"
                << (row.failure.empty() ? "" : " FAILED: " + row.failure) << std::endl;
    });
    const std::string csv = to_csv(t);
    std::ofstream(out_ / (to_string(r.family) + "_k" + std::to_string(r.k) + ".csv")) << csv;
    std::cout << "# " << key << "\n" << csv;
    return cache_.emplace(key, std::move(t)).first->second;
  }

  void report(int id, bool pass, const std::string& what) {
    results_[id] = pass;
    lines_[id] = "criterion " + std::to_string(id) + ": " + (pass ? "PASS" : "FAIL") + "  " + what;
    std::cout << lines_[id] << std::endl;
  }

  // the same lines again, in criterion order
  void summary() const {
    std::cout << "\n== acceptance summary\n";
    for (const auto& [id, line] : lines_) std::cout << line << '\n';
  }

  bool all_pass() const {
    return std::all_of(results_.begin(), results_.end(), [](const auto& kv) { return kv.second; });
  }

 private:
  fs::path out_;
  std::map<std::string, ConvergenceTable> cache_;
  std::map<int, bool> results_;
  std::map<int, std::string> lines_;
};

bool solved(const ConvergenceTable& t) {
  return std::all_of(t.rows.begin(), t.rows.end(), [](const ConvergenceRow& r) { return r.failure.empty(); });
}

// finest-pair rates against [k - below, k + above]
bool rates_ok(const ConvergenceTable& t, double below, double above, std::string& detail) {
  const auto& last = t.rows.back();
  if (!solved(t) || !last.rate_u || !last.rate_p || !last.rate_psi) {
    detail += " [unsolved rows]";
    return false;
  }
  bool ok = true;
  const double r[3] = {*last.rate_u, *last.rate_p, *last.rate_psi};
  detail += " [";
  for (int i = 0; i < 3; ++i) {
    const bool good = r[i] >= t.k - below && r[i] <= t.k + above;
    ok = ok && good;
    detail += std::string(i ? " " : "") + (i == 0 ? "u " : i == 1 ? "p " : "psi ") + fmt(r[i]) + (good ? "" : "!");
  }
  detail += "]";
  return ok;
}

void rate_criterion(Gate& g, int id, std::initializer_list<MeshFamily> fams, double below, double above) {
  bool pass = true;
  std::string detail;
  for (const auto& r : kReference)
    if (std::find(fams.begin(), fams.end(), r.family) != fams.end()) {
      detail += " " + label(r);
      pass = rates_ok(g.study(r), below, above, detail) && pass;
    }
  g.report(id, pass, "finest-pair rates" + detail);
}

void criterion4(Gate& g) {
  bool pass = true;
  double worst = 1.0;
  std::string where;
  for (const auto& r : kReference) {
    const auto& t = g.study(r);
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      if (!t.rows[i].failure.empty()) {
        pass = false;
        where = label(r) + " N=" + std::to_string(r.n[i]) + " unsolved";
        continue;
      }
      const double ours[3] = {t.rows[i].err.E_u, t.rows[i].err.E_p, t.rows[i].err.E_psi};
      for (int f = 0; f < 3; ++f) {
        const double ratio = ours[f] / r.err[i][f];
        const double off = std::max(ratio, 1.0 / ratio);
        if (off > worst) {
          worst = off;
          where = label(r) + " N=" + std::to_string(r.n[i]) + (f == 0 ? " E^u" : f == 1 ? " E^p" : " E^psi") +
                  " ours/published = " + fmt(ratio, 3);
        }
        if (!(ratio >= 0.1 && ratio <= 10.0)) pass = false;
      }
    }
  }
  g.report(4, pass, "errors within 10x of the published tables; worst factor " + fmt(worst, 2) + " at " + where);
}

void criterion5(Gate& g) {
  bool pass = true;
  std::string detail;
  for (const auto& r : kReference) {
    const auto& t = g.study(r);
    int lo = 1 << 30, hi = 0;
    for (const auto& row : t.rows) {
      if (!row.failure.empty()) {
        pass = false;
        continue;
      }
      lo = std::min(lo, row.outer_iterations);
      hi = std::max(hi, row.outer_iterations);
    }
    if (hi > 10 || hi - lo > 2) pass = false;
    detail += " " + label(r) + " " + std::to_string(lo) + ".." + std::to_string(hi);
  }
  g.report(5, pass, "outer iterations <= 10, spread <= 2:" + detail);
}

void criterion6(Gate& g) {
  const std::vector<std::string> suite = {SPBVEM_PROPERTY_TESTS};
  const auto t0 = std::chrono::steady_clock::now();
  bool pass = true;
  std::string failed;
  for (const auto& exe : suite) {
    const std::string cmd = "\"" + exe + "\" --gtest_brief=1 > /dev/null 2>&1";
    if (std::system(cmd.c_str()) != 0) {
      pass = false;
      failed += " " + fs::path(exe).filename().string();
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  pass = pass && secs < 60.0;
  g.report(6, pass,
           "property suite (" + std::to_string(suite.size()) + " binaries) in " + fmt(secs, 1) + " s" +
               (failed.empty() ? "" : ", failing:" + failed));
}

void criterion7(Gate& g) {
  std::vector<std::pair<std::string, PolygonalMesh>> meshes;
  meshes.emplace_back("hex", generate_distorted_hex(4, 0.2, 5));
  meshes.emplace_back("nonconvex", generate_nonconvex(3));
  meshes.emplace_back("composite", generate_composite_hanging(2, 4));
  meshes.emplace_back("voronoi", generate_voronoi(Domain::UnitSquare, 4, 5, 3));
  double worst = 0.0;
  std::string where;
  bool pass = true;
  for (int k = 1; k <= 3; ++k)
    for (const std::string scen : {"stokes", "potential", "coupled"})
      for (const auto& [name, mesh] : meshes) {
        const auto mc = patch_case(k, scen);
        Coefficients c;
        c.alpha0 = 0.0;
        try {
          const Discretization d(mesh, k);
          // iterate to well below the 1e-8 target so only the discretization is measured
          SolverConfig cfg;
          cfg.fixed_point_tol = 1e-12;
          const auto st = coupled_fixed_point(d, with_loads(c, mc), cfg, boundary_data(mc));
          const auto e = error_norms(d, st, mc);
          const double m = std::max({e.E_u, e.E_p, e.E_psi});
          if (m > worst) {
            worst = m;
            where = name + " k=" + std::to_string(k) + " " + scen;
          }
          if (!(m <= 1e-8)) pass = false;
        } catch (const Error& e) {
          pass = false;
          where = name + " k=" + std::to_string(k) + " " + scen + ": " + e.what();
        }
      }
  std::ostringstream os;
  os << "patch tests (alpha0 = 0, 4 meshes x k=1..3 x 3 cases): max error " << std::scientific << std::setprecision(2)
     << worst << " at " << where;
  g.report(7, pass, os.str());
}

}  // namespace

int main(int argc, char** argv) {
  fs::path out = "acceptance_out";
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--out" && i + 1 < argc) {
      out = argv[++i];
    } else if (a == "--only" && i + 1 < argc) {
      std::stringstream ss(argv[++i]);
      std::string tok;
      while (std::getline(ss, tok, ',')) only.insert(std::stoi(tok));
    } else {
      std::cerr << "usage: acceptance [--out DIR] [--only 1,2,...]\n";
      return 2;
    }
  }
  auto want = [&](int id) { return only.empty() || only.count(id); };
  Gate g(out);
  const auto t0 = std::chrono::steady_clock::now();
  // cheap criteria first
  if (want(7)) criterion7(g);
  if (want(6)) criterion6(g);
  if (want(1)) rate_criterion(g, 1, {MeshFamily::Hex}, 0.2, 0.2);
  if (want(2)) rate_criterion(g, 2, {MeshFamily::NonConvex, MeshFamily::Composite}, 0.2, 0.2);
  if (want(3)) rate_criterion(g, 3, {MeshFamily::Voronoi}, 0.25, 1e9);
  if (want(4)) criterion4(g);
  if (want(5)) criterion5(g);
  g.summary();
  std::cout << "total " << fmt(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(), 1)
            << " s, " << (g.all_pass() ? "all criteria pass" : "some criteria FAIL") << std::endl;
  return g.all_pass() ? 0 : 1;
}
