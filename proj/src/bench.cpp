// Copyright (c) 2026 The biotprec authors.
// SPDX-License-Identifier: BSD-3-Clause

#include "biotprec/bench.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <istream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

namespace biotprec {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

// ---------------------------------------------------------------------------
// Mandel analytics
// ---------------------------------------------------------------------------

Real MandelConfig::nu_undrained() const {
  const Real B = skempton;
  return (3.0 * nu + B * (1.0 - 2.0 * nu)) / (3.0 - B * (1.0 - 2.0 * nu));
}

Real MandelConfig::p0() const { return skempton * (1.0 + nu_undrained()) * F / (3.0 * a); }

PhysicalParams MandelConfig::physical() const {
  return PhysicalParams::from_youngs(E, nu, standard_shear, alpha, M, mu_f);
}

Real MandelConfig::consolidation_coeff() const {
  const PhysicalParams p = physical();
  return (k / mu_f) * (p.lambda + 2.0 * p.mu);
}

std::vector<Real> mandel_roots(Real nu, Real nu_u, int n_max) {
  if (!(nu_u > nu))
    throw std::invalid_argument("mandel_roots: nu_u must exceed nu (degenerate slope)");
  const Real kappa = (1.0 - nu) / (nu_u - nu);  // > 1 since nu_u < 1
  std::vector<Real> roots;
  roots.reserve(static_cast<size_t>(n_max));
  const Real pi = std::acos(-1.0);
  // tan runs from 0 to +inf on each branch ((n-1) pi, (n-1) pi + pi/2) and
  // kappa x crosses it exactly once there; the first root sits in (0, pi/2)
  // and is required for the series to reproduce the undrained initial state
  for (int n = 1; n <= n_max; ++n) {
    Real lo = (n - 1) * pi + 1e-14;
    Real hi = (n - 1) * pi + pi / 2 - 1e-14;
    auto f = [kappa](Real x) { return std::tan(x) - kappa * x; };
    // f(lo) < 0 < f(hi); bisect to 1e-14
    for (int it = 0; it < 200; ++it) {
      const Real mid = 0.5 * (lo + hi);
      if (f(mid) < 0)
        lo = mid;
      else
        hi = mid;
      if (hi - lo < 1e-14) break;
    }
    roots.push_back(0.5 * (lo + hi));
  }
  return roots;
}

Real mandel_pressure(Real x, Real t, const MandelConfig& cfg, const std::vector<Real>& roots) {
  if (t < 0) throw std::invalid_argument("mandel_pressure: negative time");
  const Real c = cfg.consolidation_coeff();
  Real sum = 0.0;
  for (size_t n = 0; n < roots.size(); ++n) {
    const Real an = roots[n];
    const Real coef = std::sin(an) / (an - std::sin(an) * std::cos(an));
    const Real term = coef * (std::cos(an * x / cfg.a) - std::cos(an)) *
                      std::exp(-an * an * c * t / (cfg.a * cfg.a));
    sum += term;
    if (n >= 2 && std::abs(term) < cfg.series_tol * std::abs(sum)) break;
  }
  return 2.0 * cfg.p0() * sum;
}

// ---------------------------------------------------------------------------
// Problem assembly
// ---------------------------------------------------------------------------

AssembledProblem assemble_problem(Problem problem, int N, Real nu, Real k,
                                  std::optional<Real> k_left, bool standard_shear) {
  return assemble_problem(problem, N, PhysicalParams::from_youngs(1e4, nu, standard_shear), k,
                          k_left);
}

AssembledProblem assemble_problem(Problem problem, int N, const PhysicalParams& params, Real k,
                                  std::optional<Real> k_left) {
  AssembledProblem ap;
  ap.mesh = (problem == Problem::Mandel2D) ? build_structured_square(N) : build_structured_cube(N);
  ap.tags = classify_boundary(ap.mesh, problem);
  ap.dofs = build_dof_maps(ap.mesh, ap.tags, bc_policy(problem));
  ap.params = params;

  ap.k_elem = Vec::Constant(ap.mesh.n_elements(), k);
  if (k_left) {
    for (int e = 0; e < ap.mesh.n_elements(); ++e)
      if (ap.mesh.element_centroid(e)[0] < 0.5) ap.k_elem[e] = *k_left;
  }

  ElasticityBlocks el = assemble_elasticity(ap.mesh, ap.params.mu, ap.params.lambda);
  DivBlocks div = assemble_div_coupling(ap.mesh);
  ap.blocks.A_bb = std::move(el.A_bb);
  ap.blocks.A_bl = std::move(el.A_bl);
  ap.blocks.A_ll = std::move(el.A_ll);
  ap.blocks.B_b = std::move(div.B_b);
  ap.blocks.B_l = std::move(div.B_l);
  ap.blocks.B_w = std::move(div.B_w);
  ap.blocks.M_w = assemble_flux_mass(ap.mesh, ap.params.mu_f, ap.k_elem);
  ap.blocks.M_p = assemble_p0_mass(ap.mesh);

  std::map<BoundaryLabel, Vec> tractions;
  if (problem == Problem::Mandel2D) {
    Vec t(2);
    t << 0.0, -1e4;  // total force F = 1e4 over the unit top edge
    tractions[BoundaryLabel::LoadPatch] = t;
  } else {
    Vec t(3);
    t << 0.0, 0.0, -3e4;
    tractions[BoundaryLabel::LoadPatch] = t;
  }
  const TractionLoad load = assemble_traction(ap.mesh, ap.tags, tractions);
  ap.blocks.load_bubble = load.bubble;
  ap.blocks.load_u_lin = load.u_lin;
  ap.blocks.load_p = Vec::Zero(ap.mesh.n_elements());
  ap.blocks.load_w = Vec::Zero(ap.mesh.n_facets());

  apply_essential_bcs(ap.blocks, ap.dofs);
  return ap;
}

PrecFamily family_of(const std::string& precond_id) {
  if (precond_id == "bd" || precond_id == "bde") return PrecFamily::Diagonal;
  if (precond_id == "bl" || precond_id == "ble") return PrecFamily::Lower;
  if (precond_id == "bu" || precond_id == "bue") return PrecFamily::Upper;
  throw std::invalid_argument("unknown preconditioner id: " + precond_id);
}

SystemVariant variant_of(const std::string& precond_id) {
  family_of(precond_id);  // validates
  return precond_id.size() == 3 ? SystemVariant::Eliminated : SystemVariant::Full;
}

namespace {

BiotSystem build_variant(const AssembledProblem& ap, SystemVariant variant, Real tau) {
  BiotSystem full = build_full_system(ap.blocks, ap.params, tau, ap.mesh.dim);
  if (variant == SystemVariant::Full) return full;
  BiotSystem diag = build_diag_bubble_system(full);
  if (variant == SystemVariant::DiagBubble) return diag;
  return eliminate_bubbles(diag);
}

SolveReport solve_system(const AssembledProblem& ap, const BiotSystem& sys,
                         const BlockPreconditioner& P, Real tol, int max_iters,
                         double setup_seconds) {
  const Vec u0 = Vec::Zero(ap.blocks.A_bb.rows() + ap.blocks.A_ll.rows());
  const Vec p0 = Vec::Zero(ap.blocks.M_p.rows());
  const Vec f0 = Vec::Zero(ap.blocks.M_p.rows());
  const Vec rhs = backward_euler_rhs(sys, ap.blocks, u0, p0, f0);

  const auto t0 = std::chrono::steady_clock::now();
  FgmresOptions opts;
  opts.tol = tol;
  opts.max_iters = max_iters;
  auto [x, report] = fgmres([&sys](const Vec& v) { return sys.apply(v); }, rhs,
                            [&P](const Vec& v) { return P.apply(v); }, opts);
  report.solve_seconds = seconds_since(t0);
  report.setup_seconds = setup_seconds;
  return report;
}

}  // namespace

SolveReport run_case(const RunSpec& spec) {
  if (variant_of(spec.precond) == SystemVariant::Eliminated &&
      spec.variant != SystemVariant::Eliminated)
    throw std::invalid_argument("run_case: " + spec.precond + " needs --variant elim");
  if (variant_of(spec.precond) == SystemVariant::Full &&
      spec.variant == SystemVariant::Eliminated)
    throw std::invalid_argument("run_case: " + spec.precond + " applies to the full/diag system");

  const auto t0 = std::chrono::steady_clock::now();
  const AssembledProblem ap =
      assemble_problem(spec.problem, spec.N, spec.nu, spec.k, spec.k_left, spec.standard_shear);
  const BiotSystem sys = build_variant(ap, spec.variant, spec.tau);
  const WeightedBlocks wb = build_weighted_blocks(sys);
  PrecOptions popts;
  popts.inexact = spec.inexact;
  popts.displacement_block_size =
      (spec.variant == SystemVariant::Eliminated) ? ap.mesh.dim : 0;
  const BlockPreconditioner P =
      make_benchmark_preconditioner(family_of(spec.precond), sys, wb, popts);
  const double setup = seconds_since(t0);

  SolveReport report = solve_system(ap, sys, P, spec.tol, spec.max_iters, setup);
  report.echo.problem = spec.problem == Problem::Mandel2D ? "mandel2d" : "footing3d";
  report.echo.variant = to_string(spec.variant);
  report.echo.precond = spec.precond;
  report.echo.inexact = spec.inexact;
  report.echo.h = 1.0 / spec.N;
  report.echo.tau = spec.tau;
  report.echo.nu = spec.nu;
  report.echo.k = spec.k;
  report.echo.k_jump = spec.k_left.value_or(spec.k);
  return report;
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

const char* kCsvHeader =
    "problem,variant,precond,inexact,h,tau,nu,k,k_jump,iters,converged,relres,setup_s,solve_s";

std::string csv_row(const SolveReport& r) {
  std::ostringstream os;
  os.precision(12);
  os << r.echo.problem << ',' << r.echo.variant << ',' << r.echo.precond << ','
     << (r.echo.inexact ? 1 : 0) << ',' << r.echo.h << ',' << r.echo.tau << ',' << r.echo.nu
     << ',' << r.echo.k << ',' << r.echo.k_jump << ',' << r.iterations << ','
     << (r.converged ? 1 : 0) << ',';
  os.precision(3);
  os << std::scientific << r.final_relres << ',' << r.setup_seconds << ',' << r.solve_seconds;
  return os.str();
}

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (!std::isspace(static_cast<unsigned char>(ch))) {
      cur.push_back(ch);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

int parse_h(const std::string& tok) {
  const auto slash = tok.find('/');
  if (slash != std::string::npos) {
    const double num = std::stod(tok.substr(0, slash));
    const double den = std::stod(tok.substr(slash + 1));
    return static_cast<int>(std::lround(den / num));
  }
  return static_cast<int>(std::lround(1.0 / std::stod(tok)));
}

}  // namespace

SweepSpec parse_sweep_config(std::istream& is) {
  SweepSpec spec;
  spec.variants.clear();
  spec.inexact.clear();
  spec.preconds.clear();
  spec.Ns.clear();
  spec.taus.clear();
  spec.nus.clear();
  spec.ks.clear();
  std::string line;
  while (std::getline(is, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = line.substr(0, eq);
    key.erase(std::remove_if(key.begin(), key.end(), ::isspace), key.end());
    const std::string value = line.substr(eq + 1);
    const auto toks = split(value, ',');
    if (key == "problem") {
      if (toks.at(0) == "mandel2d")
        spec.problem = Problem::Mandel2D;
      else if (toks.at(0) == "footing3d")
        spec.problem = Problem::Footing3D;
      else
        throw std::invalid_argument("sweep config: unknown problem " + toks.at(0));
    } else if (key == "variant") {
      for (const auto& t : toks) {
        if (t == "full")
          spec.variants.push_back(SystemVariant::Full);
        else if (t == "diag")
          spec.variants.push_back(SystemVariant::DiagBubble);
        else if (t == "elim")
          spec.variants.push_back(SystemVariant::Eliminated);
        else
          throw std::invalid_argument("sweep config: unknown variant " + t);
      }
    } else if (key == "inexact") {
      for (const auto& t : toks) {
        if (t == "both") {
          spec.inexact = {false, true};
        } else {
          spec.inexact.push_back(t == "1" || t == "true");
        }
      }
    } else if (key == "precond") {
      spec.preconds = toks;
      for (const auto& t : toks) family_of(t);
    } else if (key == "h") {
      for (const auto& t : toks) spec.Ns.push_back(parse_h(t));
    } else if (key == "tau") {
      for (const auto& t : toks) spec.taus.push_back(std::stod(t));
    } else if (key == "nu") {
      for (const auto& t : toks) spec.nus.push_back(std::stod(t));
    } else if (key == "k") {
      for (const auto& t : toks) spec.ks.push_back(std::stod(t));
    } else if (key == "k_left") {
      for (const auto& t : toks) spec.k_lefts.push_back(std::stod(t));
    } else if (key == "tol") {
      spec.tol = std::stod(toks.at(0));
    } else if (key == "max_iters") {
      spec.max_iters = std::stoi(toks.at(0));
    } else if (key == "standard_shear") {
      spec.standard_shear = toks.at(0) == "1" || toks.at(0) == "true";
    } else {
      throw std::invalid_argument("sweep config: unknown key " + key);
    }
  }
  if (spec.variants.empty()) spec.variants = {SystemVariant::Full};
  if (spec.inexact.empty()) spec.inexact = {false};
  if (spec.preconds.empty() || spec.Ns.empty() || spec.taus.empty() || spec.nus.empty() ||
      spec.ks.empty())
    throw std::invalid_argument("sweep config: empty grid");
  return spec;
}

namespace {

struct GroupKey {
  SystemVariant variant;
  Real nu, k;
  std::optional<Real> k_left;
  int N;
};

struct GridPoint {
  GroupKey group;
  Real tau;
  bool inexact;
  std::string precond;
  size_t row;
};

}  // namespace

std::vector<SolveReport> run_sweep(const SweepSpec& spec, std::ostream* csv, int jobs) {
  // enumerate the grid in spec order; group points that share an assembly
  std::vector<std::optional<Real>> k_lefts;
  if (spec.k_lefts.empty())
    k_lefts.push_back(std::nullopt);
  else
    for (Real kl : spec.k_lefts) k_lefts.push_back(kl);

  std::vector<GridPoint> points;
  for (SystemVariant variant : spec.variants)
    for (Real nu : spec.nus)
      for (Real k : spec.ks)
        for (const auto& kl : k_lefts)
          for (int N : spec.Ns)
            for (Real tau : spec.taus)
              for (bool inexact : spec.inexact)
                for (const auto& pid : spec.preconds) {
                  if (variant_of(pid) !=
                      (variant == SystemVariant::Eliminated ? SystemVariant::Eliminated
                                                            : SystemVariant::Full))
                    continue;
                  points.push_back({{variant, nu, k, kl, N}, tau, inexact, pid, points.size()});
                }

  std::vector<SolveReport> reports(points.size());

  // group boundaries: consecutive points sharing (variant, nu, k, kl, N)
  std::vector<std::pair<size_t, size_t>> groups;
  for (size_t i = 0; i < points.size();) {
    size_t j = i + 1;
    auto same = [&](const GroupKey& a, const GroupKey& b) {
      return a.variant == b.variant && a.nu == b.nu && a.k == b.k && a.N == b.N &&
             a.k_left.has_value() == b.k_left.has_value() &&
             a.k_left.value_or(0) == b.k_left.value_or(0);
    };
    while (j < points.size() && same(points[j].group, points[i].group)) ++j;
    groups.emplace_back(i, j);
    i = j;
  }

  std::mutex next_mutex;
  size_t next_group = 0;
  auto worker = [&]() {
    while (true) {
      size_t g;
      {
        std::lock_guard<std::mutex> lock(next_mutex);
        if (next_group >= groups.size()) return;
        g = next_group++;
      }
      const auto [begin, end] = groups[g];
      const GroupKey& key = points[begin].group;
      const auto t_assemble = std::chrono::steady_clock::now();
      const AssembledProblem ap = assemble_problem(spec.problem, key.N, key.nu, key.k, key.k_left,
                                                   spec.standard_shear);
      const double assemble_seconds = seconds_since(t_assemble);

      size_t i = begin;
      while (i < end) {
        const Real tau = points[i].tau;
        const auto t_sys = std::chrono::steady_clock::now();
        const BiotSystem sys = build_variant(ap, key.variant, tau);
        const WeightedBlocks wb = build_weighted_blocks(sys);
        const double sys_seconds = seconds_since(t_sys);
        // sub-solver factorizations shared by all families at this tau
        size_t j = i;
        while (j < end && points[j].tau == tau) ++j;
        for (bool inexact : {false, true}) {
          bool wanted = false;
          for (size_t q = i; q < j; ++q) wanted = wanted || (points[q].inexact == inexact);
          if (!wanted) continue;
          const auto t_sub = std::chrono::steady_clock::now();
          PrecOptions popts;
          popts.inexact = inexact;
          popts.displacement_block_size =
              (key.variant == SystemVariant::Eliminated) ? ap.mesh.dim : 0;
          // build one preconditioner per family, sharing sub-solvers
          const BlockPreconditioner proto =
              make_benchmark_preconditioner(PrecFamily::Diagonal, sys, wb, popts);
          const double sub_seconds = seconds_since(t_sub);
          for (size_t q = i; q < j; ++q) {
            if (points[q].inexact != inexact) continue;
            const PrecFamily family = family_of(points[q].precond);
            const auto t_fam = std::chrono::steady_clock::now();
            // rebuilding is cheap: factorizations live behind shared_ptr
            const BlockPreconditioner P = proto.with_family(family);
            const double fam_seconds = seconds_since(t_fam);
            SolveReport rep =
                solve_system(ap, sys, P, spec.tol, spec.max_iters,
                             assemble_seconds + sys_seconds + sub_seconds + fam_seconds);
            rep.echo.problem = spec.problem == Problem::Mandel2D ? "mandel2d" : "footing3d";
            rep.echo.variant = to_string(key.variant);
            rep.echo.precond = points[q].precond;
            rep.echo.inexact = inexact;
            rep.echo.h = 1.0 / key.N;
            rep.echo.tau = tau;
            rep.echo.nu = key.nu;
            rep.echo.k = key.k;
            rep.echo.k_jump = key.k_left.value_or(key.k);
            reports[points[q].row] = std::move(rep);
          }
        }
        i = j;
      }
    }
  };

  const int n_threads = std::max(1, std::min<int>(jobs, static_cast<int>(groups.size())));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  if (csv) {
    (*csv) << kCsvHeader << "\n";
    for (const auto& r : reports) (*csv) << csv_row(r) << "\n";
  }
  return reports;
}

// ---------------------------------------------------------------------------
// Timing and accuracy
// ---------------------------------------------------------------------------

TimingReport timing_scaling(Problem problem, SystemVariant variant,
                            const std::string& precond_id, const std::vector<int>& Ns, Real tau,
                            Real nu, Real k) {
  if (Ns.size() < 3)
    throw std::invalid_argument("timing_scaling: need at least 3 mesh sizes");
  TimingReport report;
  for (int N : Ns) {
    RunSpec spec;
    spec.problem = problem;
    spec.variant = variant;
    spec.precond = precond_id;
    spec.inexact = true;  // exact factorizations pollute the scaling
    spec.N = N;
    spec.tau = tau;
    spec.nu = nu;
    spec.k = k;
    const SolveReport rep = run_case(spec);
    const long elems = (problem == Problem::Mandel2D) ? 2L * N * N : 6L * N * N * N;
    report.points.push_back({elems, rep.solve_seconds, rep.iterations});
  }
  // least squares on log-log
  const size_t n = report.points.size();
  Real sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& p : report.points) {
    const Real x = std::log(static_cast<Real>(p.elements));
    const Real y = std::log(std::max(p.solve_seconds, 1e-9));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  report.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return report;
}

std::vector<AccuracyPoint> mandel_pressure_convergence(const std::vector<int>& Ns, Real t_final,
                                                       int steps, const MandelConfig& cfg) {
  std::vector<AccuracyPoint> out;
  const std::vector<Real> roots = mandel_roots(cfg.nu, cfg.nu_undrained(), 200);
  const Real tau = t_final / steps;
  for (int N : Ns) {
    const AssembledProblem ap =
        assemble_problem(Problem::Mandel2D, N, cfg.physical(), cfg.k, std::nullopt);
    const BiotSystem sys = build_full_system(ap.blocks, ap.params, tau, 2);
    const Factorization F = Factorization::compute(sys.assemble(), FactorKind::SparseLU);
    const Index nb = ap.blocks.A_bb.rows(), nl = ap.blocks.A_ll.rows(),
                np = ap.blocks.M_p.rows(), nw = ap.blocks.M_w.rows();
    Vec u = Vec::Zero(nb + nl), p = Vec::Zero(np);
    const Vec f0 = Vec::Zero(np);
    for (int s = 0; s < steps; ++s) {
      const Vec rhs = backward_euler_rhs(sys, ap.blocks, u, p, f0);
      const Vec x = F.solve(rhs);
      u = x.head(nb + nl);
      p = x.segment(nb + nl, np);
      (void)nw;
    }
    Real err2 = 0.0;
    for (int e = 0; e < ap.mesh.n_elements(); ++e) {
      const Vec c = ap.mesh.element_centroid(e);
      const Real exact = mandel_pressure(c[0], t_final, cfg, roots);
      err2 += ap.mesh.element_volume(e) * (p[e] - exact) * (p[e] - exact);
    }
    out.push_back({N, std::sqrt(err2)});
  }
  return out;
}

}  // namespace biotprec
