#include <CLI11.hpp>
#include <json.hpp>

#include <complex>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include "selinv/pipeline.hpp"
#include "selinv/pmatrix.hpp"
#include "selinv/verify.hpp"

using namespace selinv;
using json = nlohmann::json;

namespace {

// exit codes shared by every subcommand
constexpr int kExitParse = 2;
constexpr int kExitSingular = 3;
constexpr int kExitVerifyFail = 4;
constexpr int kExitEquivFail = 5;

struct RunConfig {
  std::string matrix;
  std::string ordering = "mindeg";
  std::string grid = "1x1";
  std::uint64_t seed = 0;
  index_t relax_max = RelaxParams{}.max_snode_size;
  index_t relax_pad = RelaxParams{}.max_extra_zeros_per_col;
  std::string scalar = "real";
  bool json_out = false;

  std::string output;
  std::string stats_out;
  bool trace_check = false;
  bool check_diag_formula = false;
  bool perturb_pivots = false;
  double pivot_threshold = 0.0;  // 0 keeps the sqrt(eps)*||A|| default
  bool check = false;
  bool naive_collectives = false;
  bool shuffle_ties = false;
  index_t oracle_cap = 512;
  double tol = 1e-8;
};

void add_common_flags(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--matrix", cfg.matrix, "input Matrix Market file")->required();
  cmd->add_option("--ordering", cfg.ordering, "natural | mindeg | file:<path>");
  cmd->add_option("--seed", cfg.seed, "seed for every randomized choice");
  cmd->add_option("--relax-max", cfg.relax_max, "supernode size cap");
  cmd->add_option("--relax-pad", cfg.relax_pad, "extra explicit zeros allowed per column");
  cmd->add_option("--scalar", cfg.scalar, "real | complex")
      ->check(CLI::IsMember({"real", "complex"}));
  cmd->add_flag("--json", cfg.json_out, "emit the summary as JSON");
}

using Summary = std::vector<std::pair<std::string, json>>;

void print_summary(const Summary& s, bool as_json) {
  if (as_json) {
    json j = json::object();
    for (const auto& [k, v] : s) j[k] = v;
    std::cout << j.dump(2) << '\n';
    return;
  }
  for (const auto& [k, v] : s)
    std::cout << k << '=' << (v.is_string() ? v.get<std::string>() : v.dump()) << '\n';
}

template <class T>
CscMatrix<T> load_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'", 0);
  return mm_read<T>(in);
}

Permutation load_order_file(const std::string& path, index_t n) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open ordering file '" + path + "'", 0);
  std::vector<index_t> p;
  p.reserve(n);
  index_t v;
  while (in >> v) p.push_back(v);
  if (static_cast<index_t>(p.size()) != n)
    throw ParseError("ordering file holds " + std::to_string(p.size()) +
                         " indices, matrix needs " + std::to_string(n),
                     0);
  return Permutation(std::move(p));  // position i maps old index i to p[i]
}

PipelineOptions pipeline_options(const RunConfig& cfg, index_t n) {
  PipelineOptions opt;
  if (cfg.ordering == "natural") {
    opt.ordering = Ordering::Natural;
  } else if (cfg.ordering == "mindeg") {
    opt.ordering = Ordering::MinDegree;
  } else if (cfg.ordering.rfind("file:", 0) == 0) {
    opt.ordering = Ordering::External;
    opt.external_order = load_order_file(cfg.ordering.substr(5), n);
  } else {
    throw CLI::ValidationError("--ordering", "expected natural, mindeg or file:<path>");
  }
  opt.relax.max_snode_size = cfg.relax_max;
  opt.relax.max_extra_zeros_per_col = cfg.relax_pad;
  opt.factor.perturb_pivots = cfg.perturb_pivots;
  if (cfg.pivot_threshold > 0) opt.factor.pivot_threshold = cfg.pivot_threshold;
  return opt;
}

ProcGrid parse_grid(const std::string& s) {
  const auto x = s.find('x');
  int pr = 0, pc = 0;
  try {
    pr = std::stoi(s.substr(0, x));
    pc = std::stoi(s.substr(x + 1));
  } catch (const std::exception&) {
  }
  if (x == std::string::npos || pr < 1 || pc < 1)
    throw CLI::ValidationError("--grid", "expected PRxPC with both dims >= 1");
  return ProcGrid{pr, pc};
}

template <class T>
int cmd_selinv(const RunConfig& cfg) {
  auto a = load_matrix<T>(cfg.matrix);
  auto pl = run_pipeline(a, pipeline_options(cfg, a.n_cols));
  normalize(pl.fac);
  selected_inversion(pl.fac, cfg.check_diag_formula);
  auto sel = extract_selected(pl.fac, a);

  if (!cfg.output.empty()) {
    std::ofstream out(cfg.output);
    if (!out) throw std::runtime_error("cannot open output '" + cfg.output + "'");
    mm_write(sel, out);
  }

  Summary s;
  s.emplace_back("n", a.n_cols);
  s.emplace_back("nnz_A", a.nnz());
  s.emplace_back("nnz_LU", pl.fac.stored_nnz());
  s.emplace_back("factor_flops", pl.fac.flops.factor_flops);
  s.emplace_back("selinv_flops", pl.fac.flops.selinv_flops);
  s.emplace_back("perturbed_pivots", pl.fac.perturbed_pivots.size());
  if (cfg.trace_check) s.emplace_back("trace_dev", trace_identity_check(pl.fac, a));
  if (cfg.check_diag_formula) {
    double worst = 0;
    for (index_t k = 0; k < pl.part.count(); ++k)
      worst = std::max(worst, diag_step_crosscheck(pl.fac, k));
    s.emplace_back("diag_formula_dev", worst);
  }
  print_summary(s, cfg.json_out);
  return 0;
}

template <class T>
int cmd_factor(const RunConfig& cfg) {
  auto a = load_matrix<T>(cfg.matrix);
  auto pl = run_pipeline(a, pipeline_options(cfg, a.n_cols));
  Summary s;
  s.emplace_back("n", a.n_cols);
  s.emplace_back("nnz_A", a.nnz());
  s.emplace_back("nnz_LU", pl.fac.stored_nnz());
  s.emplace_back("supernodes", pl.part.count());
  s.emplace_back("factor_flops", pl.fac.flops.factor_flops);
  s.emplace_back("perturbed_pivots", pl.fac.perturbed_pivots.size());
  s.emplace_back("residual", factor_residual(pl.fac, a, 8, cfg.seed));
  print_summary(s, cfg.json_out);
  return 0;
}

template <class T>
int cmd_simulate(const RunConfig& cfg) {
  auto a = load_matrix<T>(cfg.matrix);
  auto pl = run_pipeline(a, pipeline_options(cfg, a.n_cols));
  normalize(pl.fac);
  const ProcGrid g = parse_grid(cfg.grid);
  const auto prio = schedule_priorities(pl.etree);

  auto pm = distribute(pl.fac, g);
  SimOptions so;
  so.seed = cfg.seed;
  so.naive_collectives = cfg.naive_collectives;
  so.shuffle_ties = cfg.shuffle_ties;
  const SimStats stats = parallel_selinv(pm, prio, so);

  double max_rel_dev = 0;
  if (cfg.check) {
    using ST = scalar_traits<T>;
    LUFactors<T> seq = pl.fac;
    selected_inversion(seq);
    LUFactors<T> par = pl.fac;
    gather(pm, par);
    // deviation relative to the inverted factors as a whole, so cancellation
    // inside one small block cannot dominate the report
    double dev = 0, scale = 0;
    for (index_t k = 0; k < pl.part.count(); ++k) {
      auto cmp = [&](const DenseBlock<T>& x, const DenseBlock<T>& y) {
        for (std::size_t i = 0; i < x.data().size(); ++i) {
          dev = std::max(dev, static_cast<double>(ST::abs(x.data()[i] - y.data()[i])));
          scale = std::max(scale, static_cast<double>(ST::abs(y.data()[i])));
        }
      };
      cmp(par.snodes[k].diag, seq.snodes[k].diag);
      for (std::size_t b = 0; b < seq.snodes[k].l_blocks.size(); ++b)
        cmp(par.snodes[k].l_blocks[b].data, seq.snodes[k].l_blocks[b].data);
      for (std::size_t b = 0; b < seq.snodes[k].u_blocks.size(); ++b)
        cmp(par.snodes[k].u_blocks[b].data, seq.snodes[k].u_blocks[b].data);
    }
    max_rel_dev = scale > 0 ? dev / scale : dev;
  }

  if (!cfg.stats_out.empty()) {
    std::ofstream out(cfg.stats_out);
    if (!out) throw std::runtime_error("cannot open stats file '" + cfg.stats_out + "'");
    stats_csv(stats, out);
  }

  Summary s;
  s.emplace_back("n", a.n_cols);
  s.emplace_back("grid", cfg.grid);
  s.emplace_back("supernodes", pl.part.count());
  s.emplace_back("total_messages", stats.total_messages);
  s.emplace_back("total_bytes", stats.total_bytes);
  s.emplace_back("critical_path_ticks", stats.critical_path);
  s.emplace_back("max_sends_per_collective", stats.max_sends_per_collective);
  s.emplace_back("max_sends_group_gt3", stats.max_sends_group_gt3);
  if (cfg.check) {
    const bool ok = max_rel_dev <= 1e-12;
    s.emplace_back("equivalence_max_rel_dev", max_rel_dev);
    s.emplace_back("equivalence", ok ? "pass" : "fail");
    print_summary(s, cfg.json_out);
    return ok ? 0 : kExitEquivFail;
  }
  print_summary(s, cfg.json_out);
  return 0;
}

template <class T>
int cmd_verify(const RunConfig& cfg) {
  auto a = load_matrix<T>(cfg.matrix);
  auto pl = run_pipeline(a, pipeline_options(cfg, a.n_cols));
  const double residual = factor_residual(pl.fac, a, 8, cfg.seed);
  normalize(pl.fac);
  selected_inversion(pl.fac);
  const double trace_dev = trace_identity_check(pl.fac, a);

  Summary s;
  s.emplace_back("n", a.n_cols);
  s.emplace_back("nnz_A", a.nnz());
  s.emplace_back("factor_residual", residual);
  s.emplace_back("trace_dev", trace_dev);

  bool ok = residual <= cfg.tol && trace_dev <= cfg.tol * a.n_cols;
  if (a.n_cols <= cfg.oracle_cap) {
    auto rep = compare_selected(extract_selected(pl.fac, a), a);
    s.emplace_back("oracle_compared", rep.compared);
    s.emplace_back("oracle_max_rel_dev", rep.max_rel_dev);
    s.emplace_back("oracle_diag_max_abs_dev", rep.diag_max_abs_dev);
    ok = ok && rep.within(cfg.tol);
  } else {
    s.emplace_back("oracle_compared", "skipped (n exceeds --oracle-cap)");
  }
  s.emplace_back("verify", ok ? "pass" : "fail");
  print_summary(s, cfg.json_out);
  return ok ? 0 : kExitVerifyFail;
}

template <class T>
int cmd_stats(const RunConfig& cfg) {
  auto a = load_matrix<T>(cfg.matrix);
  auto pl = run_pipeline(a, pipeline_options(cfg, a.n_cols));
  normalize(pl.fac);
  selected_inversion(pl.fac);
  Summary s;
  s.emplace_back("n", a.n_cols);
  s.emplace_back("nnz_A", a.nnz());
  s.emplace_back("nnz_LU", pl.fac.stored_nnz());
  s.emplace_back("supernodes", pl.part.count());
  s.emplace_back("tree_depth", pl.etree.tree_depth());
  s.emplace_back("factor_flops", pl.fac.flops.factor_flops);
  s.emplace_back("selinv_flops", pl.fac.flops.selinv_flops);
  s.emplace_back("flop_ratio", pl.fac.flops.factor_flops > 0
                                   ? static_cast<double>(pl.fac.flops.selinv_flops) /
                                         static_cast<double>(pl.fac.flops.factor_flops)
                                   : 0.0);
  print_summary(s, cfg.json_out);
  return 0;
}

template <int (*Real)(const RunConfig&), int (*Cplx)(const RunConfig&)>
int dispatch(const RunConfig& cfg) {
  return cfg.scalar == "complex" ? Cplx(cfg) : Real(cfg);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"selected inversion of sparse LU factors, with a deterministic "
               "simulator of the distributed schedule"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto* c_selinv = app.add_subcommand("selinv", "factor, invert and extract the selection");
  add_common_flags(c_selinv, cfg);
  c_selinv->add_option("--output", cfg.output, "write the selected entries here");
  c_selinv->add_flag("--trace-check", cfg.trace_check, "report |tr(A^-1 A) - n|");
  c_selinv->add_flag("--check-diag-formula", cfg.check_diag_formula,
                     "crosscheck the two diagonal-update expressions");
  c_selinv->add_flag("--perturb-pivots", cfg.perturb_pivots, "perturb tiny pivots");
  c_selinv->add_option("--pivot-threshold", cfg.pivot_threshold, "pivot magnitude floor");

  auto* c_factor = app.add_subcommand("factor", "factorization only");
  add_common_flags(c_factor, cfg);
  c_factor->add_flag("--perturb-pivots", cfg.perturb_pivots, "perturb tiny pivots");
  c_factor->add_option("--pivot-threshold", cfg.pivot_threshold, "pivot magnitude floor");

  auto* c_sim = app.add_subcommand("simulate", "distributed-schedule simulation");
  add_common_flags(c_sim, cfg);
  c_sim->add_option("--grid", cfg.grid, "process grid PRxPC");
  c_sim->add_option("--stats-out", cfg.stats_out, "write per-rank stats CSV here");
  c_sim->add_flag("--check", cfg.check, "assert equivalence with the sequential result");
  c_sim->add_flag("--naive-collectives", cfg.naive_collectives,
                  "star-shaped collectives instead of trees");
  c_sim->add_flag("--shuffle-ties", cfg.shuffle_ties,
                  "randomize order within priority levels (seeded)");

  auto* c_verify = app.add_subcommand("verify", "check against independent oracles");
  add_common_flags(c_verify, cfg);
  c_verify->add_option("--oracle-cap", cfg.oracle_cap,
                       "largest n for the dense-inverse comparison");
  c_verify->add_option("--tol", cfg.tol, "relative tolerance");

  auto* c_stats = app.add_subcommand("stats", "symbolic and flop statistics");
  add_common_flags(c_stats, cfg);

  CLI11_PARSE(app, argc, argv);

  try {
    if (c_selinv->parsed()) return dispatch<cmd_selinv<double>, cmd_selinv<std::complex<double>>>(cfg);
    if (c_factor->parsed()) return dispatch<cmd_factor<double>, cmd_factor<std::complex<double>>>(cfg);
    if (c_sim->parsed()) return dispatch<cmd_simulate<double>, cmd_simulate<std::complex<double>>>(cfg);
    if (c_verify->parsed()) return dispatch<cmd_verify<double>, cmd_verify<std::complex<double>>>(cfg);
    if (c_stats->parsed()) return dispatch<cmd_stats<double>, cmd_stats<std::complex<double>>>(cfg);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitParse;
  } catch (const SingularError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitSingular;
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitParse;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
