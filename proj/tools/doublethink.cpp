// doublethink: model-averaged hypothesis testing for linear regression.

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <iostream>
#include <numeric>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "doublethink/combiners.hpp"
#include "doublethink/csv.hpp"
#include "doublethink/ctp.hpp"
#include "doublethink/errors.hpp"
#include "doublethink/json_io.hpp"
#include "doublethink/scan.hpp"
#include "doublethink/selection.hpp"
#include "doublethink/service.hpp"
#include "doublethink/simlab.hpp"
#include "doublethink/xcrit.hpp"

using namespace doublethink;

namespace {

constexpr const char* kEnvPrefix = "DOUBLETHINK_";

std::string env(const std::string& name) { return kEnvPrefix + name; }

// shortest round-trip form for machine-readable output
std::string exact(double x) {
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return ec == std::errc() ? std::string(buf, end) : "nan";
}

std::string sig(double x, int digits = 4) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

class Table {
 public:
  explicit Table(std::vector<std::string> header) : header_(std::move(header)) {}
  void add(std::vector<std::string> row) { rows_.push_back(std::move(row)); }

  void print_tsv(std::ostream& out) const {
    auto line = [&](const std::vector<std::string>& r) {
      for (std::size_t k = 0; k < r.size(); ++k) out << (k ? "\t" : "") << r[k];
      out << '\n';
    };
    line(header_);
    for (const auto& r : rows_) line(r);
  }

  void print_text(std::ostream& out) const {
    std::vector<std::size_t> width(header_.size());
    for (std::size_t k = 0; k < header_.size(); ++k) width[k] = header_[k].size();
    for (const auto& r : rows_)
      for (std::size_t k = 0; k < r.size(); ++k) width[k] = std::max(width[k], r[k].size());
    auto line = [&](const std::vector<std::string>& r) {
      for (std::size_t k = 0; k < r.size(); ++k) {
        out << (k ? "  " : "") << r[k];
        if (k + 1 < r.size()) out << std::string(width[k] - r[k].size(), ' ');
      }
      out << '\n';
    };
    line(header_);
    for (const auto& r : rows_) line(r);
  }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

struct Common {
  double mu = 0.1;
  double h = 1.0;
  double tau = 9.0;
  double alpha = inference::kCensorThreshold;
  double rho = 1.0;
  std::string format = "table";
};

struct DataFlags {
  std::string csv;
  std::string outcome;
  std::string variance = "profile";
  bool intercept = false;
  std::vector<std::string> nuisance;
  int sub_analysis_nu = 0;
  int max_variables = kDefaultMaxVariables;
};

void add_hyper(CLI::App* cmd, Common& c) {
  cmd->add_option("--mu", c.mu, "Prior odds of inclusion per variable")->envname(env("MU"))->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--h", c.h, "Prior precision")->envname(env("H"))->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--tau", c.tau, "Posterior odds threshold")->envname(env("TAU"))->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--format", c.format, "Output format")
      ->envname(env("FORMAT"))
      ->check(CLI::IsMember({"table", "json", "tsv"}))
      ->capture_default_str();
}

void add_test_flags(CLI::App* cmd, Common& c) {
  cmd->add_option("--alpha", c.alpha, "Frequentist level for adjusted p-values")
      ->envname(env("ALPHA"))
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  cmd->add_option("--rho", c.rho, "Correlation threshold for indivisible groups")
      ->envname(env("RHO"))
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
}

void add_data(CLI::App* cmd, DataFlags& d) {
  cmd->add_option("csv", d.csv, "CSV file with a header row")->required()->check(CLI::ExistingFile);
  cmd->add_option("--outcome", d.outcome, "Outcome column (default: first column)")->envname(env("OUTCOME"));
  cmd->add_option("--variance", d.variance, "profile | known:<sigma^2>")
      ->envname(env("VARIANCE"))
      ->check(CLI::Validator(
          [](std::string& v) {
            try {
              parse_variance_mode(v);
            } catch (const Error& e) {
              return std::string(e.what());
            }
            return std::string();
          },
          "VARIANCE"))
      ->capture_default_str();
  cmd->add_flag("--intercept", d.intercept, "Fit an intercept in every model")->envname(env("INTERCEPT"));
  cmd->add_option("--nuisance", d.nuisance, "Columns included in every model")->envname(env("NUISANCE"));
  cmd->add_option("--sub-analysis-nu", d.sub_analysis_nu, "Total variable count when the CSV holds a subset")
      ->envname(env("SUB_ANALYSIS_NU"));
  cmd->add_option("--max-variables", d.max_variables, "Exhaustive-scan cap")->envname(env("MAX_VARIABLES"))->capture_default_str();
}

CsvOptions csv_options(const DataFlags& d) {
  CsvOptions o;
  o.outcome = d.outcome;
  o.nuisance = d.nuisance;
  o.intercept = d.intercept;
  o.variance = parse_variance_mode(d.variance);
  return o;
}

struct Analysis {
  linmodel::Dataset data;
  ExhaustiveScan scan;
  ctp::AnalysisContext ctx;
};

Analysis load(const DataFlags& d, const Common& c) {
  auto data = read_csv_file(d.csv, csv_options(d));
  const inference::Hyperparams hyper{c.mu, c.h, c.tau, static_cast<double>(data.n())};
  auto scan = scan_all_models(data, hyper, ScanOptions{d.max_variables});
  Analysis a{std::move(data), std::move(scan), {}};
  a.ctx.scan = &a.scan;
  a.ctx.corr = linmodel::correlation_matrix(a.data);
  a.ctx.declared_nu = d.sub_analysis_nu;
  return a;
}

std::string join(const std::vector<int>& idx, const std::vector<std::string>& names, const char* sep = ",") {
  std::string out;
  for (int j : idx) out += (out.empty() ? "" : sep) + names[j];
  return out;
}

// Report rows shared by analyze and test.
std::vector<std::string> report_header() {
  return {"tested", "k", "po", "p_unadj", "p_adj", "p_adj_raw", "fdr_bound", "reject_bayes", "reject_freq"};
}

std::vector<std::string> report_row(const std::string& label, const inference::TestReport& r, bool machine) {
  auto f = [&](double x) { return machine ? exact(x) : sig(x); };
  return {label,     std::to_string(r.tested_count), f(r.po),          f(r.p_unadj), f(r.p_adj), f(r.p_adj_raw),
          f(r.fdr_bound), r.rejected_bayes ? "yes" : "no", r.rejected_freq ? "yes" : "no"};
}

void emit(const Common& c, const Json& json, const std::vector<std::pair<std::string, Table>>& tables) {
  if (c.format == "json") {
    std::cout << json.dump(2) << '\n';
    return;
  }
  bool first = true;
  for (const auto& [title, table] : tables) {
    if (!first) std::cout << '\n';
    first = false;
    if (c.format == "tsv") {
      std::cout << "# " << title << '\n';
      table.print_tsv(std::cout);
    } else {
      std::cout << title << '\n';
      table.print_text(std::cout);
    }
  }
}

int cmd_analyze(const DataFlags& d, const Common& c, int top, int min_groups) {
  const auto a = load(d, c);
  const auto& names = a.scan.names();
  const int nu = a.scan.nu();
  const bool machine = c.format != "table";
  const auto policy = ctp::build_grouping(a.ctx.corr, c.rho);
  const auto& est = inference::coefficient_estimates(a.scan);

  ctp::TestOptions opt;
  opt.rho = c.rho;
  opt.alpha = c.alpha;
  opt.bypass_admissibility = true;

  struct Row {
    int j;
    inference::TestReport r;
  };
  std::vector<Row> rows;
  for (int j = 0; j < nu; ++j) rows.push_back({j, ctp::test_group(a.ctx, {j}, opt)});
  std::stable_sort(rows.begin(), rows.end(), [](const Row& x, const Row& y) { return x.r.log_po > y.r.log_po; });
  if (top > 0 && top < nu) rows.resize(top);

  std::vector<int> all(nu);
  std::iota(all.begin(), all.end(), 0);
  const auto grand = ctp::test_group(a.ctx, all, opt);

  auto f = [&](double x) { return machine ? exact(x) : sig(x); };
  Table vars({"variable", "po", "p_unadj", "p_adj", "p_adj_raw", "post_mean", "post_sd", "mle", "mle_se",
              "incl_prob", "admissible"});
  Json jvars = Json::array();
  for (const auto& row : rows) {
    const auto& e = est[row.j];
    const bool adm = policy.blocks[policy.block_of[row.j]].size() == 1;
    vars.add({names[row.j], f(row.r.po), f(row.r.p_unadj), f(row.r.p_adj), f(row.r.p_adj_raw), f(e.bayes_mean),
              f(e.bayes_se), f(e.classical_mean), f(e.classical_se), f(e.inclusion_prob), adm ? "yes" : "no"});
    Json jr = to_json(row.r);
    jr["variable"] = names[row.j];
    jr["estimate"] = to_json(e, names);
    jr["admissible"] = adm;
    jvars.push_back(jr);
  }

  Table groups(report_header());
  Json jgroups = Json::array();
  groups.add(report_row("(grand null)", grand, machine));
  for (const auto& block : policy.blocks) {
    if (block.size() < 2) continue;
    const auto r = ctp::test_group(a.ctx, block, opt);
    groups.add(report_row(join(block, names), r, machine));
    Json jr = to_json(r);
    jr["tested"] = names_of(block, names);
    jgroups.push_back(jr);
  }

  Json out = {{"n", a.data.n()},
              {"nu", nu},
              {"nu_total", a.ctx.nu_total()},
              {"hyper", to_json(a.scan.hyper())},
              {"alpha", c.alpha},
              {"fwer_bound", inference::fwer_threshold(a.scan.hyper(), a.ctx.nu_total())},
              {"variables", jvars},
              {"grand_null", to_json(grand)},
              {"grouping", to_json(policy, names)},
              {"group_tests", jgroups}};
  std::vector<std::pair<std::string, Table>> tables{{"Variables (ranked by posterior odds)", vars},
                                                    {"Grand null and correlated blocks at rho = " + sig(c.rho), groups}};
  if (min_groups > 0) {
    Table mg({"minimal_group", "size"});
    Json jm = Json::array();
    for (const auto& g : ctp::minimal_significant_groups(a.ctx, c.rho, c.tau, std::min(min_groups, nu))) {
      mg.add({join(g, names), std::to_string(g.size())});
      jm.push_back(names_of(g, names));
    }
    out["minimal_groups"] = jm;
    tables.emplace_back("Minimal significant groups", mg);
  }
  emit(c, out, tables);
  return 0;
}

int cmd_test(const DataFlags& d, const Common& c, const std::vector<std::string>& group, bool bypass) {
  const auto a = load(d, c);
  std::vector<int> tested;
  if (group.empty()) {
    tested.resize(a.scan.nu());
    std::iota(tested.begin(), tested.end(), 0);
  } else {
    tested = ctp::resolve_names(a.scan.names(), group);
  }
  ctp::TestOptions opt;
  opt.rho = c.rho;
  opt.alpha = c.alpha;
  opt.bypass_admissibility = bypass;
  const auto r = ctp::test_group(a.ctx, tested, opt);
  const bool machine = c.format != "table";
  Table t(report_header());
  t.add(report_row(join(tested, a.scan.names()), r, machine));
  Json out = to_json(r);
  out["tested"] = names_of(tested, a.scan.names());
  emit(c, out, {{"Test", t}});
  return 0;
}

int cmd_select(const DataFlags& d, const Common& c, int max_vars, double rho_cap) {
  const auto data = read_csv_file(d.csv, csv_options(d));
  const auto p = ctp::marginal_tests(data);
  const auto chosen = ctp::select_subset(data, std::min(max_vars, data.nu()), rho_cap);
  const bool machine = c.format != "table";
  Table t({"rank", "variable", "marginal_p"});
  Json out = Json::array();
  for (std::size_t m = 0; m < chosen.size(); ++m) {
    t.add({std::to_string(m + 1), data.names[chosen[m]], machine ? exact(p[chosen[m]]) : sig(p[chosen[m]])});
    out.push_back({{"rank", m + 1}, {"variable", data.names[chosen[m]]}, {"marginal_p", p[chosen[m]]}});
  }
  emit(c, {{"selected", out}, {"nu", data.nu()}, {"rho_cap", rho_cap}}, {{"Selected variables", t}});
  return 0;
}

struct TwoVarFlags {
  std::vector<double> n{145};
  std::vector<double> rho{0.0};
  std::vector<double> beta2{0.0};
  double sigma = 1.0;
  std::string target = "test-beta1";
  bool data_level = false;
  std::uint64_t replicates = 100000;
  std::uint64_t seed = 1;
};

int cmd_sim_twovar(const TwoVarFlags& f, const Common& c) {
  const auto target = f.target == "grand-null" ? simlab::TwoVarTarget::GrandNull : simlab::TwoVarTarget::TestBeta1;
  const bool machine = c.format != "table";
  Table t({"n", "rho", "beta2", "fpr", "se", "reference"});
  Json out = Json::array();
  for (double n : f.n) {
    for (double rho : f.rho) {
      simlab::TwoVarConfig cfg;
      cfg.n = n;
      cfg.mu = c.mu;
      cfg.h = c.h;
      cfg.tau = c.tau;
      cfg.rho = rho;
      cfg.sigma = f.sigma;
      cfg.beta2_grid = f.beta2;
      cfg.replicates = f.replicates;
      cfg.seed = f.seed;
      const auto r = f.data_level ? simlab::sim_two_variable_data(cfg, target) : simlab::sim_two_variable(cfg, target);
      for (const auto& p : r.points) {
        auto g = [&](double x) { return machine ? exact(x) : sig(x); };
        t.add({g(n), g(rho), g(p.beta2), g(p.fpr.p), g(p.fpr.se), g(p.reference)});
      }
      Json jr = to_json(r);
      jr["n"] = n;
      jr["rho"] = rho;
      out.push_back(jr);
    }
  }
  emit(c, {{"runs", out}, {"replicates", f.replicates}, {"seed", f.seed}},
       {{"Two-variable false positive rate (" + f.target + ")", t}});
  return 0;
}

struct PriorFlags {
  int nu = 15;
  int n = 145;
  std::vector<double> rho_levels{0.0, 0.3, 0.5, 0.8, 1.0};
  std::string design;
  std::string outcome;
  double synthetic_rho = 0.0;
  std::uint64_t replicates = 10000;
  std::uint64_t seed = 1;
  double strikeout_alpha = 0.0;
};

int cmd_sim_prior(const PriorFlags& f, const Common& c) {
  simlab::PriorSimConfig cfg;
  cfg.nu = f.nu;
  cfg.n = f.n;
  cfg.mu = c.mu;
  cfg.h = c.h;
  cfg.tau = c.tau;
  cfg.rho_levels = f.rho_levels;
  cfg.replicates = f.replicates;
  cfg.seed = f.seed;
  if (!f.design.empty()) {
    CsvOptions o;
    o.outcome = f.outcome;
    const auto data = read_csv_file(f.design, o);
    cfg.source = simlab::DesignSource::Template;
    cfg.design = data.X;
    cfg.nu = data.nu();
  } else {
    // exchangeable correlation among the synthetic columns
    cfg.design = Eigen::MatrixXd::Constant(f.nu, f.nu, f.synthetic_rho);
    cfg.design.diagonal().setOnes();
  }
  const auto r = simlab::sim_prior_bfwer(cfg);
  const bool machine = c.format != "table";
  auto g = [&](double x) { return machine ? exact(x) : sig(x); };
  Table t({"rho", "bfwer", "bfwer_se", "afwer", "afwer_se", "fwer_bound", "evalue_bound"});
  for (const auto& p : r.points)
    t.add({g(p.rho), g(p.bfwer.p), g(p.bfwer.se), g(p.afwer.p), g(p.afwer.se), g(r.fwer_threshold), g(r.evalue_bound)});
  Table fdr({"rejections", "mean_post_null", "se", "false_discovery", "se", "limit"});
  fdr.add({std::to_string(r.rejections), g(r.mean_post_null), g(r.mean_post_null_se), g(r.false_discovery.p),
           g(r.false_discovery.se), g(1.0 / (1.0 + c.tau))});
  Json out = to_json(r);
  std::vector<std::pair<std::string, Table>> tables{{"Bayes FWER by rho", t}, {"Marginal tests: Bayesian FDR", fdr}};
  if (f.strikeout_alpha > 0.0) {
    const auto s = simlab::strikeout_rate(cfg, simlab::marginal_tester(f.strikeout_alpha));
    Table st({"alpha", "strikeout", "se", "replicates_with_signal"});
    st.add({g(f.strikeout_alpha), g(s.p), g(s.se), std::to_string(s.trials)});
    out["strikeout"] = to_json(s);
    out["strikeout"]["alpha"] = f.strikeout_alpha;
    tables.emplace_back("Strikeout rate", st);
  }
  emit(c, out, tables);
  return 0;
}

int cmd_xcrit(const Common& c, std::uint64_t mc_draws, std::uint64_t seed) {
  const auto r = ctp::xcrit_threshold();
  Json out = to_json(r);
  const bool machine = c.format != "table";
  auto g = [&](double x) { return machine ? exact(x) : sig(x, 9); };
  Table t({"x_crit", "tail_prob", "mean2_tail"});
  t.add({g(r.x_crit), g(r.tail_prob), g(ctp::loggamma_mean2_tail(r.x_crit))});
  std::vector<std::pair<std::string, Table>> tables{{"Critical point", t}};
  if (mc_draws > 0) {
    Table mc({"k", "mc_tail", "se"});
    Json jm = Json::array();
    for (int k : {1, 2}) {
      const auto e = ctp::loggamma_mean_tail_mc(k, r.x_crit, mc_draws, seed);
      mc.add({std::to_string(k), g(e.p), g(e.se)});
      jm.push_back({{"k", k}, {"p", e.p}, {"se", e.se}, {"draws", e.draws}});
    }
    out["monte_carlo"] = jm;
    tables.emplace_back("Monte Carlo tail at x_crit", mc);
  }
  emit(c, out, tables);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Model-averaged Bayesian-frequentist hypothesis testing for linear regression"};
  app.set_help_flag("--help", "Print this help message and exit");
  app.require_subcommand(1);
  Common common;
  DataFlags data;

  auto* analyze = app.add_subcommand("analyze", "Scan all models and report per-variable and group tests");
  add_hyper(analyze, common);
  add_test_flags(analyze, common);
  add_data(analyze, data);
  int top = 0;
  int min_groups = 0;
  analyze->add_option("--top", top, "Show only the top N variables");
  analyze->add_option("--minimal-groups", min_groups, "Search minimal significant groups up to this size");

  auto* test = app.add_subcommand("test", "Test the intersection null of a group of variables");
  add_hyper(test, common);
  add_test_flags(test, common);
  add_data(test, data);
  std::vector<std::string> group;
  bool bypass = false;
  test->add_option("--group", group, "Variables in the tested set (default: all)");
  test->add_flag("--bypass-admissibility", bypass, "Allow sets that split a correlated block");

  auto* select = app.add_subcommand("select", "Rank by marginal p-value and pick a subset for scanning");
  add_data(select, data);
  select->add_option("--format", common.format)->check(CLI::IsMember({"table", "json", "tsv"}))->envname(env("FORMAT"));
  int max_vars = 15;
  double rho_cap = 0.8;
  select->add_option("--max-vars", max_vars, "Number of variables to keep")->capture_default_str();
  select->add_option("--rho-cap", rho_cap, "Skip candidates correlated above this with two admitted variables")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();

  auto* twovar = app.add_subcommand("sim-twovar", "Two-variable false positive rate simulation");
  add_hyper(twovar, common);
  TwoVarFlags tv;
  twovar->add_option("--n", tv.n, "Sample sizes")->capture_default_str();
  twovar->add_option("--rho", tv.rho, "Correlations between the two variables")->capture_default_str();
  twovar->add_option("--beta2", tv.beta2, "Grid of beta_2 values")->capture_default_str();
  twovar->add_option("--sigma", tv.sigma, "Noise standard deviation")->capture_default_str();
  twovar->add_option("--target", tv.target, "Null hypothesis")
      ->check(CLI::IsMember({"test-beta1", "grand-null"}))
      ->capture_default_str();
  twovar->add_flag("--data-level", tv.data_level, "Simulate outcomes and refit instead of drawing scores");
  twovar->add_option("--replicates", tv.replicates, "Replicates per grid point")->envname(env("REPLICATES"))->capture_default_str();
  twovar->add_option("--seed", tv.seed, "Random seed")->envname(env("SEED"))->capture_default_str();

  auto* prior = app.add_subcommand("sim-prior", "Bayes FWER and FDR under draws from the prior");
  add_hyper(prior, common);
  PriorFlags pf;
  prior->add_option("--nu", pf.nu, "Variables (synthetic design)")->capture_default_str();
  prior->add_option("--n", pf.n, "Sample size (synthetic design)")->capture_default_str();
  prior->add_option("--rho", pf.rho_levels, "Grouping thresholds to evaluate")->capture_default_str();
  prior->add_option("--design", pf.design, "CSV whose candidate columns form a template design")->check(CLI::ExistingFile);
  prior->add_option("--outcome", pf.outcome, "Column of the design CSV to drop as the outcome");
  prior->add_option("--synthetic-rho", pf.synthetic_rho, "Exchangeable correlation of the synthetic design")
      ->capture_default_str();
  prior->add_option("--replicates", pf.replicates, "Replicates")->envname(env("REPLICATES"))->capture_default_str();
  prior->add_option("--seed", pf.seed, "Random seed")->envname(env("SEED"))->capture_default_str();
  prior->add_option("--strikeout-alpha", pf.strikeout_alpha, "Also estimate the marginal-test strikeout rate at this level");

  auto* xcrit = app.add_subcommand("xcrit", "Solve for the critical point of the log-gamma tail comparison");
  xcrit->add_option("--format", common.format)->check(CLI::IsMember({"table", "json", "tsv"}))->envname(env("FORMAT"));
  std::uint64_t mc_draws = 0;
  std::uint64_t mc_seed = 1;
  xcrit->add_option("--mc-draws", mc_draws, "Monte Carlo cross-check draws");
  xcrit->add_option("--seed", mc_seed, "Random seed")->envname(env("SEED"));

  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP session service");
  std::string host = "127.0.0.1";
  int port = 8080;
  serve_cmd->add_option("--host", host, "Bind address")->envname(env("HOST"))->capture_default_str();
  serve_cmd->add_option("--port", port, "Port")->envname(env("PORT"))->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*analyze) return cmd_analyze(data, common, top, min_groups);
    if (*test) return cmd_test(data, common, group, bypass);
    if (*select) return cmd_select(data, common, max_vars, rho_cap);
    if (*twovar) return cmd_sim_twovar(tv, common);
    if (*prior) return cmd_sim_prior(pf, common);
    if (*xcrit) return cmd_xcrit(common, mc_draws, mc_seed);
    if (*serve_cmd) {
      Service service;
      HttpServer server(service);
      const int bound = server.bind(host, port);
      std::cerr << "listening on " << host << ":" << bound << '\n';
      server.listen();
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error (" << error_code_name(e.code()) << "): " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
