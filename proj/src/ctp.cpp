#include "doublethink/ctp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "doublethink/errors.hpp"

namespace doublethink::ctp {

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

void check_rho(double rho) {
  if (!(rho >= 0.0 && rho <= 1.0)) throw Error(ErrorCode::InvalidArgument, "rho must lie in [0, 1]");
}

}  // namespace

GroupingPolicy build_grouping(const linmodel::CorrelationMatrix& corr, double rho) {
  check_rho(rho);
  if (corr.rows() != corr.cols()) throw Error(ErrorCode::InvalidArgument, "correlation matrix must be square");
  const int nu = static_cast<int>(corr.rows());
  UnionFind uf(nu);
  for (int j = 0; j < nu; ++j)
    for (int k = j + 1; k < nu; ++k)
      if (std::abs(corr(j, k)) > rho) uf.unite(j, k);

  GroupingPolicy policy;
  policy.rho = rho;
  policy.block_of.assign(nu, -1);
  std::vector<int> root_block(nu, -1);
  for (int j = 0; j < nu; ++j) {
    const int r = uf.find(j);
    if (root_block[r] < 0) {
      root_block[r] = static_cast<int>(policy.blocks.size());
      policy.blocks.emplace_back();
    }
    policy.block_of[j] = root_block[r];
    policy.blocks[root_block[r]].push_back(j);
  }
  return policy;
}

std::optional<std::vector<int>> violating_block(const inference::NullHypothesis& null, const GroupingPolicy& policy) {
  for (const auto& block : policy.blocks) {
    std::size_t inside = 0;
    for (int j : block) inside += null.tested.contains(j);
    if (inside != 0 && inside != block.size()) return block;
  }
  return std::nullopt;
}

bool is_admissible(const inference::NullHypothesis& null, const GroupingPolicy& policy) {
  return !violating_block(null, policy).has_value();
}

double max_split_correlation(const inference::NullHypothesis& null, const linmodel::CorrelationMatrix& corr) {
  const int nu = static_cast<int>(corr.rows());
  double out = 0.0;
  for (int j = 0; j < nu; ++j) {
    if (!null.tested.contains(j)) continue;
    for (int k = 0; k < nu; ++k)
      if (!null.tested.contains(k)) out = std::max(out, std::abs(corr(j, k)));
  }
  return out;
}

int AnalysisContext::nu_total() const { return declared_nu > 0 ? declared_nu : scan->nu(); }

std::vector<int> resolve_names(const std::vector<std::string>& names, const std::vector<std::string>& requested) {
  std::vector<int> out;
  std::string missing;
  for (const auto& r : requested) {
    const auto it = std::find(names.begin(), names.end(), r);
    if (it == names.end()) {
      missing += missing.empty() ? r : ", " + r;
      continue;
    }
    out.push_back(static_cast<int>(it - names.begin()));
  }
  if (!missing.empty()) throw Error(ErrorCode::UnknownVariables, "unknown variables: " + missing);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

inference::TestReport test_group(const AnalysisContext& ctx, const std::vector<int>& tested, const TestOptions& options) {
  if (!ctx.scan) throw Error(ErrorCode::InvalidArgument, "analysis context has no scan");
  const int nu = ctx.scan->nu();
  if (ctx.declared_nu != 0 && ctx.declared_nu < nu)
    throw Error(ErrorCode::InvalidArgument, "declared variable count is below the scanned count");
  if (tested.empty()) throw Error(ErrorCode::EmptyTestedSet, "the tested set must be nonempty");
  for (int j : tested)
    if (j < 0 || j >= nu) throw Error(ErrorCode::UnknownVariables, "variable index " + std::to_string(j) + " out of range");

  const auto null = inference::NullHypothesis::of(tested);
  if (!options.bypass_admissibility) {
    const auto policy = build_grouping(ctx.corr, options.rho);
    if (auto block = violating_block(null, policy)) {
      std::string names;
      for (int j : *block) names += (names.empty() ? "" : ", ") + ctx.scan->names()[j];
      throw Error(ErrorCode::InadmissibleGroup, "tested set splits the block {" + names + "}");
    }
  }

  auto hyper = ctx.scan->hyper();
  if (options.tau) hyper.tau = *options.tau;
  const double lp = inference::log_model_averaged_po(*ctx.scan, null);
  auto report = inference::make_report(lp, null.size(), ctx.nu_total(), hyper, options.alpha);
  report.sub_analysis = ctx.sub_analysis();
  if (report.sub_analysis) {
    report.excluded = ctx.excluded;
    report.excluded_count = ctx.nu_total() - nu;
  }
  return report;
}

namespace {

// Z[U] = sum over s subset of U of exp(log PO_s - shift), by the subset-sum
// transform. Used only to screen candidates; reported sets are recomputed.
std::vector<double> subset_sums(const ExhaustiveScan& scan, double shift) {
  const auto lp = scan.log_po_values();
  std::vector<double> z(lp.size());
  for (std::size_t s = 0; s < lp.size(); ++s) z[s] = std::exp(lp[s] - shift);
  for (int j = 0; j < scan.nu(); ++j) {
    const std::size_t bit = std::size_t{1} << j;
    for (std::size_t s = 0; s < z.size(); ++s)
      if (s & bit) z[s] += z[s ^ bit];
  }
  return z;
}

}  // namespace

std::vector<std::vector<int>> minimal_significant_groups(const AnalysisContext& ctx, double rho, double tau,
                                                         int max_size, std::size_t node_budget) {
  if (!ctx.scan) throw Error(ErrorCode::InvalidArgument, "analysis context has no scan");
  if (!(tau > 0.0)) throw Error(ErrorCode::InvalidArgument, "tau must be positive");
  const int nu = ctx.scan->nu();
  if (max_size < 1 || max_size > nu) throw Error(ErrorCode::InvalidArgument, "max_size must lie in [1, nu]");
  const auto policy = build_grouping(ctx.corr, rho);
  const int nblocks = static_cast<int>(policy.blocks.size());

  std::vector<ModelId::Bits> block_mask(nblocks, 0);
  std::vector<int> block_size(nblocks);
  for (int b = 0; b < nblocks; ++b) {
    for (int j : policy.blocks[b]) block_mask[b] |= ModelId::Bits{1} << j;
    block_size[b] = static_cast<int>(policy.blocks[b].size());
  }

  const auto lp = ctx.scan->log_po_values();
  const double shift = *std::max_element(lp.begin(), lp.end());
  const auto z = subset_sums(*ctx.scan, shift);
  const ModelId::Bits full = ModelId::full(nu).bits();
  const double total = z[full];
  const double log_tau = std::log(tau);
  auto screen = [&](ModelId::Bits tested) {
    const double null_sum = z[full & ~tested];
    return std::log(std::max(total - null_sum, 0.0)) - std::log(null_sum) >= log_tau;
  };

  std::vector<std::vector<int>> found;
  std::size_t evaluated = 0;
  auto confirm = [&](ModelId::Bits tested) {
    const inference::NullHypothesis null{ModelId(tested)};
    if (inference::log_model_averaged_po(*ctx.scan, null) >= log_tau) found.push_back(null.tested.indices());
  };

  // Sets are bitmasks over block indices. A level-L union is minimal when it
  // rejects and none of its L sub-unions of L-1 blocks does; by the shortcut
  // property no smaller admissible subset can then reject either.
  struct Node {
    std::uint64_t blocks;
    ModelId::Bits vars;
    int size;
    int last;
  };
  std::vector<Node> frontier;
  std::unordered_set<std::uint64_t> quiet;  // non-rejecting sets at the current level
  for (int b = 0; b < nblocks; ++b) {
    if (block_size[b] > max_size) continue;
    if (++evaluated > node_budget)
      throw Error(ErrorCode::SearchBudgetExceeded, "group search exceeded its node budget");
    const Node node{std::uint64_t{1} << b, block_mask[b], block_size[b], b};
    if (screen(node.vars))
      confirm(node.vars);
    else {
      frontier.push_back(node);
      quiet.insert(node.blocks);
    }
  }

  while (!frontier.empty()) {
    std::vector<Node> next;
    std::unordered_set<std::uint64_t> next_quiet;
    for (const Node& node : frontier) {
      for (int b = node.last + 1; b < nblocks; ++b) {
        const int size = node.size + block_size[b];
        if (size > max_size) continue;
        const std::uint64_t blocks = node.blocks | (std::uint64_t{1} << b);
        bool all_quiet = true;
        for (std::uint64_t rest = node.blocks; rest && all_quiet; rest &= rest - 1)
          all_quiet = quiet.count(blocks & ~(rest & -rest)) > 0;
        if (!all_quiet) continue;
        if (++evaluated > node_budget)
          throw Error(ErrorCode::SearchBudgetExceeded, "group search exceeded its node budget");
        const Node child{blocks, node.vars | block_mask[b], size, b};
        if (screen(child.vars))
          confirm(child.vars);
        else {
          next.push_back(child);
          next_quiet.insert(child.blocks);
        }
      }
    }
    frontier = std::move(next);
    quiet = std::move(next_quiet);
  }

  std::stable_sort(found.begin(), found.end(),
                   [](const auto& a, const auto& b) { return a.size() != b.size() ? a.size() < b.size() : a < b; });
  return found;
}

}  // namespace doublethink::ctp
