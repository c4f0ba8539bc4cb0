#include "pdbench/bart/bart.hpp"

#include "pdbench/core/error.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace pdbench::bart {

void BartConfig::validate() const {
  if (num_trees < 1) throw ConfigError("bart: num_trees must be >= 1");
  if (!(k > 0.0)) throw ConfigError("bart: k must be > 0");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("bart: alpha must lie in (0, 1)");
  if (!(beta >= 0.0)) throw ConfigError("bart: beta must be >= 0");
  if (!(nu > 0.0)) throw ConfigError("bart: nu must be > 0");
  if (!(q > 0.0 && q < 1.0)) throw ConfigError("bart: q must lie in (0, 1)");
  if (n_draws < 1) throw ConfigError("bart: n_draws must be >= 1");
  if (n_burn < 0) throw ConfigError("bart: n_burn must be >= 0");
  if (n_chains < 1) throw ConfigError("bart: n_chains must be >= 1");
}

double split_prior_prob(int depth, double alpha, double beta) {
  if (depth < 0) throw DomainError("split_prior_prob: negative depth");
  return alpha * std::pow(1.0 + depth, -beta);
}

namespace {

constexpr double kChangeProb = 0.44;

bool column_varies(const Matrix& x, const std::vector<Index>& rows, Index v) {
  const double first = x(rows.front(), v);
  for (auto r : rows) {
    if (x(r, v) != first) return true;
  }
  return false;
}

bool any_column_varies(const Matrix& x, const std::vector<Index>& rows) {
  if (rows.size() < 2) return false;
  for (Index v = 0; v < x.cols(); ++v) {
    if (column_varies(x, rows, v)) return true;
  }
  return false;
}

std::vector<Index> splittable_columns(const Matrix& x, const std::vector<Index>& rows) {
  std::vector<Index> out;
  if (rows.size() < 2) return out;
  for (Index v = 0; v < x.cols(); ++v) {
    if (column_varies(x, rows, v)) out.push_back(v);
  }
  return out;
}

// Distinct values of column v on `rows`, largest dropped, so that both sides
// of `x <= cut` are nonempty.
std::vector<double> cut_candidates(const Matrix& x, const std::vector<Index>& rows, Index v) {
  std::vector<double> vals;
  vals.reserve(rows.size());
  for (auto r : rows) vals.push_back(x(r, v));
  std::sort(vals.begin(), vals.end());
  vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
  vals.pop_back();
  return vals;
}

struct LeafStats {
  double n = 0.0;
  double sum = 0.0;
};

LeafStats stats(const std::vector<Index>& rows, const Vector& r) {
  LeafStats s;
  s.n = static_cast<double>(rows.size());
  for (auto i : rows) s.sum += r(i);
  return s;
}

// Leaf marginal likelihood with mu integrated out, up to terms common to all trees.
double leaf_loglik(const LeafStats& s, double sigma2, double tau2) {
  const double denom = sigma2 + s.n * tau2;
  return -0.5 * std::log(denom / sigma2) + 0.5 * s.sum * s.sum * tau2 / (sigma2 * denom);
}

double leaf_prior(bool growable, int depth, const BartConfig& c) {
  return growable ? std::log1p(-split_prior_prob(depth, c.alpha, c.beta)) : 0.0;
}

void split_rows(const Matrix& x, const std::vector<Index>& rows, Index v, double cut,
                std::vector<Index>& left, std::vector<Index>& right) {
  left.clear();
  right.clear();
  for (auto r : rows) (x(r, v) <= cut ? left : right).push_back(r);
}

struct MoveProbs {
  double birth = 0.0;
  double death = 0.0;
  double change = 0.0;
};

MoveProbs move_probs(std::size_t n_growable, std::size_t n_nog) {
  MoveProbs p;
  p.change = n_nog > 0 ? kChangeProb : 0.0;
  const double rest = 1.0 - p.change;
  if (n_growable == 0) {
    p.death = n_nog > 0 ? rest : 0.0;
  } else if (n_nog == 0) {
    p.birth = rest;
  } else {
    p.birth = p.death = 0.5 * rest;
  }
  return p;
}

bool is_nog(const SamplerTree& t, int id) {
  const auto& n = t.nodes[static_cast<std::size_t>(id)];
  return n.alive && !n.leaf() && t.nodes[static_cast<std::size_t>(n.left)].leaf() &&
         t.nodes[static_cast<std::size_t>(n.right)].leaf();
}

int add_node(SamplerTree& t, SamplerNode node) {
  for (std::size_t i = 0; i < t.nodes.size(); ++i) {
    if (!t.nodes[i].alive) {
      t.nodes[i] = std::move(node);
      return static_cast<int>(i);
    }
  }
  t.nodes.push_back(std::move(node));
  return static_cast<int>(t.nodes.size() - 1);
}

template <class T>
const T& pick(const std::vector<T>& v, Rng& rng) {
  std::uniform_int_distribution<std::size_t> d(0, v.size() - 1);
  return v[d(rng)];
}

}  // namespace

SamplerTree SamplerTree::root(const Matrix& x) {
  SamplerTree t;
  SamplerNode n;
  n.rows.resize(static_cast<std::size_t>(x.rows()));
  for (Index i = 0; i < x.rows(); ++i) n.rows[static_cast<std::size_t>(i)] = i;
  n.growable = any_column_varies(x, n.rows);
  t.nodes.push_back(std::move(n));
  return t;
}

std::size_t SamplerTree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const SamplerNode& n) { return n.alive && n.leaf(); }));
}

StepResult structure_step(SamplerTree& tree, const Matrix& x, const Vector& r, double sigma2,
                          double tau2, const BartConfig& c, Rng& rng) {
  std::vector<int> growable, nogs;
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    const auto& n = tree.nodes[i];
    if (!n.alive) continue;
    if (n.leaf() && n.growable) growable.push_back(static_cast<int>(i));
    if (is_nog(tree, static_cast<int>(i))) nogs.push_back(static_cast<int>(i));
  }
  const MoveProbs probs = move_probs(growable.size(), nogs.size());
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double u = unif(rng);
  StepResult res;
  std::vector<Index> left, right;

  if (u < probs.birth) {
    res.move = Move::Grow;
    const int id = pick(growable, rng);
    const SamplerNode& node = tree.nodes[static_cast<std::size_t>(id)];
    const auto vars = splittable_columns(x, node.rows);
    const Index v = pick(vars, rng);
    const auto cuts = cut_candidates(x, node.rows, v);
    const double cut = pick(cuts, rng);
    split_rows(x, node.rows, v, cut, left, right);
    const bool gl = any_column_varies(x, left), gr = any_column_varies(x, right);
    const int d = node.depth;

    const bool parent_was_nog = node.parent >= 0 && is_nog(tree, node.parent);
    const std::size_t nog_after = nogs.size() + 1 - (parent_was_nog ? 1 : 0);
    const std::size_t grow_after = growable.size() - 1 + (gl ? 1 : 0) + (gr ? 1 : 0);
    const MoveProbs after = move_probs(grow_after, nog_after);

    const double log_prior = std::log(split_prior_prob(d, c.alpha, c.beta)) + leaf_prior(gl, d + 1, c) +
                             leaf_prior(gr, d + 1, c) - leaf_prior(true, d, c);
    const double log_proposal = std::log(after.death / static_cast<double>(nog_after)) -
                                std::log(probs.birth / static_cast<double>(growable.size()));
    const double log_lik = leaf_loglik(stats(left, r), sigma2, tau2) + leaf_loglik(stats(right, r), sigma2, tau2) -
                           leaf_loglik(stats(node.rows, r), sigma2, tau2);
    if (std::log(unif(rng)) < log_prior + log_proposal + log_lik) {
      res.accepted = true;
      SamplerNode ln, rn;
      ln.parent = rn.parent = id;
      ln.depth = rn.depth = d + 1;
      ln.rows = std::move(left);
      rn.rows = std::move(right);
      ln.growable = gl;
      rn.growable = gr;
      const int li = add_node(tree, std::move(ln));
      const int ri = add_node(tree, std::move(rn));
      auto& target = tree.nodes[static_cast<std::size_t>(id)];
      target.var = static_cast<int>(v);
      target.cut = cut;
      target.left = li;
      target.right = ri;
      target.growable = false;
    }
  } else if (u < probs.birth + probs.death) {
    res.move = Move::Prune;
    const int id = pick(nogs, rng);
    const SamplerNode& node = tree.nodes[static_cast<std::size_t>(id)];
    const auto& ln = tree.nodes[static_cast<std::size_t>(node.left)];
    const auto& rn = tree.nodes[static_cast<std::size_t>(node.right)];
    const int d = node.depth;
    bool parent_becomes_nog = false;
    if (node.parent >= 0) {
      const auto& p = tree.nodes[static_cast<std::size_t>(node.parent)];
      const int sibling = p.left == id ? p.right : p.left;
      parent_becomes_nog = tree.nodes[static_cast<std::size_t>(sibling)].leaf();
    }
    const std::size_t nog_after = nogs.size() - 1 + (parent_becomes_nog ? 1 : 0);
    const std::size_t grow_after = growable.size() + 1 - (ln.growable ? 1 : 0) - (rn.growable ? 1 : 0);
    const MoveProbs after = move_probs(grow_after, nog_after);

    const double log_prior = -(std::log(split_prior_prob(d, c.alpha, c.beta)) + leaf_prior(ln.growable, d + 1, c) +
                               leaf_prior(rn.growable, d + 1, c) - leaf_prior(true, d, c));
    const double log_proposal = std::log(after.birth / static_cast<double>(grow_after)) -
                                std::log(probs.death / static_cast<double>(nogs.size()));
    const double log_lik = leaf_loglik(stats(node.rows, r), sigma2, tau2) - leaf_loglik(stats(ln.rows, r), sigma2, tau2) -
                           leaf_loglik(stats(rn.rows, r), sigma2, tau2);
    if (std::log(unif(rng)) < log_prior + log_proposal + log_lik) {
      res.accepted = true;
      auto& target = tree.nodes[static_cast<std::size_t>(id)];
      for (int child : {target.left, target.right}) {
        auto& ch = tree.nodes[static_cast<std::size_t>(child)];
        ch = SamplerNode{};
        ch.alive = false;
      }
      target.var = -1;
      target.cut = 0.0;
      target.left = target.right = -1;
      target.growable = true;
    }
  } else if (u < probs.birth + probs.death + probs.change) {
    res.move = Move::Change;
    const int id = pick(nogs, rng);
    const SamplerNode& node = tree.nodes[static_cast<std::size_t>(id)];
    const auto vars = splittable_columns(x, node.rows);
    const Index v = pick(vars, rng);
    const auto cuts = cut_candidates(x, node.rows, v);
    const double cut = pick(cuts, rng);
    split_rows(x, node.rows, v, cut, left, right);
    const auto& ln = tree.nodes[static_cast<std::size_t>(node.left)];
    const auto& rn = tree.nodes[static_cast<std::size_t>(node.right)];
    const bool gl = any_column_varies(x, left), gr = any_column_varies(x, right);
    const int d1 = node.depth + 1;
    const double log_prior = leaf_prior(gl, d1, c) + leaf_prior(gr, d1, c) - leaf_prior(ln.growable, d1, c) -
                             leaf_prior(rn.growable, d1, c);
    const double log_lik = leaf_loglik(stats(left, r), sigma2, tau2) + leaf_loglik(stats(right, r), sigma2, tau2) -
                           leaf_loglik(stats(ln.rows, r), sigma2, tau2) - leaf_loglik(stats(rn.rows, r), sigma2, tau2);
    if (std::log(unif(rng)) < log_prior + log_lik) {
      res.accepted = true;
      auto& target = tree.nodes[static_cast<std::size_t>(id)];
      target.var = static_cast<int>(v);
      target.cut = cut;
      auto& l = tree.nodes[static_cast<std::size_t>(target.left)];
      auto& rr = tree.nodes[static_cast<std::size_t>(target.right)];
      l.rows = std::move(left);
      rr.rows = std::move(right);
      l.growable = gl;
      rr.growable = gr;
    }
  }
  return res;
}

double BartPosterior::evaluate(std::size_t draw, const double* row, Index stride) const {
  const auto n_trees = static_cast<std::size_t>(config.num_trees);
  double f = 0.0;
  for (std::size_t j = 0; j < n_trees; ++j) {
    const StoredNode* t = nodes.data() + offsets[draw * n_trees + j];
    int k = 0;
    while (t[k].var >= 0) k = row[static_cast<Index>(t[k].var) * stride] <= t[k].cut ? t[k].left : t[k].right;
    f += t[k].mu;
  }
  return shift + scale * f;
}

namespace {

struct Chain {
  std::vector<StoredNode> nodes;
  std::vector<std::uint32_t> offsets;  // relative to this chain's nodes
  std::vector<double> sigma;
  Matrix fit;
  std::vector<std::uint64_t> counts;
};

void store_tree(const SamplerTree& t, std::vector<StoredNode>& out) {
  std::vector<int> order{0};
  std::vector<int> index_of(t.nodes.size(), -1);
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto& n = t.nodes[static_cast<std::size_t>(order[k])];
    index_of[static_cast<std::size_t>(order[k])] = static_cast<int>(k);
    if (!n.leaf()) {
      order.push_back(n.left);
      order.push_back(n.right);
    }
  }
  for (int id : order) {
    const auto& n = t.nodes[static_cast<std::size_t>(id)];
    StoredNode s;
    s.var = n.var;
    s.cut = n.cut;
    s.mu = n.mu;
    if (!n.leaf()) {
      s.left = index_of[static_cast<std::size_t>(n.left)];
      s.right = index_of[static_cast<std::size_t>(n.right)];
    }
    out.push_back(s);
  }
}

Chain run_chain(const Matrix& x, const Vector& ys, const BartConfig& c, double lambda, std::uint64_t seed,
                int keep) {
  Rng rng(seed);
  const Index n = x.rows();
  const auto n_trees = static_cast<std::size_t>(c.num_trees);
  const double tau = 0.5 / (c.k * std::sqrt(static_cast<double>(c.num_trees)));
  const double tau2 = tau * tau;
  std::vector<SamplerTree> trees(n_trees, SamplerTree::root(x));
  // every tree starts as a stump at mean / N
  std::vector<Vector> tree_fit(n_trees, Vector::Constant(n, ys.mean() / static_cast<double>(n_trees)));
  for (auto& t : trees) t.nodes[0].mu = ys.mean() / static_cast<double>(n_trees);
  Vector total = Vector::Constant(n, ys.mean());
  double sigma2 = lambda > 0.0 ? lambda : 1e-6;
  std::normal_distribution<double> normal(0.0, 1.0);
  std::chi_squared_distribution<double> chisq(c.nu + static_cast<double>(n));

  Chain out;
  out.fit.resize(keep, n);
  out.counts.assign(static_cast<std::size_t>(x.cols()), 0);
  Vector r(n);
  const int total_iter = c.n_burn + keep;
  for (int it = 0; it < total_iter; ++it) {
    for (std::size_t j = 0; j < n_trees; ++j) {
      r = ys - (total - tree_fit[j]);
      structure_step(trees[j], x, r, sigma2, tau2, c, rng);
      total -= tree_fit[j];
      for (auto& node : trees[j].nodes) {
        if (!node.alive || !node.leaf()) continue;
        double s = 0.0;
        for (auto i : node.rows) s += r(i);
        const double prec = static_cast<double>(node.rows.size()) / sigma2 + 1.0 / tau2;
        node.mu = (s / sigma2) / prec + normal(rng) / std::sqrt(prec);
        for (auto i : node.rows) tree_fit[j](i) = node.mu;
      }
      total += tree_fit[j];
    }
    // exact re-summation keeps the stored fit identical to the tree sum
    total.setZero();
    for (const auto& tf : tree_fit) total += tf;
    const double ssr = (ys - total).squaredNorm();
    sigma2 = (c.nu * lambda + ssr) / chisq(rng);
    if (it >= c.n_burn) {
      const int d = it - c.n_burn;
      for (const auto& t : trees) {
        out.offsets.push_back(static_cast<std::uint32_t>(out.nodes.size()));
        store_tree(t, out.nodes);
        for (const auto& node : t.nodes) {
          if (node.alive && !node.leaf()) ++out.counts[static_cast<std::size_t>(node.var)];
        }
      }
      out.fit.row(d) = total.transpose();
      out.sigma.push_back(std::sqrt(sigma2));
    }
  }
  return out;
}

}  // namespace

BartPosterior bart_fit(const Matrix& x, const Vector& y, const BartConfig& config, const Exec& exec) {
  config.validate();
  if (x.rows() < 1) throw FitError("bart: no training rows");
  if (y.size() != x.rows()) throw DataError("bart: target length does not match design rows");
  if (!y.allFinite() || !x.allFinite()) throw FitError("bart: non-finite training data");
  const Index n = x.rows();
  const Index p = x.cols();

  BartPosterior post;
  post.config = config;
  post.n_columns = static_cast<std::size_t>(p);
  const double range = y.maxCoeff() - y.minCoeff();
  post.shift = y.mean();
  post.scale = range > 0.0 ? range : 1.0;
  const Vector ys = (y.array() - post.shift) / post.scale;

  double sigma_hat = 0.0;
  if (n > p + 1) {
    Matrix design(n, p + 1);
    design.col(0).setOnes();
    design.rightCols(p) = x;
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(design);
    const Vector resid = ys - design * cod.solve(ys);
    sigma_hat = std::sqrt(resid.squaredNorm() / static_cast<double>(n - p - 1));
  } else if (n > 1) {
    sigma_hat = std::sqrt((ys.array() - ys.mean()).square().sum() / static_cast<double>(n - 1));
  }
  sigma_hat = std::max(sigma_hat, 1e-3);
  const boost::math::chi_squared_distribution<double> prior(config.nu);
  post.sigma_hat = sigma_hat * post.scale;
  const double lambda = sigma_hat * sigma_hat * boost::math::quantile(prior, 1.0 - config.q) / config.nu;
  post.lambda = lambda;

  const int chains = config.n_chains;
  std::vector<int> keep(static_cast<std::size_t>(chains), config.n_draws / chains);
  for (int i = 0; i < config.n_draws % chains; ++i) ++keep[static_cast<std::size_t>(i)];
  std::vector<Chain> results(static_cast<std::size_t>(chains));
  parallel_for(exec, results.size(), [&](std::size_t ch) {
    results[ch] = run_chain(x, ys, config, lambda, derive_seed(config.seed, 0x62617274u, ch), keep[ch]);
  });

  post.train_fit.resize(config.n_draws, n);
  post.variable_counts.assign(static_cast<std::size_t>(p), 0);
  Index row = 0;
  for (auto& ch : results) {
    const auto base = static_cast<std::uint32_t>(post.nodes.size());
    for (auto o : ch.offsets) post.offsets.push_back(base + o);
    post.nodes.insert(post.nodes.end(), ch.nodes.begin(), ch.nodes.end());
    for (double s : ch.sigma) post.sigma.push_back(s * post.scale);
    post.train_fit.middleRows(row, ch.fit.rows()) = (ch.fit.array() * post.scale + post.shift).matrix();
    row += ch.fit.rows();
    for (std::size_t v = 0; v < ch.counts.size(); ++v) post.variable_counts[v] += ch.counts[v];
  }
  return post;
}

Matrix posterior_draws(const BartPosterior& post, const Matrix& x) {
  if (static_cast<std::size_t>(x.cols()) != post.n_columns) {
    throw DataError("bart: prediction design has " + std::to_string(x.cols()) + " columns, expected " +
                    std::to_string(post.n_columns));
  }
  Matrix out(static_cast<Index>(post.draws()), x.rows());
  for (std::size_t d = 0; d < post.draws(); ++d) {
    for (Index i = 0; i < x.rows(); ++i) out(static_cast<Index>(d), i) = post.evaluate(d, x.data() + i, x.rows());
  }
  return out;
}

Matrix predictive_draws(const BartPosterior& post, const Matrix& x, std::uint64_t seed) {
  Matrix f = posterior_draws(post, x);
  Rng rng(derive_seed(seed, 0x6e6f697365u));
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Index d = 0; d < f.rows(); ++d) {
    for (Index i = 0; i < f.cols(); ++i) f(d, i) += post.sigma[static_cast<std::size_t>(d)] * normal(rng);
  }
  return f;
}

double quantile(std::vector<double> v, double p) {
  if (v.empty()) throw DomainError("quantile: empty sample");
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

BartPrediction bart_predict(const BartPosterior& post, const Matrix& x, std::uint64_t seed) {
  const Matrix f = posterior_draws(post, x);
  const Matrix pred = predictive_draws(post, x, seed);
  BartPrediction out;
  out.point = f.colwise().mean().transpose();
  const Index m = x.rows();
  out.lower80.resize(m);
  out.upper80.resize(m);
  out.lower95.resize(m);
  out.upper95.resize(m);
  for (Index i = 0; i < m; ++i) {
    std::vector<double> col(pred.col(i).data(), pred.col(i).data() + pred.rows());
    out.lower80(i) = quantile(col, 0.10);
    out.upper80(i) = quantile(col, 0.90);
    out.lower95(i) = quantile(col, 0.025);
    out.upper95(i) = quantile(col, 0.975);
  }
  return out;
}

const std::vector<std::uint64_t>& bart_variable_counts(const BartPosterior& post) { return post.variable_counts; }

nlohmann::json to_json(const BartPosterior& post, const BartPrediction& p) {
  nlohmann::json j;
  j["config"] = {{"num_trees", post.config.num_trees}, {"k", post.config.k},       {"alpha", post.config.alpha},
                 {"beta", post.config.beta},           {"nu", post.config.nu},     {"q", post.config.q},
                 {"n_draws", post.config.n_draws},     {"n_burn", post.config.n_burn}, {"seed", post.config.seed}};
  j["point"] = to_std(p.point);
  j["lower80"] = to_std(p.lower80);
  j["upper80"] = to_std(p.upper80);
  j["lower95"] = to_std(p.lower95);
  j["upper95"] = to_std(p.upper95);
  j["sigma"] = post.sigma;
  j["variable_counts"] = post.variable_counts;
  return j;
}

}  // namespace pdbench::bart
