#include "locc/tree.hpp"

#include "locc/random_ops.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <sstream>

namespace locc {

namespace {

constexpr double kRankCut = 1e-12;  // relative eigenvalue / singular value cutoff

CMat psd_sqrt(const CMat& h) {
  Eigen::SelfAdjointEigenSolver<CMat> es(h);
  Eigen::VectorXd s = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * s.asDiagonal() * es.eigenvectors().adjoint();
}

// Moore–Penrose inverse of the PSD square root: eigenvalues below
// kRankCut·λ_max count as kernel.
CMat pinv_sqrt(const CMat& h) {
  Eigen::SelfAdjointEigenSolver<CMat> es(h);
  const Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
  const double cut = kRankCut * std::max(ev.maxCoeff(), 1e-300);
  Eigen::VectorXd s(ev.size());
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    s(i) = ev(i) > cut ? 1.0 / std::sqrt(ev(i)) : 0.0;
  return es.eigenvectors() * s.asDiagonal() * es.eigenvectors().adjoint();
}

CMat kernel_projector(const CMat& h) {
  Eigen::SelfAdjointEigenSolver<CMat> es(h);
  const Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
  const double cut = kRankCut * std::max(ev.maxCoeff(), 1e-300);
  Eigen::VectorXd s(ev.size());
  for (Eigen::Index i = 0; i < ev.size(); ++i) s(i) = ev(i) > cut ? 0.0 : 1.0;
  return es.eigenvectors() * s.asDiagonal() * es.eigenvectors().adjoint();
}

CMat kernel_basis(const CMat& h) {
  Eigen::SelfAdjointEigenSolver<CMat> es(h);
  const Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
  const double cut = kRankCut * std::max(ev.maxCoeff(), 1e-300);
  std::vector<Eigen::Index> idx;
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (ev(i) <= cut) idx.push_back(i);
  CMat out(h.rows(), static_cast<Eigen::Index>(idx.size()));
  for (size_t c = 0; c < idx.size(); ++c)
    out.col(static_cast<Eigen::Index>(c)) = es.eigenvectors().col(idx[c]);
  return out;
}

struct ShapeInfo {
  int node_count = 0;
  bool ok = true;
};

// Structural pass: ids, edge shape, measuring parties, dimensions.
void check_shape(const LoccNode& n, const LoccTree& t, bool is_root,
                 int parent_measuring, std::set<int>& ids, ShapeInfo& info,
                 std::vector<TreeIssue>& issues) {
  ++info.node_count;
  if (info.node_count > kMaxTreeNodes) {
    issues.push_back({n.id, "node budget exceeded"});
    info.ok = false;
    return;
  }
  if (n.id < 0) {
    issues.push_back({n.id, "node id unassigned"});
    info.ok = false;
  } else if (!ids.insert(n.id).second) {
    issues.push_back({n.id, "duplicate node id"});
    info.ok = false;
  }
  if (is_root) {
    if (n.edge_party != 0 || n.edge_kraus.size() != 0) {
      issues.push_back({n.id, "root must not carry an edge"});
      info.ok = false;
    }
  } else {
    if (n.edge_party != parent_measuring) {
      issues.push_back({n.id, "edge party does not match parent's measuring party"});
      info.ok = false;
    }
    if (n.edge_party < 1 || n.edge_party > t.parties()) {
      issues.push_back({n.id, "edge party out of range"});
      info.ok = false;
    } else {
      const int d = t.dim_of(n.edge_party);
      if (n.edge_kraus.rows() != d || n.edge_kraus.cols() != d) {
        issues.push_back({n.id, "edge Kraus dimension mismatch"});
        info.ok = false;
      } else if (n.edge_kraus.norm() <= 1e-14) {
        issues.push_back({n.id, "edge Kraus is numerically zero"});
        info.ok = false;
      }
    }
  }
  if (n.leaf()) {
    if (n.measuring_party != 0) {
      issues.push_back({n.id, "leaf with a measuring party"});
      info.ok = false;
    }
  } else {
    if (n.measuring_party < 1 || n.measuring_party > t.parties()) {
      issues.push_back({n.id, "measuring party out of range"});
      info.ok = false;
      return;  // children edges cannot be checked meaningfully
    }
  }
  for (const LoccNode& c : n.children)
    check_shape(c, t, false, n.measuring_party, ids, info, issues);
}

LabeledNode accumulate_node(const LoccNode& n, const LoccTree& t,
                            std::vector<CMat>& prods) {
  LabeledNode out;
  out.id = n.id;
  out.measuring_party = n.measuring_party;
  out.edge_party = n.edge_party;
  out.edge_kraus = n.edge_kraus;
  out.labels.reserve(prods.size());
  for (const CMat& pi : prods) out.labels.push_back(pi.adjoint() * pi);
  for (const LoccNode& c : n.children) {
    if (c.edge_party < 1 || c.edge_party > t.parties())
      throw std::invalid_argument("accumulate: edge party out of range");
    const size_t a = static_cast<size_t>(c.edge_party - 1);
    if (c.edge_kraus.rows() != prods[a].rows() ||
        c.edge_kraus.cols() != prods[a].rows())
      throw std::invalid_argument("accumulate: Kraus dimension mismatch along path");
    CMat saved = prods[a];
    prods[a] = c.edge_kraus * prods[a];
    out.children.push_back(accumulate_node(c, t, prods));
    prods[a] = std::move(saved);
  }
  return out;
}

void push_into_first_same_party(LoccNode& n, int party, const CMat& k) {
  for (LoccNode& c : n.children) {
    if (c.edge_party == party)
      c.edge_kraus = c.edge_kraus * k;
    else
      push_into_first_same_party(c, party, k);
  }
}

// Splices out every single-outcome round below (and at) n.
void absorb_at(LoccNode& n) {
  while (n.children.size() == 1) {
    LoccNode child = std::move(n.children.front());
    const int beta = n.measuring_party;
    const CMat k = child.edge_kraus;
    n.measuring_party = child.measuring_party;
    n.children = std::move(child.children);
    push_into_first_same_party(n, beta, k);
  }
  for (LoccNode& c : n.children) absorb_at(c);
}

struct ChainCtx {
  int beta = 0;
  int d = 0;
  int node_id = -1;  // original node, for error reporting
  double tol = 1e-9;
};

LoccNode binarize_node(const LoccNode& n, const LoccTree& t,
                       const Tolerances& tols);

// Splits children [first..last] of an m-outcome measurement into a nested
// two-outcome chain. s is the accumulated Σ K†K of the peeled branches and
// tcomp the composed product of the residual Kraus operators so far (equal
// to √(I−s) in exact arithmetic).
LoccNode build_chain(const std::vector<LoccNode>& kids, size_t first,
                     const CMat& s, const CMat& tcomp, const ChainCtx& ctx,
                     const LoccTree& t, const Tolerances& tols) {
  const CMat eye = CMat::Identity(ctx.d, ctx.d);
  const CMat rest = eye - s;
  const CMat pis = pinv_sqrt(rest);
  const size_t m = kids.size();

  auto verify = [&](const CMat& composed, const CMat& original) {
    if (!nearly_equal(composed, original, tols.closure)) {
      std::ostringstream os;
      os << "binarize: composed branch product deviates by "
         << (composed - original).norm() << " at node " << ctx.node_id;
      throw BinarizeError(ctx.node_id, os.str());
    }
  };

  LoccNode out;
  out.measuring_party = ctx.beta;

  const CMat& ma = kids[first].edge_kraus;
  CMat a = ma * pis;
  verify(a * tcomp, ma);
  LoccNode branch_a = binarize_node(kids[first], t, tols);
  branch_a.edge_party = ctx.beta;
  branch_a.edge_kraus = a;

  if (first + 2 == m) {
    // Last level: the residual branch must compose to the final original
    // Kraus operator. X·√(I−s) misses the kernel of I−s, which is patched
    // with an isometry from that kernel into the orthocomplement of
    // range(X) so completeness still holds exactly.
    const CMat& mb = kids[first + 1].edge_kraus;
    CMat x = mb * pis;
    CMat ker = kernel_basis(rest);
    CMat b = x;
    if (ker.cols() > 0) {
      Eigen::JacobiSVD<CMat> svd(x, Eigen::ComputeFullU);
      const double smax = svd.singularValues().size()
                              ? svd.singularValues()(0)
                              : 0.0;
      Eigen::Index rank = 0;
      for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()(i) > kRankCut * std::max(smax, 1e-300)) ++rank;
      if (ctx.d - rank < ker.cols())
        throw BinarizeError(ctx.node_id,
                            "binarize: no room for the kernel patch at node " +
                                std::to_string(ctx.node_id));
      CMat vsub = svd.matrixU().rightCols(ker.cols());
      b = x + vsub * ker.adjoint();
    }
    verify(b * tcomp, mb);
    LoccNode branch_b = binarize_node(kids[first + 1], t, tols);
    branch_b.edge_party = ctx.beta;
    branch_b.edge_kraus = b;
    out.children.push_back(std::move(branch_a));
    out.children.push_back(std::move(branch_b));
    return out;
  }

  CMat s_next = s + ma.adjoint() * ma;
  CMat b = psd_sqrt(eye - s_next) * pis + kernel_projector(rest);
  LoccNode branch_b =
      build_chain(kids, first + 1, s_next, b * tcomp, ctx, t, tols);
  branch_b.edge_party = ctx.beta;
  branch_b.edge_kraus = b;
  out.children.push_back(std::move(branch_a));
  out.children.push_back(std::move(branch_b));
  return out;
}

LoccNode binarize_node(const LoccNode& n, const LoccTree& t,
                       const Tolerances& tols) {
  if (n.children.size() <= 2) {
    LoccNode out;
    out.id = n.id;
    out.measuring_party = n.measuring_party;
    out.edge_party = n.edge_party;
    out.edge_kraus = n.edge_kraus;
    for (const LoccNode& c : n.children)
      out.children.push_back(binarize_node(c, t, tols));
    return out;
  }
  ChainCtx ctx;
  ctx.beta = n.measuring_party;
  ctx.d = t.dim_of(ctx.beta);
  ctx.node_id = n.id;
  LoccNode out = build_chain(n.children, 0, CMat::Zero(ctx.d, ctx.d),
                             CMat::Identity(ctx.d, ctx.d), ctx, t, tols);
  out.id = n.id;
  out.edge_party = n.edge_party;
  out.edge_kraus = n.edge_kraus;
  return out;
}

// Subtrees match up to scalar factors on the edges: below the top pair the
// factors must have unit modulus or the outcome weights would change.
std::string scalar_isomorphic(const LoccNode& a, const LoccNode& b, bool top,
                              Complex& top_gamma, double tol) {
  std::optional<Complex> gamma;
  try {
    gamma = proportionality_general(b.edge_kraus, a.edge_kraus, tol);
  } catch (const std::invalid_argument&) {
    return "degenerate edge Kraus";
  }
  if (!gamma) return "edge Kraus not scalar-proportional";
  if (top)
    top_gamma = *gamma;
  else if (std::abs(std::abs(*gamma) - 1.0) > 1e-7)
    return "non-unimodular scalar below the merge point";
  if (a.measuring_party != b.measuring_party) return "measuring parties differ";
  if (a.children.size() != b.children.size()) return "branching differs";
  for (size_t i = 0; i < a.children.size(); ++i) {
    Complex unused;
    std::string why =
        scalar_isomorphic(a.children[i], b.children[i], false, unused, tol);
    if (!why.empty()) return why;
  }
  return {};
}

// Merge pass at one node; prefix holds the per-party ordered Kraus products
// leading into it. Returns the number of merges performed below.
int merge_at(LoccNode& n, std::vector<CMat>& prefix,
             const Tolerances& tols, std::vector<MergeIssue>& issues) {
  int merges = 0;
  if (!n.leaf()) {
    const size_t b = static_cast<size_t>(n.measuring_party - 1);
    bool changed = true;
    while (changed) {
      changed = false;
      for (size_t i = 0; i + 1 < n.children.size() && !changed; ++i) {
        for (size_t j = i + 1; j < n.children.size() && !changed; ++j) {
          const CMat& ki = n.children[i].edge_kraus;
          const CMat& kj = n.children[j].edge_kraus;
          CMat li = prefix[b].adjoint() * ki.adjoint() * ki * prefix[b];
          CMat lj = prefix[b].adjoint() * kj.adjoint() * kj * prefix[b];
          bool prop = false;
          try {
            prop = proportionality(lj, li, tols.cone).has_value();
          } catch (const std::invalid_argument&) {
            continue;  // zero labels are a validation problem, not ours
          }
          if (!prop) continue;

          LoccNode& ci = n.children[i];
          LoccNode& cj = n.children[j];
          if (ci.leaf() && cj.leaf()) {
            ci.edge_kraus = psd_sqrt(ki.adjoint() * ki + kj.adjoint() * kj);
            n.children.erase(n.children.begin() + static_cast<long>(j));
            ++merges;
            changed = true;
          } else if (!ci.leaf() && !cj.leaf()) {
            Complex gamma{};
            std::string why = scalar_isomorphic(ci, cj, true, gamma, tols.cone);
            if (why.empty()) {
              const double g2 = std::norm(gamma);
              ci.edge_kraus = std::sqrt(1.0 + g2) * ki;
              n.children.erase(n.children.begin() + static_cast<long>(j));
              ++merges;
              changed = true;
            } else {
              issues.push_back({n.id, "outcomes " + std::to_string(i) + "," +
                                          std::to_string(j) + ": " + why});
            }
          } else {
            issues.push_back({n.id, "outcomes " + std::to_string(i) + "," +
                                        std::to_string(j) +
                                        ": leaf paired with a subtree"});
          }
        }
      }
    }
    for (LoccNode& c : n.children) {
      const size_t a = static_cast<size_t>(c.edge_party - 1);
      CMat saved = prefix[a];
      prefix[a] = c.edge_kraus * prefix[a];
      merges += merge_at(c, prefix, tols, issues);
      prefix[a] = std::move(saved);
    }
  }
  return merges;
}

void throw_if_invalid(const LoccTree& t, const Tolerances& tols,
                      const char* who) {
  std::vector<TreeIssue> issues = validate_tree(t, tols);
  if (!issues.empty()) {
    std::ostringstream os;
    os << who << ": invalid tree, node " << issues.front().node_id << ": "
       << issues.front().what;
    if (issues.size() > 1) os << " (+" << issues.size() - 1 << " more)";
    throw std::invalid_argument(os.str());
  }
}

}  // namespace

LoccNode measure_node(int party,
                      std::vector<std::pair<CMat, LoccNode>> branches) {
  LoccNode n;
  n.measuring_party = party;
  for (auto& [k, sub] : branches) {
    LoccNode c = std::move(sub);
    c.edge_party = party;
    c.edge_kraus = std::move(k);
    n.children.push_back(std::move(c));
  }
  return n;
}

LoccTree make_tree(std::vector<int> dims, LoccNode root) {
  LoccTree t;
  t.dims = std::move(dims);
  t.root = std::move(root);
  assign_preorder_ids(t);
  return t;
}

void assign_preorder_ids(LoccTree& t) {
  int next = 0;
  std::function<void(LoccNode&)> walk = [&](LoccNode& n) {
    n.id = next++;
    for (LoccNode& c : n.children) walk(c);
  };
  walk(t.root);
}

int count_nodes(const LoccNode& n) {
  int k = 1;
  for (const LoccNode& c : n.children) k += count_nodes(c);
  return k;
}

int tree_depth(const LoccNode& n) {
  int d = 0;
  for (const LoccNode& c : n.children) d = std::max(d, 1 + tree_depth(c));
  return d;
}

LabeledNode accumulate(const LoccTree& t) {
  if (t.dims.empty())
    throw std::invalid_argument("accumulate: no parties");
  std::vector<CMat> prods;
  prods.reserve(t.dims.size());
  for (int d : t.dims) prods.push_back(CMat::Identity(d, d));
  return accumulate_node(t.root, t, prods);
}

std::vector<TreeIssue> validate_tree(const LoccTree& t,
                                     const Tolerances& tols) {
  std::vector<TreeIssue> issues;
  if (t.dims.empty()) {
    issues.push_back({-1, "no parties"});
    return issues;
  }
  for (int d : t.dims)
    if (d < 1) {
      issues.push_back({-1, "local dimension < 1"});
      return issues;
    }

  std::set<int> ids;
  ShapeInfo info;
  check_shape(t.root, t, true, 0, ids, info, issues);
  if (!info.ok) return issues;

  LabeledNode labeled = accumulate(t);
  std::function<void(const LabeledNode&)> walk = [&](const LabeledNode& n) {
    for (size_t a = 0; a < n.labels.size(); ++a)
      if (!validate_hermitian(n.labels[a], tols.herm, tols.psd))
        issues.push_back({n.id, "accumulated label for party " +
                                    std::to_string(a + 1) + " not PSD"});
    if (!n.leaf()) {
      const int beta = n.measuring_party;
      const int d = t.dim_of(beta);
      CMat sum_k = CMat::Zero(d, d);
      for (const LabeledNode& c : n.children)
        sum_k += c.edge_kraus.adjoint() * c.edge_kraus;
      if (!nearly_equal(sum_k, CMat::Identity(d, d), tols.closure))
        issues.push_back({n.id, "measurement not complete"});

      CMat sum_l = CMat::Zero(d, d);
      for (const LabeledNode& c : n.children)
        sum_l += c.labels[static_cast<size_t>(beta - 1)];
      if (!nearly_equal(sum_l, n.labels[static_cast<size_t>(beta - 1)],
                        tols.closure))
        issues.push_back({n.id, "children labels do not add up to the parent's"});
      for (const LabeledNode& c : n.children) walk(c);
    }
  };
  walk(labeled);
  return issues;
}

SeparableOperation extract_sep(const LoccTree& t, const Tolerances& tols) {
  throw_if_invalid(t, tols, "extract_sep");
  LabeledNode labeled = accumulate(t);
  std::vector<ProductOperator> raw;
  std::function<void(const LabeledNode&)> walk = [&](const LabeledNode& n) {
    if (n.leaf()) {
      ProductOperator o;
      o.weight = 1.0;
      o.locals = n.labels;
      raw.push_back(std::move(o));
    }
    for (const LabeledNode& c : n.children) walk(c);
  };
  walk(labeled);
  return make_sep(t.dims, raw, tols);
}

LoccTree absorb_isometries(const LoccTree& t, const Tolerances& tols) {
  throw_if_invalid(t, tols, "absorb_isometries");
  LoccTree out = t;
  absorb_at(out.root);
  assign_preorder_ids(out);
  return out;
}

LoccTree binarize(const LoccTree& t, const Tolerances& tols) {
  throw_if_invalid(t, tols, "binarize");
  LoccTree out;
  out.dims = t.dims;
  out.root = binarize_node(t.root, t, tols);
  assign_preorder_ids(out);
  return out;
}

MergeResult merge_proportional_outcomes(const LoccTree& t,
                                        const Tolerances& tols) {
  throw_if_invalid(t, tols, "merge_proportional_outcomes");
  MergeResult res;
  LoccTree out = t;
  std::vector<CMat> prefix;
  for (int d : out.dims) prefix.push_back(CMat::Identity(d, d));
  res.merges = merge_at(out.root, prefix, tols, res.issues);
  if (res.issues.empty()) {
    assign_preorder_ids(out);
    res.tree = std::move(out);
  }
  return res;
}

bool is_canonical(const LoccTree& t, const Tolerances& tols) {
  if (!validate_tree(t, tols).empty()) return false;
  LabeledNode labeled = accumulate(t);
  bool ok = true;
  std::function<void(const LabeledNode&)> walk = [&](const LabeledNode& n) {
    if (!ok || n.leaf()) return;
    if (n.children.size() != 2) {
      ok = false;
      return;
    }
    const size_t b = static_cast<size_t>(n.measuring_party - 1);
    if (proportionality(n.children[0].labels[b], n.children[1].labels[b],
                        tols.cone))
      ok = false;
    for (const LabeledNode& c : n.children) walk(c);
  };
  walk(labeled);
  return ok;
}

FullBinaryCheck full_binary_check(const LoccTree& t) {
  FullBinaryCheck out;
  out.ok = true;
  std::function<void(const LoccNode&)> walk = [&](const LoccNode& n) {
    if (n.leaf()) {
      ++out.leaf_count;
      return;
    }
    ++out.nonleaf_count;
    if (n.children.size() != 2 && out.ok) {
      out.ok = false;
      out.reason = "node " + std::to_string(n.id) + " has " +
                   std::to_string(n.children.size()) + " children";
    }
    for (const LoccNode& c : n.children) walk(c);
  };
  walk(t.root);
  if (out.ok && out.leaf_count != out.nonleaf_count + 1) {
    out.ok = false;
    out.reason = "leaf/non-leaf count mismatch";
  }
  return out;
}

CanonicalizeResult canonicalize(const LoccTree& t, const Tolerances& tols) {
  CanonicalizeResult res;
  LoccTree cur = t;
  for (int round = 0; round < 32; ++round) {
    const int before = count_nodes(cur.root);
    cur = absorb_isometries(cur, tols);
    const bool absorbed = count_nodes(cur.root) != before;

    MergeResult mr = merge_proportional_outcomes(cur, tols);
    if (!mr.tree) {
      res.issues = std::move(mr.issues);
      return res;
    }
    cur = std::move(*mr.tree);

    bool wide = false;
    std::function<void(const LoccNode&)> scan = [&](const LoccNode& n) {
      if (n.children.size() > 2) wide = true;
      for (const LoccNode& c : n.children) scan(c);
    };
    scan(cur.root);
    if (wide) {
      cur = binarize(cur, tols);
      continue;
    }
    if (!absorbed && mr.merges == 0) break;
  }
  if (!is_canonical(cur, tols)) {
    res.issues.push_back({cur.root.id, "tree did not reach canonical form"});
    return res;
  }
  res.tree = std::move(cur);
  return res;
}

std::vector<RayHit> lemma1_scan(const LoccTree& t,
                                const SeparableOperation& sep,
                                const Tolerances& tols) {
  throw_if_invalid(t, tols, "lemma1_scan");
  const int p = t.parties();

  std::vector<std::vector<CMat>> extreme_reps(static_cast<size_t>(p));
  std::vector<std::vector<int>> extreme_ids(static_cast<size_t>(p));
  for (int a = 1; a <= p; ++a) {
    ConeFamily fam = build_cone_family(sep, a, tols);
    ExtremalityReport rep = count_extreme_rays(fam, tols.cone);
    for (int c : rep.extreme_class_ids) {
      extreme_reps[static_cast<size_t>(a - 1)].push_back(
          fam.representatives[static_cast<size_t>(c)]);
      extreme_ids[static_cast<size_t>(a - 1)].push_back(c);
    }
  }

  LabeledNode labeled = accumulate(t);
  std::vector<RayHit> hits;
  // below(n) = bitmask of edge parties strictly inside n's subtree
  std::function<uint32_t(const LabeledNode&, bool)> walk =
      [&](const LabeledNode& n, bool is_root) -> uint32_t {
    uint32_t below = 0;
    for (const LabeledNode& c : n.children)
      below |= walk(c, false) | (1u << (c.edge_party - 1));
    for (int a = 1; a <= p; ++a) {
      const bool fresh = is_root || n.edge_party == a;
      if (!fresh || !(below & (1u << (a - 1)))) continue;
      const auto& reps = extreme_reps[static_cast<size_t>(a - 1)];
      for (size_t c = 0; c < reps.size(); ++c) {
        if (proportionality(n.labels[static_cast<size_t>(a - 1)], reps[c],
                            tols.cone)) {
          hits.push_back({n.id, a, extreme_ids[static_cast<size_t>(a - 1)][c]});
          break;
        }
      }
    }
    return below;
  };
  walk(labeled, true);
  return hits;
}

namespace {

struct LeafRef {
  std::vector<size_t> path;  // child indices from the root
  int depth = 0;
};

void collect_leaves(const LoccNode& n, std::vector<size_t>& path, int depth,
                    std::vector<LeafRef>& out) {
  if (n.leaf()) {
    out.push_back({path, depth});
    return;
  }
  for (size_t i = 0; i < n.children.size(); ++i) {
    path.push_back(i);
    collect_leaves(n.children[i], path, depth + 1, out);
    path.pop_back();
  }
}

LoccNode* node_at(LoccTree& t, const std::vector<size_t>& path) {
  LoccNode* n = &t.root;
  for (size_t i : path) n = &n->children[i];
  return n;
}

std::vector<CMat> prefix_products(const LoccTree& t,
                                  const std::vector<size_t>& path) {
  std::vector<CMat> prods;
  for (int d : t.dims) prods.push_back(CMat::Identity(d, d));
  const LoccNode* n = &t.root;
  for (size_t i : path) {
    n = &n->children[i];
    const size_t a = static_cast<size_t>(n->edge_party - 1);
    prods[a] = n->edge_kraus * prods[a];
  }
  return prods;
}

// Appends a chain of measurements below the leaf at `path` whose final leaf
// carries, per party, labels proportional to those of the leaf at `src`.
// The extracted operation then has one fewer distinct outcome than the tree
// has leaves. Returns false when numerically unsafe.
bool clone_labels_at(LoccTree& t, const std::vector<size_t>& src,
                     const std::vector<size_t>& dst, double tol_cone) {
  const int p = t.parties();
  std::vector<CMat> sprod = prefix_products(t, src);
  std::vector<CMat> dprod = prefix_products(t, dst);

  struct Step {
    int party;
    CMat g1, g2;
  };
  std::vector<Step> plan;
  for (int a = 1; a <= p; ++a) {
    const size_t ai = static_cast<size_t>(a - 1);
    CMat l = sprod[ai].adjoint() * sprod[ai];
    CMat m = dprod[ai].adjoint() * dprod[ai];
    try {
      if (proportionality(l, m, tol_cone)) continue;
    } catch (const std::invalid_argument&) {
      return false;
    }
    const CMat& pi = dprod[ai];
    Eigen::JacobiSVD<CMat> svd(pi);
    const auto& sv = svd.singularValues();
    if (sv(sv.size() - 1) < 1e-6 * sv(0)) return false;  // ill-conditioned path
    CMat piinv = pi.inverse();
    CMat y = piinv.adjoint() * l * piinv;
    y = 0.5 * (y + y.adjoint());
    Eigen::SelfAdjointEigenSolver<CMat> es(y, Eigen::EigenvaluesOnly);
    const double top = es.eigenvalues().maxCoeff();
    if (!(top > 0)) return false;
    const double c = 0.45 / top;
    CMat cy = c * y;
    CMat g1 = psd_sqrt(cy);
    CMat g2 = psd_sqrt(CMat::Identity(pi.rows(), pi.rows()) - cy);
    // Children labels c·L and M−c·L stay non-proportional because L and M
    // are; still guard against borderline numerics.
    CMat lab1 = pi.adjoint() * cy * pi;
    CMat lab2 = m - lab1;
    try {
      if (proportionality(lab1, lab2, tol_cone)) return false;
    } catch (const std::invalid_argument&) {
      return false;
    }
    plan.push_back({a, std::move(g1), std::move(g2)});
  }
  if (plan.empty()) return true;  // already a duplicate

  LoccNode* cur = node_at(t, dst);
  for (const Step& st : plan) {
    cur->measuring_party = st.party;
    LoccNode keep, drop;
    keep.edge_party = st.party;
    keep.edge_kraus = st.g1;
    drop.edge_party = st.party;
    drop.edge_kraus = st.g2;
    cur->children.push_back(std::move(keep));
    cur->children.push_back(std::move(drop));
    cur = &cur->children.front();
  }
  return true;
}

}  // namespace

LoccTree random_canonical_tree(const RandomTreeParams& params, uint64_t seed) {
  if (params.dims.empty())
    throw std::invalid_argument("random_canonical_tree: no parties");
  if (params.max_depth < 1)
    throw std::invalid_argument("random_canonical_tree: max_depth < 1");
  const int p = static_cast<int>(params.dims.size());
  const Tolerances tols;
  Rng rng(seed);
  std::uniform_int_distribution<int> pick_party(1, p);
  std::bernoulli_distribution make_leaf_here(params.leaf_prob);

  std::vector<CMat> prods;
  for (int d : params.dims) prods.push_back(CMat::Identity(d, d));

  std::function<LoccNode(int)> gen = [&](int depth) -> LoccNode {
    if (depth > 0 && (depth >= params.max_depth || make_leaf_here(rng)))
      return {};
    const int party = pick_party(rng);
    const size_t ai = static_cast<size_t>(party - 1);
    const int d = params.dims[ai];
    CMat k1, k2;
    for (int tries = 0;; ++tries) {
      std::tie(k1, k2) = random_kraus_pair(d, rng);
      CMat l1 = prods[ai].adjoint() * k1.adjoint() * k1 * prods[ai];
      CMat l2 = prods[ai].adjoint() * k2.adjoint() * k2 * prods[ai];
      if (!proportionality(l1, l2, tols.cone)) break;
      if (tries > 20)
        throw std::runtime_error("random_canonical_tree: cannot avoid proportional outcomes");
    }
    LoccNode n;
    n.measuring_party = party;
    for (const CMat* k : {&k1, &k2}) {
      LoccNode c;
      c.edge_party = party;
      c.edge_kraus = *k;
      CMat saved = prods[ai];
      prods[ai] = *k * prods[ai];
      LoccNode sub = gen(depth + 1);
      c.measuring_party = sub.measuring_party;
      c.children = std::move(sub.children);
      prods[ai] = std::move(saved);
      n.children.push_back(std::move(c));
    }
    return n;
  };

  LoccTree t;
  t.dims = params.dims;
  t.root = gen(0);

  for (int attempt = 0; attempt < params.duplication_attempts; ++attempt) {
    std::vector<LeafRef> leaves;
    std::vector<size_t> path;
    collect_leaves(t.root, path, 0, leaves);
    std::vector<size_t> dst_candidates;
    for (size_t i = 0; i < leaves.size(); ++i)
      if (leaves[i].depth + p <= params.max_depth) dst_candidates.push_back(i);
    if (dst_candidates.empty() || leaves.size() < 2) break;
    std::uniform_int_distribution<size_t> pick_dst(0, dst_candidates.size() - 1);
    const size_t dst = dst_candidates[pick_dst(rng)];
    std::uniform_int_distribution<size_t> pick_src(0, leaves.size() - 1);
    size_t src = pick_src(rng);
    if (src == dst) src = (src + 1) % leaves.size();
    clone_labels_at(t, leaves[src].path, leaves[dst].path, tols.cone);
  }

  assign_preorder_ids(t);
  if (count_nodes(t.root) > kMaxTreeNodes)
    throw std::runtime_error("random_canonical_tree: node budget exceeded");
  return t;
}

}  // namespace locc
