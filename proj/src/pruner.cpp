#include "locc/pruner.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

namespace locc {

namespace {

bool locals_match(const std::vector<CMat>& labels,
                  const ProductOperator& outcome, double tol) {
  for (size_t a = 0; a < labels.size(); ++a) {
    const double tr = labels[a].trace().real();
    if (tr <= 0) return false;
    if (!nearly_equal(labels[a] / tr, outcome.locals[a], tol)) return false;
  }
  return true;
}

}  // namespace

KeeperMarking select_keepers(const LoccTree& t, const SeparableOperation& sep,
                             const Tolerances& tols) {
  LabeledNode labeled = accumulate(t);
  KeeperMarking m;
  m.keeper_leaf.assign(sep.outcomes.size(), -1);

  // Preorder visit = left-to-right leaf order, so the last match per class
  // is the right-most one.
  std::function<void(const LabeledNode&)> walk = [&](const LabeledNode& n) {
    if (n.leaf()) {
      int hit = -1;
      for (size_t j = 0; j < sep.outcomes.size(); ++j)
        if (locals_match(n.labels, sep.outcomes[j], tols.cone)) {
          hit = static_cast<int>(j);
          break;
        }
      if (hit < 0)
        throw std::invalid_argument("select_keepers: leaf " +
                                    std::to_string(n.id) +
                                    " matches no outcome");
      m.leaf_outcome[n.id] = hit;
      m.keeper_leaf[static_cast<size_t>(hit)] = n.id;
      return;
    }
    for (const LabeledNode& c : n.children) walk(c);
  };
  walk(labeled);

  for (size_t j = 0; j < m.keeper_leaf.size(); ++j)
    if (m.keeper_leaf[j] < 0)
      throw std::invalid_argument("select_keepers: outcome " +
                                  std::to_string(j) + " has no leaf");
  for (int id : m.keeper_leaf) m.keepers.insert(id);
  return m;
}

int PruneWork::index_of(int id) const {
  for (size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i].id == id) return static_cast<int>(i);
  return -1;
}

int PruneWork::alive_count() const {
  int k = 0;
  for (const Node& n : nodes) k += n.alive ? 1 : 0;
  return k;
}

std::vector<int> PruneWork::alive_leaves() const {
  std::vector<int> out;
  for (size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i].alive && nodes[i].leaf()) out.push_back(static_cast<int>(i));
  return out;
}

bool PruneWork::subtree_has_keeper(int idx) const {
  const Node& n = nodes[static_cast<size_t>(idx)];
  if (n.leaf()) return n.keeper;
  return subtree_has_keeper(n.child[0]) || subtree_has_keeper(n.child[1]);
}

int PruneWork::subtree_size(int idx) const {
  const Node& n = nodes[static_cast<size_t>(idx)];
  if (n.leaf()) return 1;
  return 1 + subtree_size(n.child[0]) + subtree_size(n.child[1]);
}

bool PruneWork::is_descendant(int idx, int ancestor_idx) const {
  int cur = nodes[static_cast<size_t>(idx)].parent;
  while (cur >= 0) {
    if (cur == ancestor_idx) return true;
    cur = nodes[static_cast<size_t>(cur)].parent;
  }
  return false;
}

PruneWork make_prune_work(const LoccTree& t, const KeeperMarking& marking) {
  if (!is_canonical(t))
    throw std::invalid_argument("make_prune_work: tree is not canonical");
  LabeledNode labeled = accumulate(t);

  PruneWork w;
  std::function<int(const LabeledNode&, int)> build =
      [&](const LabeledNode& n, int parent) -> int {
    const int idx = static_cast<int>(w.nodes.size());
    PruneWork::Node node;
    node.id = n.id;
    node.parent = parent;
    node.edge_party = n.edge_party;
    node.labels = n.labels;
    if (n.leaf()) {
      auto it = marking.leaf_outcome.find(n.id);
      if (it == marking.leaf_outcome.end())
        throw std::invalid_argument("make_prune_work: unmarked leaf " +
                                    std::to_string(n.id));
      node.outcome = it->second;
      node.keeper = marking.is_keeper(n.id);
    }
    w.nodes.push_back(std::move(node));
    for (size_t c = 0; c < n.children.size(); ++c)
      w.nodes[static_cast<size_t>(idx)].child[c] =
          build(n.children[c], idx);
    return idx;
  };
  build(labeled, -1);
  w.root = 0;
  return w;
}

int grow_maximal_keeperless(const PruneWork& w, int leaf_idx) {
  const PruneWork::Node& leaf = w.nodes[static_cast<size_t>(leaf_idx)];
  if (!leaf.alive || !leaf.leaf() || leaf.keeper)
    throw std::invalid_argument("grow_maximal_keeperless: not a live non-keeper leaf");
  int cur = leaf_idx;
  while (true) {
    const int par = w.nodes[static_cast<size_t>(cur)].parent;
    if (par < 0) break;  // whole tree keeperless: cannot happen with N ≥ 1
    const PruneWork::Node& p = w.nodes[static_cast<size_t>(par)];
    const int sib = p.child[0] == cur ? p.child[1] : p.child[0];
    if (w.subtree_has_keeper(sib)) break;
    cur = par;
  }
  return cur;
}

RemovalKind classify_removal(const PruneWork& w, int t_root) {
  const int np = w.nodes[static_cast<size_t>(t_root)].parent;
  if (np < 0)
    throw std::invalid_argument("classify_removal: subtree has no parent");

  std::vector<int> stack{t_root};
  while (!stack.empty()) {
    const int idx = stack.back();
    stack.pop_back();
    const PruneWork::Node& n = w.nodes[static_cast<size_t>(idx)];
    if (n.leaf()) {
      // Keeper of this leaf's class outside n_p's subtree forces type-1.
      const int keeper_idx = [&] {
        for (size_t i = 0; i < w.nodes.size(); ++i)
          if (w.nodes[i].alive && w.nodes[i].leaf() && w.nodes[i].keeper &&
              w.nodes[i].outcome == n.outcome)
            return static_cast<int>(i);
        return -1;
      }();
      if (keeper_idx < 0)
        throw std::logic_error("classify_removal: keeper missing for class " +
                               std::to_string(n.outcome));
      if (!w.is_descendant(keeper_idx, np)) return RemovalKind::Type1;
    } else {
      stack.push_back(n.child[0]);
      stack.push_back(n.child[1]);
    }
  }
  return RemovalKind::Type2;
}

RemovalRecord apply_removal(PruneWork& w, int t_root, RemovalKind kind,
                            bool with_snapshot) {
  const int np = w.nodes[static_cast<size_t>(t_root)].parent;
  if (np < 0) throw std::logic_error("apply_removal: subtree has no parent");
  PruneWork::Node& pnode = w.nodes[static_cast<size_t>(np)];
  const int nc = pnode.child[0] == t_root ? pnode.child[1] : pnode.child[0];

  RemovalRecord rec;
  rec.kind = kind;
  rec.t_root_id = w.nodes[static_cast<size_t>(t_root)].id;
  rec.removed_nodes = w.subtree_size(t_root) + 1;

  std::function<void(int)> kill = [&](int idx) {
    PruneWork::Node& n = w.nodes[static_cast<size_t>(idx)];
    n.alive = false;
    if (!n.leaf()) {
      kill(n.child[0]);
      kill(n.child[1]);
    }
  };
  kill(t_root);

  if (kind == RemovalKind::Type1) {
    // n_p goes too; its parent adopts n_c in n_p's slot.
    const int g = pnode.parent;
    if (g < 0)
      throw std::logic_error("apply_removal: type-1 at the root");
    rec.extra_id = pnode.id;
    rec.extra_was_leaf = pnode.leaf();
    pnode.alive = false;
    PruneWork::Node& gnode = w.nodes[static_cast<size_t>(g)];
    if (gnode.child[0] == np)
      gnode.child[0] = nc;
    else
      gnode.child[1] = nc;
    w.nodes[static_cast<size_t>(nc)].parent = g;
  } else {
    // n_c goes; its children become n_p's children, order preserved.
    PruneWork::Node& cnode = w.nodes[static_cast<size_t>(nc)];
    rec.extra_id = cnode.id;
    rec.extra_was_leaf = cnode.leaf();
    if (cnode.leaf())
      throw std::logic_error("apply_removal: type-2 sibling is a leaf");
    cnode.alive = false;
    pnode.child = cnode.child;
    w.nodes[static_cast<size_t>(cnode.child[0])].parent = np;
    w.nodes[static_cast<size_t>(cnode.child[1])].parent = np;
  }

  rec.alive_nodes = w.alive_count();
  rec.alive_leaf_count = static_cast<int>(w.alive_leaves().size());
  if (with_snapshot) {
    Snapshot snap;
    for (const PruneWork::Node& n : w.nodes)
      if (n.alive)
        snap.push_back({n.id, n.parent >= 0 ? w.nodes[static_cast<size_t>(n.parent)].id : -1,
                        n.outcome});
    rec.snapshot = std::move(snap);
  }
  return rec;
}

PruneOutcome prune(const LoccTree& t, const SeparableOperation& sep,
                   const Tolerances& tols, bool trace) {
  PruneOutcome out;
  out.marking = select_keepers(t, sep, tols);
  out.work = make_prune_work(t, out.marking);
  PruneWork& w = out.work;

  while (true) {
    // Left-most live non-keeper leaf; preorder index order is the
    // left-to-right order.
    int leaf_idx = -1;
    for (int idx : w.alive_leaves())
      if (!w.nodes[static_cast<size_t>(idx)].keeper) {
        leaf_idx = idx;
        break;
      }
    if (leaf_idx < 0) break;

    const int t_root = grow_maximal_keeperless(w, leaf_idx);
    const RemovalKind kind = classify_removal(w, t_root);
    out.records.push_back(apply_removal(w, t_root, kind, trace));
  }

  const int n = sep.outcome_count();
  const std::vector<int> leaves = w.alive_leaves();
  if (static_cast<int>(leaves.size()) != n)
    throw std::logic_error("prune: expected " + std::to_string(n) +
                           " leaves, have " + std::to_string(leaves.size()));
  for (int idx : leaves)
    if (!w.nodes[static_cast<size_t>(idx)].keeper)
      throw std::logic_error("prune: non-keeper leaf survived");
  if (w.alive_count() != 2 * n - 1)
    throw std::logic_error("prune: expected " + std::to_string(2 * n - 1) +
                           " nodes, have " + std::to_string(w.alive_count()));
  if (!w.nodes[static_cast<size_t>(w.root)].alive)
    throw std::logic_error("prune: root was removed");
  return out;
}

PrunedBound bound_from_pruned(const PruneOutcome& out,
                              const SeparableOperation& sep,
                              const Tolerances& tols) {
  PrunedBound pb;
  const int n = sep.outcome_count();
  pb.bound = 2LL * (n - 1);

  std::vector<std::vector<CMat>> reps(static_cast<size_t>(sep.parties()));
  std::vector<std::vector<int>> ids(static_cast<size_t>(sep.parties()));
  int extreme_total = 0;
  for (int a = 1; a <= sep.parties(); ++a) {
    ConeFamily fam = build_cone_family(sep, a, tols);
    // A single-class party never measures; its one ray is the identity,
    // carried by the root, and does not appear on any edge.
    if (fam.class_count() < 2) continue;
    ExtremalityReport rep = count_extreme_rays(fam, tols.cone);
    extreme_total += rep.e;
    for (int c : rep.extreme_class_ids) {
      reps[static_cast<size_t>(a - 1)].push_back(
          fam.representatives[static_cast<size_t>(c)]);
      ids[static_cast<size_t>(a - 1)].push_back(c);
    }
  }

  std::set<std::pair<int, int>> seen;
  for (const PruneWork::Node& node : out.work.nodes) {
    if (!node.alive || node.edge_party == 0) continue;
    const size_t a = static_cast<size_t>(node.edge_party - 1);
    const CMat& label = node.labels[a];
    for (size_t c = 0; c < reps[a].size(); ++c)
      if (proportionality(label, reps[a][c], tols.cone)) {
        seen.insert({node.edge_party, ids[a][c]});
        break;
      }
  }
  pb.distinct_extreme_pairs = static_cast<int>(seen.size());
  pb.all_extreme_present = pb.distinct_extreme_pairs == extreme_total;
  pb.within_bound = pb.distinct_extreme_pairs <= pb.bound;
  return pb;
}

}  // namespace locc
