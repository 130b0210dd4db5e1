#pragma once

#include "locc/cone.hpp"
#include "locc/operators.hpp"
#include "locc/tree.hpp"

#include <array>
#include <optional>
#include <set>
#include <unordered_map>
#include <vector>

namespace locc {

// Which leaf stands for each outcome class: for every class the right-most
// matching leaf (right/left via the child order at the closest common
// ancestor) is the keeper; all other leaves are removable.
struct KeeperMarking {
  std::unordered_map<int, int> leaf_outcome;  // leaf id -> outcome index
  std::vector<int> keeper_leaf;               // outcome index -> leaf id
  std::set<int> keepers;

  bool is_keeper(int leaf_id) const { return keepers.count(leaf_id) != 0; }
};

// Matches every leaf of the tree to an outcome of sep (the operation the
// tree implements) by per-party label proportionality. Throws when a leaf
// matches no outcome or an outcome has no leaf.
KeeperMarking select_keepers(const LoccTree& t, const SeparableOperation& sep,
                             const Tolerances& tols = {});

// Flat, surgery-friendly form of a labeled tree used while pruning. Nodes
// are stored in preorder, so comparing indices of two leaves orders them
// left to right.
struct PruneWork {
  struct Node {
    int id = -1;
    int parent = -1;                  // index, -1 at the root
    std::array<int, 2> child{{-1, -1}};
    bool alive = true;
    bool keeper = false;              // leaves only
    int edge_party = 0;               // 0 at the root
    int outcome = -1;                 // leaves: outcome class index
    std::vector<CMat> labels;

    bool leaf() const { return child[0] < 0; }
  };

  std::vector<Node> nodes;
  int root = 0;

  int index_of(int id) const;
  int alive_count() const;
  std::vector<int> alive_leaves() const;  // indices, left to right
  bool subtree_has_keeper(int idx) const;
  int subtree_size(int idx) const;
  bool is_descendant(int idx, int ancestor_idx) const;
};

// Requires a canonical tree whose leaves all match; marking from
// select_keepers.
PruneWork make_prune_work(const LoccTree& t, const KeeperMarking& marking);

// Largest keeperless subtree containing the given (non-keeper) leaf: grows
// upward while the sibling subtree is keeperless. Returns the index of the
// subtree root.
int grow_maximal_keeperless(const PruneWork& w, int leaf_idx);

enum class RemovalKind { Type1, Type2 };

// Type-1 when some leaf class in T has its keeper outside n_p's subtree,
// type-2 when every keeper of T's leaf classes descends from n_p.
RemovalKind classify_removal(const PruneWork& w, int t_root);

using Snapshot = std::vector<std::array<int, 3>>;  // (id, parent id, outcome)

struct RemovalRecord {
  RemovalKind kind = RemovalKind::Type1;
  int t_root_id = -1;
  int extra_id = -1;       // n_p for type-1, n_c for type-2
  bool extra_was_leaf = false;
  int removed_nodes = 0;
  int alive_nodes = 0;     // after the removal
  int alive_leaf_count = 0;
  std::optional<Snapshot> snapshot;
};

// Removes T plus the extra node and restores the full binary shape:
// type-1 splices n_p out (its parent adopts n_c), type-2 reattaches n_c's
// children to n_p in order. Root removal is impossible by construction and
// raises std::logic_error.
RemovalRecord apply_removal(PruneWork& w, int t_root, RemovalKind kind,
                            bool with_snapshot = false);

struct PruneOutcome {
  PruneWork work;
  KeeperMarking marking;
  std::vector<RemovalRecord> records;
};

// Full pass: removes maximal keeperless subtrees left to right until only
// keeper leaves remain. Postconditions (N alive keeper leaves, 2N−1 alive
// nodes, root alive) are enforced and a violation raises std::logic_error.
PruneOutcome prune(const LoccTree& t, const SeparableOperation& sep,
                   const Tolerances& tols = {}, bool trace = false);

struct PrunedBound {
  int distinct_extreme_pairs = 0;  // (party, extreme class) pairs on survivors
  long long bound = 0;             // 2(N−1)
  bool all_extreme_present = false;
  bool within_bound = false;
};

// Counts distinct (party, extreme-ray class) pairs among surviving
// non-root labels and checks every extreme class survived pruning.
PrunedBound bound_from_pruned(const PruneOutcome& out,
                              const SeparableOperation& sep,
                              const Tolerances& tols = {});

}  // namespace locc
