#pragma once

#include "locc/cone.hpp"
#include "locc/operators.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace locc {

// Hard cap on tree size; generators and validation refuse anything larger.
constexpr int kMaxTreeNodes = 1 << 20;

// One node of a protocol tree. The edge Kraus operator is the one applied
// on the way from the parent (empty at the root) and edge_party is the
// party that applied it. measuring_party is the party measuring at this
// node, 0 at leaves. Trees are values; transformations return new trees.
struct LoccNode {
  int id = -1;
  int measuring_party = 0;
  int edge_party = 0;
  CMat edge_kraus;
  std::vector<LoccNode> children;

  bool leaf() const { return children.empty(); }
};

struct LoccTree {
  std::vector<int> dims;
  LoccNode root;

  int parties() const { return static_cast<int>(dims.size()); }
  int dim_of(int party) const { return dims.at(static_cast<size_t>(party - 1)); }
};

// Builder helpers: measure_node wires children edges to the measuring
// party, make_tree assigns preorder ids.
LoccNode measure_node(int party, std::vector<std::pair<CMat, LoccNode>> branches);
LoccTree make_tree(std::vector<int> dims, LoccNode root);
void assign_preorder_ids(LoccTree& t);
int count_nodes(const LoccNode& n);
int tree_depth(const LoccNode& n);

// Tree with accumulated positive operators: labels[party−1] at a node is
// the ordered product of that party's Kraus operators along the path,
// sandwiched as M†M. Root labels are identities.
struct LabeledNode {
  int id = -1;
  int measuring_party = 0;
  int edge_party = 0;
  CMat edge_kraus;
  std::vector<CMat> labels;
  std::vector<LabeledNode> children;

  bool leaf() const { return children.empty(); }
};
LabeledNode accumulate(const LoccTree& t);

struct TreeIssue {
  int node_id = -1;
  std::string what;
};

// Structural and numerical diagnostics: unique ids, edge shape, Kraus
// completeness at every non-leaf, PSD labels, and the child-sum recursion
// (children's labels for the measuring party add up to the parent's).
std::vector<TreeIssue> validate_tree(const LoccTree& t,
                                     const Tolerances& tols = {});

// The separable operation implemented by the tree: one outcome per leaf
// with the leaf's accumulated labels as locals; proportional outcomes are
// merged. Throws std::invalid_argument when validation fails.
SeparableOperation extract_sep(const LoccTree& t, const Tolerances& tols = {});

// Removes single-outcome rounds. The round's (unitary) Kraus operator is
// composed into the next same-party Kraus below; on paths where none
// exists it is a trailing isometry and label-neutral, so it is dropped.
LoccTree absorb_isometries(const LoccTree& t, const Tolerances& tols = {});

struct BinarizeError : std::runtime_error {
  int node_id;
  BinarizeError(int id, const std::string& what)
      : std::runtime_error(what), node_id(id) {}
};

// Splits every m-outcome measurement (m > 2) into a chain of two-outcome
// measurements whose composed branch products reproduce the original Kraus
// operators exactly; verified numerically, BinarizeError on failure.
LoccTree binarize(const LoccTree& t, const Tolerances& tols = {});

struct MergeIssue {
  int node_id = -1;
  std::string detail;
};
struct MergeResult {
  std::optional<LoccTree> tree;  // present iff no issues
  std::vector<MergeIssue> issues;
  int merges = 0;
};

// Merges sibling branches whose measuring-party labels are proportional.
// Leaf pairs always merge (the summed positive operator has a Kraus square
// root); non-leaf pairs require subtrees that match up to scalar factors.
// Unsupported cases are reported instead of merged.
MergeResult merge_proportional_outcomes(const LoccTree& t,
                                        const Tolerances& tols = {});

// Two children at every non-leaf and non-proportional measuring-party
// labels between siblings.
bool is_canonical(const LoccTree& t, const Tolerances& tols = {});

struct FullBinaryCheck {
  int leaf_count = 0;
  int nonleaf_count = 0;
  bool ok = false;
  std::string reason;
};
FullBinaryCheck full_binary_check(const LoccTree& t);

// absorb + merge + binarize loop until the tree is canonical. Returns the
// merge issues when an unsupported merge blocks progress.
struct CanonicalizeResult {
  std::optional<LoccTree> tree;
  std::vector<MergeIssue> issues;
};
CanonicalizeResult canonicalize(const LoccTree& t, const Tolerances& tols = {});

// Nodes whose party measures again somewhere below must not sit on an
// extreme ray of that party's cone; returns the offenders.
struct RayHit {
  int node_id = -1;
  int party = 0;
  int class_id = -1;
};
std::vector<RayHit> lemma1_scan(const LoccTree& t,
                                const SeparableOperation& sep,
                                const Tolerances& tols = {});

struct RandomTreeParams {
  std::vector<int> dims;
  int max_depth = 5;
  double leaf_prob = 0.35;
  // Number of attempts to clone one leaf's labels at another position via
  // an engineered chain of measurements, so the extracted operation has
  // fewer distinct outcomes than the tree has leaves and pruning has real
  // work to do.
  int duplication_attempts = 2;
};

// Deterministic in (params, seed).
LoccTree random_canonical_tree(const RandomTreeParams& params, uint64_t seed);

}  // namespace locc
