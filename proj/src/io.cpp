#include "locc/io.hpp"

#include <fstream>
#include <sstream>

namespace locc {

namespace {

const Json& expect(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object())
    throw IoError(where + ": expected an object");
  auto it = j.find(key);
  if (it == j.end())
    throw IoError(where + ": missing key \"" + std::string(key) + "\"");
  return *it;
}

double expect_number(const Json& j, const std::string& where) {
  if (!j.is_number()) throw IoError(where + ": expected a number");
  return j.get<double>();
}

std::vector<int> dims_from_json(const Json& j, const std::string& where) {
  if (!j.is_array() || j.empty())
    throw IoError(where + ": expected a non-empty array of dimensions");
  std::vector<int> dims;
  for (size_t i = 0; i < j.size(); ++i) {
    const Json& d = j[i];
    if (!d.is_number_integer() || d.get<int>() < 1)
      throw IoError(where + "[" + std::to_string(i) + "]: expected a positive integer");
    dims.push_back(d.get<int>());
  }
  return dims;
}

}  // namespace

Json operator_to_json(const CMat& m) {
  Json re = Json::array(), im = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json rrow = Json::array(), irow = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      rrow.push_back(m(i, j).real());
      irow.push_back(m(i, j).imag());
    }
    re.push_back(std::move(rrow));
    im.push_back(std::move(irow));
  }
  return Json{{"dim", m.rows()}, {"re", std::move(re)}, {"im", std::move(im)}};
}

CMat operator_from_json(const Json& j, const std::string& where) {
  const Json& jd = expect(j, "dim", where);
  if (!jd.is_number_integer() || jd.get<int>() < 1)
    throw IoError(where + ".dim: expected a positive integer");
  const int d = jd.get<int>();
  const Json& re = expect(j, "re", where);
  const Json& im = expect(j, "im", where);
  for (const auto* part : {&re, &im})
    if (!part->is_array() || static_cast<int>(part->size()) != d)
      throw IoError(where + ": re/im must be " + std::to_string(d) + " rows");
  CMat m(d, d);
  for (int i = 0; i < d; ++i) {
    const Json& rrow = re[static_cast<size_t>(i)];
    const Json& irow = im[static_cast<size_t>(i)];
    if (!rrow.is_array() || static_cast<int>(rrow.size()) != d ||
        !irow.is_array() || static_cast<int>(irow.size()) != d)
      throw IoError(where + ": row " + std::to_string(i) + " must have " +
                    std::to_string(d) + " entries");
    for (int k = 0; k < d; ++k)
      m(i, k) = Complex(
          expect_number(rrow[static_cast<size_t>(k)],
                        where + ".re[" + std::to_string(i) + "][" + std::to_string(k) + "]"),
          expect_number(irow[static_cast<size_t>(k)],
                        where + ".im[" + std::to_string(i) + "][" + std::to_string(k) + "]"));
  }
  return m;
}

Json sep_to_json(const SeparableOperation& sep) {
  Json outcomes = Json::array();
  for (const ProductOperator& o : sep.outcomes) {
    Json locals = Json::array();
    for (const CMat& l : o.locals) locals.push_back(operator_to_json(l));
    outcomes.push_back(Json{{"weight", o.weight}, {"locals", std::move(locals)}});
  }
  return Json{{"dims", sep.dims}, {"outcomes", std::move(outcomes)}};
}

SeparableOperation sep_from_json(const Json& j, const Tolerances& tols) {
  const std::string top = "$";
  std::vector<int> dims = dims_from_json(expect(j, "dims", top), top + ".dims");
  const Json& jo = expect(j, "outcomes", top);
  if (!jo.is_array() || jo.empty())
    throw IoError(top + ".outcomes: expected a non-empty array");

  std::vector<ProductOperator> raw;
  for (size_t i = 0; i < jo.size(); ++i) {
    const std::string where = top + ".outcomes[" + std::to_string(i) + "]";
    const Json& w = expect(jo[i], "weight", where);
    ProductOperator o;
    o.weight = expect_number(w, where + ".weight");
    if (!(o.weight > 0)) throw IoError(where + ".weight: must be positive");
    const Json& locals = expect(jo[i], "locals", where);
    if (!locals.is_array() || locals.size() != dims.size())
      throw IoError(where + ".locals: expected " + std::to_string(dims.size()) +
                    " operators");
    for (size_t a = 0; a < locals.size(); ++a)
      o.locals.push_back(operator_from_json(
          locals[a], where + ".locals[" + std::to_string(a) + "]"));
    raw.push_back(std::move(o));
  }
  try {
    return make_sep(std::move(dims), raw, tols);
  } catch (const std::invalid_argument& e) {
    throw IoError(std::string("$.outcomes: ") + e.what());
  }
}

namespace {

Json node_to_json(const LoccNode& n, bool root) {
  Json out;
  out["party"] = n.leaf() ? Json(nullptr) : Json(n.measuring_party);
  out["kraus"] = root ? Json(nullptr) : operator_to_json(n.edge_kraus);
  Json children = Json::array();
  for (const LoccNode& c : n.children) children.push_back(node_to_json(c, false));
  out["children"] = std::move(children);
  return out;
}

LoccNode node_from_json(const Json& j, bool root, int parent_party,
                        const std::vector<int>& dims, const std::string& where) {
  LoccNode n;
  const Json& party = expect(j, "party", where);
  const Json& kraus = expect(j, "kraus", where);
  const Json& children = expect(j, "children", where);
  if (!children.is_array())
    throw IoError(where + ".children: expected an array");

  if (root) {
    if (!kraus.is_null())
      throw IoError(where + ".kraus: the root carries no Kraus operator");
  } else {
    if (kraus.is_null())
      throw IoError(where + ".kraus: non-root nodes need a Kraus operator");
    n.edge_party = parent_party;
    n.edge_kraus = operator_from_json(kraus, where + ".kraus");
    const int d = dims.at(static_cast<size_t>(parent_party - 1));
    if (n.edge_kraus.rows() != d)
      throw IoError(where + ".kraus: expected dimension " + std::to_string(d));
  }

  if (children.empty()) {
    if (!party.is_null())
      throw IoError(where + ".party: leaves must have party null");
    return n;
  }
  if (!party.is_number_integer() || party.get<int>() < 1 ||
      party.get<int>() > static_cast<int>(dims.size()))
    throw IoError(where + ".party: expected a party in 1.." +
                  std::to_string(dims.size()));
  n.measuring_party = party.get<int>();
  for (size_t i = 0; i < children.size(); ++i)
    n.children.push_back(node_from_json(children[i], false, n.measuring_party,
                                        dims,
                                        where + ".children[" + std::to_string(i) + "]"));
  return n;
}

}  // namespace

Json tree_to_json(const LoccTree& t) {
  return Json{{"dims", t.dims}, {"root", node_to_json(t.root, true)}};
}

LoccTree tree_from_json(const Json& j) {
  const std::string top = "$";
  LoccTree t;
  t.dims = dims_from_json(expect(j, "dims", top), top + ".dims");
  t.root = node_from_json(expect(j, "root", top), true, 0, t.dims, top + ".root");
  assign_preorder_ids(t);
  return t;
}

Json verdict_to_json(const Verdict& v) {
  Json e = Json::object();
  for (const auto& [party, count] : v.e) e[std::to_string(party)] = count;
  Json reports = Json::array();
  for (const ExtremalityReport& r : v.reports) {
    reports.push_back(Json{{"party", r.party},
                           {"e", r.e},
                           {"classes", r.e + static_cast<int>(r.witnesses.size())},
                           {"extreme_classes", r.extreme_class_ids}});
  }
  Json out{{"schema", "locc-cert/1"},
           {"parties", v.parties},
           {"outcomes", v.n_outcomes},
           {"active_parties", v.active},
           {"e", std::move(e)},
           {"sum_e", v.sum_e},
           {"bound", v.bound},
           {"margin", v.margin},
           {"violation_ratio", v.violation_ratio},
           {"closure_residual", v.closure},
           {"necessary_condition_met", v.necessary_condition_met},
           {"satisfied", v.satisfied},
           {"notes", v.notes},
           {"reports", std::move(reports)}};
  if (v.refined_applied)
    out["refined"] = Json{{"bound", v.refined_bound},
                          {"satisfied", v.refined_satisfied}};
  return out;
}

std::string render_verdict(const Verdict& v, Format fmt) {
  if (fmt == Format::JsonOut) return verdict_to_json(v).dump(2) + "\n";

  std::ostringstream os;
  os << "separable operation: N = " << v.n_outcomes << " outcomes, P = "
     << v.parties << " parties\n";
  os << "active parties:";
  for (int a : v.active) os << ' ' << a;
  if (v.active.empty()) os << " none";
  os << "\n";
  os << "closure residual: " << v.closure << "\n";
  for (const auto& [party, count] : v.e)
    os << "e_" << party << " = " << count << "\n";
  if (v.sum_e > v.bound)
    os << "Σe = " << v.sum_e << " > " << v.bound << " = 2(N−1)\n";
  else if (v.sum_e == v.bound)
    os << "Σe = " << v.sum_e << " = " << v.bound << " = 2(N−1) (saturated)\n";
  else
    os << "Σe = " << v.sum_e << " ≤ " << v.bound << " = 2(N−1)\n";
  if (v.necessary_condition_met) {
    os << "finite-round LOCC bound: SATISFIED (necessary condition; not sufficient)\n";
  } else {
    os << "finite-round LOCC bound: VIOLATED\n";
    os << "certificate: not implementable by finite-round LOCC\n";
  }
  os << "margin = " << v.margin << ", ratio = " << v.violation_ratio << "\n";
  if (v.refined_applied) {
    os << "refined bipartite bound (stated without proof in this paper): ⌊3N/2⌋ = "
       << v.refined_bound << "\n";
    if (v.refined_satisfied)
      os << "refined bound: Σe = " << v.sum_e << " ≤ " << v.refined_bound
         << " SATISFIED\n";
    else
      os << "refined bound: Σe = " << v.sum_e << " > " << v.refined_bound
         << " VIOLATED\n";
  }
  for (const std::string& n : v.notes) os << "note: " << n << "\n";
  return os.str();
}

Json removal_record_to_json(const RemovalRecord& r) {
  Json out{{"kind", r.kind == RemovalKind::Type1 ? "type-1" : "type-2"},
           {"subtree_root", r.t_root_id},
           {"extra_node", r.extra_id},
           {"extra_was_leaf", r.extra_was_leaf},
           {"removed_nodes", r.removed_nodes},
           {"alive_nodes", r.alive_nodes},
           {"alive_leaves", r.alive_leaf_count}};
  if (r.snapshot) {
    Json snap = Json::array();
    for (const auto& row : *r.snapshot)
      snap.push_back(Json{{"id", row[0]}, {"parent", row[1]}, {"outcome", row[2]}});
    out["snapshot"] = std::move(snap);
  }
  return out;
}

Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw IoError(path + ": " + e.what());
  }
}

void save_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << text;
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace locc
