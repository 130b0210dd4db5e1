#include "locc/constructions.hpp"
#include "locc/io.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

namespace {

enum ExitCode { kOk = 0, kInternal = 1, kBadInput = 2, kViolated = 3 };

locc::Tolerances tolerances_from_env(std::optional<double> flag_tol) {
  locc::Tolerances tols;
  if (const char* env = std::getenv("LOCC_CERT_TOL")) {
    try {
      tols.cone = std::stod(env);
    } catch (...) {
      throw locc::IoError("LOCC_CERT_TOL is not a number");
    }
  }
  if (flag_tol) tols.cone = *flag_tol;  // the flag wins over the environment
  if (!(tols.cone > 0)) throw locc::IoError("tolerance must be positive");
  return tols;
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty())
    std::cout << text;
  else
    locc::save_text_file(out_path, text);
}

std::vector<int> parse_dims(const std::string& csv) {
  std::vector<int> dims;
  size_t pos = 0;
  while (pos <= csv.size()) {
    const size_t comma = csv.find(',', pos);
    const std::string tok = csv.substr(pos, comma == std::string::npos
                                                ? std::string::npos
                                                : comma - pos);
    try {
      dims.push_back(std::stoi(tok));
    } catch (...) {
      throw locc::IoError("bad dimension list: " + csv);
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return dims;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"finite-round LOCC certificate toolkit"};
  app.require_subcommand(1);

  std::string in_path, out_path, format = "text", dims_csv = "2,2";
  std::optional<double> tol_flag;
  bool refined = false, trace = false;
  std::optional<long long> prime;
  int parties = 2, omit = 0;
  std::optional<uint64_t> seed;

  CLI::App* check = app.add_subcommand("check", "certify a separable operation");
  check->add_option("input", in_path, "operation JSON file")->required();
  check->add_option("--tol", tol_flag, "proportionality/cone tolerance");
  check->add_option("--format", format, "text or json")
      ->check(CLI::IsMember({"text", "json"}));
  check->add_flag("--refined-bipartite", refined,
                  "also apply the bipartite 3N/2 bound (P=2, N>4)");
  check->add_option("-o,--output", out_path, "write the verdict here");

  CLI::App* gen = app.add_subcommand("gen", "generate reference inputs");
  gen->require_subcommand(1);
  CLI::App* gen_a = gen->add_subcommand("appendix-a", "phase-state family");
  gen_a->add_option("--dims", dims_csv, "local dimensions, e.g. 2,2")->required();
  gen_a->add_option("--prime", prime, "override the number of outcomes");
  gen_a->add_option("-o,--output", out_path, "output file");
  CLI::App* gen_d = gen->add_subcommand("appendix-d", "saturating qubit protocol tree");
  gen_d->add_option("--parties", parties, "number of parties")->required();
  gen_d->add_option("--seed", seed, "RNG seed")->required();
  gen_d->add_option("--omit", omit, "drop the right-most k last-party measurements");
  gen_d->add_option("-o,--output", out_path, "output file");
  CLI::App* gen_dom = gen->add_subcommand("domino", "two-qutrit nine-state basis");
  gen_dom->add_option("-o,--output", out_path, "output file");

  CLI::App* canon = app.add_subcommand("canonicalize", "absorb + merge + binarize");
  canon->add_option("input", in_path, "tree JSON file")->required();
  canon->add_option("--tol", tol_flag, "proportionality tolerance");
  canon->add_option("-o,--output", out_path, "output file");

  CLI::App* extract = app.add_subcommand("extract", "separable operation of a tree");
  extract->add_option("input", in_path, "tree JSON file")->required();
  extract->add_option("--tol", tol_flag, "proportionality tolerance");
  extract->add_option("-o,--output", out_path, "output file");

  CLI::App* prune_cmd = app.add_subcommand("prune", "keeper-based pruning, removal log as JSON lines");
  prune_cmd->add_option("input", in_path, "tree JSON file")->required();
  prune_cmd->add_option("--tol", tol_flag, "proportionality tolerance");
  prune_cmd->add_flag("--trace", trace, "include a survivors snapshot per removal");
  prune_cmd->add_option("-o,--output", out_path, "output file");

  CLI::App* verify = app.add_subcommand("verify-tree", "structural and numerical diagnostics");
  verify->add_option("input", in_path, "tree JSON file")->required();
  verify->add_option("--tol", tol_flag, "proportionality tolerance");

  CLI11_PARSE(app, argc, argv);

  try {
    locc::Tolerances tols;
    try {
      tols = tolerances_from_env(tol_flag);
    } catch (const locc::IoError& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kBadInput;
    }

    if (check->parsed()) {
      locc::SeparableOperation sep;
      try {
        sep = locc::sep_from_json(locc::load_json_file(in_path), tols);
      } catch (const locc::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kBadInput;
      }
      locc::CertifyOptions opts;
      opts.tols = tols;
      opts.refined_bipartite = refined;
      locc::Verdict v;
      try {
        v = locc::certify(sep, opts);
      } catch (const locc::ClosureError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kBadInput;
      } catch (const locc::RefinedNotApplicable& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kBadInput;
      }
      emit(locc::render_verdict(
               v, format == "json" ? locc::Format::JsonOut : locc::Format::Text),
           out_path);
      return v.satisfied ? kOk : kViolated;
    }

    if (gen_a->parsed()) {
      locc::SeparableOperation sep;
      try {
        sep = locc::appendix_a_sep(parse_dims(dims_csv), prime, tols);
      } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kBadInput;
      }
      emit(locc::sep_to_json(sep).dump(2) + "\n", out_path);
      return kOk;
    }
    if (gen_d->parsed()) {
      locc::LoccTree t;
      try {
        t = locc::appendix_d_tree(parties, *seed);
        if (omit > 0) t = locc::appendix_d_omit(t, omit);
      } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kBadInput;
      }
      emit(locc::tree_to_json(t).dump(2) + "\n", out_path);
      return kOk;
    }
    if (gen_dom->parsed()) {
      emit(locc::sep_to_json(locc::domino_fixture(tols)).dump(2) + "\n", out_path);
      return kOk;
    }

    // The remaining commands all read a tree.
    locc::LoccTree t;
    try {
      t = locc::tree_from_json(locc::load_json_file(in_path));
    } catch (const locc::IoError& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kBadInput;
    }

    if (verify->parsed()) {
      const std::vector<locc::TreeIssue> issues = locc::validate_tree(t, tols);
      for (const locc::TreeIssue& i : issues)
        std::cout << "node " << i.node_id << ": " << i.what << "\n";
      if (!issues.empty()) return kBadInput;
      std::cout << "tree ok: " << locc::count_nodes(t.root) << " nodes, "
                << (locc::is_canonical(t, tols) ? "canonical" : "not canonical")
                << "\n";
      return kOk;
    }

    if (canon->parsed()) {
      locc::CanonicalizeResult r;
      try {
        r = locc::canonicalize(t, tols);
      } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kBadInput;
      }
      if (!r.tree) {
        for (const locc::MergeIssue& i : r.issues)
          std::cerr << "unsupported merge at node " << i.node_id << ": "
                    << i.detail << "\n";
        return kBadInput;
      }
      emit(locc::tree_to_json(*r.tree).dump(2) + "\n", out_path);
      return kOk;
    }

    if (extract->parsed()) {
      locc::SeparableOperation sep;
      try {
        sep = locc::extract_sep(t, tols);
      } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kBadInput;
      }
      emit(locc::sep_to_json(sep).dump(2) + "\n", out_path);
      return kOk;
    }

    if (prune_cmd->parsed()) {
      locc::SeparableOperation sep;
      locc::PruneOutcome out;
      try {
        if (!locc::is_canonical(t, tols)) {
          std::cerr << "error: tree is not canonical; run canonicalize first\n";
          return kBadInput;
        }
        sep = locc::extract_sep(t, tols);
        out = locc::prune(t, sep, tols, trace);
      } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kBadInput;
      }
      std::ostringstream lines;
      for (const locc::RemovalRecord& r : out.records)
        lines << locc::removal_record_to_json(r).dump() << "\n";
      emit(lines.str(), out_path);
      std::cerr << "pruned to " << out.work.alive_count() << " nodes, "
                << sep.outcome_count() << " keeper leaves, "
                << out.records.size() << " removals\n";
      return kOk;
    }

    std::cerr << "error: no subcommand\n";
    return kBadInput;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternal;
  }
}
