// qpalc: model checking for quantified public announcement logics and the
// tiling reduction.
//
// Exit status: check returns 0 (true), 1 (false), 2 (error). verify returns 0
// when every expected verdict is met, 1 otherwise. Errors are always 2.

#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qpalc/qpalc.hpp"

namespace {

using namespace qpalc;

struct GlobalOptions {
  std::size_t budget = kDefaultBudget;
  std::string flavor = "apal";
};

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << text;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  return std::string(std::istreambuf_iterator<char>(in), {});
}

std::optional<std::set<std::size_t>> rows_option(const std::vector<std::size_t>& rows, bool given) {
  if (!given) return std::nullopt;
  return std::set<std::size_t>(rows.begin(), rows.end());
}

int run_check(const std::string& model_path, const std::string& formula_text, const std::string& formula_file,
              const std::string& state, bool explain, std::size_t budget) {
  Model m = io::load_model(model_path);
  if (formula_text.empty() == formula_file.empty()) throw Error("give exactly one of FORMULA or --formula-file");
  Formula f = parse(formula_file.empty() ? formula_text : read_text(formula_file));
  std::string at = state;
  if (at.empty()) {
    if (!m.designated()) throw ModelError("model has no designated state; pass --state");
    at = m.state_name(*m.designated());
  }
  Checker c(std::move(m), budget);
  bool v = c.check(at, f);
  std::cout << (v ? "true" : "false") << "\n";
  if (explain) {
    for (const auto& w : c.explain(at, f)) {
      std::cout << "witness at " << w.state << ": {";
      auto names = w.subset_names();
      for (std::size_t i = 0; i < names.size(); ++i) std::cout << (i ? "," : "") << names[i];
      std::cout << "}\n  announce " << print(w.formula) << "\n  re-verified: " << (reverify(w) ? "yes" : "no")
                << "\n";
    }
  }
  return v ? 0 : 1;
}

int run_reduce(const std::string& instance_path, const std::string& flavor, const std::string& target) {
  auto inst = io::load_instance(instance_path);
  auto fl = tiling::parse_flavor(flavor);
  Formula f = top();
  if (target == "psi")
    f = tiling::compile_psi(inst, fl);
  else if (target == "recurring")
    f = tiling::compile_recurring(inst, fl);
  else if (target.rfind("component:", 0) == 0)
    f = tiling::compile_component(inst, target.substr(10), fl);
  else
    throw Error("unknown target '" + target + "' (expected psi, recurring or component:<tag>)");
  std::cout << print(f) << "\n";
  return 0;
}

int run_grid(const std::string& instance_path, std::size_t w, std::size_t h, const std::vector<std::size_t>& rows,
             bool rows_given, const std::string& out, const std::string& grid_out) {
  auto inst = io::load_instance(instance_path);
  auto g = tiling::brute_force_tile(inst, w, h, rows_option(rows, rows_given));
  if (!g) throw TilingError("no tiling of " + std::to_string(w) + "x" + std::to_string(h) + " found");
  Model m = tiling::build_grid_model(inst, *g);
  if (!grid_out.empty()) write_text(grid_out, io::grid_to_json(*g));
  write_text(out, io::model_to_json(m));
  std::ostream& info = out.empty() || out == "-" ? std::cerr : std::cout;
  info << m.num_states() << " states";
  for (AgentIdx a = 0; a < m.num_agents(); ++a) info << ", " << m.blocks(a).size() << " " << m.agent_names()[a] << "-blocks";
  info << "\n";
  return 0;
}

int run_verify(const std::string& instance_path, std::size_t w, std::size_t h, const std::vector<std::size_t>& rows,
               bool rows_given, const GlobalOptions& opts, const std::string& jsonl, bool timing, bool quiet) {
  harness::VerifyRequest req;
  req.instance = io::load_instance(instance_path);
  req.width = w;
  req.height = h;
  req.star_rows = rows_option(rows, rows_given);
  req.options.flavor = tiling::parse_flavor(opts.flavor);
  req.options.budget = opts.budget;
  auto rep = harness::verify(req);
  if (!jsonl.empty()) write_text(jsonl, rep.jsonl(timing));
  if (!quiet || !rep.pass()) (jsonl == "-" ? std::cerr : std::cout) << rep.human();
  return rep.pass() ? 0 : 1;
}

int run_quotient(const std::string& model_path, const std::string& out) {
  Model m = io::load_model(model_path);
  Model q = quotient(m, compute_partition(m));
  write_text(out, io::model_to_json(q));
  if (!out.empty() && out != "-") std::cout << m.num_states() << " states -> " << q.num_states() << " blocks\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Model checker for quantified announcement logics and the tiling reduction"};
  app.require_subcommand(1);
  GlobalOptions opts;

  std::string model_path, formula_text, formula_file, state, instance_path, target = "psi", out, grid_out, jsonl;
  bool explain = false, timing = false, quiet = false;
  std::size_t width = 0, height = 0;
  std::vector<std::size_t> rows;

  auto* check = app.add_subcommand("check", "Evaluate a formula at a state of a model file");
  check->add_option("model", model_path, "Model JSON file")->required();
  check->add_option("formula", formula_text, "Formula text");
  check->add_option("-f,--formula-file", formula_file, "Read the formula from a file");
  check->add_option("--state", state, "Evaluation state (default: designated)");
  check->add_flag("--explain", explain, "Print quantifier witnesses");

  auto* reduce = app.add_subcommand("reduce", "Compile the tiling reduction for an instance");
  reduce->add_option("instance", instance_path, "Tile instance JSON file")->required();
  reduce->add_option("--target", target, "psi, recurring or component:<tag>")->capture_default_str();

  auto* grid = app.add_subcommand("grid", "Tile a finite grid and write its model");
  grid->add_option("instance", instance_path, "Tile instance JSON file")->required();
  grid->add_option("width", width)->required()->check(CLI::PositiveNumber);
  grid->add_option("height", height)->required()->check(CLI::PositiveNumber);
  auto* grid_rows = grid->add_option("--star-rows", rows, "Rows carrying the star tile in column 0")->delimiter(',');
  grid->add_option("-o,--output", out, "Model output path (default: stdout)");
  grid->add_option("--grid-output", grid_out, "Also write the tile assignment");

  auto* verify = app.add_subcommand("verify", "Run the verification harness on a grid fixture");
  verify->add_option("instance", instance_path, "Tile instance JSON file")->required();
  verify->add_option("width", width)->required()->check(CLI::PositiveNumber);
  verify->add_option("height", height)->required()->check(CLI::PositiveNumber);
  auto* verify_rows = verify->add_option("--star-rows", rows, "Rows carrying the star tile in column 0")->delimiter(',');
  verify->add_option("--jsonl", jsonl, "Write line-delimited JSON records ('-' for stdout)");
  verify->add_flag("--timing", timing, "Include elapsed times in JSON records");
  verify->add_flag("-q,--quiet", quiet, "Print the readable report only on failure");

  for (auto* sub : {reduce, verify})
    sub->add_option("--flavor", opts.flavor, "Quantifier flavour: apal, gal or cal")->capture_default_str();
  for (auto* sub : {check, verify})
    sub->add_option("--budget", opts.budget, "Cap on quantifier search nodes")->capture_default_str();

  auto* quot = app.add_subcommand("quotient", "Write the bisimulation quotient of a model");
  quot->add_option("model", model_path, "Model JSON file")->required();
  quot->add_option("-o,--output", out, "Output path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*check) return run_check(model_path, formula_text, formula_file, state, explain, opts.budget);
    if (*reduce) return run_reduce(instance_path, opts.flavor, target);
    if (*grid) return run_grid(instance_path, width, height, rows, grid_rows->count() > 0, out, grid_out);
    if (*verify)
      return run_verify(instance_path, width, height, rows, verify_rows->count() > 0, opts, jsonl, timing, quiet);
    if (*quot) return run_quotient(model_path, out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
