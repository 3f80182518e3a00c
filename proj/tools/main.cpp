#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "heapinv/checker.hpp"
#include "heapinv/engine.hpp"
#include "heapinv/partition.hpp"
#include "heapinv/serialize.hpp"
#include "heapinv/trace_io.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kInputError = 1;
constexpr int kNoResult = 2;

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct Inputs {
  heapinv::Definitions defs;
  heapinv::TraceFile traces;  // merged records; header from the first file
};

Inputs load(const std::string& preds_path,
            const std::vector<std::string>& trace_paths) {
  Inputs in;
  in.defs = heapinv::parse_predicates(slurp(preds_path));
  bool first = true;
  for (const auto& p : trace_paths) {
    heapinv::TraceFile tf = heapinv::read_traces(p);
    if (first) {
      in.traces.header = tf.header;
      first = false;
    }
    for (auto& r : tf.records) in.traces.records.push_back(std::move(r));
  }
  return in;
}

std::vector<heapinv::StackHeapModel> at_location(
    const heapinv::TraceFile& tf, const std::string& loc) {
  std::vector<heapinv::StackHeapModel> out;
  for (const auto& r : tf.records)
    if (r.location == loc) out.push_back(r);
  return out;
}

std::string heap_domain(const heapinv::Heap& h) {
  std::ostringstream os;
  os << "{";
  bool first = true;
  for (const auto& [addr, cell] : h) {
    if (!first) os << ", ";
    os << "0x" << std::hex << addr;
    first = false;
  }
  os << "}";
  return os.str();
}

int cmd_infer(const std::string& preds, const std::vector<std::string>& traces,
              const std::string& loc,
              const std::vector<std::string>& scope, std::size_t width,
              const std::string& format) {
  Inputs in = load(preds, traces);
  auto models = at_location(in.traces, loc);
  if (models.empty()) {
    std::cerr << "no traces at location " << loc << "\n";
    return kNoResult;
  }
  heapinv::InferOptions opts;
  opts.params = in.traces.header.params;
  opts.width = width;
  if (!scope.empty()) opts.scope_vars = scope;
  auto results = heapinv::infer(models, in.defs, opts);
  if (results.empty()) {
    std::cerr << "no invariant found at " << loc << "\n";
    return kNoResult;
  }
  if (format == "json") {
    std::cout << "[";
    for (std::size_t i = 0; i < results.size(); ++i) {
      if (i) std::cout << ",";
      std::cout << "{\"formula\":" << heapinv::formula_to_json(results[i].formula)
                << ",\"residual_cells\":[";
      for (std::size_t j = 0; j < results[i].residual_models.size(); ++j) {
        if (j) std::cout << ",";
        std::cout << results[i].residual_models[j].heap.size();
      }
      std::cout << "]}";
    }
    std::cout << "]\n";
  } else {
    for (const auto& r : results) std::cout << r.formula.str() << "\n";
  }
  return kOk;
}

int cmd_check(const std::string& preds, const std::vector<std::string>& traces,
              const std::string& formula_text, const std::string& formula_file,
              const std::string& loc) {
  Inputs in = load(preds, traces);
  std::string src = formula_text;
  if (src.empty() && !formula_file.empty()) src = slurp(formula_file);
  if (src.empty()) {
    std::cerr << "no formula given (--formula or --formula-file)\n";
    return kInputError;
  }
  heapinv::Formula f = heapinv::parse_formula(src, in.defs);
  auto models =
      loc.empty() ? in.traces.records : at_location(in.traces, loc);
  if (models.empty()) {
    std::cerr << "no models to check\n";
    return kNoResult;
  }
  bool all_sat = true;
  for (const auto& m : models) {
    heapinv::CheckOutcome out = heapinv::check(m, f, in.defs);
    std::cout << m.test_id << "@" << m.location << ": "
              << (out.satisfied ? "SAT" : "UNSAT");
    if (out.satisfied) {
      std::cout << " residual=" << heap_domain(out.residual) << " iota={";
      bool first = true;
      for (const auto& [name, val] : out.instantiation) {
        if (!first) std::cout << ", ";
        std::cout << name << ": " << val.str();
        first = false;
      }
      std::cout << "}";
    }
    std::cout << "\n";
    all_sat = all_sat && out.satisfied;
  }
  return all_sat ? kOk : kNoResult;
}

int cmd_validate(const std::string& preds,
                 const std::vector<std::string>& traces,
                 const std::string& pre_loc,
                 const std::vector<std::string>& scope, std::size_t width) {
  Inputs in = load(preds, traces);
  auto pre_models = at_location(in.traces, pre_loc);
  if (pre_models.empty()) {
    std::cerr << "no traces at location " << pre_loc << "\n";
    return kNoResult;
  }
  heapinv::InferOptions opts;
  opts.params = in.traces.header.params;
  opts.width = width;
  if (!scope.empty()) opts.scope_vars = scope;
  auto pre_results = heapinv::infer(pre_models, in.defs, opts);

  std::map<std::string, std::vector<heapinv::InferenceResult>> post_results;
  for (const auto& exit : in.traces.header.exits) {
    auto ms = at_location(in.traces, exit);
    if (ms.empty()) continue;
    post_results[exit] = heapinv::infer(ms, in.defs, opts);
  }
  if (post_results.empty()) {
    std::cerr << "no exit traces\n";
    return kNoResult;
  }

  auto specs = heapinv::validate(pre_results, post_results);
  bool any_valid = false;
  std::size_t shown = 0;
  for (const auto& s : specs) {
    if (shown++ >= 8 && !s.valid) break;
    std::cout << (s.valid ? "[valid]  " : "[invalid]") << " pre: "
              << s.pre.formula.str() << "\n";
    std::cout << "          post: ";
    for (std::size_t i = 0; i < s.posts.size(); ++i) {
      if (i) std::cout << "  v  ";
      std::cout << "(" << s.posts[i].first << ") "
                << s.posts[i].second.formula.str();
    }
    std::cout << "\n";
    any_valid = any_valid || s.valid;
  }
  return any_valid ? kOk : kNoResult;
}

int cmd_partition(const std::string& preds,
                  const std::vector<std::string>& traces,
                  const std::string& loc, const std::string& root) {
  Inputs in = load(preds, traces);
  auto models = loc.empty() ? in.traces.records : at_location(in.traces, loc);
  if (models.empty()) {
    std::cerr << "no traces at location " << loc << "\n";
    return kNoResult;
  }
  heapinv::PartitionResult part =
      heapinv::split_heap(models, root, in.defs.types);
  for (std::size_t i = 0; i < part.sub_models.size(); ++i) {
    const auto& m = part.sub_models[i];
    std::cout << m.test_id << "@" << m.location
              << ": sub=" << heap_domain(m.heap)
              << " rest=" << heap_domain(part.rest_models[i].heap) << "\n";
  }
  std::cout << "common boundary: {";
  bool first = true;
  for (const auto& v : part.common_boundary) {
    if (!first) std::cout << ", ";
    std::cout << v;
    first = false;
  }
  std::cout << "}\n";
  return kOk;
}

int cmd_gen(const std::string& program, const std::vector<std::size_t>& sizes,
            std::uint64_t seed, const std::string& out_path) {
  std::vector<heapinv::GenSpec> inputs;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    heapinv::GenSpec g;
    g.size = sizes[i];
    g.seed = seed + i;
    inputs.push_back(g);
  }
  heapinv::TraceFile tf = heapinv::run_builtin(program, inputs);
  if (out_path.empty())
    std::cout << heapinv::traces_to_string(tf);
  else
    heapinv::write_traces(tf, out_path);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"heap invariant inference from execution traces"};
  app.require_subcommand(1);

  std::string preds, loc, root, formula_text, formula_file, out_path;
  std::string pre_loc = "L1";
  std::string format = "text";
  std::string program;
  std::vector<std::string> traces, scope;
  std::vector<std::size_t> sizes;
  std::size_t width = 64;
  std::uint64_t seed = 0;

  auto* infer = app.add_subcommand("infer", "infer invariants at a location");
  infer->add_option("--preds", preds, "predicate definition file")->required();
  infer->add_option("--traces", traces, "trace file(s)")->required();
  infer->add_option("--loc", loc, "target location")->required();
  infer->add_option("--scope", scope, "free variables allowed in the result")
      ->delimiter(',');
  infer->add_option("--width", width, "result-set cap per iteration");
  infer->add_option("--format", format, "text|json")
      ->check(CLI::IsMember({"text", "json"}));

  auto* chk = app.add_subcommand("check", "check a formula against traces");
  chk->add_option("--preds", preds, "predicate definition file")->required();
  chk->add_option("--traces", traces, "trace file(s)")->required();
  chk->add_option("--formula", formula_text, "formula (DSL expression)");
  chk->add_option("--formula-file", formula_file, "formula file");
  chk->add_option("--loc", loc, "restrict to one location");

  auto* val = app.add_subcommand("validate", "frame-rule specification check");
  val->add_option("--preds", preds, "predicate definition file")->required();
  val->add_option("--traces", traces, "trace file(s)")->required();
  val->add_option("--pre", pre_loc, "precondition location (default L1)");
  val->add_option("--scope", scope, "free variables allowed in results")
      ->delimiter(',');
  val->add_option("--width", width, "result-set cap per iteration");

  auto* part = app.add_subcommand("partition", "show sub-heaps and boundary");
  part->add_option("--preds", preds, "predicate definition file")->required();
  part->add_option("--traces", traces, "trace file(s)")->required();
  part->add_option("--loc", loc, "target location");
  part->add_option("--root", root, "root variable")->required();

  auto* gen = app.add_subcommand("gen", "run a built-in program, dump traces");
  gen->add_option("--program", program, "built-in program name")->required();
  gen->add_option("--sizes", sizes, "input structure sizes")
      ->delimiter(',')
      ->required();
  gen->add_option("--seed", seed, "base random seed");
  gen->add_option("--out", out_path, "output path (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(infer))
      return cmd_infer(preds, traces, loc, scope, width, format);
    if (app.got_subcommand(chk))
      return cmd_check(preds, traces, formula_text, formula_file, loc);
    if (app.got_subcommand(val))
      return cmd_validate(preds, traces, pre_loc, scope, width);
    if (app.got_subcommand(part))
      return cmd_partition(preds, traces, loc, root);
    if (app.got_subcommand(gen)) return cmd_gen(program, sizes, seed, out_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}
