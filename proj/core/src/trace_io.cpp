#include "heapinv/trace_io.hpp"

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

namespace heapinv {

namespace {

using json = nlohmann::ordered_json;

std::string addr_str(Addr a) {
  std::ostringstream os;
  os << "0x" << std::hex << a;
  return os.str();
}

json value_to_json(const Value& v) {
  if (v.is_nil()) return "nil";
  if (v.is_int()) return v.int_value();
  return addr_str(v.addr_token());
}

Value value_from_json(const json& j, int line) {
  if (j.is_number_integer()) return Value::integer(j.get<std::int64_t>());
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "nil") return Value::nil();
    if (s.rfind("0x", 0) == 0) {
      Addr a = 0;
      std::istringstream is(s.substr(2));
      is >> std::hex >> a;
      if (!is.fail() && is.eof()) return Value::addr(a);
    }
    throw TraceError("line " + std::to_string(line) + ": bad pointer value '" +
                     s + "'");
  }
  throw TraceError("line " + std::to_string(line) + ": bad value");
}

Addr addr_from_key(const std::string& s, int line) {
  if (s.rfind("0x", 0) == 0) {
    Addr a = 0;
    std::istringstream is(s.substr(2));
    is >> std::hex >> a;
    if (!is.fail() && is.eof()) return a;
  }
  throw TraceError("line " + std::to_string(line) + ": bad address key '" + s +
                   "'");
}

}  // namespace

TypeEnv header_types(const TraceHeader& h, const std::string& base_dir) {
  std::string src = h.types;
  if (src.find('{') == std::string::npos) {  // a path, not inline DSL
    std::ifstream in(std::filesystem::path(base_dir) / src);
    if (!in) throw TraceError("cannot open type declarations: " + src);
    std::ostringstream buf;
    buf << in.rdbuf();
    src = buf.str();
  }
  try {
    return parse_predicates(src).types;
  } catch (const ParseError& e) {
    throw TraceError(std::string("header types: ") + e.what());
  }
}

std::string traces_to_string(const TraceFile& tf) {
  std::ostringstream out;
  json header;
  header["header"]["types"] = tf.header.types;
  header["header"]["params"] = tf.header.params;
  header["header"]["exits"] = tf.header.exits;
  out << header.dump() << "\n";
  for (const auto& m : tf.records) {
    json r;
    r["test_id"] = m.test_id;
    r["loc"] = m.location;
    r["stack"] = json::object();
    for (const auto& [var, val] : m.stack) r["stack"][var] = value_to_json(val);
    r["heap"] = json::object();
    for (const auto& [addr, cell] : m.heap) {
      json c;
      c["type"] = cell.type;
      c["fields"] = json::array();
      for (const auto& f : cell.fields) c["fields"].push_back(value_to_json(f));
      r["heap"][addr_str(addr)] = std::move(c);
    }
    out << r.dump() << "\n";
  }
  return out.str();
}

TraceFile traces_from_string(const std::string& text,
                             const std::string& base_dir) {
  TraceFile tf;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  bool have_header = false;
  TypeEnv types;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw TraceError("line " + std::to_string(lineno) + ": " + e.what());
    }
    if (!have_header) {
      if (!j.contains("header"))
        throw TraceError("line " + std::to_string(lineno) +
                         ": expected header object");
      const json& h = j["header"];
      tf.header.types = h.at("types").get<std::string>();
      tf.header.params = h.at("params").get<std::vector<std::string>>();
      tf.header.exits = h.at("exits").get<std::vector<std::string>>();
      types = header_types(tf.header, base_dir);
      have_header = true;
      continue;
    }
    StackHeapModel m;
    try {
      m.test_id = j.at("test_id").get<std::string>();
      m.location = j.at("loc").get<std::string>();
      for (const auto& [var, val] : j.at("stack").items())
        m.stack[var] = value_from_json(val, lineno);
      for (const auto& [key, cell] : j.at("heap").items()) {
        HeapCell c;
        c.type = cell.at("type").get<std::string>();
        for (const auto& f : cell.at("fields"))
          c.fields.push_back(value_from_json(f, lineno));
        m.heap[addr_from_key(key, lineno)] = std::move(c);
      }
    } catch (const json::exception& e) {
      throw TraceError("line " + std::to_string(lineno) + ": " + e.what());
    }
    try {
      validate_model(m, types);
    } catch (const std::exception& e) {
      throw TraceError("line " + std::to_string(lineno) + ": " + e.what());
    }
    tf.records.push_back(std::move(m));
  }
  if (!have_header) throw TraceError("missing header");
  return tf;
}

TraceFile read_traces(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw TraceError("cannot open trace file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return traces_from_string(buf.str(),
                            std::filesystem::path(path).parent_path().string());
}

void write_traces(const TraceFile& tf, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw TraceError("cannot write trace file: " + path);
  out << traces_to_string(tf);
}

// -- built-in definitions and generators --------------------------------------

const std::string& builtin_definitions() {
  static const std::string defs = R"(// shipped structure types and predicates
type Node { next: Node*, prev: Node* }
type SNode { next: SNode*, val: int }
type TNode { left: TNode*, right: TNode*, val: int }

pred sll(hd: SNode*) :=
    emp & hd = nil
  | exists u, d . hd -> SNode { next: u, val: d } * sll(u) ;

pred dll(hd: Node*, pr: Node*, tl: Node*, nx: Node*) :=
    emp & hd = nx & pr = tl
  | exists u . hd -> Node { next: u, prev: pr } * dll(u, hd, tl, nx) ;

pred srtl(hd: SNode*, lo: int) :=
    emp & hd = nil
  | exists u, d . hd -> SNode { next: u, val: d } * srtl(u, d) & !(d < lo) ;

pred tree(rt: TNode*) :=
    emp & rt = nil
  | exists l, r, d . rt -> TNode { left: l, right: r, val: d }
      * tree(l) * tree(r) ;
)";
  return defs;
}

namespace {

std::string builtin_types_only() {
  return "type Node { next: Node*, prev: Node* }\n"
         "type SNode { next: SNode*, val: int }\n"
         "type TNode { left: TNode*, right: TNode*, val: int }\n";
}

std::vector<std::int64_t> payloads(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::int64_t> dist(0, 99);
  std::vector<std::int64_t> out(n);
  for (auto& v : out) v = dist(rng);
  return out;
}

Value bst_insert_node(Heap& heap, Value root, Addr node) {
  if (!root.is_addr()) return Value::addr(node);
  HeapCell& cell = heap[root.addr_token()];
  if (heap[node].fields[2].int_value() < cell.fields[2].int_value())
    cell.fields[0] = bst_insert_node(heap, cell.fields[0], node);
  else
    cell.fields[1] = bst_insert_node(heap, cell.fields[1], node);
  return root;
}

}  // namespace

Value generate_structure(const GenSpec& spec, Heap& heap, Addr& next_addr) {
  const std::size_t n = spec.size;
  if (n == 0) return Value::nil();
  std::vector<Addr> addrs(n);
  for (auto& a : addrs) a = next_addr++;
  std::vector<std::int64_t> vals = payloads(n, spec.seed);

  switch (spec.structure) {
    case GenSpec::Structure::Sll:
    case GenSpec::Structure::SortedSll: {
      if (spec.structure == GenSpec::Structure::SortedSll)
        std::sort(vals.begin(), vals.end());
      for (std::size_t i = 0; i < n; ++i) {
        Value nxt = i + 1 < n ? Value::addr(addrs[i + 1]) : Value::nil();
        heap[addrs[i]] = HeapCell{"SNode", {nxt, Value::integer(vals[i])}};
      }
      return Value::addr(addrs[0]);
    }
    case GenSpec::Structure::Dll: {
      for (std::size_t i = 0; i < n; ++i) {
        Value nxt = i + 1 < n ? Value::addr(addrs[i + 1]) : Value::nil();
        Value prv = i > 0 ? Value::addr(addrs[i - 1]) : Value::nil();
        heap[addrs[i]] = HeapCell{"Node", {nxt, prv}};
      }
      return Value::addr(addrs[0]);
    }
    case GenSpec::Structure::Bst: {
      Value root = Value::nil();
      for (std::size_t i = 0; i < n; ++i) {
        heap[addrs[i]] = HeapCell{
            "TNode", {Value::nil(), Value::nil(), Value::integer(vals[i])}};
        root = bst_insert_node(heap, root, addrs[i]);
      }
      return root;
    }
  }
  return Value::nil();
}

namespace {

class Emitter {
public:
  explicit Emitter(TraceFile& tf) : tf_(tf) {}

  void emit(const std::string& test_id, const std::string& loc,
            std::map<std::string, Value> stack, const Heap& heap) {
    StackHeapModel m;
    m.test_id = test_id;
    m.location = loc;
    m.stack = std::move(stack);
    m.heap = heap;
    tf_.records.push_back(std::move(m));
  }

private:
  TraceFile& tf_;
};

struct CrashError {};  // modeled null dereference: stop emitting

Value field(const Heap& heap, const Value& p, std::size_t i) {
  if (!p.is_addr()) throw CrashError{};
  return heap.at(p.addr_token()).fields[i];
}

void set_field(Heap& heap, const Value& p, std::size_t i, const Value& v) {
  if (!p.is_addr()) throw CrashError{};
  heap[p.addr_token()].fields[i] = v;
}

// Fig-1-style dll concatenation; `buggy` dereferences x before the nil test.
Value concat(Emitter& em, Heap& heap, Value x, Value y, int depth,
             bool buggy) {
  const std::string id = "t" + std::to_string(depth);
  em.emit(id, "L1", {{"x", x}, {"y", y}}, heap);
  if (buggy) (void)field(heap, x, 0);  // null deref when x == nil
  if (!x.is_addr()) {
    em.emit(id, "L2", {{"x", x}, {"y", y}, {"res", y}}, heap);
    return y;
  }
  Value tmp = concat(em, heap, field(heap, x, 0), y, depth + 1, buggy);
  set_field(heap, x, 0, tmp);
  if (tmp.is_addr()) set_field(heap, tmp, 1, x);
  em.emit(id, "L3", {{"x", x}, {"tmp", tmp}, {"y", y}, {"res", x}}, heap);
  return x;
}

TraceFile run_dll_concat(const std::vector<GenSpec>& inputs, bool buggy) {
  TraceFile tf;
  tf.header.types = builtin_types_only();
  tf.header.params = {"x", "y"};
  tf.header.exits = {"L2", "L3"};
  Heap heap;
  Addr next = 1;
  GenSpec a = inputs[0], b = inputs[1];
  a.structure = GenSpec::Structure::Dll;
  b.structure = GenSpec::Structure::Dll;
  Value x = generate_structure(a, heap, next);
  Value y = generate_structure(b, heap, next);
  Emitter em(tf);
  try {
    concat(em, heap, x, y, 1, buggy);
  } catch (const CrashError&) {
    // runtime error: whatever was emitted so far is the trace
  }
  return tf;
}

TraceFile run_sll_reverse(const std::vector<GenSpec>& inputs) {
  TraceFile tf;
  tf.header.types = builtin_types_only();
  tf.header.params = {"h"};
  tf.header.exits = {"L3"};
  Heap heap;
  Addr next = 1;
  GenSpec g = inputs[0];
  g.structure = GenSpec::Structure::Sll;
  Value h = generate_structure(g, heap, next);
  Emitter em(tf);
  em.emit("t1", "L1", {{"h", h}}, heap);
  Value prev = Value::nil();
  while (h.is_addr()) {
    em.emit("t1", "L2", {{"h", h}, {"prev", prev}}, heap);
    Value nxt = field(heap, h, 0);
    set_field(heap, h, 0, prev);
    prev = h;
    h = nxt;
  }
  em.emit("t1", "L3", {{"h", h}, {"prev", prev}, {"res", prev}}, heap);
  return tf;
}

TraceFile run_sorted_insert(const std::vector<GenSpec>& inputs) {
  TraceFile tf;
  tf.header.types = builtin_types_only();
  tf.header.params = {"h", "v"};
  tf.header.exits = {"L2", "L3"};
  Heap heap;
  Addr next = 1;
  GenSpec g = inputs[0];
  g.structure = GenSpec::Structure::SortedSll;
  Value h = generate_structure(g, heap, next);
  std::mt19937_64 rng(g.seed ^ 0x9e3779b97f4a7c15ull);
  Value v = Value::integer(
      std::uniform_int_distribution<std::int64_t>(0, 99)(rng));
  Emitter em(tf);
  em.emit("t1", "L1", {{"h", h}, {"v", v}}, heap);
  Addr node = next++;
  heap[node] = HeapCell{"SNode", {Value::nil(), v}};
  if (!h.is_addr() || field(heap, h, 1).int_value() >= v.int_value()) {
    set_field(heap, Value::addr(node), 0, h);
    em.emit("t1", "L2",
            {{"h", h}, {"v", v}, {"res", Value::addr(node)}}, heap);
    return tf;
  }
  Value cur = h;
  while (field(heap, cur, 0).is_addr() &&
         field(heap, field(heap, cur, 0), 1).int_value() < v.int_value())
    cur = field(heap, cur, 0);
  set_field(heap, Value::addr(node), 0, field(heap, cur, 0));
  set_field(heap, cur, 0, Value::addr(node));
  em.emit("t1", "L3", {{"h", h}, {"v", v}, {"cur", cur}, {"res", h}}, heap);
  return tf;
}

TraceFile run_bst_insert(const std::vector<GenSpec>& inputs) {
  TraceFile tf;
  tf.header.types = builtin_types_only();
  tf.header.params = {"t", "v"};
  tf.header.exits = {"L2"};
  Heap heap;
  Addr next = 1;
  GenSpec g = inputs[0];
  g.structure = GenSpec::Structure::Bst;
  Value t = generate_structure(g, heap, next);
  std::mt19937_64 rng(g.seed ^ 0xda942042e4dd58b5ull);
  Value v = Value::integer(
      std::uniform_int_distribution<std::int64_t>(0, 99)(rng));
  Emitter em(tf);
  em.emit("t1", "L1", {{"t", t}, {"v", v}}, heap);
  Addr node = next++;
  heap[node] = HeapCell{"TNode", {Value::nil(), Value::nil(), v}};
  Value res = bst_insert_node(heap, t, node);
  em.emit("t1", "L2", {{"t", t}, {"v", v}, {"res", res}}, heap);
  return tf;
}

}  // namespace

TraceFile run_builtin(const std::string& program,
                      const std::vector<GenSpec>& inputs) {
  auto want = [&](std::size_t n) {
    if (inputs.size() != n)
      throw TraceError(program + " takes " + std::to_string(n) +
                       " input(s), got " + std::to_string(inputs.size()));
  };
  if (program == "dll_concat") {
    want(2);
    return run_dll_concat(inputs, false);
  }
  if (program == "dll_concat_bug") {
    want(2);
    return run_dll_concat(inputs, true);
  }
  if (program == "sll_reverse") {
    want(1);
    return run_sll_reverse(inputs);
  }
  if (program == "sorted_insert") {
    want(1);
    return run_sorted_insert(inputs);
  }
  if (program == "bst_insert") {
    want(1);
    return run_bst_insert(inputs);
  }
  throw TraceError("unknown program: " + program);
}

}  // namespace heapinv
