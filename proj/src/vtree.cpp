#include "wmcvar/vtree.hpp"

#include "line_scanner.hpp"
#include "wmcvar/error.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <sstream>

namespace wmcvar {

VnodeId Vtree::Builder::leaf(Var x, std::int64_t file_id) {
  if (x == 0)
    throw ParseError("variable ids start at 1");
  Vnode n;
  n.var = x;
  n.file_id = file_id;
  nodes_.push_back(n);
  return static_cast<VnodeId>(nodes_.size() - 1);
}

VnodeId Vtree::Builder::internal(VnodeId left, VnodeId right,
                                 std::int64_t file_id) {
  auto check = [&](VnodeId c) {
    if (c == kBottom || c >= nodes_.size())
      throw ParseError("dangling child id");
    if (nodes_[c].parent != kBottom)
      throw ParseError("vnode has two parents");
  };
  check(left);
  check(right);
  if (left == right)
    throw ParseError("internal vnode needs two distinct children");
  Vnode n;
  n.left = left;
  n.right = right;
  n.file_id = file_id;
  nodes_.push_back(n);
  auto id = static_cast<VnodeId>(nodes_.size() - 1);
  nodes_[left].parent = id;
  nodes_[right].parent = id;
  return id;
}

Vtree Vtree::Builder::build() {
  if (nodes_.size() < 2)
    throw ParseError("empty vtree");
  Vtree vt;
  vt.nodes_ = std::move(nodes_);
  nodes_ = {Vnode{}};

  VnodeId root = kBottom;
  Var max_var = 0;
  std::size_t leaves = 0;
  for (VnodeId v = 1; v < vt.nodes_.size(); ++v) {
    if (vt.nodes_[v].parent == kBottom) {
      if (root != kBottom)
        throw ParseError("multiple roots");
      root = v;
    }
    if (vt.nodes_[v].var != 0) {
      ++leaves;
      max_var = std::max(max_var, vt.nodes_[v].var);
    }
  }
  vt.root_ = root;
  vt.leaf_of_var_.assign(max_var + 1, kBottom);
  for (VnodeId v = 1; v < vt.nodes_.size(); ++v) {
    Var x = vt.nodes_[v].var;
    if (x == 0)
      continue;
    if (vt.leaf_of_var_[x] != kBottom)
      throw ParseError("duplicate variable " + std::to_string(x));
    vt.leaf_of_var_[x] = v;
  }
  if (leaves != max_var)
    throw ParseError("variables must be dense 1.." + std::to_string(max_var));
  vt.finalize();
  return vt;
}

void Vtree::finalize() {
  const std::size_t m = nodes_.size();
  const std::size_t n = num_vars();
  scopes_.assign(m, VarSet(n + 1));
  first_.assign(m, 0);
  tin_.assign(m, 0);
  tout_.assign(m, 0);
  postorder_.clear();
  postorder_.reserve(m - 1);

  std::vector<VnodeId> euler;
  euler.reserve(2 * m);
  std::uint32_t clock = 0;
  // Iterative DFS producing Euler tour, depths, entry/exit times and postorder.
  struct Frame {
    VnodeId v;
    int stage;
  };
  std::vector<Frame> stack{{root_, 0}};
  nodes_[root_].depth = 0;
  while (!stack.empty()) {
    auto &[v, stage] = stack.back();
    Vnode &node = nodes_[v];
    if (stage == 0) {
      tin_[v] = clock++;
      first_[v] = static_cast<std::uint32_t>(euler.size());
      euler.push_back(v);
      if (node.var != 0) {
        scopes_[v].set(node.var);
        tout_[v] = clock++;
        postorder_.push_back(v);
        stack.pop_back();
        continue;
      }
      stage = 1;
      nodes_[node.left].depth = node.depth + 1;
      stack.push_back({node.left, 0});
    } else if (stage == 1) {
      euler.push_back(v);
      stage = 2;
      nodes_[node.right].depth = node.depth + 1;
      stack.push_back({node.right, 0});
    } else {
      euler.push_back(v);
      scopes_[v] = scopes_[node.left] | scopes_[node.right];
      tout_[v] = clock++;
      postorder_.push_back(v);
      stack.pop_back();
    }
  }
  if (postorder_.size() != m - 1)
    throw ParseError("vtree is not connected");

  const std::size_t len = euler.size();
  log2_.assign(len + 1, 0);
  for (std::size_t i = 2; i <= len; ++i)
    log2_[i] = static_cast<std::uint8_t>(log2_[i / 2] + 1);
  sparse_.assign(log2_[len] + 1, {});
  sparse_[0] = euler;
  for (std::size_t k = 1; k < sparse_.size(); ++k) {
    const std::size_t span = std::size_t{1} << k;
    auto &row = sparse_[k];
    const auto &prev = sparse_[k - 1];
    row.resize(len - span + 1);
    for (std::size_t i = 0; i + span <= len; ++i) {
      VnodeId a = prev[i];
      VnodeId b = prev[i + span / 2];
      row[i] = nodes_[a].depth <= nodes_[b].depth ? a : b;
    }
  }

  // Vnodes built without explicit ids get their in-order position, the
  // numbering used by the SDD text format.
  std::int64_t next_id = 0;
  for (VnodeId v = 1; v < m; ++v)
    next_id = std::max(next_id, nodes_[v].file_id + 1);
  std::vector<VnodeId> inorder;
  inorder.reserve(m - 1);
  for (VnodeId v = root_; v != kBottom || !stack.empty();) {
    if (v != kBottom) {
      stack.push_back({v, 0});
      v = nodes_[v].left;
    } else {
      v = stack.back().v;
      stack.pop_back();
      inorder.push_back(v);
      v = nodes_[v].right;
    }
  }
  const bool none_named = next_id == 0;
  for (std::size_t i = 0; i < inorder.size(); ++i) {
    auto &node = nodes_[inorder[i]];
    if (node.file_id < 0)
      node.file_id = none_named ? static_cast<std::int64_t>(i) : next_id++;
  }

  by_file_id_.clear();
  for (VnodeId v = 1; v < m; ++v)
    by_file_id_.emplace(nodes_[v].file_id, v);
}

VnodeId Vtree::find_file_id(std::int64_t id) const {
  auto it = by_file_id_.find(id);
  return it == by_file_id_.end() ? kBottom : it->second;
}

VnodeId Vtree::lca(VnodeId v, VnodeId w) const {
  if (v == kBottom)
    return w;
  if (w == kBottom)
    return v;
  if (v == w)
    return v;
  std::uint32_t i = first_[v];
  std::uint32_t j = first_[w];
  if (i > j)
    std::swap(i, j);
  const auto k = log2_[j - i + 1];
  VnodeId a = sparse_[k][i];
  VnodeId b = sparse_[k][j + 1 - (std::uint32_t{1} << k)];
  return nodes_[a].depth <= nodes_[b].depth ? a : b;
}

bool Vtree::is_ancestor_or_self(VnodeId w, VnodeId v) const {
  if (v == kBottom)
    return true;
  if (w == kBottom)
    return false;
  return tin_[w] <= tin_[v] && tout_[v] <= tout_[w];
}

bool Vtree::same_below(const Vtree &other, VnodeId v, VnodeId w) const {
  std::vector<std::pair<VnodeId, VnodeId>> stack{{v, w}};
  while (!stack.empty()) {
    auto [a, b] = stack.back();
    stack.pop_back();
    if (nodes_[a].var != other.nodes_[b].var)
      return false;
    if (nodes_[a].var == 0) {
      stack.push_back({nodes_[a].left, other.nodes_[b].left});
      stack.push_back({nodes_[a].right, other.nodes_[b].right});
    }
  }
  return true;
}

bool Vtree::same_structure(const Vtree &other) const {
  if (this == &other)
    return true;
  if (num_vnodes() != other.num_vnodes() || num_vars() != other.num_vars())
    return false;
  return same_below(other, root_, other.root_);
}

namespace {

VnodeId build_balanced(Vtree::Builder &b, std::span<const Var> order) {
  if (order.size() == 1)
    return b.leaf(order[0]);
  auto mid = order.size() / 2;
  auto l = build_balanced(b, order.subspan(0, mid));
  auto r = build_balanced(b, order.subspan(mid));
  return b.internal(l, r);
}

void require_nonempty(std::span<const Var> order) {
  if (order.empty())
    throw DomainError("vtree needs at least one variable");
}

} // namespace

Vtree Vtree::balanced(std::span<const Var> order) {
  require_nonempty(order);
  Builder b;
  build_balanced(b, order);
  return b.build();
}

Vtree Vtree::right_linear(std::span<const Var> order) {
  require_nonempty(order);
  Builder b;
  VnodeId acc = b.leaf(order.back());
  for (std::size_t i = order.size() - 1; i-- > 0;)
    acc = b.internal(b.leaf(order[i]), acc);
  return b.build();
}

Vtree Vtree::left_linear(std::span<const Var> order) {
  require_nonempty(order);
  Builder b;
  VnodeId acc = b.leaf(order.front());
  for (std::size_t i = 1; i < order.size(); ++i)
    acc = b.internal(acc, b.leaf(order[i]));
  return b.build();
}

Vtree Vtree::join(const Vtree &left, const Vtree &right) {
  Builder b;
  VnodeId l = b.copy(left);
  VnodeId r = b.copy(right);
  b.internal(l, r);
  return b.build();
}

VnodeId Vtree::Builder::copy(const Vtree &vt) {
  std::vector<VnodeId> map(vt.num_vnodes() + 1, kBottom);
  for (VnodeId v : vt.postorder())
    map[v] = vt.is_leaf(v) ? leaf(vt.var(v))
                           : internal(map[vt.left(v)], map[vt.right(v)]);
  return map[vt.root()];
}

Vtree parse_vtree(std::string_view text) {
  detail::LineScanner in(text);
  bool have_header = false;
  std::int64_t declared = 0;
  std::map<std::int64_t, VnodeId> ids;
  std::map<Var, std::size_t> var_line;
  Vtree::Builder builder;

  while (in.next_line()) {
    if (in.blank_or_comment())
      continue;
    auto kw = in.token();
    if (!have_header) {
      if (kw != "vtree")
        in.fail("expected 'vtree <node-count>' header");
      declared = in.nonnegative();
      in.expect_eol();
      have_header = true;
      continue;
    }
    if (kw == "L") {
      auto id = in.nonnegative();
      auto x = in.integer();
      if (x <= 0)
        in.fail("variable ids must be positive");
      in.expect_eol();
      if (ids.count(id))
        in.fail("duplicate vnode id " + std::to_string(id));
      if (auto it = var_line.find(static_cast<Var>(x)); it != var_line.end())
        in.fail("duplicate variable " + std::to_string(x) + " (first on line " +
                std::to_string(it->second) + ")");
      var_line.emplace(static_cast<Var>(x), in.line_no());
      ids.emplace(id, builder.leaf(static_cast<Var>(x), id));
    } else if (kw == "I") {
      auto id = in.nonnegative();
      auto l = in.nonnegative();
      auto r = in.nonnegative();
      in.expect_eol();
      if (ids.count(id))
        in.fail("duplicate vnode id " + std::to_string(id));
      auto lit = ids.find(l);
      auto rit = ids.find(r);
      if (lit == ids.end() || rit == ids.end())
        in.fail("dangling child id " +
                std::to_string(lit == ids.end() ? l : r));
      try {
        ids.emplace(id, builder.internal(lit->second, rit->second, id));
      } catch (const ParseError &e) {
        in.fail(e.what());
      }
    } else {
      in.fail("unknown record '" + std::string(kw) + "'");
    }
  }
  if (!have_header)
    throw ParseError("missing 'vtree' header", in.line_no(), 1);
  if (static_cast<std::int64_t>(ids.size()) != declared)
    throw ParseError("header declares " + std::to_string(declared) +
                         " vnodes, found " + std::to_string(ids.size()),
                     in.line_no(), 1);
  return builder.build();
}

std::string print_vtree(const Vtree &vt) {
  std::ostringstream out;
  out << "vtree " << vt.num_vnodes() << '\n';
  for (VnodeId v : vt.postorder()) {
    if (vt.is_leaf(v))
      out << "L " << vt.file_id(v) << ' ' << vt.var(v) << '\n';
    else
      out << "I " << vt.file_id(v) << ' ' << vt.file_id(vt.left(v)) << ' '
          << vt.file_id(vt.right(v)) << '\n';
  }
  return out.str();
}

} // namespace wmcvar
