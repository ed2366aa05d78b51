#include "wmcvar/circuit.hpp"

#include "line_scanner.hpp"
#include "wmcvar/error.hpp"

#include <map>
#include <sstream>

namespace wmcvar {

Circuit parse_sdd(std::string_view text, std::shared_ptr<const Vtree> vt) {
  if (!vt)
    throw ParseError("an sdd file needs a vtree");
  detail::LineScanner in(text);
  CircuitBuilder b;
  std::map<std::int64_t, NodeId> ids;
  bool have_header = false;
  std::int64_t declared = 0;
  std::optional<NodeId> last;

  struct PendingCheck {
    NodeId node;
    VnodeId vnode;
    std::size_t line;
  };
  std::vector<PendingCheck> checks;

  auto node_ref = [&](std::int64_t id) {
    auto it = ids.find(id);
    if (it == ids.end())
      in.fail("unknown node id " + std::to_string(id));
    return it->second;
  };
  auto declare = [&](std::int64_t id, NodeId node) {
    if (!ids.emplace(id, node).second)
      in.fail("duplicate node id " + std::to_string(id));
    last = node;
  };
  auto vnode_ref = [&](std::int64_t id) {
    VnodeId v = vt->find_file_id(id);
    if (v == kBottom)
      in.fail("unknown vtree id " + std::to_string(id));
    return v;
  };

  while (in.next_line()) {
    if (in.blank_or_comment())
      continue;
    auto kw = in.token();
    if (!have_header) {
      if (kw != "sdd")
        in.fail("expected 'sdd <node-count>' header");
      declared = in.nonnegative();
      in.expect_eol();
      have_header = true;
      continue;
    }
    if (kw == "F" || kw == "T") {
      auto id = in.nonnegative();
      in.expect_eol();
      declare(id, kw == "F" ? b.false_node() : b.true_node());
    } else if (kw == "L") {
      auto id = in.nonnegative();
      auto vid = in.nonnegative();
      auto lit = in.integer();
      in.expect_eol();
      if (lit == 0 || static_cast<std::size_t>(lit < 0 ? -lit : lit) >
                          vt->num_vars())
        in.fail("literal " + std::to_string(lit) + " outside the vtree");
      VnodeId v = vnode_ref(vid);
      if (!vt->is_leaf(v) || vt->var(v) != lit_var(static_cast<Lit>(lit)))
        in.fail("vtree id mismatch: vnode " + std::to_string(vid) +
                " is not the leaf of variable " +
                std::to_string(lit_var(static_cast<Lit>(lit))));
      declare(id, b.literal(static_cast<Lit>(lit)));
    } else if (kw == "D") {
      auto id = in.nonnegative();
      auto vid = in.nonnegative();
      auto k = in.nonnegative();
      VnodeId v = vnode_ref(vid);
      if (vt->is_leaf(v))
        in.fail("decision node on leaf vnode " + std::to_string(vid));
      if (k == 0)
        in.fail("decision node without elements");
      std::vector<NodeId> elems;
      for (std::int64_t e = 0; e < k; ++e) {
        NodeId p = node_ref(in.nonnegative());
        NodeId s = node_ref(in.nonnegative());
        NodeId pair[2] = {p, s};
        elems.push_back(b.and_node(pair));
      }
      in.expect_eol();
      NodeId d = b.or_node(elems, v);
      checks.push_back({d, v, in.line_no()});
      declare(id, d);
    } else {
      in.fail("unknown record '" + std::string(kw) + "'");
    }
  }
  if (!have_header)
    throw ParseError("missing 'sdd' header", in.line_no(), 1);
  if (static_cast<std::int64_t>(ids.size()) != declared)
    throw ParseError("header declares " + std::to_string(declared) +
                         " nodes, found " + std::to_string(ids.size()),
                     in.line_no(), 1);
  Circuit c = b.build(*last, vt);

  for (const auto &chk : checks) {
    const VarSet &ls = vt->scope(vt->left(chk.vnode));
    const VarSet &rs = vt->scope(vt->right(chk.vnode));
    for (NodeId el : c.children(chk.node)) {
      auto ps = c.children(el);
      if (!c.scope(ps[0]).is_subset_of(ls) || !c.scope(ps[1]).is_subset_of(rs))
        throw ParseError("vtree id mismatch: element scopes are not under "
                         "the children of vnode " +
                             std::to_string(vt->file_id(chk.vnode)),
                         chk.line, 1);
    }
  }
  return c;
}

std::string print_sdd(const Circuit &c) {
  if (!c.has_vtree())
    throw StructureError("printing an sdd needs a vtree");
  const Vtree &vt = c.vtree();
  std::vector<char> reach(c.size(), 0);
  reach[c.root()] = 1;
  for (NodeId a = c.root() + 1; a-- > 0;)
    if (reach[a])
      for (NodeId ch : c.children(a))
        reach[ch] = 1;

  std::vector<std::int64_t> out_id(c.size(), -1);
  std::int64_t next = 0;
  std::ostringstream body;
  for (NodeId a = 0; a <= c.root(); ++a) {
    if (!reach[a])
      continue;
    switch (c.kind(a)) {
    case NodeKind::False:
      out_id[a] = next++;
      body << "F " << out_id[a] << '\n';
      break;
    case NodeKind::True:
      out_id[a] = next++;
      body << "T " << out_id[a] << '\n';
      break;
    case NodeKind::Literal:
      out_id[a] = next++;
      body << "L " << out_id[a] << ' '
           << vt.file_id(vt.leaf_of(lit_var(c.lit(a)))) << ' ' << c.lit(a)
           << '\n';
      break;
    case NodeKind::And:
      if (a == c.root())
        throw StructureError("root is an and-node, not a decision node");
      break;
    case NodeKind::Or: {
      VnodeId v = c.decision_vnode(a);
      if (v == kBottom)
        throw StructureError("or-node " + std::to_string(a) +
                             " is not a decision node");
      out_id[a] = next++;
      body << "D " << out_id[a] << ' ' << vt.file_id(v) << ' '
           << c.children(a).size();
      for (NodeId el : c.children(a)) {
        auto ps = c.children(el);
        if (c.kind(el) != NodeKind::And || ps.size() != 2 ||
            out_id[ps[0]] < 0 || out_id[ps[1]] < 0)
          throw StructureError("decision node " + std::to_string(a) +
                               " has a malformed element");
        body << ' ' << out_id[ps[0]] << ' ' << out_id[ps[1]];
      }
      body << '\n';
      break;
    }
    }
  }
  return "sdd " + std::to_string(next) + "\n" + body.str();
}

} // namespace wmcvar
