#include "chainplan/tree.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace chainplan {

namespace {

template <class T>
std::vector<T> reversed_copy(const std::vector<T>& v) {
  return {v.rbegin(), v.rend()};
}

SwitchSite flipped(SwitchSite s) {
  switch (s) {
    case SwitchSite::AtChild: return SwitchSite::AtParent;
    case SwitchSite::AtParent: return SwitchSite::AtChild;
    default: return SwitchSite::None;
  }
}

}  // namespace

RegraspAction reversed(const RegraspAction& a) {
  RegraspAction r;
  r.place = a.place;
  r.go = reversed_copy(a.back);
  r.back = reversed_copy(a.go);
  for (auto it = a.switches.rbegin(); it != a.switches.rend(); ++it)
    r.switches.push_back({it->arm, reversed_copy(it->approach), reversed_copy(it->swing), reversed_copy(it->retreat)});
  return r;
}

Forest::Forest(const CompositeConfig& start_root, const CompositeConfig& goal_root) : trees_(2) {
  for (int t = 0; t < 2; ++t) {
    TreeVertex v;
    v.id = t;
    v.tree = t;
    v.config = t == 0 ? start_root : goal_root;
    vertices_.push_back(std::move(v));
    trees_[static_cast<std::size_t>(t)].root = t;
  }
}

std::size_t Forest::tree_size(int t) const {
  return static_cast<std::size_t>(
      std::count_if(vertices_.begin(), vertices_.end(), [t](const TreeVertex& v) { return v.tree == t; }));
}

VertexId Forest::add_vertex(VertexId parent, CompositeConfig config, CompositePath inbound, SwitchSite site) {
  TreeVertex v;
  v.id = static_cast<VertexId>(vertices_.size());
  const TreeVertex& p = vertex(parent);
  v.tree = p.tree;
  v.config = std::move(config);
  v.inbound_path = std::move(inbound);
  v.site = site;
  v.parent = parent;
  v.regrasp_count = p.regrasp_count + (site != SwitchSite::None ? 1 : 0);
  vertices_.push_back(std::move(v));
  vertex(parent).children.push_back(vertices_.back().id);
  return vertices_.back().id;
}

SwitchRequest Forest::switch_request(VertexId id) const {
  const TreeVertex& v = vertex(id);
  if (v.site == SwitchSite::None || !v.parent) throw std::logic_error("vertex has no switch on its inbound edge");
  if (v.site == SwitchSite::AtChild) return {v.inbound_path.back(), v.config};
  return {vertex(*v.parent).config, v.inbound_path.front()};
}

Pose2 Forest::switch_pose(VertexId id) const { return switch_request(id).pre.object; }

void Forest::reroot(VertexId cut, VertexId id, VertexId new_parent, CompositePath edge, SwitchSite site,
                    bool has_regrasp, std::optional<RegraspAction> action) {
  // Chain id -> ... -> cut following parent links.
  std::vector<VertexId> chain{id};
  while (chain.back() != cut) {
    const auto p = vertex(chain.back()).parent;
    if (!p) throw std::logic_error("reroot: cut vertex is not an ancestor of the bridge endpoint");
    chain.push_back(*p);
  }

  std::vector<VertexId> moved;
  std::vector<VertexId> stack{cut};
  while (!stack.empty()) {
    const VertexId u = stack.back();
    stack.pop_back();
    moved.push_back(u);
    for (VertexId c : vertex(u).children) stack.push_back(c);
  }

  TreeVertex& top = vertex(cut);
  if (top.parent) {
    auto& sib = vertex(*top.parent).children;
    sib.erase(std::remove(sib.begin(), sib.end(), cut), sib.end());
  }
  top.parent.reset();
  top.inbound_path.clear();
  top.site = SwitchSite::None;
  top.has_regrasp = false;
  top.regrasp_action.reset();

  for (std::size_t i = chain.size() - 1; i-- > 0;) {
    TreeVertex& child = vertex(chain[i]);
    TreeVertex& par = vertex(chain[i + 1]);
    par.inbound_path = reversed_copy(child.inbound_path);
    par.site = flipped(child.site);
    par.has_regrasp = child.has_regrasp;
    par.regrasp_action.reset();
    if (child.regrasp_action) par.regrasp_action = reversed(*child.regrasp_action);
    par.parent = child.id;
    par.children.erase(std::remove(par.children.begin(), par.children.end(), child.id), par.children.end());
    child.children.push_back(par.id);
    child.parent.reset();
  }

  TreeVertex& v = vertex(id);
  v.parent = new_parent;
  v.inbound_path = std::move(edge);
  v.site = site;
  v.has_regrasp = has_regrasp;
  v.regrasp_action = std::move(action);
  vertex(new_parent).children.push_back(id);

  const int t = vertex(new_parent).tree;
  for (VertexId u : moved) vertex(u).tree = t;
  recount(id);
}

void Forest::recount(VertexId from) {
  std::vector<VertexId> stack{from};
  while (!stack.empty()) {
    const VertexId u = stack.back();
    stack.pop_back();
    TreeVertex& v = vertex(u);
    v.regrasp_count = (v.parent ? vertex(*v.parent).regrasp_count : 0) + (v.need_regrasp() ? 1 : 0);
    for (VertexId c : v.children) stack.push_back(c);
  }
}

bool Forest::blacklisted(const Pose2& p, double w_rot) const {
  for (const auto& t : trees_)
    for (const auto& b : t.blacklist)
      if (pose_distance(p, b.center, w_rot) <= b.radius) return true;
  return false;
}

void Forest::add_blacklist(const BlacklistBall& ball) {
  for (auto& t : trees_) t.blacklist.push_back(ball);
}

std::optional<std::string> Forest::audit() const {
  std::ostringstream os;
  for (int t = 0; t < 2; ++t) {
    const Tree& tr = tree(t);
    const TreeVertex& r = vertex(tr.root);
    if (r.tree != t || r.parent) {
      os << "tree " << t << ": root " << tr.root << " is not a parentless member";
      return os.str();
    }
  }
  for (const auto& v : vertices_) {
    if (!v.parent) {
      if (v.id != tree(v.tree).root) {
        os << "vertex " << v.id << " has no parent but is not a root";
        return os.str();
      }
      continue;
    }
    const TreeVertex& p = vertex(*v.parent);
    if (p.tree != v.tree) {
      os << "vertex " << v.id << " and its parent are in different trees";
      return os.str();
    }
    if (std::find(p.children.begin(), p.children.end(), v.id) == p.children.end()) {
      os << "vertex " << v.id << " missing from its parent's children";
      return os.str();
    }
    if (v.regrasp_count != p.regrasp_count + (v.need_regrasp() ? 1 : 0)) {
      os << "vertex " << v.id << " has inconsistent regrasp count";
      return os.str();
    }
    if (v.has_regrasp && !v.need_regrasp()) {
      os << "vertex " << v.id << " has a regrasp action but no request";
      return os.str();
    }
    // Walking up must reach the root within |V| steps.
    std::size_t steps = 0;
    VertexId u = v.id;
    while (vertex(u).parent && steps <= vertices_.size()) {
      u = *vertex(u).parent;
      ++steps;
    }
    if (steps > vertices_.size() || u != tree(v.tree).root) {
      os << "vertex " << v.id << " does not reach its tree root";
      return os.str();
    }
  }
  return std::nullopt;
}

}  // namespace chainplan
