// Copyright (c) 2026 The ppct Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ppct/sequitur.hpp"

#include <deque>
#include <map>
#include <sstream>
#include <unordered_map>

namespace ppct::plan {

namespace {

struct RuleImpl;

struct Node {
  Node* prev = nullptr;
  Node* next = nullptr;
  long long terminal = 0;
  RuleImpl* rule = nullptr;      // nonterminal reference
  RuleImpl* guard_of = nullptr;  // guard node of that rule's body
  bool dead = false;
};

struct RuleImpl {
  Node* guard = nullptr;
  int refcount = 0;
  int serial = 0;
  bool dead = false;
};

// Symbol identity for digram keys: terminals and rules live in disjoint key
// spaces; guards never collide with either.
struct SymKey {
  std::int64_t a = 0;
  std::int64_t b = 0;
  bool operator==(const SymKey& o) const { return a == o.a && b == o.b; }
};

struct SymKeyHash {
  std::size_t operator()(const SymKey& k) const {
    std::uint64_t h = static_cast<std::uint64_t>(k.a) * 0x9e3779b97f4a7c15ull;
    h ^= static_cast<std::uint64_t>(k.b) + 0x517cc1b727220a95ull + (h << 6) +
         (h >> 2);
    return static_cast<std::size_t>(h);
  }
};

class Builder {
 public:
  Builder() { rule0_ = new_rule(); }

  void append(long long terminal) {
    Node* s = alloc();
    s->terminal = terminal;
    insert_after(rule0_->guard->prev, s);
    if (s->prev && !s->prev->guard_of) check(s->prev);
  }

  Grammar export_grammar() {
    Grammar g;
    std::map<int, RuleImpl*> by_serial;
    for (RuleImpl* r : rules_)
      if (!r->dead) by_serial[r->serial] = r;
    std::unordered_map<RuleImpl*, int> ids;
    for (const auto& [serial, r] : by_serial) {
      int id = static_cast<int>(g.rules.size());
      ids[r] = id;
      g.rules.emplace_back();
    }
    for (const auto& [serial, r] : by_serial) {
      std::vector<GrammarSymbol>& body = g.rules[static_cast<std::size_t>(ids[r])];
      for (Node* n = r->guard->next; n != r->guard; n = n->next) {
        if (n->rule)
          body.push_back({true, ids.at(n->rule)});
        else
          body.push_back({false, static_cast<int>(n->terminal)});
      }
    }
    g.operations = ops_;
    return g;
  }

  std::uint64_t ops() const { return ops_; }

 private:
  Node* alloc() {
    arena_.emplace_back();
    return &arena_.back();
  }

  RuleImpl* new_rule() {
    rule_arena_.emplace_back();
    RuleImpl* r = &rule_arena_.back();
    r->serial = next_serial_++;
    r->guard = alloc();
    r->guard->guard_of = r;
    r->guard->prev = r->guard;
    r->guard->next = r->guard;
    rules_.push_back(r);
    return r;
  }

  static std::int64_t sym_id(const Node* n) {
    if (n->guard_of) return -2;  // guards never form digrams
    if (n->rule) return -(static_cast<std::int64_t>(n->rule->serial) + 3);
    return n->terminal;
  }
  static SymKey key_of(const Node* a) { return {sym_id(a), sym_id(a->next)}; }
  static bool same_value(const Node* a, const Node* b) {
    return sym_id(a) == sym_id(b);
  }

  void erase_digram_at(Node* left) {
    if (!left->next) return;
    SymKey k = key_of(left);
    ++ops_;
    auto it = index_.find(k);
    if (it != index_.end() && it->second == left) index_.erase(it);
  }

  // Relink left<->right. Mirrors the classic implementation: drop the dying
  // digram entry and repair the index around runs of identical symbols.
  void join(Node* left, Node* right) {
    if (left->next) {
      erase_digram_at(left);
      if (right->prev && right->next && !right->guard_of &&
          same_value(right, right->prev) && same_value(right, right->next)) {
        index_[key_of(right)] = right;
        ++ops_;
      }
      if (left->prev && left->next && !left->guard_of &&
          same_value(left, left->next) && same_value(left, left->prev)) {
        index_[key_of(left->prev)] = left->prev;
        ++ops_;
      }
    }
    left->next = right;
    right->prev = left;
    ++ops_;
  }

  void insert_after(Node* x, Node* y) {
    join(y, x->next);
    join(x, y);
  }

  void delete_symbol(Node* s) {
    join(s->prev, s->next);
    if (!s->guard_of) {
      erase_digram_at(s);
      if (s->rule) --s->rule->refcount;
    }
    s->dead = true;
  }

  bool entry_valid(Node* m, const SymKey& k) const {
    return !m->dead && m->next && !m->next->dead && m->next->prev == m &&
           key_of(m) == k;
  }

  // Enforces digram uniqueness for the pair starting at p. Returns true if
  // a substitution rewrote the neighborhood.
  bool check(Node* p) {
    if (!p || p->dead || p->guard_of) return false;
    if (!p->next || p->next->guard_of) return false;
    SymKey k = key_of(p);
    ++ops_;
    auto it = index_.find(k);
    if (it != index_.end() && !entry_valid(it->second, k)) {
      index_.erase(it);
      it = index_.end();
    }
    if (it == index_.end()) {
      index_[k] = p;
      ++ops_;
      return false;
    }
    Node* m = it->second;
    if (m == p || m->next == p || p->next == m) return false;  // overlap
    match(p, m);
    return true;
  }

  void substitute(Node* p, RuleImpl* r) {
    Node* q = p->prev;
    delete_symbol(p);
    delete_symbol(q->next);
    Node* nt = alloc();
    nt->rule = r;
    ++r->refcount;
    insert_after(q, nt);
    if (!check(q)) check(nt);
  }

  void match(Node* p, Node* m) {
    RuleImpl* r;
    if (m->prev->guard_of && m->next->next->guard_of &&
        m->prev->guard_of == m->next->next->guard_of) {
      r = m->prev->guard_of;
      substitute(p, r);
    } else {
      r = new_rule();
      Node* a = alloc();
      Node* b = alloc();
      a->terminal = m->terminal;
      a->rule = m->rule;
      if (a->rule) ++a->rule->refcount;
      b->terminal = m->next->terminal;
      b->rule = m->next->rule;
      if (b->rule) ++b->rule->refcount;
      insert_after(r->guard, a);
      insert_after(a, b);
      substitute(m, r);
      substitute(p, r);
      index_[key_of(a)] = a;
      ++ops_;
    }
    Node* first = r->guard->next;
    if (first->rule && first->rule->refcount == 1) expand_use(first);
  }

  // Inlines the sole remaining use of a rule and retires the rule.
  void expand_use(Node* nt) {
    RuleImpl* r = nt->rule;
    Node* left = nt->prev;
    Node* right = nt->next;
    Node* f = r->guard->next;
    Node* l = r->guard->prev;

    erase_digram_at(nt);
    nt->rule = nullptr;  // the rule dies here; do not decrement through it
    delete_symbol(nt);
    r->guard->dead = true;
    r->dead = true;

    join(left, f);
    join(l, right);
    check(l);
    if (!left->dead) check(left);
  }

  std::deque<Node> arena_;
  std::deque<RuleImpl> rule_arena_;
  std::vector<RuleImpl*> rules_;
  std::unordered_map<SymKey, Node*, SymKeyHash> index_;
  RuleImpl* rule0_ = nullptr;
  int next_serial_ = 0;
  std::uint64_t ops_ = 0;
};

}  // namespace

Grammar sequitur_build(const std::vector<int>& symbols) {
  if (symbols.empty()) throw DomainError("cannot build a grammar from an empty sequence");
  Builder b;
  for (int s : symbols) b.append(s);
  return b.export_grammar();
}

std::vector<int> expand(const Grammar& g, int rule_id) {
  if (rule_id < 0 || rule_id >= g.rule_count())
    throw UnknownRuleError("unknown rule r" + std::to_string(rule_id));
  std::vector<int> out;
  // Iterative expansion; depth is bounded by the rule count in a valid
  // grammar, so a deeper stack means a reference cycle.
  struct Frame {
    int rule;
    std::size_t pos;
  };
  std::vector<Frame> stack{{rule_id, 0}};
  while (!stack.empty()) {
    if (stack.size() > g.rules.size() + 1)
      throw UnknownRuleError("rule reference cycle detected");
    Frame& f = stack.back();
    const auto& body = g.rules[static_cast<std::size_t>(f.rule)];
    if (f.pos >= body.size()) {
      stack.pop_back();
      continue;
    }
    const GrammarSymbol& s = body[f.pos++];
    if (s.is_rule) {
      if (s.value < 0 || s.value >= g.rule_count())
        throw UnknownRuleError("unknown rule r" + std::to_string(s.value));
      stack.push_back({s.value, 0});
    } else {
      out.push_back(s.value);
    }
  }
  return out;
}

GrammarCheck check_grammar(const Grammar& g, const std::vector<int>& input) {
  GrammarCheck result;
  std::ostringstream detail;

  // Digram uniqueness, with adjacent overlapping repeats exempt.
  struct Digram {
    GrammarSymbol a, b;
    bool operator<(const Digram& o) const {
      auto t = [](const GrammarSymbol& s) {
        return std::pair<int, int>(s.is_rule ? 1 : 0, s.value);
      };
      return std::pair(t(a), t(b)) < std::pair(t(o.a), t(o.b));
    }
  };
  std::map<Digram, std::pair<int, std::size_t>> seen;  // -> (rule, pos)
  result.digram_unique = true;
  for (int rid = 0; rid < g.rule_count(); ++rid) {
    const auto& body = g.rules[static_cast<std::size_t>(rid)];
    for (std::size_t i = 0; i + 1 < body.size(); ++i) {
      Digram d{body[i], body[i + 1]};
      auto it = seen.find(d);
      if (it == seen.end()) {
        seen[d] = {rid, i};
        continue;
      }
      bool overlap = it->second.first == rid && it->second.second + 1 == i &&
                     body[i] == body[i - 1] && body[i] == body[i + 1];
      if (overlap) {
        seen[d] = {rid, i};  // slide along the run
        continue;
      }
      result.digram_unique = false;
      detail << "digram repeated in r" << rid << " at " << i << " (also r"
             << it->second.first << " at " << it->second.second << "); ";
    }
  }

  // Rule utility: every non-start rule referenced >= 2 times.
  std::vector<int> refs(static_cast<std::size_t>(g.rule_count()), 0);
  for (const auto& body : g.rules)
    for (const GrammarSymbol& s : body)
      if (s.is_rule) ++refs[static_cast<std::size_t>(s.value)];
  result.rule_utility = true;
  for (int rid = 1; rid < g.rule_count(); ++rid)
    if (refs[static_cast<std::size_t>(rid)] < 2) {
      result.rule_utility = false;
      detail << "rule r" << rid << " referenced "
             << refs[static_cast<std::size_t>(rid)] << " time(s); ";
    }

  result.roundtrip = expand(g, 0) == input;
  if (!result.roundtrip) detail << "expansion does not reproduce input; ";
  result.detail = detail.str();
  return result;
}

std::string Grammar::to_string() const {
  std::ostringstream os;
  for (std::size_t rid = 0; rid < rules.size(); ++rid) {
    os << "r" << rid << " ->";
    for (const GrammarSymbol& s : rules[rid]) {
      if (s.is_rule)
        os << " r" << s.value;
      else
        os << " " << s.value;
    }
    os << "\n";
  }
  return os.str();
}

}  // namespace ppct::plan
