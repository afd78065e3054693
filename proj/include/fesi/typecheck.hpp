#pragma once

// Type checker for source actions. The embedding this replaces made programs
// well-typed by construction; here checking is a separate, total pass that
// the compiler and interpreters rely on for all their "unreachable after
// typecheck" assumptions: operand types match, member references match the
// declared environment, every variable is bound exactly once before use, and
// inputs are never written.

#include <string>
#include <unordered_map>
#include <unordered_set>
#include <variant>

#include "fesi/lang.hpp"
#include "fesi/types.hpp"

namespace fesi {

struct TypeError {
  std::string message;  // offending node plus expected/actual types
};

using TypecheckResult = std::variant<Ty, TypeError>;

namespace detail {

struct Checker {
  const MemEnv& env;
  std::unordered_map<uint32_t, Ty> scope;  // in-scope binders
  std::unordered_set<uint32_t> bound;      // every binder ever seen

  TypeError err(const std::string& where, const std::string& what) {
    return TypeError{where + ": " + what};
  }

  std::variant<Ty, TypeError> check_expr(const Expr& e) {
    using Op = Expr::Op;
    auto sub = [&](size_t i) { return check_expr(e.kids[i]); };
    auto expect_bool = [&](size_t i, const char* where) -> std::optional<TypeError> {
      auto r = sub(i);
      if (auto* te = std::get_if<TypeError>(&r)) return *te;
      if (std::get<Ty>(r) != Ty::boolean())
        return err(where, "expected bool operand, got " + to_string(std::get<Ty>(r)));
      return std::nullopt;
    };
    switch (e.op) {
      case Op::Var: {
        auto it = scope.find(e.var.id);
        if (it == scope.end())
          return err("var x" + std::to_string(e.var.id), "use before binding");
        if (it->second != e.var.ty)
          return err("var x" + std::to_string(e.var.id),
                     "annotated " + to_string(e.var.ty) + " but bound at " + to_string(it->second));
        return it->second;
      }
      case Op::ConstUnit: return Ty::unit();
      case Op::ConstBool: return Ty::boolean();
      case Op::ConstWord:
        if (e.width < 1 || e.width > 64) return err("const word", "width out of [1,64]");
        if (e.bits > word_mask(e.width))
          return err("const word", "magnitude " + std::to_string(e.bits) + " does not fit int" +
                                        std::to_string(e.width));
        return Ty::word(e.width);
      case Op::And:
      case Op::Or:
      case Op::Xor: {
        if (auto te = expect_bool(0, "bool operator")) return *te;
        if (auto te = expect_bool(1, "bool operator")) return *te;
        return Ty::boolean();
      }
      case Op::Not: {
        if (auto te = expect_bool(0, "not")) return *te;
        return Ty::boolean();
      }
      case Op::Add:
      case Op::Sub:
      case Op::Eq:
      case Op::Le:
      case Op::Lt: {
        auto ra = sub(0);
        if (auto* te = std::get_if<TypeError>(&ra)) return *te;
        auto rb = sub(1);
        if (auto* te = std::get_if<TypeError>(&rb)) return *te;
        const Ty& ta = std::get<Ty>(ra);
        const Ty& tb = std::get<Ty>(rb);
        if (ta.kind != Ty::Kind::Int)
          return err("word operator", "expected word operand, got " + to_string(ta));
        if (ta != tb)
          return err("word operator", "operand widths differ: " + to_string(ta) + " vs " + to_string(tb));
        bool is_cmp = e.op == Op::Eq || e.op == Op::Le || e.op == Op::Lt;
        return is_cmp ? Ty::boolean() : ta;
      }
      case Op::Mux: {
        if (auto te = expect_bool(0, "mux condition")) return *te;
        auto rt = sub(1);
        if (auto* te = std::get_if<TypeError>(&rt)) return *te;
        auto rf = sub(2);
        if (auto* te = std::get_if<TypeError>(&rf)) return *te;
        if (std::get<Ty>(rt) != std::get<Ty>(rf))
          return err("mux", "branch types differ: " + to_string(std::get<Ty>(rt)) + " vs " +
                                to_string(std::get<Ty>(rf)));
        return std::get<Ty>(rt);
      }
      case Op::MkTuple: {
        std::vector<Ty> elems;
        elems.reserve(e.kids.size());
        for (const auto& k : e.kids) {
          auto r = check_expr(k);
          if (auto* te = std::get_if<TypeError>(&r)) return *te;
          elems.push_back(std::get<Ty>(r));
        }
        return Ty::tuple(std::move(elems));
      }
      case Op::Proj: {
        auto r = sub(0);
        if (auto* te = std::get_if<TypeError>(&r)) return *te;
        const Ty& t = std::get<Ty>(r);
        if (t.kind != Ty::Kind::Tuple)
          return err("proj", "expected tuple operand, got " + to_string(t));
        if (e.proj_index >= t.elems.size())
          return err("proj", "index " + std::to_string(e.proj_index) + " out of " +
                                 std::to_string(t.elems.size()) + " elements");
        return t.elems[e.proj_index];
      }
    }
    return err("expr", "unknown node");
  }

  std::variant<const Mem*, TypeError> check_ref(const MemberRef& ref, Mem::Kind want,
                                                const char* where) {
    if (ref.index >= env.size())
      return err(where, "element index " + std::to_string(ref.index) + " out of range");
    const Mem& m = env[ref.index];
    if (ref.expect != want) return err(where, "reference expects the wrong element shape");
    if (m.kind != want) {
      if (m.kind == Mem::Kind::Input)
        return err(where, "element " + std::to_string(ref.index) +
                              " is an input and can only be read");
      return err(where, "element " + std::to_string(ref.index) + " is " + to_string(m) +
                            ", not the referenced shape");
    }
    return &m;
  }

  std::variant<Ty, TypeError> check_action(const Action& a) {
    using Op = Action::Op;
    switch (a.op) {
      case Op::Return: return check_expr(a.expr);
      case Op::Bind: {
        auto rf = check_action(a.kids[0]);
        if (auto* te = std::get_if<TypeError>(&rf)) return *te;
        if (bound.count(a.binder.id))
          return err("bind x" + std::to_string(a.binder.id), "variable bound twice");
        if (std::get<Ty>(rf) != a.binder.ty)
          return err("bind x" + std::to_string(a.binder.id),
                     "binder annotated " + to_string(a.binder.ty) + " but bound action returns " +
                         to_string(std::get<Ty>(rf)));
        bound.insert(a.binder.id);
        scope.emplace(a.binder.id, a.binder.ty);
        auto rr = check_action(a.kids[1]);
        scope.erase(a.binder.id);
        return rr;
      }
      case Op::Assert: {
        auto r = check_expr(a.expr);
        if (auto* te = std::get_if<TypeError>(&r)) return *te;
        if (std::get<Ty>(r) != Ty::boolean())
          return err("assert", "expected bool, got " + to_string(std::get<Ty>(r)));
        return Ty::unit();
      }
      case Op::OrElse: {
        auto rl = check_action(a.kids[0]);
        if (auto* te = std::get_if<TypeError>(&rl)) return *te;
        auto rr = check_action(a.kids[1]);
        if (auto* te = std::get_if<TypeError>(&rr)) return *te;
        if (std::get<Ty>(rl) != std::get<Ty>(rr))
          return err("orElse", "branch types differ: " + to_string(std::get<Ty>(rl)) + " vs " +
                                   to_string(std::get<Ty>(rr)));
        return rl;
      }
      case Op::RegRead: {
        auto r = check_ref(a.ref, Mem::Kind::Reg, "reg read");
        if (auto* te = std::get_if<TypeError>(&r)) return *te;
        return std::get<const Mem*>(r)->ty;
      }
      case Op::RegWrite: {
        auto r = check_ref(a.ref, Mem::Kind::Reg, "reg write");
        if (auto* te = std::get_if<TypeError>(&r)) return *te;
        auto rd = check_expr(a.expr);
        if (auto* te = std::get_if<TypeError>(&rd)) return *te;
        if (std::get<Ty>(rd) != std::get<const Mem*>(r)->ty)
          return err("reg write", "data " + to_string(std::get<Ty>(rd)) + " does not match element " +
                                      to_string(std::get<const Mem*>(r)->ty));
        return Ty::unit();
      }
      case Op::InputRead: {
        auto r = check_ref(a.ref, Mem::Kind::Input, "input read");
        if (auto* te = std::get_if<TypeError>(&r)) return *te;
        return std::get<const Mem*>(r)->ty;
      }
      case Op::RegfileRead: {
        auto r = check_ref(a.ref, Mem::Kind::Regfile, "regfile read");
        if (auto* te = std::get_if<TypeError>(&r)) return *te;
        const Mem* m = std::get<const Mem*>(r);
        auto ra = check_expr(a.expr);
        if (auto* te = std::get_if<TypeError>(&ra)) return *te;
        if (std::get<Ty>(ra) != Ty::word(m->addr_width))
          return err("regfile read", "address " + to_string(std::get<Ty>(ra)) +
                                         " does not match int" + std::to_string(m->addr_width));
        return m->ty;
      }
      case Op::RegfileWrite: {
        auto r = check_ref(a.ref, Mem::Kind::Regfile, "regfile write");
        if (auto* te = std::get_if<TypeError>(&r)) return *te;
        const Mem* m = std::get<const Mem*>(r);
        auto ra = check_expr(a.expr);
        if (auto* te = std::get_if<TypeError>(&ra)) return *te;
        if (std::get<Ty>(ra) != Ty::word(m->addr_width))
          return err("regfile write", "address " + to_string(std::get<Ty>(ra)) +
                                          " does not match int" + std::to_string(m->addr_width));
        auto rd = check_expr(a.expr2);
        if (auto* te = std::get_if<TypeError>(&rd)) return *te;
        if (std::get<Ty>(rd) != m->ty)
          return err("regfile write", "data " + to_string(std::get<Ty>(rd)) +
                                          " does not match element " + to_string(m->ty));
        return Ty::unit();
      }
    }
    return err("action", "unknown node");
  }
};

}  // namespace detail

// Returns the result type of a, or the first violation found in a
// deterministic left-to-right traversal. Total: never throws on any input.
inline TypecheckResult typecheck(const MemEnv& env, const Action& a) {
  detail::Checker c{env, {}, {}};
  return c.check_action(a);
}

inline bool typechecks(const MemEnv& env, const Action& a) {
  return std::holds_alternative<Ty>(typecheck(env, a));
}

}  // namespace fesi
