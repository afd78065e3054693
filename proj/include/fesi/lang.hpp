#pragma once

// Abstract syntax of source expressions and actions over a declared memory
// environment, plus the fresh-name builder used to construct circuits.
// There is no concrete surface syntax: circuits are built through the
// builder API, exactly like the embedded combinators they model.

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fesi/types.hpp"

namespace fesi {

// A named wire. The id is the identity (unique within one program); the type
// annotation makes checking and compilation syntax-directed.
struct Var {
  uint32_t id = 0;
  Ty ty;

  bool operator==(const Var& o) const { return id == o.id; }
};

// Reference to a memory element: index into the MemEnv plus the shape the
// referencing operation expects to find there.
struct MemberRef {
  size_t index = 0;
  Mem::Kind expect = Mem::Kind::Reg;
};

// Side-effect-free expressions. Operands of word operators must share one
// width; mux branches must share one type.
struct Expr {
  enum class Op {
    Var,
    ConstUnit,
    ConstBool,
    ConstWord,
    And,
    Or,
    Xor,
    Not,
    Add,
    Sub,
    Eq,
    Le,
    Lt,
    Mux,      // kids: cond, then, else
    MkTuple,  // kids: elements in order
    Proj,     // kids: tuple; proj_index selects the element
  };

  Op op = Op::ConstUnit;
  fesi::Var var;          // Var
  bool bval = false;      // ConstBool
  int width = 0;          // ConstWord
  uint64_t bits = 0;      // ConstWord, < 2^width
  size_t proj_index = 0;  // Proj
  std::vector<Expr> kids;
};

inline Expr e_var(Var v) {
  Expr e;
  e.op = Expr::Op::Var;
  e.var = std::move(v);
  return e;
}
inline Expr e_unit() { return Expr{}; }
inline Expr e_bool(bool b) {
  Expr e;
  e.op = Expr::Op::ConstBool;
  e.bval = b;
  return e;
}
inline Expr e_word(int width, uint64_t bits) {
  Expr e;
  e.op = Expr::Op::ConstWord;
  e.width = width;
  e.bits = bits & word_mask(width);
  return e;
}
inline Expr e_node(Expr::Op op, std::vector<Expr> kids) {
  Expr e;
  e.op = op;
  e.kids = std::move(kids);
  return e;
}
inline Expr e_and(Expr a, Expr b) { return e_node(Expr::Op::And, {std::move(a), std::move(b)}); }
inline Expr e_or(Expr a, Expr b) { return e_node(Expr::Op::Or, {std::move(a), std::move(b)}); }
inline Expr e_xor(Expr a, Expr b) { return e_node(Expr::Op::Xor, {std::move(a), std::move(b)}); }
inline Expr e_not(Expr a) { return e_node(Expr::Op::Not, {std::move(a)}); }
inline Expr e_add(Expr a, Expr b) { return e_node(Expr::Op::Add, {std::move(a), std::move(b)}); }
inline Expr e_sub(Expr a, Expr b) { return e_node(Expr::Op::Sub, {std::move(a), std::move(b)}); }
inline Expr e_eq(Expr a, Expr b) { return e_node(Expr::Op::Eq, {std::move(a), std::move(b)}); }
inline Expr e_le(Expr a, Expr b) { return e_node(Expr::Op::Le, {std::move(a), std::move(b)}); }
inline Expr e_lt(Expr a, Expr b) { return e_node(Expr::Op::Lt, {std::move(a), std::move(b)}); }
inline Expr e_mux(Expr cond, Expr then_e, Expr else_e) {
  return e_node(Expr::Op::Mux, {std::move(cond), std::move(then_e), std::move(else_e)});
}
inline Expr e_tuple(std::vector<Expr> elems) { return e_node(Expr::Op::MkTuple, std::move(elems)); }
inline Expr e_proj(Expr tuple, size_t index) {
  Expr e = e_node(Expr::Op::Proj, {std::move(tuple)});
  e.proj_index = index;
  return e;
}

// Guarded atomic actions. A step either returns a value together with its
// pending updates or aborts with no effect.
struct Action {
  enum class Op {
    Return,        // expr
    Bind,          // kids: [first, rest]; binder names first's result in rest
    Assert,        // expr (bool); false aborts the step
    OrElse,        // kids: [left, right]; right runs only if left aborts
    RegRead,       // ref
    RegWrite,      // ref, expr = data
    InputRead,     // ref
    RegfileRead,   // ref, expr = address
    RegfileWrite,  // ref, expr = address, expr2 = data
  };

  Op op = Op::Return;
  Expr expr;
  Expr expr2;
  Var binder;
  MemberRef ref;
  std::vector<Action> kids;
};

// Result type of a well-typed expression. Assumes the expression already
// passed the checker; variable types come from their annotations.
inline Ty expr_ty(const Expr& e) {
  switch (e.op) {
    case Expr::Op::Var: return e.var.ty;
    case Expr::Op::ConstUnit: return Ty::unit();
    case Expr::Op::ConstBool: return Ty::boolean();
    case Expr::Op::ConstWord: return Ty::word(e.width);
    case Expr::Op::And:
    case Expr::Op::Or:
    case Expr::Op::Xor:
    case Expr::Op::Not:
    case Expr::Op::Eq:
    case Expr::Op::Le:
    case Expr::Op::Lt: return Ty::boolean();
    case Expr::Op::Add:
    case Expr::Op::Sub: return expr_ty(e.kids[0]);
    case Expr::Op::Mux: return expr_ty(e.kids[1]);
    case Expr::Op::MkTuple: {
      std::vector<Ty> elems;
      elems.reserve(e.kids.size());
      for (const auto& k : e.kids) elems.push_back(expr_ty(k));
      return Ty::tuple(std::move(elems));
    }
    case Expr::Op::Proj: {
      Ty t = expr_ty(e.kids[0]);
      if (t.kind != Ty::Kind::Tuple || e.proj_index >= t.elems.size())
        throw std::logic_error("expr_ty: projection out of a non-tuple");
      return t.elems[e.proj_index];
    }
  }
  return Ty::unit();
}

// Result type of a well-typed action over env.
inline Ty action_ty(const MemEnv& env, const Action& a) {
  switch (a.op) {
    case Action::Op::Return: return expr_ty(a.expr);
    case Action::Op::Bind: return action_ty(env, a.kids[1]);
    case Action::Op::Assert: return Ty::unit();
    case Action::Op::OrElse: return action_ty(env, a.kids[0]);
    case Action::Op::RegRead:
    case Action::Op::InputRead:
    case Action::Op::RegfileRead: return env.at(a.ref.index).ty;
    case Action::Op::RegWrite:
    case Action::Op::RegfileWrite: return Ty::unit();
  }
  return Ty::unit();
}

// Constructs well-typed actions with automatically fresh variable names.
// One builder per program; the fresh counter is not shared across threads.
class Builder {
 public:
  explicit Builder(MemEnv env) : env_(std::move(env)) {}

  const MemEnv& env() const { return env_; }

  Var fresh(Ty t) { return Var{next_id_++, std::move(t)}; }

  Action ret(Expr e) {
    Action a;
    a.op = Action::Op::Return;
    a.expr = std::move(e);
    return a;
  }

  // do x <- first; rest(x)
  Action bind(Action first, const std::function<Action(Var)>& rest) {
    Var x = fresh(action_ty(env_, first));
    Action body = rest(x);
    Action a;
    a.op = Action::Op::Bind;
    a.binder = std::move(x);
    a.kids.push_back(std::move(first));
    a.kids.push_back(std::move(body));
    return a;
  }

  // do _ <- first; rest
  Action seq(Action first, Action rest) {
    return bind(std::move(first), [&](Var) { return std::move(rest); });
  }

  Action assert_(Expr cond) {
    Action a;
    a.op = Action::Op::Assert;
    a.expr = std::move(cond);
    return a;
  }

  Action or_else(Action left, Action right) {
    Action a;
    a.op = Action::Op::OrElse;
    a.kids.push_back(std::move(left));
    a.kids.push_back(std::move(right));
    return a;
  }

  // if c then t else f, desugared to (assert c; t) orElse f. Note the
  // consequence of the desugaring: if t itself aborts for a reason other
  // than c, f still runs.
  Action ifte(Expr cond, Action then_a, Action else_a) {
    return or_else(seq(assert_(std::move(cond)), std::move(then_a)), std::move(else_a));
  }

  Action reg_read(size_t index) {
    Action a;
    a.op = Action::Op::RegRead;
    a.ref = MemberRef{index, Mem::Kind::Reg};
    return a;
  }

  Action reg_write(size_t index, Expr data) {
    Action a;
    a.op = Action::Op::RegWrite;
    a.ref = MemberRef{index, Mem::Kind::Reg};
    a.expr = std::move(data);
    return a;
  }

  Action input_read(size_t index) {
    Action a;
    a.op = Action::Op::InputRead;
    a.ref = MemberRef{index, Mem::Kind::Input};
    return a;
  }

  Action rf_read(size_t index, Expr addr) {
    Action a;
    a.op = Action::Op::RegfileRead;
    a.ref = MemberRef{index, Mem::Kind::Regfile};
    a.expr = std::move(addr);
    return a;
  }

  Action rf_write(size_t index, Expr addr, Expr data) {
    Action a;
    a.op = Action::Op::RegfileWrite;
    a.ref = MemberRef{index, Mem::Kind::Regfile};
    a.expr = std::move(addr);
    a.expr2 = std::move(data);
    return a;
  }

 private:
  MemEnv env_;
  uint32_t next_id_ = 0;
};

inline size_t expr_size(const Expr& e) {
  size_t n = 1;
  for (const auto& k : e.kids) n += expr_size(k);
  return n;
}

inline size_t action_size(const Action& a) {
  size_t n = 1 + expr_size(a.expr) + expr_size(a.expr2);
  for (const auto& k : a.kids) n += action_size(k);
  return n;
}

namespace detail {

inline std::string expr_str(const Expr& e) {
  using Op = Expr::Op;
  auto bin = [&](const char* name) {
    return std::string("(") + name + " " + expr_str(e.kids[0]) + " " + expr_str(e.kids[1]) + ")";
  };
  switch (e.op) {
    case Op::Var: return "x" + std::to_string(e.var.id);
    case Op::ConstUnit: return "()";
    case Op::ConstBool: return e.bval ? "true" : "false";
    case Op::ConstWord: return std::to_string(e.bits) + ":" + std::to_string(e.width);
    case Op::And: return bin("and");
    case Op::Or: return bin("or");
    case Op::Xor: return bin("xor");
    case Op::Not: return "(not " + expr_str(e.kids[0]) + ")";
    case Op::Add: return bin("add");
    case Op::Sub: return bin("sub");
    case Op::Eq: return bin("eq");
    case Op::Le: return bin("le");
    case Op::Lt: return bin("lt");
    case Op::Mux:
      return "(mux " + expr_str(e.kids[0]) + " " + expr_str(e.kids[1]) + " " +
             expr_str(e.kids[2]) + ")";
    case Op::MkTuple: {
      std::string s = "(tuple";
      for (const auto& k : e.kids) s += " " + expr_str(k);
      return s + ")";
    }
    case Op::Proj:
      return "(proj " + std::to_string(e.proj_index) + " " + expr_str(e.kids[0]) + ")";
  }
  return "?";
}

inline void action_str(const Action& a, std::string& out, int indent) {
  std::string pad(static_cast<size_t>(indent) * 2, ' ');
  using Op = Action::Op;
  switch (a.op) {
    case Op::Return:
      out += pad + "ret " + expr_str(a.expr) + "\n";
      break;
    case Op::Bind:
      out += pad + "do x" + std::to_string(a.binder.id) + " <-\n";
      action_str(a.kids[0], out, indent + 1);
      action_str(a.kids[1], out, indent);
      break;
    case Op::Assert:
      out += pad + "assert " + expr_str(a.expr) + "\n";
      break;
    case Op::OrElse:
      out += pad + "orElse\n";
      action_str(a.kids[0], out, indent + 1);
      action_str(a.kids[1], out, indent + 1);
      break;
    case Op::RegRead:
      out += pad + "!reg" + std::to_string(a.ref.index) + "\n";
      break;
    case Op::RegWrite:
      out += pad + "reg" + std::to_string(a.ref.index) + " ::= " + expr_str(a.expr) + "\n";
      break;
    case Op::InputRead:
      out += pad + "!in" + std::to_string(a.ref.index) + "\n";
      break;
    case Op::RegfileRead:
      out += pad + "read rf" + std::to_string(a.ref.index) + "[" + expr_str(a.expr) + "]\n";
      break;
    case Op::RegfileWrite:
      out += pad + "write rf" + std::to_string(a.ref.index) + "[" + expr_str(a.expr) +
             "] <- " + expr_str(a.expr2) + "\n";
      break;
  }
}

}  // namespace detail

// Deterministic textual form for debug dumps; there is no parser for it.
inline std::string to_string(const Action& a) {
  std::string out;
  detail::action_str(a, out, 0);
  return out;
}

}  // namespace fesi
