/* Copyright 2026 The Autoshard Authors.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "autoshard/ir_text.h"

#include <cctype>
#include <optional>
#include <vector>

#include "absl/status/status.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"

namespace autoshard {
namespace {

enum class Tok { kIdent, kInt, kPunct, kEnd };

struct Token {
  Tok kind;
  std::string text;
  int line;
  int col;
};

class Lexer {
 public:
  explicit Lexer(absl::string_view src) : src_(src) {}

  absl::StatusOr<std::vector<Token>> Run() {
    std::vector<Token> out;
    while (true) {
      SkipSpaceAndComments();
      if (pos_ >= src_.size()) {
        out.push_back(Token{Tok::kEnd, "", line_, col_});
        return out;
      }
      char c = src_[pos_];
      int line = line_, col = col_;
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
                src_[pos_] == '_' || src_[pos_] == '.')) {
          Advance();
        }
        out.push_back(Token{Tok::kIdent,
                            std::string(src_.substr(start, pos_ - start)),
                            line, col});
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        size_t start = pos_;
        while (pos_ < src_.size() &&
               std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
          Advance();
        }
        out.push_back(Token{Tok::kInt,
                            std::string(src_.substr(start, pos_ - start)),
                            line, col});
      } else if (absl::string_view("(){}[],:=").find(c) !=
                 absl::string_view::npos) {
        Advance();
        out.push_back(Token{Tok::kPunct, std::string(1, c), line, col});
      } else {
        return absl::InvalidArgumentError(absl::StrCat(
            line, ":", col, ": unexpected character '", std::string(1, c),
            "'"));
      }
    }
  }

 private:
  void Advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void SkipSpaceAndComments() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') Advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        Advance();
      } else {
        return;
      }
    }
  }

  absl::string_view src_;
  size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

std::optional<int64_t> DtypeBytes(absl::string_view name) {
  if (name == "f16") return 2;
  if (name == "f32") return 4;
  if (name == "f64") return 8;
  return std::nullopt;
}

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  absl::StatusOr<Module> Run() {
    if (auto s = ExpectKeyword("def"); !s.ok()) return s;
    auto name = ExpectIdent("module name");
    if (!name.ok()) return name.status();
    if (auto s = ExpectPunct('('); !s.ok()) return s;

    struct PendingParam {
      std::string name;
      std::vector<int64_t> dims;
      Token at;
    };
    std::vector<PendingParam> params;
    std::optional<int64_t> elem_bytes;
    if (!IsPunct(')')) {
      while (true) {
        Token at = Peek();
        auto pname = ExpectIdent("parameter name");
        if (!pname.ok()) return pname.status();
        if (auto s = ExpectPunct(':'); !s.ok()) return s;
        auto typed = ParseTensorType();
        if (!typed.ok()) return typed.status();
        if (elem_bytes && *elem_bytes != typed->first) {
          return Error(at, "all parameters must share one element type");
        }
        elem_bytes = typed->first;
        params.push_back({*pname, typed->second, at});
        if (IsPunct(',')) {
          Next();
          continue;
        }
        break;
      }
    }
    if (auto s = ExpectPunct(')'); !s.ok()) return s;
    if (auto s = ExpectPunct('{'); !s.ok()) return s;

    ModuleBuilder builder(*name, elem_bytes.value_or(4));
    for (PendingParam& p : params) {
      if (auto s = builder.AddParam(p.name, p.dims); !s.ok()) {
        return Error(p.at, s.message());
      }
    }

    while (!IsKeyword("return")) {
      if (Peek().kind == Tok::kEnd) return Error(Peek(), "missing return");
      if (auto s = ParseBinding(builder); !s.ok()) return s;
    }
    Next();  // return
    Token ret_at = Peek();
    auto result = ExpectIdent("result variable");
    if (!result.ok()) return result.status();
    if (auto s = ExpectPunct('}'); !s.ok()) return s;
    if (Peek().kind != Tok::kEnd) {
      return Error(Peek(), "trailing input after module");
    }
    auto module = std::move(builder).Build(*result);
    if (!module.ok()) return Error(ret_at, module.status().message());
    return module;
  }

 private:
  const Token& Peek() const { return toks_[pos_]; }
  const Token& Next() { return toks_[pos_++]; }
  bool IsPunct(char c) const {
    return Peek().kind == Tok::kPunct && Peek().text[0] == c;
  }
  bool IsKeyword(absl::string_view kw) const {
    return Peek().kind == Tok::kIdent && Peek().text == kw;
  }

  static absl::Status Error(const Token& at, absl::string_view msg) {
    return absl::InvalidArgumentError(
        absl::StrCat(at.line, ":", at.col, ": ", msg));
  }

  absl::Status ExpectPunct(char c) {
    if (!IsPunct(c)) {
      return Error(Peek(), absl::StrCat("expected '", std::string(1, c),
                                        "', found '", Peek().text, "'"));
    }
    Next();
    return absl::OkStatus();
  }

  absl::Status ExpectKeyword(absl::string_view kw) {
    if (!IsKeyword(kw)) {
      return Error(Peek(),
                   absl::StrCat("expected '", kw, "', found '", Peek().text,
                                "'"));
    }
    Next();
    return absl::OkStatus();
  }

  absl::StatusOr<std::string> ExpectIdent(absl::string_view what) {
    if (Peek().kind != Tok::kIdent) {
      return Error(Peek(), absl::StrCat("expected ", what, ", found '",
                                        Peek().text, "'"));
    }
    return Next().text;
  }

  absl::StatusOr<int64_t> ExpectInt() {
    int64_t v = 0;
    if (Peek().kind != Tok::kInt || !absl::SimpleAtoi(Peek().text, &v)) {
      return Error(Peek(),
                   absl::StrCat("expected integer, found '", Peek().text, "'"));
    }
    Next();
    return v;
  }

  // f32[d0,d1,...]
  absl::StatusOr<std::pair<int64_t, std::vector<int64_t>>> ParseTensorType() {
    Token at = Peek();
    auto dtype = ExpectIdent("element type");
    if (!dtype.ok()) return dtype.status();
    auto bytes = DtypeBytes(*dtype);
    if (!bytes) {
      return Error(at, absl::StrCat("unknown element type ", *dtype));
    }
    if (auto s = ExpectPunct('['); !s.ok()) return s;
    std::vector<int64_t> dims;
    if (!IsPunct(']')) {
      while (true) {
        auto d = ExpectInt();
        if (!d.ok()) return d.status();
        dims.push_back(*d);
        if (IsPunct(',')) {
          Next();
          continue;
        }
        break;
      }
    }
    if (auto s = ExpectPunct(']'); !s.ok()) return s;
    return std::make_pair(*bytes, std::move(dims));
  }

  absl::StatusOr<ReduceCombiner> ParseCombiner() {
    Token at = Peek();
    auto name = ExpectIdent("combiner");
    if (!name.ok()) return name.status();
    if (*name == "add") return ReduceCombiner::kAdd;
    if (*name == "mul") return ReduceCombiner::kMul;
    if (*name == "max") return ReduceCombiner::kMax;
    return Error(at, absl::StrCat("unknown combiner ", *name));
  }

  absl::Status ParseBinding(ModuleBuilder& builder) {
    Token at = Peek();
    auto var = ExpectIdent("binding variable or 'return'");
    if (!var.ok()) return var.status();
    std::optional<std::vector<int64_t>> declared;
    if (IsPunct(':')) {
      Next();
      auto typed = ParseTensorType();
      if (!typed.ok()) return typed.status();
      declared = typed->second;
    }
    if (auto s = ExpectPunct('='); !s.ok()) return s;

    Token op_at = Peek();
    auto opname = ExpectIdent("operation");
    if (!opname.ok()) return opname.status();

    OpKind op;
    if (*opname == "matmul") {
      op = MatmulOp{};
    } else if (*opname == "transpose") {
      if (auto s = ExpectPunct('['); !s.ok()) return s;
      auto l = ExpectInt();
      if (!l.ok()) return l.status();
      if (auto s = ExpectPunct(','); !s.ok()) return s;
      auto r = ExpectInt();
      if (!r.ok()) return r.status();
      if (auto s = ExpectPunct(']'); !s.ok()) return s;
      op = TransposeOp{*l, *r};
    } else if (*opname == "reduce") {
      if (auto s = ExpectPunct('['); !s.ok()) return s;
      auto r = ExpectInt();
      if (!r.ok()) return r.status();
      if (auto s = ExpectPunct(','); !s.ok()) return s;
      auto c = ParseCombiner();
      if (!c.ok()) return c.status();
      if (auto s = ExpectPunct(']'); !s.ok()) return s;
      op = ReduceOp{*r, *c};
    } else if (*opname == "broadcast") {
      if (auto s = ExpectPunct('['); !s.ok()) return s;
      auto l = ExpectInt();
      if (!l.ok()) return l.status();
      if (auto s = ExpectPunct(','); !s.ok()) return s;
      auto e = ExpectInt();
      if (!e.ok()) return e.status();
      if (auto s = ExpectPunct(']'); !s.ok()) return s;
      op = BroadcastOp{*l, *e};
    } else if (*opname == "add") {
      op = BinaryOp{BinaryKind::kAdd};
    } else if (*opname == "mul") {
      op = BinaryOp{BinaryKind::kMul};
    } else if (*opname == "sub") {
      op = BinaryOp{BinaryKind::kSub};
    } else if (*opname == "div") {
      op = BinaryOp{BinaryKind::kDiv};
    } else if (*opname == "relu") {
      op = UnaryOp{UnaryKind::kRelu};
    } else if (*opname == "neg") {
      op = UnaryOp{UnaryKind::kNeg};
    } else if (*opname == "exp") {
      op = UnaryOp{UnaryKind::kExp};
    } else if (*opname == "recip") {
      op = UnaryOp{UnaryKind::kRecip};
    } else {
      return Error(op_at, absl::StrCat("unknown operation ", *opname));
    }

    if (auto s = ExpectPunct('('); !s.ok()) return s;
    std::vector<std::string> operands;
    if (!IsPunct(')')) {
      while (true) {
        auto o = ExpectIdent("operand");
        if (!o.ok()) return o.status();
        operands.push_back(*o);
        if (IsPunct(',')) {
          Next();
          continue;
        }
        break;
      }
    }
    if (auto s = ExpectPunct(')'); !s.ok()) return s;

    if (auto s = builder.AddBinding(*var, op, operands, declared); !s.ok()) {
      return Error(at, s.message());
    }
    return absl::OkStatus();
  }

  std::vector<Token> toks_;
  size_t pos_ = 0;
};

}  // namespace

absl::string_view DtypeName(int64_t elem_bytes) {
  switch (elem_bytes) {
    case 2:
      return "f16";
    case 8:
      return "f64";
    default:
      return "f32";
  }
}

absl::StatusOr<Module> ParseModule(absl::string_view text) {
  auto toks = Lexer(text).Run();
  if (!toks.ok()) return toks.status();
  return Parser(*std::move(toks)).Run();
}

std::string PrintOp(const OpKind& op) {
  if (const auto* t = std::get_if<TransposeOp>(&op)) {
    return absl::StrCat("transpose[", t->lhs, ", ", t->rhs, "]");
  }
  if (const auto* r = std::get_if<ReduceOp>(&op)) {
    return absl::StrCat("reduce[", r->dim, ", ", CombinerName(r->combiner),
                        "]");
  }
  if (const auto* b = std::get_if<BroadcastOp>(&op)) {
    return absl::StrCat("broadcast[", b->dim, ", ", b->extent, "]");
  }
  return OpMnemonic(op);
}

std::string PrintModule(const Module& module) {
  std::string dtype(DtypeName(module.elem_bytes()));
  std::string out = absl::StrCat(
      "def ", module.name(), "(",
      absl::StrJoin(module.params(), ", ",
                    [&](std::string* o, const Param& p) {
                      absl::StrAppend(o, p.name, ": ", dtype,
                                      p.shape.ToString());
                    }),
      ") {\n");
  for (const Binding& b : module.bindings()) {
    absl::StrAppend(&out, "  ", b.var, " = ", PrintOp(b.op), "(",
                    absl::StrJoin(b.operands, ", "), ")\n");
  }
  absl::StrAppend(&out, "  return ", module.result(), "\n}\n");
  return out;
}

}  // namespace autoshard
