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

#include "ppct/prototxt.hpp"

#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace ppct::ir {

namespace {

enum class TokKind { kIdent, kString, kNumber, kLBrace, kRBrace, kColon, kEnd };

struct Token {
  TokKind kind;
  std::string text;
  long number = 0;
  int line = 1;
  int col = 1;
};

class Lexer {
 public:
  explicit Lexer(const std::string& text) : text_(text) {}

  Token next() {
    skip_ws();
    Token t;
    t.line = line_;
    t.col = col_;
    if (pos_ >= text_.size()) {
      t.kind = TokKind::kEnd;
      return t;
    }
    char c = text_[pos_];
    if (c == '{') {
      advance();
      t.kind = TokKind::kLBrace;
      return t;
    }
    if (c == '}') {
      advance();
      t.kind = TokKind::kRBrace;
      return t;
    }
    if (c == ':') {
      advance();
      t.kind = TokKind::kColon;
      return t;
    }
    if (c == '"') {
      advance();
      std::string s;
      while (pos_ < text_.size() && text_[pos_] != '"') {
        if (text_[pos_] == '\n')
          throw SyntaxError(t.line, t.col, "unterminated string");
        s.push_back(text_[pos_]);
        advance();
      }
      if (pos_ >= text_.size())
        throw SyntaxError(t.line, t.col, "unterminated string");
      advance();  // closing quote
      t.kind = TokKind::kString;
      t.text = s;
      return t;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '-') {
      std::string s;
      s.push_back(c);
      advance();
      while (pos_ < text_.size() &&
             std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        s.push_back(text_[pos_]);
        advance();
      }
      t.kind = TokKind::kNumber;
      t.text = s;
      try {
        t.number = std::stol(s);
      } catch (const std::exception&) {
        throw SyntaxError(t.line, t.col, "bad number '" + s + "'");
      }
      return t;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::string s;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
              text_[pos_] == '_')) {
        s.push_back(text_[pos_]);
        advance();
      }
      t.kind = TokKind::kIdent;
      t.text = s;
      return t;
    }
    throw SyntaxError(line_, col_, std::string("unexpected character '") + c +
                                       "'");
  }

 private:
  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }
  void skip_ws() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  const std::string& text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

class Parser {
 public:
  explicit Parser(const std::string& text) : lex_(text) { shift(); }

  ModelSpec parse() {
    ModelSpec model;
    struct RawModule {
      std::string name, from, to;
      int line, col;
    };
    std::vector<RawModule> raw_modules;

    while (cur_.kind != TokKind::kEnd) {
      if (cur_.kind != TokKind::kIdent)
        throw SyntaxError(cur_.line, cur_.col, "expected top-level key");
      if (cur_.text == "name") {
        shift();
        expect(TokKind::kColon, "':'");
        model.name = expect_string();
      } else if (cur_.text == "layer") {
        shift();
        model.layers.push_back(parse_layer());
      } else if (cur_.text == "module") {
        Token at = cur_;
        shift();
        expect(TokKind::kLBrace, "'{'");
        RawModule m{"", "", "", at.line, at.col};
        while (cur_.kind != TokKind::kRBrace) {
          std::string key = expect_ident();
          expect(TokKind::kColon, "':'");
          if (key == "name")
            m.name = expect_string();
          else if (key == "from")
            m.from = expect_string();
          else if (key == "to")
            m.to = expect_string();
          else
            throw SyntaxError(cur_.line, cur_.col,
                              "unknown module field '" + key + "'");
        }
        shift();  // '}'
        raw_modules.push_back(m);
      } else {
        throw SyntaxError(cur_.line, cur_.col,
                          "unknown top-level key '" + cur_.text + "'");
      }
    }

    resolve(model);
    for (const auto& rm : raw_modules) {
      int from = model.layer_index(rm.from);
      int to = model.layer_index(rm.to);
      if (from < 0)
        throw SemanticError("module '" + rm.name + "' references unknown layer '" +
                            rm.from + "'");
      if (to < 0)
        throw SemanticError("module '" + rm.name + "' references unknown layer '" +
                            rm.to + "'");
      if (from > to)
        throw SemanticError("module '" + rm.name + "' range is reversed");
      model.modules.push_back({rm.name, from, to});
    }
    check_modules(model);
    return model;
  }

 private:
  void shift() { cur_ = lex_.next(); }
  void expect(TokKind k, const char* what) {
    if (cur_.kind != k)
      throw SyntaxError(cur_.line, cur_.col,
                        std::string("expected ") + what);
    shift();
  }
  std::string expect_string() {
    if (cur_.kind != TokKind::kString)
      throw SyntaxError(cur_.line, cur_.col, "expected quoted string");
    std::string s = cur_.text;
    shift();
    return s;
  }
  std::string expect_ident() {
    if (cur_.kind != TokKind::kIdent)
      throw SyntaxError(cur_.line, cur_.col, "expected identifier");
    std::string s = cur_.text;
    shift();
    return s;
  }
  long expect_number() {
    if (cur_.kind != TokKind::kNumber)
      throw SyntaxError(cur_.line, cur_.col, "expected number");
    long n = cur_.number;
    shift();
    return n;
  }

  LayerSpec parse_layer() {
    expect(TokKind::kLBrace, "'{'");
    LayerSpec l;
    bool kind_set = false;
    bool saw_kernel_size = false;
    std::vector<int> input_dims;
    while (cur_.kind != TokKind::kRBrace) {
      Token at = cur_;
      std::string key = expect_ident();
      if (key == "name") {
        expect(TokKind::kColon, "':'");
        l.name = expect_string();
      } else if (key == "type") {
        expect(TokKind::kColon, "':'");
        std::string t = expect_string();
        if (t == "Input")
          l.kind = LayerKind::kInput;
        else if (t == "Convolution")
          l.kind = LayerKind::kConvolution;
        else if (t == "ReLU")
          l.kind = LayerKind::kRelu;
        else if (t == "Pooling")
          l.kind = LayerKind::kPool;
        else if (t == "InnerProduct")
          l.kind = LayerKind::kFullyConnected;
        else
          throw SyntaxError(at.line, at.col,
                            "unsupported layer type '" + t + "'");
        kind_set = true;
      } else if (key == "bottom") {
        expect(TokKind::kColon, "':'");
        l.bottom = expect_string();
      } else if (key == "top") {
        expect(TokKind::kColon, "':'");
        l.top = expect_string();
      } else if (key == "convolution_param") {
        parse_conv_param(l, saw_kernel_size);
      } else if (key == "pooling_param") {
        parse_pool_param(l);
      } else if (key == "inner_product_param") {
        parse_fc_param(l);
      } else if (key == "input_param") {
        parse_input_param(input_dims);
      } else {
        throw SyntaxError(at.line, at.col, "unknown layer field '" + key + "'");
      }
    }
    shift();  // '}'
    if (!kind_set)
      throw SemanticError("layer '" + l.name + "' has no type");
    if (l.name.empty()) throw SemanticError("layer without a name");
    if (l.top.empty()) l.top = l.name;
    if (l.kind == LayerKind::kInput) {
      if (input_dims.size() == 4) input_dims.erase(input_dims.begin());
      if (input_dims.size() != 3)
        throw SemanticError("input layer '" + l.name +
                            "' needs input_param with dim: C H W");
      l.out_channels = input_dims[0];
      l.out_h = input_dims[1];
      l.out_w = input_dims[2];
    }
    return l;
  }

  void parse_conv_param(LayerSpec& l, bool& saw_kernel_size) {
    expect(TokKind::kLBrace, "'{'");
    while (cur_.kind != TokKind::kRBrace) {
      Token at = cur_;
      std::string key = expect_ident();
      expect(TokKind::kColon, "':'");
      long v = expect_number();
      if (key == "num_output")
        l.conv.num_output = static_cast<int>(v);
      else if (key == "kernel_size") {
        l.conv.kernel_h = l.conv.kernel_w = static_cast<int>(v);
        saw_kernel_size = true;
      } else if (key == "kernel_h")
        l.conv.kernel_h = static_cast<int>(v);
      else if (key == "kernel_w")
        l.conv.kernel_w = static_cast<int>(v);
      else if (key == "stride")
        l.conv.stride = static_cast<int>(v);
      else if (key == "pad")
        l.conv.pad = static_cast<int>(v);
      else
        throw SyntaxError(at.line, at.col,
                          "unknown convolution_param field '" + key + "'");
    }
    shift();
    (void)saw_kernel_size;
  }

  void parse_pool_param(LayerSpec& l) {
    expect(TokKind::kLBrace, "'{'");
    while (cur_.kind != TokKind::kRBrace) {
      Token at = cur_;
      std::string key = expect_ident();
      expect(TokKind::kColon, "':'");
      long v = expect_number();
      if (key == "kernel_size")
        l.pool.kernel = static_cast<int>(v);
      else if (key == "stride")
        l.pool.stride = static_cast<int>(v);
      else
        throw SyntaxError(at.line, at.col,
                          "unknown pooling_param field '" + key + "'");
    }
    shift();
  }

  void parse_fc_param(LayerSpec& l) {
    expect(TokKind::kLBrace, "'{'");
    while (cur_.kind != TokKind::kRBrace) {
      Token at = cur_;
      std::string key = expect_ident();
      expect(TokKind::kColon, "':'");
      long v = expect_number();
      if (key == "num_output")
        l.fc.num_output = static_cast<int>(v);
      else
        throw SyntaxError(at.line, at.col,
                          "unknown inner_product_param field '" + key + "'");
    }
    shift();
  }

  void parse_input_param(std::vector<int>& dims) {
    expect(TokKind::kLBrace, "'{'");
    while (cur_.kind != TokKind::kRBrace) {
      Token at = cur_;
      std::string key = expect_ident();
      expect(TokKind::kColon, "':'");
      long v = expect_number();
      if (key == "dim")
        dims.push_back(static_cast<int>(v));
      else
        throw SyntaxError(at.line, at.col,
                          "unknown input_param field '" + key + "'");
    }
    shift();
  }

  // Name resolution plus channel/shape inference over the layer chain.
  void resolve(ModelSpec& model) {
    std::set<std::string> names;
    struct Shape {
      int c, h, w;
    };
    std::map<std::string, Shape> tops;
    bool have_input = false;
    for (LayerSpec& l : model.layers) {
      if (!names.insert(l.name).second)
        throw SemanticError("duplicate layer name '" + l.name + "'");
      if (l.kind == LayerKind::kInput) {
        if (!l.bottom.empty())
          throw SemanticError("input layer '" + l.name + "' has a bottom");
        if (!have_input) {
          model.input_c = l.out_channels;
          model.input_h = l.out_h;
          model.input_w = l.out_w;
          have_input = true;
        }
        tops[l.top] = {l.out_channels, l.out_h, l.out_w};
        continue;
      }
      auto it = tops.find(l.bottom);
      if (it == tops.end())
        throw SemanticError("layer '" + l.name +
                            "' references undeclared bottom '" + l.bottom +
                            "'");
      Shape in = it->second;
      Shape out = in;
      switch (l.kind) {
        case LayerKind::kConvolution: {
          if (l.conv.num_output < 1 || l.conv.kernel_h < 1 ||
              l.conv.kernel_w < 1 || l.conv.stride < 1 || l.conv.pad < 0)
            throw SemanticError("layer '" + l.name +
                                "' has invalid convolution_param");
          l.conv.channels = in.c;
          out.c = l.conv.num_output;
          out.h = (in.h + 2 * l.conv.pad - l.conv.kernel_h) / l.conv.stride + 1;
          out.w = (in.w + 2 * l.conv.pad - l.conv.kernel_w) / l.conv.stride + 1;
          if (out.h < 1 || out.w < 1)
            throw SemanticError("layer '" + l.name +
                                "' output shape is empty");
          break;
        }
        case LayerKind::kPool: {
          if (l.pool.kernel < 1 || l.pool.stride < 1)
            throw SemanticError("layer '" + l.name +
                                "' has invalid pooling_param");
          out.h = (in.h - l.pool.kernel) / l.pool.stride + 1;
          out.w = (in.w - l.pool.kernel) / l.pool.stride + 1;
          if (out.h < 1 || out.w < 1)
            throw SemanticError("layer '" + l.name +
                                "' output shape is empty");
          break;
        }
        case LayerKind::kFullyConnected: {
          if (l.fc.num_output < 1)
            throw SemanticError("layer '" + l.name +
                                "' has invalid inner_product_param");
          l.fc.inputs = in.c * in.h * in.w;
          out.c = l.fc.num_output;
          out.h = 1;
          out.w = 1;
          break;
        }
        case LayerKind::kRelu:
          break;
        case LayerKind::kInput:
          break;
      }
      l.out_channels = out.c;
      l.out_h = out.h;
      l.out_w = out.w;
      tops[l.top] = out;
    }
  }

  void check_modules(const ModelSpec& model) {
    std::vector<bool> covered(model.layers.size(), false);
    for (const ModuleSpec& m : model.modules) {
      for (int i = m.from; i <= m.to; ++i) {
        if (covered[static_cast<std::size_t>(i)])
          throw SemanticError("module '" + m.name + "' overlaps layer '" +
                              model.layers[static_cast<std::size_t>(i)].name +
                              "'");
        covered[static_cast<std::size_t>(i)] = true;
      }
    }
  }

  Lexer lex_;
  Token cur_{TokKind::kEnd, "", 0, 1, 1};
};

}  // namespace

ModelSpec parse_prototxt(const std::string& text) {
  Parser p(text);
  return p.parse();
}

ModelSpec parse_prototxt_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_prototxt(ss.str());
}

}  // namespace ppct::ir
