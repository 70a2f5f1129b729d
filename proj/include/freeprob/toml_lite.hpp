#pragma once

// Minimal TOML reader covering the scenario format: [tables], key = value,
// strings, integers, floats, booleans, (nested, possibly multi-line) arrays
// and '#' comments. No date-times, no inline tables, no dotted keys.

#include <cctype>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace freeprob::toml {

class Value;
using Array = std::vector<Value>;
using Table = std::map<std::string, Value>;

class Value {
  public:
    using Storage = std::variant<std::string, int64_t, double, bool, Array, Table>;

    Value() : v_(Table{}) {}
    explicit Value(Storage s) : v_(std::move(s)) {}

    bool is_string() const { return std::holds_alternative<std::string>(v_); }
    bool is_int() const { return std::holds_alternative<int64_t>(v_); }
    bool is_double() const { return std::holds_alternative<double>(v_); }
    bool is_bool() const { return std::holds_alternative<bool>(v_); }
    bool is_array() const { return std::holds_alternative<Array>(v_); }
    bool is_table() const { return std::holds_alternative<Table>(v_); }

    const std::string& as_string() const { return get<std::string>("string"); }
    int64_t as_int() const { return get<int64_t>("integer"); }
    double as_double() const {
        if (is_int()) return double(std::get<int64_t>(v_));
        return get<double>("float");
    }
    bool as_bool() const { return get<bool>("boolean"); }
    const Array& as_array() const { return get<Array>("array"); }
    const Table& as_table() const { return get<Table>("table"); }
    Table& as_table() { return std::get<Table>(v_); }

    const Value* find(const std::string& key) const {
        const Table& t = as_table();
        auto it = t.find(key);
        return it == t.end() ? nullptr : &it->second;
    }

  private:
    template <class T>
    const T& get(const char* what) const {
        if (!std::holds_alternative<T>(v_))
            throw std::runtime_error(std::string("TOML value is not a ") + what);
        return std::get<T>(v_);
    }

    Storage v_;
};

struct TomlError : std::runtime_error {
    int line;
    TomlError(const std::string& msg, int l)
        : std::runtime_error("line " + std::to_string(l) + ": " + msg), line(l) {}
};

namespace detail {

struct Cursor {
    const std::string& s;
    size_t i = 0;
    int line = 1;

    bool eof() const { return i >= s.size(); }
    char peek() const { return s[i]; }
    char take() {
        char c = s[i++];
        if (c == '\n') ++line;
        return c;
    }
    void skip_ws_inline() {
        while (!eof() && (peek() == ' ' || peek() == '\t')) take();
    }
    void skip_ws_and_comments() {
        for (;;) {
            skip_ws_inline();
            if (!eof() && peek() == '#') {
                while (!eof() && peek() != '\n') take();
            }
            if (!eof() && (peek() == '\n' || peek() == '\r')) {
                take();
                continue;
            }
            return;
        }
    }
};

inline Value parse_value(Cursor& c);

inline Value parse_string(Cursor& c) {
    c.take();  // opening quote
    std::string out;
    while (!c.eof() && c.peek() != '"') {
        char ch = c.take();
        if (ch == '\\' && !c.eof()) {
            char esc = c.take();
            switch (esc) {
                case 'n': out += '\n'; break;
                case 't': out += '\t'; break;
                case '"': out += '"'; break;
                case '\\': out += '\\'; break;
                default: throw TomlError("unsupported escape", c.line);
            }
        } else {
            out += ch;
        }
    }
    if (c.eof()) throw TomlError("unterminated string", c.line);
    c.take();
    return Value(Value::Storage(out));
}

inline Value parse_array(Cursor& c) {
    c.take();  // '['
    Array arr;
    for (;;) {
        c.skip_ws_and_comments();
        if (c.eof()) throw TomlError("unterminated array", c.line);
        if (c.peek() == ']') {
            c.take();
            return Value(Value::Storage(std::move(arr)));
        }
        arr.push_back(parse_value(c));
        c.skip_ws_and_comments();
        if (!c.eof() && c.peek() == ',') c.take();
    }
}

inline Value parse_scalar(Cursor& c) {
    std::string tok;
    while (!c.eof()) {
        char ch = c.peek();
        if (ch == ',' || ch == ']' || ch == '\n' || ch == '\r' || ch == '#' || ch == ' ' || ch == '\t')
            break;
        tok += c.take();
    }
    if (tok.empty()) throw TomlError("expected a value", c.line);
    if (tok == "true") return Value(Value::Storage(true));
    if (tok == "false") return Value(Value::Storage(false));
    bool numeric = true, has_dot_or_exp = false;
    for (size_t k = 0; k < tok.size(); ++k) {
        char ch = tok[k];
        if (ch == '.' || ch == 'e' || ch == 'E') has_dot_or_exp = true;
        else if (ch == '+' || ch == '-' || std::isdigit(static_cast<unsigned char>(ch))) continue;
        else numeric = false;
    }
    if (!numeric) throw TomlError("unquoted value '" + tok + "'", c.line);
    try {
        if (has_dot_or_exp) return Value(Value::Storage(std::stod(tok)));
        return Value(Value::Storage(int64_t(std::stoll(tok))));
    } catch (const std::exception&) {
        throw TomlError("malformed number '" + tok + "'", c.line);
    }
}

inline Value parse_value(Cursor& c) {
    c.skip_ws_inline();
    if (c.eof()) throw TomlError("expected a value", c.line);
    char ch = c.peek();
    if (ch == '"') return parse_string(c);
    if (ch == '[') return parse_array(c);
    return parse_scalar(c);
}

inline std::string parse_key(Cursor& c) {
    std::string key;
    while (!c.eof()) {
        char ch = c.peek();
        if (std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-') key += c.take();
        else break;
    }
    if (key.empty()) throw TomlError("expected a key", c.line);
    return key;
}

}  // namespace detail

inline Value parse(const std::string& text) {
    detail::Cursor c{text};
    Value root;
    Table* current = &root.as_table();
    for (;;) {
        c.skip_ws_and_comments();
        if (c.eof()) return root;
        if (c.peek() == '[') {
            c.take();
            std::string name = detail::parse_key(c);
            c.skip_ws_inline();
            if (c.eof() || c.take() != ']') throw TomlError("expected ']'", c.line);
            auto [it, fresh] = root.as_table().emplace(name, Value());
            if (!fresh && !it->second.is_table()) throw TomlError("duplicate key '" + name + "'", c.line);
            current = &it->second.as_table();
            continue;
        }
        std::string key = detail::parse_key(c);
        c.skip_ws_inline();
        if (c.eof() || c.take() != '=') throw TomlError("expected '=' after key '" + key + "'", c.line);
        Value v = detail::parse_value(c);
        if (!current->emplace(key, std::move(v)).second)
            throw TomlError("duplicate key '" + key + "'", c.line);
    }
}

}  // namespace freeprob::toml
