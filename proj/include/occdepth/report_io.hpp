#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

namespace occdepth {

// Fixed 6-decimal float formatting used by every machine-readable report.
inline std::string format6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

// Tiny deterministic JSON emitter: 2-space indentation, LF line endings,
// keys in insertion order, doubles rendered with format6.
class JsonWriter {
 public:
  std::string take() {
    out_.push_back('\n');
    return std::move(out_);
  }

  JsonWriter& begin_object() {
    prefix();
    out_ += '{';
    stack_.push_back({true, true});
    return *this;
  }
  JsonWriter& end_object() { return close('}'); }

  JsonWriter& begin_array() {
    prefix();
    out_ += '[';
    stack_.push_back({false, true});
    return *this;
  }
  JsonWriter& end_array() { return close(']'); }

  JsonWriter& key(const std::string& name) {
    prefix();
    out_ += '"' + escape(name) + "\": ";
    pending_key_ = true;
    return *this;
  }

  JsonWriter& value(double v) { return raw(format6(v)); }
  JsonWriter& value(long long v) { return raw(std::to_string(v)); }
  JsonWriter& value(int v) { return raw(std::to_string(v)); }
  JsonWriter& value(bool v) { return raw(v ? "true" : "false"); }
  JsonWriter& value(const std::string& v) {
    return raw('"' + escape(v) + '"');
  }

 private:
  struct Frame {
    bool is_object;
    bool first;
  };

  static std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
      if (c == '"' || c == '\\') out += '\\';
      out += c;
    }
    return out;
  }

  void prefix() {
    if (pending_key_) {
      pending_key_ = false;
      return;
    }
    if (!stack_.empty()) {
      if (!stack_.back().first) out_ += ',';
      stack_.back().first = false;
      out_ += '\n';
      out_.append(stack_.size() * 2, ' ');
    }
  }

  JsonWriter& raw(const std::string& text) {
    prefix();
    out_ += text;
    return *this;
  }

  JsonWriter& close(char c) {
    const bool empty = stack_.back().first;
    stack_.pop_back();
    if (!empty) {
      out_ += '\n';
      out_.append(stack_.size() * 2, ' ');
    }
    out_ += c;
    return *this;
  }

  std::string out_;
  std::vector<Frame> stack_;
  bool pending_key_ = false;
};

}  // namespace occdepth
