#include "gapscope/sdpa.hpp"

#include "gapscope/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace gapscope {

namespace {

struct Token {
  std::string text;
  std::size_t line;
};

class TokenStream {
 public:
  explicit TokenStream(std::istream& in) {
    std::string line;
    std::size_t lineno = 0;
    bool header = true;
    while (std::getline(in, line)) {
      ++lineno;
      if (header && !line.empty() && (line[0] == '"' || line[0] == '*')) continue;
      for (char& c : line)
        if (c == ',' || c == '(' || c == ')' || c == '{' || c == '}') c = ' ';
      std::istringstream ls(line);
      std::string tok;
      while (ls >> tok) {
        header = false;
        tokens_.push_back({tok, lineno});
      }
    }
    last_line_ = lineno;
  }

  bool done() const { return pos_ >= tokens_.size(); }
  std::size_t line() const { return done() ? last_line_ : tokens_[pos_].line; }

  long next_int(const char* what) {
    const Token& t = take(what);
    long v = 0;
    const auto* end = t.text.data() + t.text.size();
    auto [p, ec] = std::from_chars(t.text.data(), end, v);
    if (ec != std::errc() || p != end) {
      // SDPA writers sometimes emit integers as "3.0".
      const double d = parse_double(t);
      if (d != std::floor(d)) throw ParseError(t.line, std::string("expected integer for ") + what);
      return static_cast<long>(d);
    }
    return v;
  }

  double next_double(const char* what) { return parse_double(take(what)); }

 private:
  const Token& take(const char* what) {
    if (done()) throw ParseError(last_line_, std::string("unexpected end of file reading ") + what);
    return tokens_[pos_++];
  }

  static double parse_double(const Token& t) {
    const char* b = t.text.data();
    const char* e = b + t.text.size();
    if (*b == '+') ++b;
    double v = 0.0;
    auto [p, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || p != e || !std::isfinite(v))
      throw ParseError(t.line, "malformed number '" + t.text + "'");
    return v;
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  std::size_t last_line_ = 0;
};

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

SdpInstance parse_sdpa(std::istream& in, const std::string& name) {
  TokenStream ts(in);
  const long m = ts.next_int("m");
  if (m < 1) throw DimensionMismatch("m must be positive");
  const long nblocks = ts.next_int("number of blocks");
  if (nblocks < 1) throw DimensionMismatch("number of blocks must be positive");
  std::vector<long> sizes;
  std::vector<std::size_t> offsets;
  std::size_t n = 0;
  for (long k = 0; k < nblocks; ++k) {
    const std::size_t line = ts.line();
    const long s = ts.next_int("block size");
    if (s == 0) throw ParseError(line, "block size 0");
    sizes.push_back(s);
    offsets.push_back(n);
    n += static_cast<std::size_t>(std::labs(s));
  }
  std::vector<double> b;
  for (long i = 0; i < m; ++i) b.push_back(ts.next_double("b"));

  std::vector<Matrix> mats(static_cast<std::size_t>(m) + 1, Matrix::Zero(n, n));
  while (!ts.done()) {
    const std::size_t line = ts.line();
    const long matno = ts.next_int("matrix number");
    const long blk = ts.next_int("block number");
    long i = ts.next_int("row index");
    long j = ts.next_int("column index");
    const double v = ts.next_double("value");
    if (matno < 0 || matno > m) throw ParseError(line, "matrix number out of range");
    if (blk < 1 || blk > nblocks) throw ParseError(line, "block number out of range");
    const long bs = std::labs(sizes[static_cast<std::size_t>(blk - 1)]);
    if (i < 1 || j < 1 || i > bs || j > bs) throw ParseError(line, "entry index outside block");
    if (sizes[static_cast<std::size_t>(blk - 1)] < 0 && i != j)
      throw ParseError(line, "off-diagonal entry in diagonal block");
    if (i > j) std::swap(i, j);
    const auto off = offsets[static_cast<std::size_t>(blk - 1)];
    const auto r = static_cast<Eigen::Index>(off + static_cast<std::size_t>(i - 1));
    const auto c = static_cast<Eigen::Index>(off + static_cast<std::size_t>(j - 1));
    Matrix& M = mats[static_cast<std::size_t>(matno)];
    M(r, c) += v;
    if (r != c) M(c, r) = M(r, c);
  }
  std::vector<SymMatrix> A;
  for (long i = 1; i <= m; ++i) A.push_back(SymMatrix::from_dense(mats[static_cast<std::size_t>(i)]));
  return SdpInstance(name, SymMatrix::from_dense(mats[0]), std::move(A), std::move(b));
}

SdpInstance read_sdpa(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return parse_sdpa(in, path.stem().string());
}

void write_sdpa(const SdpInstance& inst, std::ostream& out) {
  out << "\" " << inst.name() << "\n";
  out << inst.m() << "\n1\n" << inst.n() << "\n";
  for (std::size_t i = 0; i < inst.m(); ++i) out << (i ? " " : "") << format_double(inst.b()[i]);
  out << "\n";
  auto emit = [&](std::size_t matno, const SymMatrix& M) {
    for (std::size_t i = 0; i < M.n(); ++i)
      for (std::size_t j = i; j < M.n(); ++j)
        if (M(i, j) != 0.0)
          out << matno << " 1 " << i + 1 << " " << j + 1 << " " << format_double(M(i, j)) << "\n";
  };
  emit(0, inst.C());
  for (std::size_t k = 0; k < inst.m(); ++k) emit(k + 1, inst.A(k));
}

void write_sdpa(const SdpInstance& inst, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  write_sdpa(inst, out);
}

Json to_json(const Matrix& M) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json to_json(const SymMatrix& M) { return to_json(M.dense()); }

Json to_json(const SdpInstance& inst) {
  Json A = Json::array();
  for (const auto& Ai : inst.A()) A.push_back(to_json(Ai));
  return {{"name", inst.name()}, {"n", inst.n()}, {"m", inst.m()},
          {"C", to_json(inst.C())}, {"A", std::move(A)}, {"b", inst.b()}};
}

}  // namespace gapscope
