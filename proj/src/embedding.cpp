#include "xlalign/embedding.hpp"

#include <cmath>
#include <fstream>

#include "xlalign/errors.hpp"
#include "xlalign/io_util.hpp"

namespace xlalign {

std::string OccurrenceKey::to_string() const {
  return "(layer=" + std::to_string(layer) +
         ", sentence=" + std::to_string(sentence_id) +
         ", position=" + std::to_string(position) + ")";
}

void EmbeddingSpace::add_occurrence(OccurrenceRecord rec) {
  if (rec.vector.size() != dim_)
    throw DataError("occurrence " + rec.key().to_string() + " has dimension " +
                    std::to_string(rec.vector.size()) + ", space expects " +
                    std::to_string(dim_));
  auto [it, inserted] = by_key_.emplace(rec.key(), occurrences_.size());
  if (!inserted)
    throw DataError("duplicate occurrence key " + rec.key().to_string());
  layers_.insert(rec.layer);
  vocab_.insert(rec.token);
  by_layer_token_[{rec.layer, rec.token}].push_back(occurrences_.size());
  occurrences_.push_back(std::move(rec));
}

const Vec& EmbeddingSpace::lookup(std::int32_t layer, std::int64_t sentence_id,
                                  std::int64_t position) const {
  const Vec* v = find(layer, sentence_id, position);
  if (!v)
    throw DataError("no occurrence " +
                    OccurrenceKey{layer, sentence_id, position}.to_string());
  return *v;
}

const Vec* EmbeddingSpace::find(std::int32_t layer, std::int64_t sentence_id,
                                std::int64_t position) const {
  auto it = by_key_.find({layer, sentence_id, position});
  if (it == by_key_.end()) return nullptr;
  return &occurrences_[it->second].vector;
}

const std::vector<std::size_t>* EmbeddingSpace::occurrences_of(
    std::int32_t layer, const std::string& token) const {
  auto it = by_layer_token_.find({layer, token});
  if (it == by_layer_token_.end()) return nullptr;
  return &it->second;
}

namespace {

bool parse_record(std::string_view line, std::size_t dim, std::size_t line_no,
                  OccurrenceRecord& rec) {
  auto fields = split(line, '\t');
  if (fields.size() != 5) return false;
  if (fields[0].empty()) return false;
  std::int64_t layer, sid, pos;
  if (!parse_i64(fields[1], layer) || layer < 0) return false;
  if (!parse_i64(fields[2], sid) || sid < 0) return false;
  if (!parse_i64(fields[3], pos) || pos < 0) return false;
  Vec v;
  v.reserve(dim);
  std::size_t start = 0;
  std::string_view body = fields[4];
  std::size_t count = 0;
  while (true) {
    std::size_t sep = body.find(' ', start);
    std::string_view field = sep == std::string_view::npos
                                 ? body.substr(start)
                                 : body.substr(start, sep - start);
    double x;
    if (!parse_double(field, x) || !std::isfinite(x)) return false;
    v.push_back(x);
    ++count;
    if (sep == std::string_view::npos) break;
    start = sep + 1;
  }
  if (count != dim)
    throw DataError("dimension inconsistency at line " +
                    std::to_string(line_no) + ": got " + std::to_string(count) +
                    " values, expected " + std::to_string(dim));
  rec.token = std::string(fields[0]);
  rec.layer = static_cast<std::int32_t>(layer);
  rec.sentence_id = sid;
  rec.position = pos;
  rec.vector = std::move(v);
  return true;
}

}  // namespace

EmbeddingSpace load_contextual_dump(const std::string& path,
                                    const std::string& language,
                                    std::size_t* malformed_out) {
  std::ifstream in = open_input(path, "contextual dump");
  std::string line;
  std::size_t line_no = 0;
  std::size_t dim = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    auto fields = split_ws(line);
    std::int64_t d;
    if (fields.size() != 2 || fields[0] != "CTXDUMP" ||
        !parse_i64(fields[1], d) || d < 1)
      throw DataError(path + ": invalid CTXDUMP header at line " +
                      std::to_string(line_no));
    dim = static_cast<std::size_t>(d);
    have_header = true;
    break;
  }
  if (!have_header) throw DataError(path + ": no records");

  EmbeddingSpace space(language, dim);
  std::size_t data_lines = 0;
  std::size_t malformed = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    ++data_lines;
    OccurrenceRecord rec;
    if (!parse_record(line, dim, line_no, rec)) {
      ++malformed;
      continue;
    }
    if (space.find(rec.key())) {
      ++malformed;  // duplicate key
      continue;
    }
    space.add_occurrence(std::move(rec));
  }
  if (malformed_out) *malformed_out = malformed;
  if (malformed * 1000 > data_lines)
    throw DataError(path + ": " + std::to_string(malformed) + " of " +
                    std::to_string(data_lines) +
                    " lines malformed (budget is 0.1%)");
  if (space.occurrences().empty()) throw DataError(path + ": no records");
  return space;
}

void write_contextual_dump(const EmbeddingSpace& space,
                           const std::string& path) {
  atomic_write_file(path, [&](std::ostream& out) {
    out << "CTXDUMP " << space.dim() << "\n";
    std::string line;
    for (const OccurrenceRecord& rec : space.occurrences()) {
      line.clear();
      line += rec.token;
      line += '\t';
      line += std::to_string(rec.layer);
      line += '\t';
      line += std::to_string(rec.sentence_id);
      line += '\t';
      line += std::to_string(rec.position);
      line += '\t';
      append_vector(line, rec.vector);
      line += '\n';
      out << line;
    }
  });
}

AnchorTable compute_anchors(const EmbeddingSpace& space, std::int32_t layer,
                            std::int64_t min_count,
                            std::size_t* excluded_out) {
  if (!space.layers().count(layer))
    throw DataError("layer " + std::to_string(layer) +
                    " not present in embedding space");
  if (min_count < 1) throw ConfigError("min_count must be >= 1");

  AnchorTable table;
  table.language = space.language();
  table.layer = layer;
  table.dim = space.dim();
  std::size_t excluded = 0;
  for (const std::string& token : space.vocab()) {
    const std::vector<std::size_t>* idx = space.occurrences_of(layer, token);
    if (!idx) continue;
    auto count = static_cast<std::int64_t>(idx->size());
    if (count < min_count) {
      ++excluded;
      continue;
    }
    std::vector<KahanSum> acc(space.dim());
    for (std::size_t i : *idx) {
      const Vec& v = space.occurrences()[i].vector;
      for (std::size_t c = 0; c < v.size(); ++c) acc[c].add(v[c]);
    }
    Anchor anchor;
    anchor.count = count;
    anchor.vector.resize(space.dim());
    for (std::size_t c = 0; c < space.dim(); ++c)
      anchor.vector[c] = acc[c].value() / static_cast<double>(count);
    table.anchors.emplace(token, std::move(anchor));
  }
  if (excluded_out) *excluded_out = excluded;
  return table;
}

Vec average_subwords(const std::vector<Vec>& vectors) {
  if (vectors.empty()) throw DataError("average_subwords: empty sequence");
  std::size_t dim = vectors.front().size();
  std::vector<KahanSum> acc(dim);
  for (const Vec& v : vectors) {
    if (v.size() != dim)
      throw DataError("average_subwords: mixed dimensions " +
                      std::to_string(dim) + " vs " + std::to_string(v.size()));
    for (std::size_t c = 0; c < dim; ++c) acc[c].add(v[c]);
  }
  Vec mean(dim);
  for (std::size_t c = 0; c < dim; ++c)
    mean[c] = acc[c].value() / static_cast<double>(vectors.size());
  return mean;
}

void write_anchor_table(const AnchorTable& table, const std::string& path) {
  atomic_write_file(path, [&](std::ostream& out) {
    out << "ANCHORS " << table.language << " " << table.layer << " "
        << table.dim << "\n";
    std::string line;
    for (const auto& [token, anchor] : table.anchors) {
      line.clear();
      line += token;
      line += '\t';
      line += std::to_string(anchor.count);
      line += '\t';
      append_vector(line, anchor.vector);
      line += '\n';
      out << line;
    }
  });
}

AnchorTable load_anchor_table(const std::string& path) {
  std::ifstream in = open_input(path, "anchor table");
  std::string line;
  std::size_t line_no = 0;
  AnchorTable table;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    if (!have_header) {
      auto fields = split_ws(line);
      std::int64_t layer, dim;
      if (fields.size() != 4 || fields[0] != "ANCHORS" ||
          !parse_i64(fields[2], layer) || !parse_i64(fields[3], dim) || dim < 1)
        throw DataError(path + ": invalid ANCHORS header at line " +
                        std::to_string(line_no));
      table.language = std::string(fields[1]);
      table.layer = static_cast<std::int32_t>(layer);
      table.dim = static_cast<std::size_t>(dim);
      have_header = true;
      continue;
    }
    auto fields = split(line, '\t');
    std::int64_t count;
    Vec v;
    if (fields.size() != 3 || fields[0].empty() ||
        !parse_i64(fields[1], count) || count < 1 ||
        !parse_vector(fields[2], table.dim, v))
      throw DataError(path + ": malformed anchor line " +
                      std::to_string(line_no));
    auto [it, inserted] =
        table.anchors.emplace(std::string(fields[0]), Anchor{std::move(v), count});
    if (!inserted)
      throw DataError(path + ": duplicate anchor token at line " +
                      std::to_string(line_no));
  }
  if (!have_header || table.anchors.empty())
    throw DataError(path + ": no records");
  return table;
}

}  // namespace xlalign
