#include <openssl/evp.h>

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "procomplete/error.hpp"
#include "procomplete/recommender.hpp"

namespace procomplete {

namespace {

using nlohmann::json;

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(),
                 nullptr) != 1)
    throw Error(ErrorCode::IoFailure, "SHA-256 computation failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  hex.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    hex.push_back(kHex[digest[i] >> 4]);
    hex.push_back(kHex[digest[i] & 0xf]);
  }
  return hex;
}

json next_to_json(const NextElement& n) {
  return {{"id", n.node_id},
          {"label", n.label ? json(*n.label) : json(nullptr)},
          {"type", n.type.tag()}};
}

NextElement next_from_json(const json& j) {
  NextElement n;
  n.node_id = j.at("id").get<std::string>();
  if (!j.at("label").is_null()) n.label = j.at("label").get<std::string>();
  n.type = ElementType::from_tag(j.at("type").get<std::string>());
  return n;
}

}  // namespace

std::string serialize_index(const SliceIndex& index) {
  const auto& meta = index.meta();
  std::string out;
  out += json{{"kind", "meta"},
              {"format_version", meta.format_version},
              {"slice_length", meta.slice_length},
              {"embedder",
               {{"id", meta.embedder.id}, {"dimension", meta.embedder.dimension}}},
              {"mode", to_string(meta.mode)},
              {"created_at", meta.created_at},
              {"records", index.size()}}
             .dump();
  out += '\n';

  for (std::size_t i = 0; i < index.size(); ++i) {
    const auto& r = index.records()[i];
    json next = json::array();
    for (const auto& n : r.next) next.push_back(next_to_json(n));
    const auto values = index.embeddings()[i].values();
    // nlohmann emits the shortest decimal that round-trips each double.
    out += json{{"kind", "record"},
                {"process_id", r.process_id},
                {"node_ids", r.node_ids},
                {"slice_text", r.slice_text},
                {"next", std::move(next)},
                {"embedding", std::vector<double>(values.begin(), values.end())}}
               .dump();
    out += '\n';
  }

  const std::string digest = sha256_hex(out);
  out += json{{"kind", "checksum"}, {"algorithm", "sha256"}, {"digest", digest}}
             .dump();
  out += '\n';
  return out;
}

SliceIndex deserialize_index(std::string_view bytes) {
  auto first_nl = bytes.find('\n');
  if (first_nl == std::string_view::npos)
    throw Error(ErrorCode::ChecksumMismatch, "index file is truncated");

  json meta_line;
  try {
    meta_line = json::parse(bytes.substr(0, first_nl));
  } catch (const json::exception&) {
    throw Error(ErrorCode::ChecksumMismatch, "index meta line is corrupt");
  }
  if (!meta_line.is_object() || meta_line.value("kind", "") != "meta")
    throw Error(ErrorCode::ChecksumMismatch, "index has no meta line");
  if (meta_line.value("format_version", -1) != IndexMeta::kFormatVersion)
    throw Error(ErrorCode::FormatVersionMismatch,
                "index format version " +
                    meta_line.value("format_version", json(-1)).dump() +
                    ", expected " + std::to_string(IndexMeta::kFormatVersion));

  // Checksum line is the last complete line.
  std::string_view body = bytes;
  if (!body.ends_with('\n'))
    throw Error(ErrorCode::ChecksumMismatch, "index file is truncated");
  auto last_start = body.substr(0, body.size() - 1).rfind('\n');
  if (last_start == std::string_view::npos)
    throw Error(ErrorCode::ChecksumMismatch, "index file has no checksum");
  const std::string_view covered = body.substr(0, last_start + 1);
  std::string stored;
  try {
    auto line = json::parse(body.substr(last_start + 1));
    if (line.value("kind", "") != "checksum") throw std::runtime_error("");
    stored = line.at("digest").get<std::string>();
  } catch (const std::exception&) {
    throw Error(ErrorCode::ChecksumMismatch, "index file has no checksum line");
  }
  if (stored != sha256_hex(covered))
    throw Error(ErrorCode::ChecksumMismatch, "index checksum does not match");

  try {
    IndexMeta meta;
    meta.format_version = meta_line.at("format_version").get<int>();
    meta.slice_length = meta_line.at("slice_length").get<std::size_t>();
    meta.embedder.id = meta_line.at("embedder").at("id").get<std::string>();
    meta.embedder.dimension =
        meta_line.at("embedder").at("dimension").get<std::size_t>();
    meta.mode = parse_graph_mode(meta_line.at("mode").get<std::string>());
    meta.created_at = meta_line.at("created_at").get<std::string>();
    const auto expected = meta_line.at("records").get<std::size_t>();

    std::vector<SliceRecord> records;
    std::vector<Embedding> embeddings;
    records.reserve(expected);
    embeddings.reserve(expected);
    std::size_t pos = first_nl + 1;
    while (pos < covered.size()) {
      auto nl = covered.find('\n', pos);
      auto line = json::parse(covered.substr(pos, nl - pos));
      pos = nl + 1;
      SliceRecord r;
      r.process_id = line.at("process_id").get<std::string>();
      r.node_ids = line.at("node_ids").get<std::vector<std::string>>();
      r.slice_text = line.at("slice_text").get<std::string>();
      for (const auto& n : line.at("next")) r.next.push_back(next_from_json(n));
      embeddings.emplace_back(line.at("embedding").get<std::vector<double>>());
      records.push_back(std::move(r));
    }
    if (records.size() != expected)
      throw Error(ErrorCode::IoFailure,
                  "index declares " + std::to_string(expected) +
                      " records, found " + std::to_string(records.size()));
    return SliceIndex(std::move(meta), std::move(records), std::move(embeddings));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::IoFailure, std::string("index record: ") + e.what());
  }
}

void save_index(const SliceIndex& index, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write '" + path + "'");
  const std::string bytes = serialize_index(index);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoFailure, "write to '" + path + "' failed");
}

SliceIndex load_index(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize_index(buf.str());
}

}  // namespace procomplete
