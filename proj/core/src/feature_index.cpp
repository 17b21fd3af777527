#include "shape_rerank/feature_index.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <numeric>
#include <sstream>

#include <zlib.h>

#include "shape_rerank/errors.hpp"

namespace shape_rerank {
namespace {

constexpr char kMagic[4] = {'S', 'R', 'N', 'K'};

template <class T>
void put_le(std::string& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((value >> (8 * i)) & 0xff));
}

class ByteReader {
 public:
  explicit ByteReader(std::string_view bytes) : bytes_(bytes) {}

  template <class T>
  T get_le() {
    need(sizeof(T));
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      value |= static_cast<T>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(T);
    return value;
  }

  std::string_view get_bytes(std::size_t n) {
    need(n);
    auto out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) fail(ErrorKind::CorruptFile, "feature index is truncated");
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

std::uint32_t crc_of(std::string_view bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in bounded slices.
  constexpr std::size_t kSlice = 1u << 30;
  for (std::size_t off = 0; off < bytes.size(); off += kSlice) {
    const auto n = static_cast<uInt>(std::min(kSlice, bytes.size() - off));
    crc = crc32(crc, reinterpret_cast<const Bytef*>(bytes.data() + off), n);
  }
  return static_cast<std::uint32_t>(crc);
}

bool hit_before(double sa, std::uint32_t ea, double sb, std::uint32_t eb) {
  return sa != sb ? sa < sb : ea < eb;
}

}  // namespace

FeatureIndex::FeatureIndex(const FeatureSet& features, Strategy strategy) {
  if (features.empty()) fail(ErrorKind::InvalidArgument, "cannot index an empty feature set");
  dim_ = features.dim();
  ids_.reserve(features.size());
  data_.reserve(features.size() * dim_);
  // std::map iterates in ascending id order.
  for (const auto& [id, vector] : features.features()) {
    ids_.push_back(id);
    data_.insert(data_.end(), vector.values().begin(), vector.values().end());
  }
  build_tree(strategy);
}

FeatureIndex::FeatureIndex(std::vector<std::string> ids, std::vector<double> data, std::size_t dim,
                           Strategy strategy)
    : dim_(dim), ids_(std::move(ids)), data_(std::move(data)) {
  build_tree(strategy);
}

void FeatureIndex::build_tree(Strategy strategy) {
  if (ids_.size() >= std::numeric_limits<std::uint32_t>::max()) {
    fail(ErrorKind::InvalidArgument, "feature index supports fewer than 2^32 entries");
  }
  const bool tree = strategy == Strategy::KdTree || (strategy == Strategy::Auto && dim_ <= kMaxKdTreeDimension);
  if (!tree) return;
  order_.resize(ids_.size());
  std::iota(order_.begin(), order_.end(), 0u);
  build(0, static_cast<std::uint32_t>(order_.size()));
}

std::uint32_t FeatureIndex::build(std::uint32_t begin, std::uint32_t end) {
  const auto id = static_cast<std::uint32_t>(nodes_.size());
  nodes_.push_back(Node{begin, end});
  if (end - begin <= kLeafSize) return id;

  std::size_t axis = 0;
  double widest = 0.0;
  for (std::size_t a = 0; a < dim_; ++a) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::uint32_t i = begin; i < end; ++i) {
      const double v = data_[order_[i] * dim_ + a];
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (hi - lo > widest) {
      widest = hi - lo;
      axis = a;
    }
  }
  if (widest == 0.0) return id;

  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [this, axis](std::uint32_t a, std::uint32_t b) {
                     return data_[a * dim_ + axis] < data_[b * dim_ + axis];
                   });
  const double split = data_[order_[mid] * dim_ + axis];
  const std::uint32_t left = build(begin, mid);
  const std::uint32_t right = build(mid, end);
  Node& node = nodes_[id];
  node.axis = static_cast<std::int32_t>(axis);
  node.split = split;
  node.left = left;
  node.right = right;
  return id;
}

// Must match feature_distance() operation for operation so that index
// scores are bitwise equal to a plain scan.
double FeatureIndex::entry_distance(std::uint32_t entry, const double* query) const {
  const double* row = data_.data() + static_cast<std::size_t>(entry) * dim_;
  double sum = 0.0;
  for (std::size_t i = 0; i < dim_; ++i) {
    const double diff = row[i] - query[i];
    sum += diff * diff;
  }
  return std::sqrt(sum);
}

void FeatureIndex::search(std::uint32_t node_id, const double* query, std::size_t k,
                          std::vector<Hit>& heap) const {
  auto cmp = [](const Hit& a, const Hit& b) { return hit_before(a.score, a.entry, b.score, b.entry); };
  const Node& node = nodes_[node_id];
  if (node.axis < 0) {
    for (std::uint32_t i = node.begin; i < node.end; ++i) {
      const std::uint32_t entry = order_[i];
      const double score = entry_distance(entry, query);
      if (heap.size() < k) {
        heap.push_back({score, entry});
        std::push_heap(heap.begin(), heap.end(), cmp);
      } else if (hit_before(score, entry, heap.front().score, heap.front().entry)) {
        std::pop_heap(heap.begin(), heap.end(), cmp);
        heap.back() = {score, entry};
        std::push_heap(heap.begin(), heap.end(), cmp);
      }
    }
    return;
  }
  const double diff = query[node.axis] - node.split;
  const std::uint32_t near = diff < 0.0 ? node.left : node.right;
  const std::uint32_t far = diff < 0.0 ? node.right : node.left;
  search(near, query, k, heap);
  // Every far-side entry scores at least sqrt(diff^2) in floating point, so
  // skipping only when that bound strictly exceeds the worst kept score is
  // exact, ties included.
  if (heap.size() < k || std::sqrt(diff * diff) <= heap.front().score) search(far, query, k, heap);
}

CandidateSet FeatureIndex::to_candidates(std::vector<Hit> hits) const {
  std::sort(hits.begin(), hits.end(),
            [](const Hit& a, const Hit& b) { return hit_before(a.score, a.entry, b.score, b.entry); });
  CandidateSet out;
  out.kind = ScoreKind::FeatureDistance;
  out.entries.reserve(hits.size());
  for (const auto& h : hits) out.entries.push_back({ids_[h.entry], h.score});
  return out;
}

CandidateSet FeatureIndex::knn(const FeatureVector& query, std::size_t k) const {
  if (query.dim() != dim_) {
    fail(ErrorKind::DimensionMismatch,
         "query dimension " + std::to_string(query.dim()) + " does not match index dimension " + std::to_string(dim_));
  }
  if (k == 0) fail(ErrorKind::InvalidArgument, "k must be >= 1");
  k = std::min(k, ids_.size());
  const double* q = query.values().data();

  if (uses_kd_tree()) {
    std::vector<Hit> heap;
    heap.reserve(k + 1);
    search(0, q, k, heap);
    return to_candidates(std::move(heap));
  }

  std::vector<Hit> all(ids_.size());
  for (std::uint32_t e = 0; e < all.size(); ++e) all[e] = {entry_distance(e, q), e};
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end(),
                    [](const Hit& a, const Hit& b) { return hit_before(a.score, a.entry, b.score, b.entry); });
  all.resize(k);
  return to_candidates(std::move(all));
}

void FeatureIndex::write(std::ostream& out) const {
  std::string bytes(kMagic, sizeof(kMagic));
  put_le<std::uint16_t>(bytes, kFormatVersion);
  put_le<std::uint32_t>(bytes, static_cast<std::uint32_t>(dim_));
  put_le<std::uint64_t>(bytes, ids_.size());
  for (const auto& id : ids_) {
    put_le<std::uint32_t>(bytes, static_cast<std::uint32_t>(id.size()));
    bytes += id;
  }
  for (double v : data_) put_le<std::uint64_t>(bytes, std::bit_cast<std::uint64_t>(v));
  put_le<std::uint32_t>(bytes, crc_of(bytes));
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

FeatureIndex FeatureIndex::read(std::istream& in, Strategy strategy) {
  const std::string bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  ByteReader reader(bytes);
  const auto magic = reader.get_bytes(sizeof(kMagic));
  if (magic != std::string_view(kMagic, sizeof(kMagic))) fail(ErrorKind::CorruptFile, "bad feature index magic");
  const auto version = reader.get_le<std::uint16_t>();
  if (version != kFormatVersion) {
    fail(ErrorKind::VersionMismatch, "feature index version " + std::to_string(version) + ", expected " +
                                         std::to_string(kFormatVersion));
  }
  if (bytes.size() < 4 + sizeof(kMagic)) fail(ErrorKind::CorruptFile, "feature index is truncated");
  const std::string_view body(bytes.data(), bytes.size() - 4);
  ByteReader trailer(std::string_view(bytes).substr(bytes.size() - 4));
  if (crc_of(body) != trailer.get_le<std::uint32_t>()) fail(ErrorKind::CorruptFile, "feature index checksum mismatch");

  ByteReader payload(body.substr(sizeof(kMagic) + sizeof(std::uint16_t)));
  const auto dim = payload.get_le<std::uint32_t>();
  const auto count = payload.get_le<std::uint64_t>();
  if (dim == 0 || count == 0) fail(ErrorKind::CorruptFile, "feature index has no entries");
  if (count > payload.remaining() / 4) fail(ErrorKind::CorruptFile, "feature index entry count is implausible");

  std::vector<std::string> ids;
  ids.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto len = payload.get_le<std::uint32_t>();
    ids.emplace_back(payload.get_bytes(len));
    if (i > 0 && !(ids[i - 1] < ids[i])) fail(ErrorKind::CorruptFile, "feature index ids are not sorted");
  }
  if (payload.remaining() != count * dim * sizeof(double)) {
    fail(ErrorKind::CorruptFile, "feature index payload size does not match header");
  }
  std::vector<double> data(count * dim);
  for (auto& v : data) {
    v = std::bit_cast<double>(payload.get_le<std::uint64_t>());
    if (!std::isfinite(v)) fail(ErrorKind::CorruptFile, "feature index holds a non-finite value");
  }
  return FeatureIndex(std::move(ids), std::move(data), dim, strategy);
}

void FeatureIndex::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::IoError, "cannot write '" + path.string() + "'");
  write(out);
  if (!out) fail(ErrorKind::IoError, "write failed for '" + path.string() + "'");
}

FeatureIndex FeatureIndex::load(const std::filesystem::path& path, Strategy strategy) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::IoError, "cannot open '" + path.string() + "'");
  return read(in, strategy);
}

}  // namespace shape_rerank
