#include "dal/data.hpp"

#include <algorithm>
#include <bit>
#include <cassert>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

static_assert(std::endian::native == std::endian::little,
              "file formats are little-endian; big-endian hosts are unsupported");

namespace dal {
namespace {

constexpr char kFeatureMagic[4] = {'D', 'A', 'L', 'F'};
constexpr char kCheckpointMagic[4] = {'D', 'A', 'L', 'C'};
constexpr std::uint32_t kFeatureVersion = 1;
constexpr std::uint32_t kCheckpointVersion = 1;

// --- low-level binary IO -----------------------------------------------------

template <class T>
void put(std::string& buf, T value) {
  char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  buf.append(bytes, sizeof(T));
}

class Reader {
 public:
  Reader(std::string data, std::string path)
      : data_(std::move(data)), path_(std::move(path)) {}

  template <class T>
  T get() {
    if (pos_ + sizeof(T) > data_.size()) {
      raise(ErrorCode::TruncatedFile,
            path_ + " ends at byte " + std::to_string(data_.size()) +
                ", needed " + std::to_string(pos_ + sizeof(T)));
    }
    T value;
    std::memcpy(&value, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }

  std::string get_bytes(std::size_t n) {
    if (pos_ + n > data_.size()) {
      raise(ErrorCode::TruncatedFile,
            path_ + " ends at byte " + std::to_string(data_.size()) +
                ", needed " + std::to_string(pos_ + n));
    }
    std::string out = data_.substr(pos_, n);
    pos_ += n;
    return out;
  }

  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return data_.size() - pos_; }
  const std::string& path() const { return path_; }

 private:
  std::string data_;
  std::string path_;
  std::size_t pos_ = 0;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::IoFailure, "cannot open " + path + " for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) raise(ErrorCode::IoFailure, "cannot open " + path + " for writing");
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) raise(ErrorCode::IoFailure, "short write to " + path);
}

// --- manifest parsing helpers --------------------------------------------------

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

std::int64_t parse_int(const std::string& s, std::size_t row, const char* what) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    raise(ErrorCode::DanglingManifestRow, "row " + std::to_string(row) +
                                              ": cannot parse " + what + " from '" +
                                              s + "'");
  }
}

}  // namespace

// --- Dataset -------------------------------------------------------------------

std::size_t Dataset::total_tracklets() const {
  std::size_t n = 0;
  for (auto c : tracklets_per_camera) n += c;
  return n;
}

void Dataset::validate_for_training() const {
  if (cameras < 2) {
    raise(ErrorCode::SingleCamera, "training needs at least 2 cameras, dataset has " +
                                       std::to_string(cameras));
  }
}

Dataset build_dataset(std::vector<FrameRecord> frames) {
  if (frames.empty()) raise(ErrorCode::EmptyDataset, "no frames");
  Dataset ds;
  ds.dim = frames[0].feature.size();
  const bool labeled = frames[0].identity_id.has_value();
  std::size_t max_camera = 0;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto& f = frames[i];
    if (f.feature.size() != ds.dim) {
      raise(ErrorCode::DimensionMismatch,
            "row " + std::to_string(i) + " has dimension " +
                std::to_string(f.feature.size()) + ", expected " + std::to_string(ds.dim));
    }
    if (!all_finite(f.feature)) {
      raise(ErrorCode::NonFiniteFeature, "row " + std::to_string(i));
    }
    if (f.identity_id.has_value() != labeled) {
      raise(ErrorCode::DanglingManifestRow,
            "row " + std::to_string(i) + ": identity label present on some rows only");
    }
    max_camera = std::max(max_camera, f.camera_id);
  }
  ds.cameras = max_camera + 1;
  ds.has_labels = labeled;

  // Tracklet indices must be dense per camera.
  std::vector<std::set<std::size_t>> seen(ds.cameras);
  std::vector<std::size_t> max_trk(ds.cameras, 0);
  for (const auto& f : frames) {
    seen[f.camera_id].insert(f.tracklet_index);
    max_trk[f.camera_id] = std::max(max_trk[f.camera_id], f.tracklet_index);
  }
  ds.tracklets_per_camera.resize(ds.cameras);
  for (std::size_t k = 0; k < ds.cameras; ++k) {
    if (seen[k].empty()) {
      raise(ErrorCode::DanglingManifestRow,
            "camera " + std::to_string(k) + " has no tracklets");
    }
    if (seen[k].size() != max_trk[k] + 1) {
      raise(ErrorCode::DanglingManifestRow,
            "camera " + std::to_string(k) + " tracklet indices are not dense");
    }
    ds.tracklets_per_camera[k] = max_trk[k] + 1;
  }

  ds.frames_by_tracklet.resize(ds.cameras);
  for (std::size_t k = 0; k < ds.cameras; ++k) {
    ds.frames_by_tracklet[k].resize(ds.tracklets_per_camera[k]);
  }
  for (std::size_t i = 0; i < frames.size(); ++i) {
    ds.frames_by_tracklet[frames[i].camera_id][frames[i].tracklet_index].push_back(i);
  }

  if (labeled) {
    ds.identity_of.resize(ds.cameras);
    for (std::size_t k = 0; k < ds.cameras; ++k) {
      ds.identity_of[k].resize(ds.tracklets_per_camera[k]);
      for (std::size_t t = 0; t < ds.tracklets_per_camera[k]; ++t) {
        const auto& rows = ds.frames_by_tracklet[k][t];
        const std::int64_t id = *frames[rows[0]].identity_id;
        for (std::size_t r : rows) {
          if (*frames[r].identity_id != id) {
            raise(ErrorCode::DanglingManifestRow,
                  "row " + std::to_string(r) +
                      ": identity label differs within its tracklet");
          }
        }
        ds.identity_of[k][t] = id;
      }
    }
  }

  ds.frames = std::move(frames);
  return ds;
}

// --- feature file ----------------------------------------------------------------

void save_features(const std::string& path, const std::vector<Vec>& rows) {
  std::string buf;
  buf.append(kFeatureMagic, 4);
  put<std::uint32_t>(buf, kFeatureVersion);
  put<std::uint64_t>(buf, rows.size());
  const std::uint32_t dim = rows.empty() ? 0 : static_cast<std::uint32_t>(rows[0].size());
  put<std::uint32_t>(buf, dim);
  for (const auto& row : rows) {
    assert(row.size() == dim);
    for (double x : row) put<float>(buf, static_cast<float>(x));
  }
  write_file(path, buf);
}

std::vector<Vec> load_feature_rows(const std::string& path) {
  Reader r(read_file(path), path);
  const std::string magic = r.get_bytes(4);
  if (std::memcmp(magic.data(), kFeatureMagic, 4) != 0) {
    raise(ErrorCode::BadMagic, path + " does not start with the feature magic");
  }
  const auto version = r.get<std::uint32_t>();
  if (version != kFeatureVersion) {
    raise(ErrorCode::VersionMismatch,
          path + " has version " + std::to_string(version) + ", expected " +
              std::to_string(kFeatureVersion));
  }
  const auto rows = r.get<std::uint64_t>();
  const auto dim = r.get<std::uint32_t>();
  const std::uint64_t want = rows * static_cast<std::uint64_t>(dim) * sizeof(float);
  if (r.remaining() < want) {
    raise(ErrorCode::TruncatedFile,
          path + " payload holds " + std::to_string(r.remaining()) +
              " bytes, header promises " + std::to_string(want));
  }
  if (r.remaining() > want) {
    raise(ErrorCode::RowCountMismatch,
          path + " payload holds " + std::to_string(r.remaining()) +
              " bytes, header promises " + std::to_string(want));
  }
  std::vector<Vec> out(rows, Vec(dim));
  for (std::uint64_t i = 0; i < rows; ++i) {
    for (std::uint32_t j = 0; j < dim; ++j) {
      out[i][j] = static_cast<double>(r.get<float>());
    }
  }
  return out;
}

// --- manifest ----------------------------------------------------------------------

void save_manifest(const std::string& path, const std::vector<ManifestRow>& rows) {
  std::ostringstream out;
  const bool labeled = !rows.empty() && rows[0].identity_id.has_value();
  out << (labeled ? "frame_id,tracklet_index,camera_id,identity_id\n"
                  : "frame_id,tracklet_index,camera_id\n");
  for (const auto& r : rows) {
    out << r.frame_id << ',' << r.tracklet_index << ',' << r.camera_id;
    if (labeled) out << ',' << *r.identity_id;
    out << '\n';
  }
  write_file(path, out.str());
}

std::vector<ManifestRow> load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorCode::IoFailure, "cannot open " + path + " for reading");
  std::string line;
  if (!std::getline(in, line)) {
    raise(ErrorCode::EmptyDataset, path + " is empty");
  }
  const auto header = split_csv_line(line);
  bool labeled = false;
  if (header.size() == 4 && header[3] == "identity_id") {
    labeled = true;
  } else if (header.size() != 3) {
    raise(ErrorCode::DanglingManifestRow, "unrecognized manifest header in " + path);
  }
  if (header[0] != "frame_id" || header[1] != "tracklet_index" ||
      header[2] != "camera_id") {
    raise(ErrorCode::DanglingManifestRow, "unrecognized manifest header in " + path);
  }

  std::vector<ManifestRow> rows;
  std::size_t row_no = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != (labeled ? 4u : 3u)) {
      raise(ErrorCode::DanglingManifestRow,
            "row " + std::to_string(row_no) + " has " + std::to_string(fields.size()) +
                " fields");
    }
    ManifestRow r;
    r.frame_id = parse_int(fields[0], row_no, "frame_id");
    const std::int64_t trk = parse_int(fields[1], row_no, "tracklet_index");
    const std::int64_t cam = parse_int(fields[2], row_no, "camera_id");
    if (trk < 0 || cam < 0) {
      raise(ErrorCode::DanglingManifestRow,
            "row " + std::to_string(row_no) + ": negative tracklet or camera index");
    }
    r.tracklet_index = static_cast<std::size_t>(trk);
    r.camera_id = static_cast<std::size_t>(cam);
    if (labeled) r.identity_id = parse_int(fields[3], row_no, "identity_id");
    rows.push_back(r);
    ++row_no;
  }
  return rows;
}

Dataset load_features(const std::string& feature_path, const std::string& manifest_path) {
  const auto feature_rows = load_feature_rows(feature_path);
  const auto manifest = load_manifest(manifest_path);
  if (manifest.empty()) {
    raise(ErrorCode::EmptyDataset, manifest_path + " has no data rows");
  }
  if (manifest.size() > feature_rows.size()) {
    raise(ErrorCode::DanglingManifestRow,
          "manifest row " + std::to_string(feature_rows.size()) +
              " references no feature row (features end at " +
              std::to_string(feature_rows.size()) + ")");
  }
  if (manifest.size() < feature_rows.size()) {
    raise(ErrorCode::RowCountMismatch,
          "manifest has " + std::to_string(manifest.size()) + " rows, feature file has " +
              std::to_string(feature_rows.size()));
  }
  std::vector<FrameRecord> frames(manifest.size());
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    frames[i].frame_id = manifest[i].frame_id;
    frames[i].tracklet_index = manifest[i].tracklet_index;
    frames[i].camera_id = manifest[i].camera_id;
    frames[i].identity_id = manifest[i].identity_id;
    frames[i].feature = feature_rows[i];
  }
  return build_dataset(std::move(frames));
}

void save_dataset(const std::string& feature_path, const std::string& manifest_path,
                  const Dataset& ds) {
  std::vector<Vec> rows;
  std::vector<ManifestRow> manifest;
  rows.reserve(ds.frames.size());
  manifest.reserve(ds.frames.size());
  for (const auto& f : ds.frames) {
    rows.push_back(f.feature);
    manifest.push_back({f.frame_id, f.tracklet_index, f.camera_id, f.identity_id});
  }
  save_features(feature_path, rows);
  save_manifest(manifest_path, manifest);
}

// --- synthetic benchmark --------------------------------------------------------

void SyntheticConfig::validate() const {
  if (identities < 2) raise(ErrorCode::ConfigInvalid, "identities must be >= 2");
  if (cameras < 2) raise(ErrorCode::ConfigInvalid, "cameras must be >= 2");
  if (dim == 0) raise(ErrorCode::ConfigInvalid, "dim must be positive");
  if (frames_min == 0 || frames_max < frames_min) {
    raise(ErrorCode::ConfigInvalid, "frame count range is empty");
  }
  if (noise < 0.0) raise(ErrorCode::ConfigInvalid, "noise must be >= 0");
  if (distortion < 0.0) raise(ErrorCode::ConfigInvalid, "distortion must be >= 0");
  if (min_separation < 0.0) raise(ErrorCode::ConfigInvalid, "min_separation must be >= 0");
}

Dataset generate_synthetic(const SyntheticConfig& config) {
  config.validate();
  Rng rng(config.seed);
  const std::size_t d = config.dim;

  // Unit prototypes with pairwise angular separation >= min_separation.
  std::vector<Vec> protos;
  std::size_t attempts = 0;
  while (protos.size() < config.identities) {
    if (++attempts > 1000000) {
      raise(ErrorCode::ConfigInvalid,
            "cannot place " + std::to_string(config.identities) +
                " prototypes with separation " + std::to_string(config.min_separation));
    }
    Vec v(d);
    for (auto& x : v) x = rng.normal();
    if (norm2(v) < kZeroNormEps) continue;
    const Vec u = l2_normalize(v);
    bool ok = true;
    for (const auto& p : protos) {
      double dot = 0.0;
      for (std::size_t i = 0; i < d; ++i) dot += u[i] * p[i];
      dot = std::clamp(dot, -1.0, 1.0);
      if (std::acos(dot) < config.min_separation) {
        ok = false;
        break;
      }
    }
    if (ok) protos.push_back(u);
  }

  // Per-camera linear distortion I + distortion * G / sqrt(d).
  std::vector<std::vector<double>> transforms;  // row-major d x d
  for (std::size_t k = 0; k < config.cameras; ++k) {
    std::vector<double> A(d * d, 0.0);
    for (std::size_t i = 0; i < d; ++i) A[i * d + i] = 1.0;
    if (config.distortion > 0.0) {
      const double scale = config.distortion / std::sqrt(static_cast<double>(d));
      for (std::size_t i = 0; i < d * d; ++i) A[i] += scale * rng.normal();
    }
    transforms.push_back(std::move(A));
  }

  std::vector<FrameRecord> frames;
  std::int64_t next_frame_id = 0;
  for (std::size_t k = 0; k < config.cameras; ++k) {
    for (std::size_t i = 0; i < config.identities; ++i) {
      const std::size_t nf =
          config.frames_min + rng.index(config.frames_max - config.frames_min + 1);
      Vec base(d, 0.0);
      for (std::size_t r = 0; r < d; ++r) {
        double acc = 0.0;
        for (std::size_t c = 0; c < d; ++c) acc += transforms[k][r * d + c] * protos[i][c];
        base[r] = acc;
      }
      for (std::size_t f = 0; f < nf; ++f) {
        FrameRecord rec;
        rec.frame_id = next_frame_id++;
        rec.tracklet_index = i;
        rec.camera_id = k;
        rec.identity_id = static_cast<std::int64_t>(i);
        rec.feature.resize(d);
        for (std::size_t c = 0; c < d; ++c) {
          rec.feature[c] = base[c] + config.noise * rng.normal();
        }
        frames.push_back(std::move(rec));
      }
    }
  }
  return build_dataset(std::move(frames));
}

// --- batch sampling --------------------------------------------------------------

std::vector<std::size_t> sample_batch(Rng& rng, const Dataset& ds, std::size_t batch) {
  assert(batch >= 1);
  const std::size_t n = ds.frames.size();
  if (batch <= n) return rng.sample_without_replacement(n, batch);
  std::vector<std::size_t> out(batch);
  for (auto& i : out) i = rng.index(n);
  return out;
}

BalancedSampler::BalancedSampler(const Dataset& ds) {
  for (std::size_t k = 0; k < ds.cameras; ++k) {
    for (std::size_t t = 0; t < ds.tracklets_per_camera[k]; ++t) {
      order_.emplace_back(k, t);
    }
  }
  cursor_ = order_.size();  // force a shuffle before the first batch
}

std::vector<std::size_t> BalancedSampler::next(Rng& rng, const Dataset& ds,
                                               std::size_t batch) {
  std::vector<std::size_t> out;
  out.reserve(batch);
  for (std::size_t b = 0; b < batch; ++b) {
    if (cursor_ >= order_.size()) {
      rng.shuffle(order_);
      cursor_ = 0;
    }
    const auto [cam, trk] = order_[cursor_++];
    const auto& rows = ds.frames_by_tracklet[cam][trk];
    out.push_back(rows[rng.index(rows.size())]);
  }
  return out;
}

std::string BalancedSampler::serialize() const {
  std::ostringstream oss;
  oss << cursor_ << ' ' << order_.size();
  for (const auto& [cam, trk] : order_) oss << ' ' << cam << ' ' << trk;
  return oss.str();
}

BalancedSampler BalancedSampler::deserialize(const std::string& text) {
  BalancedSampler s;
  std::istringstream iss(text);
  std::size_t n = 0;
  iss >> s.cursor_ >> n;
  s.order_.resize(n);
  for (auto& [cam, trk] : s.order_) iss >> cam >> trk;
  return s;
}

// --- checkpoint --------------------------------------------------------------------

namespace {

void put_section(std::string& buf, const char tag[4], const std::string& payload) {
  buf.append(tag, 4);
  put<std::uint64_t>(buf, payload.size());
  buf += payload;
}

std::string expect_section(Reader& r, const char tag[4]) {
  const std::string got = r.get_bytes(4);
  if (std::memcmp(got.data(), tag, 4) != 0) {
    raise(ErrorCode::TruncatedFile, r.path() + ": expected section '" +
                                        std::string(tag, 4) + "', found '" + got + "'");
  }
  const auto len = r.get<std::uint64_t>();
  return r.get_bytes(len);
}

void put_vec(std::string& buf, const std::vector<double>& v) {
  put<std::uint64_t>(buf, v.size());
  for (double x : v) put<double>(buf, x);
}

std::vector<double> get_vec(Reader& r) {
  const auto n = r.get<std::uint64_t>();
  std::vector<double> v(n);
  for (auto& x : v) x = r.get<double>();
  return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& checkpoint) {
  std::string buf;
  buf.append(kCheckpointMagic, 4);
  put<std::uint32_t>(buf, kCheckpointVersion);
  put<std::uint64_t>(buf, checkpoint.iteration);

  std::string head;
  put<std::uint32_t>(head, static_cast<std::uint32_t>(checkpoint.head.kind));
  put<std::uint64_t>(head, checkpoint.head.d_in);
  put<std::uint64_t>(head, checkpoint.head.d_out);
  put<std::uint64_t>(head, checkpoint.head.hidden);
  put_vec(head, checkpoint.head.params);
  put_section(buf, "HEAD", head);

  std::string opt;
  put<double>(opt, checkpoint.optimizer.initial_rate);
  put<double>(opt, checkpoint.optimizer.decay_factor);
  put<std::uint64_t>(opt, checkpoint.optimizer.decay_interval);
  put<double>(opt, checkpoint.optimizer.momentum);
  put<std::uint64_t>(opt, checkpoint.optimizer.iteration);
  put_vec(opt, checkpoint.optimizer.velocity);
  put_section(buf, "OPTS", opt);

  std::string bank;
  put<double>(bank, checkpoint.bank.eta);
  put<std::uint64_t>(bank, checkpoint.bank.dim);
  put<std::uint64_t>(bank, checkpoint.bank.n_cameras());
  for (std::size_t k = 0; k < checkpoint.bank.n_cameras(); ++k) {
    put<std::uint64_t>(bank, checkpoint.bank.n_anchors(k));
    for (const auto& x : checkpoint.bank.intra[k]) put_vec(bank, x);
    for (const auto& a : checkpoint.bank.cross[k]) put_vec(bank, a);
    for (const auto& m : checkpoint.bank.merge[k]) {
      put<std::uint8_t>(bank, m.merged ? 1 : 0);
      put<std::uint64_t>(bank, m.peer_camera);
      put<std::uint64_t>(bank, m.peer_index);
    }
  }
  put_section(buf, "BANK", bank);

  put_section(buf, "RNGS", checkpoint.rng_state);
  put_section(buf, "SMPL", checkpoint.sampler_state);
  write_file(path, buf);
}

Checkpoint load_checkpoint(const std::string& path) {
  Reader r(read_file(path), path);
  const std::string magic = r.get_bytes(4);
  if (std::memcmp(magic.data(), kCheckpointMagic, 4) != 0) {
    raise(ErrorCode::BadMagic, path + " does not start with the checkpoint magic");
  }
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointVersion) {
    raise(ErrorCode::VersionMismatch,
          path + " has version " + std::to_string(version) + ", expected " +
              std::to_string(kCheckpointVersion));
  }
  Checkpoint c;
  c.iteration = r.get<std::uint64_t>();

  {
    Reader h(expect_section(r, "HEAD"), path + " [HEAD]");
    c.head.kind = static_cast<HeadKind>(h.get<std::uint32_t>());
    c.head.d_in = h.get<std::uint64_t>();
    c.head.d_out = h.get<std::uint64_t>();
    c.head.hidden = h.get<std::uint64_t>();
    c.head.params = get_vec(h);
  }
  {
    Reader o(expect_section(r, "OPTS"), path + " [OPTS]");
    c.optimizer.initial_rate = o.get<double>();
    c.optimizer.decay_factor = o.get<double>();
    c.optimizer.decay_interval = o.get<std::uint64_t>();
    c.optimizer.momentum = o.get<double>();
    c.optimizer.iteration = o.get<std::uint64_t>();
    c.optimizer.velocity = get_vec(o);
  }
  {
    Reader b(expect_section(r, "BANK"), path + " [BANK]");
    c.bank.eta = b.get<double>();
    c.bank.dim = b.get<std::uint64_t>();
    const auto cams = b.get<std::uint64_t>();
    c.bank.intra.resize(cams);
    c.bank.cross.resize(cams);
    c.bank.merge.resize(cams);
    for (std::uint64_t k = 0; k < cams; ++k) {
      const auto n = b.get<std::uint64_t>();
      c.bank.intra[k].resize(n);
      c.bank.cross[k].resize(n);
      c.bank.merge[k].resize(n);
      for (auto& x : c.bank.intra[k]) x = get_vec(b);
      for (auto& a : c.bank.cross[k]) a = get_vec(b);
      for (auto& m : c.bank.merge[k]) {
        m.merged = (b.get<std::uint8_t>() != 0);
        m.peer_camera = b.get<std::uint64_t>();
        m.peer_index = b.get<std::uint64_t>();
      }
    }
  }
  c.rng_state = expect_section(r, "RNGS");
  c.sampler_state = expect_section(r, "SMPL");
  return c;
}

}  // namespace dal
