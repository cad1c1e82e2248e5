#include "eba/embed.hpp"
#include "eba/error.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

namespace eba::embed {

namespace {

constexpr std::uint8_t kMagic[4] = {0x45, 0x42, 0x41, 0x45};  // "EBAE"

// A float32-rounded unit vector has |norm - 1| well below this.
constexpr double kRenormTolerance = 1e-6;

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xFF));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

class Reader {
public:
    explicit Reader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

    bool has(std::size_t n) const { return pos_ + n <= bytes_.size(); }
    bool done() const { return pos_ == bytes_.size(); }

    std::uint16_t u16() {
        const std::uint16_t v = static_cast<std::uint16_t>(bytes_[pos_] | (bytes_[pos_ + 1] << 8));
        pos_ += 2;
        return v;
    }
    std::uint32_t u32() {
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
        pos_ += 4;
        return v;
    }
    std::string str(std::size_t n) {
        std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
        pos_ += n;
        return s;
    }

private:
    const std::vector<std::uint8_t>& bytes_;
    std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_ebae(const EmbeddingStore& store) {
    std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
    put_u32(out, kEbaeVersion);
    const std::size_t dim = store.empty() ? kDefaultDim : store.dim();
    put_u32(out, static_cast<std::uint32_t>(dim));
    for (std::size_t r = 0; r < store.size(); ++r) {
        const std::string& id = store.ids()[r];
        if (id.size() > 0xFFFF) throw Error(ErrorKind::SerializationError, "id longer than 65535 bytes");
        put_u16(out, static_cast<std::uint16_t>(id.size()));
        out.insert(out.end(), id.begin(), id.end());
        for (double v : store.items()[r].values) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    }
    return out;
}

EmbeddingStore decode_ebae(const std::vector<std::uint8_t>& bytes) {
    Reader in(bytes);
    if (!in.has(12) || std::memcmp(bytes.data(), kMagic, 4) != 0) throw Error(ErrorKind::BadMagic, "not an EBAE file");
    in.str(4);
    const std::uint32_t version = in.u32();
    if (version != kEbaeVersion) throw Error(ErrorKind::BadMagic, "unsupported EBAE version " + std::to_string(version));
    const std::uint32_t dim = in.u32();
    if (dim == 0) throw Error(ErrorKind::DimMismatch, "EBAE header declares dimension 0");

    EmbeddingStore store;
    std::size_t record = 0;
    while (!in.done()) {
        if (!in.has(2)) throw Error(ErrorKind::TruncatedRecord, "record " + std::to_string(record) + ": id length");
        const std::uint16_t id_len = in.u16();
        if (!in.has(id_len + std::size_t{4} * dim)) {
            throw Error(ErrorKind::TruncatedRecord, "record " + std::to_string(record) + " is cut short");
        }
        std::string id = in.str(id_len);
        std::vector<double> raw(dim);
        double ss = 0.0;
        for (auto& v : raw) {
            v = static_cast<double>(std::bit_cast<float>(in.u32()));
            if (!std::isfinite(v)) throw Error(ErrorKind::ParseError, id + ": non-finite component");
            ss += v * v;
        }
        const double norm = std::sqrt(ss);
        if (!(norm > 0.0)) throw Error(ErrorKind::ZeroNormEmbedding, id);
        Embedding e;
        if (std::abs(norm - 1.0) > kRenormTolerance) {
            e = normalized(std::move(raw));
        } else {
            e.values = std::move(raw);
            e.source_norm = norm;
        }
        store.add(std::move(id), std::move(e));
        ++record;
    }
    return store;
}

void write_embeddings_file(const EmbeddingStore& store, const std::filesystem::path& path) {
    const auto bytes = encode_ebae(store);
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorKind::IoError, "cannot open " + tmp.string());
        out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        if (!out) {
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw Error(ErrorKind::IoError, "short write to " + tmp.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw Error(ErrorKind::IoError, "cannot move EBAE file into place at " + path.string());
    }
}

EmbeddingStore load_embeddings_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::FileNotFound, path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_ebae(bytes);
}

}  // namespace eba::embed
