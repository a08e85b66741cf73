#include "bergomi/checkpoint.hpp"

#include "bergomi/errors.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace bergomi {

std::uint64_t fnv1a64(const unsigned char* data, std::size_t n, std::uint64_t h) {
    for (std::size_t i = 0; i < n; ++i) {
        h ^= data[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

namespace {

constexpr char kMagic[8] = {'B', 'R', 'G', 'M', 'N', 'E', 'T', '1'};

class Writer {
public:
    void u32(std::uint32_t v) { put(v, 4); }
    void u64(std::uint64_t v) { put(v, 8); }
    void f64(double v) { put(std::bit_cast<std::uint64_t>(v), 8); }
    void bytes(const void* p, std::size_t n) {
        const auto* c = static_cast<const unsigned char*>(p);
        buf.insert(buf.end(), c, c + n);
    }
    std::vector<unsigned char> buf;

private:
    void put(std::uint64_t v, int n) {
        for (int i = 0; i < n; ++i) buf.push_back(static_cast<unsigned char>(v >> (8 * i)));
    }
};

class Reader {
public:
    explicit Reader(const std::vector<unsigned char>& b) : buf(b) {}
    std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
    std::uint64_t u64() { return get(8); }
    double f64() { return std::bit_cast<double>(get(8)); }
    std::string str(std::size_t n) {
        need(n);
        std::string s(reinterpret_cast<const char*>(buf.data() + pos), n);
        pos += n;
        return s;
    }
    std::size_t pos = 0;

private:
    void need(std::size_t n) const {
        if (pos + n > buf.size()) throw ConfigError("checkpoint is truncated");
    }
    std::uint64_t get(int n) {
        need(static_cast<std::size_t>(n));
        std::uint64_t v = 0;
        for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(buf[pos + static_cast<std::size_t>(i)]) << (8 * i);
        pos += static_cast<std::size_t>(n);
        return v;
    }
    const std::vector<unsigned char>& buf;
};

} // namespace

std::vector<unsigned char> serialize(const PricingNetwork& net) {
    Writer w;
    const Architecture& a = net.arch();
    w.bytes(kMagic, sizeof kMagic);
    w.u32(kCheckpointVersion);
    w.u32(static_cast<std::uint32_t>(a.net));
    w.u32(static_cast<std::uint32_t>(a.kind));
    w.u32(static_cast<std::uint32_t>(a.mode));
    w.u32(static_cast<std::uint32_t>(a.activation));
    for (int v : {a.depth, a.depth1, a.depth2, a.width, a.input_dim()}) w.u32(static_cast<std::uint32_t>(v));
    const InputEncoding& enc = net.encoding();
    for (int i = 0; i < enc.dim(); ++i) {
        w.f64(enc.center[static_cast<std::size_t>(i)]);
        w.f64(enc.half_width[static_cast<std::size_t>(i)]);
    }
    w.u32(static_cast<std::uint32_t>(net.tensors().size()));
    for (const auto& t : net.tensors()) {
        w.u32(static_cast<std::uint32_t>(t.name.size()));
        w.bytes(t.name.data(), t.name.size());
        w.u32(static_cast<std::uint32_t>(t.rows));
        w.u32(static_cast<std::uint32_t>(t.cols));
    }
    w.u64(net.num_weights());
    for (double x : net.weights()) w.f64(x);
    w.u64(fnv1a64(w.buf.data(), w.buf.size()));
    return w.buf;
}

PricingNetwork deserialize(const std::vector<unsigned char>& bytes) {
    if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0)
        throw ConfigError("not a network checkpoint (bad magic)");
    Reader r(bytes);
    r.pos = sizeof kMagic;
    const std::uint32_t version = r.u32();
    if (version != kCheckpointVersion) throw ConfigError("unsupported checkpoint version " + std::to_string(version));
    Architecture a;
    const std::uint32_t net_kind = r.u32(), kind = r.u32(), mode = r.u32(), act = r.u32();
    if (net_kind > 1 || kind >= kAllKinds.size() || mode > 1 || act > 2) throw ConfigError("corrupt architecture descriptor");
    a.net = static_cast<NetKind>(net_kind);
    a.kind = static_cast<OptionKind>(kind);
    a.mode = static_cast<CurveMode>(mode);
    a.activation = static_cast<Activation>(act);
    a.depth = static_cast<int>(r.u32());
    a.depth1 = static_cast<int>(r.u32());
    a.depth2 = static_cast<int>(r.u32());
    a.width = static_cast<int>(r.u32());
    const int n0 = static_cast<int>(r.u32());
    if (n0 != a.input_dim()) throw ConfigError("checkpoint input dimension does not match its curve mode");
    InputEncoding enc;
    enc.mode = a.mode;
    for (int i = 0; i < n0; ++i) {
        enc.center.push_back(r.f64());
        enc.half_width.push_back(r.f64());
    }
    PricingNetwork layout(a);
    const std::uint32_t ntensors = r.u32();
    if (ntensors != layout.tensors().size()) throw ConfigError("checkpoint tensor count does not match architecture");
    for (const auto& t : layout.tensors()) {
        const std::string name = r.str(r.u32());
        const int rows = static_cast<int>(r.u32());
        const int cols = static_cast<int>(r.u32());
        if (name != t.name || rows != t.rows || cols != t.cols)
            throw ConfigError("checkpoint tensor " + name + " does not match architecture");
    }
    const std::uint64_t nweights = r.u64();
    if (nweights != layout.num_weights()) throw ConfigError("checkpoint weight count does not match architecture");
    std::vector<double> weights(nweights);
    for (double& x : weights) x = r.f64();
    const std::size_t body = r.pos;
    const std::uint64_t hash = r.u64();
    if (hash != fnv1a64(bytes.data(), body)) throw ConfigError("checkpoint checksum mismatch");
    if (r.pos != bytes.size()) throw ConfigError("trailing bytes after checkpoint");
    return PricingNetwork(a, std::move(enc), std::move(weights));
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot write " + tmp.string());
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out) throw ConfigError("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::vector<unsigned char> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void save_checkpoint(const PricingNetwork& net, const std::filesystem::path& path) {
    const auto bytes = serialize(net);
    write_file_atomic(path, std::string(bytes.begin(), bytes.end()));
}

PricingNetwork load_checkpoint(const std::filesystem::path& path) { return deserialize(read_file(path)); }

} // namespace bergomi
