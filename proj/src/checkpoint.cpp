#include "multirat/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include <zlib.h>

namespace multirat::harness {

namespace {

constexpr const char* kMagic = "MULTIRAT-CHECKPOINT";

void put_doubles(std::string& out, const nn::Vector& v) {
    for (Eigen::Index k = 0; k < v.size(); ++k) {
        auto bits = std::bit_cast<std::uint64_t>(v[k]);
        for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xFF));
    }
}

nn::Vector get_doubles(const std::string& in, std::size_t& pos, std::size_t count) {
    if (pos + 8 * count > in.size()) throw CheckpointIntegrityError("checkpoint payload truncated");
    nn::Vector v(static_cast<Eigen::Index>(count));
    for (std::size_t k = 0; k < count; ++k) {
        std::uint64_t bits = 0;
        for (int b = 0; b < 8; ++b)
            bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + b])) << (8 * b);
        v[static_cast<Eigen::Index>(k)] = std::bit_cast<double>(bits);
        pos += 8;
    }
    return v;
}

void put_net(std::string& out, const nn::MlpNet& net) {
    put_doubles(out, net.params());
    put_doubles(out, net.target_params());
    put_doubles(out, net.first_moment());
    put_doubles(out, net.second_moment());
}

// Covers the header lines above the checksum line and the whole payload.
std::uint32_t checksum(const std::string& header, const std::string& payload) {
    uLong crc = crc32(0L, reinterpret_cast<const Bytef*>(header.data()), static_cast<uInt>(header.size()));
    crc = crc32(crc, reinterpret_cast<const Bytef*>(payload.data()), static_cast<uInt>(payload.size()));
    return static_cast<std::uint32_t>(crc);
}

std::string hex32(std::uint32_t v) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%08x", v);
    return buf;
}

std::uint32_t parse_hex32(const std::string& s) {
    std::size_t used = 0;
    const unsigned long v = std::stoul(s, &used, 16);
    if (used != s.size() || v > 0xFFFFFFFFul) throw std::invalid_argument("bad hex");
    return static_cast<std::uint32_t>(v);
}

// One header line per network.
struct BlockHeader {
    std::string team;
    int agent = 0;
    std::string role;
    nn::MlpSpec spec;
    std::size_t count = 0;
    std::int64_t steps = 0;
};

}  // namespace

Checkpoint make_checkpoint(const marl::Team& pens, const marl::Team& rans, std::uint32_t config_hash,
                           std::string rng_state) {
    Checkpoint c;
    c.config_hash = config_hash;
    c.teams = {{pens.name, pens.agents}, {rans.name, rans.agents}};
    c.rng_state = std::move(rng_state);
    return c;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
    std::string payload;
    std::ostringstream header;
    header << kMagic << "\n"
           << "version " << checkpoint.version << "\n"
           << "config_hash " << hex32(checkpoint.config_hash) << "\n";
    std::size_t blocks = 0;
    for (const auto& t : checkpoint.teams) blocks += 2 * t.agents.size();
    header << "blocks " << blocks << "\n";
    for (const auto& t : checkpoint.teams) {
        for (std::size_t k = 0; k < t.agents.size(); ++k) {
            for (const auto* role : {"actor", "critic"}) {
                const auto& net = std::string(role) == "actor" ? t.agents[k].actor : t.agents[k].critic;
                header << "block " << t.name << ' ' << k << ' ' << role << ' ' << net.spec().describe() << ' '
                       << net.parameter_count() << ' ' << net.step_count() << "\n";
                put_net(payload, net);
            }
        }
    }
    payload += checkpoint.rng_state;
    header << "rng_bytes " << checkpoint.rng_state.size() << "\n"
           << "payload_bytes " << payload.size() << "\n";
    const std::string covered = header.str();
    header << "checksum " << hex32(checksum(covered, payload)) << "\n"
           << "end\n";

    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw CheckpointError("cannot open " + tmp.string() + " for writing");
        const auto h = header.str();
        out.write(h.data(), static_cast<std::streamsize>(h.size()));
        out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
        out.flush();
        if (!out) throw CheckpointError("failed writing " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw CheckpointError("cannot move checkpoint into place: " + ec.message());
    }
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError("cannot read checkpoint " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    const std::string data = ss.str();

    std::size_t pos = 0;
    auto next_line = [&]() {
        const auto nl = data.find('\n', pos);
        if (nl == std::string::npos) throw CheckpointIntegrityError("checkpoint header truncated");
        std::string line = data.substr(pos, nl - pos);
        pos = nl + 1;
        return line;
    };
    auto field = [&](const std::string& name) {
        const auto line = next_line();
        if (line.rfind(name + " ", 0) != 0) throw CheckpointIntegrityError("checkpoint header: expected '" + name + "'");
        return line.substr(name.size() + 1);
    };

    Checkpoint c;
    std::vector<BlockHeader> headers;
    std::size_t rng_bytes = 0, payload_bytes = 0;
    std::uint32_t expected_sum = 0;
    std::size_t covered_end = 0;
    try {
        if (next_line() != kMagic) throw CheckpointIntegrityError("not a checkpoint file");
        c.version = std::stoi(field("version"));
        if (c.version > kCheckpointVersion)
            throw CheckpointError("checkpoint version " + std::to_string(c.version) +
                                  " is newer than supported version " + std::to_string(kCheckpointVersion));
        if (c.version < 1) throw CheckpointIntegrityError("checkpoint header: bad version");
        c.config_hash = parse_hex32(field("config_hash"));
        const auto blocks = std::stoul(field("blocks"));
        for (std::size_t b = 0; b < blocks; ++b) {
            std::istringstream line(field("block"));
            BlockHeader h;
            std::string spec;
            if (!(line >> h.team >> h.agent >> h.role >> spec >> h.count >> h.steps))
                throw CheckpointIntegrityError("checkpoint header: malformed block line");
            h.spec = nn::MlpSpec::parse(spec);
            headers.push_back(std::move(h));
        }
        rng_bytes = std::stoul(field("rng_bytes"));
        payload_bytes = std::stoul(field("payload_bytes"));
        covered_end = pos;
        expected_sum = parse_hex32(field("checksum"));
        if (next_line() != "end") throw CheckpointIntegrityError("checkpoint header: missing end marker");
    } catch (const CheckpointError&) {
        throw;
    } catch (const std::exception& e) {
        throw CheckpointIntegrityError(std::string("checkpoint header unreadable: ") + e.what());
    }

    if (data.size() - pos != payload_bytes)
        throw CheckpointIntegrityError("checkpoint length mismatch: expected " + std::to_string(payload_bytes) +
                                       " payload bytes, found " + std::to_string(data.size() - pos));
    const std::string payload = data.substr(pos);
    if (checksum(data.substr(0, covered_end), payload) != expected_sum) throw CheckpointIntegrityError("checkpoint checksum mismatch");

    std::size_t p = 0;
    for (std::size_t b = 0; b < headers.size(); ++b) {
        const auto& h = headers[b];
        auto net = nn::MlpNet::init(h.spec, 0);
        if (net.parameter_count() != h.count)
            throw CheckpointIntegrityError("checkpoint block parameter count disagrees with its spec");
        auto params = get_doubles(payload, p, h.count);
        auto target = get_doubles(payload, p, h.count);
        auto m1 = get_doubles(payload, p, h.count);
        auto m2 = get_doubles(payload, p, h.count);
        net.restore(std::move(params), std::move(target), std::move(m1), std::move(m2), h.steps);
        if (c.teams.empty() || c.teams.back().name != h.team) c.teams.push_back({h.team, {}});
        auto& agents = c.teams.back().agents;
        if (h.role == "actor") {
            if (static_cast<int>(agents.size()) != h.agent)
                throw CheckpointIntegrityError("checkpoint blocks out of order");
            agents.push_back(marl::Agent{std::move(net), nn::MlpNet{}});
        } else if (h.role == "critic") {
            if (agents.empty() || static_cast<int>(agents.size()) != h.agent + 1)
                throw CheckpointIntegrityError("checkpoint blocks out of order");
            agents.back().critic = std::move(net);
        } else {
            throw CheckpointIntegrityError("checkpoint block has unknown role '" + h.role + "'");
        }
    }
    if (payload.size() - p != rng_bytes) throw CheckpointIntegrityError("checkpoint rng block length mismatch");
    c.rng_state = payload.substr(p);
    return c;
}

void apply_checkpoint(const Checkpoint& checkpoint, std::uint32_t expected_hash, bool allow_hash_mismatch,
                      marl::Team& pens, marl::Team& rans) {
    if (checkpoint.config_hash != expected_hash && !allow_hash_mismatch)
        throw ConfigMismatchError("checkpoint config hash " + hex32(checkpoint.config_hash) +
                                  " does not match config hash " + hex32(expected_hash));
    for (marl::Team* team : {&pens, &rans}) {
        const TeamBlock* block = nullptr;
        for (const auto& t : checkpoint.teams)
            if (t.name == team->name) block = &t;
        if (!block) throw CheckpointError("checkpoint has no team '" + team->name + "'");
        if (block->agents.size() != team->agents.size())
            throw CheckpointError("checkpoint team '" + team->name + "' has a different agent count");
        for (std::size_t k = 0; k < block->agents.size(); ++k) {
            if (!(block->agents[k].actor.spec() == team->agents[k].actor.spec()) ||
                !(block->agents[k].critic.spec() == team->agents[k].critic.spec()))
                throw CheckpointError("checkpoint network shapes differ from the configured networks");
            team->agents[k] = block->agents[k];
        }
    }
}

}  // namespace multirat::harness
