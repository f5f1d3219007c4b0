#include "cpka/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "cpka/types.hpp"

namespace cpka {

namespace {

std::uint32_t le32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}
std::uint16_t le16(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}
void put32(std::ostream& os, std::uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                                static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    os.write(reinterpret_cast<const char*>(b), 4);
}
void put16(std::ostream& os, std::uint16_t v) {
    const unsigned char b[2] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8)};
    os.write(reinterpret_cast<const char*>(b), 2);
}

}  // namespace

std::vector<double> WavData::channel(int c) const {
    if (c < 0 || c >= channels) throw InputError("wav: channel index out of range");
    std::vector<double> out(frames());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = samples[i * static_cast<std::size_t>(channels) + static_cast<std::size_t>(c)];
    return out;
}

WavData read_wav(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("wav: cannot open " + path);
    std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (buf.size() < 12 || std::memcmp(buf.data(), "RIFF", 4) != 0 || std::memcmp(buf.data() + 8, "WAVE", 4) != 0)
        throw InputError("wav: not a RIFF/WAVE file: " + path);

    WavData out;
    int bits = 0;
    bool have_fmt = false;
    std::size_t pos = 12;
    while (pos + 8 <= buf.size()) {
        const std::uint32_t size = le32(&buf[pos + 4]);
        const std::size_t body = pos + 8;
        if (body + size > buf.size()) throw InputError("wav: truncated chunk in " + path);
        if (std::memcmp(&buf[pos], "fmt ", 4) == 0) {
            if (size < 16) throw InputError("wav: short fmt chunk");
            const std::uint16_t format = le16(&buf[body]);
            out.channels = le16(&buf[body + 2]);
            out.sample_rate = static_cast<int>(le32(&buf[body + 4]));
            bits = le16(&buf[body + 14]);
            if (format != 1 || bits != 16)
                throw InputError("wav: only 16-bit PCM is supported (" + path + ")");
            if (out.channels < 1) throw InputError("wav: no channels");
            have_fmt = true;
        } else if (std::memcmp(&buf[pos], "data", 4) == 0) {
            if (!have_fmt) throw InputError("wav: data chunk before fmt chunk");
            const std::size_t n = size / 2;
            out.samples.resize(n);
            for (std::size_t i = 0; i < n; ++i) {
                const auto v = static_cast<std::int16_t>(le16(&buf[body + 2 * i]));
                out.samples[i] = static_cast<double>(v) / 32768.0;
            }
            return out;
        }
        pos = body + size + (size & 1u);
    }
    throw InputError("wav: no data chunk in " + path);
}

void write_wav(const std::string& path, const std::vector<double>& mono, int sample_rate, double gain) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("wav: cannot write " + path);
    const auto data_bytes = static_cast<std::uint32_t>(mono.size() * 2);
    os.write("RIFF", 4);
    put32(os, 36 + data_bytes);
    os.write("WAVEfmt ", 8);
    put32(os, 16);
    put16(os, 1);
    put16(os, 1);
    put32(os, static_cast<std::uint32_t>(sample_rate));
    put32(os, static_cast<std::uint32_t>(sample_rate) * 2);
    put16(os, 2);
    put16(os, 16);
    os.write("data", 4);
    put32(os, data_bytes);
    for (double v : mono) {
        const double c = std::clamp(v * gain, -1.0, 1.0);
        const auto q = static_cast<std::int16_t>(std::lround(std::clamp(c * 32768.0, -32768.0, 32767.0)));
        put16(os, static_cast<std::uint16_t>(q));
    }
    if (!os) throw std::runtime_error("wav: write failed for " + path);
}

}  // namespace cpka
