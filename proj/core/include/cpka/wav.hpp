#pragma once

#include <string>
#include <vector>

namespace cpka {

struct WavData {
    int sample_rate = 0;
    int channels = 0;
    // interleaved samples scaled to [-1, 1)
    std::vector<double> samples;

    std::vector<double> channel(int c) const;
    std::size_t frames() const { return channels ? samples.size() / channels : 0; }
};

// RIFF/WAVE, PCM 16-bit only. Anything else raises InputError.
WavData read_wav(const std::string& path);

// Mono 16-bit PCM. Values are clipped to [-1, 1] after scaling by `gain`.
void write_wav(const std::string& path, const std::vector<double>& mono, int sample_rate, double gain = 1.0);

}  // namespace cpka
