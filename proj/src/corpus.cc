// src/corpus.cc

// Copyright 2026  The kwsaug Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "kws/corpus.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "kws/augment.h"
#include "kws/error.h"

namespace kws {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kFadeSeconds = 0.005;
constexpr double kMaxPeak = 0.9;

std::size_t MsToSamples(double ms, int rate) {
  return static_cast<std::size_t>(std::llround(ms * rate / 1000.0));
}

std::string NumberedId(const char *prefix, int n) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s-%04d", prefix, n);
  return buf;
}

int DrawCount(const Range &r, Rng &rng) {
  const int lo = static_cast<int>(r.low), hi = static_cast<int>(r.high);
  return lo + static_cast<int>(rng.UniformInt(static_cast<std::uint64_t>(hi - lo + 1)));
}

std::string RandomPhone(const PhoneSet &set, Rng &rng) {
  return set.phones[rng.UniformInt(set.size())].symbol;
}

// Raised-cosine fade in and out over `fade` samples at the segment edges.
double EdgeGain(std::size_t n, std::size_t length, std::size_t fade) {
  if (fade == 0) return 1.0;
  const std::size_t edge = std::min(n, length - 1 - n);
  if (edge >= fade) return 1.0;
  return 0.5 - 0.5 * std::cos(std::numbers::pi * (edge + 0.5) / fade);
}

std::vector<std::string> PositivePhones(const CorpusConfig &c, Rng &rng) {
  std::vector<std::string> phones;
  const int before = static_cast<int>(rng.UniformInt(c.max_fillers + 1));
  const int after = static_cast<int>(rng.UniformInt(c.max_fillers + 1));
  for (int i = 0; i < before; ++i) phones.push_back(RandomPhone(c.phone_set, rng));
  phones.insert(phones.end(), c.keyword.begin(), c.keyword.end());
  for (int i = 0; i < after; ++i) phones.push_back(RandomPhone(c.phone_set, rng));
  return phones;
}

// Random phones, half of them carrying a keyword fragment; redrawn until
// the full keyword is absent.
std::vector<std::string> NegativePhones(const CorpusConfig &c, Rng &rng) {
  const int kw = static_cast<int>(c.keyword.size());
  for (;;) {
    const int n = DrawCount(c.negative_phones, rng);
    std::vector<std::string> phones(n);
    for (auto &p : phones) p = RandomPhone(c.phone_set, rng);
    if (kw >= 2 && rng.Uniform() < 0.5) {
      const int max_len = std::min({4, kw - 1, n});
      if (max_len >= 2) {
        const int len = 2 + static_cast<int>(rng.UniformInt(max_len - 1));
        const int from = static_cast<int>(rng.UniformInt(kw - len + 1));
        const int at = static_cast<int>(rng.UniformInt(n - len + 1));
        std::copy_n(c.keyword.begin() + from, len, phones.begin() + at);
      }
    }
    if (!ContainsKeyword(phones, c.keyword)) return phones;
  }
}

void CheckRange(const Range &r, bool positive, const std::string &what) {
  Require(std::isfinite(r.low) && std::isfinite(r.high) && r.low <= r.high &&
              (!positive || r.low > 0.0),
          ErrorKind::kInvalidArgument, "corpus: invalid range for " + what);
}

}  // namespace

PhoneSet PhoneSet::Default() {
  PhoneSet set;
  set.phones = {{"ah", 666, 1186}, {"l", 398, 995},   {"eh", 525, 1894}, {"k", 282, 2500},
                {"s", 822, 4157},  {"m", 282, 1186},  {"n", 398, 1633},  {"iy", 398, 2853},
                {"uw", 525, 995},  {"ow", 666, 1633}, {"t", 822, 3244},  {"r", 525, 1399}};
  return set;
}

int PhoneSet::Index(std::string_view symbol) const {
  for (std::size_t i = 0; i < phones.size(); ++i) {
    if (phones[i].symbol == symbol) return static_cast<int>(i);
  }
  return -1;
}

std::vector<std::string> PhoneSet::Symbols() const {
  std::vector<std::string> out;
  for (const Phone &p : phones) out.push_back(p.symbol);
  return out;
}

void PhoneSet::Validate(int sample_rate) const {
  Require(!phones.empty(), ErrorKind::kInvalidArgument, "phone set is empty");
  const double nyquist = sample_rate / 2.0;
  for (std::size_t i = 0; i < phones.size(); ++i) {
    const Phone &p = phones[i];
    Require(!p.symbol.empty() && p.symbol != kSilencePhone, ErrorKind::kInvalidArgument,
            "invalid phone symbol '" + p.symbol + "'");
    Require(p.f1 > 0.0 && p.f1 < nyquist && p.f2 > 0.0 && p.f2 < nyquist,
            ErrorKind::kInvalidArgument, "phone '" + p.symbol + "' frequency outside (0, Nyquist)");
    for (std::size_t j = 0; j < i; ++j) {
      Require(phones[j].symbol != p.symbol, ErrorKind::kInvalidArgument,
              "duplicate phone '" + p.symbol + "'");
      Require(phones[j].f1 != p.f1 || phones[j].f2 != p.f2, ErrorKind::kInvalidArgument,
              "phones '" + phones[j].symbol + "' and '" + p.symbol + "' share a signature");
    }
  }
}

void CorpusConfig::Validate() const {
  phone_set.Validate(sample_rate);
  Require(!keyword.empty(), ErrorKind::kInvalidArgument, "keyword has no phones");
  for (const std::string &p : keyword) {
    Require(phone_set.Index(p) >= 0, ErrorKind::kInvalidArgument,
            "keyword phone '" + p + "' is not in the phone set");
  }
  for (int n :
       {train_positive, train_negative, dev_positive, dev_negative, test_positive, test_negative}) {
    Require(n >= 1, ErrorKind::kInvalidArgument, "corpus: every split count must be >= 1");
  }
  CheckRange(phone_ms, true, "phone_ms");
  CheckRange(silence_ms, true, "silence_ms");
  CheckRange(negative_phones, true, "negative_phones");
  CheckRange(tone_amplitude, true, "tone_amplitude");
  CheckRange(utterance_gain, true, "utterance_gain");
  Require(max_fillers >= 0, ErrorKind::kInvalidArgument, "corpus: max_fillers must be >= 0");
  Require(
      frequency_jitter >= 0.0 && frequency_jitter < 0.5 && noise_level >= 0.0 && sample_rate > 0,
      ErrorKind::kInvalidArgument, "corpus: invalid jitter, noise level or sample rate");
}

int NumAuxClasses(const PhoneSet &phones) { return static_cast<int>(phones.size()) + 1; }
int SilenceClass(const PhoneSet &phones) { return static_cast<int>(phones.size()); }

bool ContainsKeyword(std::span<const std::string> phones, std::span<const std::string> keyword) {
  if (keyword.empty()) return true;
  return std::search(phones.begin(), phones.end(), keyword.begin(), keyword.end()) != phones.end();
}

Utterance RenderUtterance(const CorpusConfig &config, const std::string &id, bool keyword) {
  Rng rng(UtteranceSeed(DeriveSeed(config.seed, "corpus"), id));
  const int rate = config.sample_rate;

  std::vector<std::string> body =
      keyword ? PositivePhones(config, rng) : NegativePhones(config, rng);
  ManifestEntry entry;
  entry.id = id;
  entry.keyword = keyword;
  entry.phones.push_back(kSilencePhone);
  entry.phones.insert(entry.phones.end(), body.begin(), body.end());
  entry.phones.push_back(kSilencePhone);
  if (keyword) {
    auto it = std::search(entry.phones.begin(), entry.phones.end(), config.keyword.begin(),
                          config.keyword.end());
    entry.keyword_start = static_cast<int>(it - entry.phones.begin());
  }

  const double jitter = 1.0 + rng.Uniform(-config.frequency_jitter, config.frequency_jitter);
  const double gain = rng.Uniform(config.utterance_gain.low, config.utterance_gain.high);
  const std::size_t fade = MsToSamples(kFadeSeconds * 1000.0, rate);
  std::vector<double> samples;
  for (const std::string &symbol : entry.phones) {
    const bool silence = symbol == kSilencePhone;
    const Range &dur = silence ? config.silence_ms : config.phone_ms;
    const std::size_t length =
        std::max<std::size_t>(1, MsToSamples(rng.Uniform(dur.low, dur.high), rate));
    const std::size_t begin = samples.size();
    samples.resize(begin + length, 0.0);
    if (!silence) {
      const Phone &p = config.phone_set.phones[config.phone_set.Index(symbol)];
      const double a1 = rng.Uniform(config.tone_amplitude.low, config.tone_amplitude.high);
      const double a2 = rng.Uniform(config.tone_amplitude.low, config.tone_amplitude.high);
      const double ph1 = rng.Uniform(0.0, kTwoPi), ph2 = rng.Uniform(0.0, kTwoPi);
      const double w1 = kTwoPi * p.f1 * jitter / rate, w2 = kTwoPi * p.f2 * jitter / rate;
      for (std::size_t n = 0; n < length; ++n) {
        const double v = a1 * std::sin(w1 * n + ph1) + a2 * std::sin(w2 * n + ph2);
        samples[begin + n] = gain * EdgeGain(n, length, fade) * v;
      }
    }
    entry.phone_ends.push_back(samples.size());
  }
  for (double &s : samples) s += config.noise_level * rng.Uniform(-1.0, 1.0);
  double peak = 0.0;
  for (double s : samples) peak = std::max(peak, std::abs(s));
  if (peak > kMaxPeak) {
    for (double &s : samples) s *= kMaxPeak / peak;
  }
  entry.wav = "wav/" + id + ".wav";
  return {std::move(entry), AudioBuffer(std::move(samples), rate)};
}

std::vector<Utterance> GenerateCorpus(const CorpusConfig &config) {
  config.Validate();
  std::vector<std::pair<std::string, bool>> ids;
  for (int i = 1; i <= config.TotalNegative(); ++i) ids.emplace_back(NumberedId("neg", i), false);
  for (int i = 1; i <= config.TotalPositive(); ++i) ids.emplace_back(NumberedId("pos", i), true);

  std::vector<Utterance> out(ids.size());
  const auto n = static_cast<std::ptrdiff_t>(ids.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t i = 0; i < n; ++i)
    out[i] = RenderUtterance(config, ids[i].first, ids[i].second);

  // Each class is partitioned with its own per-split counts.
  std::vector<ManifestEntry> pos, neg;
  for (const Utterance &u : out) (u.entry.keyword ? pos : neg).push_back(u.entry);
  auto assign = [&](std::vector<ManifestEntry> &cls, std::array<int, 3> counts) {
    const double total = counts[0] + counts[1] + counts[2];
    return SplitManifest(std::move(cls), {counts[0] / total, counts[1] / total, counts[2] / total},
                         DeriveSeed(config.seed, "split"));
  };
  std::vector<ManifestEntry> split =
      assign(pos, {config.train_positive, config.dev_positive, config.test_positive});
  for (ManifestEntry &e :
       assign(neg, {config.train_negative, config.dev_negative, config.test_negative})) {
    split.push_back(std::move(e));
  }
  std::sort(split.begin(), split.end(),
            [](const ManifestEntry &a, const ManifestEntry &b) { return a.id < b.id; });
  std::sort(out.begin(), out.end(),
            [](const Utterance &a, const Utterance &b) { return a.entry.id < b.entry.id; });
  for (std::size_t i = 0; i < out.size(); ++i) out[i].entry.split = split[i].split;
  return out;
}

void WriteCorpus(const std::vector<Utterance> &corpus, const std::filesystem::path &dir) {
  std::filesystem::create_directories(dir / "wav");
  const auto n = static_cast<std::ptrdiff_t>(corpus.size());
  std::vector<std::string> errors(corpus.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      SaveWav(corpus[i].audio, dir / corpus[i].entry.wav);
    } catch (const std::exception &e) {
      errors[i] = e.what();
    }
  }
  for (const std::string &e : errors) {
    if (!e.empty()) Fail(ErrorKind::kIo, e);
  }
  for (Split s : {Split::kTrain, Split::kDev, Split::kTest}) {
    std::vector<ManifestEntry> part;
    for (const Utterance &u : corpus) {
      if (u.entry.split == s) part.push_back(u.entry);
    }
    WriteManifest(std::move(part), dir / (SplitName(s) + ".jsonl"));
  }
}

std::vector<ManifestEntry> SplitManifest(std::vector<ManifestEntry> entries,
                                         std::array<double, 3> ratios, std::uint64_t seed) {
  double sum = 0.0;
  for (double r : ratios) {
    Require(std::isfinite(r) && r >= 0.0, ErrorKind::kInvalidArgument,
            "split ratios must be non-negative");
    sum += r;
  }
  Require(std::abs(sum - 1.0) <= 1e-9, ErrorKind::kInvalidArgument, "split ratios must sum to 1");
  std::sort(entries.begin(), entries.end(),
            [](const ManifestEntry &a, const ManifestEntry &b) { return a.id < b.id; });

  std::vector<ManifestEntry *> classes[2];
  for (ManifestEntry &e : entries) classes[e.keyword ? 1 : 0].push_back(&e);
  Rng rng(seed);
  for (auto &cls : classes) {
    for (std::size_t i = cls.size(); i > 1; --i) std::swap(cls[i - 1], cls[rng.UniformInt(i)]);
  }
  // Interleave the shuffled classes in proportion so every contiguous cut
  // keeps the global balance to within one utterance.
  std::vector<ManifestEntry *> order;
  std::size_t taken[2] = {0, 0};
  while (order.size() < entries.size()) {
    int pick = -1;
    double best = 0.0;
    for (int c = 0; c < 2; ++c) {
      if (taken[c] == classes[c].size()) continue;
      const double pos =
          (static_cast<double>(taken[c]) + 0.5) / static_cast<double>(classes[c].size());
      if (pick < 0 || pos < best) {
        pick = c;
        best = pos;
      }
    }
    order.push_back(classes[pick][taken[pick]++]);
  }

  // Largest remainder; ties go to the earlier split.
  const double n = static_cast<double>(order.size());
  std::array<std::size_t, 3> totals{};
  std::array<double, 3> rem{};
  std::size_t used = 0;
  for (int s = 0; s < 3; ++s) {
    const double exact = ratios[s] * n;
    totals[s] = static_cast<std::size_t>(std::floor(exact + 1e-9));
    rem[s] = exact - totals[s];
    used += totals[s];
  }
  while (used < order.size()) {
    int best = -1;
    for (int s = 0; s < 3; ++s) {
      if (ratios[s] > 0.0 && (best < 0 || rem[s] > rem[best])) best = s;
    }
    ++totals[best];
    rem[best] = -1.0;
    ++used;
  }
  std::size_t at = 0;
  for (int s = 0; s < 3; ++s) {
    for (std::size_t k = 0; k < totals[s]; ++k) order[at++]->split = static_cast<Split>(s);
  }
  for (int s = 0; s < 3; ++s) {
    Require(totals[s] > 0, ErrorKind::kInvalidArgument,
            "split would leave the " + SplitName(static_cast<Split>(s)) + " partition empty");
  }
  return entries;
}

void InterferenceConfig::Validate() const {
  Require(!name.empty(), ErrorKind::kInvalidArgument, "interference set needs a name");
  Require(kind == "music" || kind == "movie", ErrorKind::kInvalidArgument,
          "interference kind must be music or movie, got '" + kind + "'");
  Require(total_seconds >= 1.0, ErrorKind::kInvalidArgument,
          "interference total_seconds must be >= 1");
  Require(clip_seconds >= 1.0 && sample_rate > 0, ErrorKind::kInvalidArgument,
          "interference clip_seconds must be >= 1");
}

AudioBuffer RenderChord(double f0, std::size_t length, double amplitude, Rng &rng,
                        int sample_rate) {
  static constexpr double kHarmonicGain[3] = {1.0, 0.6, 0.4};
  std::vector<double> out(length, 0.0);
  const std::size_t ramp = MsToSamples(10.0, sample_rate);
  for (int h = 0; h < 3; ++h) {
    const double w = kTwoPi * f0 * (h + 1) / sample_rate;
    const double phase = rng.Uniform(0.0, kTwoPi);
    for (std::size_t n = 0; n < length; ++n) {
      out[n] += amplitude * kHarmonicGain[h] * std::sin(w * n + phase);
    }
  }
  for (std::size_t n = 0; n < length; ++n) out[n] *= EdgeGain(n, length, ramp);
  return AudioBuffer(std::move(out), sample_rate);
}

namespace {

std::vector<double> MusicClip(std::size_t length, int rate, Rng &rng) {
  std::vector<double> out;
  out.reserve(length);
  while (out.size() < length) {
    const int midi = 45 + static_cast<int>(rng.UniformInt(25));
    const double f0 = 440.0 * std::pow(2.0, (midi - 69) / 12.0);
    const std::size_t dur = MsToSamples(rng.Uniform(500.0, 2000.0), rate);
    const double amp = rng.Uniform(0.1, 0.25);
    AudioBuffer note = RenderChord(f0, std::min(dur, length - out.size()), amp, rng, rate);
    out.insert(out.end(), note.samples().begin(), note.samples().end());
  }
  return out;
}

// White noise through an RBJ low-pass biquad, then a tone; repeated.
std::vector<double> MovieClip(std::size_t length, int rate, Rng &rng) {
  std::vector<double> out;
  out.reserve(length);
  bool noise = true;
  while (out.size() < length) {
    const std::size_t dur = std::min(
        length - out.size(),
        MsToSamples(noise ? rng.Uniform(300.0, 1500.0) : rng.Uniform(200.0, 1000.0), rate));
    std::vector<double> seg(dur);
    if (noise) {
      const double fc = rng.Uniform(400.0, 1500.0);
      const double w0 = kTwoPi * fc / rate,
                   alpha = std::sin(w0) / (2.0 * std::numbers::sqrt2 / 2.0);
      const double c = std::cos(w0), a0 = 1.0 + alpha;
      const double b0 = (1.0 - c) / 2.0 / a0, b1 = (1.0 - c) / a0, b2 = b0;
      const double a1 = -2.0 * c / a0, a2 = (1.0 - alpha) / a0;
      double x1 = 0, x2 = 0, y1 = 0, y2 = 0;
      const double level = rng.Uniform(0.2, 0.5);
      for (double &v : seg) {
        const double x = level * rng.Normal();
        const double y = b0 * x + b1 * x1 + b2 * x2 - a1 * y1 - a2 * y2;
        x2 = x1, x1 = x, y2 = y1, y1 = y;
        v = y;
      }
    } else {
      const double f = rng.Uniform(200.0, 3000.0);
      const double amp = rng.Uniform(0.05, 0.2);
      const double phase = rng.Uniform(0.0, kTwoPi);
      for (std::size_t n = 0; n < dur; ++n) seg[n] = amp * std::sin(kTwoPi * f * n / rate + phase);
    }
    const std::size_t ramp = MsToSamples(10.0, rate);
    for (std::size_t n = 0; n < dur; ++n) seg[n] *= EdgeGain(n, dur, ramp);
    out.insert(out.end(), seg.begin(), seg.end());
    noise = !noise;
  }
  return out;
}

}  // namespace

std::vector<std::pair<InterferenceEntry, AudioBuffer>> GenerateInterference(
    const InterferenceConfig &config, std::uint64_t seed) {
  config.Validate();
  const int clips = static_cast<int>(std::ceil(config.total_seconds / config.clip_seconds - 1e-9));
  const double seconds = config.total_seconds / clips;
  const std::size_t length = MsToSamples(seconds * 1000.0, config.sample_rate);
  std::vector<std::pair<InterferenceEntry, AudioBuffer>> out(clips);
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < clips; ++i) {
    char id[64];
    std::snprintf(id, sizeof(id), "%s-%03d", config.name.c_str(), i);
    Rng rng(DeriveSeed(seed, id));
    std::vector<double> samples = config.kind == "music"
                                      ? MusicClip(length, config.sample_rate, rng)
                                      : MovieClip(length, config.sample_rate, rng);
    double peak = 0.0;
    for (double s : samples) peak = std::max(peak, std::abs(s));
    if (peak > kMaxPeak) {
      for (double &s : samples) s *= kMaxPeak / peak;
    }
    InterferenceEntry entry{id, std::string("wav/") + id + ".wav", config.kind,
                            static_cast<double>(length) / config.sample_rate};
    out[i] = {std::move(entry), AudioBuffer(std::move(samples), config.sample_rate)};
  }
  return out;
}

void WriteInterference(const std::vector<std::pair<InterferenceEntry, AudioBuffer>> &clips,
                       const std::filesystem::path &dir) {
  std::filesystem::create_directories(dir / "wav");
  std::vector<InterferenceEntry> entries;
  for (const auto &[entry, audio] : clips) {
    SaveWav(audio, dir / entry.wav);
    entries.push_back(entry);
  }
  WriteInterferenceManifest(std::move(entries), dir / "manifest.jsonl");
}

namespace {

// Segment index for every frame, by the frame's center sample.
std::vector<std::size_t> FrameSegments(const ManifestEntry &entry, std::size_t num_frames,
                                       const FeatureConfig &features) {
  Require(!entry.phone_ends.empty() && entry.phone_ends.size() == entry.phones.size(),
          ErrorKind::kInvalidArgument, "utterance '" + entry.id + "' has no segment boundaries");
  std::vector<std::size_t> seg(num_frames);
  for (std::size_t t = 0; t < num_frames; ++t) {
    const std::size_t c = FrameCenter(t, features);
    const auto it = std::upper_bound(entry.phone_ends.begin(), entry.phone_ends.end(), c);
    seg[t] = it == entry.phone_ends.end() ? entry.phone_ends.size() - 1
                                          : static_cast<std::size_t>(it - entry.phone_ends.begin());
  }
  return seg;
}

int AuxClassOf(const std::string &symbol, const PhoneSet &phones, const std::string &id) {
  if (symbol == kSilencePhone) return SilenceClass(phones);
  const int i = phones.Index(symbol);
  Require(i >= 0, ErrorKind::kInvalidArgument,
          "utterance '" + id + "' uses unknown phone '" + symbol + "'");
  return i;
}

// Chain positions of each segment: [first, first + count).
struct SegmentPositions {
  std::vector<std::size_t> first;
  std::vector<std::size_t> count;
};

SegmentPositions PositionsOf(const ManifestEntry &entry, std::size_t keyword_length,
                             int states_per_phone) {
  SegmentPositions out;
  std::size_t at = 0;
  for (std::size_t s = 0; s < entry.phones.size(); ++s) {
    const bool kw = entry.keyword_start >= 0 &&
                    s >= static_cast<std::size_t>(entry.keyword_start) &&
                    s < entry.keyword_start + keyword_length;
    out.first.push_back(at);
    out.count.push_back(kw ? states_per_phone : 1);
    at += out.count.back();
  }
  return out;
}

}  // namespace

std::vector<ChainPosition> GroundTruthChain(const ManifestEntry &entry,
                                            std::span<const std::string> keyword,
                                            const PhoneSet &phones, int states_per_phone) {
  Require(states_per_phone >= 1, ErrorKind::kInvalidArgument, "states_per_phone must be >= 1");
  if (entry.keyword_start >= 0) {
    const std::size_t ks = static_cast<std::size_t>(entry.keyword_start);
    Require(ks + keyword.size() <= entry.phones.size() &&
                std::equal(keyword.begin(), keyword.end(), entry.phones.begin() + ks),
            ErrorKind::kInvalidArgument,
            "utterance '" + entry.id + "' does not hold the keyword at keyword_start");
  }
  const SegmentPositions pos = PositionsOf(entry, keyword.size(), states_per_phone);
  std::vector<ChainPosition> chain;
  for (std::size_t s = 0; s < entry.phones.size(); ++s) {
    const int aux = AuxClassOf(entry.phones[s], phones, entry.id);
    if (pos.count[s] == 1 &&
        !(entry.keyword_start >= 0 && s >= static_cast<std::size_t>(entry.keyword_start) &&
          s < entry.keyword_start + keyword.size())) {
      const int bg = entry.phones[s] == kSilencePhone ? kBackgroundNonspeech : kBackgroundSpeech;
      chain.push_back({bg, aux});
      continue;
    }
    const int phone_pos = static_cast<int>(s) - entry.keyword_start;
    for (std::size_t k = 0; k < pos.count[s]; ++k) {
      chain.push_back(
          {kFirstKeywordState + phone_pos * states_per_phone + static_cast<int>(k), aux});
    }
  }
  return chain;
}

FrameTargets ConstructionTargets(const ManifestEntry &entry, std::span<const std::string> keyword,
                                 std::size_t num_frames, const FeatureConfig &features,
                                 const PhoneSet &phones, int states_per_phone) {
  const std::vector<ChainPosition> chain =
      GroundTruthChain(entry, keyword, phones, states_per_phone);
  const SegmentPositions pos = PositionsOf(entry, keyword.size(), states_per_phone);
  const std::vector<std::size_t> seg = FrameSegments(entry, num_frames, features);
  FrameTargets out;
  out.keyword.resize(num_frames);
  out.aux.resize(num_frames);
  for (std::size_t t = 0; t < num_frames; ++t) {
    const std::size_t s = seg[t];
    std::size_t k = 0;
    if (pos.count[s] > 1) {
      const std::size_t begin = s == 0 ? 0 : entry.phone_ends[s - 1];
      const std::size_t len = entry.phone_ends[s] - begin;
      const std::size_t c = std::clamp(FrameCenter(t, features), begin, entry.phone_ends[s] - 1);
      k = std::min(pos.count[s] - 1, (c - begin) * pos.count[s] / len);
    }
    out.keyword[t] = chain[pos.first[s] + k].keyword_state;
    out.aux[t] = chain[pos.first[s] + k].aux_class;
  }
  return out;
}

FrameTargets AlignTargets(const ManifestEntry &entry, std::span<const std::string> keyword,
                          const Posteriors &posteriors, std::span<const double> priors,
                          const PhoneSet &phones, const HmmTopology &topology) {
  const std::vector<ChainPosition> chain =
      GroundTruthChain(entry, keyword, phones, topology.states_per_phone);
  const Matrix kw = ScaledLogLikelihoods(posteriors.keyword, priors);
  const std::size_t frames = kw.rows();
  Require(posteriors.aux.rows() == frames, ErrorKind::kDimensionMismatch,
          "keyword and aux posteriors disagree on frame count");
  Matrix scores(frames, chain.size());
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t k = 0; k < chain.size(); ++k) {
      Require(static_cast<std::size_t>(chain[k].keyword_state) < kw.cols() &&
                  static_cast<std::size_t>(chain[k].aux_class) < posteriors.aux.cols(),
              ErrorKind::kDimensionMismatch, "model outputs do not cover the alignment chain");
      scores(t, k) = kw(t, chain[k].keyword_state) +
                     std::log(std::max(posteriors.aux(t, chain[k].aux_class), 1e-30));
    }
  }
  std::vector<int> columns(chain.size());
  for (std::size_t k = 0; k < chain.size(); ++k) columns[k] = static_cast<int>(k);
  const Alignment a = ForcedAlign(columns, scores, topology);
  FrameTargets out;
  for (int p : a.positions) {
    out.keyword.push_back(chain[p].keyword_state);
    out.aux.push_back(chain[p].aux_class);
  }
  return out;
}

}  // namespace kws
