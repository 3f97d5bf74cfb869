#include "dcvae/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "dcvae/error.hpp"
#include "dcvae/rng.hpp"

namespace dcvae {

namespace {

constexpr double kMaxTemplateCorrelation = 0.95;

void add_bump(std::span<double> lead, double centre, double width, double amplitude) {
  for (std::size_t t = 0; t < lead.size(); ++t) {
    const double u = (static_cast<double>(t) - centre) / width;
    lead[t] += amplitude * std::exp(-0.5 * u * u);
  }
}

// Segments sit on a ring (angle 2*pi*k/10). Per lead, the activation time
// and the deflection amplitude vary smoothly with the angle around a lead
// specific baseline, so neighbouring segments look alike and a subject time
// shift can mimic a segment change. Each lead is a main deflection plus an
// opposite-signed secondary lobe. Pacing sites render the same model at an
// angle offset from their segment centre.
constexpr double kTwoPi = 6.283185307179586;
constexpr double kSegmentArc = kTwoPi / static_cast<double>(kSegments);

struct RingModel {
  struct Lead {
    double timing_phase, amp_phase, timing_swing, centre, width, lag, base_amp;
  };
  std::array<Lead, kLeads> leads;
  // per segment and lead
  std::array<std::array<double, kLeads>, kSegments> timing_jitter, amp_jitter;
  std::array<double, kSegments> peak{};

  // offset in segment arcs
  std::vector<double> render(std::size_t k, double offset) const {
    std::vector<double> out(kSignalLength, 0.0);
    const double angle = kSegmentArc * (static_cast<double>(k) + offset);
    for (std::size_t l = 0; l < kLeads; ++l) {
      const Lead& p = leads[l];
      std::span<double> lead(out.data() + l * kTimeSamples, kTimeSamples);
      const double centre = p.centre + p.timing_swing * std::cos(angle - p.timing_phase) + timing_jitter[k][l];
      const double amp = p.base_amp + 0.3 * std::cos(angle - p.amp_phase) + amp_jitter[k][l];
      add_bump(lead, centre, p.width, amp);
      add_bump(lead, centre + p.lag, 0.7 * p.width, -0.45 * amp);
    }
    if (peak[k] > 0.0) {
      for (double& x : out) x /= peak[k];
    }
    return out;
  }
};

RingModel draw_ring(Rng& rng) {
  RingModel m;
  for (auto& l : m.leads) {
    l.timing_phase = uniform(rng, 0.0, kTwoPi);
    l.amp_phase = uniform(rng, 0.0, kTwoPi);
    l.timing_swing = uniform(rng, 4.0, 6.0);
    l.centre = uniform(rng, 42.0, 58.0);
    l.width = uniform(rng, 5.0, 9.0);
    l.lag = uniform(rng, 9.0, 16.0) * (std::bernoulli_distribution(0.5)(rng) ? 1.0 : -1.0);
    l.base_amp = uniform(rng, 0.6, 1.0) * (std::bernoulli_distribution(0.5)(rng) ? 1.0 : -1.0);
  }
  std::normal_distribution<double> timing(0.0, 1.0);
  std::normal_distribution<double> amp(0.0, 0.045);
  for (std::size_t k = 0; k < kSegments; ++k) {
    for (std::size_t l = 0; l < kLeads; ++l) {
      m.timing_jitter[k][l] = timing(rng);
      m.amp_jitter[k][l] = amp(rng);
    }
    double peak = 0.0;
    for (double x : m.render(k, 0.0)) peak = std::max(peak, std::abs(x));
    m.peak[k] = peak;
  }
  return m;
}

std::vector<std::vector<double>> centre_templates(const RingModel& m) {
  std::vector<std::vector<double>> t;
  for (std::size_t k = 0; k < kSegments; ++k) t.push_back(m.render(k, 0.0));
  return t;
}

double max_pairwise_correlation(const std::vector<std::vector<double>>& templates) {
  double worst = -1.0;
  for (std::size_t a = 0; a < templates.size(); ++a) {
    for (std::size_t b = a + 1; b < templates.size(); ++b) {
      worst = std::max(worst, correlation(templates[a], templates[b]));
    }
  }
  return worst;
}

void check_config(const SynthConfig& c) {
  if (c.n_subjects == 0 || c.sites_per_subject == 0 || c.beats_per_site == 0) {
    throw ConfigError("synthetic dataset sizes must be positive");
  }
  if (c.noise_std < 0.0) throw ConfigError("noise_std must be non-negative");
  if (c.site_spread < 0.0 || c.site_spread > 0.5) throw ConfigError("site_spread must lie in [0, 0.5]");
  if (c.amp_min > c.amp_max || c.shift_min > c.shift_max || c.baseline_min > c.baseline_max) {
    throw ConfigError("synthetic subject ranges must satisfy min <= max");
  }
}

}  // namespace

SubjectTransform SubjectTransform::identity() {
  SubjectTransform t;
  t.amplitude.fill(1.0);
  t.baseline.fill(0.0);
  return t;
}

double correlation(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.empty()) throw DimensionError("correlation needs equal, non-empty lengths");
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

namespace {

RingModel accepted_ring(std::uint64_t seed) {
  for (std::uint64_t attempt = 0;; ++attempt) {
    Rng rng(derive_seed(seed, Stream::synth, 0, attempt));
    RingModel m = draw_ring(rng);
    if (max_pairwise_correlation(centre_templates(m)) < kMaxTemplateCorrelation) return m;
  }
}

}  // namespace

std::vector<std::vector<double>> make_templates(std::uint64_t seed) { return centre_templates(accepted_ring(seed)); }

std::vector<double> site_template(std::uint64_t seed, int segment, double offset) {
  if (segment < 0 || segment >= static_cast<int>(kSegments)) throw ContractError("segment out of range");
  return accepted_ring(seed).render(static_cast<std::size_t>(segment), offset);
}

std::vector<double> apply_subject_transform(std::span<const double> tmpl, const SubjectTransform& transform) {
  if (tmpl.size() != kSignalLength) throw DimensionError("template must have 1200 values");
  std::vector<double> out(kSignalLength);
  const int n = static_cast<int>(kTimeSamples);
  for (std::size_t l = 0; l < kLeads; ++l) {
    for (int t = 0; t < n; ++t) {
      const int src = ((t - transform.shift) % n + n) % n;
      out[l * kTimeSamples + static_cast<std::size_t>(t)] =
          transform.amplitude[l] * tmpl[l * kTimeSamples + static_cast<std::size_t>(src)] + transform.baseline[l];
    }
  }
  return out;
}

SynthOutput generate(const SynthConfig& config) {
  check_config(config);
  SynthOutput out;
  const RingModel ring = accepted_ring(config.seed);
  out.templates = centre_templates(ring);

  for (std::size_t subject = 0; subject < config.n_subjects; ++subject) {
    Rng rng(derive_seed(config.seed, Stream::synth, 1, subject));
    SubjectTransform tr;
    for (auto& a : tr.amplitude) a = uniform(rng, config.amp_min, config.amp_max);
    tr.shift = std::uniform_int_distribution<int>(config.shift_min, config.shift_max)(rng);
    for (auto& b : tr.baseline) b = uniform(rng, config.baseline_min, config.baseline_max);
    out.subjects.push_back(tr);

    std::normal_distribution<double> noise(0.0, config.noise_std > 0.0 ? config.noise_std : 1.0);
    for (std::size_t site = 0; site < config.sites_per_subject; ++site) {
      const int segment = static_cast<int>(site % kSegments);
      const int site_id = static_cast<int>(subject * config.sites_per_subject + site);
      const double offset = config.site_spread > 0.0 ? uniform(rng, -config.site_spread, config.site_spread) : 0.0;
      const auto clean = apply_subject_transform(ring.render(static_cast<std::size_t>(segment), offset), tr);
      for (std::size_t beat = 0; beat < config.beats_per_site; ++beat) {
        BeatSample s;
        s.signal = clean;
        if (config.noise_std > 0.0) {
          for (double& x : s.signal) x += noise(rng);
        }
        s.segment = segment;
        s.patient_id = static_cast<int>(subject);
        s.site_id = site_id;
        out.dataset.samples.push_back(std::move(s));
        out.truth.push_back(GroundTruthRow{segment, static_cast<int>(subject), site_id, offset, tr});
      }
    }
  }
  return out;
}

void write_truth_csv(const std::vector<GroundTruthRow>& truth, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  char name[16];
  out << "patient_id,site_id,segment,site_offset,shift";
  for (std::size_t l = 0; l < kLeads; ++l) {
    std::snprintf(name, sizeof name, ",amp_%02zu", l);
    out << name;
  }
  for (std::size_t l = 0; l < kLeads; ++l) {
    std::snprintf(name, sizeof name, ",base_%02zu", l);
    out << name;
  }
  out << '\n';
  for (const auto& row : truth) {
    out << row.subject << ',' << row.site_id << ',' << row.segment << ',' << format_double(row.site_offset) << ','
        << row.transform.shift;
    for (double a : row.transform.amplitude) out << ',' << format_double(a);
    for (double b : row.transform.baseline) out << ',' << format_double(b);
    out << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace dcvae
