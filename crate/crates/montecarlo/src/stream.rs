//! Per-slot photon-number draws for each source kind.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric, Poisson};

use demonlab_core::{make_source, SourceSpec, DEFAULT_CUTOFF};

use crate::config::StreamModel;
use crate::error::{McError, Result};

/// Slots per independently seeded chunk.
pub const CHUNK_SLOTS: u64 = 1 << 16;

/// SplitMix64 finalizer, used to derive independent seeds from one master seed.
pub fn derive_seed(master: u64, tag: u64) -> u64 {
    let mut z = master ^ tag.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Generator for one chunk of a run: stream `chunk` of the run's seed.
pub fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

const FIELD_TAG: u64 = 0x4649_454c_44;

/// Complex Gaussian field with a Gaussian kernel. Its noise is addressed by
/// slot index, so any slot range can be generated on its own.
#[derive(Debug, Clone)]
pub struct GaussianField {
    kernel: Vec<f64>,
    seed: u64,
}

impl GaussianField {
    pub fn new(tau_c: f64, seed: u64) -> Self {
        // |γ(τ)|² = exp(−π τ²/τ_c²) needs h_k ∝ exp(−π k²/τ_c²)
        let half = (2.0 * tau_c).ceil() as i64;
        let raw: Vec<f64> = (-half..=half)
            .map(|k| (-std::f64::consts::PI * (k * k) as f64 / (tau_c * tau_c)).exp())
            .collect();
        let norm = raw.iter().map(|h| h * h).sum::<f64>().sqrt();
        Self {
            kernel: raw.into_iter().map(|h| h / norm).collect(),
            seed: derive_seed(seed, FIELD_TAG),
        }
    }

    /// `|E_t|²` for `t` in `start..start + len`, with unit mean.
    pub fn intensities(&self, arm: u64, start: u64, len: usize) -> Vec<f64> {
        let width = self.kernel.len();
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(arm);
        // each noise sample consumes two u64 words (four 32-bit words)
        rng.set_word_pos(4 * start as u128);
        let noise: Vec<(f64, f64)> = (0..len + width - 1)
            .map(|_| {
                let u = 1.0 - (rng.next_u64() >> 11) as f64 * f64::EPSILON / 2.0;
                let phase = (rng.next_u64() >> 11) as f64 * f64::EPSILON / 2.0 * std::f64::consts::TAU;
                let amp = (-u.ln()).sqrt();
                (amp * phase.cos(), amp * phase.sin())
            })
            .collect();
        (0..len)
            .map(|t| {
                let (re, im) = self
                    .kernel
                    .iter()
                    .zip(&noise[t..t + width])
                    .fold((0.0, 0.0), |(re, im), (h, z)| (re + h * z.0, im + h * z.1));
                re * re + im * im
            })
            .collect()
    }
}

/// Draws `(In_A, In_B)` photon numbers slot by slot.
#[derive(Debug, Clone)]
pub enum SourceSampler {
    Uncorrelated { nbar: f64, geo: Geometric },
    /// One beam of mean `2 n̄` divided photon by photon.
    Split { nbar: f64, geo: Geometric },
    /// Categorical over the truncated pair state, vacuum included.
    Table { cumulative: Vec<(f64, (u32, u32))> },
}

fn geometric(mean: f64) -> Result<Geometric> {
    Geometric::new(1.0 / (1.0 + mean)).map_err(|e| McError::Config(e.to_string()))
}

fn poisson<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> u32 {
    if lambda <= 0.0 {
        return 0;
    }
    Poisson::new(lambda)
        .map(|p| p.sample(rng) as u32)
        .unwrap_or(0)
}

impl SourceSampler {
    pub fn new(spec: &SourceSpec<f64>) -> Result<Self> {
        Ok(match *spec {
            SourceSpec::Uncorrelated { nbar } => Self::Uncorrelated {
                nbar: nbar.value(),
                geo: geometric(nbar.value())?,
            },
            SourceSpec::SplitThermal { nbar } => Self::Split {
                nbar: nbar.value(),
                geo: geometric(2.0 * nbar.value())?,
            },
            _ => {
                // the experiment never post-selects at the source
                let dist = make_source(&spec.with_drop_vacuum(false), DEFAULT_CUTOFF)?;
                let mut acc = 0.0;
                let cumulative = dist
                    .iter()
                    .map(|(t, p)| {
                        acc += p;
                        (acc, (t[0], t[1]))
                    })
                    .collect();
                Self::Table { cumulative }
            }
        })
    }

    /// One i.i.d. slot.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> (u32, u32) {
        match self {
            Self::Uncorrelated { geo, .. } => (geo.sample(rng) as u32, geo.sample(rng) as u32),
            Self::Split { geo, .. } => {
                let total = geo.sample(rng) as u32;
                let a = (0..total).filter(|_| rng.random::<bool>()).count() as u32;
                (a, total - a)
            }
            Self::Table { cumulative } => {
                let u: f64 = rng.random();
                cumulative
                    .iter()
                    .find(|(c, _)| u < *c)
                    .or(cumulative.last())
                    .map(|(_, t)| *t)
                    .unwrap_or((0, 0))
            }
        }
    }

    /// A slot given the field intensities of the two arms (thermal kinds).
    pub fn draw_modulated<R: Rng + ?Sized>(&self, ia: f64, ib: f64, rng: &mut R) -> (u32, u32) {
        match self {
            Self::Uncorrelated { nbar, .. } => (poisson(nbar * ia, rng), poisson(nbar * ib, rng)),
            // both halves of a split beam share its field
            Self::Split { nbar, .. } => (poisson(nbar * ia, rng), poisson(nbar * ia, rng)),
            Self::Table { .. } => self.draw(rng),
        }
    }
}

/// Per-chunk slot generator covering both stream models.
pub struct SlotSource<'a> {
    sampler: &'a SourceSampler,
    fields: Option<(Vec<f64>, Vec<f64>)>,
}

impl<'a> SlotSource<'a> {
    pub fn new(
        sampler: &'a SourceSampler,
        model: StreamModel,
        seed: u64,
        start: u64,
        len: usize,
    ) -> Self {
        let fields = match model {
            StreamModel::Iid => None,
            StreamModel::GaussianMemory { tau_c } => {
                let field = GaussianField::new(tau_c, seed);
                Some((field.intensities(0, start, len), field.intensities(1, start, len)))
            }
        };
        Self { sampler, fields }
    }

    /// Photon numbers of slot `i` within the chunk.
    pub fn draw<R: Rng + ?Sized>(&self, i: usize, rng: &mut R) -> (u32, u32) {
        match &self.fields {
            None => self.sampler.draw(rng),
            Some((a, b)) => self.sampler.draw_modulated(a[i], b[i], rng),
        }
    }
}
