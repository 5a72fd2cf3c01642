use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use demonlab_core::protocol::Policy;
use demonlab_core::{ClickPattern, SwitchState};

use crate::config::{RunConfig, RunMode};
use crate::error::{McError, Result};
use crate::stream::{chunk_rng, derive_seed, SlotSource, SourceSampler, CHUNK_SLOTS};

/// One slot: what the source emitted and where the photons went before the switch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StreamSample {
    pub in_a: u32,
    pub in_b: u32,
    /// Photons surviving the coupling loss, per arm.
    pub coupled_a: u32,
    pub coupled_b: u32,
    /// Photons reflected to the demon detectors.
    pub dem_a: u32,
    pub dem_b: u32,
    /// Photons left in the arms after trim, loss and tap.
    pub arm_a: u32,
    pub arm_b: u32,
}

impl StreamSample {
    pub fn clicks(&self) -> ClickPattern {
        ClickPattern::from_counts(self.dem_a, self.dem_b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub mode: RunMode,
    pub slots: u64,
    /// Slots with a click at `D_A` / `D_B`.
    pub n_a: u64,
    pub n_b: u64,
    /// Slots with clicks at both output detectors.
    pub coincidences: u64,
    /// `(n_a + n_b) / (2 (1 − r²))`: per-arm singles corrected for the tap.
    pub n_in_est: f64,
    pub delta_n: i64,
    pub stderr_delta_n: f64,
    /// Demon clicks ignored because the switch was held.
    pub lost_to_dead_window: u64,
    /// Ground truth: photons that survived coupling loss in arm A / B.
    pub photons_in_a: u64,
    pub photons_in_b: u64,
    /// Ground truth: slots where at least two photons survived coupling loss.
    pub surviving_pairs: u64,
    /// Demon click patterns, indexed like [`ClickPattern::ALL`].
    pub demon_patterns: [u64; 4],
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Tally {
    n_a: u64,
    n_b: u64,
    coincidences: u64,
    lost: u64,
    photons_a: u64,
    photons_b: u64,
    pairs: u64,
    patterns: [u64; 4],
}

impl Tally {
    fn merge(self, o: Self) -> Result<Self> {
        let add = |a: u64, b: u64| a.checked_add(b).ok_or(McError::Overflow);
        let mut patterns = [0; 4];
        for i in 0..4 {
            patterns[i] = add(self.patterns[i], o.patterns[i])?;
        }
        Ok(Self {
            n_a: add(self.n_a, o.n_a)?,
            n_b: add(self.n_b, o.n_b)?,
            coincidences: add(self.coincidences, o.coincidences)?,
            lost: add(self.lost, o.lost)?,
            photons_a: add(self.photons_a, o.photons_a)?,
            photons_b: add(self.photons_b, o.photons_b)?,
            pairs: add(self.pairs, o.pairs)?,
            patterns,
        })
    }
}

/// Switch hold carried across slots by the dead window.
#[derive(Debug, Clone, Copy)]
struct Hold {
    remaining: u32,
    state: SwitchState,
}

const NO_HOLD: Hold = Hold { remaining: 0, state: SwitchState::Bar };

fn pattern_slot(p: ClickPattern) -> usize {
    ClickPattern::ALL.iter().position(|q| *q == p).unwrap_or(0)
}

fn mode_tag(mode: RunMode) -> u64 {
    match mode {
        RunMode::Bar => 1,
        RunMode::Cross => 2,
        RunMode::FeedForward => 3,
    }
}

/// Per-arm thresholds for the single uniform each photon draws.
#[derive(Debug, Clone, Copy)]
struct Arm {
    coupled: f64,
    survive: f64,
    reflect: f64,
}

impl Arm {
    fn route<R: Rng + ?Sized>(&self, n: u32, rng: &mut R) -> (u32, u32, u32) {
        let (mut coupled, mut dem, mut arm) = (0, 0, 0);
        for _ in 0..n {
            let u: f64 = rng.random();
            coupled += (u < self.coupled) as u32;
            if u < self.reflect {
                dem += 1;
            } else if u < self.survive {
                arm += 1;
            }
        }
        (coupled, dem, arm)
    }
}

struct Engine<'a> {
    cfg: &'a RunConfig,
    sampler: SourceSampler,
    arms: [Arm; 2],
    policy: Policy,
    seed: u64,
}

impl<'a> Engine<'a> {
    fn new(cfg: &'a RunConfig) -> Result<Self> {
        cfg.validate()?;
        let eps2 = cfg.eps2.value();
        let r2 = cfg.r.reflectivity();
        let arm = |trim: f64, transmission: f64| {
            let survive = eps2 * trim * transmission;
            Arm { coupled: eps2, survive, reflect: survive * r2 }
        };
        Ok(Self {
            cfg,
            sampler: SourceSampler::new(&cfg.spec)?,
            arms: [
                arm(cfg.arm_trim.0, cfg.arm_transmission.0),
                arm(cfg.arm_trim.1, cfg.arm_transmission.1),
            ],
            policy: cfg.effective_policy(),
            seed: derive_seed(cfg.seed, mode_tag(cfg.mode)),
        })
    }

    fn chunks(&self) -> u64 {
        self.cfg.slots.div_ceil(CHUNK_SLOTS)
    }

    fn chunk_len(&self, chunk: u64) -> usize {
        (self.cfg.slots - chunk * CHUNK_SLOTS).min(CHUNK_SLOTS) as usize
    }

    fn sample<R: Rng + ?Sized>(&self, (in_a, in_b): (u32, u32), rng: &mut R) -> StreamSample {
        let (coupled_a, dem_a, arm_a) = self.arms[0].route(in_a, rng);
        let (coupled_b, dem_b, arm_b) = self.arms[1].route(in_b, rng);
        StreamSample { in_a, in_b, coupled_a, coupled_b, dem_a, dem_b, arm_a, arm_b }
    }

    /// Visits every slot of one chunk in order.
    fn for_each_slot(&self, chunk: u64, mut f: impl FnMut(StreamSample)) {
        let len = self.chunk_len(chunk);
        let mut rng = chunk_rng(self.seed, chunk);
        let slots = SlotSource::new(&self.sampler, self.cfg.stream, self.cfg.seed, chunk * CHUNK_SLOTS, len);
        for i in 0..len {
            let draw = slots.draw(i, &mut rng);
            f(self.sample(draw, &mut rng));
        }
    }

    fn run_chunk(&self, chunk: u64, mut hold: Hold) -> (Tally, Hold) {
        let window = self.cfg.dead_window_slots;
        let mut t = Tally::default();
        self.for_each_slot(chunk, |s| {
            let clicks = s.clicks();
            let fired = clicks.dem_a || clicks.dem_b;
            let state = match self.cfg.mode {
                RunMode::Bar => SwitchState::Bar,
                RunMode::Cross => SwitchState::Cross,
                RunMode::FeedForward if hold.remaining > 0 => {
                    hold.remaining -= 1;
                    t.lost += fired as u64;
                    hold.state
                }
                RunMode::FeedForward => {
                    let state = self.policy.switch_for(clicks);
                    if fired && window > 0 {
                        hold = Hold { remaining: window, state };
                    }
                    state
                }
            };
            let (to_a, to_b) = match state {
                SwitchState::Bar => (s.arm_a, s.arm_b),
                SwitchState::Cross => (s.arm_b, s.arm_a),
            };
            let (ca, cb) = (to_a > 0, to_b > 0);
            t.n_a += ca as u64;
            t.n_b += cb as u64;
            t.coincidences += (ca && cb) as u64;
            t.photons_a += s.coupled_a as u64;
            t.photons_b += s.coupled_b as u64;
            t.pairs += (s.coupled_a + s.coupled_b >= 2) as u64;
            t.patterns[pattern_slot(clicks)] += 1;
        });
        (t, hold)
    }

    fn tally(&self) -> Result<Tally> {
        if self.cfg.dead_window_slots == 0 {
            (0..self.chunks())
                .into_par_iter()
                .map(|c| Ok(self.run_chunk(c, NO_HOLD).0))
                .try_reduce(Tally::default, Tally::merge)
        } else {
            // the hold crosses chunk boundaries, so chunks run in order
            let mut hold = NO_HOLD;
            let mut total = Tally::default();
            for c in 0..self.chunks() {
                let (t, h) = self.run_chunk(c, hold);
                hold = h;
                total = total.merge(t)?;
            }
            Ok(total)
        }
    }
}

/// Simulates `config.slots` slots. Deterministic in `(config, seed)` and
/// independent of the thread count.
pub fn run(config: &RunConfig) -> Result<RunResult> {
    let engine = Engine::new(config)?;
    let t = engine.tally()?;
    let gamma = config.slots as f64;
    let (na, nb) = (t.n_a as f64, t.n_b as f64);
    let mean = (na - nb) / gamma;
    let differ = (na + nb - 2.0 * t.coincidences as f64) / gamma;
    let delta_n = i64::try_from(t.n_a)
        .ok()
        .zip(i64::try_from(t.n_b).ok())
        .map(|(a, b)| a - b)
        .ok_or(McError::Overflow)?;
    let transmission = 1.0 - config.r.reflectivity();
    Ok(RunResult {
        mode: config.mode,
        slots: config.slots,
        n_a: t.n_a,
        n_b: t.n_b,
        coincidences: t.coincidences,
        n_in_est: if transmission > 0.0 { (na + nb) / (2.0 * transmission) } else { 0.0 },
        delta_n,
        stderr_delta_n: (gamma * (differ - mean * mean)).max(0.0).sqrt(),
        lost_to_dead_window: t.lost,
        photons_in_a: t.photons_a,
        photons_in_b: t.photons_b,
        surviving_pairs: t.pairs,
        demon_patterns: t.patterns,
    })
}

/// The first `count` slots of the run's stream, before the switch acts.
pub fn sample_slots(config: &RunConfig, count: usize) -> Result<Vec<StreamSample>> {
    let engine = Engine::new(config)?;
    let count = count.min(usize::try_from(config.slots).unwrap_or(usize::MAX));
    let mut out = Vec::with_capacity(count);
    for c in 0..engine.chunks() {
        if out.len() >= count {
            break;
        }
        engine.for_each_slot(c, |s| {
            if out.len() < count {
                out.push(s)
            }
        });
    }
    Ok(out)
}
