//! Oversampled continuous-time reference for the symbol-level model.
//!
//! Transmitters emit unit-amplitude rectangular pulses on a tick grid of
//! `oversampling` ticks per nominal symbol period `T = 1`. The matched filter
//! is the time average of the received waveform over a window, so a lone
//! symbol returns exactly its amplitude. Every symbol boundary, offset and
//! window edge lies on the grid, which makes noiseless comparisons against
//! the symbol-level model exact up to floating-point rounding.
//!
//! Noise is added per tick with variance `sigma^2 * oversampling`, so the
//! matched-filter output over a window of duration `L` has variance
//! `sigma^2 / L`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::{Rng, RngCore};
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};
use crate::model::{ChannelParams, Misalignment, TimingScheme};
use crate::simulation::{
    noiseless_observations, InterferenceTaps, RngSeed, SchemeKind, SymbolBlock,
};

pub const MIN_OVERSAMPLING: u32 = 16;

/// Magic bytes at the start of a waveform dump.
pub const DUMP_MAGIC: &[u8; 8] = b"MSIMWAV1";

/// Grid description of the two transmissions at one receiver.
///
/// `tx1` is the receiver's own transmitter (unit gain, starting at tick 0);
/// `tx2` is the interferer, scaled by `h1` and starting `tau0_ticks` later.
/// Durations are in ticks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WaveformConfig {
    pub oversampling: u32,
    pub tx1_durations: Vec<u32>,
    pub tx2_durations: Vec<u32>,
    pub tau0_ticks: u32,
}

fn to_ticks(x: f64, oversampling: u32) -> Result<u32> {
    let t = x * f64::from(oversampling);
    let r = t.round();
    if (t - r).abs() > 1e-9 || r < 0.0 {
        return Err(Error::OffGrid {
            value: x,
            oversampling,
        });
    }
    Ok(r as u32)
}

impl WaveformConfig {
    /// Builds a configuration from durations and offset in units of `T`,
    /// rejecting anything that does not fall on the tick grid.
    pub fn new(oversampling: u32, tx1: &[f64], tx2: &[f64], tau0: f64) -> Result<Self> {
        if oversampling < MIN_OVERSAMPLING {
            return Err(invalid(
                "oversampling",
                format!("{oversampling} < {MIN_OVERSAMPLING} ticks per symbol"),
            ));
        }
        if !(0.0..1.0).contains(&tau0) {
            return Err(invalid("tau0", format!("{tau0} is outside [0, T)")));
        }
        let ticks = |d: &[f64]| -> Result<Vec<u32>> {
            d.iter()
                .map(|&x| {
                    let t = to_ticks(x, oversampling)?;
                    if t == 0 {
                        return Err(invalid("duration", "symbol durations must be > 0"));
                    }
                    Ok(t)
                })
                .collect()
        };
        Ok(Self {
            oversampling,
            tx1_durations: ticks(tx1)?,
            tx2_durations: ticks(tx2)?,
            tau0_ticks: to_ticks(tau0, oversampling)?,
        })
    }

    /// Receiver-R1 configuration for `n` symbols under `scheme`. The
    /// duration-extension schemes need `oversampling` to be a multiple of `n`.
    pub fn for_scheme(scheme: &TimingScheme, n: usize, oversampling: u32) -> Result<Self> {
        if scheme.block_len().is_some() && oversampling as usize % n != 0 {
            return Err(invalid(
                "oversampling",
                format!("{oversampling} is not a multiple of block length {n}"),
            ));
        }
        let (l1, l2) = scheme.symbol_durations();
        Self::new(
            oversampling,
            &vec![l1; n],
            &vec![l2; n],
            scheme.delta0().value(),
        )
    }

    fn total_ticks(&self) -> usize {
        let one: usize = self.tx1_durations.iter().map(|&d| d as usize).sum();
        let two: usize =
            self.tau0_ticks as usize + self.tx2_durations.iter().map(|&d| d as usize).sum::<usize>();
        one.max(two)
    }

    /// Consecutive matched-filter windows that follow `tx1`'s symbol grid.
    pub fn tx1_windows(&self) -> Vec<(usize, usize)> {
        grid_windows(0, &self.tx1_durations)
    }
}

/// Back-to-back windows of the given tick durations starting at `start`.
pub fn grid_windows(start: usize, durations: &[u32]) -> Vec<(usize, usize)> {
    let mut at = start;
    durations
        .iter()
        .map(|&d| {
            let w = (at, d as usize);
            at += d as usize;
            w
        })
        .collect()
}

/// Sampled baseband waveform.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    pub oversampling: u32,
    pub ticks: Vec<f64>,
}

fn paint(ticks: &mut [f64], start: usize, durations: &[u32], symbols: &SymbolBlock, gain: f64) {
    let mut at = start;
    for (i, &d) in durations.iter().enumerate() {
        let v = gain * symbols.get(i);
        for t in &mut ticks[at..at + d as usize] {
            *t += v;
        }
        at += d as usize;
    }
}

/// Superposes both transmissions and per-tick white noise.
pub fn synthesize(
    config: &WaveformConfig,
    block1: &SymbolBlock,
    block2: &SymbolBlock,
    params: ChannelParams,
    seed: RngSeed,
) -> Result<Waveform> {
    synthesize_with(config, block1, block2, params, &mut seed.rng())
}

fn synthesize_with<R: RngCore>(
    config: &WaveformConfig,
    block1: &SymbolBlock,
    block2: &SymbolBlock,
    params: ChannelParams,
    rng: &mut R,
) -> Result<Waveform> {
    if block1.len() != config.tx1_durations.len() {
        return Err(Error::LengthMismatch {
            what: "tx1 block",
            got: block1.len(),
            expected: config.tx1_durations.len(),
        });
    }
    if block2.len() != config.tx2_durations.len() {
        return Err(Error::LengthMismatch {
            what: "tx2 block",
            got: block2.len(),
            expected: config.tx2_durations.len(),
        });
    }
    let mut ticks = vec![0.0; config.total_ticks()];
    paint(&mut ticks, 0, &config.tx1_durations, block1, 1.0);
    paint(
        &mut ticks,
        config.tau0_ticks as usize,
        &config.tx2_durations,
        block2,
        params.h1(),
    );
    if params.sigma() > 0.0 {
        let tick_sigma = params.sigma() * f64::from(config.oversampling).sqrt();
        for t in &mut ticks {
            let z: f64 = rng.sample(StandardNormal);
            *t += tick_sigma * z;
        }
    }
    Ok(Waveform {
        oversampling: config.oversampling,
        ticks,
    })
}

/// Time average of the waveform over each `(start, length)` tick window.
pub fn matched_filter(waveform: &Waveform, windows: &[(usize, usize)]) -> Result<Vec<f64>> {
    windows
        .iter()
        .map(|&(start, len)| {
            let end = start + len;
            if len == 0 || end > waveform.ticks.len() {
                return Err(Error::WindowOutOfRange {
                    start,
                    end,
                    len: waveform.ticks.len(),
                });
            }
            Ok(waveform.ticks[start..end].iter().sum::<f64>() / len as f64)
        })
        .collect()
}

/// Like [`SchemeKind::realize`], but a randomized `δ0` is drawn uniformly
/// from the tick grid instead of from `[0, 1)`.
pub fn realize_on_grid<R: RngCore>(
    kind: SchemeKind,
    n: usize,
    oversampling: u32,
    rng: &mut R,
) -> Result<TimingScheme> {
    let scheme = kind.realize(n, rng)?;
    if matches!(kind, SchemeKind::Fixed(_)) {
        return Ok(scheme);
    }
    let tick = rng.random_range(0..oversampling);
    let d0 = Misalignment::new(f64::from(tick) / f64::from(oversampling))?;
    match scheme {
        TimingScheme::SchemeA { n, .. } => TimingScheme::scheme_a(n, d0),
        TimingScheme::SchemeB { n, k, k1, k2, .. } => TimingScheme::scheme_b(n, k, k1, k2, d0),
        conv => Ok(conv),
    }
}

/// Largest noiseless deviation between the waveform reference and the
/// symbol-level model at receiver R1, over `trials` random blocks.
///
/// Each trial draws fresh symbols and a grid-aligned offset `δ0` (for
/// randomized schemes; `Fixed` offsets must already be on the grid), plus
/// `K1, K2` for Scheme B.
pub fn cross_validate(
    params: ChannelParams,
    kind: SchemeKind,
    n: usize,
    oversampling: u32,
    trials: u64,
    seed: RngSeed,
) -> Result<f64> {
    let params = params.noiseless();
    let mut worst: f64 = 0.0;
    for trial in 0..trials {
        let mut rng = seed.stream(trial);
        let scheme = realize_on_grid(kind, n, oversampling, &mut rng)?;
        let a1 = SymbolBlock::random(n, &mut rng);
        let a2 = SymbolBlock::random(n, &mut rng);
        let config = WaveformConfig::for_scheme(&scheme, n, oversampling)?;
        let wave = synthesize_with(&config, &a1, &a2, params, &mut rng)?;
        let oracle = matched_filter(&wave, &config.tx1_windows())?;
        let taps = InterferenceTaps::for_scheme(&scheme, n)?;
        let model = noiseless_observations(&a1, &a2, params, &taps)?;
        for (o, m) in oracle.iter().zip(&model) {
            worst = worst.max((o - m).abs());
        }
    }
    Ok(worst)
}

/// Writes `MSIMWAV1`, the oversampling and the tick count (both `u32`
/// little-endian), then every tick as a little-endian `f64`.
pub fn write_dump(path: &Path, waveform: &Waveform) -> Result<()> {
    let count = u32::try_from(waveform.ticks.len())
        .map_err(|_| invalid("waveform", "more than u32::MAX ticks"))?;
    let mut out = BufWriter::new(File::create(path)?);
    out.write_all(DUMP_MAGIC)?;
    out.write_all(&waveform.oversampling.to_le_bytes())?;
    out.write_all(&count.to_le_bytes())?;
    for t in &waveform.ticks {
        out.write_all(&t.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_dump(path: &Path) -> Result<Waveform> {
    let mut input = BufReader::new(File::open(path)?);
    let mut header = [0u8; 16];
    input
        .read_exact(&mut header)
        .map_err(|_| Error::BadDump("truncated header".into()))?;
    if &header[..8] != DUMP_MAGIC {
        return Err(Error::BadDump("wrong magic".into()));
    }
    let oversampling = u32::from_le_bytes(header[8..12].try_into().unwrap());
    let count = u32::from_le_bytes(header[12..16].try_into().unwrap()) as usize;
    let mut body = Vec::new();
    input.read_to_end(&mut body)?;
    if body.len() != count * 8 {
        return Err(Error::BadDump(format!(
            "header announces {count} ticks, body holds {} bytes",
            body.len()
        )));
    }
    let ticks = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(Waveform {
        oversampling,
        ticks,
    })
}
