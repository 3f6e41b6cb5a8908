//! Misalignment trajectories and the per-window interference taps they induce.
//!
//! Two descriptions of the interferer's timing live here:
//!
//! * [`DeltaTrajectory`]: the idealized per-symbol offset `δ(n)`, which drifts
//!   linearly and wraps modulo one symbol.
//! * [`InterferenceTaps`]: the exact fraction of each target matched-filter
//!   window covered by each interferer symbol, computed from the actual
//!   symbol durations. For constant timing the two agree exactly; under the
//!   duration-extension schemes the taps also capture the one-symbol slip at
//!   every wrap and any window straddling two interferer boundaries.

use rand::{Rng, RngCore};

use crate::error::{invalid, Error, Result};
use crate::model::{Misalignment, TimingScheme};
use crate::simulation::RngSeed;

/// Per-symbol misalignment `δ(n)`, `n = 0..N-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaTrajectory(Vec<Misalignment>);

impl DeltaTrajectory {
    pub fn constant(delta: Misalignment, n: usize) -> Self {
        Self(vec![delta; n])
    }

    pub fn from_values(values: Vec<Misalignment>) -> Self {
        Self(values)
    }

    pub fn deltas(&self) -> &[Misalignment] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Idealized offset trajectory over a block of `n` symbols.
///
/// Conventional timing holds `δ0`; Scheme A advances by `1/N` per symbol;
/// Scheme B advances by `|K1 - K2| / N`. All reduce modulo 1.
pub fn delta_trajectory(scheme: &TimingScheme, n: usize) -> Result<DeltaTrajectory> {
    if n == 0 {
        return Err(invalid("n", "block length must be >= 1"));
    }
    if let Some(block) = scheme.block_len() {
        if block != n {
            return Err(Error::LengthMismatch {
                what: "trajectory",
                got: n,
                expected: block,
            });
        }
    }
    let d0 = scheme.delta0().value();
    let step = match *scheme {
        TimingScheme::Conventional { .. } => return Ok(DeltaTrajectory::constant(scheme.delta0(), n)),
        TimingScheme::SchemeA { n, .. } => 1.0 / n as f64,
        TimingScheme::SchemeB { n, k1, k2, .. } => k1.abs_diff(k2) as f64 / n as f64,
    };
    Ok(DeltaTrajectory(
        (0..n)
            .map(|i| Misalignment::wrapped(d0 + i as f64 * step))
            .collect(),
    ))
}

/// Draws the Scheme B stretch factors `(K1, K2)`, each uniform on `0..=k`.
pub fn scheme_b_draw(k: u32, seed: RngSeed) -> (u32, u32) {
    draw_pair(k, &mut seed.rng())
}

pub(crate) fn draw_pair<R: RngCore>(k: u32, rng: &mut R) -> (u32, u32) {
    (rng.random_range(0..=k), rng.random_range(0..=k))
}

/// At most this many interferer symbols overlap one window, given that no
/// symbol is stretched past twice its nominal duration.
pub const MAX_TAPS: usize = 3;

/// Interferer coverage of one target window: symbols `first..first+len`
/// contribute with the given weights (fractions of the window).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowTaps {
    pub first: usize,
    len: u8,
    weights: [f64; MAX_TAPS],
    /// Position of the first interferer boundary strictly inside the window,
    /// as a fraction of the window; 0 when no boundary falls inside.
    pub boundary: f64,
}

impl WindowTaps {
    fn empty() -> Self {
        Self {
            first: 0,
            len: 0,
            weights: [0.0; MAX_TAPS],
            boundary: 0.0,
        }
    }

    fn push(&mut self, index: usize, weight: f64) {
        if self.len == 0 {
            self.first = index;
        }
        debug_assert_eq!(index, self.first + self.len as usize);
        self.weights[self.len as usize] = weight;
        self.len += 1;
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights[..self.len as usize]
    }

    /// `(interferer index, weight)` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.weights()
            .iter()
            .enumerate()
            .map(move |(j, &w)| (self.first + j, w))
    }

    /// Sum of `weight * interferer[index]`.
    pub fn combine(&self, interferer: &[i8]) -> f64 {
        self.iter().map(|(k, w)| w * f64::from(interferer[k])).sum()
    }

    /// Exact interference power `sum w^2` per unit `h1^2`, symbols being independent.
    pub fn power(&self) -> f64 {
        self.weights().iter().map(|w| w * w).sum()
    }
}

/// Interferer taps for every target window of a block.
#[derive(Debug, Clone, PartialEq)]
pub struct InterferenceTaps {
    windows: Vec<WindowTaps>,
    interferer_len: usize,
}

// Overlaps at or below this fraction of a window are boundary rounding.
const OVERLAP_EPS: f64 = 1e-13;

impl InterferenceTaps {
    /// Taps implied by the two-symbol sampled model: window 0 sees `1 - δ(0)`
    /// of interferer symbol 0; window `n` sees `δ(n)` of symbol `n-1` and
    /// `1 - δ(n)` of symbol `n`.
    pub fn from_trajectory(traj: &DeltaTrajectory) -> Self {
        let windows = traj
            .deltas()
            .iter()
            .enumerate()
            .map(|(n, d)| {
                let d = d.value();
                let mut w = WindowTaps::empty();
                if n > 0 {
                    w.push(n - 1, d);
                }
                w.push(n, 1.0 - d);
                w.boundary = d;
                w
            })
            .collect();
        Self {
            windows,
            interferer_len: traj.len(),
        }
    }

    /// Exact taps at receiver R1 when both transmitters send `n` symbols with
    /// the durations of `scheme`, the interferer starting `δ0` after the
    /// target. Matched-filter windows follow the target's own symbol grid.
    pub fn for_scheme(scheme: &TimingScheme, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(invalid("n", "block length must be >= 1"));
        }
        if let Some(block) = scheme.block_len() {
            if block != n {
                return Err(Error::LengthMismatch {
                    what: "taps",
                    got: n,
                    expected: block,
                });
            }
        }
        let (target_len, interferer_len) = scheme.symbol_durations();
        Ok(Self::from_durations(
            target_len,
            interferer_len,
            scheme.delta0().value(),
            n,
        ))
    }

    fn from_durations(window: f64, symbol: f64, start: f64, n: usize) -> Self {
        let mut windows = Vec::with_capacity(n);
        let mut k = 0usize;
        for i in 0..n {
            let lo = i as f64 * window;
            let hi = lo + window;
            let mut taps = WindowTaps::empty();
            // skip interferer symbols that end before this window
            while k < n && start + (k + 1) as f64 * symbol <= lo {
                k += 1;
            }
            let mut j = k;
            while j < n {
                let s = start + j as f64 * symbol;
                if s >= hi {
                    break;
                }
                let e = s + symbol;
                let overlap = (e.min(hi) - s.max(lo)) / window;
                if overlap > OVERLAP_EPS {
                    if taps.len as usize == MAX_TAPS {
                        unreachable!("symbol durations admit at most {MAX_TAPS} taps");
                    }
                    taps.push(j, overlap);
                    if taps.boundary == 0.0 && s > lo {
                        let b = (s - lo) / window;
                        if b > OVERLAP_EPS {
                            taps.boundary = b;
                        }
                    }
                }
                j += 1;
            }
            windows.push(taps);
        }
        Self {
            windows,
            interferer_len: n,
        }
    }

    pub fn windows(&self) -> &[WindowTaps] {
        &self.windows
    }

    pub fn len(&self) -> usize {
        self.windows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.windows.is_empty()
    }

    /// Number of interferer symbols the taps index into.
    pub fn interferer_len(&self) -> usize {
        self.interferer_len
    }
}
