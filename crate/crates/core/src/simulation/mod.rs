//! Symbol-level Monte Carlo engine.
//!
//! Each block draws a target and an interferer BPSK block, forms the matched
//! filter outputs `y(n) = a1[n] + h1 * sum_k w[n,k] a2[k] + noise`, applies the
//! sign detector and counts bit errors. Blocks are independent and each one
//! draws from its own ChaCha stream, so error counts are identical for any
//! thread count.

mod symbols;
mod timing;

pub use symbols::{detect, generate_block, RngSeed, SymbolBlock};
pub use timing::{
    delta_trajectory, scheme_b_draw, DeltaTrajectory, InterferenceTaps, WindowTaps, MAX_TAPS,
};

use rand::{Rng, RngCore};
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::model::{BerEstimate, ChannelParams, Misalignment, TimingScheme};

/// Noise-free matched-filter outputs.
pub fn noiseless_observations(
    target: &SymbolBlock,
    interferer: &SymbolBlock,
    params: ChannelParams,
    taps: &InterferenceTaps,
) -> Result<Vec<f64>> {
    if target.len() != taps.len() {
        return Err(Error::LengthMismatch {
            what: "target block",
            got: target.len(),
            expected: taps.len(),
        });
    }
    if interferer.len() != taps.interferer_len() {
        return Err(Error::LengthMismatch {
            what: "interferer block",
            got: interferer.len(),
            expected: taps.interferer_len(),
        });
    }
    let a2 = interferer.symbols();
    Ok(taps
        .windows()
        .iter()
        .zip(target.symbols())
        .map(|(w, &a1)| f64::from(a1) + params.h1() * w.combine(a2))
        .collect())
}

/// Adds i.i.d. `N(0, sigma^2)` samples in place. Draws nothing when `sigma == 0`.
pub fn add_awgn<R: RngCore>(samples: &mut [f64], sigma: f64, rng: &mut R) {
    if sigma == 0.0 {
        return;
    }
    for y in samples {
        let z: f64 = rng.sample(StandardNormal);
        *y += sigma * z;
    }
}

/// Matched-filter outputs with additive Gaussian noise of variance `sigma^2`.
///
/// With taps from [`InterferenceTaps::from_trajectory`] this is exactly the
/// two-symbol sampled model; with [`InterferenceTaps::for_scheme`] it is the
/// exact overlap model for the given transmitter timing.
pub fn sampled_observations<R: RngCore>(
    target: &SymbolBlock,
    interferer: &SymbolBlock,
    params: ChannelParams,
    taps: &InterferenceTaps,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let mut y = noiseless_observations(target, interferer, params, taps)?;
    add_awgn(&mut y, params.sigma(), rng);
    Ok(y)
}

/// Transmitter timing policy for a Monte Carlo run. Randomized policies draw
/// a fresh realization (`δ0`, and `K1, K2` for Scheme B) for every block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SchemeKind {
    /// Conventional timing with a fixed offset.
    Fixed(Misalignment),
    SchemeA,
    SchemeB { k: u32 },
}

impl SchemeKind {
    pub fn label(&self) -> &'static str {
        match self {
            SchemeKind::Fixed(_) => "conv",
            SchemeKind::SchemeA => "a",
            SchemeKind::SchemeB { .. } => "b",
        }
    }

    /// Timing for one block; `δ0` is uniform on `[0, 1)` for the randomized schemes.
    pub fn realize<R: RngCore>(&self, n: usize, rng: &mut R) -> Result<TimingScheme> {
        match *self {
            SchemeKind::Fixed(d) => Ok(TimingScheme::conventional(d)),
            SchemeKind::SchemeA => {
                let d0 = Misalignment::wrapped(rng.random::<f64>());
                TimingScheme::scheme_a(n, d0)
            }
            SchemeKind::SchemeB { k } => {
                let d0 = Misalignment::wrapped(rng.random::<f64>());
                let (k1, k2) = timing::draw_pair(k, rng);
                TimingScheme::scheme_b(n, k, k1, k2, d0)
            }
        }
    }
}

fn check_run(blocks: u64, n: usize) -> Result<()> {
    if blocks == 0 {
        return Err(invalid("blocks", "at least one block is required"));
    }
    if n == 0 {
        return Err(invalid("n", "block length must be >= 1"));
    }
    Ok(())
}

/// Bit errors in block number `index` of a run.
fn block_errors(
    params: ChannelParams,
    kind: &SchemeKind,
    n: usize,
    seed: RngSeed,
    index: u64,
) -> Result<u64> {
    let mut rng = seed.stream(index);
    let scheme = kind.realize(n, &mut rng)?;
    let target = SymbolBlock::random(n, &mut rng);
    let interferer = SymbolBlock::random(n, &mut rng);
    let taps = InterferenceTaps::for_scheme(&scheme, n)?;
    let y = sampled_observations(&target, &interferer, params, &taps, &mut rng)?;
    detect(&y).errors_against(&target)
}

/// Monte Carlo BER over `blocks` independent blocks of `n` symbols.
pub fn estimate_ber(
    params: ChannelParams,
    kind: SchemeKind,
    blocks: u64,
    n: usize,
    seed: RngSeed,
) -> Result<BerEstimate> {
    check_run(blocks, n)?;
    let errors = (0..blocks)
        .into_par_iter()
        .map(|b| block_errors(params, &kind, n, seed, b))
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    BerEstimate::from_counts(errors, blocks * n as u64)
}

/// Simulated eSINR averaged over misalignment.
///
/// Steady-state symbols are binned by the position of the interferer boundary
/// inside their window; each bin's eSINR is the reciprocal of the empirical
/// mean of `(y - a1)^2`, and the bins are averaged with equal weight.
pub fn estimate_avg_esinr(
    params: ChannelParams,
    kind: SchemeKind,
    blocks: u64,
    n: usize,
    bins: usize,
    seed: RngSeed,
) -> Result<f64> {
    check_run(blocks, n)?;
    if bins == 0 {
        return Err(invalid("bins", "at least one bin is required"));
    }
    let acc = (0..blocks)
        .into_par_iter()
        .map(|b| -> Result<Vec<(f64, u64)>> {
            let mut rng = seed.stream(b);
            let scheme = kind.realize(n, &mut rng)?;
            let target = SymbolBlock::random(n, &mut rng);
            let interferer = SymbolBlock::random(n, &mut rng);
            let taps = InterferenceTaps::for_scheme(&scheme, n)?;
            let y = sampled_observations(&target, &interferer, params, &taps, &mut rng)?;
            let mut local = vec![(0.0, 0u64); bins];
            for (i, w) in taps.windows().iter().enumerate().skip(1) {
                // windows the interferer no longer fully covers are edge effects
                if (w.weights().iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                    continue;
                }
                let bin = ((w.boundary * bins as f64) as usize).min(bins - 1);
                let e = y[i] - target.get(i);
                local[bin].0 += e * e;
                local[bin].1 += 1;
            }
            Ok(local)
        })
        .collect::<Result<Vec<_>>>()?
        // fold in block order so the floating-point sums are reproducible
        .into_iter()
        .fold(vec![(0.0, 0u64); bins], |mut a, b| {
            for (x, y) in a.iter_mut().zip(b) {
                x.0 += y.0;
                x.1 += y.1;
            }
            a
        });
    let filled: Vec<f64> = acc
        .iter()
        .filter(|(_, c)| *c > 0)
        .map(|(s, c)| *c as f64 / s)
        .collect();
    if filled.is_empty() {
        return Err(invalid("blocks", "no steady-state symbols were observed"));
    }
    Ok(filled.iter().sum::<f64>() / filled.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics;

    fn ch(h1: f64, sigma: f64) -> ChannelParams {
        ChannelParams::new(h1, sigma).unwrap()
    }

    fn md(d: f64) -> Misalignment {
        Misalignment::new(d).unwrap()
    }

    fn blocks(n: usize, seed: u64) -> (SymbolBlock, SymbolBlock) {
        let mut rng = RngSeed(seed).rng();
        (SymbolBlock::random(n, &mut rng), SymbolBlock::random(n, &mut rng))
    }

    #[test]
    fn aligned_noiseless_sum() {
        let (a1, a2) = blocks(50, 1);
        let traj = DeltaTrajectory::constant(md(0.0), 50);
        let taps = InterferenceTaps::from_trajectory(&traj);
        let y = sampled_observations(&a1, &a2, ch(0.4, 0.0), &taps, &mut RngSeed(0).rng()).unwrap();
        for i in 0..50 {
            assert_eq!(y[i], a1.get(i) + 0.4 * a2.get(i));
        }
    }

    #[test]
    fn half_offset_cancels_on_sign_change() {
        let (a1, a2) = blocks(200, 2);
        let traj = DeltaTrajectory::constant(md(0.5), 200);
        let taps = InterferenceTaps::from_trajectory(&traj);
        let y = noiseless_observations(&a1, &a2, ch(0.6, 0.0), &taps).unwrap();
        let mut seen = 0;
        for i in 1..200 {
            if a2.get(i - 1) == -a2.get(i) {
                assert_eq!(y[i], a1.get(i));
                seen += 1;
            }
        }
        assert!(seen > 50);
    }

    #[test]
    fn first_symbol_has_no_predecessor() {
        let (a1, a2) = blocks(4, 3);
        let traj = DeltaTrajectory::constant(md(0.25), 4);
        let y = noiseless_observations(&a1, &a2, ch(0.5, 0.0), &InterferenceTaps::from_trajectory(&traj)).unwrap();
        assert!((y[0] - (a1.get(0) + 0.5 * 0.75 * a2.get(0))).abs() < 1e-15);
    }

    #[test]
    fn length_mismatch_rejected() {
        let (a1, _) = blocks(10, 4);
        let (_, a2) = blocks(11, 5);
        let taps = InterferenceTaps::from_trajectory(&DeltaTrajectory::constant(md(0.1), 10));
        assert!(noiseless_observations(&a1, &a2, ch(0.5, 0.0), &taps).is_err());
        let taps = InterferenceTaps::from_trajectory(&DeltaTrajectory::constant(md(0.1), 9));
        let (a1, a2) = blocks(10, 4);
        assert!(noiseless_observations(&a1, &a2, ch(0.5, 0.0), &taps).is_err());
    }

    #[test]
    fn noiseless_detection_is_exact() {
        for kind in [
            SchemeKind::Fixed(md(0.0)),
            SchemeKind::Fixed(md(0.7)),
            SchemeKind::SchemeA,
            SchemeKind::SchemeB { k: 16 },
        ] {
            for seed in 0..4 {
                let e = estimate_ber(ch(0.999, 0.0), kind, 20, 500, RngSeed(seed)).unwrap();
                assert_eq!(e.errors, 0, "{kind:?}");
            }
        }
    }

    #[test]
    fn estimate_is_deterministic_and_thread_independent() {
        let p = ch(0.631, 0.3162);
        let a = estimate_ber(p, SchemeKind::SchemeB { k: 16 }, 64, 256, RngSeed(77)).unwrap();
        let b = estimate_ber(p, SchemeKind::SchemeB { k: 16 }, 64, 256, RngSeed(77)).unwrap();
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| estimate_ber(p, SchemeKind::SchemeB { k: 16 }, 64, 256, RngSeed(77)).unwrap());
        assert_eq!(a, b);
        assert_eq!(a, single);
    }

    #[test]
    fn sign_symmetry() {
        // negating both blocks and the noise mirrors every observation exactly
        let (a1, a2) = blocks(5000, 6);
        let p = ch(0.7, 0.4);
        let s = TimingScheme::scheme_a(5000, md(0.2)).unwrap();
        let taps = InterferenceTaps::for_scheme(&s, 5000).unwrap();
        let mut noise = vec![0.0; 5000];
        add_awgn(&mut noise, p.sigma(), &mut RngSeed(8).rng());
        let mut y = noiseless_observations(&a1, &a2, p, &taps).unwrap();
        let mut y_neg = noiseless_observations(&a1.negated(), &a2.negated(), p, &taps).unwrap();
        for i in 0..5000 {
            y[i] += noise[i];
            y_neg[i] -= noise[i];
        }
        let e = detect(&y).errors_against(&a1).unwrap();
        let e_neg = detect(&y_neg).errors_against(&a1.negated()).unwrap();
        assert!(e > 0);
        assert_eq!(e, e_neg);
    }

    #[test]
    fn awgn_moments() {
        let mut v = vec![0.0; 200_000];
        add_awgn(&mut v, 0.5, &mut RngSeed(10).rng());
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!(mean.abs() < 4.0 * 0.5 / n.sqrt());
        // std of the sample variance is about sigma^2 sqrt(2/n)
        assert!((var - 0.25).abs() < 4.0 * 0.25 * (2.0 / n).sqrt());
    }

    #[test]
    fn conventional_matches_closed_form() {
        let p = ch(0.631, 0.3162);
        let e = estimate_ber(p, SchemeKind::Fixed(md(0.0)), 1000, 1000, RngSeed(12)).unwrap();
        let reference = analytics::ber_block(p, md(0.0), 1000).unwrap();
        assert!((reference - 0.06079).abs() < 5e-5);
        assert!(e.z_score(reference) < 3.0, "ber {} ± {}", e.ber, e.std_err);
    }

    #[test]
    fn scheme_a_matches_average() {
        let p = ch(0.631, 0.3162);
        let e = estimate_ber(p, SchemeKind::SchemeA, 1000, 1000, RngSeed(13)).unwrap();
        let reference = analytics::avg_ber(p).unwrap();
        assert!(e.z_score(reference) < 3.0, "ber {} ± {} vs {}", e.ber, e.std_err, reference);
    }

    #[test]
    fn simulated_esinr_tracks_closed_forms() {
        let p = ch(0.631, 0.3162);
        let fixed = estimate_avg_esinr(p, SchemeKind::Fixed(md(0.0)), 200, 1000, 20, RngSeed(14)).unwrap();
        let aligned = analytics::esinr(p, md(0.0)).unwrap();
        assert!((fixed / aligned - 1.0).abs() < 0.02, "{fixed} vs {aligned}");
        let swept = estimate_avg_esinr(p, SchemeKind::SchemeA, 400, 1000, 50, RngSeed(15)).unwrap();
        let avg = analytics::avg_esinr_closed(p).unwrap();
        assert!((swept / avg - 1.0).abs() < 0.02, "{swept} vs {avg}");
    }

    #[test]
    fn rejects_empty_runs() {
        let p = ch(0.5, 0.5);
        assert!(estimate_ber(p, SchemeKind::SchemeA, 0, 10, RngSeed(1)).is_err());
        assert!(estimate_ber(p, SchemeKind::SchemeA, 10, 0, RngSeed(1)).is_err());
    }
}
