//! Self-check suite behind the `validate` command.

use std::fmt;
use std::path::Path;
use std::time::Instant;

use rand::{Rng, RngCore};
use rayon::prelude::*;

use super::{run_experiment, write_csv, ExperimentSpec};
use crate::analytics::{self, InterferenceSupport};
use crate::error::Result;
use crate::model::{ChannelParams, Misalignment};
use crate::simulation::{estimate_ber, RngSeed, SchemeKind};
use crate::waveform::cross_validate;

/// Closed-form BER the Monte Carlo grid is checked against, as a function of
/// channel, offset and block length.
pub type BerReference = dyn Fn(ChannelParams, Misalignment, usize) -> Result<f64> + Sync;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<34} {} ({:.2} s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.detail,
            self.seconds
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<CheckOutcome>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&CheckOutcome> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        let failed = self.checks.iter().filter(|c| !c.passed).count();
        write!(f, "{} checks, {} failed", self.checks.len(), failed)
    }
}

pub const MC_GRID: &str = "monte carlo vs closed-form grid";

fn random_params<R: RngCore>(rng: &mut R) -> ChannelParams {
    ChannelParams::new(rng.random_range(0.0..0.99), rng.random_range(0.05..2.0)).unwrap()
}

fn timed(name: &'static str, f: impl FnOnce() -> Result<(bool, String)>) -> CheckOutcome {
    let start = Instant::now();
    let (passed, detail) = f().unwrap_or_else(|e| (false, format!("error: {e}")));
    CheckOutcome {
        name,
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

fn interference_power(seed: RngSeed) -> Result<(bool, String)> {
    let mut rng = seed.rng();
    let mut worst: f64 = 0.0;
    for _ in 0..2000 {
        let p = random_params(&mut rng);
        let d = rng.random_range(0.0..1.0);
        let h2 = p.h1() * p.h1();
        let pi = analytics::effective_interference_power(p, Misalignment::new(d)?);
        let mirror = analytics::effective_interference_power(p, Misalignment::wrapped(1.0 - d));
        let excess = (h2 / 2.0 - pi).max(pi - h2).max(0.0);
        worst = worst.max(excess).max((pi - mirror).abs());
    }
    Ok((worst <= 1e-15, format!("max violation {worst:.1e}")))
}

fn support_moment(seed: RngSeed) -> Result<(bool, String)> {
    let mut rng = seed.rng();
    let mut worst: f64 = 0.0;
    for _ in 0..2000 {
        let p = random_params(&mut rng);
        let d = Misalignment::new(rng.random_range(0.0..1.0))?;
        let m = InterferenceSupport::new(p, d).second_moment();
        worst = worst.max((m - analytics::effective_interference_power(p, d)).abs());
    }
    Ok((worst <= 1e-14, format!("max |E[I^2] - P_I| {worst:.1e}")))
}

fn steady_state_shape(seed: RngSeed) -> Result<(bool, String)> {
    let mut rng = seed.rng();
    let mut asym: f64 = 0.0;
    let mut rise: f64 = 0.0;
    for _ in 0..200 {
        let p = random_params(&mut rng);
        let mut prev = f64::INFINITY;
        for i in 0..=50 {
            let d = f64::from(i) / 100.0;
            let b = analytics::ber_steady_state(p, Misalignment::new(d)?)?;
            let m = analytics::ber_steady_state(p, Misalignment::wrapped(1.0 - d))?;
            asym = asym.max((b - m).abs());
            if b > prev {
                rise = rise.max((b - prev) / prev);
            }
            prev = b;
        }
    }
    let ok = asym <= 1e-15 && rise <= 1e-14;
    Ok((ok, format!("max asymmetry {asym:.1e}, max relative rise on [0, 0.5] {rise:.1e}")))
}

fn average_esinr(seed: RngSeed) -> Result<(bool, String)> {
    let mut rng = seed.rng();
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let p = random_params(&mut rng);
        let c = analytics::avg_esinr_closed(p)?;
        let q = analytics::avg_esinr_quadrature(p)?;
        worst = worst.max((c - q).abs());
    }
    Ok((worst <= 1e-10, format!("max |closed - quadrature| {worst:.1e}")))
}

/// Offsets `0, 0.1, ..., 0.5` by SIR `2, 4, ..., 12` dB at SNR 10 dB,
/// `blocks` blocks of 1000 symbols per point. Passes when at least 95% of
/// points lie within three standard errors of `reference`.
pub fn mc_grid(seed: RngSeed, blocks: u64, reference: &BerReference) -> Result<(bool, String)> {
    const N: usize = 1000;
    let points: Vec<(f64, f64)> = (1..=6)
        .flat_map(|s| (0..=5).map(move |d| (f64::from(2 * s), f64::from(d) / 10.0)))
        .collect();
    let scores = points
        .par_iter()
        .enumerate()
        .map(|(i, &(sir, d))| -> Result<f64> {
            let p = ChannelParams::from_db(sir, 10.0)?;
            let d = Misalignment::new(d)?;
            let est = estimate_ber(p, SchemeKind::Fixed(d), blocks, N, seed.derive(i as u64))?;
            Ok(est.z_score(reference(p, d, N)?))
        })
        .collect::<Result<Vec<f64>>>()?;
    let inside = scores.iter().filter(|&&z| z <= 3.0).count();
    let worst = scores.iter().cloned().fold(0.0, f64::max);
    let frac = inside as f64 / scores.len() as f64;
    Ok((
        frac >= 0.95,
        format!(
            "{inside}/{} points within 3 std err (worst {worst:.2}), {} symbols per point",
            scores.len(),
            blocks * N as u64
        ),
    ))
}

fn waveform(seed: RngSeed) -> Result<(bool, String)> {
    let mut rng = seed.rng();
    let mut worst: f64 = 0.0;
    let mut configs = 0;
    for _ in 0..40 {
        let p = random_params(&mut rng);
        let tick = rng.random_range(0..64u32);
        let d = Misalignment::new(f64::from(tick) / 64.0)?;
        worst = worst.max(cross_validate(p, SchemeKind::Fixed(d), 64, 64, 1, RngSeed(rng.next_u64()))?);
        configs += 1;
    }
    for kind in [SchemeKind::SchemeA, SchemeKind::SchemeB { k: 8 }] {
        for _ in 0..40 {
            let p = random_params(&mut rng);
            worst = worst.max(cross_validate(p, kind, 32, 64, 1, RngSeed(rng.next_u64()))?);
            configs += 1;
        }
    }
    Ok((
        worst <= 1e-9,
        format!("{configs} configurations, max deviation {worst:.1e}"),
    ))
}

fn noiseless(seed: RngSeed) -> Result<(bool, String)> {
    let mut errors = 0;
    let mut symbols = 0;
    for (i, kind) in [
        SchemeKind::Fixed(Misalignment::ALIGNED),
        SchemeKind::Fixed(Misalignment::new(0.3)?),
        SchemeKind::SchemeA,
        SchemeKind::SchemeB { k: 16 },
    ]
    .into_iter()
    .enumerate()
    {
        for h1 in [0.5, 0.9, 0.999] {
            let e = estimate_ber(ChannelParams::new(h1, 0.0)?, kind, 50, 1000, seed.derive(i as u64))?;
            errors += e.errors;
            symbols += e.trials;
        }
    }
    Ok((errors == 0, format!("{errors} errors in {symbols} noiseless symbols")))
}

fn csv_determinism(seed: RngSeed) -> Result<(bool, String)> {
    let mut spec = ExperimentSpec::parse(
        "axis = sir\nvalues = 2, 5, 8\nsnr_db = 10\nschemes = conv, a, b\ndeltas = 0, 0.25\nn = 500\nblocks = 20\n",
        Path::new("determinism"),
    )?;
    spec.seed = seed.0;
    let mut first = Vec::new();
    let mut second = Vec::new();
    write_csv(&mut first, &run_experiment(&spec)?)?;
    write_csv(&mut second, &run_experiment(&spec)?)?;
    Ok((
        first == second,
        format!("two runs, {} and {} bytes", first.len(), second.len()),
    ))
}

/// Full suite against the built-in closed forms.
pub fn validate_all(seed: RngSeed) -> ValidationReport {
    validate_with(seed, &|p, d, n| analytics::ber_block(p, d, n))
}

/// Full suite, checking the Monte Carlo grid against `reference`.
pub fn validate_with(seed: RngSeed, reference: &BerReference) -> ValidationReport {
    let s = |i| seed.derive(i);
    ValidationReport {
        checks: vec![
            timed("interference power bound/symmetry", || interference_power(s(0))),
            timed("support second moment", || support_moment(s(1))),
            timed("steady-state BER shape", || steady_state_shape(s(2))),
            timed("averaged eSINR closed form", || average_esinr(s(3))),
            timed(MC_GRID, || mc_grid(s(4), 1000, reference)),
            timed("waveform cross-validation", || waveform(s(5))),
            timed("noiseless zero errors", || noiseless(s(6))),
            timed("csv determinism", || csv_determinism(s(7))),
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::q_function;

    #[test]
    fn default_suite_passes() {
        let report = validate_all(RngSeed(1));
        assert!(report.all_passed(), "{report}");
        assert_eq!(report.checks.len(), 8);
        assert!(report.get("noiseless zero errors").unwrap().detail.starts_with("0 errors"));
    }

    #[test]
    fn tampered_q_is_caught() {
        // block BER rebuilt with a Q-function that is off by 1e-3
        let q = |x: f64| q_function(x) + 1e-3;
        let tampered = move |p: ChannelParams, d: Misalignment, n: usize| -> Result<f64> {
            let (h, s, d) = (p.h1(), p.sigma(), d.value());
            let i = h * (1.0 - d);
            let first = 0.5 * (q((1.0 - i) / s) + q((1.0 + i) / s));
            let inner = h * (1.0 - 2.0 * d);
            let rest = 0.25 * (q((1.0 - h) / s) + q((1.0 + h) / s) + q((1.0 - inner) / s) + q((1.0 + inner) / s));
            let n = n as f64;
            Ok(first / n + rest * (n - 1.0) / n)
        };
        let (ok, detail) = mc_grid(RngSeed(1).derive(4), 1000, &tampered).unwrap();
        assert!(!ok, "{detail}");
    }
}
