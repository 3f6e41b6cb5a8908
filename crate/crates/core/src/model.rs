//! Domain types shared by every other module, plus dB/linear conversions.
//!
//! Time is normalized so that the target symbol duration `T` is 1. Offsets are
//! therefore stored directly as the fraction `delta = tau / T`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Converts a signal-to-interference ratio in dB into the interferer amplitude
/// `h1`, using `SIR = 1 / h1^2`.
pub fn sir_db_to_h1(sir_db: f64) -> Result<f64> {
    if !sir_db.is_finite() || sir_db <= 0.0 {
        return Err(invalid(
            "sir_db",
            format!("{sir_db} dB would give h1 >= 1; SIR must be finite and > 0 dB"),
        ));
    }
    Ok(10f64.powf(-sir_db / 20.0))
}

/// Inverse of [`sir_db_to_h1`]. `h1 = 0` maps to `+inf`.
pub fn h1_to_sir_db(h1: f64) -> f64 {
    -20.0 * h1.log10()
}

/// Converts an SNR in dB into the noise standard deviation, using `SNR = 1 / sigma^2`.
pub fn snr_db_to_sigma(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 20.0)
}

pub fn sigma_to_snr_db(sigma: f64) -> f64 {
    -20.0 * sigma.log10()
}

/// Linear power ratio to dB.
pub fn to_db(ratio: f64) -> f64 {
    10.0 * ratio.log10()
}

/// Channel seen by the target receiver, normalized to a unit-gain desired link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelParams {
    h1: f64,
    sigma: f64,
}

impl ChannelParams {
    /// `h1` is the interferer amplitude, `sigma` the noise standard deviation
    /// at the matched-filter output. Requires `0 <= h1 < 1` and `sigma >= 0`.
    pub fn new(h1: f64, sigma: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&h1) {
            return Err(invalid("h1", format!("{h1} is outside [0, 1)")));
        }
        if !sigma.is_finite() || sigma < 0.0 {
            return Err(invalid("sigma", format!("{sigma} must be finite and >= 0")));
        }
        Ok(Self { h1, sigma })
    }

    pub fn from_db(sir_db: f64, snr_db: f64) -> Result<Self> {
        if !snr_db.is_finite() {
            return Err(invalid("snr_db", format!("{snr_db} is not finite")));
        }
        Self::new(sir_db_to_h1(sir_db)?, snr_db_to_sigma(snr_db))
    }

    pub fn h1(&self) -> f64 {
        self.h1
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Same interferer amplitude with the noise removed.
    pub fn noiseless(&self) -> Self {
        Self {
            h1: self.h1,
            sigma: 0.0,
        }
    }
}

/// Fractional symbol offset `delta` in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct Misalignment(f64);

impl Misalignment {
    pub const ALIGNED: Misalignment = Misalignment(0.0);

    pub fn new(delta: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&delta) {
            return Err(invalid("delta", format!("{delta} is outside [0, 1)")));
        }
        Ok(Self(delta))
    }

    /// Reduces any finite real offset modulo one symbol.
    pub fn wrapped(x: f64) -> Self {
        let r = x.rem_euclid(1.0);
        // rem_euclid of a tiny negative number rounds up to exactly 1.0
        Self(if r >= 1.0 { 0.0 } else { r })
    }

    pub fn value(&self) -> f64 {
        self.0
    }
}

/// Transmitter timing for one packet, as seen by receiver R1.
///
/// * `Conventional`: both transmitters use symbol duration `T`; the
///   interferer lags by a fixed `delta0`.
/// * `SchemeA`: the interferer stretches every symbol by `alpha = T/N`, so the
///   relative offset drifts by `1/N` per symbol.
/// * `SchemeB`: each link stretches its symbols by `K_i * alpha`, with `K_i`
///   drawn uniformly from `0..=K` before the packet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimingScheme {
    Conventional {
        delta0: Misalignment,
    },
    SchemeA {
        n: usize,
        delta0: Misalignment,
    },
    SchemeB {
        n: usize,
        k: u32,
        k1: u32,
        k2: u32,
        delta0: Misalignment,
    },
}

impl TimingScheme {
    pub fn conventional(delta0: Misalignment) -> Self {
        TimingScheme::Conventional { delta0 }
    }

    pub fn scheme_a(n: usize, delta0: Misalignment) -> Result<Self> {
        if n == 0 {
            return Err(invalid("n", "block length must be >= 1"));
        }
        Ok(TimingScheme::SchemeA { n, delta0 })
    }

    /// Requires `k1, k2 <= k <= n` so that no symbol is stretched beyond `2T`.
    pub fn scheme_b(n: usize, k: u32, k1: u32, k2: u32, delta0: Misalignment) -> Result<Self> {
        if n == 0 {
            return Err(invalid("n", "block length must be >= 1"));
        }
        if k as usize > n {
            return Err(invalid("k", format!("K = {k} exceeds block length {n}")));
        }
        if k1 > k || k2 > k {
            return Err(invalid(
                "k1/k2",
                format!("draws ({k1}, {k2}) must lie in [0, {k}]"),
            ));
        }
        Ok(TimingScheme::SchemeB {
            n,
            k,
            k1,
            k2,
            delta0,
        })
    }

    pub fn delta0(&self) -> Misalignment {
        match *self {
            TimingScheme::Conventional { delta0 }
            | TimingScheme::SchemeA { delta0, .. }
            | TimingScheme::SchemeB { delta0, .. } => delta0,
        }
    }

    /// Block length the scheme was configured for; `None` for conventional timing.
    pub fn block_len(&self) -> Option<usize> {
        match *self {
            TimingScheme::Conventional { .. } => None,
            TimingScheme::SchemeA { n, .. } | TimingScheme::SchemeB { n, .. } => Some(n),
        }
    }

    /// Symbol durations `(target, interferer)` in units of `T`.
    pub fn symbol_durations(&self) -> (f64, f64) {
        match *self {
            TimingScheme::Conventional { .. } => (1.0, 1.0),
            TimingScheme::SchemeA { n, .. } => (1.0, 1.0 + 1.0 / n as f64),
            TimingScheme::SchemeB { n, k1, k2, .. } => (
                1.0 + k1 as f64 / n as f64,
                1.0 + k2 as f64 / n as f64,
            ),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            TimingScheme::Conventional { .. } => "conv",
            TimingScheme::SchemeA { .. } => "a",
            TimingScheme::SchemeB { .. } => "b",
        }
    }
}

/// Monte Carlo bit-error-rate estimate with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BerEstimate {
    pub errors: u64,
    pub trials: u64,
    pub ber: f64,
    pub std_err: f64,
}

impl BerEstimate {
    pub fn from_counts(errors: u64, trials: u64) -> Result<Self> {
        if trials == 0 {
            return Err(invalid("trials", "at least one trial is required"));
        }
        if errors > trials {
            return Err(invalid(
                "errors",
                format!("{errors} errors exceed {trials} trials"),
            ));
        }
        let ber = errors as f64 / trials as f64;
        Ok(Self {
            errors,
            trials,
            ber,
            std_err: (ber * (1.0 - ber) / trials as f64).sqrt(),
        })
    }

    /// Distance from `reference` in units of this estimate's standard error.
    /// A zero standard error gives 0 on an exact hit and `inf` otherwise.
    pub fn z_score(&self, reference: f64) -> f64 {
        let d = (self.ber - reference).abs();
        if self.std_err == 0.0 {
            if d == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            d / self.std_err
        }
    }
}

/// One output row of an experiment sweep. Absent values stay `None` and are
/// written as empty CSV fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub experiment: String,
    pub sir_db: f64,
    pub snr_db: f64,
    pub delta: Option<f64>,
    pub scheme: String,
    pub n_block: usize,
    pub trials: u64,
    pub analytic_ber: Option<f64>,
    pub sim_ber: Option<f64>,
    pub sim_stderr: Option<f64>,
    pub esinr_linear: Option<f64>,
    pub avg_esinr_linear: Option<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sir_conversions() {
        // 10^(-0.2) from a 30-digit evaluation
        assert!((sir_db_to_h1(4.0).unwrap() - 0.630_957_344_480_193_2).abs() < 1e-15);
        assert_eq!(sir_db_to_h1(20.0).unwrap(), 0.1);
        // 20*log10(2)
        assert!((sir_db_to_h1(6.0206).unwrap() - 0.5).abs() < 1e-4);
        assert!((sir_db_to_h1(20.0 * 2f64.log10()).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn sir_rejects_non_positive() {
        assert!(sir_db_to_h1(0.0).is_err());
        assert!(sir_db_to_h1(-3.0).is_err());
        assert!(sir_db_to_h1(f64::NAN).is_err());
    }

    #[test]
    fn snr_conversions() {
        assert!((snr_db_to_sigma(10.0) - 0.316_227_766_016_837_9).abs() < 1e-15);
        assert_eq!(snr_db_to_sigma(0.0), 1.0);
        assert_eq!(snr_db_to_sigma(20.0), 0.1);
        assert!((sigma_to_snr_db(snr_db_to_sigma(13.5)) - 13.5).abs() < 1e-12);
    }

    #[test]
    fn channel_params_validation() {
        assert!(ChannelParams::new(1.0, 0.1).is_err());
        assert!(ChannelParams::new(1.5, 0.1).is_err());
        assert!(ChannelParams::new(-0.1, 0.1).is_err());
        assert!(ChannelParams::new(0.5, -0.1).is_err());
        assert!(ChannelParams::new(0.5, f64::NAN).is_err());
        assert!(ChannelParams::new(0.0, 0.0).is_ok());
        assert!(ChannelParams::new(0.999, 0.0).is_ok());
    }

    #[test]
    fn misalignment_bounds() {
        assert!(Misalignment::new(1.0).is_err());
        assert!(Misalignment::new(-1e-12).is_err());
        assert!(Misalignment::new(0.0).is_ok());
        assert_eq!(Misalignment::wrapped(1.25).value(), 0.25);
        assert_eq!(Misalignment::wrapped(-1e-18).value(), 0.0);
        assert!((Misalignment::wrapped(-0.25).value() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn scheme_validation() {
        let d = Misalignment::ALIGNED;
        assert!(TimingScheme::scheme_a(0, d).is_err());
        assert!(TimingScheme::scheme_b(10, 4, 5, 0, d).is_err());
        assert!(TimingScheme::scheme_b(10, 11, 0, 0, d).is_err());
        assert!(TimingScheme::scheme_b(10, 4, 4, 0, d).is_ok());
    }

    #[test]
    fn ber_estimate_fields() {
        let e = BerEstimate::from_counts(25, 100).unwrap();
        assert_eq!(e.ber, 0.25);
        assert!((e.std_err - (0.25f64 * 0.75 / 100.0).sqrt()).abs() < 1e-15);
        assert!(BerEstimate::from_counts(0, 0).is_err());
        assert!(BerEstimate::from_counts(3, 2).is_err());
        let zero = BerEstimate::from_counts(0, 10).unwrap();
        assert_eq!(zero.z_score(0.0), 0.0);
        assert!(zero.z_score(0.1).is_infinite());
    }

    proptest! {
        #[test]
        fn sir_round_trip(x in 1e-6f64..=60.0) {
            let back = h1_to_sir_db(sir_db_to_h1(x).unwrap());
            prop_assert!((back - x).abs() <= 1e-10);
            prop_assert!((back - x).abs() <= 1e-12 * x.max(1.0));
        }

        #[test]
        fn channel_rejects_out_of_model(h1 in 1.0f64..10.0, s in -10.0f64..-1e-12) {
            prop_assert!(ChannelParams::new(h1, 0.1).is_err());
            prop_assert!(ChannelParams::new(0.5, s).is_err());
        }
    }
}
