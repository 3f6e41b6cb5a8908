//! Closed-form interference, SINR and BER expressions for a BPSK link with one
//! misaligned BPSK interferer and rectangular pulses.
//!
//! All functions are pure. BER expressions require `sigma > 0`; the noiseless
//! case is handled combinatorially by the simulator instead.

mod quadrature;
mod special;

pub use quadrature::{integrate, integrate_unit_interval, Integral, MAX_DEPTH};
pub use special::q_function;

use crate::error::{invalid, Error, Result};
use crate::model::{ChannelParams, Misalignment};

/// Absolute tolerance used for every misalignment average.
pub const AVERAGE_ABS_TOL: f64 = 1e-12;

/// The four equiprobable interference values seen by a steady-state symbol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterferenceSupport {
    pub points: [f64; 4],
    pub probabilities: [f64; 4],
}

impl InterferenceSupport {
    pub fn new(params: ChannelParams, delta: Misalignment) -> Self {
        let h1 = params.h1();
        let inner = h1 * (1.0 - 2.0 * delta.value());
        Self {
            points: [h1, -h1, inner, -inner],
            probabilities: [0.25; 4],
        }
    }

    /// Support with coincident points merged, sorted by value.
    pub fn distinct(&self) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(4);
        for (&x, &p) in self.points.iter().zip(&self.probabilities) {
            match out.iter_mut().find(|(y, _)| *y == x) {
                Some(slot) => slot.1 += p,
                None => out.push((x, p)),
            }
        }
        out.sort_by(|a, b| a.0.total_cmp(&b.0));
        out
    }

    pub fn second_moment(&self) -> f64 {
        self.points
            .iter()
            .zip(&self.probabilities)
            .map(|(x, p)| p * x * x)
            .sum()
    }
}

/// Mean-square interference at the matched-filter output: `h1^2 (2δ^2 - 2δ + 1)`.
pub fn effective_interference_power(params: ChannelParams, delta: Misalignment) -> f64 {
    let d = delta.value();
    params.h1() * params.h1() * (2.0 * d * d - 2.0 * d + 1.0)
}

/// SINR that ignores symbol timing: `1 / (h1^2 + σ^2)`.
pub fn conventional_sinr(params: ChannelParams) -> Result<f64> {
    let denom = params.h1() * params.h1() + params.sigma() * params.sigma();
    if denom == 0.0 {
        return Err(Error::ZeroPower);
    }
    Ok(1.0 / denom)
}

/// SINR computed with the effective interference power.
pub fn esinr(params: ChannelParams, delta: Misalignment) -> Result<f64> {
    let denom = effective_interference_power(params, delta) + params.sigma() * params.sigma();
    if denom == 0.0 {
        return Err(Error::ZeroPower);
    }
    Ok(1.0 / denom)
}

fn noisy_sigma(params: ChannelParams) -> Result<f64> {
    if params.sigma() == 0.0 {
        Err(Error::DegenerateNoise)
    } else {
        Ok(params.sigma())
    }
}

/// Error probability of the first symbol in a block, which only overlaps the
/// leading `1 - δ` of the first interferer symbol.
pub fn ber_first_symbol(params: ChannelParams, delta: Misalignment) -> Result<f64> {
    let sigma = noisy_sigma(params)?;
    let i = params.h1() * (1.0 - delta.value());
    Ok(0.5 * (q_function((1.0 - i) / sigma) + q_function((1.0 + i) / sigma)))
}

/// Error probability of every symbol after the first.
pub fn ber_steady_state(params: ChannelParams, delta: Misalignment) -> Result<f64> {
    let sigma = noisy_sigma(params)?;
    let h1 = params.h1();
    let inner = h1 * (1.0 - 2.0 * delta.value());
    Ok(0.25
        * (q_function((1.0 - h1) / sigma)
            + q_function((1.0 + h1) / sigma)
            + q_function((1.0 - inner) / sigma)
            + q_function((1.0 + inner) / sigma)))
}

/// Block-average BER for a block of `n` symbols at constant misalignment.
pub fn ber_block(params: ChannelParams, delta: Misalignment, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(invalid("n", "block length must be >= 1"));
    }
    let first = ber_first_symbol(params, delta)?;
    let rest = ber_steady_state(params, delta)?;
    let n = n as f64;
    Ok(first / n + rest * (n - 1.0) / n)
}

/// eSINR averaged uniformly over δ ∈ [0, 1], in closed form.
pub fn avg_esinr_closed(params: ChannelParams) -> Result<f64> {
    let h2 = params.h1() * params.h1();
    let s2 = params.sigma() * params.sigma();
    if h2 == 0.0 {
        return if s2 == 0.0 {
            Err(Error::ZeroPower)
        } else {
            Ok(1.0 / s2)
        };
    }
    let spread = h2 + 2.0 * s2;
    Ok((4.0 / (spread * h2)).sqrt() * (h2 / spread).sqrt().atan())
}

/// eSINR averaged over δ by numerical quadrature, the independent route to
/// [`avg_esinr_closed`].
pub fn avg_esinr_quadrature(params: ChannelParams) -> Result<f64> {
    esinr(params, Misalignment::ALIGNED)?;
    integrate_unit_interval(
        |d| {
            let p = params.h1() * params.h1() * (2.0 * d * d - 2.0 * d + 1.0);
            1.0 / (p + params.sigma() * params.sigma())
        },
        AVERAGE_ABS_TOL,
    )
}

/// Steady-state BER averaged uniformly over δ ∈ [0, 1].
///
/// The two outer-point terms do not depend on δ; the inner pair is symmetric
/// under δ → 1 - δ and collapses to a single integral.
pub fn avg_ber(params: ChannelParams) -> Result<f64> {
    let sigma = noisy_sigma(params)?;
    let h1 = params.h1();
    let inner = integrate_unit_interval(
        |d| q_function((1.0 - h1 * (1.0 - 2.0 * d)) / sigma),
        AVERAGE_ABS_TOL,
    )?;
    Ok(0.25 * q_function((1.0 - h1) / sigma) + 0.25 * q_function((1.0 + h1) / sigma) + 0.5 * inner)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ch(h1: f64, sigma: f64) -> ChannelParams {
        ChannelParams::new(h1, sigma).unwrap()
    }

    fn md(d: f64) -> Misalignment {
        Misalignment::new(d).unwrap()
    }

    // h1 = 0.631, sigma = 0.3162; reference values from a 30-digit evaluation
    // of the Gaussian tail.
    const H1: f64 = 0.631;
    const SIGMA: f64 = 0.3162;
    const BER_D0: f64 = 0.060_804_378_936_378_97;
    const BER_D05: f64 = 0.030_793_166_981_263_02;
    const FIRST_D05: f64 = 0.007_609_286_731_286_311;
    const AVG_BER: f64 = 0.037_919_949_461_014_56;

    #[test]
    fn interference_power_points() {
        assert_eq!(effective_interference_power(ch(0.5, 0.1), md(0.0)), 0.25);
        assert!((effective_interference_power(ch(0.999_999, 0.1), md(0.5)) / 0.999_999f64.powi(2) - 0.5).abs() < 1e-15);
        assert!((effective_interference_power(ch(0.8, 0.0), md(0.25)) - 0.64 * 0.625).abs() < 1e-15);
    }

    #[test]
    fn esinr_points() {
        let p = ch(0.3981f64.sqrt(), 0.1f64.sqrt());
        assert!((esinr(p, md(0.0)).unwrap() - 2.007_628_990_162_618).abs() < 1e-12);
        assert!((esinr(p, md(0.5)).unwrap() - 3.343_922_420_999_833).abs() < 1e-12);
        assert!((esinr(p, md(0.3)).unwrap() - esinr(p, md(0.7)).unwrap()).abs() < 1e-14);
        assert_eq!(esinr(p, md(0.0)).unwrap(), conventional_sinr(p).unwrap());
        assert!(matches!(esinr(ch(0.0, 0.0), md(0.2)), Err(Error::ZeroPower)));
        assert!(matches!(conventional_sinr(ch(0.0, 0.0)), Err(Error::ZeroPower)));
        assert_eq!(conventional_sinr(ch(0.0, 1.0)).unwrap(), 1.0);
    }

    #[test]
    fn first_symbol() {
        let s = 0.4;
        let awgn = q_function(1.0 / s);
        for d in [0.0, 0.3, 0.9] {
            assert_eq!(ber_first_symbol(ch(0.0, s), md(d)).unwrap(), awgn);
        }
        let near_one = ber_first_symbol(ch(0.7, s), md(1.0 - 1e-12)).unwrap();
        assert!((near_one - awgn).abs() < 1e-11);
        assert!((ber_first_symbol(ch(H1, SIGMA), md(0.0)).unwrap() - BER_D0).abs() < 1e-15);
        assert!((ber_first_symbol(ch(H1, SIGMA), md(0.5)).unwrap() - FIRST_D05).abs() < 1e-15);
        assert!(matches!(ber_first_symbol(ch(0.5, 0.0), md(0.0)), Err(Error::DegenerateNoise)));
    }

    #[test]
    fn steady_state() {
        let p = ch(H1, SIGMA);
        assert!((ber_steady_state(p, md(0.0)).unwrap() - BER_D0).abs() < 1e-15);
        assert!((ber_steady_state(p, md(0.5)).unwrap() - BER_D05).abs() < 1e-15);
        assert_eq!(ber_steady_state(ch(0.0, 0.5), md(0.37)).unwrap(), q_function(2.0));
        assert!(ber_steady_state(ch(0.5, 0.0), md(0.1)).is_err());
    }

    #[test]
    fn block() {
        let p = ch(H1, SIGMA);
        assert_eq!(ber_block(p, md(0.3), 1).unwrap(), ber_first_symbol(p, md(0.3)).unwrap());
        let two = ber_block(p, md(0.5), 2).unwrap();
        assert!((two - 0.5 * (FIRST_D05 + BER_D05)).abs() < 1e-15);
        // the first-symbol term carries its own factor 1/2, so this is not 0.0231
        assert!((two - 0.019_201_226_856_274_67).abs() < 1e-12);
        for n in [10usize, 1_000, 1_000_000] {
            let gap = (ber_block(p, md(0.2), n).unwrap() - ber_steady_state(p, md(0.2)).unwrap()).abs();
            assert!(gap <= 1.0 / n as f64);
        }
        assert!(ber_block(p, md(0.5), 0).is_err());
    }

    #[test]
    fn averaged_esinr() {
        let p = ch(0.3981f64.sqrt(), 0.1f64.sqrt());
        // adaptive-quadrature reference
        assert!((avg_esinr_closed(p).unwrap() - 2.804_868_427_941_277).abs() < 1e-12);
        assert!((avg_esinr_quadrature(p).unwrap() - avg_esinr_closed(p).unwrap()).abs() < 1e-10);
        let tiny = avg_esinr_closed(ch(1e-9, 0.5)).unwrap();
        assert!((tiny - 4.0).abs() < 1e-9);
        assert_eq!(avg_esinr_closed(ch(0.0, 0.5)).unwrap(), 4.0);
        assert!(avg_esinr_closed(ch(0.0, 0.0)).is_err());
        // noiseless limit: mean of 1/(2δ²-2δ+1) over [0,1] is π/2
        let noiseless = avg_esinr_closed(ch(0.5, 0.0)).unwrap();
        assert!((noiseless * 0.25 - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn averaged_ber() {
        let p = ch(H1, SIGMA);
        assert!((avg_ber(p).unwrap() - AVG_BER).abs() < 1e-13);
        assert!((avg_ber(ch(0.0, 0.4)).unwrap() - q_function(2.5)).abs() < 1e-13);
        let lo = ber_steady_state(p, md(0.5)).unwrap();
        let hi = ber_steady_state(p, md(0.0)).unwrap();
        let avg = avg_ber(p).unwrap();
        assert!(lo <= avg && avg <= hi);
        assert!(avg_ber(ch(0.3, 0.0)).is_err());
    }

    #[test]
    fn support_shape() {
        let s = InterferenceSupport::new(ch(0.6, 0.1), md(0.0));
        assert_eq!(s.distinct(), vec![(-0.6, 0.5), (0.6, 0.5)]);
        let s = InterferenceSupport::new(ch(0.6, 0.1), md(0.25));
        assert_eq!(s.distinct().len(), 4);
        assert_eq!(s.probabilities.iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn steady_state_extremes_on_grid() {
        // Extremality is checked numerically: minimum at 0.5, maximum at 0.
        let p = ch(0.7, 0.35);
        let at = |d: f64| ber_steady_state(p, md(d)).unwrap();
        for i in 0..1000 {
            let d = i as f64 / 1000.0;
            assert!(at(d) >= at(0.5) - 1e-16);
            assert!(at(d) <= at(0.0) + 1e-16);
        }
    }

    proptest! {
        #[test]
        fn power_bounded_and_symmetric(h1 in 0.0f64..0.999, d in 0.0f64..1.0) {
            let p = ch(h1, 0.1);
            let pi = effective_interference_power(p, md(d));
            prop_assert!(pi <= h1 * h1 + 1e-16);
            prop_assert!(pi >= 0.5 * h1 * h1 - 1e-16);
            if d > 0.0 {
                let mirror = effective_interference_power(p, md(1.0 - d));
                prop_assert!((pi - mirror).abs() <= 1e-15);
                if h1 > 0.0 && d > 1e-6 && d < 1.0 - 1e-6 {
                    prop_assert!(pi < h1 * h1);
                }
            }
        }

        #[test]
        fn support_second_moment(h1 in 0.0f64..0.999, d in 0.0f64..1.0) {
            let p = ch(h1, 0.2);
            let s = InterferenceSupport::new(p, md(d));
            prop_assert!((s.second_moment() - effective_interference_power(p, md(d))).abs() <= 1e-15);
        }

        #[test]
        fn steady_state_symmetric_and_monotone(h1 in 0.01f64..0.99, s in 0.05f64..2.0, i in 1usize..500) {
            let p = ch(h1, s);
            let d = i as f64 / 1000.0;
            let a = ber_steady_state(p, md(d)).unwrap();
            let b = ber_steady_state(p, md(1.0 - d)).unwrap();
            prop_assert!((a - b).abs() <= 1e-15);
            let next = ber_steady_state(p, md(d + 0.001)).unwrap();
            prop_assert!(next <= a + 1e-16);
        }

        #[test]
        fn closed_average_matches_quadrature(h1 in 1e-3f64..0.999, s in 0.01f64..3.0) {
            let p = ch(h1, s);
            let closed = avg_esinr_closed(p).unwrap();
            let quad = avg_esinr_quadrature(p).unwrap();
            prop_assert!((closed - quad).abs() <= 1e-10, "{} vs {}", closed, quad);
            prop_assert!(esinr(p, md(0.0)).unwrap() < closed);
            prop_assert!(closed < esinr(p, md(0.5)).unwrap());
        }

        #[test]
        fn conventional_equals_aligned(h1 in 0.0f64..0.999, s in 0.0f64..3.0) {
            prop_assume!(h1 > 0.0 || s > 0.0);
            let p = ch(h1, s);
            prop_assert_eq!(conventional_sinr(p).unwrap(), esinr(p, Misalignment::ALIGNED).unwrap());
        }
    }
}
