//! Horizontal distance between two BER curves.

use crate::error::{invalid, Error, Result};

/// A BER curve as `(x_db, ber)` points in increasing `x`.
pub type Curve = [(f64, f64)];

fn check(curve: &Curve, name: &'static str) -> Result<()> {
    if curve.len() < 2 {
        return Err(invalid("curve", format!("curve {name} needs at least two points")));
    }
    if let Some(&(x, b)) = curve.iter().find(|(x, b)| !x.is_finite() || !(*b > 0.0) || *b > 1.0) {
        return Err(invalid(
            "curve",
            format!("curve {name} has unusable point ({x}, {b}); BER must lie in (0, 1]"),
        ));
    }
    if curve.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(invalid("curve", format!("curve {name} is not sorted by x")));
    }
    let falling = curve.windows(2).all(|w| w[1].1 < w[0].1);
    let rising = curve.windows(2).all(|w| w[1].1 > w[0].1);
    if !falling && !rising {
        return Err(Error::NonMonotoneCurve(name));
    }
    Ok(())
}

fn range(curve: &Curve) -> (f64, f64) {
    let a = curve[0].1;
    let b = curve[curve.len() - 1].1;
    (a.min(b), a.max(b))
}

/// `x` at which the curve reaches `target`, interpolating linearly in
/// `log10(ber)` between neighbouring points.
fn crossing(curve: &Curve, target: f64) -> Option<f64> {
    let lt = target.log10();
    curve.windows(2).find_map(|w| {
        let (x0, b0) = w[0];
        let (x1, b1) = w[1];
        let (lo, hi) = (b0.min(b1), b0.max(b1));
        if target < lo || target > hi {
            return None;
        }
        let (l0, l1) = (b0.log10(), b1.log10());
        Some(x0 + (x1 - x0) * (lt - l0) / (l1 - l0))
    })
}

/// Horizontal gap `x_B - x_A` in dB at `target` BER.
///
/// Both curves must be strictly monotone in BER and contain `target` within
/// their range; nothing is extrapolated.
pub fn measure_db_gap(a: &Curve, b: &Curve, target: f64) -> Result<f64> {
    check(a, "A")?;
    check(b, "B")?;
    for c in [a, b] {
        let (min, max) = range(c);
        if !(target >= min && target <= max) {
            return Err(Error::TargetOutOfRange { target, min, max });
        }
    }
    let xa = crossing(a, target).expect("target inside a monotone curve's range");
    let xb = crossing(b, target).expect("target inside a monotone curve's range");
    Ok(xb - xa)
}

/// Powers of ten lying strictly inside the BER range of both curves, largest first.
pub fn decade_levels(a: &Curve, b: &Curve) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let (amin, amax) = range(a);
    let (bmin, bmax) = range(b);
    let lo = amin.max(bmin);
    let hi = amax.min(bmax);
    if !(lo > 0.0) || lo >= hi {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut e = hi.log10().ceil() as i32;
    loop {
        let level = 10f64.powi(e);
        if level <= lo {
            break;
        }
        if level < hi {
            out.push(level);
        }
        e -= 1;
    }
    out
}
