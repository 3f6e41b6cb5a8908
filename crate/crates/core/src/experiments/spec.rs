//! Flat `key = value` experiment descriptions.
//!
//! One key per line, `#` starts a comment, blank lines are ignored. Lists are
//! comma-separated; a numeric list may also be written `start:step:end`
//! (inclusive). Unknown and repeated keys are errors.
//!
//! ```text
//! experiment = custom
//! axis = sir
//! values = 2:2:12
//! snr_db = 10
//! schemes = conv, a
//! deltas = 0, 0.5
//! n = 1000
//! blocks = 1000
//! seed = 7
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{invalid, Error, Result};
use crate::model::{ChannelParams, Misalignment};
use crate::simulation::SchemeKind;

/// Figure presets shipped with the crate.
pub const FIG2: &str = include_str!("../../../../specs/fig2.spec");
pub const FIG3: &str = include_str!("../../../../specs/fig3.spec");
pub const FIG4: &str = include_str!("../../../../specs/fig4.spec");
pub const FIG5: &str = include_str!("../../../../specs/fig5.spec");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentId {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Custom,
}

impl ExperimentId {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentId::Fig2 => "fig2",
            ExperimentId::Fig3 => "fig3",
            ExperimentId::Fig4 => "fig4",
            ExperimentId::Fig5 => "fig5",
            ExperimentId::Custom => "custom",
        }
    }

    /// Embedded preset text, if this is a figure id.
    pub fn preset(&self) -> Option<&'static str> {
        match self {
            ExperimentId::Fig2 => Some(FIG2),
            ExperimentId::Fig3 => Some(FIG3),
            ExperimentId::Fig4 => Some(FIG4),
            ExperimentId::Fig5 => Some(FIG5),
            ExperimentId::Custom => None,
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig2" => Ok(ExperimentId::Fig2),
            "fig3" => Ok(ExperimentId::Fig3),
            "fig4" => Ok(ExperimentId::Fig4),
            "fig5" => Ok(ExperimentId::Fig5),
            "custom" => Ok(ExperimentId::Custom),
            other => Err(invalid(
                "experiment",
                format!("unknown id {other:?} (fig2, fig3, fig4, fig5 or custom)"),
            )),
        }
    }
}

/// Which ratio the sweep varies; the other one stays fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Sir,
    Snr,
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sir" | "sir_db" => Ok(SweepAxis::Sir),
            "snr" | "snr_db" => Ok(SweepAxis::Snr),
            other => Err(invalid("axis", format!("{other:?} is neither sir nor snr"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeChoice {
    Conventional,
    A,
    B,
}

impl SchemeChoice {
    pub fn label(&self) -> &'static str {
        match self {
            SchemeChoice::Conventional => "conv",
            SchemeChoice::A => "a",
            SchemeChoice::B => "b",
        }
    }

    pub fn kind(&self, delta: Misalignment, k: u32) -> SchemeKind {
        match self {
            SchemeChoice::Conventional => SchemeKind::Fixed(delta),
            SchemeChoice::A => SchemeKind::SchemeA,
            SchemeChoice::B => SchemeKind::SchemeB { k },
        }
    }
}

impl FromStr for SchemeChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "conv" | "conventional" => Ok(SchemeChoice::Conventional),
            "a" | "A" => Ok(SchemeChoice::A),
            "b" | "B" => Ok(SchemeChoice::B),
            other => Err(invalid("scheme", format!("{other:?} is not one of conv, a, b"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub id: ExperimentId,
    pub axis: SweepAxis,
    /// Sweep values in dB along `axis`.
    pub values: Vec<f64>,
    /// The ratio held fixed, in dB.
    pub fixed_db: f64,
    /// Offsets for conventional rows.
    pub deltas: Vec<f64>,
    pub schemes: Vec<SchemeChoice>,
    pub n: usize,
    /// Scheme B maximum draw.
    pub k: u32,
    /// Monte Carlo blocks per row; 0 means analytic values only.
    pub blocks: u64,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

impl ExperimentSpec {
    pub fn preset(id: ExperimentId) -> Result<Self> {
        let text = id
            .preset()
            .ok_or_else(|| invalid("experiment", "custom experiments have no preset"))?;
        Self::parse(text, Path::new(id.as_str()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, path)
    }

    /// Parses and validates. `origin` only labels error messages.
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let syntax = |line: usize, reason: String| Error::SpecSyntax {
            path: origin.to_path_buf(),
            line,
            reason,
        };
        let mut id = None;
        let mut axis = None;
        let mut values = None;
        let mut sir = None;
        let mut snr = None;
        let mut deltas = None;
        let mut schemes = None;
        let mut n = None;
        let mut k = None;
        let mut blocks = None;
        let mut seed = None;
        let mut out = None;

        fn set<T>(slot: &mut Option<T>, v: T, key: &str) -> std::result::Result<(), String> {
            if slot.is_some() {
                return Err(format!("key {key:?} appears twice"));
            }
            *slot = Some(v);
            Ok(())
        }

        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| syntax(line_no, format!("expected `key = value`, got {line:?}")))?;
            let key = key.trim();
            let value = value.trim();
            let field = |e: Error| syntax(line_no, e.to_string());
            let r = match key {
                "experiment" => set(&mut id, value.parse::<ExperimentId>().map_err(field)?, key),
                "axis" => set(&mut axis, value.parse::<SweepAxis>().map_err(field)?, key),
                "values" => set(&mut values, parse_list(value).map_err(field)?, key),
                "sir_db" => set(&mut sir, parse_num::<f64>("sir_db", value).map_err(field)?, key),
                "snr_db" => set(&mut snr, parse_num::<f64>("snr_db", value).map_err(field)?, key),
                "deltas" => set(&mut deltas, parse_list(value).map_err(field)?, key),
                "schemes" => set(
                    &mut schemes,
                    split_list(value)
                        .map(str::parse::<SchemeChoice>)
                        .collect::<Result<Vec<_>>>()
                        .map_err(field)?,
                    key,
                ),
                "n" => set(&mut n, parse_num::<usize>("n", value).map_err(field)?, key),
                "k" => set(&mut k, parse_num::<u32>("k", value).map_err(field)?, key),
                "blocks" => set(&mut blocks, parse_num::<u64>("blocks", value).map_err(field)?, key),
                "seed" => set(&mut seed, parse_num::<u64>("seed", value).map_err(field)?, key),
                "out" => set(&mut out, PathBuf::from(value), key),
                other => Err(format!("unknown key {other:?}")),
            };
            r.map_err(|reason| syntax(line_no, reason))?;
        }

        let missing = |name: &'static str| invalid(name, "missing from spec");
        let axis = axis.ok_or_else(|| missing("axis"))?;
        let fixed_db = match axis {
            SweepAxis::Sir => {
                if sir.is_some() {
                    return Err(invalid("sir_db", "is the sweep axis and cannot also be fixed"));
                }
                snr.ok_or_else(|| missing("snr_db"))?
            }
            SweepAxis::Snr => {
                if snr.is_some() {
                    return Err(invalid("snr_db", "is the sweep axis and cannot also be fixed"));
                }
                sir.ok_or_else(|| missing("sir_db"))?
            }
        };
        let schemes = schemes.unwrap_or_else(|| vec![SchemeChoice::Conventional]);
        let spec = Self {
            id: id.unwrap_or(ExperimentId::Custom),
            axis,
            values: values.ok_or_else(|| missing("values"))?,
            fixed_db,
            deltas: deltas.unwrap_or_default(),
            schemes,
            n: n.unwrap_or(1000),
            k: k.unwrap_or(16),
            blocks: blocks.unwrap_or(0),
            seed: seed.unwrap_or(1),
            out,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Field-level checks; run again after applying command-line overrides.
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(invalid("values", "sweep list is empty"));
        }
        if let Some(v) = self.values.iter().find(|v| !v.is_finite()) {
            return Err(invalid("values", format!("{v} is not finite")));
        }
        if let Some(w) = self.values.windows(2).find(|w| w[1] <= w[0]) {
            return Err(invalid(
                "values",
                format!("must be strictly increasing ({} then {})", w[0], w[1]),
            ));
        }
        if !self.fixed_db.is_finite() {
            return Err(invalid("fixed ratio", format!("{} dB is not finite", self.fixed_db)));
        }
        // every point must map onto a valid channel
        for &v in &self.values {
            self.params_at(v)?;
        }
        if self.schemes.is_empty() {
            return Err(invalid("schemes", "no scheme selected"));
        }
        for (i, s) in self.schemes.iter().enumerate() {
            if self.schemes[..i].contains(s) {
                return Err(invalid("schemes", format!("{} listed twice", s.label())));
            }
        }
        if self.schemes.contains(&SchemeChoice::Conventional) {
            if self.deltas.is_empty() {
                return Err(invalid("deltas", "conventional rows need at least one offset"));
            }
            for &d in &self.deltas {
                Misalignment::new(d)?;
            }
        }
        if self.n == 0 {
            return Err(invalid("n", "block length must be >= 1"));
        }
        if self.schemes.contains(&SchemeChoice::B) && self.k as usize > self.n {
            return Err(invalid("k", format!("K = {} exceeds block length {}", self.k, self.n)));
        }
        Ok(())
    }

    /// `(sir_db, snr_db)` at one sweep value.
    pub fn point(&self, value: f64) -> (f64, f64) {
        match self.axis {
            SweepAxis::Sir => (value, self.fixed_db),
            SweepAxis::Snr => (self.fixed_db, value),
        }
    }

    pub fn params_at(&self, value: f64) -> Result<ChannelParams> {
        let (sir, snr) = self.point(value);
        ChannelParams::from_db(sir, snr)
    }
}

fn split_list(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty())
}

fn parse_num<T: FromStr>(name: &'static str, s: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| invalid(name, format!("cannot parse {s:?}")))
}

/// Comma list, or an inclusive `start:step:end` range.
pub fn parse_list(value: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = value.split(':').map(str::trim).collect();
    match parts.as_slice() {
        [single] => split_list(single).map(|s| parse_num("list", s)).collect(),
        [start, step, end] => {
            let start: f64 = parse_num("range start", start)?;
            let step: f64 = parse_num("range step", step)?;
            let end: f64 = parse_num("range end", end)?;
            if !(step > 0.0) || !start.is_finite() || !end.is_finite() || end < start {
                return Err(invalid("range", format!("{value:?} is not an increasing range")));
            }
            let count = ((end - start) / step + 1e-9).floor() as usize;
            Ok((0..=count)
                .map(|i| {
                    let x = start + i as f64 * step;
                    // clean up accumulated binary noise, e.g. 0.30000000000000004
                    (x * 1e9).round() / 1e9
                })
                .collect())
        }
        _ => Err(invalid("list", format!("{value:?} is neither a list nor start:step:end"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = "\
# comment line
experiment = custom
axis = sir   # trailing comment
values = 2:2:12
snr_db = 10
deltas = 0, 0.5
schemes = conv, a
blocks = 5
";

    fn parse(text: &str) -> Result<ExperimentSpec> {
        ExperimentSpec::parse(text, Path::new("test.spec"))
    }

    #[test]
    fn parses_basic_spec() {
        let s = parse(BASIC).unwrap();
        assert_eq!(s.id, ExperimentId::Custom);
        assert_eq!(s.axis, SweepAxis::Sir);
        assert_eq!(s.values, vec![2.0, 4.0, 6.0, 8.0, 10.0, 12.0]);
        assert_eq!(s.fixed_db, 10.0);
        assert_eq!(s.deltas, vec![0.0, 0.5]);
        assert_eq!(s.schemes, vec![SchemeChoice::Conventional, SchemeChoice::A]);
        assert_eq!((s.n, s.k, s.blocks, s.seed), (1000, 16, 5, 1));
        assert_eq!(s.point(4.0), (4.0, 10.0));
    }

    #[test]
    fn range_is_clean() {
        assert_eq!(parse_list("0:0.1:0.5").unwrap(), vec![0.0, 0.1, 0.2, 0.3, 0.4, 0.5]);
        assert_eq!(parse_list("5:1:15").unwrap().len(), 11);
        assert!(parse_list("3:0:5").is_err());
        assert!(parse_list("5:1:3").is_err());
        assert!(parse_list("1:2").is_err());
    }

    #[test]
    fn presets_parse() {
        for id in [ExperimentId::Fig2, ExperimentId::Fig3, ExperimentId::Fig4, ExperimentId::Fig5] {
            let s = ExperimentSpec::preset(id).unwrap();
            assert_eq!(s.id, id);
        }
        assert!(ExperimentSpec::preset(ExperimentId::Custom).is_err());
    }

    #[test]
    fn empty_sweep_rejected() {
        let text = BASIC.replace("values = 2:2:12", "values =");
        let err = parse(&text).unwrap_err();
        assert!(err.to_string().contains("values"), "{err}");
    }

    #[test]
    fn field_level_errors() {
        let cases = [
            ("values = 2:2:12", "values = 4, 2", "values"),
            ("values = 2:2:12", "values = 0, 2", "sir_db"),
            ("values = 2:2:12", "values = 2, inf", "values"),
            ("deltas = 0, 0.5", "deltas = 1.0", "delta"),
            ("blocks = 5", "blocks = -1", "blocks"),
            ("schemes = conv, a", "schemes = conv, c", "scheme"),
            ("schemes = conv, a", "schemes = a, a", "schemes"),
            ("axis = sir", "axis = time", "axis"),
        ];
        for (from, to, needle) in cases {
            let err = parse(&BASIC.replace(from, to)).unwrap_err();
            assert!(err.to_string().contains(needle), "{to}: {err}");
        }
    }

    #[test]
    fn syntax_errors_carry_line() {
        let err = parse(&format!("{BASIC}bogus = 1\n")).unwrap_err();
        match err {
            Error::SpecSyntax { line, reason, .. } => {
                assert_eq!(line, 9);
                assert!(reason.contains("bogus"));
            }
            e => panic!("{e}"),
        }
        assert!(matches!(parse(&format!("{BASIC}n = 1\nn = 2\n")), Err(Error::SpecSyntax { .. })));
        assert!(matches!(parse(&format!("{BASIC}no equals\n")), Err(Error::SpecSyntax { .. })));
    }

    #[test]
    fn axis_conflicts() {
        let text = BASIC.replace("snr_db = 10", "sir_db = 10");
        assert!(parse(&text).is_err());
        let text = format!("{BASIC}sir_db = 3\n");
        assert!(parse(&text).is_err());
    }

    #[test]
    fn k_bounded_by_n() {
        let text = BASIC.replace("schemes = conv, a", "schemes = b\nn = 8\nk = 9");
        assert!(parse(&text).unwrap_err().to_string().contains("K = 9"));
    }
}
