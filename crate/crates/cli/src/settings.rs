//! Option values merged from command-line flags and a `key = value` file.
//! Flags win over the file.

use std::collections::HashMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use qfisher::fisher::LimitPolicy;
use qfisher::{Error, Result, Tolerances};

const KNOWN_KEYS: &[&str] = &[
    "model",
    "theta",
    "out",
    "format",
    "projectors",
    "variant",
    "mix",
    "resolution",
    "range1",
    "range2",
    "axes",
    "fixed",
    "summary",
    "tol-hermitian",
    "tol-unitary",
    "tol-normalized",
    "tol-completeness",
    "tol-gram-schmidt",
    "tol-eps-orth",
    "tol-sat",
    "tol-gap",
    "tol-first-order",
    "tol-weak-comm",
    "p-floor",
    "limit-tol",
    "limit-steps",
    "audit-directions",
];

#[derive(Debug, Default, Clone)]
pub struct FileValues(HashMap<String, String>);

impl FileValues {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut map = HashMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidConfig(format!("config line {}: expected `key = value`", n + 1)))?;
            let key = k.trim().replace('_', "-");
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(Error::InvalidConfig(format!("config line {}: unknown key `{key}`", n + 1)));
            }
            map.insert(key, v.trim().to_string());
        }
        Ok(Self(map))
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    /// Flag value if given, else the parsed file value.
    pub fn pick<T>(&self, flag: Option<T>, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|e| Error::InvalidConfig(format!("config key `{key}`: {e}"))),
        }
    }
}

/// Tolerance and limit-policy flags shared by every subcommand.
#[derive(Debug, Default, Clone, clap::Args)]
pub struct NumericFlags {
    #[arg(long = "tol-hermitian")]
    pub tol_hermitian: Option<f64>,
    #[arg(long = "tol-unitary")]
    pub tol_unitary: Option<f64>,
    #[arg(long = "tol-normalized")]
    pub tol_normalized: Option<f64>,
    #[arg(long = "tol-completeness")]
    pub tol_completeness: Option<f64>,
    #[arg(long = "tol-gram-schmidt")]
    pub tol_gram_schmidt: Option<f64>,
    /// Overlap below which a projector counts as orthogonal to the state.
    #[arg(long = "tol-eps-orth")]
    pub tol_eps_orth: Option<f64>,
    /// Residual threshold for the saturation conditions.
    #[arg(long = "tol-sat")]
    pub tol_sat: Option<f64>,
    /// Gap below which F = F_Q is declared.
    #[arg(long = "tol-gap")]
    pub tol_gap: Option<f64>,
    #[arg(long = "tol-first-order")]
    pub tol_first_order: Option<f64>,
    #[arg(long = "tol-weak-comm")]
    pub tol_weak_comm: Option<f64>,
    /// Probability below which an outcome is resolved as a limit.
    #[arg(long = "p-floor")]
    pub p_floor: Option<f64>,
    /// Convergence tolerance of the limit extrapolation.
    #[arg(long = "limit-tol")]
    pub limit_tol: Option<f64>,
    /// Comma-separated decreasing path steps for the limit.
    #[arg(long = "limit-steps")]
    pub limit_steps: Option<String>,
    /// Compare limits along the coordinate axes (true/false).
    #[arg(long = "audit-directions")]
    pub audit_directions: Option<bool>,
}

impl NumericFlags {
    pub fn tolerances(&self, file: &FileValues) -> Result<Tolerances> {
        let mut t = Tolerances::default();
        let slots: [(&mut f64, Option<f64>, &str); 10] = [
            (&mut t.hermitian, self.tol_hermitian, "tol-hermitian"),
            (&mut t.unitary, self.tol_unitary, "tol-unitary"),
            (&mut t.normalized, self.tol_normalized, "tol-normalized"),
            (&mut t.completeness, self.tol_completeness, "tol-completeness"),
            (&mut t.gram_schmidt, self.tol_gram_schmidt, "tol-gram-schmidt"),
            (&mut t.eps_orth, self.tol_eps_orth, "tol-eps-orth"),
            (&mut t.tol_sat, self.tol_sat, "tol-sat"),
            (&mut t.gap_sat, self.tol_gap, "tol-gap"),
            (&mut t.first_order_zero, self.tol_first_order, "tol-first-order"),
            (&mut t.weak_commutativity, self.tol_weak_comm, "tol-weak-comm"),
        ];
        for (slot, flag, key) in slots {
            if let Some(v) = file.pick(flag, key)? {
                if !(v.is_finite() && v > 0.0) {
                    return Err(Error::InvalidConfig(format!("`{key}` must be positive")));
                }
                *slot = v;
            }
        }
        Ok(t)
    }

    pub fn policy(&self, file: &FileValues, tol: &Tolerances) -> Result<LimitPolicy> {
        let mut p = LimitPolicy {
            first_order_zero: tol.first_order_zero,
            ..LimitPolicy::default()
        };
        if let Some(v) = file.pick(self.p_floor, "p-floor")? {
            p.p_floor = v;
        }
        if let Some(v) = file.pick(self.limit_tol, "limit-tol")? {
            p.tolerance = v;
        }
        if let Some(v) = file.pick(self.limit_steps.clone(), "limit-steps")? {
            p.steps = parse_list(&v, "limit-steps")?;
        }
        if let Some(v) = file.pick(self.audit_directions, "audit-directions")? {
            p.audit_directions = v;
        }
        p.validate()?;
        Ok(p)
    }
}

/// Parses an angle such as `1.5`, `pi`, `-pi/2`, `2pi`, `0.5*pi`.
pub fn parse_angle(text: &str) -> Result<f64> {
    let bad = || Error::InvalidConfig(format!("cannot parse angle `{text}`"));
    let s = text.trim().to_ascii_lowercase().replace(' ', "");
    if let Ok(v) = s.parse::<f64>() {
        return if v.is_finite() { Ok(v) } else { Err(bad()) };
    }
    let (sign, body) = match s.strip_prefix('-') {
        Some(rest) => (-1.0, rest.to_string()),
        None => (1.0, s.trim_start_matches('+').to_string()),
    };
    let (num, den) = match body.split_once('/') {
        Some((n, d)) => (n.to_string(), d.parse::<f64>().map_err(|_| bad())?),
        None => (body, 1.0),
    };
    let coeff = match num.strip_suffix("pi") {
        Some("") => 1.0,
        Some(c) => c.trim_end_matches('*').parse::<f64>().map_err(|_| bad())?,
        None => return Err(bad()),
    };
    if den == 0.0 {
        return Err(bad());
    }
    Ok(sign * coeff * std::f64::consts::PI / den)
}

pub fn parse_angles(text: &str) -> Result<Vec<f64>> {
    text.split(',').map(parse_angle).collect()
}

pub fn parse_list<T: FromStr>(text: &str, what: &str) -> Result<Vec<T>> {
    text.split(',')
        .map(|p| {
            p.trim()
                .parse()
                .map_err(|_| Error::InvalidConfig(format!("`{what}`: cannot parse `{}`", p.trim())))
        })
        .collect()
}
