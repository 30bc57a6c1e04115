//! Plain `key = value` run configuration.
//!
//! One entry per line; `#` starts a comment. Unknown and repeated keys are
//! rejected. Reals accept `a/b` and `b^e` besides decimal notation, lists are
//! comma separated.

use std::fmt;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use nlpml::integrate::HalfStepRule;
use nlpml::presets::{Example, DEFAULT_C0, DEFAULT_TAU, OMEGA_PER_MU};
use nlpml::reference::default_halfwidth;
use nlpml::stretch::AbsorberProfile;
use nlpml::{Complex64, KernelKind};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: `{key}` is given twice")]
    Duplicate { line: usize, key: String },
    #[error("`{key}`: {reason} (got `{value}`)")]
    Value { key: String, value: String, reason: String },
    #[error("`{0}` is required for a custom example")]
    Missing(&'static str),
}

type Result<T> = std::result::Result<T, ConfigError>;

pub const KEYS: &[&str] = &[
    "example",
    "kernel",
    "l",
    "d_p",
    "delta",
    "h",
    "tau",
    "T",
    "z_re",
    "z_im",
    "m",
    "omega",
    "mu",
    "nu",
    "c0",
    "snapshot_times",
    "reference",
    "ref_halfwidth",
    "ref_h",
    "local_ref_h",
    "quad_order",
    "conjugate_pairs",
    "half_step",
    "h_list",
    "delta_list",
    "ratio_list",
    "output_dir",
];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Entry {
    pub line: usize,
    pub key: String,
    pub value: String,
}

/// Splits a config file into entries, checking keys but not values.
pub fn parse_entries(text: &str) -> Result<Vec<Entry>> {
    let mut out: Vec<Entry> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (key, value) = body.split_once('=').ok_or(ConfigError::Syntax { line })?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() {
            return Err(ConfigError::Syntax { line });
        }
        if !KEYS.contains(&key) {
            return Err(ConfigError::UnknownKey { line, key: key.to_string() });
        }
        if out.iter().any(|e| e.key == key) {
            return Err(ConfigError::Duplicate { line, key: key.to_string() });
        }
        out.push(Entry { line, key: key.to_string(), value: value.to_string() });
    }
    Ok(out)
}

fn bad(key: &str, value: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Value { key: key.to_string(), value: value.to_string(), reason: reason.into() }
}

/// A real number: decimal, `a/b` or `b^e`.
pub fn parse_real(key: &str, value: &str) -> Result<f64> {
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad(key, value, "not a number"));
    let v = if let Some((a, b)) = value.split_once('/') {
        num(a)? / num(b)?
    } else if let Some((b, e)) = value.split_once('^') {
        num(b)?.powf(num(e)?)
    } else {
        num(value)?
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad(key, value, "not finite"))
    }
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>> {
    if value.is_empty() {
        return Ok(Vec::new());
    }
    value.split(',').map(|s| parse_real(key, s.trim())).collect()
}

fn parse_uint(key: &str, value: &str) -> Result<usize> {
    value.parse::<usize>().map_err(|_| bad(key, value, "not a nonnegative integer"))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(bad(key, value, "expected true or false")),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExampleChoice {
    Preset(Example),
    /// Zero initial data and no source; geometry and kernel from the file.
    Custom,
}

impl fmt::Display for ExampleChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExampleChoice::Preset(e) => write!(f, "{e}"),
            ExampleChoice::Custom => f.write_str("custom"),
        }
    }
}

/// Solution plotted next to the PML run in snapshot files.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ReferenceKind {
    #[default]
    None,
    /// Nonlocal problem on a large domain without absorber.
    Nonlocal,
    /// Local PML system of the `δ → 0` limit.
    Local,
}

impl FromStr for ReferenceKind {
    type Err = ();

    fn from_str(s: &str) -> std::result::Result<Self, ()> {
        match s {
            "none" => Ok(Self::None),
            "nonlocal" => Ok(Self::Nonlocal),
            "local" => Ok(Self::Local),
            _ => Err(()),
        }
    }
}

impl fmt::Display for ReferenceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::None => "none",
            Self::Nonlocal => "nonlocal",
            Self::Local => "local",
        })
    }
}

fn kernel_name(k: KernelKind) -> &'static str {
    match k {
        KernelKind::Exponential => "exponential",
        KernelKind::Gaussian => "gaussian",
        KernelKind::Inhomogeneous => "inhomogeneous",
        KernelKind::Custom => "custom",
    }
}

fn half_step_name(r: HalfStepRule) -> &'static str {
    match r {
        HalfStepRule::WithCorrection => "with_correction",
        HalfStepRule::Literal => "literal",
    }
}

/// Fully resolved parameters; every default has been filled in.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub example: ExampleChoice,
    pub kernel: KernelKind,
    pub l: f64,
    pub d_p: f64,
    pub delta: f64,
    pub h: f64,
    pub tau: f64,
    pub t_final: f64,
    pub z: Complex64,
    pub m: usize,
    /// `m` is below the preset's node count.
    pub m_reduced: bool,
    pub omega: f64,
    pub mu: f64,
    pub nu: f64,
    pub c0: f64,
    pub snapshot_times: Vec<f64>,
    pub reference: ReferenceKind,
    pub ref_halfwidth: f64,
    /// Mesh of the nonlocal reference.
    pub ref_h: f64,
    /// Mesh of the local PML reference.
    pub local_ref_h: f64,
    pub quad_order: usize,
    pub conjugate_pairs: bool,
    pub half_step: HalfStepRule,
    pub h_list: Vec<f64>,
    pub delta_list: Vec<f64>,
    pub ratio_list: Vec<usize>,
    pub output_dir: PathBuf,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let entries = parse_entries(text)?;
        let get = |k: &str| entries.iter().find(|e| e.key == k).map(|e| e.value.as_str());
        let real = |k: &'static str| get(k).map(|v| parse_real(k, v)).transpose();

        let example = match get("example").unwrap_or("ex1") {
            "custom" => ExampleChoice::Custom,
            other => ExampleChoice::Preset(other.parse().map_err(|_| bad("example", other, "expected ex1, ex2, ex3 or custom"))?),
        };
        let kernel = match get("kernel") {
            Some("exponential") => KernelKind::Exponential,
            Some("gaussian") => KernelKind::Gaussian,
            Some("inhomogeneous") => KernelKind::Inhomogeneous,
            Some(other) => return Err(bad("kernel", other, "expected exponential, gaussian or inhomogeneous")),
            None => match example {
                ExampleChoice::Preset(e) => e.kernel_kind(),
                ExampleChoice::Custom => return Err(ConfigError::Missing("kernel")),
            },
        };
        let preset = match example {
            ExampleChoice::Preset(e) => Some(e.defaults()),
            ExampleChoice::Custom => None,
        };
        let need = |k: &'static str, v: Option<f64>, p: Option<f64>| v.or(p).ok_or(ConfigError::Missing(k));
        let l = need("l", real("l")?, preset.map(|d| d.l))?;
        let d_p = need("d_p", real("d_p")?, preset.map(|d| d.d_p))?;
        let t_final = need("T", real("T")?, preset.map(|d| d.t_final))?;
        let z_re = need("z_re", real("z_re")?, preset.map(|d| d.z))?;
        let z = Complex64::new(z_re, real("z_im")?.unwrap_or(0.0));
        let preset_m = preset.map(|d| d.m).unwrap_or(400);
        let m = get("m").map(|v| parse_uint("m", v)).transpose()?.unwrap_or(preset_m);
        let mu_per_z = preset.map(|d| d.mu_per_z).unwrap_or(if kernel == KernelKind::Exponential { 0.5 } else { 1.0 });
        let mu = match real("mu")? {
            Some(v) => v,
            None if z.norm() > 0.0 => mu_per_z * z.norm(),
            None => 1.0,
        };
        let omega = real("omega")?.unwrap_or(OMEGA_PER_MU * mu);
        let nu = real("nu")?.unwrap_or(preset.map(|d| d.nu).unwrap_or(1.0));
        let delta = real("delta")?.unwrap_or(0.5);
        let h = real("h")?.unwrap_or(1.0 / 32.0);
        let tau = real("tau")?.unwrap_or(DEFAULT_TAU);
        let c0 = real("c0")?.unwrap_or(DEFAULT_C0);
        let snapshot_times = match get("snapshot_times") {
            Some(v) => parse_list("snapshot_times", v)?,
            None => vec![t_final],
        };
        let reference = match get("reference") {
            Some(v) => v.parse().map_err(|_| bad("reference", v, "expected none, nonlocal or local"))?,
            None => ReferenceKind::None,
        };
        let h_list = match get("h_list") {
            Some(v) => parse_list("h_list", v)?,
            None => vec![h],
        };
        let delta_list = match get("delta_list") {
            Some(v) => parse_list("delta_list", v)?,
            None => vec![delta],
        };
        let ratio_list = match get("ratio_list") {
            Some("") => Vec::new(),
            Some(v) => v.split(',').map(|s| parse_uint("ratio_list", s.trim())).collect::<Result<_>>()?,
            None => vec![1, 2],
        };
        let h_min = h_list.iter().copied().fold(h, f64::min);
        let ref_h = real("ref_h")?.unwrap_or(h_min / 4.0);
        let local_ref_h = real("local_ref_h")?.unwrap_or(h_min / 8.0);
        let ref_halfwidth = match real("ref_halfwidth")? {
            Some(v) => v,
            None => {
                let profile = AbsorberProfile::linear(l, d_p).map_err(|e| bad("l", &l.to_string(), e.to_string()))?;
                let sigma_max = if kernel == KernelKind::Inhomogeneous { 2.0 } else { 1.0 };
                default_halfwidth(&profile, t_final, sigma_max)
            }
        };
        let quad_order = get("quad_order").map(|v| parse_uint("quad_order", v)).transpose()?.unwrap_or(4);
        let conjugate_pairs = get("conjugate_pairs").map(|v| parse_bool("conjugate_pairs", v)).transpose()?.unwrap_or(false);
        let half_step = match get("half_step") {
            None | Some("with_correction") => HalfStepRule::WithCorrection,
            Some("literal") => HalfStepRule::Literal,
            Some(other) => return Err(bad("half_step", other, "expected with_correction or literal")),
        };
        let output_dir = PathBuf::from(get("output_dir").unwrap_or("out"));

        let cfg = RunConfig {
            example,
            kernel,
            l,
            d_p,
            delta,
            h,
            tau,
            t_final,
            z,
            m,
            m_reduced: m < preset_m,
            omega,
            mu,
            nu,
            c0,
            snapshot_times,
            reference,
            ref_halfwidth,
            ref_h,
            local_ref_h,
            quad_order,
            conjugate_pairs,
            half_step,
            h_list,
            delta_list,
            ratio_list,
            output_dir,
        };
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> Result<()> {
        let positive = [
            ("l", self.l),
            ("d_p", self.d_p),
            ("delta", self.delta),
            ("h", self.h),
            ("tau", self.tau),
            ("mu", self.mu),
            ("nu", self.nu),
            ("c0", self.c0),
            ("ref_halfwidth", self.ref_halfwidth),
            ("ref_h", self.ref_h),
            ("local_ref_h", self.local_ref_h),
        ];
        for (k, v) in positive {
            if !(v > 0.0) {
                return Err(bad(k, &v.to_string(), "must be positive"));
            }
        }
        if !(self.t_final >= 0.0) {
            return Err(bad("T", &self.t_final.to_string(), "must be nonnegative"));
        }
        if self.m == 0 || (self.conjugate_pairs && !self.m.is_multiple_of(2)) {
            return Err(bad("m", &self.m.to_string(), "must be positive, and even with conjugate_pairs"));
        }
        if !(1..=64).contains(&self.quad_order) {
            return Err(bad("quad_order", &self.quad_order.to_string(), "must lie in 1..=64"));
        }
        for (k, list) in [("h_list", &self.h_list), ("delta_list", &self.delta_list)] {
            if list.iter().any(|v| !(*v > 0.0)) {
                return Err(bad(k, &format!("{list:?}"), "entries must be positive"));
            }
        }
        if self.ratio_list.contains(&0) {
            return Err(bad("ratio_list", &format!("{:?}", self.ratio_list), "ratios must be positive"));
        }
        if let Some(t) = self.snapshot_times.iter().find(|t| !(**t >= 0.0 && **t <= self.t_final)) {
            return Err(bad("snapshot_times", &t.to_string(), "must lie in [0, T]"));
        }
        Ok(())
    }

    /// Every effective parameter as a config file that parses back to `self`.
    pub fn to_manifest(&self) -> String {
        fn list<T: fmt::Debug>(v: &[T]) -> String {
            v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",")
        }
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("example", self.example.to_string());
        kv("kernel", kernel_name(self.kernel).to_string());
        kv("l", format!("{:?}", self.l));
        kv("d_p", format!("{:?}", self.d_p));
        kv("delta", format!("{:?}", self.delta));
        kv("h", format!("{:?}", self.h));
        kv("tau", format!("{:?}", self.tau));
        kv("T", format!("{:?}", self.t_final));
        kv("z_re", format!("{:?}", self.z.re));
        kv("z_im", format!("{:?}", self.z.im));
        kv("m", self.m.to_string());
        kv("omega", format!("{:?}", self.omega));
        kv("mu", format!("{:?}", self.mu));
        kv("nu", format!("{:?}", self.nu));
        kv("c0", format!("{:?}", self.c0));
        kv("snapshot_times", list(&self.snapshot_times));
        kv("reference", self.reference.to_string());
        kv("ref_halfwidth", format!("{:?}", self.ref_halfwidth));
        kv("ref_h", format!("{:?}", self.ref_h));
        kv("local_ref_h", format!("{:?}", self.local_ref_h));
        kv("quad_order", self.quad_order.to_string());
        kv("conjugate_pairs", self.conjugate_pairs.to_string());
        kv("half_step", half_step_name(self.half_step).to_string());
        kv("h_list", list(&self.h_list));
        kv("delta_list", list(&self.delta_list));
        kv("ratio_list", list(&self.ratio_list));
        kv("output_dir", self.output_dir.display().to_string());
        let _ = writeln!(s, "# m_reduced = {}", self.m_reduced);
        s
    }
}

impl FromStr for RunConfig {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_follow_the_preset() {
        let c = RunConfig::parse("example = ex1\n").unwrap();
        assert_eq!(c.kernel, KernelKind::Exponential);
        assert_eq!((c.l, c.d_p, c.t_final, c.m), (1.5, 1.0, 3.0, 400));
        assert_eq!(c.mu, 10.0);
        assert_eq!(c.omega, -6.0);
        assert!(!c.m_reduced);
        let c = RunConfig::parse("example = ex2\nm = 200").unwrap();
        assert_eq!((c.mu, c.nu), (10.0, 1.0));
        assert!(c.m_reduced);
        assert_eq!(c.snapshot_times, vec![4.0]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(parse_entries("dleta = 0.5"), Err(ConfigError::UnknownKey { line: 1, .. })));
        assert!(matches!(parse_entries("h = 1\n\nh = 2"), Err(ConfigError::Duplicate { line: 3, .. })));
        assert!(matches!(parse_entries("# ok\nnonsense"), Err(ConfigError::Syntax { line: 2 })));
        assert!(matches!(parse_entries(" = 3"), Err(ConfigError::Syntax { line: 1 })));
        assert!(RunConfig::parse("h = -1").is_err());
        assert!(RunConfig::parse("m = 3\nconjugate_pairs = true").is_err());
        assert!(RunConfig::parse("snapshot_times = 9").is_err());
        assert!(RunConfig::parse("example = custom").is_err());
        assert!(RunConfig::parse("example = ex9").is_err());
        assert!(RunConfig::parse("tau = 1/0").is_err());
    }

    #[test]
    fn number_forms() {
        assert_eq!(parse_real("h", "2^-5").unwrap(), 1.0 / 32.0);
        assert_eq!(parse_real("tau", "1/12000").unwrap(), 1.0 / 12000.0);
        assert_eq!(parse_real("l", " 1.5 ").unwrap(), 1.5);
        let c = RunConfig::parse("h_list = 2^-4, 2^-5\ndelta_list = 0.5,0.2 # trailing").unwrap();
        assert_eq!(c.h_list, vec![0.0625, 0.03125]);
        assert_eq!(c.delta_list, vec![0.5, 0.2]);
        assert_eq!(c.ref_h, 0.03125 / 4.0);
    }

    #[test]
    fn manifest_round_trip() {
        let text = "example = ex3\nm = 64\nz_im = 0.5\nh_list = 2^-4,2^-5\nratio_list = 1,3\nhalf_step = literal\nreference = local\n";
        let c = RunConfig::parse(text).unwrap();
        let back = RunConfig::parse(&c.to_manifest()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn custom_needs_geometry() {
        let text = "example = custom\nkernel = gaussian\nl = 1\nd_p = 1\nT = 0.5\nz_re = 0\n";
        let c = RunConfig::parse(text).unwrap();
        assert_eq!(c.mu, 1.0);
        assert_eq!(c.m, 400);
        assert!(RunConfig::parse(&text.replace("T = 0.5\n", "")).is_err());
    }
}
