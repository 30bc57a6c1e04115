//! The three benchmark problems: data, kernels and default parameters.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::discretize::InitialData;
use crate::error::{Error, Result};
use crate::kernels::{KernelKind, KernelSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Example {
    /// Exponential kernel, `l = 1.5`, `d_p = 1`, `z = 20`.
    Ex1,
    /// Gaussian kernel, `l = 2`, `d_p = 2`, `z = 10`.
    Ex2,
    /// Inhomogeneous Gaussian kernel with the data of `Ex2`.
    Ex3,
}

impl Example {
    pub const ALL: [Example; 3] = [Example::Ex1, Example::Ex2, Example::Ex3];

    pub fn name(self) -> &'static str {
        match self {
            Example::Ex1 => "ex1",
            Example::Ex2 => "ex2",
            Example::Ex3 => "ex3",
        }
    }

    pub fn kernel_kind(self) -> KernelKind {
        match self {
            Example::Ex1 => KernelKind::Exponential,
            Example::Ex2 => KernelKind::Gaussian,
            Example::Ex3 => KernelKind::Inhomogeneous,
        }
    }

    pub fn defaults(self) -> Defaults {
        match self {
            Example::Ex1 => Defaults { l: 1.5, d_p: 1.0, z: 20.0, t_final: 3.0, mu_per_z: 0.5, nu: 1.0, m: 400 },
            Example::Ex2 => Defaults { l: 2.0, d_p: 2.0, z: 10.0, t_final: 4.0, mu_per_z: 1.0, nu: 1.0, m: 800 },
            Example::Ex3 => Defaults { l: 2.0, d_p: 2.0, z: 10.0, t_final: 4.0, mu_per_z: 1.0, nu: 1.0, m: 400 },
        }
    }

    /// Kernel of this example with horizon `delta`; `c0` only affects `Ex1`.
    pub fn kernel(self, delta: f64, c0: f64) -> Result<KernelSpec> {
        match self {
            Example::Ex1 => KernelSpec::exponential(delta, c0),
            Example::Ex2 => KernelSpec::gaussian(delta),
            Example::Ex3 => KernelSpec::inhomogeneous(delta),
        }
    }

    /// `ψ0`, `ψ1`, no source.
    pub fn initial_data(self) -> InitialData {
        match self {
            Example::Ex1 => InitialData::new(
                Arc::new(|x: f64| (-20.0 * (x - 0.2).powi(2)).exp() + (-20.0 * (x + 0.2).powi(2)).exp()),
                Arc::new(|x: f64| 100.0 * x * x * (-20.0 * x * x).exp()),
            ),
            Example::Ex2 | Example::Ex3 => InitialData::new(
                Arc::new(|x: f64| (-25.0 * (x - 0.2).powi(2)).exp() + (-25.0 * (x + 0.2).powi(2)).exp()),
                Arc::new(|x: f64| 50.0 * x * (-25.0 * x * x).exp()),
            ),
        }
    }

    /// Diffusion coefficient of the local limit.
    pub fn local_coefficient(self) -> Arc<dyn Fn(f64) -> f64 + Send + Sync> {
        match self {
            Example::Ex1 | Example::Ex2 => Arc::new(|_| 1.0),
            Example::Ex3 => Arc::new(|x: f64| 1.0 + (-3.0 * x * x).exp()),
        }
    }
}

impl fmt::Display for Example {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Example {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ex1" => Ok(Example::Ex1),
            "ex2" => Ok(Example::Ex2),
            "ex3" => Ok(Example::Ex3),
            other => Err(Error::Config(format!("unknown example '{other}' (expected ex1, ex2 or ex3)"))),
        }
    }
}

/// Default parameters of an example.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Defaults {
    pub l: f64,
    pub d_p: f64,
    pub z: f64,
    pub t_final: f64,
    /// `μ = mu_per_z · |z|`.
    pub mu_per_z: f64,
    pub nu: f64,
    pub m: usize,
}

/// Contour shift as a fraction of `μ`. Moving the contour left keeps the
/// largest term growth `e^{(ω+μ)t}` small enough that the contour sum does not
/// lose all its digits to cancellation over the simulated time.
pub const OMEGA_PER_MU: f64 = -0.6;

/// Exponential-kernel decay constant used when none is given. The tail cut
/// off at the horizon is `e^{-1/c0}`; at `0.05` the truncated second moment is
/// within `5e-7` of one.
pub const DEFAULT_C0: f64 = 0.05;

/// Default time step.
pub const DEFAULT_TAU: f64 = 1.0 / 12000.0;
