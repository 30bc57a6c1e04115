//! Nonlocal interaction kernels γ(α, β).
//!
//! `α` is the displacement `y - x` and `β` the midpoint `(x + y) / 2`. Every
//! kernel is even in `α` and is hard-truncated outside its horizon when
//! evaluated at real arguments. The complex continuation is evaluated without
//! truncation; callers restrict it to the real-coordinate band themselves.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quad;

/// User-supplied kernel for the `Custom` variant.
pub trait CustomKernel: Send + Sync + fmt::Debug {
    /// Untruncated real value γ(α, β).
    fn value(&self, alpha: f64, beta: f64) -> f64;
    /// Analytic continuation of [`CustomKernel::value`].
    fn value_complex(&self, alpha: Complex64, beta: Complex64) -> Complex64;
    /// Support radius in `α`.
    fn horizon(&self) -> f64;
    /// Length over which the kernel varies appreciably; sizes quadrature panels.
    fn length_scale(&self) -> f64 {
        self.horizon() / 4.0
    }
    fn is_homogeneous(&self) -> bool {
        false
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum KernelKind {
    Exponential,
    Gaussian,
    Inhomogeneous,
    Custom,
}

/// A nonlocal kernel together with its horizon parameter `delta`.
#[derive(Clone, Debug)]
pub enum KernelSpec {
    /// `δ⁻³ γ₀(|α|/δ)` with `γ₀(s) = e^{-|s|/c0} / (2 c0³)`.
    Exponential { delta: f64, c0: f64 },
    /// `(4/δ³) √(1000/π) e^{-10 α²/δ²}`.
    Gaussian { delta: f64 },
    /// `ω(β)/ζ(β)³ H(α/ζ(β))` with `ω = 1 + e^{-3β²}`,
    /// `ζ = δ(2 + tanh(-1.5β))` and `H(s) = 4√(1000/π) e^{-10 s²}`.
    Inhomogeneous { delta: f64 },
    Custom(Arc<dyn CustomKernel>),
}

const GAUSS_AMPLITUDE: f64 = 4.0 * 17.841_241_161_527_712; // 4 √(1000/π)

impl KernelSpec {
    pub fn exponential(delta: f64, c0: f64) -> Result<Self> {
        let k = KernelSpec::Exponential { delta, c0 };
        k.validate()?;
        Ok(k)
    }

    pub fn gaussian(delta: f64) -> Result<Self> {
        let k = KernelSpec::Gaussian { delta };
        k.validate()?;
        Ok(k)
    }

    pub fn inhomogeneous(delta: f64) -> Result<Self> {
        let k = KernelSpec::Inhomogeneous { delta };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        match self {
            KernelSpec::Exponential { delta, c0 } if ok(*delta) && ok(*c0) => Ok(()),
            KernelSpec::Gaussian { delta } | KernelSpec::Inhomogeneous { delta } if ok(*delta) => Ok(()),
            KernelSpec::Custom(c) if ok(c.horizon()) && ok(c.length_scale()) => Ok(()),
            _ => Err(Error::Config(format!("invalid kernel parameters: {self:?}"))),
        }
    }

    pub fn kind(&self) -> KernelKind {
        match self {
            KernelSpec::Exponential { .. } => KernelKind::Exponential,
            KernelSpec::Gaussian { .. } => KernelKind::Gaussian,
            KernelSpec::Inhomogeneous { .. } => KernelKind::Inhomogeneous,
            KernelSpec::Custom(_) => KernelKind::Custom,
        }
    }

    /// The nominal horizon parameter δ.
    pub fn delta(&self) -> f64 {
        match self {
            KernelSpec::Exponential { delta, .. }
            | KernelSpec::Gaussian { delta }
            | KernelSpec::Inhomogeneous { delta } => *delta,
            KernelSpec::Custom(c) => c.horizon(),
        }
    }

    /// Support radius in `α`. Equal to δ except for the inhomogeneous kernel,
    /// whose local width ζ(β) reaches 3δ.
    pub fn horizon(&self) -> f64 {
        match self {
            KernelSpec::Inhomogeneous { delta } => 3.0 * delta,
            KernelSpec::Custom(c) => c.horizon(),
            other => other.delta(),
        }
    }

    /// Decay length of the kernel profile.
    pub fn length_scale(&self) -> f64 {
        match self {
            KernelSpec::Exponential { delta, c0 } => c0 * delta,
            KernelSpec::Gaussian { delta } => delta / 20f64.sqrt(),
            KernelSpec::Inhomogeneous { delta } => delta / 20f64.sqrt(),
            KernelSpec::Custom(c) => c.length_scale(),
        }
    }

    /// Whether γ(α, β) is independent of β.
    pub fn is_homogeneous(&self) -> bool {
        match self {
            KernelSpec::Exponential { .. } | KernelSpec::Gaussian { .. } => true,
            KernelSpec::Inhomogeneous { .. } => false,
            KernelSpec::Custom(c) => c.is_homogeneous(),
        }
    }

    /// Truncated real kernel value without argument checks.
    #[inline]
    pub fn value(&self, alpha: f64, beta: f64) -> f64 {
        if alpha.abs() > self.horizon() {
            return 0.0;
        }
        self.untruncated(alpha, beta)
    }

    #[inline]
    fn untruncated(&self, alpha: f64, beta: f64) -> f64 {
        match self {
            KernelSpec::Exponential { delta, c0 } => {
                let d3 = delta * delta * delta;
                (-alpha.abs() / (c0 * delta)).exp() / (2.0 * c0 * c0 * c0 * d3)
            }
            KernelSpec::Gaussian { delta } => {
                let r = alpha / delta;
                GAUSS_AMPLITUDE / (delta * delta * delta) * (-10.0 * r * r).exp()
            }
            KernelSpec::Inhomogeneous { delta } => {
                let w = 1.0 + (-3.0 * beta * beta).exp();
                let zeta = delta * (2.0 + (-1.5 * beta).tanh());
                let r = alpha / zeta;
                w / (zeta * zeta * zeta) * GAUSS_AMPLITUDE * (-10.0 * r * r).exp()
            }
            KernelSpec::Custom(c) => c.value(alpha, beta),
        }
    }

    /// Checked real evaluation γ(α, β).
    pub fn eval(&self, alpha: f64, beta: f64) -> Result<f64> {
        if !alpha.is_finite() || !beta.is_finite() {
            return Err(Error::Domain(format!("kernel arguments must be finite, got ({alpha}, {beta})")));
        }
        Ok(self.value(alpha, beta))
    }

    /// Analytic continuation of γ to complex arguments (no truncation).
    #[inline]
    pub fn value_complex(&self, alpha: Complex64, beta: Complex64) -> Complex64 {
        if alpha.im == 0.0 && beta.im == 0.0 {
            return Complex64::from(self.untruncated(alpha.re, beta.re));
        }
        match self {
            KernelSpec::Exponential { delta, c0 } => {
                let d3 = delta * delta * delta;
                let rho = continuation_branch(alpha);
                (-rho / (c0 * delta)).exp() / (2.0 * c0 * c0 * c0 * d3)
            }
            KernelSpec::Gaussian { delta } => {
                let r = alpha / delta;
                (-10.0 * r * r).exp() * (GAUSS_AMPLITUDE / (delta * delta * delta))
            }
            KernelSpec::Inhomogeneous { delta } => {
                let w = (-3.0 * beta * beta).exp() + 1.0;
                let zeta = ((-1.5 * beta).tanh() + 2.0) * *delta;
                let r = alpha / zeta;
                w / (zeta * zeta * zeta) * (-10.0 * r * r).exp() * GAUSS_AMPLITUDE
            }
            KernelSpec::Custom(c) => c.value_complex(alpha, beta),
        }
    }

    /// Checked complex evaluation.
    pub fn eval_complex(&self, alpha: Complex64, beta: Complex64) -> Result<Complex64> {
        if !(alpha.is_finite() && beta.is_finite()) {
            return Err(Error::Domain("kernel arguments must be finite".into()));
        }
        Ok(self.value_complex(alpha, beta))
    }

    /// Halved second moment `σ_loc(x) = ½ ∫ s² γ(s, x) ds` over the support.
    pub fn local_coefficient(&self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::Domain(format!("position must be finite, got {x}")));
        }
        let h = self.horizon();
        let half = quad::adaptive_with_breaks(|s| s * s * self.value(s, x), &[0.0, h], 1e-15, 1e-12)?;
        let other = quad::adaptive_with_breaks(|s| s * s * self.value(-s, x), &[0.0, h], 1e-15, 1e-12)?;
        Ok(0.5 * (half + other))
    }
}

/// `ρ = √(α²)` on the branch with `Re ρ ≥ 0`; on `Re ρ = 0` the root with
/// nonnegative imaginary part is kept.
#[inline]
pub fn continuation_branch(alpha: Complex64) -> Complex64 {
    let rho = (alpha * alpha).sqrt();
    if rho.re < 0.0 || (rho.re == 0.0 && rho.im < 0.0) {
        -rho
    } else {
        rho
    }
}

/// Closed form of the truncated second moment of the exponential kernel.
pub fn exponential_truncated_moment(c0: f64) -> f64 {
    let u = 1.0 / c0;
    1.0 - 0.5 * (-u).exp() * (u * u + 2.0 * u + 2.0)
}
