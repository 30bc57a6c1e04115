//! PML geometry: absorber profile, complex coordinate stretch and the
//! transformed kernel `K(x, y, s)`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernels::KernelSpec;
use crate::quad;

/// Ramp shape `r: [0, 1] → [0, 1]` for a custom absorber, increasing with
/// `r(0) = 0` and `r(1) = 1`.
pub type RampFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Ramp {
    Linear,
    Custom(RampFn),
}

impl fmt::Debug for Ramp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ramp::Linear => f.write_str("Linear"),
            Ramp::Custom(_) => f.write_str("Custom"),
        }
    }
}

/// Absorber σ(η): zero on `(-l, l)`, ramping up across a layer of thickness
/// `d_p`, saturated at 1 beyond `l + d_p`. Even in η.
#[derive(Clone, Debug)]
pub struct AbsorberProfile {
    l: f64,
    d_p: f64,
    ramp: Ramp,
}

impl AbsorberProfile {
    /// Piecewise-linear profile `σ(η) = (|η| - l)/d_p` inside the layer.
    pub fn linear(l: f64, d_p: f64) -> Result<Self> {
        Self::check(l, d_p)?;
        Ok(Self { l, d_p, ramp: Ramp::Linear })
    }

    /// Profile with a user ramp; its antiderivative is computed by quadrature.
    pub fn custom(l: f64, d_p: f64, ramp: RampFn) -> Result<Self> {
        Self::check(l, d_p)?;
        if (ramp(0.0)).abs() > 1e-12 || (ramp(1.0) - 1.0).abs() > 1e-12 {
            return Err(Error::Config("absorber ramp must satisfy r(0) = 0 and r(1) = 1".into()));
        }
        Ok(Self { l, d_p, ramp: Ramp::Custom(ramp) })
    }

    fn check(l: f64, d_p: f64) -> Result<()> {
        if !(l.is_finite() && l > 0.0 && d_p.is_finite() && d_p > 0.0) {
            return Err(Error::Config(format!("absorber needs l > 0 and d_p > 0, got l={l}, d_p={d_p}")));
        }
        Ok(())
    }

    /// Interior half-width `l` (so `x_l = -l`, `x_r = l`).
    pub fn half_width(&self) -> f64 {
        self.l
    }

    /// Layer thickness `d_p`.
    pub fn thickness(&self) -> f64 {
        self.d_p
    }

    /// Outer edge of the layer, `l + d_p`.
    pub fn outer_edge(&self) -> f64 {
        self.l + self.d_p
    }

    pub fn is_linear(&self) -> bool {
        matches!(self.ramp, Ramp::Linear)
    }

    #[inline]
    pub fn sigma(&self, eta: f64) -> f64 {
        let a = eta.abs();
        if a < self.l {
            0.0
        } else if a >= self.l + self.d_p {
            1.0
        } else {
            let u = (a - self.l) / self.d_p;
            match &self.ramp {
                Ramp::Linear => u,
                Ramp::Custom(r) => r(u),
            }
        }
    }

    /// `Σ(x) = ∫₀ˣ σ(η) dη`, odd in `x`.
    #[inline]
    pub fn sigma_antiderivative(&self, x: f64) -> f64 {
        let a = x.abs();
        let v = if a <= self.l {
            0.0
        } else {
            match &self.ramp {
                Ramp::Linear => {
                    if a <= self.l + self.d_p {
                        let e = a - self.l;
                        e * e / (2.0 * self.d_p)
                    } else {
                        0.5 * self.d_p + (a - self.l - self.d_p)
                    }
                }
                Ramp::Custom(r) => {
                    let top = a.min(self.l + self.d_p);
                    let u_top = (top - self.l) / self.d_p;
                    let ramp_area = quad::adaptive(|u| r(u), 0.0, u_top, 1e-15, 1e-13)
                        .unwrap_or_else(|_| quad::GaussLegendre::new(16).unwrap().integrate(|u| r(u), 0.0, u_top, 64));
                    ramp_area * self.d_p + (a - top)
                }
            }
        };
        v.copysign(x)
    }
}

/// PML coefficient `z` (real or complex).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PmlParams {
    pub z: Complex64,
}

impl PmlParams {
    pub fn new(z: Complex64) -> Self {
        Self { z }
    }

    pub fn real(z: f64) -> Self {
        Self { z: Complex64::new(z, 0.0) }
    }

    pub fn is_real(&self) -> bool {
        self.z.im == 0.0
    }
}

fn check_s(s: Complex64) -> Result<()> {
    if s == Complex64::new(0.0, 0.0) || !s.is_finite() {
        return Err(Error::Domain(format!("Laplace variable must be finite and nonzero, got {s}")));
    }
    Ok(())
}

/// `x̃ = x + (z/s) Σ(x)`.
pub fn stretch(profile: &AbsorberProfile, pml: &PmlParams, x: f64, s: Complex64) -> Result<Complex64> {
    check_s(s)?;
    Ok(stretch_unchecked(profile.sigma_antiderivative(x), x, pml.z / s))
}

/// `α(x, s) = 1 + (z/s) σ(x)`.
pub fn alpha(profile: &AbsorberProfile, pml: &PmlParams, x: f64, s: Complex64) -> Result<Complex64> {
    check_s(s)?;
    Ok(pml.z / s * profile.sigma(x) + 1.0)
}

#[inline]
pub(crate) fn stretch_unchecked(big_sigma: f64, x: f64, z_over_s: Complex64) -> Complex64 {
    z_over_s * big_sigma + x
}

/// `K(x, y, s) = γ(ỹ - x̃, (x̃ + ỹ)/2) α(x, s) α(y, s) / s`.
pub fn transformed_kernel(
    kernel: &KernelSpec,
    profile: &AbsorberProfile,
    pml: &PmlParams,
    x: f64,
    y: f64,
    s: Complex64,
) -> Result<Complex64> {
    check_s(s)?;
    let zs = pml.z / s;
    let point = |p: f64| StretchPoint::new(profile, p);
    Ok(transformed_kernel_at(kernel, &point(x), &point(y), zs, s.inv()))
}

/// Real-coordinate data of a point that the transformed kernel needs.
#[derive(Clone, Copy, Debug)]
pub(crate) struct StretchPoint {
    pub x: f64,
    pub sigma: f64,
    pub big_sigma: f64,
}

impl StretchPoint {
    #[inline]
    pub fn new(profile: &AbsorberProfile, x: f64) -> Self {
        Self { x, sigma: profile.sigma(x), big_sigma: profile.sigma_antiderivative(x) }
    }
}

#[inline]
pub(crate) fn transformed_kernel_at(
    kernel: &KernelSpec,
    x: &StretchPoint,
    y: &StretchPoint,
    z_over_s: Complex64,
    inv_s: Complex64,
) -> Complex64 {
    let xt = stretch_unchecked(x.big_sigma, x.x, z_over_s);
    let yt = stretch_unchecked(y.big_sigma, y.x, z_over_s);
    let ax = z_over_s * x.sigma + 1.0;
    let ay = z_over_s * y.sigma + 1.0;
    kernel.value_complex(yt - xt, (xt + yt) * 0.5) * ax * ay * inv_s
}
