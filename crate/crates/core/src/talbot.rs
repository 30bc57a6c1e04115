//! Talbot contour, trapezoidal inverse Laplace quadrature and the contour
//! admissibility checks for the PML kernel continuation.
//!
//! The contour is `s(θ) = ω + μ(θ cot θ + iνθ)` for `θ ∈ (-π, π)`, sampled at
//! the midpoints `θ_j = -π + (π/m)(2j - 1)`. With `ϖ_j = s'(θ_j)/(m i)`,
//!
//! ```text
//! f(t) ≈ Σ_j ϖ_j F(ξ_j) e^{ξ_j t}.
//! ```

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernels::KernelKind;
use crate::stretch::PmlParams;

#[derive(Clone, Debug)]
pub struct TalbotContour {
    omega: f64,
    mu: f64,
    nu: f64,
    thetas: Vec<f64>,
    nodes: Vec<Complex64>,
    weights: Vec<Complex64>,
}

/// `θ cot θ`, continuous through `θ = 0`.
fn theta_cot(theta: f64) -> f64 {
    if theta.abs() < 1e-4 {
        let t2 = theta * theta;
        1.0 - t2 / 3.0 - t2 * t2 / 45.0
    } else {
        theta / theta.tan()
    }
}

/// `cot θ - θ / sin² θ`, continuous through `θ = 0`.
fn theta_cot_derivative(theta: f64) -> f64 {
    if theta.abs() < 1e-4 {
        -2.0 * theta / 3.0 - 4.0 * theta.powi(3) / 45.0
    } else {
        let s = theta.sin();
        1.0 / theta.tan() - theta / (s * s)
    }
}

impl TalbotContour {
    pub fn new(omega: f64, mu: f64, nu: f64, m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::Config(format!("Talbot node count must be at least 2, got {m}")));
        }
        if !(mu.is_finite() && mu > 0.0) || !(nu.is_finite() && nu > 0.0) || !omega.is_finite() {
            return Err(Error::Config(format!(
                "Talbot parameters need finite omega, mu > 0, nu > 0; got omega={omega}, mu={mu}, nu={nu}"
            )));
        }
        let mf = m as f64;
        let thetas: Vec<f64> = (1..=m).map(|j| -PI + (PI / mf) * (2 * j - 1) as f64).collect();
        let nodes = thetas
            .iter()
            .map(|&t| Complex64::new(omega + mu * theta_cot(t), mu * nu * t))
            .collect();
        let weights = thetas
            .iter()
            .map(|&t| {
                let ds = Complex64::new(mu * theta_cot_derivative(t), mu * nu);
                ds / Complex64::new(0.0, mf)
            })
            .collect();
        Ok(Self { omega, mu, nu, thetas, nodes, weights })
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn m(&self) -> usize {
        self.nodes.len()
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    /// Quadrature nodes `ξ_j`.
    pub fn nodes(&self) -> &[Complex64] {
        &self.nodes
    }

    /// Quadrature weights `ϖ_j`.
    pub fn weights(&self) -> &[Complex64] {
        &self.weights
    }

    /// Point on the contour at an arbitrary parameter `θ ∈ (-π, π)`.
    pub fn point(&self, theta: f64) -> Complex64 {
        Complex64::new(self.omega + self.mu * theta_cot(theta), self.mu * self.nu * theta)
    }

    /// Largest real part over the whole contour, `ω + μ`; sets the growth rate of
    /// the individual quadrature terms.
    pub fn max_real_part(&self) -> f64 {
        self.omega + self.mu
    }
}

/// Builds the contour; see [`TalbotContour::new`].
pub fn build_contour(omega: f64, mu: f64, nu: f64, m: usize) -> Result<TalbotContour> {
    TalbotContour::new(omega, mu, nu, m)
}

/// `Σ_j ϖ_j F(ξ_j) e^{ξ_j t}` over all nodes.
pub fn inverse_laplace<F: FnMut(Complex64) -> Complex64>(contour: &TalbotContour, mut f: F, t: f64) -> Complex64 {
    contour
        .nodes
        .iter()
        .zip(&contour.weights)
        .map(|(&xi, &w)| w * f(xi) * (xi * t).exp())
        .sum()
}

/// Real projection of [`inverse_laplace`] for transforms of real functions.
pub fn inverse_laplace_real<F: FnMut(Complex64) -> Complex64>(contour: &TalbotContour, f: F, t: f64) -> f64 {
    inverse_laplace(contour, f, t).re
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContourDiagnostics {
    /// Nodes avoid, and the contour encloses, the singular disk of the
    /// exponential-kernel continuation.
    pub enclosure_ok: bool,
    /// Per-node Gaussian-type condition `ζ₁ ± ζ₂ ≥ -1`, `ζ = z/ξ_j`.
    pub stability_ok: bool,
    /// Sufficient bound `√2|z| ≤ min_j |ξ_j|`.
    pub sufficient_ok: bool,
    /// Smallest slack over the gating condition for this kernel kind
    /// (negative when violated).
    pub worst_margin: f64,
}

impl ContourDiagnostics {
    /// Whether the contour is admissible for a kernel of the given kind.
    pub fn passes(&self, kind: KernelKind) -> bool {
        match kind {
            KernelKind::Exponential => self.enclosure_ok,
            KernelKind::Gaussian | KernelKind::Inhomogeneous => self.stability_ok,
            KernelKind::Custom => self.enclosure_ok && self.stability_ok,
        }
    }
}

const DISK_SAMPLES: usize = 2048;

/// Checks the contour against the analyticity and stability requirements of
/// the stretched kernel.
///
/// Exponential kind: the continuation `e^{-ρ/(c0 δ)}` with `ρ = sqrt(α̃²)` is
/// analytic wherever the stretch factor stays off the closed disk
/// `|s + z/2| ≤ |z|/2`; every node must lie outside that disk and the disk must
/// sit to the left of the contour. Enclosure is tested by inverting the
/// contour's imaginary part (monotone in θ) at sampled disk boundary points
/// and comparing real parts. Gaussian-type kinds: stability of the continued
/// Gaussian requires `Re ζ - Im ζ ≥ -1` and `Re ζ + Im ζ ≥ -1` at every node.
pub fn validate_contour(contour: &TalbotContour, pml: &PmlParams, kind: KernelKind) -> ContourDiagnostics {
    let z = pml.z;
    let zabs = z.norm();
    if zabs == 0.0 {
        return ContourDiagnostics { enclosure_ok: true, stability_ok: true, sufficient_ok: true, worst_margin: f64::INFINITY };
    }
    let center = -z * 0.5;
    let radius = 0.5 * zabs;

    let mut enclosure_margin = f64::INFINITY;
    for &xi in contour.nodes() {
        enclosure_margin = enclosure_margin.min((xi - center).norm() - radius);
    }
    let height = contour.mu() * contour.nu() * PI;
    for i in 0..DISK_SAMPLES {
        let phi = 2.0 * PI * i as f64 / DISK_SAMPLES as f64;
        let p = center + Complex64::from_polar(radius, phi);
        let slack_height = height - p.im.abs();
        if slack_height <= 0.0 {
            enclosure_margin = enclosure_margin.min(slack_height);
            continue;
        }
        let theta0 = p.im / (contour.mu() * contour.nu());
        enclosure_margin = enclosure_margin.min(contour.point(theta0).re - p.re);
    }

    let mut stability_margin = f64::INFINITY;
    let mut min_node = f64::INFINITY;
    for &xi in contour.nodes() {
        let zeta = z / xi;
        stability_margin = stability_margin.min(zeta.re - zeta.im + 1.0).min(zeta.re + zeta.im + 1.0);
        min_node = min_node.min(xi.norm());
    }
    let sufficient_ok = std::f64::consts::SQRT_2 * zabs <= min_node;

    let enclosure_ok = enclosure_margin > 0.0;
    let stability_ok = stability_margin >= 0.0 || sufficient_ok;
    let worst_margin = match kind {
        KernelKind::Exponential => enclosure_margin,
        KernelKind::Gaussian | KernelKind::Inhomogeneous => stability_margin,
        KernelKind::Custom => enclosure_margin.min(stability_margin),
    };
    ContourDiagnostics { enclosure_ok, stability_ok, sufficient_ok, worst_margin }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn theta_grid() {
        let c = build_contour(0.0, 10.0, 1.0, 4).unwrap();
        let expected = [-0.75 * PI, -0.25 * PI, 0.25 * PI, 0.75 * PI];
        for (t, e) in c.thetas().iter().zip(expected) {
            assert!((t - e).abs() < 1e-15);
        }
        let xi = c.nodes()[2];
        assert!((xi - Complex64::new(2.5 * PI, 2.5 * PI)).norm() < 1e-12);
        assert!((xi.re - 7.853_981_633_974_483).abs() < 1e-12);
    }

    #[test]
    fn conjugate_closure() {
        for m in [2, 8, 64, 401] {
            let c = build_contour(-3.0, 10.0, 1.2, m).unwrap();
            for j in 0..m {
                let k = m - 1 - j;
                assert!((c.nodes()[j] - c.nodes()[k].conj()).norm() < 1e-12 * c.nodes()[j].norm());
                assert!((c.weights()[j] - c.weights()[k].conj()).norm() < 1e-12 * c.weights()[j].norm());
            }
        }
    }

    #[test]
    fn odd_m_has_node_at_zero_angle() {
        let c = build_contour(0.0, 10.0, 1.0, 5).unwrap();
        assert_eq!(c.thetas()[2], 0.0);
        assert!((c.nodes()[2] - Complex64::new(10.0, 0.0)).norm() < 1e-14);
        assert!((c.weights()[2] - Complex64::new(2.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(build_contour(0.0, 10.0, 1.0, 1).is_err());
        assert!(build_contour(0.0, 0.0, 1.0, 8).is_err());
        assert!(build_contour(0.0, 10.0, -1.0, 8).is_err());
    }

    #[test]
    fn laplace_pairs() {
        for m in [32, 64, 128] {
            let c = build_contour(0.0, 10.0, 1.0, m).unwrap();
            for t in [0.1, 0.5, 1.0, 2.0] {
                if m == 32 && t > 1.0 {
                    continue;
                }
                let a = inverse_laplace(&c, |s| s.inv(), t);
                let b = inverse_laplace(&c, |s| (s * s).inv(), t);
                let e = inverse_laplace(&c, |s| (s + 1.0).inv(), t);
                let tol = if m == 32 { 1e-3 } else { 1e-6 };
                assert!(rel(a.re, 1.0) < tol, "1/s m={m} t={t}: {a}");
                assert!(rel(b.re, t) < tol, "1/s^2 m={m} t={t}: {b}");
                assert!(rel(e.re, (-t).exp()) < tol, "1/(s+1) m={m} t={t}: {e}");
            }
        }
    }

    #[test]
    fn shifted_contour_reaches_longer_times() {
        let c = build_contour(-6.0, 10.0, 1.0, 128).unwrap();
        for t in [0.5, 2.0, 4.0, 5.0] {
            let a = inverse_laplace_real(&c, |s| s.inv(), t);
            let e = inverse_laplace_real(&c, |s| (s + 1.0).inv(), t);
            assert!((a - 1.0).abs() < 1e-6, "t={t}: {a}");
            assert!((e - (-t).exp()).abs() < 1e-6, "t={t}: {e}");
        }
    }

    #[test]
    fn real_transforms_give_real_sums() {
        let c = build_contour(0.0, 10.0, 1.0, 64).unwrap();
        let v = inverse_laplace(&c, |s| (s * s + 4.0).inv() * s, 1.3);
        assert!(v.im.abs() <= 1e-12 * v.re.abs());
        assert!(rel(v.re, (2.0f64 * 1.3).cos()) < 1e-6);
    }

    #[test]
    fn exponential_enclosure() {
        let c = build_contour(0.0, 10.0, 1.0, 400).unwrap();
        let d = validate_contour(&c, &PmlParams::real(20.0), KernelKind::Exponential);
        assert!(d.enclosure_ok);
        assert!(d.passes(KernelKind::Exponential));
        // a contour crossing the disk
        let c = build_contour(-15.0, 10.0, 1.0, 400).unwrap();
        let d = validate_contour(&c, &PmlParams::real(20.0), KernelKind::Exponential);
        assert!(!d.enclosure_ok);
        assert!(d.worst_margin < 0.0);
    }

    #[test]
    fn gaussian_stability() {
        let c = build_contour(0.0, 10.0, 1.0, 800).unwrap();
        let d = validate_contour(&c, &PmlParams::real(10.0), KernelKind::Gaussian);
        assert!(d.stability_ok);
        assert!(!d.sufficient_ok);
        assert!(d.passes(KernelKind::Gaussian));
        // node closest to θ = 0 sits near ξ = 10, so ζ ≈ 1
        let j = c.thetas().iter().enumerate().min_by(|a, b| a.1.abs().total_cmp(&b.1.abs())).unwrap().0;
        let zeta = Complex64::new(10.0, 0.0) / c.nodes()[j];
        assert!((zeta - Complex64::new(1.0, 0.0)).norm() < 1e-2);
    }

    #[test]
    fn disabled_stretch_passes_everything() {
        let c = build_contour(-100.0, 1.0, 1.0, 16).unwrap();
        let d = validate_contour(&c, &PmlParams::real(0.0), KernelKind::Exponential);
        assert!(d.enclosure_ok && d.stability_ok && d.sufficient_ok);
    }

    #[test]
    fn sufficient_implies_stable() {
        for omega in [-20.0, -5.0, 0.0, 5.0, 40.0] {
            for z in [1.0, 5.0, 10.0, 30.0] {
                let c = build_contour(omega, 10.0, 1.0, 64).unwrap();
                let d = validate_contour(&c, &PmlParams::real(z), KernelKind::Gaussian);
                if d.sufficient_ok {
                    assert!(d.stability_ok);
                }
            }
        }
    }
}
