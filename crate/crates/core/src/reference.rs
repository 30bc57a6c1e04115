//! Independent reference solvers.
//!
//! * A large-domain nonlocal solver without absorber: the unstretched real
//!   AC matrix on `[-L, L]` with a zero clamp outside, stepped with the plain
//!   two-term central difference in time.
//! * A staggered finite-difference solver for the local PML system
//!
//! ```text
//! w_t + zσ w = v_x,     v_t + zσ v = μ(x) w_x,     u_t = w,
//! ```
//!
//!   the local limit of the nonlocal PML problem.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::discretize::{assemble_real_band, InitialData};
use crate::error::{Error, Result};
use crate::kernels::KernelSpec;
use crate::stretch::AbsorberProfile;

/// Real snapshots on a uniform node set.
#[derive(Clone, Debug)]
pub struct ReferenceSolution {
    pub x: Vec<f64>,
    pub snapshots: Vec<(f64, Vec<f64>)>,
}

impl ReferenceSolution {
    /// Snapshot nearest to `t`.
    pub fn at(&self, t: f64) -> Option<&[f64]> {
        self.snapshots
            .iter()
            .min_by(|a, b| (a.0 - t).abs().total_cmp(&(b.0 - t).abs()))
            .map(|(_, v)| v.as_slice())
    }

    /// Piecewise-linear interpolation of the snapshot nearest to `t`, zero
    /// outside the node range.
    pub fn sample(&self, t: f64, points: &[f64]) -> Option<Vec<f64>> {
        let values = self.at(t)?;
        Some(points.iter().map(|&p| interpolate(&self.x, values, p)).collect())
    }
}

fn interpolate(x: &[f64], v: &[f64], p: f64) -> f64 {
    let n = x.len();
    if n == 0 {
        return 0.0;
    }
    if n == 1 {
        return if (p - x[0]).abs() < 1e-12 { v[0] } else { 0.0 };
    }
    let h = x[1] - x[0];
    let s = (p - x[0]) / h;
    if s < -1.0 || s > n as f64 {
        return 0.0;
    }
    let i = s.floor();
    let frac = s - i;
    let at = |k: f64| -> f64 {
        if k < 0.0 || k >= n as f64 {
            0.0
        } else {
            v[k as usize]
        }
    };
    if frac < 1e-9 {
        return at(i);
    }
    if frac > 1.0 - 1e-9 {
        return at(i + 1.0);
    }
    (1.0 - frac) * at(i) + frac * at(i + 1.0)
}

/// Half-width `l + d_p + ⌈T√(max σ_loc)/2 + 2⌉`.
///
/// A reflection off the artificial boundary needs a round trip of length
/// `2L - (l + d_p) - R` to reach the truncated domain, with `R ≤ l + d_p` the
/// radius of the data; it cannot arrive before `T`. The integer extension keeps
/// every dyadic grid of the truncated domain aligned with the reference grid.
pub fn default_halfwidth(profile: &AbsorberProfile, t_final: f64, max_local_coefficient: f64) -> f64 {
    profile.outer_edge() + (0.5 * t_final * max_local_coefficient.sqrt() + 2.0).ceil()
}

fn node_count(halfwidth: f64, h: f64) -> Result<usize> {
    let cells_f = 2.0 * halfwidth / h;
    let cells = cells_f.round();
    if !(h > 0.0) || (cells_f - cells).abs() > 1e-9 * cells_f.max(1.0) || cells < 2.0 {
        return Err(Error::Config(format!("h = {h} does not divide [-{halfwidth}, {halfwidth}]")));
    }
    Ok(cells as usize - 1)
}

fn record_steps(times: &[f64], tau: f64, steps: usize) -> Vec<usize> {
    let mut s: Vec<usize> = times
        .iter()
        .filter(|t| t.is_finite() && **t >= 0.0)
        .map(|t| ((t / tau).round() as usize).min(steps))
        .collect();
    s.sort_unstable();
    s.dedup();
    s
}

/// Nonlocal problem on `[-L, L]` without absorber, zero outside.
#[allow(clippy::too_many_arguments)]
pub fn solve_nonlocal_reference(
    kernel: &KernelSpec,
    data: &InitialData,
    t_final: f64,
    tau: f64,
    h: f64,
    halfwidth: f64,
    record_times: &[f64],
    quad_order: usize,
) -> Result<ReferenceSolution> {
    if !(tau > 0.0 && t_final >= 0.0) {
        return Err(Error::Config(format!("need tau > 0 and T >= 0, got tau={tau}, T={t_final}")));
    }
    let n = node_count(halfwidth, h)?;
    let first = -halfwidth + h;
    let x: Vec<f64> = (0..n).map(|i| first + i as f64 * h).collect();
    let a = assemble_real_band(kernel, quad_order, first, h, n)?;
    let steps = (t_final / tau - 1e-9).ceil().max(0.0) as usize;
    let wanted = record_steps(record_times, tau, steps);

    let mut q: Vec<f64> = x.iter().map(|&p| (data.psi0)(p)).collect();
    let mut aq = vec![0.0; n];
    let mut f = vec![0.0; n];
    let force = |t: f64, out: &mut [f64]| match &data.forcing {
        Some(g) => out.iter_mut().zip(&x).for_each(|(o, &p)| *o = g(p, t)),
        None => out.fill(0.0),
    };
    a.apply(&q, &mut aq);
    force(0.0, &mut f);
    let mut w: Vec<f64> = x
        .iter()
        .enumerate()
        .map(|(i, &p)| (data.psi1)(p) + 0.5 * tau * (f[i] - aq[i]))
        .collect();

    let mut snapshots = Vec::with_capacity(wanted.len());
    let mut next = 0;
    let guard = 1e6 * (1.0 + q.iter().fold(0.0f64, |m, v| m.max(v.abs())));
    for k in 0..=steps {
        if next < wanted.len() && wanted[next] == k {
            snapshots.push((k as f64 * tau, q.clone()));
            next += 1;
        }
        if k == steps {
            break;
        }
        let mut peak = 0.0f64;
        for (qi, wi) in q.iter_mut().zip(&w) {
            *qi += tau * wi;
            peak = peak.max(qi.abs());
        }
        if !(peak <= guard) {
            return Err(Error::BlowUp { step: k + 1, time: (k + 1) as f64 * tau, magnitude: peak });
        }
        a.apply(&q, &mut aq);
        force((k + 1) as f64 * tau, &mut f);
        for i in 0..n {
            w[i] += tau * (f[i] - aq[i]);
        }
    }
    Ok(ReferenceSolution { x, snapshots })
}

/// Largest difference on `[-l, l]` at `t_final` between reference solves on
/// `[-L, L]` and `[-2L, 2L]`.
#[allow(clippy::too_many_arguments)]
pub fn doubling_discrepancy(
    kernel: &KernelSpec,
    data: &InitialData,
    t_final: f64,
    tau: f64,
    h: f64,
    halfwidth: f64,
    l: f64,
    quad_order: usize,
) -> Result<f64> {
    let a = solve_nonlocal_reference(kernel, data, t_final, tau, h, halfwidth, &[t_final], quad_order)?;
    let b = solve_nonlocal_reference(kernel, data, t_final, tau, h, 2.0 * halfwidth, &[t_final], quad_order)?;
    let pts: Vec<f64> = a.x.iter().copied().filter(|p| p.abs() < l).collect();
    let va = a.sample(t_final, &pts).unwrap_or_default();
    let vb = b.sample(t_final, &pts).unwrap_or_default();
    Ok(va.iter().zip(&vb).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())))
}

/// Coefficient field `μ(x)` of the local system.
#[derive(Clone)]
pub enum Coefficient {
    Constant(f64),
    Field(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl Coefficient {
    pub fn at(&self, x: f64) -> f64 {
        match self {
            Coefficient::Constant(c) => *c,
            Coefficient::Field(f) => f(x),
        }
    }
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Constant(c) => write!(f, "Constant({c})"),
            Coefficient::Field(_) => f.write_str("Field"),
        }
    }
}

/// Local PML wave system on `[-(l + d_p), l + d_p]` with `u = 0` at both ends.
#[derive(Clone, Debug)]
pub struct LocalPmlSystem {
    pub coefficient: Coefficient,
    pub profile: AbsorberProfile,
    pub z: Complex64,
}

/// Local solution at the grid nodes, end points included.
#[derive(Clone, Debug)]
pub struct LocalSolution {
    pub x: Vec<f64>,
    pub snapshots: Vec<(f64, Vec<Complex64>)>,
}

impl LocalSolution {
    pub fn at(&self, t: f64) -> Option<&[Complex64]> {
        self.snapshots
            .iter()
            .min_by(|a, b| (a.0 - t).abs().total_cmp(&(b.0 - t).abs()))
            .map(|(_, v)| v.as_slice())
    }

    /// Real part of the snapshot nearest to `t`, linearly interpolated.
    pub fn sample(&self, t: f64, points: &[f64]) -> Option<Vec<f64>> {
        let re: Vec<f64> = self.at(t)?.iter().map(|v| v.re).collect();
        Some(points.iter().map(|&p| interpolate(&self.x, &re, p)).collect())
    }
}

/// Staggered leapfrog for the local PML system. `u`, `w` sit at the nodes,
/// `v` at cell midpoints; the damping terms are averaged across each step.
pub fn solve_local_pml(
    system: &LocalPmlSystem,
    data: &InitialData,
    t_final: f64,
    tau: f64,
    h: f64,
    record_times: &[f64],
) -> Result<LocalSolution> {
    if !(tau > 0.0 && t_final >= 0.0) {
        return Err(Error::Config(format!("need tau > 0 and T >= 0, got tau={tau}, T={t_final}")));
    }
    if data.forcing.is_some() {
        return Err(Error::Config("the local reference solver takes source-free data".into()));
    }
    let outer = system.profile.outer_edge();
    let cells = node_count(outer, h)? + 1;
    let x: Vec<f64> = (0..=cells).map(|i| -outer + i as f64 * h).collect();
    let mid: Vec<f64> = (0..cells).map(|i| -outer + (i as f64 + 0.5) * h).collect();
    let mu: Vec<f64> = mid.iter().map(|&p| system.coefficient.at(p)).collect();
    if mu.iter().any(|&c| !(c > 0.0 && c.is_finite())) {
        return Err(Error::Config("local coefficient must be positive".into()));
    }
    let z = system.z;
    let damping = |p: f64| {
        let s = system.profile.sigma(p);
        let lo = 1.0 - z * (0.5 * tau * s);
        let hi = 1.0 + z * (0.5 * tau * s);
        (lo, hi.inv())
    };
    let node_damp: Vec<(Complex64, Complex64)> = x.iter().map(|&p| damping(p)).collect();
    let mid_damp: Vec<(Complex64, Complex64)> = mid.iter().map(|&p| damping(p)).collect();

    let psi0: Vec<f64> = x
        .iter()
        .enumerate()
        .map(|(i, &p)| if i == 0 || i == cells { 0.0 } else { (data.psi0)(p) })
        .collect();
    let mut u: Vec<Complex64> = psi0.iter().map(|&v| Complex64::from(v)).collect();
    let mut v: Vec<Complex64> = (0..cells).map(|i| Complex64::from(mu[i] * (psi0[i + 1] - psi0[i]) / h)).collect();
    let mut w = vec![Complex64::new(0.0, 0.0); cells + 1];
    for i in 1..cells {
        let p1 = (data.psi1)(x[i]);
        let s = system.profile.sigma(x[i]);
        w[i] = p1 + ((v[i] - v[i - 1]) / h - z * (s * p1)) * (0.5 * tau);
    }

    let steps = (t_final / tau - 1e-9).ceil().max(0.0) as usize;
    let wanted = record_steps(record_times, tau, steps);
    let guard = 1e6 * (1.0 + psi0.iter().fold(0.0f64, |m, v| m.max(v.abs())));
    let mut snapshots = Vec::with_capacity(wanted.len());
    let mut next = 0;
    for k in 0..=steps {
        if next < wanted.len() && wanted[next] == k {
            snapshots.push((k as f64 * tau, u.clone()));
            next += 1;
        }
        if k == steps {
            break;
        }
        let mut peak = 0.0f64;
        for i in 1..cells {
            u[i] += w[i] * tau;
            peak = peak.max(u[i].norm());
        }
        if !(peak <= guard) {
            return Err(Error::BlowUp { step: k + 1, time: (k + 1) as f64 * tau, magnitude: peak });
        }
        for i in 0..cells {
            let (lo, hi_inv) = mid_damp[i];
            v[i] = (lo * v[i] + (w[i + 1] - w[i]) * (tau * mu[i] / h)) * hi_inv;
        }
        for i in 1..cells {
            let (lo, hi_inv) = node_damp[i];
            w[i] = (lo * w[i] + (v[i] - v[i - 1]) * (tau / h)) * hi_inv;
        }
    }
    Ok(LocalSolution { x, snapshots })
}

/// Observed orders of the local solver under simultaneous refinement of `h`
/// and `τ` (fixed ratio `tau / h`), measured against the solution on the
/// finest grid of the list refined four more times.
pub fn manufactured_convergence(
    system: &LocalPmlSystem,
    data: &InitialData,
    t_final: f64,
    h_list: &[f64],
    courant: f64,
) -> Result<Vec<f64>> {
    if h_list.len() < 2 {
        return Err(Error::Config("at least two grids are needed for an order".into()));
    }
    for pair in h_list.windows(2) {
        if (pair[0] / pair[1] - 2.0).abs() > 1e-9 {
            return Err(Error::Config(format!("grids must halve successively, got {} then {}", pair[0], pair[1])));
        }
    }
    let finest = *h_list.last().unwrap() / 16.0;
    let steps_for = |h: f64| (t_final / (courant * h)).ceil().max(1.0);
    let reference = solve_local_pml(system, data, t_final, t_final / steps_for(finest), finest, &[t_final])?;
    let mut errors = Vec::with_capacity(h_list.len());
    for &h in h_list {
        let sol = solve_local_pml(system, data, t_final, t_final / steps_for(h), h, &[t_final])?;
        let exact = reference.sample(t_final, &sol.x).unwrap_or_default();
        let num = sol.sample(t_final, &sol.x).unwrap_or_default();
        let rms = (num.iter().zip(&exact).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / num.len() as f64).sqrt();
        errors.push(rms);
    }
    Ok(errors.windows(2).map(|e| (e[0] / e[1]).log2()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian_bump() -> InitialData {
        InitialData::new(Arc::new(|x: f64| (-25.0 * x * x).exp()), Arc::new(|_| 0.0))
    }

    #[test]
    fn interpolation() {
        let x = [0.0, 1.0, 2.0];
        let v = [1.0, 3.0, 5.0];
        assert_eq!(interpolate(&x, &v, 1.5), 4.0);
        assert_eq!(interpolate(&x, &v, 2.0), 5.0);
        assert_eq!(interpolate(&x, &v, 7.0), 0.0);
        assert_eq!(interpolate(&x, &v, 2.5), 2.5);
    }

    #[test]
    fn nonlocal_reference_zero_data() {
        let k = KernelSpec::gaussian(0.25).unwrap();
        let sol = solve_nonlocal_reference(&k, &InitialData::zero(), 0.5, 0.01, 1.0 / 16.0, 3.0, &[0.5], 4).unwrap();
        assert!(sol.at(0.5).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn halfwidth_aligns_dyadic_grids() {
        let p = AbsorberProfile::linear(1.5, 1.0).unwrap();
        let l = default_halfwidth(&p, 3.0, 1.0);
        assert_eq!(l, 6.5);
        assert!(node_count(l, 1.0 / 256.0).is_ok());
    }

    #[test]
    fn default_halfwidth_hides_the_boundary() {
        let p = AbsorberProfile::linear(2.0, 2.0).unwrap();
        let k = KernelSpec::gaussian(0.5).unwrap();
        let data = crate::presets::Example::Ex2.initial_data();
        let (t, h) = (4.0, 1.0 / 16.0);
        let l = default_halfwidth(&p, t, 1.0);
        let near = solve_nonlocal_reference(&k, &data, t, 0.01, h, l, &[t], 4).unwrap();
        let far = solve_nonlocal_reference(&k, &data, t, 0.01, h, l + 6.0, &[t], 4).unwrap();
        let pts: Vec<f64> = (-64..=64).map(|i| i as f64 * h).collect();
        let a = near.sample(t, &pts).unwrap();
        let b = far.sample(t, &pts).unwrap();
        let gap = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(gap < 1e-10, "{gap}");
    }

    #[test]
    fn doubling_is_invisible() {
        let k = KernelSpec::gaussian(0.25).unwrap();
        let d = doubling_discrepancy(&k, &gaussian_bump(), 1.0, 0.005, 1.0 / 16.0, 4.0, 1.0, 4).unwrap();
        assert!(d < 1e-8, "{d}");
    }

    #[test]
    fn leapfrog_matches_dalembert() {
        let sys = LocalPmlSystem {
            coefficient: Coefficient::Constant(1.0),
            profile: AbsorberProfile::linear(2.0, 1.0).unwrap(),
            z: Complex64::new(0.0, 0.0),
        };
        let t = 1.0;
        let exact = |x: f64| 0.5 * ((-25.0 * (x - t).powi(2)).exp() + (-25.0 * (x + t).powi(2)).exp());
        let mut errs = Vec::new();
        for p in 5..=7 {
            let h = 2f64.powi(-p);
            let sol = solve_local_pml(&sys, &gaussian_bump(), t, 0.5 * h, h, &[t]).unwrap();
            let num = sol.sample(t, &sol.x).unwrap();
            let e = sol.x.iter().zip(&num).map(|(&x, v)| (v - exact(x)).abs()).fold(0.0, f64::max);
            errs.push(e);
        }
        for w in errs.windows(2) {
            let r = w[0] / w[1];
            assert!((3.5..4.6).contains(&r), "{errs:?}");
        }
    }

    #[test]
    fn absorber_off_without_z() {
        let p = AbsorberProfile::linear(1.0, 1.0).unwrap();
        let a = LocalPmlSystem { coefficient: Coefficient::Constant(1.0), profile: p.clone(), z: Complex64::new(0.0, 0.0) };
        let b = LocalPmlSystem {
            coefficient: Coefficient::Constant(1.0),
            profile: AbsorberProfile::linear(1.0, 1.0).unwrap(),
            z: Complex64::new(20.0, 0.0),
        };
        let sa = solve_local_pml(&a, &gaussian_bump(), 0.4, 0.01, 1.0 / 32.0, &[0.4]).unwrap();
        let sb = solve_local_pml(&b, &gaussian_bump(), 0.4, 0.01, 1.0 / 32.0, &[0.4]).unwrap();
        // before the pulse reaches the layer the absorber has no effect
        for (u, v) in sa.at(0.4).unwrap().iter().zip(sb.at(0.4).unwrap()) {
            assert!((u - v).norm() < 1e-6);
        }
        assert!(sa.at(0.4).unwrap().iter().all(|v| v.im == 0.0));
    }

    #[test]
    fn layer_absorbs() {
        let sys = LocalPmlSystem {
            coefficient: Coefficient::Constant(1.0),
            profile: AbsorberProfile::linear(1.5, 1.0).unwrap(),
            z: Complex64::new(20.0, 0.0),
        };
        let sol = solve_local_pml(&sys, &gaussian_bump(), 3.0, 1.0 / 400.0, 1.0 / 128.0, &[0.0, 3.0]).unwrap();
        let end = sol.at(3.0).unwrap();
        let peak = end.iter().map(|v| v.norm()).fold(0.0, f64::max);
        assert!(peak < 1e-3, "{peak}");
    }

    #[test]
    fn manufactured_order() {
        let sys = LocalPmlSystem {
            coefficient: Coefficient::Field(Arc::new(|x: f64| 1.0 + (-3.0 * x * x).exp())),
            profile: AbsorberProfile::linear(2.0, 2.0).unwrap(),
            z: Complex64::new(10.0, 0.0),
        };
        let orders = manufactured_convergence(&sys, &gaussian_bump(), 1.5, &[1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0], 0.4).unwrap();
        for o in &orders {
            assert!((1.8..2.2).contains(o), "{orders:?}");
        }
        assert!(manufactured_convergence(&sys, &gaussian_bump(), 1.0, &[0.1, 0.1], 0.4).is_err());
    }
}
