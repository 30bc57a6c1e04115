//! Staggered Verlet-type integration of the semi-discrete PML system
//!
//! ```text
//! q' = w
//! w' + z D_σ w + Σ_j Ã_j p_j = f + g
//! p_j' = ξ_j p_j + w
//! ```
//!
//! `q` and `p_j` live at integer steps, `w` at half steps. The `p_j` update is
//! the trapezoidal rule, solved in closed form per component; the damping term
//! is averaged across the half steps.

use num_complex::Complex64;

use crate::discretize::SemiDiscreteSystem;
use crate::error::{Error, Result};

/// How the first half-step velocity is formed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum HalfStepRule {
    /// `w^{1/2} = Ψ1 + (τ/2)(f⁰ + g - z D_σ Ψ1)`.
    #[default]
    WithCorrection,
    /// Same without the correction vector `g`.
    Literal,
}

/// Integrator state at step `k`: `q^k`, `w^{k+1/2}` and `p_j^k`.
#[derive(Clone, Debug)]
pub struct WaveState {
    pub k: usize,
    pub tau: f64,
    pub q: Vec<Complex64>,
    pub w: Vec<Complex64>,
    /// Auxiliary states, node-major with `reach` zero nodes of padding on
    /// either side: `p[(i + reach) m + j]`.
    pub p: Vec<Complex64>,
}

impl WaveState {
    pub fn time(&self) -> f64 {
        self.k as f64 * self.tau
    }
}

/// Precomputed per-step coefficients plus scratch space.
#[derive(Debug)]
pub struct Stepper<'a> {
    system: &'a SemiDiscreteSystem,
    tau: f64,
    amp: Vec<Complex64>,
    inject: Vec<Complex64>,
    damp_lo: Vec<Complex64>,
    damp_hi_inv: Vec<Complex64>,
    combined: Vec<Complex64>,
    applied: Vec<Complex64>,
    force: Vec<f64>,
    guard: f64,
}

impl<'a> Stepper<'a> {
    pub fn new(system: &'a SemiDiscreteSystem, tau: f64) -> Result<Self> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::Config(format!("time step must be positive, got {tau}")));
        }
        let mut amp = Vec::with_capacity(system.xi.len());
        let mut inject = Vec::with_capacity(system.xi.len());
        for &xi in &system.xi {
            let denom = 1.0 - xi * (0.5 * tau);
            if denom.norm() < 1e-12 {
                return Err(Error::Config(format!("tau * xi / 2 = 1 for xi = {xi}; choose another time step")));
            }
            amp.push((1.0 + xi * (0.5 * tau)) / denom);
            inject.push(tau / denom);
        }
        let z = system.pml.z;
        let damp_lo = system.sigma.iter().map(|&s| 1.0 - z * (0.5 * tau * s)).collect();
        let damp_hi_inv = system
            .sigma
            .iter()
            .map(|&s| {
                let d = 1.0 + z * (0.5 * tau * s);
                if d.norm() < 1e-12 {
                    Err(Error::Config("damping denominator vanishes; choose another time step".into()))
                } else {
                    Ok(d.inv())
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let n = system.psi0.len();
        let r = system.operator.reach();
        let peak = system.psi0.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        Ok(Self {
            system,
            tau,
            amp,
            inject,
            damp_lo,
            damp_hi_inv,
            combined: vec![Complex64::new(0.0, 0.0); n + 2 * r],
            applied: vec![Complex64::new(0.0, 0.0); n],
            force: vec![0.0; n],
            guard: 1e6 * (1.0 + peak),
        })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// `q⁰ = Ψ0`, `p⁰ = 0` and the first half-step velocity.
    pub fn init_state(&mut self, rule: HalfStepRule) -> WaveState {
        let sys = self.system;
        let n = sys.psi0.len();
        let m = sys.operator.nodes();
        let r = sys.operator.reach();
        sys.forcing_into(0.0, &mut self.force);
        let z = sys.pml.z;
        let with_g = rule == HalfStepRule::WithCorrection;
        let w = (0..n)
            .map(|i| {
                let g = if with_g { sys.correction[i] } else { 0.0 };
                let drive = Complex64::from(self.force[i] + g) - z * (sys.sigma[i] * sys.psi1[i]);
                drive * (0.5 * self.tau) + sys.psi1[i]
            })
            .collect();
        WaveState {
            k: 0,
            tau: self.tau,
            q: sys.psi0.iter().map(|&v| Complex64::from(v)).collect(),
            w,
            p: vec![Complex64::new(0.0, 0.0); (n + 2 * r) * m],
        }
    }

    /// Advances `state` by one step.
    pub fn step(&mut self, state: &mut WaveState) -> Result<()> {
        let sys = self.system;
        let m = sys.operator.nodes();
        let r = sys.operator.reach();
        let tau = self.tau;
        let mut peak = 0.0f64;
        for (q, w) in state.q.iter_mut().zip(&state.w) {
            *q += w * tau;
            peak = peak.max(q.norm_sqr());
        }
        for (i, w) in state.w.iter().enumerate() {
            let row = &mut state.p[(i + r) * m..(i + r + 1) * m];
            for ((p, a), b) in row.iter_mut().zip(&self.amp).zip(&self.inject) {
                *p = a * *p + b * w;
            }
        }
        sys.operator.apply(&state.p, &mut self.combined, &mut self.applied);
        state.k += 1;
        sys.forcing_into(state.k as f64 * tau, &mut self.force);
        for (i, w) in state.w.iter_mut().enumerate() {
            let rhs = Complex64::from(self.force[i] + sys.correction[i]) - self.applied[i];
            *w = (self.damp_lo[i] * *w + rhs * tau) * self.damp_hi_inv[i];
        }
        let peak = peak.sqrt();
        if !(peak <= self.guard) {
            return Err(Error::BlowUp { step: state.k, time: state.time(), magnitude: peak });
        }
        Ok(())
    }
}

/// `q⁰ = Ψ0`, `p⁰ = 0`, `w^{1/2}` by the default rule.
pub fn init_state(system: &SemiDiscreteSystem, tau: f64) -> Result<WaveState> {
    Ok(Stepper::new(system, tau)?.init_state(HalfStepRule::WithCorrection))
}

#[derive(Clone, Debug)]
pub struct Snapshot {
    pub step: usize,
    pub time: f64,
    pub q: Vec<Complex64>,
}

impl Snapshot {
    pub fn real(&self) -> Vec<f64> {
        self.q.iter().map(|v| v.re).collect()
    }
}

#[derive(Debug)]
pub struct Trajectory {
    pub snapshots: Vec<Snapshot>,
    /// `max |Im q| / max |Re q|` over every step taken.
    pub health: f64,
    pub steps: usize,
    /// Set when the blow-up guard stopped the run early.
    pub failure: Option<Error>,
}

impl Trajectory {
    /// Snapshot recorded at the step nearest to `t`.
    pub fn at(&self, t: f64) -> Option<&Snapshot> {
        self.snapshots
            .iter()
            .min_by(|a, b| (a.time - t).abs().total_cmp(&(b.time - t).abs()))
    }

    pub fn last(&self) -> Option<&Snapshot> {
        self.snapshots.last()
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    pub half_step: HalfStepRule,
}

/// Integrates to `t_end` (rounded up to a whole step) and records `q` at the
/// steps nearest to `record_times`; the initial state is always recorded.
pub fn run(system: &SemiDiscreteSystem, t_end: f64, tau: f64, record_times: &[f64], options: RunOptions) -> Result<Trajectory> {
    if !(t_end.is_finite() && t_end >= 0.0) {
        return Err(Error::Config(format!("final time must be nonnegative, got {t_end}")));
    }
    let mut stepper = Stepper::new(system, tau)?;
    let steps = (t_end / tau - 1e-9).ceil().max(0.0) as usize;
    let mut wanted: Vec<usize> = record_times
        .iter()
        .filter(|t| t.is_finite() && **t >= 0.0)
        .map(|t| ((t / tau).round() as usize).min(steps))
        .collect();
    wanted.push(0);
    wanted.sort_unstable();
    wanted.dedup();

    let mut state = stepper.init_state(options.half_step);
    let mut snapshots = Vec::with_capacity(wanted.len());
    let mut next = 0;
    let (mut max_re, mut max_im) = (0.0f64, 0.0f64);
    let mut track = |q: &[Complex64]| {
        for v in q {
            max_re = max_re.max(v.re.abs());
            max_im = max_im.max(v.im.abs());
        }
    };
    track(&state.q);
    let mut failure = None;
    loop {
        if next < wanted.len() && wanted[next] == state.k {
            snapshots.push(Snapshot { step: state.k, time: state.time(), q: state.q.clone() });
            next += 1;
        }
        if state.k >= steps {
            break;
        }
        if let Err(e) = stepper.step(&mut state) {
            failure = Some(e);
            break;
        }
        track(&state.q);
    }
    let health = if max_re > 0.0 { max_im / max_re } else { 0.0 };
    Ok(Trajectory { snapshots, health, steps: state.k, failure })
}
