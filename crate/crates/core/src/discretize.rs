//! Uniform grid, asymptotically compatible assembly of the PML operator and
//! the semi-discrete system.
//!
//! For contour node `ξ_j` with weight `ϖ_j` the off-diagonal weights are
//!
//! ```text
//! ã_{n,k}^j = -(ϖ_j / ((k - n) h)) ∫ φ_k(y) (y - x_n) K(x_n + (x_k - y)/2, (x_k + y)/2, ξ_j) dy
//! ```
//!
//! with `φ_k` the hat function at `x_k`, and the diagonal closes each row to a
//! zero sum. Stencil neighbours that fall outside the unknown range still feed
//! the diagonal; their unknowns are identically zero.
//!
//! Rows whose stencil never touches the absorber have `ã^j = (ϖ_j/ξ_j) a` with
//! a single real row `a`; those rows are stored once in real arithmetic.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernels::KernelSpec;
use crate::quad::GaussLegendre;
use crate::stretch::{transformed_kernel_at, AbsorberProfile, PmlParams, StretchPoint};
use crate::talbot::{validate_contour, TalbotContour};

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
/// Source term `f(x, t)`.
pub type ForcingFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Initial displacement `ψ0`, initial velocity `ψ1` and optional source.
#[derive(Clone)]
pub struct InitialData {
    pub psi0: ScalarFn,
    pub psi1: ScalarFn,
    pub forcing: Option<ForcingFn>,
}

impl InitialData {
    pub fn new(psi0: ScalarFn, psi1: ScalarFn) -> Self {
        Self { psi0, psi1, forcing: None }
    }

    pub fn zero() -> Self {
        Self::new(Arc::new(|_| 0.0), Arc::new(|_| 0.0))
    }

    pub fn with_forcing(mut self, f: ForcingFn) -> Self {
        self.forcing = Some(f);
        self
    }

    /// Same data multiplied by `c` (source included).
    pub fn scaled(&self, c: f64) -> Self {
        let (p0, p1) = (self.psi0.clone(), self.psi1.clone());
        Self {
            psi0: Arc::new(move |x| c * p0(x)),
            psi1: Arc::new(move |x| c * p1(x)),
            forcing: self.forcing.clone().map(|f| -> ForcingFn { Arc::new(move |x, t| c * f(x, t)) }),
        }
    }
}

impl fmt::Debug for InitialData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("InitialData").field("forcing", &self.forcing.is_some()).finish_non_exhaustive()
    }
}

/// Uniform grid `x_i = x_0 + i h` over `[-(l + d_p), l + d_p]`.
///
/// Unknowns are `x_1 .. x_N`; they are addressed 0-based throughout, so
/// unknown `i` sits at `x_{i+1}`.
#[derive(Clone, Debug)]
pub struct Grid1D {
    h: f64,
    x0: f64,
    n: usize,
    half_width: f64,
    horizon: f64,
    reach: usize,
    interior: Vec<usize>,
    layer: Vec<usize>,
}

impl Grid1D {
    pub fn h(&self) -> f64 {
        self.h
    }

    /// Number of unknowns `N`.
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Coordinate of unknown `i` (0-based).
    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.x0 + (i + 1) as f64 * self.h
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    /// Outer boundary `x_0`.
    pub fn left(&self) -> f64 {
        self.x0
    }

    /// Interior half-width `l`.
    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Largest stencil offset `|k - n|` with a nonzero weight.
    pub fn reach(&self) -> usize {
        self.reach
    }

    /// `ceil(H/h) + 1`.
    pub fn bandwidth(&self) -> usize {
        (self.horizon / self.h - 1e-9).ceil() as usize + 1
    }

    /// Unknowns with `|x| < l`.
    pub fn interior(&self) -> &[usize] {
        &self.interior
    }

    /// Unknowns inside the absorbing layer.
    pub fn layer(&self) -> &[usize] {
        &self.layer
    }

    /// Whether row `i` only couples to points where the absorber vanishes.
    pub fn row_is_unstretched(&self, i: usize) -> bool {
        self.x(i).abs() + self.horizon + 0.5 * self.h <= self.half_width * (1.0 + 1e-14)
    }
}

/// Grid over the truncated domain of `profile` for kernels of horizon
/// `horizon`.
pub fn build_grid(profile: &AbsorberProfile, horizon: f64, h: f64) -> Result<Grid1D> {
    if !(h.is_finite() && h > 0.0) || !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::Config(format!("grid needs h > 0 and horizon > 0, got h={h}, horizon={horizon}")));
    }
    let outer = profile.outer_edge();
    let cells_f = 2.0 * outer / h;
    let cells = cells_f.round();
    if (cells_f - cells).abs() > 1e-9 * cells_f.max(1.0) || cells < 2.0 {
        return Err(Error::Config(format!(
            "h = {h} does not divide the truncated domain of width {}",
            2.0 * outer
        )));
    }
    let n = cells as usize - 1;
    let l = profile.half_width();
    let x0 = -outer;
    let (mut interior, mut layer) = (Vec::new(), Vec::new());
    for i in 0..n {
        let x = x0 + (i + 1) as f64 * h;
        if x.abs() < l - 1e-9 * h {
            interior.push(i);
        } else {
            layer.push(i);
        }
    }
    let reach = (horizon / h + 1.0 + 1e-9).floor() as usize;
    Ok(Grid1D { h, x0, n, half_width: l, horizon, reach, interior, layer })
}

/// Weighted quadrature sample of one stencil entry: offset slot, weight
/// `w φ_k(y) (y - x_n)`, integration point `y`, and `x_k`.
#[derive(Clone, Copy, Debug)]
struct Sample {
    slot: usize,
    weight: f64,
    y: f64,
    xk: f64,
}

fn row_samples(xn: f64, h: f64, reach: usize, horizon: f64, scale: f64, rule: &GaussLegendre) -> Vec<Sample> {
    let r = reach as isize;
    let mut out = Vec::with_capacity(2 * reach * 2 * rule.order());
    for d in -r..=r {
        if d == 0 {
            continue;
        }
        let xk = xn + d as f64 * h;
        for (a, b) in [(xk - h, xk), (xk, xk + h)] {
            let lo = a.max(xn - horizon);
            let hi = b.min(xn + horizon);
            if hi <= lo {
                continue;
            }
            let panels = ((hi - lo) / scale).ceil().max(1.0) as usize;
            let width = (hi - lo) / panels as f64;
            for p in 0..panels {
                let pa = lo + p as f64 * width;
                for (y, w) in rule.mapped(pa, pa + width) {
                    let phi = 1.0 - (y - xk).abs() / h;
                    out.push(Sample { slot: (d + r) as usize, weight: w * phi * (y - xn), y, xk });
                }
            }
        }
    }
    out
}

fn close_row<T: Copy + std::ops::Neg<Output = T> + std::iter::Sum<T>>(row: &mut [T], reach: usize) {
    let diag = -row.iter().enumerate().filter(|(s, _)| *s != reach).map(|(_, v)| *v).sum::<T>();
    row[reach] = diag;
}

/// Unstretched AC row centred at `xn`: `2 reach + 1` weights indexed by
/// offset `k - n + reach`, diagonal included.
fn real_row(kernel: &KernelSpec, rule: &GaussLegendre, xn: f64, h: f64, reach: usize) -> Vec<f64> {
    let horizon = kernel.horizon();
    let mut row = vec![0.0; 2 * reach + 1];
    for s in row_samples(xn, h, reach, horizon, kernel.length_scale(), rule) {
        row[s.slot] += s.weight * kernel.value(s.y - xn, 0.5 * (xn + s.xk));
    }
    for (slot, v) in row.iter_mut().enumerate() {
        if slot != reach {
            let d = slot as f64 - reach as f64;
            *v *= -1.0 / (d * h);
        }
    }
    close_row(&mut row, reach);
    row
}

/// Stretched AC rows for all contour nodes at once, laid out
/// `[(k - n + reach) * m + j]`.
#[allow(clippy::too_many_arguments)]
fn complex_rows(
    kernel: &KernelSpec,
    profile: &AbsorberProfile,
    pml: &PmlParams,
    rule: &GaussLegendre,
    xn: f64,
    h: f64,
    reach: usize,
    xi: &[Complex64],
    varpi: &[Complex64],
) -> Vec<Complex64> {
    let m = xi.len();
    let width = 2 * reach + 1;
    let mut row = vec![Complex64::new(0.0, 0.0); width * m];
    let z_over_s: Vec<Complex64> = xi.iter().map(|&s| pml.z / s).collect();
    let inv_s: Vec<Complex64> = xi.iter().map(|s| s.inv()).collect();
    // Inside the layer the stretch compresses the kernel profile by up to
    // |1 + z/ξ|; rows that never see it keep the plain panels.
    let untouched = xn.abs() + kernel.horizon() + 0.5 * h <= profile.half_width() * (1.0 + 1e-14);
    let squeeze = if untouched { 1.0 } else { 1.0 + z_over_s.iter().map(|v| v.norm()).fold(0.0, f64::max) };
    for s in row_samples(xn, h, reach, kernel.horizon(), kernel.length_scale() / squeeze, rule) {
        let px = StretchPoint::new(profile, xn + 0.5 * (s.xk - s.y));
        let py = StretchPoint::new(profile, 0.5 * (s.xk + s.y));
        let out = &mut row[s.slot * m..(s.slot + 1) * m];
        for j in 0..m {
            out[j] += transformed_kernel_at(kernel, &px, &py, z_over_s[j], inv_s[j]) * s.weight;
        }
    }
    for slot in 0..width {
        if slot == reach {
            continue;
        }
        let d = slot as f64 - reach as f64;
        for j in 0..m {
            row[slot * m + j] *= -varpi[j] / (d * h);
        }
    }
    for j in 0..m {
        let mut sum = Complex64::new(0.0, 0.0);
        for slot in 0..width {
            if slot != reach {
                sum += row[slot * m + j];
            }
        }
        row[reach * m + j] = -sum;
    }
    row
}

/// Banded real matrix, `2 reach + 1` entries per row indexed by `k - n + reach`.
#[derive(Clone, Debug)]
pub struct BandedReal {
    n: usize,
    reach: usize,
    data: Vec<f64>,
}

impl BandedReal {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn reach(&self) -> usize {
        self.reach
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let w = 2 * self.reach + 1;
        &self.data[i * w..(i + 1) * w]
    }

    /// Entry `(i, k)`; zero outside the band. Phantom columns are reachable via
    /// signed `k`.
    pub fn entry(&self, i: usize, k: isize) -> f64 {
        let d = k - i as isize;
        if d.unsigned_abs() > self.reach {
            0.0
        } else {
            self.row(i)[(d + self.reach as isize) as usize]
        }
    }

    /// `out = A v` with zero extension of `v` beyond its ends.
    pub fn apply(&self, v: &[f64], out: &mut [f64]) {
        let r = self.reach as isize;
        let n = self.n as isize;
        for (i, o) in out.iter_mut().enumerate() {
            let row = self.row(i);
            let lo = (i as isize - r).max(0);
            let hi = (i as isize + r).min(n - 1);
            let mut acc = 0.0;
            for k in lo..=hi {
                acc += row[(k - i as isize + r) as usize] * v[k as usize];
            }
            *o = acc;
        }
    }
}

/// Unstretched (`z = 0`) AC matrix on the nodes `first + i h`, `i < count`.
pub fn assemble_real_band(kernel: &KernelSpec, quad_order: usize, first: f64, h: f64, count: usize) -> Result<BandedReal> {
    let rule = GaussLegendre::new(quad_order)?;
    let reach = (kernel.horizon() / h + 1.0 + 1e-9).floor() as usize;
    let data: Vec<f64> = (0..count)
        .into_par_iter()
        .flat_map_iter(|i| real_row(kernel, &rule, first + i as f64 * h, h, reach))
        .collect();
    Ok(BandedReal { n: count, reach, data })
}

/// Banded complex matrix for one contour node.
#[derive(Clone, Debug)]
pub struct BandedComplex {
    n: usize,
    reach: usize,
    data: Vec<Complex64>,
}

impl BandedComplex {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn reach(&self) -> usize {
        self.reach
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        let w = 2 * self.reach + 1;
        &self.data[i * w..(i + 1) * w]
    }

    pub fn entry(&self, i: usize, k: isize) -> Complex64 {
        let d = k - i as isize;
        if d.unsigned_abs() > self.reach {
            Complex64::new(0.0, 0.0)
        } else {
            self.row(i)[(d + self.reach as isize) as usize]
        }
    }
}

/// `Ã_j` for a single contour node `(ξ_j, ϖ_j)`, every row through the
/// stretched kernel.
pub fn assemble_matrix(
    grid: &Grid1D,
    kernel: &KernelSpec,
    profile: &AbsorberProfile,
    pml: &PmlParams,
    xi: Complex64,
    varpi: Complex64,
    quad_order: usize,
) -> Result<BandedComplex> {
    if xi == Complex64::new(0.0, 0.0) {
        return Err(Error::Domain("contour node at s = 0".into()));
    }
    let rule = GaussLegendre::new(quad_order)?;
    let reach = grid.reach();
    let data = (0..grid.len())
        .into_par_iter()
        .flat_map_iter(|i| complex_rows(kernel, profile, pml, &rule, grid.x(i), grid.h(), reach, &[xi], &[varpi]))
        .collect();
    Ok(BandedComplex { n: grid.len(), reach, data })
}

/// `g_n = -∫_D [ψ0(x_n) - ψ0(y)] γ(y - x_n, (x_n + y)/2) dy` over the band
/// `|y - x_n| ≤ H`.
pub fn correction_vector(grid: &Grid1D, kernel: &KernelSpec, psi0: &(dyn Fn(f64) -> f64 + Sync)) -> Vec<f64> {
    let rule = GaussLegendre::new(8).expect("order 8 is valid");
    let l = grid.half_width();
    let horizon = kernel.horizon();
    let panel = 0.5 * grid.h().min(kernel.length_scale());
    (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let xn = grid.x(i);
            let p_n = psi0(xn);
            let mut acc = 0.0;
            for (a, b) in [(xn - horizon, xn), (xn, xn + horizon)] {
                let lo = a.max(-l);
                let hi = b.min(l);
                if hi <= lo {
                    continue;
                }
                let panels = ((hi - lo) / panel).ceil().max(1.0) as usize;
                acc += rule.integrate(|y| (p_n - psi0(y)) * kernel.value(y - xn, 0.5 * (xn + y)), lo, hi, panels);
            }
            -acc
        })
        .collect()
}

/// Largest `|ψ0|` outside `(x_l + δ, x_r - δ)` relative to its overall
/// maximum on the truncated domain; zero when the support assumption holds.
pub fn support_leak(psi0: &dyn Fn(f64) -> f64, profile: &AbsorberProfile, delta: f64) -> f64 {
    const SAMPLES: usize = 20_000;
    let outer = profile.outer_edge();
    let inner = profile.half_width() - delta;
    let (mut inside, mut outside) = (0.0f64, 0.0f64);
    for i in 0..=SAMPLES {
        let x = -outer + 2.0 * outer * i as f64 / SAMPLES as f64;
        let v = psi0(x).abs();
        if x.abs() < inner {
            inside = inside.max(v);
        } else {
            outside = outside.max(v);
        }
    }
    let peak = inside.max(outside);
    if peak == 0.0 {
        0.0
    } else {
        outside / peak
    }
}

/// How the per-node matrices are stored.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum StorageMode {
    /// Unstretched rows as one real row plus the scalars `ϖ_j/ξ_j`.
    #[default]
    Hybrid,
    /// Every row assembled through the stretched kernel for every node.
    Full,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AssemblyOptions {
    /// Gauss-Legendre points per half-support element.
    pub quad_order: usize,
    pub storage: StorageMode,
    /// Keep only one node of each conjugate pair and double the real part of
    /// the contour sum. Requires real `z`, even `m` and real data.
    pub conjugate_pairs: bool,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        Self { quad_order: 4, storage: StorageMode::Hybrid, conjugate_pairs: false }
    }
}

#[derive(Clone, Copy, Debug)]
enum RowSlot {
    Real(usize),
    Stretched(usize),
}

/// The `m` operators `Ã_j` in row-compressed form.
#[derive(Clone, Debug)]
pub struct AcOperator {
    n: usize,
    reach: usize,
    m: usize,
    scale: Vec<Complex64>,
    slots: Vec<RowSlot>,
    real: Vec<f64>,
    stretched: Vec<Complex64>,
    paired: bool,
}

impl AcOperator {
    /// Operator from explicit rows: `rows[i]` holds `(2 reach + 1) m` weights
    /// laid out `[(k - i + reach) m + j]`.
    pub fn from_rows(reach: usize, m: usize, rows: &[Vec<Complex64>]) -> Result<Self> {
        let w = (2 * reach + 1) * m;
        if m == 0 || rows.iter().any(|r| r.len() != w) {
            return Err(Error::Config(format!("operator rows must each hold {w} weights")));
        }
        Ok(Self {
            n: rows.len(),
            reach,
            m,
            scale: vec![Complex64::new(0.0, 0.0); m],
            slots: (0..rows.len()).map(RowSlot::Stretched).collect(),
            real: Vec::new(),
            stretched: rows.concat(),
            paired: false,
        })
    }

    /// Number of contour nodes carried (half of `m` with conjugate pairing).
    pub fn nodes(&self) -> usize {
        self.m
    }

    pub fn reach(&self) -> usize {
        self.reach
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn is_paired(&self) -> bool {
        self.paired
    }

    /// Number of rows held in real form.
    pub fn real_rows(&self) -> usize {
        self.slots.iter().filter(|s| matches!(s, RowSlot::Real(_))).count()
    }

    /// `ã_{i,k}^j`, with signed `k` so that phantom columns can be inspected.
    pub fn entry(&self, j: usize, i: usize, k: isize) -> Complex64 {
        let d = k - i as isize;
        if d.unsigned_abs() > self.reach {
            return Complex64::new(0.0, 0.0);
        }
        let slot = (d + self.reach as isize) as usize;
        let w = 2 * self.reach + 1;
        match self.slots[i] {
            RowSlot::Real(r) => self.scale[j] * self.real[r * w + slot],
            RowSlot::Stretched(r) => self.stretched[(r * w + slot) * self.m + j],
        }
    }

    /// Full stencil row sum of `Ã_j` (phantom columns included).
    pub fn row_sum(&self, j: usize, i: usize) -> Complex64 {
        let r = self.reach as isize;
        (-r..=r).map(|d| self.entry(j, i, i as isize + d)).sum()
    }

    /// `out = Σ_j Ã_j p_j`.
    ///
    /// `p` holds the auxiliary states node-major with `reach` zero nodes of
    /// padding on each side: `p[(i + reach) m + j]`. `combined` is scratch of
    /// length `n + 2 reach`.
    pub fn apply(&self, p: &[Complex64], combined: &mut [Complex64], out: &mut [Complex64]) {
        let m = self.m;
        let w = 2 * self.reach + 1;
        debug_assert_eq!(p.len(), (self.n + 2 * self.reach) * m);
        for (c, node) in combined.iter_mut().zip(p.chunks_exact(m)) {
            *c = dot(&self.scale, node);
        }
        for (i, o) in out.iter_mut().enumerate() {
            let v = match self.slots[i] {
                RowSlot::Real(r) => {
                    let coeffs = &self.real[r * w..(r + 1) * w];
                    let window = &combined[i..i + w];
                    let (mut re, mut im) = (0.0, 0.0);
                    for (a, c) in coeffs.iter().zip(window) {
                        re += a * c.re;
                        im += a * c.im;
                    }
                    Complex64::new(re, im)
                }
                RowSlot::Stretched(r) => dot(&self.stretched[r * w * m..(r + 1) * w * m], &p[i * m..(i + w) * m]),
            };
            *o = if self.paired { Complex64::new(2.0 * v.re, 0.0) } else { v };
        }
    }
}

#[inline]
fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    let (mut rr, mut ii, mut ri, mut ir) = (0.0, 0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        rr += x.re * y.re;
        ii += x.im * y.im;
        ri += x.re * y.im;
        ir += x.im * y.re;
    }
    Complex64::new(rr - ii, ri + ir)
}

/// Everything the time integrator needs.
#[derive(Clone)]
pub struct SemiDiscreteSystem {
    pub grid: Grid1D,
    pub kernel: KernelSpec,
    pub profile: AbsorberProfile,
    pub pml: PmlParams,
    pub contour: TalbotContour,
    /// Contour nodes carried by the integrator (all of them, or one per
    /// conjugate pair).
    pub xi: Vec<Complex64>,
    pub operator: AcOperator,
    /// `σ(x_n)`.
    pub sigma: Vec<f64>,
    /// Correction vector `g`; the right-hand side is `f + g`.
    pub correction: Vec<f64>,
    pub psi0: Vec<f64>,
    pub psi1: Vec<f64>,
    pub forcing: Option<ForcingFn>,
}

impl fmt::Debug for SemiDiscreteSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SemiDiscreteSystem")
            .field("grid", &self.grid)
            .field("kernel", &self.kernel)
            .field("pml", &self.pml)
            .field("nodes", &self.xi.len())
            .field("forcing", &self.forcing.is_some())
            .finish_non_exhaustive()
    }
}

impl SemiDiscreteSystem {
    pub fn assemble(
        grid: Grid1D,
        kernel: KernelSpec,
        profile: AbsorberProfile,
        pml: PmlParams,
        contour: TalbotContour,
        data: &InitialData,
        options: AssemblyOptions,
    ) -> Result<Self> {
        kernel.validate()?;
        if (grid.horizon() - kernel.horizon()).abs() > 1e-12 * kernel.horizon() {
            return Err(Error::Config("grid was built for a different kernel horizon".into()));
        }
        let diag = validate_contour(&contour, &pml, kernel.kind());
        if !diag.passes(kernel.kind()) {
            return Err(Error::Validation(format!(
                "contour (omega={}, mu={}, nu={}, m={}) rejected for {:?} kernel with z={}: {:?}",
                contour.omega(),
                contour.mu(),
                contour.nu(),
                contour.m(),
                kernel.kind(),
                pml.z,
                diag
            )));
        }
        if contour.nodes().iter().any(|xi| xi.norm() == 0.0) {
            return Err(Error::Domain("contour passes through s = 0".into()));
        }
        let m_all = contour.m();
        let paired = options.conjugate_pairs;
        if paired && (!pml.is_real() || !m_all.is_multiple_of(2)) {
            return Err(Error::Config("conjugate pairing needs a real z and an even node count".into()));
        }
        let keep = if paired { m_all / 2 } else { m_all };
        let xi: Vec<Complex64> = contour.nodes()[..keep].to_vec();
        let varpi: Vec<Complex64> = contour.weights()[..keep].to_vec();
        let scale: Vec<Complex64> = xi.iter().zip(&varpi).map(|(x, w)| w / x).collect();

        let rule = GaussLegendre::new(options.quad_order)?;
        let reach = grid.reach();
        let n = grid.len();
        let real_set: Vec<bool> = (0..n)
            .map(|i| options.storage == StorageMode::Hybrid && grid.row_is_unstretched(i))
            .collect();
        let real_idx: Vec<usize> = (0..n).filter(|&i| real_set[i]).collect();
        let stretched_idx: Vec<usize> = (0..n).filter(|&i| !real_set[i]).collect();
        let real: Vec<f64> = real_idx
            .par_iter()
            .flat_map_iter(|&i| real_row(&kernel, &rule, grid.x(i), grid.h(), reach))
            .collect();
        let stretched: Vec<Complex64> = stretched_idx
            .par_iter()
            .flat_map_iter(|&i| complex_rows(&kernel, &profile, &pml, &rule, grid.x(i), grid.h(), reach, &xi, &varpi))
            .collect();
        let mut slots = vec![RowSlot::Real(0); n];
        for (r, &i) in real_idx.iter().enumerate() {
            slots[i] = RowSlot::Real(r);
        }
        for (r, &i) in stretched_idx.iter().enumerate() {
            slots[i] = RowSlot::Stretched(r);
        }
        let operator = AcOperator { n, reach, m: keep, scale, slots, real, stretched, paired };

        let nodes = grid.nodes();
        let sigma = nodes.iter().map(|&x| profile.sigma(x)).collect();
        let psi0 = nodes.iter().map(|&x| (data.psi0)(x)).collect();
        let psi1 = nodes.iter().map(|&x| (data.psi1)(x)).collect();
        let p0 = data.psi0.clone();
        let correction = correction_vector(&grid, &kernel, &move |x| p0(x));
        Ok(Self {
            grid,
            kernel,
            profile,
            pml,
            contour,
            xi,
            operator,
            sigma,
            correction,
            psi0,
            psi1,
            forcing: data.forcing.clone(),
        })
    }

    /// `f(x_n, t)` into `out`; zeros without a source.
    pub fn forcing_into(&self, t: f64, out: &mut [f64]) {
        match &self.forcing {
            Some(f) => {
                for (i, o) in out.iter_mut().enumerate() {
                    *o = f(self.grid.x(i), t);
                }
            }
            None => out.fill(0.0),
        }
    }
}
