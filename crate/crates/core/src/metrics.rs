//! Error norms and observed convergence orders.

use std::fmt;

use crate::discretize::Grid1D;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Metric {
    /// RMS over the interior nodes, against the nonlocal reference.
    Eh,
    /// RMS over all unknowns, against the local PML reference.
    Edelta,
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::Eh => "e_h",
            Metric::Edelta => "e_delta",
        })
    }
}

fn rms_over(num: &[f64], reference: &[f64], indices: &[usize]) -> Result<f64> {
    if indices.is_empty() {
        return Err(Error::Config("error norm over an empty index set".into()));
    }
    if num.len() != reference.len() {
        return Err(Error::Config(format!("length mismatch: {} vs {}", num.len(), reference.len())));
    }
    let sum: f64 = indices.iter().map(|&i| (num[i] - reference[i]).powi(2)).sum();
    Ok((sum / indices.len() as f64).sqrt())
}

/// Root mean square of `num - reference` over all entries.
pub fn rms(num: &[f64], reference: &[f64]) -> Result<f64> {
    let all: Vec<usize> = (0..num.len()).collect();
    rms_over(num, reference, &all)
}

/// `e_h`: RMS over the interior index set; both vectors are indexed by unknown.
pub fn error_eh(num: &[f64], reference: &[f64], grid: &Grid1D) -> Result<f64> {
    check_len(num, grid)?;
    rms_over(num, reference, grid.interior())
}

/// `e_δ`: RMS over every unknown (interior and layer).
pub fn error_edelta(num: &[f64], reference: &[f64], grid: &Grid1D) -> Result<f64> {
    check_len(num, grid)?;
    rms(num, reference)
}

fn check_len(num: &[f64], grid: &Grid1D) -> Result<()> {
    if num.len() != grid.len() {
        return Err(Error::Config(format!("vector of length {} on a grid with {} unknowns", num.len(), grid.len())));
    }
    Ok(())
}

/// `log2(e(h)/e(h/2))` for consecutive entries of a halving sequence.
pub fn orders(errors: &[(f64, f64)]) -> Result<Vec<(f64, f64)>> {
    errors
        .windows(2)
        .map(|w| {
            let ((h0, e0), (h1, e1)) = (w[0], w[1]);
            if (h0 / h1 - 2.0).abs() > 1e-9 {
                return Err(Error::Config(format!("mesh sizes {h0} and {h1} are not a halving pair")));
            }
            Ok((h1, (e0 / e1).log2()))
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorRow {
    pub h: f64,
    pub delta: f64,
    pub error: f64,
    /// Order against the previous (coarser) row of the same sweep.
    pub order: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ErrorReport {
    pub metric: Metric,
    pub time: f64,
    pub rows: Vec<ErrorRow>,
}

impl ErrorReport {
    pub fn new(metric: Metric, time: f64) -> Self {
        Self { metric, time, rows: Vec::new() }
    }

    /// Appends a sweep ordered from coarse to fine, filling in orders.
    pub fn push_sweep(&mut self, entries: &[(f64, f64, f64)]) -> Result<()> {
        let pairs: Vec<(f64, f64)> = entries.iter().map(|&(h, _, e)| (h, e)).collect();
        let ords = orders(&pairs)?;
        for (i, &(h, delta, error)) in entries.iter().enumerate() {
            let order = if i == 0 { None } else { Some(ords[i - 1].1) };
            self.rows.push(ErrorRow { h, delta, error, order });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::build_grid;
    use crate::stretch::AbsorberProfile;
    use proptest::prelude::*;

    fn grid() -> Grid1D {
        build_grid(&AbsorberProfile::linear(1.5, 1.0).unwrap(), 0.5, 1.0 / 16.0).unwrap()
    }

    #[test]
    fn basic_norms() {
        let g = grid();
        let a: Vec<f64> = (0..g.len()).map(|i| (i as f64).sin()).collect();
        assert_eq!(error_eh(&a, &a, &g).unwrap(), 0.0);
        assert_eq!(error_edelta(&a, &a, &g).unwrap(), 0.0);
        let b: Vec<f64> = a.iter().map(|v| v + 0.25).collect();
        assert!((error_eh(&a, &b, &g).unwrap() - 0.25).abs() < 1e-15);
        assert!((error_edelta(&a, &b, &g).unwrap() - 0.25).abs() < 1e-15);
        assert!(error_eh(&a[1..], &b[1..], &g).is_err());
    }

    #[test]
    fn order_estimates() {
        let sq: Vec<(f64, f64)> = (0..4).map(|p| (2f64.powi(-p), 3.0 * 4f64.powi(-p))).collect();
        assert!(orders(&sq).unwrap().iter().all(|(_, o)| (o - 2.0).abs() < 1e-12));
        let lin: Vec<(f64, f64)> = (0..4).map(|p| (2f64.powi(-p), 2f64.powi(-p))).collect();
        assert!(orders(&lin).unwrap().iter().all(|(_, o)| (o - 1.0).abs() < 1e-12));
        let table = [(1.0 / 16.0, 8.39e-3), (1.0 / 32.0, 1.36e-3), (1.0 / 64.0, 3.16e-4), (1.0 / 128.0, 7.79e-5)];
        let o: Vec<f64> = orders(&table).unwrap().iter().map(|p| p.1).collect();
        let expected = [2.62, 2.11, 2.02];
        for (a, b) in o.iter().zip(expected) {
            assert!((a - b).abs() < 0.01, "{o:?}");
        }
        assert!(orders(&[(0.1, 1.0), (0.03, 0.1)]).is_err());
    }

    #[test]
    fn report_rows() {
        let mut r = ErrorReport::new(Metric::Eh, 2.0);
        r.push_sweep(&[(0.5, 0.2, 4.0), (0.25, 0.2, 1.0)]).unwrap();
        assert_eq!(r.rows[0].order, None);
        assert_eq!(r.rows[1].order, Some(2.0));
        r.push_sweep(&[(0.5, 0.1, 4.0)]).unwrap();
        assert_eq!(r.rows[2].order, None);
    }

    proptest! {
        #[test]
        fn scale_equivariance(v in proptest::collection::vec(-10.0f64..10.0, 8), w in proptest::collection::vec(-10.0f64..10.0, 8), c in -5.0f64..5.0) {
            let base = rms(&v, &w).unwrap();
            let sv: Vec<f64> = v.iter().map(|x| c * x).collect();
            let sw: Vec<f64> = w.iter().map(|x| c * x).collect();
            prop_assert!((rms(&sv, &sw).unwrap() - c.abs() * base).abs() <= 1e-12 * (1.0 + base * c.abs()));
        }

        #[test]
        fn triangle_inequality(a in proptest::collection::vec(-10.0f64..10.0, 6), b in proptest::collection::vec(-10.0f64..10.0, 6), c in proptest::collection::vec(-10.0f64..10.0, 6)) {
            prop_assert!(rms(&a, &c).unwrap() <= rms(&a, &b).unwrap() + rms(&b, &c).unwrap() + 1e-12);
        }
    }
}
