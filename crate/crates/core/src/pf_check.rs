//! PF_r membership tests on a finite window.
//!
//! [`check_all_minors`] applies the definition directly: every Toeplitz minor
//! of order at most `r` with indices in `0..=window` must be non-negative.
//! [`check_contiguous`] applies the strict sufficient criterion on the
//! contiguous minors `det ||c_{k+j-i}||_{i,j=1..n}`.
//!
//! Both scans run in parallel and keep the witness deterministic: it is
//! always the first violator in `(order, rows, cols)` order.

use itertools::Itertools;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{PfError, Result};
use crate::rational::{serde_str, Rational};
use crate::seqcore::{count_minors, index_sets, CoeffSeq, IntSeq, MinorSpec};

pub const DEFAULT_BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PfStatus {
    PassNonneg,
    PassStrict,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    #[serde(with = "serde_str")]
    pub det: Rational,
}

impl Witness {
    pub fn spec(&self) -> MinorSpec {
        MinorSpec { rows: self.rows.clone(), cols: self.cols.clone() }
    }
}

/// Finite-window evidence for the convergence hypothesis of the strict
/// criterion: the ratios `c_{k+1}/c_k` on the window.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatioEvidence {
    /// Number of ratios that were defined.
    pub defined: usize,
    #[serde(with = "serde_str::option")]
    pub max_ratio: Option<Rational>,
    /// Indices `k` with `c_k = 0`, where `c_{k+1}/c_k` is undefined.
    pub zero_indices: Vec<usize>,
    pub bounded: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub label: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ratios: Option<RatioEvidence>,
}

pub const CONDITIONAL_LABEL: &str = "certificate modulo convergence hypothesis";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PfVerdict {
    pub status: PfStatus,
    pub r: usize,
    pub window: usize,
    pub witness: Option<Witness>,
    #[serde(with = "serde_str::option")]
    pub gap: Option<Rational>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub certificate: Option<Certificate>,
}

impl PfVerdict {
    pub fn passed(&self) -> bool {
        self.status != PfStatus::Fail
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serializable")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ScanOptions {
    pub budget: u64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions { budget: DEFAULT_BUDGET }
    }
}

/// Definition check with the default budget.
pub fn check_all_minors(c: &CoeffSeq, r: usize, window: usize) -> Result<PfVerdict> {
    check_all_minors_with(c, r, window, ScanOptions::default())
}

pub fn check_all_minors_with(c: &CoeffSeq, r: usize, window: usize, opts: ScanOptions) -> Result<PfVerdict> {
    if r == 0 {
        return Err(PfError::ParameterOutOfRange("r must be at least 1".into()));
    }
    let ints = IntSeq::new(c, window)?;
    let max_order = r.min(window + 1);
    let needed = count_minors(window, max_order);
    if needed > opts.budget as u128 {
        return Err(PfError::BudgetExceeded { needed, budget: opts.budget });
    }
    // Shifting rows and columns by the same amount leaves a Toeplitz minor
    // unchanged, and a minor with cols[0] < rows[0] has a zero column. So only
    // row sets starting at 0 need evaluating, and the lexicographically first
    // violator always has one.
    for n in 1..=max_order {
        let cols_sets: Vec<Vec<usize>> = index_sets(window, n).collect();
        let row_sets: Vec<Vec<usize>> = (1..=window)
            .combinations(n - 1)
            .map(|tail| std::iter::once(0).chain(tail).collect())
            .collect();
        let hit = row_sets.par_iter().find_map_first(|rows| {
            cols_sets.iter().find_map(|cols| {
                let v = ints.minor(rows, cols);
                v.is_negative().then(|| (rows.clone(), cols.clone(), v))
            })
        });
        if let Some((rows, cols, v)) = hit {
            let det = ints.to_rational(v, n);
            return Ok(PfVerdict {
                status: PfStatus::Fail,
                r,
                window,
                witness: Some(Witness { rows, cols, det }),
                gap: None,
                certificate: None,
            });
        }
    }
    Ok(PfVerdict { status: PfStatus::PassNonneg, r, window, witness: None, gap: None, certificate: None })
}

/// Table of contiguous minors: `table[n-1][k] = det ||c_{k+j-i}||_{i,j=1..n}`
/// for `1 <= n <= r`, `0 <= k <= window`.
pub fn contiguous_minors(c: &CoeffSeq, r: usize, window: usize) -> Result<Vec<Vec<Rational>>> {
    if r == 0 {
        return Err(PfError::ParameterOutOfRange("r must be at least 1".into()));
    }
    let needed = window + r - 1;
    if needed > c.window() {
        return Err(PfError::IndexOutOfWindow { index: needed as i64, window: c.window() });
    }
    let ints = IntSeq::new(c, needed)?;
    Ok((1..=r)
        .map(|n| {
            (0..=window)
                .into_par_iter()
                .map(|k| ints.to_rational(ints.contiguous(k, n), n))
                .collect()
        })
        .collect())
}

/// Strict contiguous-minor criterion over `0 <= k <= window`, `1 <= n <= r`.
pub fn check_contiguous(c: &CoeffSeq, r: usize, window: usize) -> Result<PfVerdict> {
    let table = contiguous_minors(c, r, window)?;
    let mut witness = None;
    let mut gap: Option<&Rational> = None;
    for (n_idx, row) in table.iter().enumerate() {
        for (k, v) in row.iter().enumerate() {
            if gap.map_or(true, |g| v < g) {
                gap = Some(v);
            }
            if witness.is_none() && !v.is_positive() {
                let spec = MinorSpec::contiguous(k, n_idx + 1);
                witness = Some(Witness { rows: spec.rows, cols: spec.cols, det: v.clone() });
            }
        }
    }
    let gap = gap.cloned();
    let status = if witness.is_some() { PfStatus::Fail } else { PfStatus::PassStrict };
    Ok(PfVerdict { status, r, window, witness, gap, certificate: None })
}

/// Ratios `c_{k+1}/c_k` over the whole stored window.
pub fn ratio_evidence(c: &CoeffSeq) -> RatioEvidence {
    let cs = c.coeffs();
    let mut zero_indices = Vec::new();
    let mut max_ratio: Option<Rational> = None;
    let mut defined = 0;
    for k in 0..cs.len().saturating_sub(1) {
        if cs[k].is_zero() {
            zero_indices.push(k);
            continue;
        }
        let q = &cs[k + 1] / &cs[k];
        defined += 1;
        if max_ratio.as_ref().map_or(true, |m| &q > m) {
            max_ratio = Some(q);
        }
    }
    let bounded = zero_indices.is_empty();
    RatioEvidence { defined, max_ratio, zero_indices, bounded }
}

/// Contiguous check plus the conditional certificate label. The convergence
/// hypothesis cannot be decided from a truncation, so a pass is reported as a
/// certificate modulo that hypothesis, optionally with ratio evidence.
pub fn schoenberg_certificate(c: &CoeffSeq, r: usize, window: usize, with_ratios: bool) -> Result<PfVerdict> {
    let mut verdict = check_contiguous(c, r, window)?;
    let ratios = with_ratios.then(|| ratio_evidence(c));
    if verdict.status == PfStatus::PassStrict {
        verdict.certificate = Some(Certificate { label: CONDITIONAL_LABEL.to_string(), ratios });
    } else if ratios.is_some() {
        verdict.certificate = Some(Certificate { label: "no certificate".to_string(), ratios });
    }
    Ok(verdict)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, ratio};

    fn seq(v: &[i64]) -> CoeffSeq {
        CoeffSeq::from_integers(v.iter().copied()).unwrap()
    }

    #[test]
    fn one_plus_z_passes() {
        let v = check_all_minors(&seq(&[1, 1, 0, 0]), 2, 3).unwrap();
        assert_eq!(v.status, PfStatus::PassNonneg);
        assert!(v.witness.is_none());
    }

    #[test]
    fn one_plus_z_squared_fails_with_witness() {
        let v = check_all_minors(&seq(&[1, 0, 1]), 2, 2).unwrap();
        assert_eq!(v.status, PfStatus::Fail);
        let w = v.witness.unwrap();
        assert_eq!((w.rows, w.cols, w.det), (vec![0, 1], vec![1, 2], rat(-1)));
    }

    #[test]
    fn geometric_rank_one() {
        let q = ratio(1, 2);
        let c = CoeffSeq::new((0..4).map(|k| crate::rational::pow_rational(&q, k)).collect()).unwrap();
        assert_eq!(check_all_minors(&c, 3, 3).unwrap().status, PfStatus::PassNonneg);
    }

    #[test]
    fn budget_guard() {
        let c = seq(&[1; 101]);
        let err = check_all_minors(&c, 2, 100).unwrap_err();
        assert!(matches!(err, PfError::BudgetExceeded { .. }));
        let tight = ScanOptions { budget: 10 };
        assert!(check_all_minors_with(&seq(&[1, 1, 1]), 2, 2, tight).is_err());
    }

    #[test]
    fn contiguous_inverse_square() {
        let c = CoeffSeq::from_integers((1..=12).map(|k| k as i64)).unwrap();
        let v = check_contiguous(&c, 2, 10).unwrap();
        assert_eq!(v.status, PfStatus::PassStrict);
        let table = contiguous_minors(&c, 2, 10).unwrap();
        assert!(table[1].iter().all(|d| *d == rat(1)));
        assert_eq!(v.gap, Some(rat(1)));
    }

    #[test]
    fn contiguous_all_ones_fails() {
        let v = check_contiguous(&seq(&[1; 7]), 2, 5).unwrap();
        assert_eq!(v.status, PfStatus::Fail);
        let w = v.witness.unwrap();
        assert_eq!(w.det, rat(0));
        assert_eq!(w.rows, vec![0, 1]);
        assert_eq!(w.cols, vec![1, 2]);
        assert!(!v.gap.unwrap().is_positive());
    }

    #[test]
    fn contiguous_trivial_and_window_error() {
        let v = check_contiguous(&seq(&[1]), 1, 0).unwrap();
        assert_eq!(v.status, PfStatus::PassStrict);
        assert!(matches!(check_contiguous(&seq(&[1, 1]), 2, 1), Err(PfError::IndexOutOfWindow { .. })));
    }

    #[test]
    fn certificate_labels() {
        let v = schoenberg_certificate(&seq(&[1]), 1, 0, true).unwrap();
        let cert = v.certificate.unwrap();
        assert_eq!(cert.label, CONDITIONAL_LABEL);
        assert_eq!(cert.ratios.unwrap().defined, 0);

        let v = schoenberg_certificate(&seq(&[1, 0, 1]), 2, 1, true).unwrap();
        assert_eq!(v.status, PfStatus::Fail);
        assert_eq!(v.certificate.unwrap().ratios.unwrap().zero_indices, vec![1]);
    }

    #[test]
    fn verdict_json_shape() {
        let v = check_all_minors(&seq(&[1, 0, 1]), 2, 2).unwrap();
        let s = v.to_json();
        assert_eq!(
            s,
            r#"{"status":"fail","r":2,"window":2,"witness":{"rows":[0,1],"cols":[1,2],"det":"-1"},"gap":null}"#
        );
        assert_eq!(PfVerdict::from_json(&s).unwrap(), v);
    }
}
