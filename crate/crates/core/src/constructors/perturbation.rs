//! Certified choice of `eps` for `f_eps = 1/(1-z)^{r^2} + eps*g`.
//!
//! For each order `1 <= n <= r` and derivative `0 <= p <= alpha` the
//! contiguous minor of `f_eps^{(p)}` is at least
//! `S_0 - eps * B * sum_{l=1..n} (k+1)^{pl} A_k^{n-l}` with
//! `A_k = a^p_{k+r-1}(r^2)`. Writing
//!
//! ```text
//! rho(k) = B * sum_l (k+1)^{pl} A_k^{n-l} / (S_0(k,n) / 2)
//! ```
//!
//! any `eps < min(1, 1/sup_k rho)` keeps every minor above `S_0/2`. The plan
//! stores `eps_np = min(1, 1/sup rho)` and uses half of the smallest one.
//!
//! In certified mode the supremum over all `k >= 0` is bounded by scanning
//! `k` up to a checkpoint `K` and closing the tail with
//!
//! ```text
//! rho(k) <= (B / (M/2)) * sum_l A_K^{n-l} (K+1)^{pl - D}     for k >= K
//! ```
//!
//! which holds because `A_k/(k+1)^{deg A}` decreases in `k` and
//! `S_0(k,n) >= M (k+1)^D`.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{coeffs_inv_pow, derived_series_coeffs, inv_pow_coeff, s0_closed_form, s0_degree, s0_lower_constant};
use crate::error::{PfError, Result};
use crate::pf_check::contiguous_minors;
use crate::rational::{factorial, pow_rational, rising, serde_str, Rational};
use crate::seqcore::CoeffSeq;

/// Largest checkpoint of the certified tail scan.
const TAIL_SCAN_CAP: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertMode {
    /// The inequality is proved for every `k >= 0`.
    Certified,
    /// The inequality is checked for `k <= K` only.
    Windowed,
}

impl std::str::FromStr for CertMode {
    type Err = PfError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "certified" => Ok(CertMode::Certified),
            "windowed" => Ok(CertMode::Windowed),
            other => Err(PfError::Parse(format!("unknown mode {other:?}"))),
        }
    }
}

/// Tail bound for one `(n, p)` pair in certified mode.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TailRecord {
    /// The scan covered `0..=k_star`; the tail bound covers `k >= k_star`.
    pub k_star: usize,
    #[serde(with = "serde_str")]
    pub scanned_sup: Rational,
    #[serde(with = "serde_str")]
    pub tail_bound: Rational,
    /// `lim_{k -> inf}` of the tail bound.
    #[serde(with = "serde_str")]
    pub tail_limit: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PerturbationPlan {
    pub r: usize,
    pub alpha: usize,
    #[serde(rename = "C", with = "serde_str")]
    pub c: Rational,
    /// `C_p = C (r+p)^p` bounds `|b^p_m|` by `C_p (k+1)^p` for `m <= k+r-1`.
    #[serde(rename = "C_p", with = "serde_str::vec")]
    pub c_p: Vec<Rational>,
    #[serde(rename = "B", with = "serde_str")]
    pub b: Rational,
    /// `M_np`, indexed `[n-1][p]`.
    #[serde(rename = "M_np", with = "serde_str::table")]
    pub m_np: Vec<Vec<Rational>>,
    /// Upper bound on `sup_k rho(k)`, indexed `[n-1][p]`.
    #[serde(with = "serde_str::table")]
    pub sup_ratio: Vec<Vec<Rational>>,
    /// `min(1, 1/sup rho)`, indexed `[n-1][p]`.
    #[serde(with = "serde_str::table")]
    pub epsilon_np: Vec<Vec<Rational>>,
    #[serde(with = "serde_str")]
    pub epsilon: Rational,
    pub mode: CertMode,
    #[serde(rename = "K_checked")]
    pub k_checked: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub tail: Option<Vec<Vec<TailRecord>>>,
}

impl PerturbationPlan {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serializable")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

struct RatioTerms {
    r: usize,
    p: usize,
    n: usize,
    two_b: Rational,
}

impl RatioTerms {
    /// `A_k = a^p_{k+r-1}(r^2) = (r^2)_p a_{k+r-1}(r^2+p)`.
    fn a_bound(&self, k: usize) -> BigInt {
        rising((self.r * self.r) as i64, self.p as u64) * inv_pow_coeff(self.r * self.r + self.p, (k + self.r - 1) as i64)
    }

    fn rho(&self, k: usize) -> Rational {
        if self.two_b.is_zero() {
            return Rational::zero();
        }
        let a = self.a_bound(k);
        let x = BigInt::from(k + 1);
        let xp = num_traits::pow(x, self.p);
        let mut sum = BigInt::zero();
        let mut x_pow = BigInt::one();
        for l in 1..=self.n {
            x_pow *= &xp;
            sum += &x_pow * num_traits::pow(a.clone(), self.n - l);
        }
        let s0 = s0_closed_form(self.r, self.p, self.n, k).expect("valid order");
        &self.two_b * Rational::from_integer(sum) / s0
    }

    /// Bound on `rho(k)` valid for every `k >= k0`.
    fn tail_bound(&self, k0: usize, m: &Rational) -> Rational {
        let a = self.a_bound(k0);
        let x = BigInt::from(k0 + 1);
        let d = s0_degree(self.r, self.p, self.n) as i64;
        let mut sum = Rational::zero();
        for l in 1..=self.n {
            let e = (self.p * l) as i64 - d;
            let xe = if e >= 0 {
                Rational::from_integer(num_traits::pow(x.clone(), e as usize))
            } else {
                Rational::new(BigInt::one(), num_traits::pow(x.clone(), (-e) as usize))
            };
            sum += Rational::from_integer(num_traits::pow(a.clone(), self.n - l)) * xe;
        }
        &self.two_b / m * sum
    }

    /// Limit of [`RatioTerms::tail_bound`] as `k0 -> inf`.
    fn tail_limit(&self, m: &Rational) -> Rational {
        let r2 = self.r * self.r;
        let deg_a = r2 + self.p - 1;
        let lead = Rational::new(rising(r2 as i64, self.p as u64), factorial(deg_a as u64));
        let d = s0_degree(self.r, self.p, self.n);
        let mut sum = Rational::zero();
        for l in 1..=self.n {
            if self.p * l + deg_a * (self.n - l) == d {
                sum += pow_rational(&lead, (self.n - l) as u64);
            }
        }
        &self.two_b / m * sum
    }
}

fn scan_max(terms: &RatioTerms, from: usize, to: usize) -> Rational {
    (from..=to)
        .into_par_iter()
        .map(|k| terms.rho(k))
        .reduce(Rational::zero, |a, b| if a >= b { a } else { b })
}

/// Constants and `eps` for `f_eps^{(p)}`, `0 <= p <= alpha`, to be PF_r.
///
/// `C` must strictly bound `|g_k|`. `C = 0` means `g = 0`, for which the plan
/// returns `eps = 1/2`.
pub fn epsilon_bound(r: usize, alpha: usize, c: &Rational, mode: CertMode, k: usize) -> Result<PerturbationPlan> {
    if r == 0 {
        return Err(PfError::ParameterOutOfRange("r must be at least 1".into()));
    }
    if c.is_negative() {
        return Err(PfError::Infeasible(format!("coefficient bound C = {c} is negative")));
    }
    let c_p: Vec<Rational> = (0..=alpha)
        .map(|p| c * Rational::from_integer(num_traits::pow(BigInt::from(r + p), p)))
        .collect();
    let b = if c.is_zero() {
        Rational::zero()
    } else {
        let max_cp = c_p.iter().fold(Rational::one(), |m, q| if *q > m { q.clone() } else { m });
        Rational::from_integer((BigInt::one() << r) * factorial(r as u64)) * pow_rational(&max_cp, r as u64)
    };
    let two_b = &b * Rational::from_integer(BigInt::from(2));

    let mut m_np = vec![vec![Rational::zero(); alpha + 1]; r];
    let mut sup_ratio = m_np.clone();
    let mut epsilon_np = m_np.clone();
    let mut tails: Vec<Vec<Option<TailRecord>>> = vec![vec![None; alpha + 1]; r];
    let mut k_checked = if mode == CertMode::Windowed { k } else { 0 };

    for n in 1..=r {
        for p in 0..=alpha {
            let m = s0_lower_constant(r, p, n)?;
            let terms = RatioTerms { r, p, n, two_b: two_b.clone() };
            let sup = match mode {
                CertMode::Windowed => scan_max(&terms, 0, k),
                CertMode::Certified => {
                    let limit = terms.tail_limit(&m);
                    let mut scanned = Rational::zero();
                    let mut from = 0;
                    let mut checkpoint = 0;
                    loop {
                        let seg = scan_max(&terms, from, checkpoint);
                        if seg > scanned {
                            scanned = seg;
                        }
                        let bound = terms.tail_bound(checkpoint, &m);
                        if bound <= scanned || bound <= limit || checkpoint >= TAIL_SCAN_CAP {
                            let sup = if bound > scanned { bound.clone() } else { scanned.clone() };
                            k_checked = k_checked.max(checkpoint);
                            tails[n - 1][p] = Some(TailRecord {
                                k_star: checkpoint,
                                scanned_sup: scanned,
                                tail_bound: bound,
                                tail_limit: limit,
                            });
                            break sup;
                        }
                        from = checkpoint + 1;
                        checkpoint = 2 * checkpoint + 1;
                    }
                }
            };
            let eps = if sup <= Rational::one() { Rational::one() } else { sup.recip() };
            m_np[n - 1][p] = m;
            sup_ratio[n - 1][p] = sup;
            epsilon_np[n - 1][p] = eps;
        }
    }
    let min_eps = epsilon_np.iter().flatten().min().cloned().expect("nonempty table");
    let epsilon = min_eps / Rational::from_integer(BigInt::from(2));
    let tail = (mode == CertMode::Certified)
        .then(|| tails.into_iter().map(|row| row.into_iter().map(|t| t.expect("filled")).collect()).collect());
    Ok(PerturbationPlan {
        r,
        alpha,
        c: c.clone(),
        c_p,
        b,
        m_np,
        sup_ratio,
        epsilon_np,
        epsilon,
        mode,
        k_checked,
        tail,
    })
}

/// `c_k = a_k(r^2) + eps * g_k` for `k = 0..=w`.
pub fn build_perturbed(g: &CoeffSeq, r: usize, eps: &Rational, w: usize) -> Result<CoeffSeq> {
    if w > g.window() {
        return Err(PfError::WindowMismatch(format!("perturbation has window {}, need {w}", g.window())));
    }
    let base = coeffs_inv_pow(r * r, w)?;
    let out = base
        .coeffs()
        .iter()
        .zip(g.coeffs())
        .map(|(a, b)| if b.is_zero() { a.clone() } else { a + eps * b })
        .collect();
    CoeffSeq::new(out)
}

/// Outcome of checking a plan's inequality on concrete data.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanCheck {
    pub window: usize,
    /// Every contiguous minor of order `<= r` of every `f^{(p)}` is positive.
    pub positive: bool,
    /// Every such minor exceeds `S_0^p(k,n)/2`.
    pub margin: bool,
    /// First `(p, n, k)` violating the margin, if any.
    pub first_violation: Option<(usize, usize, usize)>,
}

/// Checks the minors of `f_eps, ..., f_eps^{(alpha)}` against `S_0/2` for
/// `0 <= k <= window`. `g` must reach index `window + r - 1 + alpha`.
pub fn verify_plan(plan: &PerturbationPlan, g: &CoeffSeq, window: usize) -> Result<PlanCheck> {
    let r = plan.r;
    let reach = window + r - 1;
    let f = build_perturbed(g, r, &plan.epsilon, reach + plan.alpha)?;
    let mut positive = true;
    let mut first_violation = None;
    for p in 0..=plan.alpha {
        let fp = derived_series_coeffs(&f, p, reach)?;
        let table = contiguous_minors(&fp, r, window)?;
        for (n_idx, row) in table.iter().enumerate() {
            for (k, v) in row.iter().enumerate() {
                if !v.is_positive() {
                    positive = false;
                }
                if first_violation.is_none() {
                    let half = s0_closed_form(r, p, n_idx + 1, k)? / Rational::from_integer(BigInt::from(2));
                    if *v <= half {
                        first_violation = Some((p, n_idx + 1, k));
                    }
                }
            }
        }
    }
    Ok(PlanCheck { window, positive, margin: first_violation.is_none(), first_violation })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructors::lacunary_h;
    use crate::rational::{rat, ratio};

    #[test]
    fn r1_hand_value() {
        let plan = epsilon_bound(1, 0, &rat(1), CertMode::Certified, 0).unwrap();
        assert_eq!(plan.b, rat(2));
        assert_eq!(plan.sup_ratio[0][0], rat(4));
        assert_eq!(plan.epsilon_np[0][0], ratio(1, 4));
        assert_eq!(plan.epsilon, ratio(1, 8));
    }

    #[test]
    fn zero_perturbation_convention() {
        let plan = epsilon_bound(2, 1, &rat(0), CertMode::Certified, 0).unwrap();
        assert_eq!(plan.epsilon, ratio(1, 2));
    }

    #[test]
    fn negative_bound_rejected() {
        assert!(matches!(
            epsilon_bound(2, 0, &rat(-1), CertMode::Windowed, 10),
            Err(PfError::Infeasible(_))
        ));
    }

    #[test]
    fn certified_covers_windowed() {
        let cert = epsilon_bound(2, 1, &rat(3), CertMode::Certified, 0).unwrap();
        let win = epsilon_bound(2, 1, &rat(3), CertMode::Windowed, 200).unwrap();
        assert!(cert.epsilon <= win.epsilon);
        assert!(cert.epsilon > Rational::zero() && cert.epsilon < Rational::one());
        for row in cert.tail.as_ref().unwrap() {
            for t in row {
                assert!(t.tail_bound <= t.scanned_sup || t.tail_bound <= t.tail_limit);
            }
        }
    }

    #[test]
    fn r1_derivative_sup_is_asymptotic() {
        // r = 1, p = 1: A_k = S_0(k,1) = k+1, so rho is the constant 2B
        let plan = epsilon_bound(1, 1, &rat(1), CertMode::Certified, 0).unwrap();
        let b2 = &plan.b * rat(2);
        assert_eq!(plan.sup_ratio[0][1], b2);
    }

    #[test]
    fn perturbed_examples() {
        let h = lacunary_h(5);
        let f = build_perturbed(&h, 1, &ratio(1, 8), 2).unwrap();
        assert_eq!(f.coeffs(), &[rat(1), ratio(5, 4), ratio(9, 8)]);
        let zero = build_perturbed(&h, 2, &rat(0), 5).unwrap();
        assert_eq!(zero, coeffs_inv_pow(4, 5).unwrap());
        assert!(build_perturbed(&h, 2, &rat(0), 6).is_err());
    }

    #[test]
    fn plan_margin_small_window() {
        let plan = epsilon_bound(2, 1, &rat(3), CertMode::Certified, 0).unwrap();
        let g = lacunary_h(80);
        let check = verify_plan(&plan, &g, 60).unwrap();
        assert!(check.positive && check.margin, "{check:?}");
    }

    #[test]
    fn plan_json_round_trip() {
        let plan = epsilon_bound(2, 1, &rat(3), CertMode::Certified, 0).unwrap();
        let s = plan.to_json();
        assert!(s.contains(r#""mode":"certified""#));
        assert_eq!(PerturbationPlan::from_json(&s).unwrap(), plan);
    }
}
