//! Polygonal domains, pole sums `g(z) = sum d_k/(lambda_k - z)` with poles
//! accumulating on the boundary, and the composition with the perturbation
//! plan that produces a PF_r generating function for a given domain.

pub mod geometry;

use std::collections::HashSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constructors::{build_perturbed, epsilon_bound, CertMode, PerturbationPlan};
use crate::error::{PfError, Result};
use crate::rational::{exact_sqrt, serde_str, sqrt_enclosure, sqrt_upper, ComplexRational, Rational};
use crate::seqcore::CoeffSeq;
use geometry::{edges, l1_norm, locate, nearest_boundary_point, on_segment, orient, signed_area2, Location, Point};

/// A simply connected polygon given by its vertices in order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub vertices: Vec<ComplexRational>,
    #[serde(default)]
    pub symmetric: bool,
    #[serde(rename = "T", default, skip_serializing_if = "Option::is_none", with = "serde_str::option")]
    pub t: Option<Rational>,
}

impl DomainSpec {
    pub fn new(vertices: Vec<ComplexRational>, symmetric: bool) -> Self {
        DomainSpec { vertices, symmetric, t: None }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serializable")
    }

    /// The polygon scaled by `s > 0` about the origin.
    pub fn scaled(&self, s: &Rational) -> DomainSpec {
        DomainSpec {
            vertices: self.vertices.iter().map(|v| v.scale(s)).collect(),
            symmetric: self.symmetric,
            t: self.t.as_ref().map(|t| t * s),
        }
    }

    fn is_ccw(&self) -> bool {
        signed_area2(&self.vertices).is_positive()
    }
}

/// Outcome of checking conditions (A), (B), (C) on a polygon.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    /// (A) the origin is an interior point.
    pub origin_inside: bool,
    /// (B) the vertex set is closed under conjugation.
    pub symmetric: bool,
    /// (C) a nearest boundary point lies on the positive real axis.
    pub nearest_on_positive_axis: bool,
    /// `T^2 = dist(0, boundary)^2`.
    #[serde(with = "serde_str")]
    pub t_squared: Rational,
    /// `T` when it is rational.
    #[serde(with = "serde_str::option")]
    pub t: Option<Rational>,
    #[serde(with = "serde_str")]
    pub t_lower: Rational,
    #[serde(with = "serde_str")]
    pub t_upper: Rational,
    /// First crossing of the positive real axis by the boundary.
    #[serde(with = "serde_str::option")]
    pub axis_crossing: Option<Rational>,
    /// Every boundary point has modulus at least 1.
    pub contains_unit_disc: bool,
    /// The caller-supplied `T`, if any, equals the computed one.
    pub supplied_t_matches: Option<bool>,
}

impl ValidationReport {
    pub fn all_pass(&self) -> bool {
        self.origin_inside && self.symmetric && self.nearest_on_positive_axis
    }
}

fn check_polyline(v: &[Point]) -> Result<()> {
    let n = v.len();
    if n < 3 {
        return Err(PfError::MalformedPolyline(format!("need at least 3 vertices, got {n}")));
    }
    for (i, (a, b)) in edges(v).enumerate() {
        if a == b {
            return Err(PfError::MalformedPolyline(format!("edge {i} has zero length")));
        }
    }
    let e: Vec<(&Point, &Point)> = edges(v).collect();
    for i in 0..n {
        // consecutive edges may only meet at their shared vertex
        let (a, b) = e[i];
        let (_, c) = e[(i + 1) % n];
        if orient(a, b, c).is_zero() && (b - a).dot(&(c - b)).is_negative() {
            return Err(PfError::MalformedPolyline(format!("edges {i} and {} fold back", (i + 1) % n)));
        }
        for j in i + 2..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            let (c, d) = e[j];
            if geometry::segments_intersect(a, b, c, d) {
                return Err(PfError::MalformedPolyline(format!("edges {i} and {j} intersect")));
            }
        }
    }
    if signed_area2(v).is_zero() {
        return Err(PfError::MalformedPolyline("polygon has zero area".into()));
    }
    Ok(())
}

/// Checks conditions (A)-(C) and computes `T`.
pub fn validate_domain(spec: &DomainSpec) -> Result<ValidationReport> {
    let v = &spec.vertices;
    check_polyline(v)?;
    let origin = Point::zero();
    let origin_inside = locate(&origin, v) == Location::Inside;

    let vertex_set: HashSet<&Point> = v.iter().collect();
    let symmetric = v.iter().all(|p| vertex_set.contains(&p.conj()));

    let t_squared = edges(v)
        .map(|(a, b)| geometry::dist_sqr_to_segment(&origin, a, b))
        .min()
        .expect("polygon has edges");

    let mut axis_crossing: Option<Rational> = None;
    for (a, b) in edges(v) {
        let candidate = if a.im.is_zero() && b.im.is_zero() {
            let lo = if a.re <= b.re { &a.re } else { &b.re };
            lo.is_positive().then(|| lo.clone())
        } else if (!a.im.is_positive() && !b.im.is_negative()) || (!b.im.is_positive() && !a.im.is_negative()) {
            let x = &a.re - &a.im * (&b.re - &a.re) / (&b.im - &a.im);
            x.is_positive().then_some(x)
        } else {
            None
        };
        if let Some(x) = candidate {
            if axis_crossing.as_ref().map_or(true, |best| x < *best) {
                axis_crossing = Some(x);
            }
        }
    }
    let nearest_on_positive_axis =
        origin_inside && axis_crossing.as_ref().is_some_and(|x| x * x == t_squared);

    let t = if nearest_on_positive_axis { axis_crossing.clone() } else { exact_sqrt(&t_squared) };
    let (t_lower, t_upper) = match &t {
        Some(t) => (t.clone(), t.clone()),
        None => sqrt_enclosure(&t_squared, 64),
    };
    let contains_unit_disc = origin_inside && t_squared >= Rational::one();
    let supplied_t_matches = spec.t.as_ref().map(|s| s * s == t_squared && !s.is_negative());
    Ok(ValidationReport {
        origin_inside,
        symmetric,
        nearest_on_positive_axis,
        t_squared,
        t,
        t_lower,
        t_upper,
        axis_crossing,
        contains_unit_disc,
        supplied_t_matches,
    })
}

#[derive(Debug, Clone)]
struct BoundaryPoint {
    point: Point,
    edge: usize,
    vertex: bool,
}

fn find_edge(p: &Point, v: &[Point]) -> Option<usize> {
    edges(v).position(|(a, b)| on_segment(p, a, b))
}

fn boundary_points(spec: &DomainSpec, n: usize) -> Vec<BoundaryPoint> {
    let v = &spec.vertices;
    let mut out = Vec::with_capacity(n);
    if n == 0 {
        return out;
    }
    if n == 1 {
        out.push(BoundaryPoint { point: v[0].clone(), edge: 0, vertex: true });
    } else {
        let mut level = 1u32;
        'outer: loop {
            let denom = BigInt::one() << level;
            let count = 1u64 << (level - 1);
            for (e, (a, b)) in edges(v).enumerate() {
                for m in 0..count {
                    let t = Rational::new(BigInt::from(2 * m + 1), denom.clone());
                    out.push(BoundaryPoint { point: a + &(b - a).scale(&t), edge: e, vertex: false });
                    if out.len() == n {
                        break 'outer;
                    }
                }
            }
            level += 1;
        }
    }
    if spec.symmetric {
        let mut seen: HashSet<Point> = out.iter().map(|b| b.point.clone()).collect();
        let mut extra = Vec::new();
        for bp in &out {
            let c = bp.point.conj();
            if !seen.contains(&c) {
                if let Some(edge) = find_edge(&c, v) {
                    seen.insert(c.clone());
                    extra.push(BoundaryPoint { point: c, edge, vertex: bp.vertex });
                }
            }
        }
        out.extend(extra);
    }
    out
}

/// Boundary points by dyadic subdivision of the edges: `N = 1` gives the
/// first vertex; otherwise edge midpoints, then quarter points, and so on,
/// edge by edge. Symmetric domains get missing conjugates appended.
pub fn densify_boundary(spec: &DomainSpec, n: usize) -> Vec<ComplexRational> {
    boundary_points(spec, n).into_iter().map(|b| b.point).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoleTerm {
    pub lambda: ComplexRational,
    #[serde(with = "serde_str")]
    pub d: Rational,
    /// Interior point whose nearest boundary point is `lambda`.
    pub anchor: ComplexRational,
    /// Boundary point the anchor was placed next to.
    pub zeta: ComplexRational,
    /// Resolution index: `|anchor - zeta| <= 1/(4n)`.
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PoleSum {
    pub terms: Vec<PoleTerm>,
}

impl PoleSum {
    pub fn weight_sum(&self) -> Rational {
        self.terms.iter().map(|t| &t.d).sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serializable")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// `g(z)` for `z` off the pole set.
    pub fn eval(&self, z: &ComplexRational) -> Option<ComplexRational> {
        let mut acc = ComplexRational::zero();
        for t in &self.terms {
            acc = &acc + &ComplexRational::real(t.d.clone()).div(&(&t.lambda - z))?;
        }
        Some(acc)
    }
}

fn inward_normal(v: &[Point], edge: usize, ccw: bool) -> Point {
    let a = &v[edge];
    let b = &v[(edge + 1) % v.len()];
    let d = b - a;
    let left = Point::new(-&d.im, d.re.clone());
    if ccw {
        left
    } else {
        -&left
    }
}

fn anchor_for(spec: &DomainSpec, bp: &BoundaryPoint, n: usize, ccw: bool) -> Result<Point> {
    let v = &spec.vertices;
    let dir = if bp.vertex {
        let prev = (bp.edge + v.len() - 1) % v.len();
        let a = inward_normal(v, prev, ccw);
        let b = inward_normal(v, bp.edge, ccw);
        let s = &a.scale(&l1_norm(&a).recip()) + &b.scale(&l1_norm(&b).recip());
        if s.is_zero() {
            return Err(PfError::GeometryDegenerate(format!("no inward direction at vertex {}", bp.point)));
        }
        s
    } else {
        inward_normal(v, bp.edge, ccw)
    };
    let mut step = Rational::new(BigInt::one(), BigInt::from(4 * n)) / l1_norm(&dir);
    let half = Rational::new(BigInt::one(), BigInt::from(2));
    for _ in 0..64 {
        let z = &bp.point + &dir.scale(&step);
        if locate(&z, v) == Location::Inside {
            return Ok(z);
        }
        step *= &half;
    }
    Err(PfError::GeometryDegenerate(format!("no interior anchor near {}", bp.point)))
}

fn push_term(terms: &mut Vec<PoleTerm>, term: PoleTerm) {
    match terms.iter_mut().find(|t| t.lambda == term.lambda) {
        Some(existing) => existing.d += term.d,
        None => terms.push(term),
    }
}

/// Pole sum over `N` densified boundary points with dyadic weights.
///
/// Each boundary point `zeta_k` gets an interior anchor within `1/(4k)` along
/// the inward normal (bisector at a vertex) and the pole `lambda_k` is the
/// exact nearest boundary point to that anchor. Weights are `2^{-k}`; on a
/// symmetric domain conjugate terms share the weight `2^{-g-1}` of their
/// group `g`. Coinciding poles are merged.
pub fn build_pole_sum(spec: &DomainSpec, n: usize) -> Result<PoleSum> {
    let report = validate_domain(spec)?;
    if !report.contains_unit_disc {
        return Err(PfError::DomainInvalid("domain must contain the closed unit disc".into()));
    }
    if spec.symmetric && !report.symmetric {
        return Err(PfError::DomainInvalid("flagged symmetric but the vertex set is not".into()));
    }
    let ccw = spec.is_ccw();
    let v = &spec.vertices;
    let points = boundary_points(spec, n);
    let mut terms: Vec<PoleTerm> = Vec::new();
    let mut done: HashSet<Point> = HashSet::new();
    let mut group = 0usize;
    for (idx, bp) in points.iter().enumerate() {
        if done.contains(&bp.point) {
            continue;
        }
        group += 1;
        let res = idx + 1;
        let anchor = anchor_for(spec, bp, res, ccw)?;
        let (lambda, dist) = nearest_boundary_point(&anchor, v);
        let paired = spec.symmetric && !bp.point.is_real();
        let d = if spec.symmetric {
            Rational::new(BigInt::one(), BigInt::one() << (group + paired as usize))
        } else {
            Rational::new(BigInt::one(), BigInt::one() << res)
        };
        done.insert(bp.point.clone());
        let term = PoleTerm { lambda, d, anchor, zeta: bp.point.clone(), n: res };
        if paired {
            let mirror = PoleTerm {
                lambda: term.lambda.conj(),
                d: term.d.clone(),
                anchor: term.anchor.conj(),
                zeta: term.zeta.conj(),
                n: res,
            };
            let (_, mirror_dist) = nearest_boundary_point(&mirror.anchor, v);
            if locate(&mirror.anchor, v) != Location::Inside
                || mirror_dist != dist
                || find_edge(&mirror.lambda, v).is_none()
            {
                return Err(PfError::GeometryDegenerate(format!("domain is not mirror symmetric near {}", term.zeta)));
            }
            done.insert(mirror.zeta.clone());
            push_term(&mut terms, term);
            push_term(&mut terms, mirror);
        } else {
            push_term(&mut terms, term);
        }
    }
    if let Some(t) = terms.iter().find(|t| t.lambda.norm_sqr() < Rational::one()) {
        return Err(PfError::GeometryDegenerate(format!("pole {} inside the unit disc", t.lambda)));
    }
    Ok(PoleSum { terms })
}

/// Taylor coefficients `b_n = sum_k d_k / lambda_k^{n+1}` with the bound
/// `|b_n| <= sum_k d_k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaylorSeries {
    pub coeffs: Vec<ComplexRational>,
    #[serde(with = "serde_str")]
    pub bound: Rational,
}

impl TaylorSeries {
    /// Every `|b_n|^2 <= bound^2`.
    pub fn bound_holds(&self) -> bool {
        let b2 = &self.bound * &self.bound;
        self.coeffs.par_iter().all(|b| b.cmp_norm_sqr(&b2).is_le())
    }

    pub fn is_real(&self) -> bool {
        self.coeffs.iter().all(|b| b.is_real())
    }

    pub fn to_real(&self) -> Result<CoeffSeq> {
        let out = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(n, b)| if b.is_real() { Ok(b.re.clone()) } else { Err(PfError::NotReal(n)) })
            .collect::<Result<Vec<_>>>()?;
        CoeffSeq::new(out)
    }

    /// `n,b_n_re,b_n_im` table.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,b_n_re,b_n_im\n");
        for (n, b) in self.coeffs.iter().enumerate() {
            out.push_str(&format!("{n},{},{}\n", b.re, b.im));
        }
        out
    }
}

/// `num/den` in lowest terms when every prime of `den` divides `base`, using
/// only gcds against `base` (small) rather than against `den`.
fn reduce_over(mut num: BigInt, mut den: BigInt, base: &BigInt) -> Rational {
    if num.is_zero() {
        return Rational::zero();
    }
    loop {
        let g = (&num % base).gcd(base).gcd(&den);
        if g.is_one() {
            return Rational::new_raw(num, den);
        }
        num /= &g;
        den /= &g;
    }
}

/// `b_n = sum_k d_k lambda_k^{-(n+1)}` for `n <= w`.
///
/// With `d_k = s_k/e_k` and `1/lambda_k = G_k/m_k` (`G_k` a Gaussian integer),
/// every term of `b_n` has a denominator dividing `E M^{n+1}`, `E = lcm e_k`,
/// `M = lcm m_k`. Numerators are summed as integers and each coefficient is
/// reduced once.
pub fn taylor_coeffs(ps: &PoleSum, w: usize) -> TaylorSeries {
    let invs: Vec<ComplexRational> =
        ps.terms.iter().map(|t| t.lambda.inv().expect("pole off the origin")).collect();
    let ms: Vec<BigInt> = invs.iter().map(|v| v.re.denom().lcm(v.im.denom())).collect();
    let m = ms.iter().fold(BigInt::one(), |acc, v| acc.lcm(v));
    let e = ps.terms.iter().fold(BigInt::one(), |acc, t| acc.lcm(t.d.denom()));
    let base = &e * &m;
    // per term: s_k E/e_k and H_k = G_k M/m_k, so term_n = s_k E/e_k H_k^{n+1} / (E M^{n+1})
    let scaled: Vec<(BigInt, (BigInt, BigInt))> = ps
        .terms
        .iter()
        .zip(&invs)
        .zip(&ms)
        .map(|((t, v), mk)| {
            let f = &m / mk;
            let h = ((v.re.numer() * (mk / v.re.denom())) * &f, (v.im.numer() * (mk / v.im.denom())) * &f);
            (t.d.numer() * (&e / t.d.denom()), h)
        })
        .collect();
    let powers: Vec<Vec<(BigInt, BigInt)>> = scaled
        .par_iter()
        .map(|(s, h)| {
            let mut cur = (s * &h.0, s * &h.1);
            let mut out = Vec::with_capacity(w + 1);
            for _ in 0..=w {
                let next = (&cur.0 * &h.0 - &cur.1 * &h.1, &cur.0 * &h.1 + &cur.1 * &h.0);
                out.push(std::mem::replace(&mut cur, next));
            }
            out
        })
        .collect();
    let mut dens = Vec::with_capacity(w + 1);
    let mut d = &e * &m;
    for _ in 0..=w {
        dens.push(d.clone());
        d *= &m;
    }
    let coeffs = (0..=w)
        .into_par_iter()
        .map(|n| {
            let (re, im) = powers.iter().fold((BigInt::zero(), BigInt::zero()), |acc, col| {
                (acc.0 + &col[n].0, acc.1 + &col[n].1)
            });
            ComplexRational::new(reduce_over(re, dens[n].clone(), &base), reduce_over(im, dens[n].clone(), &base))
        })
        .collect();
    TaylorSeries { coeffs, bound: ps.weight_sum() }
}

/// Lower bound for `|g(z)|` at `z = alpha*anchor_p + (1-alpha)*lambda_p`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlowupPoint {
    #[serde(with = "serde_str")]
    pub alpha: Rational,
    pub z: ComplexRational,
    #[serde(with = "serde_str")]
    pub lower_bound: Rational,
}

/// Smallest cutoff `N_p > p` with `sum_{k >= N_p} d_k < d_p / 2`.
pub fn tail_cutoff(ps: &PoleSum, p: usize) -> Result<usize> {
    let term = ps.terms.get(p).ok_or_else(|| PfError::ParameterOutOfRange(format!("no term {p}")))?;
    let half = &term.d / Rational::from_integer(BigInt::from(2));
    let mut tail: Rational = ps.terms.iter().skip(p + 1).map(|t| &t.d).sum();
    for cut in p + 1..=ps.terms.len() {
        if tail < half {
            return Ok(cut);
        }
        tail -= &ps.terms[cut].d;
    }
    Ok(ps.terms.len())
}

/// Blow-up lower bounds along the segment from the anchor of term `p` to
/// its pole, using the smallest admissible cutoff.
pub fn blowup_witness(ps: &PoleSum, p: usize, alphas: &[Rational]) -> Result<Vec<BlowupPoint>> {
    let cutoff = tail_cutoff(ps, p)?;
    blowup_witness_with_cutoff(ps, p, alphas, cutoff)
}

/// As [`blowup_witness`] with a caller-chosen cutoff: terms with index
/// `>= cutoff` are absorbed into half the leading term.
pub fn blowup_witness_with_cutoff(
    ps: &PoleSum,
    p: usize,
    alphas: &[Rational],
    cutoff: usize,
) -> Result<Vec<BlowupPoint>> {
    let term = ps.terms.get(p).ok_or_else(|| PfError::ParameterOutOfRange(format!("no term {p}")))?;
    if cutoff <= p || cutoff > ps.terms.len() {
        return Err(PfError::TailCondition(format!("cutoff {cutoff} must lie in {}..={}", p + 1, ps.terms.len())));
    }
    let tail: Rational = ps.terms[cutoff..].iter().map(|t| &t.d).sum();
    if tail * Rational::from_integer(BigInt::from(2)) >= term.d {
        return Err(PfError::TailCondition(format!("weights past {cutoff} reach d_p/2")));
    }
    let delta2 = term.anchor.dist_sqr(&term.lambda);
    let two = Rational::from_integer(BigInt::from(2));
    alphas
        .par_iter()
        .map(|alpha| {
            if !alpha.is_positive() || *alpha > Rational::one() {
                return Err(PfError::ParameterOutOfRange(format!("alpha = {alpha} outside (0, 1]")));
            }
            let z = &term.anchor.scale(alpha) + &term.lambda.scale(&(Rational::one() - alpha));
            let mut rest = ComplexRational::zero();
            for (k, t) in ps.terms[..cutoff].iter().enumerate() {
                if k != p {
                    let q = ComplexRational::real(t.d.clone())
                        .div(&(&t.lambda - &z))
                        .ok_or_else(|| PfError::GeometryDegenerate(format!("z hits pole {k}")))?;
                    rest = &rest + &q;
                }
            }
            // |lambda_p - z| = alpha * |lambda_p - anchor_p|
            let dist = sqrt_upper(&(alpha * alpha * &delta2));
            let lead = &term.d / (&two * dist);
            let lower_bound = lead - sqrt_upper(&rest.norm_sqr());
            Ok(BlowupPoint { alpha: alpha.clone(), z, lower_bound })
        })
        .collect()
}

/// `|lambda_k - z| >= |lambda_p - z|` for every `k != p` at the given `alpha`.
pub fn separation_holds(ps: &PoleSum, p: usize, alpha: &Rational) -> bool {
    let term = &ps.terms[p];
    let z = &term.anchor.scale(alpha) + &term.lambda.scale(&(Rational::one() - alpha));
    let own = term.lambda.dist_sqr(&z);
    ps.terms.iter().enumerate().all(|(k, t)| k == p || t.lambda.dist_sqr(&z) >= own)
}

/// `alpha,lower_bound` table.
pub fn blowup_csv(points: &[BlowupPoint]) -> String {
    let mut out = String::from("alpha,lower_bound\n");
    for b in points {
        out.push_str(&format!("{},{}\n", b.alpha, b.lower_bound));
    }
    out
}

/// `c'_k = c_k s^k`.
pub fn scale_sequence(c: &CoeffSeq, s: &Rational) -> Result<CoeffSeq> {
    if !s.is_positive() {
        return Err(PfError::ParameterOutOfRange(format!("scale factor {s} must be positive")));
    }
    let mut pow = Rational::one();
    let mut out = Vec::with_capacity(c.len());
    for v in c.coeffs() {
        out.push(v * &pow);
        pow *= s;
    }
    CoeffSeq::new(out)
}

#[derive(Debug, Clone, Copy)]
pub struct ComposeOptions {
    /// Number of densified boundary points.
    pub terms: usize,
    pub mode: CertMode,
    /// Scan limit for windowed mode.
    pub k: usize,
}

impl Default for ComposeOptions {
    fn default() -> Self {
        ComposeOptions { terms: 16, mode: CertMode::Certified, k: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Composition {
    #[serde(flatten)]
    pub coeffs: CoeffSeq,
    pub plan: PerturbationPlan,
    #[serde(rename = "T", with = "serde_str")]
    pub t: Rational,
    pub validation: ValidationReport,
    /// Pole sum of the domain scaled so that `T = 1`.
    pub pole_sum: PoleSum,
}

/// Coefficients `c_0..=c_w` of a PF_r generating function whose singularities
/// lie on the boundary of `spec`: `1/(1-z)^{r^2} + eps*g` built on the domain
/// scaled to `T = 1`, then rescaled by `c_k / T^k`.
pub fn compose_pfr_domain(spec: &DomainSpec, r: usize, w: usize, opts: ComposeOptions) -> Result<Composition> {
    let validation = validate_domain(spec)?;
    if !validation.all_pass() {
        return Err(PfError::DomainInvalid(format!(
            "conditions A={} B={} C={}",
            validation.origin_inside, validation.symmetric, validation.nearest_on_positive_axis
        )));
    }
    let t = validation.t.clone().expect("T is rational when (C) holds");
    let mut scaled = spec.scaled(&t.recip());
    scaled.symmetric = true;
    scaled.t = Some(Rational::one());
    let pole_sum = build_pole_sum(&scaled, opts.terms)?;
    let series = taylor_coeffs(&pole_sum, w);
    let g = series.to_real()?;
    let bound = &series.bound + Rational::one();
    let plan = epsilon_bound(r, 0, &bound, opts.mode, opts.k)?;
    let f = build_perturbed(&g, r, &plan.epsilon, w)?;
    let coeffs = scale_sequence(&f, &t.recip())?;
    Ok(Composition { coeffs, plan, t, validation, pole_sum })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, ratio};

    fn pt(x: i64, y: i64) -> Point {
        Point::from_ints(x, y)
    }

    fn square(symmetric: bool) -> DomainSpec {
        DomainSpec::new(vec![pt(2, 2), pt(-2, 2), pt(-2, -2), pt(2, -2)], symmetric)
    }

    fn notch() -> DomainSpec {
        DomainSpec::new(vec![pt(1, 0), pt(2, 2), pt(-2, 2), pt(-2, -2), pt(2, -2)], true)
    }

    #[test]
    fn square_validation() {
        let rep = validate_domain(&square(false)).unwrap();
        assert!(rep.origin_inside && rep.symmetric && rep.nearest_on_positive_axis);
        assert_eq!(rep.t, Some(rat(2)));
        assert!(rep.contains_unit_disc);
    }

    #[test]
    fn notch_validation() {
        let rep = validate_domain(&notch()).unwrap();
        assert!(rep.all_pass());
        assert_eq!(rep.t, Some(rat(1)));
    }

    #[test]
    fn origin_outside() {
        let spec = DomainSpec::new(vec![pt(1, 1), pt(3, 1), pt(3, 3), pt(1, 3)], false);
        let rep = validate_domain(&spec).unwrap();
        assert!(!rep.origin_inside);
        assert!(!rep.nearest_on_positive_axis);
    }

    #[test]
    fn condition_c_fails_off_axis() {
        // nearest boundary point at distance 1 is on the imaginary axis
        let spec = DomainSpec::new(vec![pt(3, -1), pt(3, 1), pt(-3, 1), pt(-3, -1)], true);
        let rep = validate_domain(&spec).unwrap();
        assert!(rep.origin_inside && rep.symmetric);
        assert!(!rep.nearest_on_positive_axis);
        assert_eq!(rep.t, Some(rat(1)));
    }

    #[test]
    fn irrational_t_enclosure() {
        let spec = DomainSpec::new(vec![pt(2, 0), pt(0, 2), pt(-2, 0), pt(0, -2)], true);
        let rep = validate_domain(&spec).unwrap();
        assert_eq!(rep.t_squared, rat(2));
        assert!(rep.t.is_none());
        assert!(&rep.t_lower * &rep.t_lower <= rat(2) && rat(2) <= &rep.t_upper * &rep.t_upper);
        assert!(!rep.nearest_on_positive_axis);
    }

    #[test]
    fn malformed() {
        let bowtie = DomainSpec::new(vec![pt(-1, -1), pt(1, 1), pt(1, -1), pt(-1, 1)], false);
        assert!(matches!(validate_domain(&bowtie), Err(PfError::MalformedPolyline(_))));
        let short = DomainSpec::new(vec![pt(0, 0), pt(1, 0)], false);
        assert!(validate_domain(&short).is_err());
        let dup = DomainSpec::new(vec![pt(0, 0), pt(0, 0), pt(1, 1)], false);
        assert!(validate_domain(&dup).is_err());
    }

    #[test]
    fn densify_square() {
        let sq = square(false);
        assert_eq!(densify_boundary(&sq, 1), vec![pt(2, 2)]);
        assert_eq!(densify_boundary(&sq, 4), vec![pt(0, 2), pt(-2, 0), pt(0, -2), pt(2, 0)]);
        let eight = densify_boundary(&sq, 8);
        assert_eq!(eight[4], pt(1, 2));
        assert_eq!(eight[5], pt(-1, 2));
    }

    #[test]
    fn densify_symmetric_closed() {
        let pts = densify_boundary(&notch(), 7);
        let set: HashSet<_> = pts.iter().cloned().collect();
        assert!(pts.iter().all(|p| set.contains(&p.conj())));
        assert!(pts.len() >= 7);
    }

    #[test]
    fn square_pole_sum() {
        let ps = build_pole_sum(&square(false), 8).unwrap();
        assert_eq!(ps.terms.len(), 8);
        assert_eq!(ps.weight_sum(), rat(1) - ratio(1, 256));
        assert!(ps.terms.iter().all(|t| t.lambda.norm_sqr() >= rat(4)));
        for t in &ps.terms {
            assert!(t.zeta.dist_sqr(&t.lambda) < Rational::new(BigInt::one(), BigInt::from(t.n * t.n)));
        }
    }

    #[test]
    fn single_term_and_vertex_anchor() {
        let ps = build_pole_sum(&square(false), 1).unwrap();
        assert_eq!(ps.terms.len(), 1);
        let t = &ps.terms[0];
        let (q, _) = nearest_boundary_point(&t.anchor, &square(false).vertices);
        assert_eq!(q, t.lambda);
    }

    #[test]
    fn symmetric_pairs_share_weights() {
        let ps = build_pole_sum(&notch(), 6).unwrap();
        for t in &ps.terms {
            let partner = ps.terms.iter().find(|u| u.lambda == t.lambda.conj()).expect("conjugate term");
            assert_eq!(partner.d, t.d);
        }
        assert!(ps.weight_sum() <= rat(1));
        let series = taylor_coeffs(&ps, 20);
        assert!(series.is_real());
    }

    #[test]
    fn taylor_examples() {
        let one = PoleSum {
            terms: vec![PoleTerm { lambda: pt(2, 0), d: rat(1), anchor: pt(1, 0), zeta: pt(2, 0), n: 1 }],
        };
        let s = taylor_coeffs(&one, 5);
        for (n, b) in s.coeffs.iter().enumerate() {
            assert_eq!(*b, ComplexRational::real(Rational::new(BigInt::one(), BigInt::one() << (n + 1))));
        }
        let pair = PoleSum {
            terms: vec![
                PoleTerm { lambda: pt(0, 2), d: ratio(1, 2), anchor: pt(0, 1), zeta: pt(0, 2), n: 1 },
                PoleTerm { lambda: pt(0, -2), d: ratio(1, 2), anchor: pt(0, -1), zeta: pt(0, -2), n: 1 },
            ],
        };
        let s = taylor_coeffs(&pair, 3);
        assert_eq!(s.coeffs[0], ComplexRational::zero());
        assert_eq!(s.coeffs[1], ComplexRational::real(ratio(-1, 4)));
        let empty = taylor_coeffs(&PoleSum::default(), 3);
        assert!(empty.coeffs.iter().all(|b| b.is_zero()));
    }

    #[test]
    fn blowup_single_pole() {
        let one = PoleSum {
            terms: vec![PoleTerm { lambda: pt(2, 0), d: rat(1), anchor: pt(1, 0), zeta: pt(2, 0), n: 1 }],
        };
        let pts = blowup_witness(&one, 0, &[ratio(1, 2), rat(1)]).unwrap();
        // d / (2 * (1/2) * 1) = 1
        assert_eq!(pts[0].lower_bound, rat(1));
        assert_eq!(pts[1].lower_bound, ratio(1, 2));
        assert!(blowup_witness(&one, 0, &[rat(0)]).is_err());
        assert!(blowup_witness(&one, 0, &[rat(2)]).is_err());
    }

    #[test]
    fn blowup_diverges_on_square() {
        let ps = build_pole_sum(&square(false), 16).unwrap();
        let alphas: Vec<Rational> = (1..=30).map(|j| Rational::new(BigInt::one(), BigInt::one() << j)).collect();
        let pts = blowup_witness(&ps, 0, &alphas).unwrap();
        assert!(pts.windows(2).all(|w| w[1].lower_bound > w[0].lower_bound));
        assert!(pts.last().unwrap().lower_bound > rat(1_000_000));
        for a in &alphas[..5] {
            assert!(separation_holds(&ps, 0, a));
        }
    }

    #[test]
    fn cutoff_rules() {
        let ps = build_pole_sum(&square(false), 8).unwrap();
        let cut = tail_cutoff(&ps, 0).unwrap();
        assert_eq!(cut, 2);
        assert!(matches!(
            blowup_witness_with_cutoff(&ps, 0, &[ratio(1, 2)], 1),
            Err(PfError::TailCondition(_))
        ));
        assert!(blowup_witness_with_cutoff(&ps, 2, &[ratio(1, 2)], 3).is_err());
    }

    #[test]
    fn scaling_examples() {
        let c = CoeffSeq::from_integers([1, 2, 3]).unwrap();
        assert_eq!(scale_sequence(&c, &rat(1)).unwrap(), c);
        assert_eq!(scale_sequence(&c, &ratio(1, 2)).unwrap().coeffs(), &[rat(1), rat(1), ratio(3, 4)]);
        assert!(scale_sequence(&c, &rat(0)).is_err());
    }

    #[test]
    fn composition_scales_with_t() {
        let opts = ComposeOptions { terms: 4, mode: CertMode::Certified, k: 0 };
        let base = compose_pfr_domain(&notch(), 2, 20, opts).unwrap();
        let doubled = notch().scaled(&rat(2));
        let big = compose_pfr_domain(&doubled, 2, 20, opts).unwrap();
        assert_eq!(big.t, rat(2));
        let expected = scale_sequence(&base.coeffs, &ratio(1, 2)).unwrap();
        assert_eq!(big.coeffs, expected);
    }

    #[test]
    fn json_shapes() {
        let spec = DomainSpec::from_json(r#"{"vertices":[{"re":"1","im":"0"},{"re":"0","im":"1"},{"re":"-1","im":"0"}],"symmetric":false}"#).unwrap();
        assert_eq!(spec.vertices.len(), 3);
        assert_eq!(DomainSpec::from_json(&spec.to_json()).unwrap(), spec);
    }
}
