//! Exact plane geometry on Gaussian-rational points. Distances are compared
//! through their squares so nothing leaves the rationals.

use num_traits::{One, Signed, Zero};

use crate::rational::{ComplexRational, Rational};

pub type Point = ComplexRational;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    Inside,
    Outside,
    Boundary,
}

/// Twice the signed area of triangle `abc`; positive when counter-clockwise.
pub fn orient(a: &Point, b: &Point, c: &Point) -> Rational {
    (b - a).cross(&(c - a))
}

fn sign(q: &Rational) -> i8 {
    if q.is_positive() {
        1
    } else if q.is_negative() {
        -1
    } else {
        0
    }
}

/// `p` lies on the closed segment `ab`.
pub fn on_segment(p: &Point, a: &Point, b: &Point) -> bool {
    if !orient(a, b, p).is_zero() {
        return false;
    }
    let within = |x: &Rational, lo: &Rational, hi: &Rational| {
        let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        lo <= x && x <= hi
    };
    within(&p.re, &a.re, &b.re) && within(&p.im, &a.im, &b.im)
}

/// Closed segments `ab` and `cd` share at least one point.
pub fn segments_intersect(a: &Point, b: &Point, c: &Point, d: &Point) -> bool {
    let d1 = sign(&orient(c, d, a));
    let d2 = sign(&orient(c, d, b));
    let d3 = sign(&orient(a, b, c));
    let d4 = sign(&orient(a, b, d));
    if d1 * d2 < 0 && d3 * d4 < 0 {
        return true;
    }
    (d1 == 0 && on_segment(a, c, d))
        || (d2 == 0 && on_segment(b, c, d))
        || (d3 == 0 && on_segment(c, a, b))
        || (d4 == 0 && on_segment(d, a, b))
}

/// Point of segment `ab` closest to `p`.
pub fn nearest_on_segment(p: &Point, a: &Point, b: &Point) -> Point {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2.is_zero() {
        return a.clone();
    }
    let t = (p - a).dot(&ab) / len2;
    if !t.is_positive() {
        a.clone()
    } else if t >= Rational::one() {
        b.clone()
    } else {
        a + &ab.scale(&t)
    }
}

pub fn dist_sqr_to_segment(p: &Point, a: &Point, b: &Point) -> Rational {
    p.dist_sqr(&nearest_on_segment(p, a, b))
}

/// Edges `(v_i, v_{i+1})` of the closed polyline.
pub fn edges(poly: &[Point]) -> impl Iterator<Item = (&Point, &Point)> {
    poly.iter().zip(poly.iter().cycle().skip(1))
}

/// Twice the signed area (shoelace).
pub fn signed_area2(poly: &[Point]) -> Rational {
    edges(poly).fold(Rational::zero(), |acc, (a, b)| acc + a.cross(b))
}

/// Even-odd location test with exact boundary detection.
pub fn locate(p: &Point, poly: &[Point]) -> Location {
    let mut inside = false;
    for (a, b) in edges(poly) {
        if on_segment(p, a, b) {
            return Location::Boundary;
        }
        if (a.im > p.im) != (b.im > p.im) {
            let x = &a.re + (&p.im - &a.im) * (&b.re - &a.re) / (&b.im - &a.im);
            if p.re < x {
                inside = !inside;
            }
        }
    }
    if inside {
        Location::Inside
    } else {
        Location::Outside
    }
}

/// Nearest boundary point to `p` with its squared distance; ties go to the
/// first edge in vertex order.
pub fn nearest_boundary_point(p: &Point, poly: &[Point]) -> (Point, Rational) {
    let mut best: Option<(Point, Rational)> = None;
    for (a, b) in edges(poly) {
        let q = nearest_on_segment(p, a, b);
        let d = p.dist_sqr(&q);
        if best.as_ref().map_or(true, |(_, bd)| d < *bd) {
            best = Some((q, d));
        }
    }
    best.expect("polygon has edges")
}

/// `|x| + |y|`, an upper bound for the Euclidean length.
pub fn l1_norm(p: &Point) -> Rational {
    p.re.abs() + p.im.abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, ratio};

    fn pt(x: i64, y: i64) -> Point {
        Point::from_ints(x, y)
    }

    fn square() -> Vec<Point> {
        vec![pt(2, 2), pt(-2, 2), pt(-2, -2), pt(2, -2)]
    }

    #[test]
    fn location() {
        let sq = square();
        assert_eq!(locate(&pt(0, 0), &sq), Location::Inside);
        assert_eq!(locate(&pt(2, 0), &sq), Location::Boundary);
        assert_eq!(locate(&pt(3, 0), &sq), Location::Outside);
        assert_eq!(locate(&pt(2, 2), &sq), Location::Boundary);
        assert_eq!(locate(&Point::new(ratio(19, 10), rat(2)), &sq), Location::Boundary);
    }

    #[test]
    fn nearest_points() {
        let (q, d) = nearest_boundary_point(&pt(0, 0), &square());
        assert_eq!(d, rat(4));
        assert_eq!(q, pt(0, 2));
        assert_eq!(nearest_on_segment(&pt(5, 5), &pt(0, 0), &pt(2, 0)), pt(2, 0));
        assert_eq!(nearest_on_segment(&pt(1, 5), &pt(0, 0), &pt(2, 0)), pt(1, 0));
    }

    #[test]
    fn intersections() {
        assert!(segments_intersect(&pt(0, 0), &pt(2, 2), &pt(0, 2), &pt(2, 0)));
        assert!(!segments_intersect(&pt(0, 0), &pt(1, 0), &pt(0, 1), &pt(1, 1)));
        assert!(segments_intersect(&pt(0, 0), &pt(2, 0), &pt(1, 0), &pt(3, 0)));
        assert!(segments_intersect(&pt(0, 0), &pt(2, 0), &pt(2, 0), &pt(2, 3)));
    }

    #[test]
    fn area_orientation() {
        assert_eq!(signed_area2(&square()), rat(32));
        let mut cw = square();
        cw.reverse();
        assert_eq!(signed_area2(&cw), rat(-32));
    }
}
