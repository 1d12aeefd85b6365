//! Real root isolation for the low-degree polynomials that describe
//! ballistic flight against lines, circles and spheres.
//!
//! Roots are bracketed by recursing on the derivative: between consecutive
//! critical points a polynomial is monotone, so each sign change is refined
//! by bisection down to adjacent floating point numbers.

use alloc::vec::Vec;

/// Coefficients in increasing degree: `c[0] + c[1] t + c[2] t² + ...`.
pub fn eval(c: &[f64], t: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * t + a)
}

pub fn derivative(c: &[f64]) -> Vec<f64> {
    c.iter().enumerate().skip(1).map(|(k, &a)| k as f64 * a).collect()
}

/// Drops trailing coefficients that are negligible relative to the largest one.
fn trim(c: &[f64]) -> &[f64] {
    let scale = c.iter().fold(0.0f64, |m, a| m.max(a.abs()));
    let mut n = c.len();
    while n > 0 && c[n - 1].abs() <= scale * 1e-300 {
        n -= 1;
    }
    &c[..n]
}

fn bisect(c: &[f64], mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = eval(c, m);
        if fm == 0.0 {
            return m;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    // Return the endpoint with the smaller residual.
    if eval(c, a).abs() <= eval(c, b).abs() {
        a
    } else {
        b
    }
}

/// All real roots in the closed interval `[lo, hi]`, sorted ascending.
///
/// Roots of even multiplicity (tangencies) are only reported when the
/// polynomial evaluates to exactly zero at a critical point.
pub fn roots_in(c: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let c = trim(c);
    let mut out = Vec::new();
    if c.len() <= 1 || !(lo <= hi) {
        return out;
    }
    if c.len() == 2 {
        let t = -c[0] / c[1];
        if t >= lo && t <= hi {
            out.push(t);
        }
        return out;
    }
    let mut knots = Vec::with_capacity(c.len() + 1);
    knots.push(lo);
    for t in roots_in(&derivative(c), lo, hi) {
        if t > *knots.last().unwrap() && t < hi {
            knots.push(t);
        }
    }
    knots.push(hi);
    for w in knots.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (fa, fb) = (eval(c, a), eval(c, b));
        if fa == 0.0 {
            if out.last().map_or(true, |&r| r < a) {
                out.push(a);
            }
            continue;
        }
        if fb == 0.0 {
            out.push(b);
            continue;
        }
        if (fa < 0.0) != (fb < 0.0) {
            out.push(bisect(c, a, b, fa));
        }
    }
    out
}

/// Smallest root strictly greater than `lo` and at most `hi`.
pub fn first_root_after(c: &[f64], lo: f64, hi: f64) -> Option<f64> {
    roots_in(c, lo, hi).into_iter().find(|&t| t > lo)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_roots() {
        // (t - 1)(t - 3)
        let r = roots_in(&[3.0, -4.0, 1.0], 0.0, 10.0);
        assert_eq!(r.len(), 2);
        assert!((r[0] - 1.0).abs() < 1e-15 && (r[1] - 3.0).abs() < 1e-15);
    }

    #[test]
    fn quartic_roots_and_window() {
        // (t-0.5)(t-1)(t-2)(t-4) = t^4 - 7.5 t^3 + 17.5 t^2 - 15 t + 4
        let c = [4.0, -15.0, 17.5, -7.5, 1.0];
        let r = roots_in(&c, 0.0, 5.0);
        let expect = [0.5, 1.0, 2.0, 4.0];
        assert_eq!(r.len(), 4);
        for (a, b) in r.iter().zip(expect) {
            assert!((a - b).abs() < 1e-13, "{a} vs {b}");
        }
        assert_eq!(first_root_after(&c, 1.0, 5.0), Some(r[2]));
        assert!(roots_in(&c, 4.5, 9.0).is_empty());
    }

    #[test]
    fn double_root_at_exact_zero_is_reported() {
        // (t - 2)^2
        let r = roots_in(&[4.0, -4.0, 1.0], 0.0, 3.0);
        assert_eq!(r, alloc::vec![2.0]);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(roots_in(&[1.0], 0.0, 1.0).is_empty());
        assert!(roots_in(&[], 0.0, 1.0).is_empty());
        assert_eq!(roots_in(&[-1.0, 2.0, 0.0, 0.0], 0.0, 1.0), alloc::vec![0.5]);
    }
}
