//! Double-double arithmetic (about 106-bit significand) for the few sums
//! whose ceiling must be stable.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Unevaluated sum `hi + lo` with `|lo| ≤ ulp(hi)/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Dd {
    pub hi: f64,
    pub lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub const fn new(hi: f64, lo: f64) -> Self {
        Self { hi, lo }
    }

    fn norm(hi: f64, lo: f64) -> Self {
        let (hi, lo) = quick_two_sum(hi, lo);
        Self { hi, lo }
    }

    /// Smallest integer not below the value, as an `f64`.
    pub fn ceil(self) -> f64 {
        let c = self.hi.ceil();
        if c == self.hi && self.lo > 0.0 {
            c + 1.0
        } else {
            c
        }
    }

    /// `ln 2`
    const LN_2: Dd = Dd::new(std::f64::consts::LN_2, 2.3190468138462996e-17);

    /// Natural logarithm of a positive value: `x = 2^e f` with
    /// `f ∈ [1/√2, √2)`, then `ln f = 2 Σ z^(2i+1)/(2i+1)` with
    /// `z = (f-1)/(f+1)`, `|z| < 0.172`.
    pub fn ln(self) -> Dd {
        debug_assert!(self.hi > 0.0);
        let mut e = self.hi.log2().round() as i32;
        let mut scale = 2f64.powi(-e);
        if self.hi * scale >= std::f64::consts::SQRT_2 {
            e += 1;
            scale *= 0.5;
        } else if self.hi * scale < std::f64::consts::FRAC_1_SQRT_2 {
            e -= 1;
            scale *= 2.0;
        }
        let f = Dd::new(self.hi * scale, self.lo * scale);
        let one = Dd::from(1.0);
        let z = (f - one) / (f + one);
        let z2 = z * z;
        let mut power = z;
        let mut sum = z;
        for i in 1..60 {
            power = power * z2;
            let piece = power / Dd::from((2 * i + 1) as f64);
            sum = sum + piece;
            if piece.hi.abs() <= 1e-34 * sum.hi.abs() {
                break;
            }
        }
        Self::LN_2 * Dd::from(e as f64) + sum * Dd::from(2.0)
    }
}

impl From<f64> for Dd {
    fn from(v: f64) -> Self {
        Self { hi: v, lo: 0.0 }
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        Dd::norm(s, e + f)
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd::new(-self.hi, -self.lo)
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, o: Dd) -> Dd {
        self + (-o)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        Dd::norm(p, e + (self.hi * o.lo + self.lo * o.hi))
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self - o * Dd::from(q1);
        let q2 = r.hi / o.hi;
        let r = r - o * Dd::from(q2);
        let q3 = r.hi / o.hi;
        let (h, l) = quick_two_sum(q1, q2);
        Dd::new(h, l) + Dd::from(q3)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn division_keeps_the_low_word() {
        let t = Dd::from(1.0) / Dd::from(3.0);
        assert_eq!(t.hi, 0.3333333333333333);
        assert!((t.lo - 1.850371707708594e-17).abs() < 1e-32);
    }

    #[test]
    fn ceiling_respects_the_low_word() {
        assert_eq!(Dd::new(5.0, 1e-20).ceil(), 6.0);
        assert_eq!(Dd::new(5.0, -1e-20).ceil(), 5.0);
        assert_eq!(Dd::new(4.5, 0.0).ceil(), 5.0);
    }

    #[test]
    #[allow(clippy::approx_constant)]
    fn logarithm_references() {
        // 40-digit values split into (hi, lo)
        let refs = [
            (2.0, 0.6931471805599453, 2.3190468138462996e-17),
            (48.0, 3.871201010907891, -2.1999570472119463e-16),
            (20000.0, 9.903487552536127, 8.202225157232981e-16),
            (20.0, 2.995732273553991, 1.39181753187785e-16),
            (2e6, 14.508657738524219, 3.8607127104684815e-16),
            (6000.0, 8.699514748210191, 7.245405607864764e-16),
            (5.0, 1.6094379124341003, 9.280081691085902e-17),
        ];
        for (x, hi, lo) in refs {
            let l = Dd::from(x).ln();
            let err = (l.hi - hi) + (l.lo - lo);
            assert!(err.abs() < 1e-30 * hi, "ln {x}: {:e} {:e}", l.hi, l.lo);
        }
        assert_eq!(Dd::from(1.0).ln().hi, 0.0);
    }
}
