//! Minimal double-double arithmetic (Dekker/Knuth error-free transforms).
//!
//! The moment-to-pmf recovery works with monomial moments whose dynamic range
//! exceeds what an f64 significand can carry once the coupon count goes past
//! a dozen or so; assembling the moments and running the Vandermonde solve in
//! double-double keeps the recovered probabilities at the accuracy of the
//! underlying option prices instead of the f64 representation floor.

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct Dd {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    // requires |a| >= |b|
    let s = a + b;
    let err = b - (s - a);
    (s, err)
}

#[inline]
fn split(a: f64) -> (f64, f64) {
    // Dekker split, valid for |a| < 2^996.
    let t = 134_217_729.0 * a; // 2^27 + 1
    let hi = t - (t - a);
    (hi, a - hi)
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let (ah, al) = split(a);
    let (bh, bl) = split(b);
    let err = ((ah * bh - p) + ah * bl + al * bh) + al * bl;
    (p, err)
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

    #[inline]
    pub fn from_f64(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    /// Exact conversion for any `u128` up to 2^106 (limb-wise, 32-bit limbs).
    pub fn from_u128(x: u128) -> Self {
        let mut acc = Dd::ZERO;
        let mut scale = Dd::from_f64(1.0);
        let two32 = Dd::from_f64(4_294_967_296.0);
        let mut rest = x;
        while rest > 0 {
            let limb = (rest & 0xffff_ffff) as u32 as f64;
            acc = acc.add(scale.mul_f64(limb));
            rest >>= 32;
            scale = scale.mul(two32);
        }
        acc
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn neg(self) -> Self {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    #[inline]
    pub fn add(self, other: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, other.hi);
        let s2 = s2 + self.lo + other.lo;
        let (hi, lo) = quick_two_sum(s1, s2);
        Dd { hi, lo }
    }

    #[inline]
    pub fn sub(self, other: Dd) -> Dd {
        self.add(other.neg())
    }

    #[inline]
    pub fn mul(self, other: Dd) -> Dd {
        let (p1, p2) = two_prod(self.hi, other.hi);
        let p2 = p2 + self.hi * other.lo + self.lo * other.hi;
        let (hi, lo) = quick_two_sum(p1, p2);
        Dd { hi, lo }
    }

    #[inline]
    pub fn mul_f64(self, other: f64) -> Dd {
        self.mul(Dd::from_f64(other))
    }

    pub fn div(self, other: Dd) -> Dd {
        let q1 = self.hi / other.hi;
        let r = self.sub(other.mul_f64(q1));
        let q2 = r.hi / other.hi;
        let r = r.sub(other.mul_f64(q2));
        let q3 = r.hi / other.hi;
        let (s, e) = quick_two_sum(q1, q2);
        let (hi, lo) = quick_two_sum(s, e + q3);
        Dd { hi, lo }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn add_keeps_small_terms() {
        // 1e16 + 1 - 1e16 loses the 1 in plain f64 when the sum is formed
        // first; double-double keeps it.
        let big = Dd::from_f64(1e16);
        let one = Dd::from_f64(1.0);
        let r = big.add(one).sub(big);
        assert_eq!(r.to_f64(), 1.0);
    }

    #[test]
    fn mul_is_error_free_for_exact_products() {
        let a = 100_000_001.0; // 1e8 + 1, exact in f64
        let d = Dd::from_f64(a).mul(Dd::from_f64(a));
        // (1e8+1)^2 = 1e16 + 2e8 + 1, not representable in one f64
        let exact = 10_000_000_200_000_001u128;
        let back = Dd::from_u128(exact);
        assert_eq!(d.hi, back.hi);
        assert_eq!(d.lo, back.lo);
    }

    #[test]
    fn div_round_trips() {
        let third = Dd::from_f64(1.0).div(Dd::from_f64(3.0));
        let one = third.mul_f64(3.0);
        assert!((one.to_f64() - 1.0).abs() < 1e-30);
        // residual check on the low word too
        assert!((one.hi - 1.0).abs() < f64::EPSILON);
        assert!(one.lo.abs() < 1e-30);
    }

    #[test]
    fn from_u128_is_exact() {
        let x: u128 = 121_645_100_408_832_000; // 19!
        let d = Dd::from_u128(x);
        // Both words recombine to the integer exactly.
        let hi = d.hi as i128;
        let lo = d.lo as i128;
        assert_eq!(hi + lo, x as i128);
    }

    #[test]
    fn sub_cancellation() {
        let a = Dd::from_u128(1_000_000_000_000_000_003);
        let b = Dd::from_u128(1_000_000_000_000_000_000);
        assert_eq!(a.sub(b).to_f64(), 3.0);
    }
}
