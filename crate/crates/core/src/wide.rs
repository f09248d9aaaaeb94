//! 256-bit two's complement integers with wrapping arithmetic.

use num_bigint::{BigInt, Sign};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct W256([u64; 4]);

impl W256 {
    pub(crate) const ZERO: W256 = W256([0; 4]);

    /// Residue of `b` modulo `2^256`.
    pub(crate) fn from_big(b: &BigInt) -> W256 {
        let (sign, digits) = b.to_u64_digits();
        let mut limbs = [0u64; 4];
        for (l, d) in limbs.iter_mut().zip(digits) {
            *l = d;
        }
        let w = W256(limbs);
        if sign == Sign::Minus {
            w.neg()
        } else {
            w
        }
    }

    pub(crate) fn from_i128(x: i128) -> W256 {
        let u = x as u128;
        let fill = if x < 0 { u64::MAX } else { 0 };
        W256([u as u64, (u >> 64) as u64, fill, fill])
    }

    /// Signed value, if it fits in an `i128`.
    pub(crate) fn to_i128(self) -> Option<i128> {
        let fill = if (self.0[1] >> 63) == 1 { u64::MAX } else { 0 };
        if self.0[2] != fill || self.0[3] != fill {
            return None;
        }
        Some((u128::from(self.0[0]) | (u128::from(self.0[1]) << 64)) as i128)
    }

    pub(crate) fn to_big(self) -> BigInt {
        let mut bytes = Vec::with_capacity(32);
        for l in self.0 {
            bytes.extend_from_slice(&l.to_le_bytes());
        }
        BigInt::from_signed_bytes_le(&bytes)
    }

    pub(crate) fn add(self, o: W256) -> W256 {
        let mut out = [0u64; 4];
        let mut carry = 0u128;
        for i in 0..4 {
            let t = u128::from(self.0[i]) + u128::from(o.0[i]) + carry;
            out[i] = t as u64;
            carry = t >> 64;
        }
        W256(out)
    }

    pub(crate) fn sub(self, o: W256) -> W256 {
        let mut out = [0u64; 4];
        let mut borrow = false;
        for i in 0..4 {
            let (d, b1) = self.0[i].overflowing_sub(o.0[i]);
            let (d, b2) = d.overflowing_sub(u64::from(borrow));
            out[i] = d;
            borrow = b1 | b2;
        }
        W256(out)
    }

    /// `self +- b * m` for magnitudes below `2^128`; subtracts when `negative`.
    pub(crate) fn mac_u128(self, b: u128, m: u128, negative: bool) -> W256 {
        let lo = |x: u128| x as u64 as u128;
        let (b0, b1, m0, m1) = (lo(b), b >> 64, lo(m), m >> 64);
        let (p00, p01, p10, p11) = (b0 * m0, b0 * m1, b1 * m0, b1 * m1);
        let mid = (p00 >> 64) + lo(p01) + lo(p10);
        let hi = (mid >> 64) + (p01 >> 64) + (p10 >> 64) + lo(p11);
        let top = ((hi >> 64) as u64).wrapping_add((p11 >> 64) as u64);
        let p = W256([p00 as u64, mid as u64, hi as u64, top]);
        if negative {
            self.sub(p)
        } else {
            self.add(p)
        }
    }

    /// `self + b * m` modulo `2^256`.
    pub(crate) fn mac_u64(self, b: W256, m: u64) -> W256 {
        let m = u128::from(m);
        let mut out = [0u64; 4];
        let mut carry = 0u128;
        for i in 0..4 {
            let t = u128::from(self.0[i]) + u128::from(b.0[i]) * m + carry;
            out[i] = t as u64;
            carry = t >> 64;
        }
        W256(out)
    }

    pub(crate) fn neg(self) -> W256 {
        W256::ZERO.sub(self)
    }

    /// Low 256 bits of the product.
    pub(crate) fn mul(self, o: W256) -> W256 {
        let mut out = [0u64; 4];
        for i in 0..4 {
            let mut carry = 0u128;
            for j in 0..4 - i {
                let t = u128::from(self.0[i]) * u128::from(o.0[j]) + u128::from(out[i + j]) + carry;
                out[i + j] = t as u64;
                carry = t >> 64;
            }
        }
        W256(out)
    }

}
