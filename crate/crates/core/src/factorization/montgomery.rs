//! Multi-limb Montgomery arithmetic modulo an odd integer.
//!
//! Residues are little-endian `u64` limb vectors of fixed length `k` holding
//! `x * R mod n` with `R = 2^(64k)`. Multiplication uses the CIOS
//! (coarsely integrated operand scanning) reduction.

use num_bigint::BigUint;
use num_traits::Zero;

/// Largest modulus size handled, in 64-bit limbs.
pub const MAX_LIMBS: usize = 160;

pub type Residue = Vec<u64>;

#[derive(Debug, Clone)]
pub struct Montgomery {
    n: Vec<u64>,
    n_big: BigUint,
    n0inv: u64,
    one: Residue,
}

pub(crate) fn limbs_of(x: &BigUint, k: usize) -> Vec<u64> {
    let mut v = x.to_u64_digits();
    v.resize(k, 0);
    v
}

pub(crate) fn biguint_of(limbs: &[u64]) -> BigUint {
    let mut digits = Vec::with_capacity(limbs.len() * 2);
    for &l in limbs {
        digits.push(l as u32);
        digits.push((l >> 32) as u32);
    }
    BigUint::new(digits)
}

impl Montgomery {
    /// `n` must be odd and greater than 1.
    pub fn new(n: &BigUint) -> Self {
        assert!(n.bit(0) && n > &BigUint::from(1u32), "Montgomery modulus must be odd and > 1");
        let k = n.to_u64_digits().len();
        assert!(k <= MAX_LIMBS, "modulus too large for Montgomery arithmetic");
        let limbs = limbs_of(n, k);
        // Newton iteration for n0^-1 mod 2^64; each step doubles the correct bits.
        let n0 = limbs[0];
        let mut inv: u64 = 1;
        for _ in 0..6 {
            inv = inv.wrapping_mul(2u64.wrapping_sub(n0.wrapping_mul(inv)));
        }
        debug_assert_eq!(n0.wrapping_mul(inv), 1);
        let r_mod_n = (BigUint::from(1u32) << (64 * k)) % n;
        Montgomery {
            n: limbs,
            n_big: n.clone(),
            n0inv: inv.wrapping_neg(),
            one: limbs_of(&r_mod_n, k),
        }
    }

    pub fn modulus(&self) -> &BigUint {
        &self.n_big
    }

    pub fn limbs(&self) -> usize {
        self.n.len()
    }

    pub fn one(&self) -> Residue {
        self.one.clone()
    }

    pub fn zero(&self) -> Residue {
        vec![0; self.n.len()]
    }

    pub fn to_mont(&self, a: &BigUint) -> Residue {
        let k = self.n.len();
        limbs_of(&((a << (64 * k)) % &self.n_big), k)
    }

    pub fn from_mont(&self, a: &[u64]) -> BigUint {
        let mut unit = vec![0u64; self.n.len()];
        unit[0] = 1;
        let mut out = self.zero();
        self.mul(a, &unit, &mut out);
        biguint_of(&out)
    }

    /// `out = a * b * R^-1 mod n`. `out` may not alias the inputs.
    pub fn mul(&self, a: &[u64], b: &[u64], out: &mut [u64]) {
        let k = self.n.len();
        let n = &self.n;
        let mut t = [0u64; MAX_LIMBS + 2];
        for &bi in b.iter().take(k) {
            let mut carry: u64 = 0;
            for j in 0..k {
                let s = t[j] as u128 + a[j] as u128 * bi as u128 + carry as u128;
                t[j] = s as u64;
                carry = (s >> 64) as u64;
            }
            let s = t[k] as u128 + carry as u128;
            t[k] = s as u64;
            t[k + 1] = (s >> 64) as u64;

            let m = t[0].wrapping_mul(self.n0inv);
            let s = t[0] as u128 + m as u128 * n[0] as u128;
            let mut carry = (s >> 64) as u64;
            for j in 1..k {
                let s = t[j] as u128 + m as u128 * n[j] as u128 + carry as u128;
                t[j - 1] = s as u64;
                carry = (s >> 64) as u64;
            }
            let s = t[k] as u128 + carry as u128;
            t[k - 1] = s as u64;
            t[k] = t[k + 1] + (s >> 64) as u64;
        }
        if t[k] != 0 || !less_than(&t[..k], n) {
            sub_in_place(&mut t[..k], n);
        }
        out[..k].copy_from_slice(&t[..k]);
    }

    pub fn square(&self, a: &[u64], out: &mut [u64]) {
        self.mul(a, a, out);
    }

    /// `a = a + b mod n`.
    pub fn add_assign(&self, a: &mut [u64], b: &[u64]) {
        let mut carry = 0u64;
        for (x, &y) in a.iter_mut().zip(b) {
            let (s1, c1) = x.overflowing_add(y);
            let (s2, c2) = s1.overflowing_add(carry);
            *x = s2;
            carry = (c1 | c2) as u64;
        }
        if carry != 0 || !less_than(a, &self.n) {
            sub_in_place(a, &self.n);
        }
    }

    /// `out = a - b mod n`.
    pub fn sub(&self, a: &[u64], b: &[u64], out: &mut [u64]) {
        out.copy_from_slice(a);
        let borrow = sub_in_place(out, b);
        if borrow {
            add_in_place(out, &self.n);
        }
    }

    pub fn pow(&self, base: &[u64], exp: &BigUint) -> Residue {
        let mut acc = self.one();
        let mut tmp = self.zero();
        if exp.is_zero() {
            return acc;
        }
        for i in (0..exp.bits()).rev() {
            self.square(&acc, &mut tmp);
            std::mem::swap(&mut acc, &mut tmp);
            if exp.bit(i) {
                self.mul(&acc, base, &mut tmp);
                std::mem::swap(&mut acc, &mut tmp);
            }
        }
        acc
    }

    pub fn pow_u64(&self, base: &[u64], exp: u64) -> Residue {
        let mut acc = self.one();
        let mut tmp = self.zero();
        if exp == 0 {
            return acc;
        }
        for i in (0..64 - exp.leading_zeros()).rev() {
            self.square(&acc, &mut tmp);
            std::mem::swap(&mut acc, &mut tmp);
            if (exp >> i) & 1 == 1 {
                self.mul(&acc, base, &mut tmp);
                std::mem::swap(&mut acc, &mut tmp);
            }
        }
        acc
    }
}

fn less_than(a: &[u64], b: &[u64]) -> bool {
    for (x, y) in a.iter().rev().zip(b.iter().rev()) {
        if x != y {
            return x < y;
        }
    }
    false
}

/// `a -= b`, returning the final borrow.
fn sub_in_place(a: &mut [u64], b: &[u64]) -> bool {
    let mut borrow = false;
    for (x, &y) in a.iter_mut().zip(b) {
        let (d1, b1) = x.overflowing_sub(y);
        let (d2, b2) = d1.overflowing_sub(borrow as u64);
        *x = d2;
        borrow = b1 | b2;
    }
    borrow
}

fn add_in_place(a: &mut [u64], b: &[u64]) {
    let mut carry = false;
    for (x, &y) in a.iter_mut().zip(b) {
        let (s1, c1) = x.overflowing_add(y);
        let (s2, c2) = s1.overflowing_add(carry as u64);
        *x = s2;
        carry = c1 | c2;
    }
}
