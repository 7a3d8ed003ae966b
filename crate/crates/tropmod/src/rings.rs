//! Exact arithmetic over Z/mZ for m = p^n or p^n * M, and the matrix group
//! SL_2(Z/mZ).
//!
//! Everything downstream acts through determinant-1 matrices over these
//! rings, so this module provides:
//!
//! * [`Modulus`] — the ring Z/(p^n * M)Z with p >= 5 prime and gcd(M, p) = 1;
//! * [`ResidueMatrix`] — a 2x2 matrix with det = 1, entries canonical in [0, m);
//! * [`UnitInfo`] / [`unit_square_class`] — unit and square detection in
//!   (Z/p^n Z)^*, where squareness of a unit equals quadratic residuosity
//!   mod p (Hensel lifting, p odd);
//! * [`enumerate_sl2`] — a lazy lexicographic enumeration of SL_2(Z/p^n Z),
//!   used as a brute-force oracle against the closed order formula
//!   |SL_2(Z/p^n Z)| = p^(3n-2) (p^2 - 1).

use crate::error::{Error, Result};
use num_bigint::BigUint;
use num_traits::One;
use std::fmt;

/// The ring Z/mZ with m = p^n * M, p >= 5 prime, gcd(M, p) = 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Modulus {
    /// The residue characteristic, a prime >= 5.
    pub p: u64,
    /// The exponent of p in m.
    pub n: u32,
    /// The prime-to-p part of m.
    pub big_m: u64,
    /// The modulus itself, p^n * M.
    pub m: u64,
}

impl Modulus {
    /// Build p^n * M, validating primality of p and coprimality of M.
    pub fn new(p: u64, n: u32, big_m: u64) -> Result<Self> {
        if p < 5 || !is_prime(p) {
            return Err(Error::BadPrime(p));
        }
        if big_m == 0 || big_m % p == 0 {
            return Err(Error::domain(format!(
                "auxiliary level M = {big_m} must be positive and coprime to p = {p}"
            )));
        }
        let pn = checked_pow(p, n)
            .ok_or_else(|| Error::domain(format!("modulus p^n = {p}^{n} overflows u64")))?;
        let m = pn
            .checked_mul(big_m)
            .ok_or_else(|| Error::domain(format!("modulus {p}^{n} * {big_m} overflows u64")))?;
        Ok(Modulus { p, n, big_m, m })
    }

    /// The pure prime-power ring Z/p^n Z.
    pub fn prime_power(p: u64, n: u32) -> Result<Self> {
        Modulus::new(p, n, 1)
    }

    /// p^n, the p-part of the modulus.
    pub fn pn(&self) -> u64 {
        self.m / self.big_m
    }

    /// Euler phi of p^n: (p - 1) p^(n-1), or 1 when n = 0.
    pub fn phi_pn(&self) -> u64 {
        if self.n == 0 {
            1
        } else {
            (self.p - 1) * self.pn() / self.p
        }
    }

    /// p-adic valuation of x (capped at n; x = 0 has valuation n).
    pub fn valuation(&self, x: u64) -> u32 {
        let mut x = x % self.pn();
        if x == 0 {
            return self.n;
        }
        let mut v = 0;
        while x % self.p == 0 {
            x /= self.p;
            v += 1;
        }
        v
    }

    /// True if x is a unit of Z/mZ.
    pub fn is_unit(&self, x: u64) -> bool {
        num_integer::gcd(x % self.m, self.m) == 1
    }
}

/// x * y mod m without overflow.
pub fn mul_mod(x: u64, y: u64, m: u64) -> u64 {
    ((x as u128 * y as u128) % m as u128) as u64
}

/// x^e mod m by square-and-multiply.
pub fn pow_mod(mut x: u64, mut e: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    x %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, x, m);
        }
        x = mul_mod(x, x, m);
        e >>= 1;
    }
    acc
}

/// Inverse of x mod m; errors when gcd(x, m) > 1.
pub fn inv_mod(x: u64, m: u64) -> Result<u64> {
    let (mut r0, mut r1) = (m as i128, (x % m) as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 != 1 {
        return Err(Error::domain(format!("{x} is not invertible mod {m}")));
    }
    Ok(t0.rem_euclid(m as i128) as u64)
}

fn checked_pow(base: u64, exp: u32) -> Option<u64> {
    let mut acc = 1u64;
    for _ in 0..exp {
        acc = acc.checked_mul(base)?;
    }
    Some(acc)
}

/// Deterministic Miller-Rabin, valid for all u64.
pub fn is_prime(x: u64) -> bool {
    if x < 2 {
        return false;
    }
    for q in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if x == q {
            return true;
        }
        if x % q == 0 {
            return false;
        }
    }
    let d = (x - 1) >> (x - 1).trailing_zeros();
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut y = pow_mod(a, d, x);
        if y == 1 || y == x - 1 {
            continue;
        }
        let mut r = d;
        while r != x - 1 {
            y = mul_mod(y, y, x);
            r <<= 1;
            if y == x - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Prime factorization of x by trial division (fine for the sizes here).
pub(crate) fn factorize(mut x: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= x {
        if x % d == 0 {
            let mut e = 0;
            while x % d == 0 {
                x /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if x > 1 {
        out.push((x, 1));
    }
    out
}

/// The smallest positive quadratic nonresidue mod p. The same integer is a
/// nonsquare unit of Z/p^n Z for every n >= 1 (Hensel, p odd), which makes
/// it a stable choice of "fixed nonsquare r" across the whole crate.
pub fn least_nonresidue(p: u64) -> u64 {
    (2..p)
        .find(|&r| pow_mod(r, (p - 1) / 2, p) == p - 1)
        .expect("odd prime has a nonresidue")
}

/// The smallest generator of the cyclic group (Z/p^n Z)^*.
pub fn primitive_root(p: u64, n: u32) -> u64 {
    let factors = factorize(p - 1);
    let g = (2..p)
        .find(|&g| factors.iter().all(|&(q, _)| pow_mod(g, (p - 1) / q, p) != 1))
        .expect("odd prime has a primitive root");
    if n <= 1 {
        return g;
    }
    // g lifts to a generator mod p^n unless g^(p-1) = 1 mod p^2; then g + p works.
    if pow_mod(g, p - 1, p * p) == 1 {
        g + p
    } else {
        g
    }
}

/// Order of SL_2(Z/p^n Z): p^(3n-2) (p^2 - 1), and 1 when n = 0.
pub fn sl2_order(p: u64, n: u32) -> BigUint {
    if n == 0 {
        return BigUint::one();
    }
    let p = BigUint::from(p);
    p.pow(3 * n - 2) * (&p * &p - BigUint::one())
}

/// Unit and square data for a residue of Z/p^n Z.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UnitInfo {
    /// The canonical residue in [0, p^n).
    pub value: u64,
    /// Whether the residue is a unit (valuation zero).
    pub is_unit: bool,
    /// For units: whether the residue is a square in (Z/p^n Z)^*.
    /// Unset for non-units.
    pub is_square: Option<bool>,
    /// The p-adic valuation, in [0, n] (zero residue gets n).
    pub valuation: u32,
}

/// Classify u in Z/p^n Z as unit/non-unit, square/nonsquare.
///
/// For a unit, squareness in (Z/p^n Z)^* equals quadratic residuosity mod p:
/// squares lift uniquely through each level since p is odd.
pub fn unit_square_class(u: u64, p: u64, n: u32) -> Result<UnitInfo> {
    if n == 0 {
        return Err(Error::domain("unit_square_class needs n >= 1".to_string()));
    }
    let md = Modulus::prime_power(p, n)?;
    let value = u % md.m;
    let valuation = md.valuation(value);
    let is_unit = valuation == 0;
    let is_square = if is_unit {
        Some(pow_mod(value % p, (p - 1) / 2, p) == 1)
    } else {
        None
    };
    Ok(UnitInfo { value, is_unit, is_square, valuation })
}

/// A 2x2 determinant-1 matrix over Z/mZ, entries canonical in [0, m).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ResidueMatrix {
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub d: u64,
    pub modulus: Modulus,
}

impl ResidueMatrix {
    /// Build [[a, b], [c, d]] mod m, rejecting det != 1. Inputs may be any
    /// i64 (negative entries are reduced into [0, m)).
    pub fn new(a: i64, b: i64, c: i64, d: i64, modulus: Modulus) -> Result<Self> {
        let m = modulus.m as i128;
        let red = |x: i64| (x as i128).rem_euclid(m) as u64;
        let mat = ResidueMatrix { a: red(a), b: red(b), c: red(c), d: red(d), modulus };
        let det = (mul_mod(mat.a, mat.d, modulus.m) + modulus.m
            - mul_mod(mat.b, mat.c, modulus.m))
            % modulus.m;
        if det != 1 % modulus.m {
            return Err(Error::domain(format!(
                "matrix [[{},{}],[{},{}]] has determinant {} != 1 mod {}",
                mat.a, mat.b, mat.c, mat.d, det, modulus.m
            )));
        }
        Ok(mat)
    }

    /// The identity matrix.
    pub fn identity(modulus: Modulus) -> Self {
        let one = 1 % modulus.m;
        ResidueMatrix { a: one, b: 0, c: 0, d: one, modulus }
    }

    /// Matrix product self * rhs.
    pub fn mul(&self, rhs: &ResidueMatrix) -> Result<ResidueMatrix> {
        if self.modulus != rhs.modulus {
            return Err(Error::ModulusMismatch(self.modulus.m, rhs.modulus.m));
        }
        let m = self.modulus.m;
        Ok(ResidueMatrix {
            a: (mul_mod(self.a, rhs.a, m) + mul_mod(self.b, rhs.c, m)) % m,
            b: (mul_mod(self.a, rhs.b, m) + mul_mod(self.b, rhs.d, m)) % m,
            c: (mul_mod(self.c, rhs.a, m) + mul_mod(self.d, rhs.c, m)) % m,
            d: (mul_mod(self.c, rhs.b, m) + mul_mod(self.d, rhs.d, m)) % m,
            modulus: self.modulus,
        })
    }

    /// Inverse [[d, -b], [-c, a]] (valid since det = 1).
    pub fn inverse(&self) -> ResidueMatrix {
        let m = self.modulus.m;
        ResidueMatrix {
            a: self.d,
            b: (m - self.b) % m,
            c: (m - self.c) % m,
            d: self.a,
            modulus: self.modulus,
        }
    }

    /// The negated matrix -I * self.
    pub fn neg(&self) -> ResidueMatrix {
        let m = self.modulus.m;
        ResidueMatrix {
            a: (m - self.a) % m,
            b: (m - self.b) % m,
            c: (m - self.c) % m,
            d: (m - self.d) % m,
            modulus: self.modulus,
        }
    }
}

impl fmt::Display for ResidueMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{},{}],[{},{}]] mod {}", self.a, self.b, self.c, self.d, self.modulus.m)
    }
}

/// Entrywise reduction of a determinant-1 matrix to a divisor modulus.
/// This is the natural surjection SL_2(Z/mZ) -> SL_2(Z/m'Z), a group
/// homomorphism.
pub fn sl2_reduce(mat: &ResidueMatrix, target: Modulus) -> Result<ResidueMatrix> {
    if target.m == 0 || mat.modulus.m % target.m != 0 {
        return Err(Error::BadReductionTarget { from: mat.modulus.m, target: target.m });
    }
    let t = target.m;
    Ok(ResidueMatrix {
        a: mat.a % t,
        b: mat.b % t,
        c: mat.c % t,
        d: mat.d % t,
        modulus: target,
    })
}

/// Lazily enumerate all of SL_2(Z/p^n Z) in lexicographic (a, b, c, d) order.
///
/// For each (a, b) the remaining entries are forced: a unit a gives one d per
/// free c; a non-unit a forces b, c to be units with c determined by (b, d).
/// The full group is huge for large p^n, so the cap guards p^n, and callers
/// typically count or sample rather than collect.
pub fn enumerate_sl2(p: u64, n: u32, cap: u64) -> Result<Sl2Iter> {
    let modulus = Modulus::prime_power(p, n)?;
    if modulus.m > cap {
        return Err(Error::CapExceeded { needed: modulus.m, cap });
    }
    let mut it = Sl2Iter { modulus, a: 0, b: 0, batch: Vec::new(), batch_pos: 0, done: false };
    it.fill_batch();
    Ok(it)
}

/// Iterator over SL_2(Z/p^n Z); see [`enumerate_sl2`].
pub struct Sl2Iter {
    modulus: Modulus,
    a: u64,
    b: u64,
    batch: Vec<(u64, u64)>,
    batch_pos: usize,
    done: bool,
}

impl Sl2Iter {
    /// Fill `batch` with the (c, d) pairs completing the current (a, b),
    /// sorted by (c, d).
    fn fill_batch(&mut self) {
        let m = self.modulus.m;
        let (a, b) = (self.a, self.b);
        self.batch.clear();
        self.batch_pos = 0;
        if m == 1 {
            self.batch.push((0, 0));
            return;
        }
        if self.modulus.is_unit(a) {
            // d = a^{-1} (1 + b c), one matrix per c.
            let ainv = inv_mod(a, m).expect("unit");
            for c in 0..m {
                let d = mul_mod(ainv, (1 + mul_mod(b, c, m)) % m, m);
                self.batch.push((c, d));
            }
        } else if self.modulus.is_unit(b) {
            // a d - 1 is a unit times nothing: c = b^{-1} (a d - 1), one per d.
            let binv = inv_mod(b, m).expect("unit");
            for d in 0..m {
                let c = mul_mod(binv, (mul_mod(a, d, m) + m - 1) % m, m);
                self.batch.push((c, d));
            }
            self.batch.sort_unstable();
        }
        // a and b both non-units would force det = 0 mod p: no completions.
    }
}

impl Iterator for Sl2Iter {
    type Item = ResidueMatrix;

    fn next(&mut self) -> Option<ResidueMatrix> {
        while !self.done {
            if self.batch_pos < self.batch.len() {
                let (c, d) = self.batch[self.batch_pos];
                self.batch_pos += 1;
                return Some(ResidueMatrix {
                    a: self.a,
                    b: self.b,
                    c,
                    d,
                    modulus: self.modulus,
                });
            }
            // Advance to the next (a, b) cell.
            self.b += 1;
            if self.b == self.modulus.m {
                self.b = 0;
                self.a += 1;
                if self.a == self.modulus.m {
                    self.done = true;
                    break;
                }
            }
            self.fill_batch();
        }
        None
    }
}
