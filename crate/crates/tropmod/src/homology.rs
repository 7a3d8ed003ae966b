//! Integral monodromy pairings on skeleton homology: the tridiagonal
//! internal block, the full ladder Gram matrix, Smith normal forms,
//! component groups, and Tamagawa numbers.
//!
//! Two independent routes are kept side by side.  The closed route builds
//! the pairing matrix as a Kronecker product of a small intersection
//! matrix with a tridiagonal block whose entries come from orbit sizes.
//! The graph route lays ladder cycles on the assembled skeleton and pairs
//! them edge by edge.  Tests require the two to agree entry by entry.

use crate::cosets::CurveFamily;
use crate::error::{Error, Result};
use crate::graph::{cycle_basis, gram_matrix, BasisMode, LadderContext, MetricGraph};
use crate::skeleton::{pruned_skeleton, supersingular_types_for, CurveSpec, SupersingularData};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt;
use std::str::FromStr;

/// Integer pairing matrix on a cycle basis.
pub type MonodromyMatrix = Vec<Vec<BigInt>>;

/// A finitely generated abelian group in invariant-factor form:
/// Z^free_rank x Z/d_1 x ... x Z/d_k with d_1 | d_2 | ... | d_k, d_i > 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbelianGroupStructure {
    pub invariants: Vec<BigInt>,
    pub free_rank: usize,
}

impl AbelianGroupStructure {
    pub fn trivial() -> AbelianGroupStructure {
        AbelianGroupStructure { invariants: Vec::new(), free_rank: 0 }
    }

    pub fn is_trivial(&self) -> bool {
        self.invariants.is_empty() && self.free_rank == 0
    }

    /// Order of the torsion part.
    pub fn torsion_order(&self) -> BigInt {
        self.invariants.iter().product()
    }

    /// The same group with all 2-power factors removed.
    pub fn odd_part(&self) -> AbelianGroupStructure {
        let invariants = self
            .invariants
            .iter()
            .map(odd)
            .filter(|d| !d.is_one())
            .collect();
        AbelianGroupStructure { invariants, free_rank: self.free_rank }
    }
}

impl fmt::Display for AbelianGroupStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_trivial() {
            return write!(f, "trivial");
        }
        let mut parts = Vec::new();
        if self.free_rank == 1 {
            parts.push("Z".to_string());
        } else if self.free_rank > 1 {
            parts.push(format!("Z^{}", self.free_rank));
        }
        for d in &self.invariants {
            parts.push(format!("Z/{d}"));
        }
        write!(f, "{}", parts.join(" x "))
    }
}

fn odd(x: &BigInt) -> BigInt {
    let mut v = x.abs();
    let two = BigInt::from(2);
    while !v.is_zero() && (&v % &two).is_zero() {
        v /= &two;
    }
    v
}

/// The degree of the canonical level-lowering correspondence, used as the
/// integral normalization of the pairing: p^(2(n-2)) (p^2 - 1).
pub fn krir_degree(p: u64, n: u32) -> Result<BigInt> {
    if n < 2 {
        return Err(Error::KrirUndefined);
    }
    Ok(BigInt::from(p).pow(2 * (n - 2)) * BigInt::from(p * p - 1))
}

/// The tridiagonal pairing of the 2n-1 ladder rungs inside a single
/// multiplicity-1 tower pair, at the integral normalization.  Writing
/// O = 2 p^(n-2), B = (p-1) p^(n-2), E = (p-1)^2 p^(n-3), the diagonal is
/// [2O+2B, 4O, 4O+2E, 4O, ..., 4O, 2O+2B] and the off-diagonal is 2O.
pub fn internal_matrix(p: u64, n: u32) -> Result<MonodromyMatrix> {
    if n < 2 {
        return Err(Error::KrirUndefined);
    }
    let dim = (2 * n - 1) as usize;
    let o = BigInt::from(2) * BigInt::from(p).pow(n - 2);
    let b = BigInt::from(p - 1) * BigInt::from(p).pow(n - 2);
    let e = if n >= 3 {
        BigInt::from((p - 1) * (p - 1)) * BigInt::from(p).pow(n - 3)
    } else {
        BigInt::zero()
    };
    let mut m = vec![vec![BigInt::zero(); dim]; dim];
    for i in 0..dim {
        m[i][i] = if i == 0 || i == dim - 1 {
            2 * (&o + &b)
        } else if i % 2 == 1 {
            4 * &o
        } else {
            4 * &o + 2 * &e
        };
        if i + 1 < dim {
            m[i][i + 1] = 2 * &o;
            m[i + 1][i] = 2 * &o;
        }
    }
    Ok(m)
}

/// Generalized continuant K_m of the rescaled rung pairing: the leading
/// principal m x m minor of the internal matrix is O^m K_m.  The weight
/// sequence is p+1 at both ends, 4 at even positions, and (p+1)^2 / p at
/// odd interior positions; consecutive terms couple with weight 4.
pub fn continuant(p: u64, n: u32, m: usize) -> Result<BigRational> {
    if n < 2 {
        return Err(Error::KrirUndefined);
    }
    let dim = (2 * n - 1) as usize;
    if m > dim {
        return Err(Error::domain(format!(
            "continuant index {m} exceeds ladder size {dim}"
        )));
    }
    let a = |i: usize| -> BigRational {
        if i == 1 || i == dim {
            BigRational::from_integer(BigInt::from(p + 1))
        } else if i % 2 == 0 {
            BigRational::from_integer(BigInt::from(4))
        } else {
            BigRational::new(BigInt::from((p + 1) * (p + 1)), BigInt::from(p))
        }
    };
    let four = BigRational::from_integer(BigInt::from(4));
    let mut prev = BigRational::zero();
    let mut cur = BigRational::one();
    for i in 1..=m {
        let next = a(i) * &cur - &four * &prev;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// Intersection matrix of the partner towers: all-ones plus the diagonal
/// of tower multiplicities, indexed by every tower except the base.
fn partner_intersection(data: &SupersingularData) -> Result<(usize, MonodromyMatrix)> {
    let j0 = data
        .edges
        .iter()
        .position(|&b| b == 1)
        .ok_or(Error::LadderUnavailable)?;
    let partners: Vec<u32> = data
        .edges
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != j0)
        .map(|(_, &b)| b)
        .collect();
    let dim = partners.len();
    let mut m = vec![vec![BigInt::one(); dim]; dim];
    for (i, &b) in partners.iter().enumerate() {
        m[i][i] = BigInt::from(1 + u64::from(b));
    }
    Ok((j0, m))
}

/// The full ladder pairing at the integral normalization: the Kronecker
/// product of the partner intersection matrix with half the internal
/// block.  Empty when there is a single supersingular edge; requires at
/// least one multiplicity-1 edge to serve as the base tower.
pub fn full_matrix(data: &SupersingularData, p: u64, n: u32) -> Result<MonodromyMatrix> {
    if data.s <= 1 {
        return Ok(Vec::new());
    }
    if data.u == 0 {
        return Err(Error::LadderUnavailable);
    }
    let (_, jd) = partner_intersection(data)?;
    let a = internal_matrix(p, n)?;
    let inner = a.len();
    let outer = jd.len();
    let half: Vec<Vec<BigInt>> =
        a.iter().map(|row| row.iter().map(|x| x / 2).collect()).collect();
    let dim = outer * inner;
    let mut m = vec![vec![BigInt::zero(); dim]; dim];
    for bi in 0..outer {
        for bj in 0..outer {
            for k in 0..inner {
                for l in 0..inner {
                    m[bi * inner + k][bj * inner + l] = &jd[bi][bj] * &half[k][l];
                }
            }
        }
    }
    Ok(m)
}

/// The same pairing read off the assembled skeleton: ladder cycles over
/// each partner tower, paired edge by edge and scaled.  Must agree with
/// [`full_matrix`] entrywise when `scale` is the integral normalization.
pub fn ladder_matrix_from_graph(
    g: &MetricGraph,
    data: &SupersingularData,
    scale: &BigInt,
) -> Result<MonodromyMatrix> {
    if data.s <= 1 {
        return Ok(Vec::new());
    }
    let j0 = data
        .edges
        .iter()
        .position(|&b| b == 1)
        .ok_or(Error::LadderUnavailable)?;
    let central = g.vertices.iter().filter(|v| v.base == "central").count();
    if central == 0 || central % 2 != 0 {
        return Err(Error::domain(format!(
            "expected an even number of central vertices, found {central}"
        )));
    }
    let n = central / 2;
    // Rails in tree order: the cusp class, then the two classes at each
    // depth with the nonresidue branch first, then the zero class.
    let mut order = vec![0usize];
    for k in 1..n {
        order.push(2 * k + 1);
        order.push(2 * k);
    }
    order.push(1);
    let ladder = LadderContext {
        marked_central: order.iter().map(|i| format!("c{i}")).collect(),
        base_edge: format!("ss{j0}"),
        partner_edges: (0..data.edges.len())
            .filter(|&i| i != j0)
            .map(|i| format!("ss{i}"))
            .collect(),
    };
    let basis = cycle_basis(g, &BasisMode::Ladder(ladder))?;
    gram_matrix(g, &basis, scale)
}

/// Exact determinant by fraction-free Gaussian elimination.
pub fn determinant(m: &MonodromyMatrix) -> Result<BigInt> {
    let n = m.len();
    if m.iter().any(|row| row.len() != n) {
        return Err(Error::domain("determinant requires a square matrix".to_string()));
    }
    if n == 0 {
        return Ok(BigInt::one());
    }
    let mut a = m.to_vec();
    let mut sign = 1i8;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(k, i);
                    sign = -sign;
                }
                None => return Ok(BigInt::zero()),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let t = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = t / &prev;
            }
            a[i][k] = BigInt::zero();
        }
        prev = a[k][k].clone();
    }
    let d = a[n - 1][n - 1].clone();
    Ok(if sign < 0 { -d } else { d })
}

/// Smith normal form of an integer matrix, reported as the cokernel
/// Z^rows / M Z^cols: invariant factors > 1 plus the free rank.
pub fn smith_normal_form(m: &MonodromyMatrix) -> AbelianGroupStructure {
    let rows = m.len();
    let cols = m.iter().map(|r| r.len()).max().unwrap_or(0);
    let mut a = vec![vec![BigInt::zero(); cols]; rows];
    for (i, row) in m.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            a[i][j] = x.clone();
        }
    }
    let bound = rows.min(cols);
    let mut t = 0;
    'outer: while t < bound {
        // Smallest nonzero entry of the trailing block becomes the pivot.
        let mut pivot: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if !a[i][j].is_zero()
                    && pivot.map_or(true, |(pi, pj)| a[i][j].abs() < a[pi][pj].abs())
                {
                    pivot = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = pivot else { break };
        a.swap(t, pi);
        if pj != t {
            for row in a.iter_mut() {
                row.swap(t, pj);
            }
        }
        for i in t + 1..rows {
            if !a[i][t].is_zero() {
                let q = &a[i][t] / &a[t][t];
                for j in t..cols {
                    let v = &a[i][j] - &q * &a[t][j];
                    a[i][j] = v;
                }
                if !a[i][t].is_zero() {
                    continue 'outer;
                }
            }
        }
        for j in t + 1..cols {
            if !a[t][j].is_zero() {
                let q = &a[t][j] / &a[t][t];
                for row in a.iter_mut().skip(t) {
                    let v = &row[j] - &q * &row[t];
                    row[j] = v;
                }
                if !a[t][j].is_zero() {
                    continue 'outer;
                }
            }
        }
        for i in t + 1..rows {
            for j in t + 1..cols {
                if !(&a[i][j] % &a[t][t]).is_zero() {
                    for jj in t..cols {
                        let v = &a[t][jj] + &a[i][jj];
                        a[t][jj] = v;
                    }
                    continue 'outer;
                }
            }
        }
        t += 1;
    }
    let mut diag: Vec<BigInt> = (0..t).map(|i| a[i][i].abs()).collect();
    for i in 0..diag.len() {
        for j in i + 1..diag.len() {
            if !(&diag[j] % &diag[i]).is_zero() {
                let g = diag[i].gcd(&diag[j]);
                let l = &diag[i] * &diag[j] / &g;
                diag[i] = g;
                diag[j] = l;
            }
        }
    }
    AbelianGroupStructure {
        invariants: diag.into_iter().filter(|d| !d.is_one()).collect(),
        free_rank: rows - t,
    }
}

/// Scaling convention for the cycle pairing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Normalization {
    /// The canonical integral scale p^(2(n-2)) (p^2 - 1); levels n >= 2.
    Krir,
    /// Raw edge lengths (scale 1).
    Unit,
    /// A caller-supplied positive scale.
    Explicit(BigInt),
}

impl FromStr for Normalization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Normalization> {
        match s {
            "krir" => Ok(Normalization::Krir),
            "unit" => Ok(Normalization::Unit),
            other => {
                if let Some(v) = other.strip_prefix("m:") {
                    let m: BigInt = v
                        .parse()
                        .map_err(|_| Error::domain(format!("bad scale {v:?}")))?;
                    Ok(Normalization::Explicit(m))
                } else {
                    Err(Error::domain(format!(
                        "unknown normalization {other:?} (expected krir, unit, or m:<int>)"
                    )))
                }
            }
        }
    }
}

impl fmt::Display for Normalization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Normalization::Krir => write!(f, "krir"),
            Normalization::Unit => write!(f, "unit"),
            Normalization::Explicit(m) => write!(f, "m:{m}"),
        }
    }
}

fn resolve_scale(spec: &CurveSpec, normalization: &Normalization) -> Result<BigInt> {
    match normalization {
        Normalization::Krir => {
            if spec.family != CurveFamily::Gamma0 {
                return Err(Error::KrirUndefined);
            }
            krir_degree(spec.p, spec.n)
        }
        Normalization::Unit => Ok(BigInt::one()),
        Normalization::Explicit(m) => Ok(m.clone()),
    }
}

/// Component group of the curve at the chosen normalization: the cokernel
/// of the cycle pairing on the pruned skeleton, computed on a spanning-tree
/// basis.  A non-integral pairing at the chosen scale is an error.
pub fn component_group(
    spec: &CurveSpec,
    normalization: &Normalization,
) -> Result<AbelianGroupStructure> {
    let scale = resolve_scale(spec, normalization)?;
    let g = pruned_skeleton(spec)?;
    let basis = cycle_basis(&g, &BasisMode::SpanningTree)?;
    let gram = gram_matrix(&g, &basis, &scale)?;
    Ok(smith_normal_form(&gram))
}

fn require_theorem_range(spec: &CurveSpec) -> Result<SupersingularData> {
    if spec.family != CurveFamily::Gamma0 || spec.p <= 11 || spec.n < 2 {
        return Err(Error::OutsideTheoremRange);
    }
    let data = supersingular_types_for(spec.family, spec.p, spec.big_m)?;
    if data.u == 0 {
        return Err(Error::OutsideTheoremRange);
    }
    Ok(data)
}

/// Odd part of the component group at the integral normalization, in
/// closed form: the partner intersection matrix and the internal block
/// diagonalize independently over Z_q for odd q, so the invariant factors
/// are the q-exponent-sorted merge of the pairwise products.
pub fn component_group_closed_form(spec: &CurveSpec) -> Result<AbelianGroupStructure> {
    let data = require_theorem_range(spec)?;
    if data.s == 1 {
        return Ok(AbelianGroupStructure::trivial());
    }
    let (_, jd) = partner_intersection(&data)?;
    let rank = jd.len();
    let snf = smith_normal_form(&jd);
    let mut beta: Vec<BigInt> = vec![BigInt::one(); rank - snf.invariants.len()];
    beta.extend(snf.invariants.iter().cloned());
    let p = spec.p;
    let n = spec.n;
    // Odd invariant chain of the internal block: n-2 copies of p^(n-3),
    // n-1 copies of p^(n-2), and two of p^(2(n-2)), the last carrying the
    // odd part of p^2 - 1.
    let mut alpha: Vec<BigInt> = Vec::with_capacity((2 * n - 1) as usize);
    if n >= 3 {
        alpha.extend(vec![BigInt::from(p).pow(n - 3); (n - 2) as usize]);
    }
    alpha.extend(vec![BigInt::from(p).pow(n - 2); (n - 1) as usize]);
    alpha.push(BigInt::from(p).pow(2 * (n - 2)));
    alpha.push(BigInt::from(p).pow(2 * (n - 2)) * odd(&BigInt::from(p * p - 1)));
    let mut products: Vec<BigInt> = Vec::with_capacity(beta.len() * alpha.len());
    for b in &beta {
        for a in &alpha {
            products.push(odd(&(b * a)));
        }
    }
    // Merge prime by prime: sort the q-adic exponents ascending to build
    // the invariant-factor chain.
    let mut primes = std::collections::BTreeSet::new();
    for v in &products {
        let mut rem = v.clone();
        let mut q = BigInt::from(3);
        while &q * &q <= rem {
            if (&rem % &q).is_zero() {
                primes.insert(q.clone());
                while (&rem % &q).is_zero() {
                    rem /= &q;
                }
            }
            q += 2;
        }
        if rem > BigInt::one() {
            primes.insert(rem);
        }
    }
    let mut chain = vec![BigInt::one(); products.len()];
    for q in &primes {
        let mut exps: Vec<u32> = products
            .iter()
            .map(|v| {
                let mut e = 0;
                let mut rem = v.clone();
                while (&rem % q).is_zero() {
                    rem /= q;
                    e += 1;
                }
                e
            })
            .collect();
        exps.sort_unstable();
        for (c, e) in chain.iter_mut().zip(exps) {
            *c *= q.pow(e);
        }
    }
    Ok(AbelianGroupStructure {
        invariants: chain.into_iter().filter(|d| !d.is_one()).collect(),
        free_rank: 0,
    })
}

/// Order of the component group at the integral normalization, in closed
/// form: det(A)^(s-1) det(J+D)^(2n-1) / 2^((s-1)(2n-1)) with A the
/// internal block and J+D the partner intersection matrix.
pub fn tamagawa(spec: &CurveSpec) -> Result<BigInt> {
    let data = require_theorem_range(spec)?;
    if data.s == 1 {
        return Ok(BigInt::one());
    }
    let p = spec.p;
    let n = spec.n;
    let c = BigInt::from(2).pow(4 * n - 3)
        * (BigInt::from(p).pow(n) - BigInt::from(p).pow(n - 2))
        * BigInt::from(p).pow((n - 2) * (2 * n - 1));
    let (_, jd) = partner_intersection(&data)?;
    let dj = determinant(&jd)?;
    let num = c.pow(data.s as u32 - 1) * dj.pow(2 * n - 1);
    let den = BigInt::from(2).pow((data.s as u32 - 1) * (2 * n - 1));
    let (q, r) = num.div_rem(&den);
    if !r.is_zero() {
        return Err(Error::Inconsistency(
            "component group order is not integral".to_string(),
        ));
    }
    Ok(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::skeleton::supersingular_types;

    fn gamma0(p: u64, n: u32, big_m: u64) -> CurveSpec {
        CurveSpec::new(CurveFamily::Gamma0, p, n, big_m).unwrap()
    }

    fn big(rows: &[&[i64]]) -> MonodromyMatrix {
        rows.iter()
            .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
            .collect()
    }

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn internal_matrix_level_two() {
        let m = internal_matrix(37, 2).unwrap();
        assert_eq!(m, big(&[&[76, 4, 0], &[4, 8, 4], &[0, 4, 76]]));
        assert!(internal_matrix(37, 1).is_err());
    }

    #[test]
    fn internal_matrix_level_three() {
        let m = internal_matrix(13, 3).unwrap();
        assert_eq!(
            m,
            big(&[
                &[364, 52, 0, 0, 0],
                &[52, 104, 52, 0, 0],
                &[0, 52, 392, 52, 0],
                &[0, 0, 52, 104, 52],
                &[0, 0, 0, 52, 364],
            ])
        );
    }

    #[test]
    fn continuants_and_minors() {
        assert_eq!(
            continuant(13, 2, 1).unwrap(),
            BigRational::from_integer(BigInt::from(14))
        );
        assert_eq!(
            continuant(13, 2, 2).unwrap(),
            BigRational::from_integer(BigInt::from(52))
        );
        assert_eq!(
            continuant(13, 2, 3).unwrap(),
            BigRational::from_integer(BigInt::from(672))
        );
        for (p, n) in [(13, 2), (17, 2), (13, 3), (29, 3), (37, 4)] {
            let a = internal_matrix(p, n).unwrap();
            let o = BigRational::from_integer(BigInt::from(2) * BigInt::from(p).pow(n - 2));
            for m in 1..=a.len() {
                let minor: MonodromyMatrix =
                    a[..m].iter().map(|row| row[..m].to_vec()).collect();
                let det = BigRational::from_integer(determinant(&minor).unwrap());
                let pow = num_traits::pow::pow(o.clone(), m);
                assert_eq!(det, pow * continuant(p, n, m).unwrap(), "p={p} n={n} m={m}");
            }
        }
    }

    #[test]
    fn internal_determinant_closed_form() {
        for (p, n) in [(13u64, 2u32), (13, 3), (37, 2), (37, 3)] {
            let det = determinant(&internal_matrix(p, n).unwrap()).unwrap();
            let want = BigInt::from(2).pow(4 * n - 3)
                * (BigInt::from(p).pow(n) - BigInt::from(p).pow(n - 2))
                * BigInt::from(p).pow((n - 2) * (2 * n - 1));
            assert_eq!(det, want, "p={p} n={n}");
        }
        assert_eq!(
            determinant(&internal_matrix(13, 2).unwrap()).unwrap(),
            BigInt::from(5376)
        );
    }

    #[test]
    fn smith_examples() {
        let g = smith_normal_form(&big(&[&[2, 0], &[0, 3]]));
        assert_eq!(g.invariants, ints(&[6]));
        assert_eq!(g.free_rank, 0);
        let g = smith_normal_form(&big(&[&[4, 2], &[2, 4]]));
        assert_eq!(g.invariants, ints(&[2, 6]));
        let g = smith_normal_form(&big(&[&[2, 0], &[0, 0]]));
        assert_eq!(g.invariants, ints(&[2]));
        assert_eq!(g.free_rank, 1);
        let g = smith_normal_form(&Vec::new());
        assert!(g.is_trivial());
        assert_eq!(format!("{}", smith_normal_form(&big(&[&[0]]))), "Z");
    }

    #[test]
    fn determinant_examples() {
        assert_eq!(determinant(&big(&[&[0, 1], &[1, 0]])).unwrap(), BigInt::from(-1));
        assert_eq!(determinant(&big(&[&[2, 1], &[4, 2]])).unwrap(), BigInt::zero());
        assert_eq!(determinant(&Vec::new()).unwrap(), BigInt::one());
    }

    #[test]
    fn full_matrix_structure() {
        let data = supersingular_types(37, 1).unwrap();
        let m = full_matrix(&data, 37, 2).unwrap();
        assert_eq!(m.len(), 6);
        // Diagonal family block doubles the internal half, cross block
        // repeats it once.
        assert_eq!(m[0][0], BigInt::from(76));
        assert_eq!(m[0][3], BigInt::from(38));
        assert_eq!(m[1][4], BigInt::from(4));
        assert_eq!(m[0][1], BigInt::from(4));
        assert_eq!(m[0][4], BigInt::from(2));
        assert_eq!(m[2][5], BigInt::from(38));
        let single = supersingular_types(13, 1).unwrap();
        assert!(full_matrix(&single, 13, 2).unwrap().is_empty());
        let no_base = supersingular_types(11, 1).unwrap();
        assert!(matches!(
            full_matrix(&no_base, 11, 2),
            Err(Error::LadderUnavailable)
        ));
    }

    #[test]
    fn full_matrix_determinant_spot() {
        let data = supersingular_types(37, 1).unwrap();
        let det = determinant(&full_matrix(&data, 37, 2).unwrap()).unwrap();
        assert_eq!(det.abs(), BigInt::from(808_455_168u64));
        assert_eq!(det.abs(), tamagawa(&gamma0(37, 2, 1)).unwrap());
    }

    #[test]
    fn ladder_from_graph_matches_closed_matrix() {
        for (p, n) in [(13u64, 2u32), (29, 2), (37, 2), (13, 3)] {
            let spec = gamma0(p, n, 1);
            let data = supersingular_types(p, 1).unwrap();
            let g = pruned_skeleton(&spec).unwrap();
            let scale = krir_degree(p, n).unwrap();
            let from_graph = ladder_matrix_from_graph(&g, &data, &scale).unwrap();
            let closed = full_matrix(&data, p, n).unwrap();
            assert_eq!(from_graph, closed, "p={p} n={n}");
        }
    }

    #[test]
    fn component_groups() {
        let g = component_group(&gamma0(11, 1, 1), &Normalization::Unit).unwrap();
        assert_eq!(g.invariants, ints(&[5]));
        let g = component_group(&gamma0(13, 2, 1), &Normalization::Krir).unwrap();
        assert!(g.is_trivial());
        let g = component_group(&gamma0(37, 2, 1), &Normalization::Krir).unwrap();
        assert_eq!(g.odd_part().invariants, ints(&[3, 3, 171, 513]));
        assert_eq!(g.free_rank, 0);
    }

    #[test]
    fn unit_scale_insufficient_at_higher_level() {
        let err = component_group(&gamma0(37, 2, 1), &Normalization::Unit);
        assert!(matches!(err, Err(Error::NormalizationInsufficient(..))));
    }

    #[test]
    fn krir_outside_its_domain() {
        assert!(matches!(krir_degree(13, 1), Err(Error::KrirUndefined)));
        let sp = CurveSpec::new(CurveFamily::Sp, 13, 2, 1).unwrap();
        assert!(matches!(
            component_group(&sp, &Normalization::Krir),
            Err(Error::KrirUndefined)
        ));
    }

    #[test]
    fn closed_form_component_groups() {
        let g = component_group_closed_form(&gamma0(37, 2, 1)).unwrap();
        assert_eq!(g.invariants, ints(&[3, 3, 171, 513]));
        let g = component_group_closed_form(&gamma0(29, 2, 1)).unwrap();
        assert_eq!(g.invariants, ints(&[7, 7, 105, 735]));
        let g = component_group_closed_form(&gamma0(13, 2, 1)).unwrap();
        assert!(g.is_trivial());
        // Deeper levels than the acceptance grid, against the direct SNF.
        for (p, n) in [(13u64, 4u32), (17, 4), (29, 4), (13, 5)] {
            let data = supersingular_types(p, 1).unwrap();
            let direct = smith_normal_form(&full_matrix(&data, p, n).unwrap()).odd_part();
            let closed = component_group_closed_form(&gamma0(p, n, 1)).unwrap();
            assert_eq!(direct, closed, "p={p} n={n}");
        }
        assert!(matches!(
            component_group_closed_form(&gamma0(11, 2, 1)),
            Err(Error::OutsideTheoremRange)
        ));
        assert!(matches!(
            component_group_closed_form(&gamma0(13, 1, 1)),
            Err(Error::OutsideTheoremRange)
        ));
    }

    #[test]
    fn tamagawa_values() {
        assert_eq!(tamagawa(&gamma0(37, 2, 1)).unwrap(), BigInt::from(808_455_168u64));
        assert_eq!(tamagawa(&gamma0(13, 2, 1)).unwrap(), BigInt::one());
        assert!(matches!(tamagawa(&gamma0(11, 2, 1)), Err(Error::OutsideTheoremRange)));
        // The order of the closed-form odd part divides the full order.
        for p in [13u64, 17, 29, 37] {
            let total = tamagawa(&gamma0(p, 2, 1)).unwrap();
            let odd_order = component_group_closed_form(&gamma0(p, 2, 1))
                .unwrap()
                .torsion_order();
            assert!((&total % &odd_order).is_zero(), "p={p}");
            assert_eq!(odd(&total), odd_order, "p={p}");
        }
    }

    #[test]
    fn normalization_parsing() {
        assert_eq!("krir".parse::<Normalization>().unwrap(), Normalization::Krir);
        assert_eq!("unit".parse::<Normalization>().unwrap(), Normalization::Unit);
        assert_eq!(
            "m:12".parse::<Normalization>().unwrap(),
            Normalization::Explicit(BigInt::from(12))
        );
        assert!("m:x".parse::<Normalization>().is_err());
        assert!("half".parse::<Normalization>().is_err());
    }

    #[test]
    fn group_display() {
        let g = AbelianGroupStructure { invariants: ints(&[2, 6]), free_rank: 1 };
        assert_eq!(format!("{g}"), "Z x Z/2 x Z/6");
        assert_eq!(format!("{}", AbelianGroupStructure::trivial()), "trivial");
    }
}

