//! Supersingular counts and types, the labeled supersingular tree, pruned
//! covering skeleta, toric ranks, and the quotient good-reduction test.
//!
//! The skeleton of the curve attached to one of the five subgroup families
//! at level p^n M is a covering tower: the base tree has one segment per
//! supersingular edge, carrying monodromy groups Gamma_0, the Hecke-Iwahori
//! chain I_{n-1}, ..., I_1, and the full SL_2 at the far end.  Fibers are
//! the orbit partitions of those groups on the family's coset scheme, so
//! the whole graph is assembled from the closed-form orbit tables; a
//! brute-force route through explicit point enumeration is kept alongside
//! as an oracle.

use crate::cosets::{
    self, enumerate_coset_points, iwahori_class_rep, iwahori_double_cosets, level_m_points,
    subgroup_generators, CosetPoint, CurveFamily, SubgroupKind,
};
use crate::error::{Error, Result};
use crate::graph::{
    self, build_tower, prune, LabeledEdge, LabeledTree, LevelClasses, MetricGraph, Region,
    RegionLabel, TowerEdge, TowerRegion,
};
use crate::rings::{self, mul_mod, pow_mod, Modulus};
use num_bigint::BigInt;
use num_rational::BigRational;
use serde_json::json;
use std::fmt;

/// A curve in one of the five families, at level p^n M.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CurveSpec {
    pub family: CurveFamily,
    pub p: u64,
    pub n: u32,
    pub big_m: u64,
}

impl CurveSpec {
    pub fn new(family: CurveFamily, p: u64, n: u32, big_m: u64) -> Result<CurveSpec> {
        if n == 0 {
            return Err(Error::domain("level exponent n must be >= 1".to_string()));
        }
        Modulus::new(p, n, big_m)?;
        Ok(CurveSpec { family, p, n, big_m })
    }
}

impl fmt::Display for CurveSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(p={}, n={}, M={})", self.family, self.p, self.n, self.big_m)
    }
}

/// Supersingular edge data at level M: total count, counts by type, and
/// the per-edge multiplicity tags b (1 generic, 2 over j=1728, 3 over j=0).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupersingularData {
    pub p: u64,
    pub big_m: u64,
    pub s: u64,
    pub u: u64,
    pub r_1728: u64,
    pub r_0: u64,
    pub edges: Vec<u32>,
}

/// Number of supersingular j-invariants in characteristic p:
/// floor(p/12) plus 0, 1, 1, 2 according to p = 1, 5, 7, 11 mod 12.
pub fn supersingular_count(p: u64) -> Result<u64> {
    Modulus::new(p, 1, 1)?;
    let extra = match p % 12 {
        1 => 0,
        5 | 7 => 1,
        11 => 2,
        _ => unreachable!("p is a prime >= 5"),
    };
    Ok(p / 12 + extra)
}

/// Independent count of supersingular j-invariants: sweep the Legendre
/// parameter over F_{p^2}, collect roots of the Hasse polynomial (whose
/// coefficients are the squared central binomials), and count the distinct
/// j-images 2^8 (l^2-l+1)^3 / (l^2 (l-1)^2).
pub fn supersingular_count_oracle(p: u64, cap: u64) -> Result<u64> {
    Modulus::new(p, 1, 1)?;
    if p.saturating_mul(p) > cap {
        return Err(Error::CapExceeded { needed: p.saturating_mul(p), cap });
    }
    let fp2 = Fp2::new(p);
    // Coefficients binom((p-1)/2, k)^2 mod p via the ratio recurrence.
    let m = (p - 1) / 2;
    let mut coeffs = Vec::with_capacity(m as usize + 1);
    let mut c = 1u64;
    coeffs.push(1u64);
    for k in 0..m {
        let num = (m - k) % p;
        let den = rings::inv_mod((k + 1) % p, p).expect("k+1 < p is a unit");
        c = mul_mod(mul_mod(c, num, p), den, p);
        coeffs.push(mul_mod(c, c, p));
    }
    let mut js = std::collections::BTreeSet::new();
    for a in 0..p {
        for b in 0..p {
            let lambda = (a, b);
            // 0 and 1 are never roots (the constant term is 1 and the
            // value at 1 is a central binomial, both prime to p).
            if b == 0 && (a == 0 || a == 1) {
                continue;
            }
            let mut acc = (0u64, 0u64);
            for &ck in coeffs.iter().rev() {
                acc = fp2.add(fp2.mul(acc, lambda), (ck, 0));
            }
            if acc == (0, 0) {
                js.insert(fp2.j_invariant(lambda));
            }
        }
    }
    Ok(js.len() as u64)
}

/// Arithmetic in F_{p^2} = F_p[t] / (t^2 - ns) with ns a fixed nonresidue.
struct Fp2 {
    p: u64,
    ns: u64,
}

impl Fp2 {
    fn new(p: u64) -> Fp2 {
        Fp2 { p, ns: rings::least_nonresidue(p) }
    }

    fn add(&self, x: (u64, u64), y: (u64, u64)) -> (u64, u64) {
        ((x.0 + y.0) % self.p, (x.1 + y.1) % self.p)
    }

    fn sub(&self, x: (u64, u64), y: (u64, u64)) -> (u64, u64) {
        ((x.0 + self.p - y.0) % self.p, (x.1 + self.p - y.1) % self.p)
    }

    fn mul(&self, x: (u64, u64), y: (u64, u64)) -> (u64, u64) {
        let p = self.p;
        let re = (mul_mod(x.0, y.0, p) + mul_mod(self.ns, mul_mod(x.1, y.1, p), p)) % p;
        let im = (mul_mod(x.0, y.1, p) + mul_mod(x.1, y.0, p)) % p;
        (re, im)
    }

    fn inv(&self, x: (u64, u64)) -> (u64, u64) {
        // (a + bt)^-1 = (a - bt) / (a^2 - ns b^2); the norm is nonzero.
        let p = self.p;
        let norm =
            (mul_mod(x.0, x.0, p) + p * p - mul_mod(self.ns, mul_mod(x.1, x.1, p), p)) % p;
        let ni = rings::inv_mod(norm, p).expect("norm of a nonzero element");
        (mul_mod(x.0, ni, p), mul_mod((p - x.1) % p, ni, p))
    }

    fn j_invariant(&self, l: (u64, u64)) -> (u64, u64) {
        let one = (1, 0);
        let num = self.add(self.sub(self.mul(l, l), l), one);
        let num3 = self.mul(self.mul(num, num), num);
        let lm1 = self.sub(l, one);
        let den = self.mul(self.mul(l, l), self.mul(lm1, lm1));
        self.mul((256 % self.p, 0), self.mul(num3, self.inv(den)))
    }
}

fn legendre(a: i64, q: u64) -> i64 {
    let aq = a.rem_euclid(q as i64) as u64;
    let t = pow_mod(aq, (q - 1) / 2, q);
    if t == 1 {
        1
    } else if t == q - 1 {
        -1
    } else {
        0
    }
}

/// Number of order-2 elliptic points of the degree-M covering of the
/// j-line (0 when 4 | M, else the product of 1 + (-1/q) over primes q | M).
pub fn elliptic_count_1728(big_m: u64) -> u64 {
    if big_m % 4 == 0 {
        return 0;
    }
    let mut count = 1i64;
    for (q, _) in rings::factorize(big_m) {
        if q > 2 {
            count *= 1 + legendre(-1, q);
        }
    }
    count as u64
}

/// Number of order-3 elliptic points (0 when 9 | M, else the product of
/// 1 + (-3/q); the factor at q = 2 is 0).
pub fn elliptic_count_0(big_m: u64) -> u64 {
    if big_m % 9 == 0 {
        return 0;
    }
    let mut count = 1i64;
    for (q, _) in rings::factorize(big_m) {
        count *= if q == 2 { 0 } else { 1 + legendre(-3, q) };
    }
    count as u64
}

/// Supersingular edge types for the Gamma_0 family (fibers over the
/// projective line at level M).
pub fn supersingular_types(p: u64, big_m: u64) -> Result<SupersingularData> {
    supersingular_types_for(CurveFamily::Gamma0, p, big_m)
}

/// Supersingular edge types for any family: each base supersingular point
/// contributes the orbits of its automorphism generator on the family's
/// level-M point set.  An orbit fixed over 1728 (resp. 0) keeps the base
/// multiplicity 2 (resp. 3); all other orbits are generic.
pub fn supersingular_types_for(
    family: CurveFamily,
    p: u64,
    big_m: u64,
) -> Result<SupersingularData> {
    let s1 = supersingular_count(p)?;
    Modulus::new(p, 1, big_m)?;
    let r_1728_base = u64::from(p % 4 == 3);
    let r_0_base = u64::from(p % 3 == 2);
    let u_base = s1 - r_1728_base - r_0_base;
    let mut edges: Vec<u32> = Vec::new();
    if big_m == 1 {
        edges.extend(std::iter::repeat(1).take(u_base as usize));
        edges.extend(std::iter::repeat(2).take(r_1728_base as usize));
        edges.extend(std::iter::repeat(3).take(r_0_base as usize));
    } else {
        let points = level_m_points(family, p, big_m)?;
        let md = Modulus::new(p, 0, big_m)?;
        // Generic supersingular points split completely.
        for _ in 0..u_base {
            edges.extend(std::iter::repeat(1).take(points.len()));
        }
        if r_1728_base == 1 {
            let sigma = rings::ResidueMatrix::new(0, 1, -1, 0, md)?;
            let mut fixed = 0u64;
            for orbit in cosets::orbits(&[sigma], &points)? {
                if orbit.len() == 1 {
                    edges.push(2);
                    fixed += 1;
                } else {
                    edges.extend(std::iter::repeat(1).take(orbit.len() / 2));
                }
            }
            if family == CurveFamily::Gamma0 && fixed != elliptic_count_1728(big_m) {
                return Err(Error::Inconsistency(format!(
                    "orbit count over 1728 at level M = {big_m} gives {fixed} fixed \
                     classes but the elliptic-point formula gives {}",
                    elliptic_count_1728(big_m)
                )));
            }
        }
        if r_0_base == 1 {
            let sigma = rings::ResidueMatrix::new(0, -1, 1, 1, md)?;
            let mut fixed = 0u64;
            for orbit in cosets::orbits(&[sigma], &points)? {
                if orbit.len() == 1 {
                    edges.push(3);
                    fixed += 1;
                } else {
                    edges.extend(std::iter::repeat(1).take(orbit.len() / 3));
                }
            }
            if family == CurveFamily::Gamma0 && fixed != elliptic_count_0(big_m) {
                return Err(Error::Inconsistency(format!(
                    "orbit count over 0 at level M = {big_m} gives {fixed} fixed \
                     classes but the elliptic-point formula gives {}",
                    elliptic_count_0(big_m)
                )));
            }
        }
    }
    let u = edges.iter().filter(|&&b| b == 1).count() as u64;
    let r_1728 = edges.iter().filter(|&&b| b == 2).count() as u64;
    let r_0 = edges.iter().filter(|&&b| b == 3).count() as u64;
    Ok(SupersingularData { p, big_m, s: edges.len() as u64, u, r_1728, r_0, edges })
}

/// The family whose scheme actually carries the level-p^n action once the
/// sign -1 coming from the level-M factor is accounted for.
pub fn effective_family(family: CurveFamily, big_m: u64) -> CurveFamily {
    if family == CurveFamily::Gamma1
        && cosets::epsilon_p_part(SubgroupKind::Gamma1, big_m) == SubgroupKind::Gamma1pm
    {
        CurveFamily::Gamma1pm
    } else {
        family
    }
}

fn rational(num: u64, den: u64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Length of the innermost (Borel-labeled) region of a type-b segment.
fn central_length(p: u64, n: u32, b: u32) -> BigRational {
    // b p^(2-n) / (p+1)
    rational(u64::from(b) * p * p, (p + 1) * p.pow(n))
}

/// Length of the I_k-labeled region of a type-b segment.
fn iwahori_length(p: u64, k: u32, b: u32) -> BigRational {
    // b p^(1-k) (p-1) / (p+1)
    rational(u64::from(b) * p * (p - 1), (p + 1) * p.pow(k))
}

fn region_name(k: u32, n: u32) -> String {
    if k >= n {
        "gamma0".to_string()
    } else if k == 0 {
        "sl2".to_string()
    } else {
        format!("i{k}")
    }
}

/// The labeled supersingular tree for the given edge data: one segment per
/// edge, regions Gamma_0, I_{n-1}, ..., I_1 from the center out, endpoint
/// SL_2, with the breakpoints at distance b p^(1-k)/(p+1) from the center.
pub fn canonical_tree_for(data: &SupersingularData, p: u64, n: u32) -> Result<LabeledTree> {
    let label = |k: u32| -> Result<RegionLabel> {
        Ok(RegionLabel {
            name: region_name(k, n),
            generators: subgroup_generators(SubgroupKind::Iwahori(k).normalize(n), p, n)?,
        })
    };
    let center = label(n)?;
    let mut edges = Vec::new();
    for (j, &b) in data.edges.iter().enumerate() {
        let mut regions =
            vec![Region { label: label(n)?, length: central_length(p, n, b) }];
        for k in (1..n).rev() {
            regions.push(Region { label: label(k)?, length: iwahori_length(p, k, b) });
        }
        edges.push(LabeledEdge { id: format!("ss{j}"), btype: b, regions, endpoint: label(0)? });
    }
    Ok(LabeledTree { center, edges })
}

/// The labeled tree at level (p, n, M) over the projective-line family.
pub fn canonical_tree(p: u64, n: u32, big_m: u64) -> Result<LabeledTree> {
    canonical_tree_for(&supersingular_types(p, big_m)?, p, n)
}

/// Orbit partition of the level-p^n scheme under I_k, from the closed
/// tables.
fn level_classes(family: CurveFamily, p: u64, n: u32, k: u32) -> Result<LevelClasses> {
    let table = iwahori_double_cosets(family, p, n, k)?;
    Ok(LevelClasses {
        reps: table.entries.iter().map(|e| e.rep.coords).collect(),
        sizes: table.entries.iter().map(|e| e.orbit).collect(),
    })
}

/// Indices into `coarse.reps` of each fine representative's class.
fn up_map(
    family: CurveFamily,
    fine: &LevelClasses,
    coarse: &LevelClasses,
    p: u64,
    n: u32,
    coarse_k: u32,
) -> Result<Vec<usize>> {
    let md = Modulus::prime_power(p, n)?;
    let _ = family;
    fine.reps
        .iter()
        .map(|&coords| {
            let rep = iwahori_class_rep(&CosetPoint { coords, modulus: md }, coarse_k)?;
            coarse
                .reps
                .binary_search(&rep)
                .map_err(|_| Error::Inconsistency(format!("class {rep} missing at level {coarse_k}")))
        })
        .collect()
}

/// The pruned skeleton, assembled from closed-form orbit tables (no point
/// enumeration): s covering towers over the supersingular tree glued along
/// the shared central fiber, then pruned.  Lengths are at v(p) = 1.
pub fn pruned_skeleton(spec: &CurveSpec) -> Result<MetricGraph> {
    let data = supersingular_types_for(spec.family, spec.p, spec.big_m)?;
    Ok(prune(&unpruned_skeleton(spec, &data)?))
}

fn unpruned_skeleton(spec: &CurveSpec, data: &SupersingularData) -> Result<MetricGraph> {
    let (p, n) = (spec.p, spec.n);
    let family = effective_family(spec.family, spec.big_m);
    // Partitions from level n (Borel) down to 0 (full group), with the
    // index maps between consecutive levels.
    let levels: Vec<u32> = (0..=n).rev().collect();
    let classes: Vec<LevelClasses> =
        levels.iter().map(|&k| level_classes(family, p, n, k)).collect::<Result<_>>()?;
    let ups: Vec<Vec<usize>> = (0..levels.len() - 1)
        .map(|i| up_map(family, &classes[i], &classes[i + 1], p, n, levels[i + 1]))
        .collect::<Result<_>>()?;
    let towers: Vec<TowerEdge> = data
        .edges
        .iter()
        .enumerate()
        .map(|(j, &b)| {
            let mut regions = vec![TowerRegion {
                name: region_name(n, n),
                classes: classes[0].clone(),
                up: ups[0].clone(),
                length: central_length(p, n, b),
            }];
            for (i, &k) in levels.iter().enumerate().skip(1) {
                if k == 0 {
                    break;
                }
                regions.push(TowerRegion {
                    name: region_name(k, n),
                    classes: classes[i].clone(),
                    up: ups[i].clone(),
                    length: iwahori_length(p, k, b),
                });
            }
            TowerEdge {
                id: format!("ss{j}"),
                regions,
                into_center: (0..classes[0].len()).collect(),
                endpoint: classes[levels.len() - 1].clone(),
            }
        })
        .collect();
    Ok(graph::assemble_tower(&classes[0], &towers))
}

/// Oracle construction of the same skeleton by explicit point enumeration
/// and orbit search through [`build_tower`].
pub fn pruned_skeleton_bruteforce(spec: &CurveSpec, cap: u64) -> Result<MetricGraph> {
    let data = supersingular_types_for(spec.family, spec.p, spec.big_m)?;
    let tree = canonical_tree_for(&data, spec.p, spec.n)?;
    let family = effective_family(spec.family, spec.big_m);
    let points = enumerate_coset_points(family.scheme(), spec.p, spec.n, cap)?;
    Ok(prune(&build_tower(&tree, &points)?))
}

/// Orbit count of the family's group on the projective line over Z/p^n Z,
/// in closed form (equal to the Borel class count of the family's scheme).
pub fn b_p(spec: &CurveSpec) -> u64 {
    let n = spec.n;
    let p = spec.p;
    let nn = u64::from(n);
    match spec.family {
        CurveFamily::Gamma0 => 2 * nn,
        CurveFamily::Gamma1 | CurveFamily::Gamma1pm => {
            if n % 2 == 1 {
                2 * p.pow((n - 1) / 2)
            } else {
                p.pow(n / 2) + p.pow(n / 2 - 1)
            }
        }
        CurveFamily::Sp => 4 * nn,
        CurveFamily::SpPlus => 2 * nn + u64::from(p % 4 == 1),
    }
}

/// Toric rank (s - 1)(b_p - 1): the first Betti number of the pruned
/// skeleton.
pub fn toric_rank(spec: &CurveSpec) -> Result<u64> {
    let data = supersingular_types_for(spec.family, spec.p, spec.big_m)?;
    Ok((data.s - 1) * (b_p(spec) - 1))
}

fn family_contained(inner: CurveFamily, outer: CurveFamily) -> bool {
    use CurveFamily::*;
    inner == outer
        || matches!(
            (inner, outer),
            (Gamma1, Gamma1pm) | (Gamma1, Gamma0) | (Gamma1pm, Gamma0) | (Sp, SpPlus) | (Sp, Gamma0)
        )
}

/// Whether the new part of the covering `inner` -> `outer` has potential
/// good reduction: true exactly when s and b_p agree.  (For s = 1 both
/// toric ranks vanish regardless; the test reports the literal criterion.)
/// The pair must be nested: same p, deeper or equal level, divisible M,
/// and a containment of families.
pub fn quotient_potential_good_reduction(outer: &CurveSpec, inner: &CurveSpec) -> Result<bool> {
    let nested = outer.p == inner.p
        && inner.n >= outer.n
        && inner.big_m % outer.big_m == 0
        && family_contained(inner.family, outer.family);
    if !nested {
        return Err(Error::NotNested(outer.to_string(), inner.to_string()));
    }
    let s_outer = supersingular_types_for(outer.family, outer.p, outer.big_m)?.s;
    let s_inner = supersingular_types_for(inner.family, inner.p, inner.big_m)?.s;
    Ok(s_outer == s_inner && b_p(outer) == b_p(inner))
}

/// Full JSON report for one curve: invariants plus the pruned skeleton.
pub fn report(spec: &CurveSpec) -> Result<serde_json::Value> {
    let data = supersingular_types_for(spec.family, spec.p, spec.big_m)?;
    let graph = pruned_skeleton(spec)?;
    Ok(json!({
        "p": spec.p,
        "n": spec.n,
        "M": spec.big_m,
        "functor": spec.family.as_str(),
        "s": data.s,
        "u": data.u,
        "r0": data.r_0,
        "r1728": data.r_1728,
        "b_p": b_p(spec),
        "toric_rank": toric_rank(spec)?,
        "graph": graph.to_json(),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::betti1;
    use num_traits::One;

    fn spec(family: CurveFamily, p: u64, n: u32, big_m: u64) -> CurveSpec {
        CurveSpec::new(family, p, n, big_m).unwrap()
    }

    #[test]
    fn counts_match_closed_form() {
        for (p, want) in [(5, 1), (7, 1), (11, 2), (13, 1), (37, 3), (101, 9)] {
            assert_eq!(supersingular_count(p).unwrap(), want, "p = {p}");
        }
        assert!(supersingular_count(3).is_err());
        assert!(supersingular_count(9).is_err());
    }

    #[test]
    fn oracle_spot_values() {
        assert_eq!(supersingular_count_oracle(37, 1 << 20).unwrap(), 3);
        assert_eq!(supersingular_count_oracle(5, 1 << 20).unwrap(), 1);
        assert_eq!(supersingular_count_oracle(11, 1 << 20).unwrap(), 2);
        assert!(matches!(
            supersingular_count_oracle(5, 10),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn types_at_level_one() {
        let d = supersingular_types(37, 1).unwrap();
        assert_eq!((d.s, d.u, d.r_1728, d.r_0), (3, 3, 0, 0));
        assert_eq!(d.edges, vec![1, 1, 1]);
        let d = supersingular_types(11, 1).unwrap();
        assert_eq!((d.s, d.u, d.r_1728, d.r_0), (2, 0, 1, 1));
        assert_eq!(d.edges, vec![2, 3]);
        let d = supersingular_types(29, 1).unwrap();
        assert_eq!(d.edges, vec![1, 1, 3]);
        let d = supersingular_types(23, 1).unwrap();
        assert_eq!(d.edges, vec![1, 2, 3]);
    }

    #[test]
    fn types_split_over_auxiliary_level() {
        let d = supersingular_types(13, 5).unwrap();
        assert_eq!((d.s, d.u, d.r_1728, d.r_0), (6, 6, 0, 0));
        // p = 11 has one edge over 1728 and one over 0; at M = 5 the
        // former meets 2 elliptic classes, the latter none.
        let d = supersingular_types(11, 5).unwrap();
        assert_eq!(d.r_1728, elliptic_count_1728(5));
        assert_eq!(d.r_0, elliptic_count_0(5));
        assert_eq!((d.r_1728, d.r_0), (2, 0));
        assert_eq!(d.s, d.u + d.r_1728 + d.r_0);
        // M = 2 goes through the order-6 group SL_2(Z/2).
        let d = supersingular_types(11, 2).unwrap();
        assert_eq!((d.r_1728, d.r_0), (1, 0));
        assert_eq!(d.s, d.u + d.r_1728 + d.r_0);
    }

    #[test]
    fn elliptic_counts() {
        assert_eq!(elliptic_count_1728(5), 2);
        assert_eq!(elliptic_count_1728(7), 0);
        assert_eq!(elliptic_count_1728(8), 0);
        assert_eq!(elliptic_count_0(7), 2);
        assert_eq!(elliptic_count_0(5), 0);
        assert_eq!(elliptic_count_0(9), 0);
        assert_eq!(elliptic_count_0(2), 0);
        assert_eq!(elliptic_count_1728(2), 1);
    }

    #[test]
    fn tree_shape_and_lengths() {
        let tree = canonical_tree(5, 1, 1).unwrap();
        assert_eq!(tree.edges.len(), 1);
        assert_eq!(tree.edges[0].regions.len(), 1);
        assert_eq!(tree.edges[0].btype, 3);
        // Total segment length b p / (p+1) = 15/6.
        let total: BigRational = tree.edges[0].regions.iter().map(|r| r.length.clone()).sum();
        assert_eq!(total, BigRational::new(BigInt::from(15), BigInt::from(6)));

        let tree = canonical_tree(5, 2, 1).unwrap();
        assert_eq!(tree.edges[0].regions.len(), 2);
        assert_eq!(
            tree.edges[0].regions[0].length,
            BigRational::new(BigInt::from(3), BigInt::from(6))
        );
        let tree = canonical_tree(37, 3, 1).unwrap();
        assert_eq!(tree.edges.len(), 3);
        for e in &tree.edges {
            assert_eq!(e.regions.len(), 3);
            let total: BigRational = e.regions.iter().map(|r| r.length.clone()).sum();
            assert_eq!(total, BigRational::new(BigInt::from(37), BigInt::from(38)));
        }
    }

    #[test]
    fn small_level_skeleta_collapse() {
        for p in [5, 7, 13] {
            for n in [1, 2] {
                let g = pruned_skeleton(&spec(CurveFamily::Gamma0, p, n, 1)).unwrap();
                assert_eq!(g.vertices.len(), 1, "p = {p}, n = {n}");
                assert!(g.edges.is_empty());
            }
        }
    }

    #[test]
    fn skeleton_of_level_37_squared() {
        let g = pruned_skeleton(&spec(CurveFamily::Gamma0, 37, 2, 1)).unwrap();
        assert_eq!(g.vertices.len(), 13);
        assert_eq!(g.edges.len(), 18);
        assert_eq!(betti1(&g), 6);
        assert!(g.is_connected());
    }

    #[test]
    fn split_torus_skeleton_at_eleven() {
        let g = pruned_skeleton(&spec(CurveFamily::Sp, 11, 1, 1)).unwrap();
        assert_eq!(betti1(&g), 3);
    }

    #[test]
    fn closed_route_matches_bruteforce_route() {
        let cells = [
            spec(CurveFamily::Gamma0, 37, 2, 1),
            spec(CurveFamily::Gamma0, 11, 1, 5),
            spec(CurveFamily::Gamma1, 5, 2, 1),
            spec(CurveFamily::Gamma1, 5, 2, 7),
            spec(CurveFamily::Gamma1pm, 7, 2, 1),
            spec(CurveFamily::Sp, 5, 2, 1),
            spec(CurveFamily::Sp, 11, 1, 7),
            spec(CurveFamily::SpPlus, 5, 3, 1),
            spec(CurveFamily::SpPlus, 7, 2, 1),
            spec(CurveFamily::SpPlus, 13, 1, 2),
        ];
        for cell in &cells {
            let closed = pruned_skeleton(cell).unwrap();
            let brute = pruned_skeleton_bruteforce(cell, 20_000).unwrap();
            assert_eq!(closed, brute, "{cell}");
        }
    }

    #[test]
    fn unpruned_tower_over_level_25() {
        let data = supersingular_types(5, 1).unwrap();
        let g = unpruned_skeleton(&spec(CurveFamily::Gamma0, 5, 2, 1), &data).unwrap();
        // 4 covering edges over the central region, 2 over I_1.
        assert_eq!(g.edges.len(), 6);
        let central: Vec<_> =
            g.edges.iter().filter(|e| g.vertices[e.u].base == "central").collect();
        assert_eq!(central.len(), 4);
    }

    #[test]
    fn x0_eleven_cycle_length() {
        // Both towers contribute a through-path of length b at v(p) = 1,
        // so the single cycle has length 2 + 3 = 5.
        let g = pruned_skeleton(&spec(CurveFamily::Gamma0, 11, 1, 1)).unwrap();
        assert_eq!(betti1(&g), 1);
        assert_eq!(g.total_length(), BigRational::from_integer(BigInt::from(5)));
    }

    #[test]
    fn orbit_counts_on_projective_line() {
        assert_eq!(b_p(&spec(CurveFamily::Gamma0, 5, 1, 1)), 2);
        assert_eq!(b_p(&spec(CurveFamily::Gamma0, 5, 3, 1)), 6);
        assert_eq!(b_p(&spec(CurveFamily::Gamma1, 5, 2, 7)), 6);
        assert_eq!(b_p(&spec(CurveFamily::Gamma1, 5, 3, 1)), 10);
        assert_eq!(b_p(&spec(CurveFamily::Sp, 7, 2, 1)), 8);
        assert_eq!(b_p(&spec(CurveFamily::SpPlus, 5, 2, 1)), 5);
        assert_eq!(b_p(&spec(CurveFamily::SpPlus, 7, 2, 1)), 4);
    }

    #[test]
    fn toric_ranks() {
        assert_eq!(toric_rank(&spec(CurveFamily::Gamma0, 37, 2, 1)).unwrap(), 6);
        assert_eq!(toric_rank(&spec(CurveFamily::Gamma0, 11, 1, 1)).unwrap(), 1);
        for family in CurveFamily::ALL {
            assert_eq!(toric_rank(&spec(family, 13, 2, 1)).unwrap(), 0);
        }
        // Betti number of the skeleton agrees.
        for family in CurveFamily::ALL {
            let cell = spec(family, 11, 2, 1);
            let g = pruned_skeleton(&cell).unwrap();
            assert_eq!(betti1(&g) as u64, toric_rank(&cell).unwrap(), "{cell}");
        }
    }

    #[test]
    fn quotient_criterion() {
        for p in [11, 13, 17, 19, 23, 29, 31, 37] {
            let outer = spec(CurveFamily::Gamma0, p, 1, 1);
            let inner = spec(CurveFamily::Gamma1, p, 1, 1);
            assert!(quotient_potential_good_reduction(&outer, &inner).unwrap(), "p = {p}");
        }
        let outer = spec(CurveFamily::Gamma0, 11, 1, 1);
        let inner = spec(CurveFamily::Gamma0, 11, 2, 1);
        assert!(!quotient_potential_good_reduction(&outer, &inner).unwrap());
        assert!(quotient_potential_good_reduction(&outer, &outer).unwrap());
        // Reversed containment is rejected.
        let err = quotient_potential_good_reduction(&inner, &outer);
        assert!(matches!(err, Err(Error::NotNested(..))));
        let err = quotient_potential_good_reduction(
            &spec(CurveFamily::Sp, 11, 1, 1),
            &spec(CurveFamily::Gamma1, 11, 1, 1),
        );
        assert!(matches!(err, Err(Error::NotNested(..))));
    }

    #[test]
    fn second_difference_of_gamma0_ranks_vanishes() {
        for p in [11, 17, 23, 37] {
            let t = |n| toric_rank(&spec(CurveFamily::Gamma0, p, n, 1)).unwrap() as i64;
            for n in 2..=3 {
                assert_eq!(t(n + 1) - 2 * t(n) + t(n - 1), 0, "p = {p}, n = {n}");
            }
        }
    }

    #[test]
    fn fiber_sizes_sum_to_scheme_size() {
        for k in 0..=3 {
            let classes = level_classes(CurveFamily::Gamma0, 7, 3, k).unwrap();
            let total: u64 = classes.sizes.iter().sum();
            assert_eq!(total, 7u64.pow(3) + 7u64.pow(2));
        }
    }

    #[test]
    fn report_schema() {
        let r = report(&spec(CurveFamily::Gamma0, 11, 1, 1)).unwrap();
        assert_eq!(r["p"], 11);
        assert_eq!(r["s"], 2);
        assert_eq!(r["b_p"], 2);
        assert_eq!(r["toric_rank"], 1);
        assert!(r["graph"]["edges"].as_array().unwrap().len() == 4);
        let _ = BigRational::one();
    }
}
