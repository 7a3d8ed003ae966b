//! Coset schemes of congruence subgroups of SL_2 over Z/p^n Z, the Borel
//! action on their points, and double-coset tables.
//!
//! The five curve families correspond to subgroups Gamma of SL_2(Z/p^n Z):
//!
//! * Gamma_0 (upper triangular)  <->  F_0 = P^1, points [x:y];
//! * Gamma_1 (unipotent)         <->  F_1 = primitive pairs (x, y);
//! * Gamma_1^{+-}                <->  F_1 / {+-1};
//! * Gamma_sp (diagonal torus)   <->  F_sp = ordered pairs of P^1 points
//!                                    with distinct reductions mod p;
//! * Gamma_sp^+ (torus + antidiagonal) <-> F_sp modulo swap.
//!
//! SL_2 acts transitively on each scheme with the named subgroup as a point
//! stabilizer, so Gamma_0-orbits on points are exactly the double cosets
//! Gamma_0 \ SL_2 / Gamma.  Tables of these orbits are computed two ways:
//! in closed form, and by breadth-first orbit search from Borel generators;
//! the two must agree, and the test suite checks that they do.
//!
//! The Hecke-Iwahori groups I_k (lower-left entry divisible by p^k)
//! interpolate between I_0 = SL_2 and I_n = Gamma_0; their orbits on a
//! level-p^n scheme are pullbacks of Borel orbits at level p^k, which is
//! what [`iwahori_double_cosets`] implements.

use crate::error::{Error, Result};
use crate::rings::{
    self, inv_mod, mul_mod, least_nonresidue, primitive_root, Modulus, ResidueMatrix,
};
use num_bigint::BigUint;
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

/// The five coset schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SchemeKind {
    F0,
    F1,
    F1pm,
    Fsp,
    FspPlus,
}

/// Congruence subgroups of SL_2(Z/p^n Z) used as point stabilizers or as
/// the acting side of a double-coset table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SubgroupKind {
    Gamma0,
    Gamma1,
    Gamma1pm,
    GammaSp,
    GammaSpPlus,
    Iwahori(u32),
    FullSl2,
}

impl SubgroupKind {
    /// Collapse Iwahori levels that coincide with named groups:
    /// I_0 = SL_2 and I_k = Gamma_0 once k >= n.
    pub fn normalize(self, n: u32) -> SubgroupKind {
        match self {
            SubgroupKind::Iwahori(0) => SubgroupKind::FullSl2,
            SubgroupKind::Iwahori(k) if k >= n => SubgroupKind::Gamma0,
            other => other,
        }
    }
}

impl fmt::Display for SubgroupKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SubgroupKind::Gamma0 => write!(f, "gamma0"),
            SubgroupKind::Gamma1 => write!(f, "gamma1"),
            SubgroupKind::Gamma1pm => write!(f, "gamma1pm"),
            SubgroupKind::GammaSp => write!(f, "sp"),
            SubgroupKind::GammaSpPlus => write!(f, "sp-plus"),
            SubgroupKind::Iwahori(k) => write!(f, "iwahori-{k}"),
            SubgroupKind::FullSl2 => write!(f, "sl2"),
        }
    }
}

/// One of the five modular-curve families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CurveFamily {
    Gamma0,
    Gamma1,
    Gamma1pm,
    Sp,
    SpPlus,
}

impl CurveFamily {
    pub const ALL: [CurveFamily; 5] = [
        CurveFamily::Gamma0,
        CurveFamily::Gamma1,
        CurveFamily::Gamma1pm,
        CurveFamily::Sp,
        CurveFamily::SpPlus,
    ];

    /// The coset scheme whose points this family's curve components index.
    pub fn scheme(self) -> SchemeKind {
        match self {
            CurveFamily::Gamma0 => SchemeKind::F0,
            CurveFamily::Gamma1 => SchemeKind::F1,
            CurveFamily::Gamma1pm => SchemeKind::F1pm,
            CurveFamily::Sp => SchemeKind::Fsp,
            CurveFamily::SpPlus => SchemeKind::FspPlus,
        }
    }

    /// The stabilizer subgroup of the scheme's base point.
    pub fn subgroup(self) -> SubgroupKind {
        match self {
            CurveFamily::Gamma0 => SubgroupKind::Gamma0,
            CurveFamily::Gamma1 => SubgroupKind::Gamma1,
            CurveFamily::Gamma1pm => SubgroupKind::Gamma1pm,
            CurveFamily::Sp => SubgroupKind::GammaSp,
            CurveFamily::SpPlus => SubgroupKind::GammaSpPlus,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CurveFamily::Gamma0 => "gamma0",
            CurveFamily::Gamma1 => "gamma1",
            CurveFamily::Gamma1pm => "gamma1pm",
            CurveFamily::Sp => "sp",
            CurveFamily::SpPlus => "sp-plus",
        }
    }
}

impl fmt::Display for CurveFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CurveFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<CurveFamily> {
        match s {
            "gamma0" => Ok(CurveFamily::Gamma0),
            "gamma1" => Ok(CurveFamily::Gamma1),
            "gamma1pm" => Ok(CurveFamily::Gamma1pm),
            "sp" => Ok(CurveFamily::Sp),
            "sp-plus" => Ok(CurveFamily::SpPlus),
            other => Err(Error::domain(format!(
                "unknown curve family {other:?}; expected gamma0, gamma1, gamma1pm, sp, or sp-plus"
            ))),
        }
    }
}

/// Coordinates of a coset-scheme point, always in canonical form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Coords {
    /// Projective class [x:y].
    Proj((u64, u64)),
    /// Primitive pair (x, y), no scaling.
    Pair(u64, u64),
    /// Primitive pair modulo global sign.
    PairPm(u64, u64),
    /// Ordered pair of projective classes.
    Split((u64, u64), (u64, u64)),
    /// Unordered pair of projective classes.
    SplitPlus((u64, u64), (u64, u64)),
}

/// A point of one of the coset schemes over Z/mZ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CosetPoint {
    pub coords: Coords,
    pub modulus: Modulus,
}

impl CosetPoint {
    pub fn scheme(&self) -> SchemeKind {
        match self.coords {
            Coords::Proj(..) => SchemeKind::F0,
            Coords::Pair(..) => SchemeKind::F1,
            Coords::PairPm(..) => SchemeKind::F1pm,
            Coords::Split(..) => SchemeKind::Fsp,
            Coords::SplitPlus(..) => SchemeKind::FspPlus,
        }
    }

    /// Projective point [x:y]; errors unless (x, y) generates the unit ideal.
    pub fn proj(x: u64, y: u64, modulus: Modulus) -> Result<CosetPoint> {
        Ok(CosetPoint { coords: Coords::Proj(canonical_proj(x, y, modulus)?), modulus })
    }

    /// Primitive pair (x, y).
    pub fn pair(x: u64, y: u64, modulus: Modulus) -> Result<CosetPoint> {
        check_primitive(x, y, modulus)?;
        Ok(CosetPoint { coords: Coords::Pair(x % modulus.m, y % modulus.m), modulus })
    }

    /// Primitive pair modulo sign, canonicalized to the lexicographically
    /// smaller of (x, y) and (-x, -y).
    pub fn pair_pm(x: u64, y: u64, modulus: Modulus) -> Result<CosetPoint> {
        check_primitive(x, y, modulus)?;
        let (x, y) = pm_min(x % modulus.m, y % modulus.m, modulus.m);
        Ok(CosetPoint { coords: Coords::PairPm(x, y), modulus })
    }

    /// Ordered pair of projective points with distinct reductions at every
    /// prime of the modulus.
    pub fn split(p1: (u64, u64), p2: (u64, u64), modulus: Modulus) -> Result<CosetPoint> {
        let a = canonical_proj(p1.0, p1.1, modulus)?;
        let b = canonical_proj(p2.0, p2.1, modulus)?;
        check_split_distinct(a, b, modulus)?;
        Ok(CosetPoint { coords: Coords::Split(a, b), modulus })
    }

    /// Unordered pair of projective points, canonicalized to the smaller
    /// ordering.
    pub fn split_plus(p1: (u64, u64), p2: (u64, u64), modulus: Modulus) -> Result<CosetPoint> {
        let a = canonical_proj(p1.0, p1.1, modulus)?;
        let b = canonical_proj(p2.0, p2.1, modulus)?;
        check_split_distinct(a, b, modulus)?;
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        Ok(CosetPoint { coords: Coords::SplitPlus(a, b), modulus })
    }
}

impl fmt::Display for Coords {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Coords::Proj((x, y)) => write!(f, "[{x}:{y}]"),
            Coords::Pair(x, y) => write!(f, "({x},{y})"),
            Coords::PairPm(x, y) => write!(f, "±({x},{y})"),
            Coords::Split((x1, y1), (x2, y2)) => write!(f, "([{x1}:{y1}],[{x2}:{y2}])"),
            Coords::SplitPlus((x1, y1), (x2, y2)) => write!(f, "{{[{x1}:{y1}],[{x2}:{y2}]}}"),
        }
    }
}

impl fmt::Display for CosetPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.coords.fmt(f)
    }
}

fn check_primitive(x: u64, y: u64, md: Modulus) -> Result<()> {
    let g = num_integer::gcd(num_integer::gcd(x % md.m, y % md.m), md.m);
    if g != 1 {
        return Err(Error::domain(format!(
            "({x},{y}) is not primitive mod {}: common divisor {g}",
            md.m
        )));
    }
    Ok(())
}

/// Canonical representative of [x:y]: scale to [1 : x^{-1}y] when x is a
/// unit, else to [x y^{-1} : 1] when y is.  A modulus with several prime
/// factors can have points with no unit coordinate; those fall back to the
/// lexicographic minimum over unit rescalings.
pub fn canonical_proj(x: u64, y: u64, md: Modulus) -> Result<(u64, u64)> {
    check_primitive(x, y, md)?;
    let m = md.m;
    let (x, y) = (x % m, y % m);
    if m == 1 {
        return Ok((0, 0));
    }
    if num_integer::gcd(x, m) == 1 {
        let xi = inv_mod(x, m).expect("unit");
        Ok((1, mul_mod(xi, y, m)))
    } else if num_integer::gcd(y, m) == 1 {
        let yi = inv_mod(y, m).expect("unit");
        Ok((mul_mod(x, yi, m), 1))
    } else {
        let mut best = (u64::MAX, u64::MAX);
        for u in 1..m {
            if num_integer::gcd(u, m) == 1 {
                let cand = (mul_mod(u, x, m), mul_mod(u, y, m));
                if cand < best {
                    best = cand;
                }
            }
        }
        Ok(best)
    }
}

fn pm_min(x: u64, y: u64, m: u64) -> (u64, u64) {
    let neg = ((m - x) % m, (m - y) % m);
    std::cmp::min((x, y), neg)
}

/// Reduce a canonical projective point to a divisor modulus, re-canonicalizing.
pub fn proj_reduce(pt: (u64, u64), target: Modulus) -> (u64, u64) {
    canonical_proj(pt.0 % target.m, pt.1 % target.m, target)
        .expect("reduction of a projective point stays primitive")
}

fn check_split_distinct(a: (u64, u64), b: (u64, u64), md: Modulus) -> Result<()> {
    let mut prime_levels: Vec<u64> = Vec::new();
    if md.n >= 1 {
        prime_levels.push(md.p);
    }
    for (q, _) in rings::factorize(md.big_m) {
        prime_levels.push(q);
    }
    for q in prime_levels {
        let t = prime_modulus(md, q)?;
        if proj_reduce(a, t) == proj_reduce(b, t) {
            return Err(Error::domain(format!(
                "projective pair must have distinct reductions mod {q}"
            )));
        }
    }
    Ok(())
}

/// The modulus Z/qZ for a single prime q dividing m.
fn prime_modulus(md: Modulus, q: u64) -> Result<Modulus> {
    if q == md.p {
        Modulus::prime_power(md.p, 1)
    } else {
        Modulus::new(md.p, 0, q)
    }
}

/// Apply a determinant-1 matrix to a point: sigma [x:y] = [ax+by : cx+dy],
/// and componentwise on pairs.  Returns the canonical form of the image.
pub fn act(mat: &ResidueMatrix, pt: &CosetPoint) -> Result<CosetPoint> {
    if mat.modulus != pt.modulus {
        return Err(Error::ModulusMismatch(mat.modulus.m, pt.modulus.m));
    }
    let md = pt.modulus;
    let m = md.m;
    let apply = |x: u64, y: u64| -> (u64, u64) {
        (
            (mul_mod(mat.a, x, m) + mul_mod(mat.b, y, m)) % m,
            (mul_mod(mat.c, x, m) + mul_mod(mat.d, y, m)) % m,
        )
    };
    let coords = match pt.coords {
        Coords::Proj((x, y)) => {
            let (x, y) = apply(x, y);
            Coords::Proj(canonical_proj(x, y, md)?)
        }
        Coords::Pair(x, y) => {
            let (x, y) = apply(x, y);
            Coords::Pair(x, y)
        }
        Coords::PairPm(x, y) => {
            let (x, y) = apply(x, y);
            let (x, y) = pm_min(x, y, m);
            Coords::PairPm(x, y)
        }
        Coords::Split(a, b) => {
            let a = apply(a.0, a.1);
            let b = apply(b.0, b.1);
            Coords::Split(canonical_proj(a.0, a.1, md)?, canonical_proj(b.0, b.1, md)?)
        }
        Coords::SplitPlus(a, b) => {
            let a = apply(a.0, a.1);
            let b = apply(b.0, b.1);
            let a = canonical_proj(a.0, a.1, md)?;
            let b = canonical_proj(b.0, b.1, md)?;
            let (a, b) = if a <= b { (a, b) } else { (b, a) };
            Coords::SplitPlus(a, b)
        }
    };
    Ok(CosetPoint { coords, modulus: md })
}

/// Cardinality of a scheme over Z/p^n Z (n >= 1).
pub fn scheme_cardinality(scheme: SchemeKind, p: u64, n: u32) -> Result<u64> {
    if n == 0 {
        return Err(Error::domain("scheme cardinality needs n >= 1".to_string()));
    }
    let pn = u128::from(Modulus::prime_power(p, n)?.m);
    let p = u128::from(p);
    let count: u128 = match scheme {
        SchemeKind::F0 => pn + pn / p,
        SchemeKind::F1 => pn * pn - (pn / p) * (pn / p),
        SchemeKind::F1pm => (pn * pn - (pn / p) * (pn / p)) / 2,
        SchemeKind::Fsp => (pn / p) * pn * (p + 1),
        SchemeKind::FspPlus => (pn / p) * pn * (p + 1) / 2,
    };
    u64::try_from(count)
        .map_err(|_| Error::domain(format!("scheme cardinality overflows u64 at p^n = {pn}")))
}

/// All canonical points of a scheme over Z/p^n Z, in ascending order.
pub fn enumerate_coset_points(
    scheme: SchemeKind,
    p: u64,
    n: u32,
    cap: u64,
) -> Result<Vec<CosetPoint>> {
    let md = Modulus::prime_power(p, n)?;
    if md.m > cap {
        return Err(Error::CapExceeded { needed: md.m, cap });
    }
    let space = IndexedScheme::new(scheme, md);
    let mut out = Vec::with_capacity(scheme_cardinality(scheme, p, n)? as usize);
    for idx in 0..space.slots() {
        if space.is_valid(idx) {
            out.push(CosetPoint { coords: space.decode(idx), modulus: md });
        }
    }
    out.sort_unstable();
    Ok(out)
}

/// Generating matrices for a subgroup of SL_2(Z/p^n Z).
pub fn subgroup_generators(kind: SubgroupKind, p: u64, n: u32) -> Result<Vec<ResidueMatrix>> {
    if n == 0 {
        return Err(Error::domain("subgroup generators need n >= 1".to_string()));
    }
    let md = Modulus::prime_power(p, n)?;
    let g = primitive_root(p, n) as i64;
    let gi = inv_mod(g as u64, md.m)? as i64;
    let t = ResidueMatrix::new(1, 1, 0, 1, md)?;
    let d = ResidueMatrix::new(g, 0, 0, gi, md)?;
    Ok(match kind.normalize(n) {
        SubgroupKind::Gamma0 => vec![t, d],
        SubgroupKind::Gamma1 => vec![t],
        SubgroupKind::Gamma1pm => vec![t, ResidueMatrix::new(-1, 0, 0, -1, md)?],
        SubgroupKind::GammaSp => vec![d],
        SubgroupKind::GammaSpPlus => vec![d, ResidueMatrix::new(0, -1, 1, 0, md)?],
        SubgroupKind::Iwahori(k) => {
            let pk = md.m / Modulus::prime_power(p, n - k)?.pn();
            vec![t, d, ResidueMatrix::new(1, 0, pk as i64, 1, md)?]
        }
        SubgroupKind::FullSl2 => vec![t, ResidueMatrix::new(1, 0, 1, 1, md)?],
    })
}

/// Order of a subgroup of SL_2(Z/p^n Z) in closed form.
pub fn subgroup_order(kind: SubgroupKind, p: u64, n: u32) -> Result<BigUint> {
    if n == 0 {
        return Err(Error::domain("subgroup order needs n >= 1".to_string()));
    }
    let md = Modulus::prime_power(p, n)?;
    let pn = BigUint::from(md.m);
    let phi = BigUint::from(md.phi_pn());
    Ok(match kind.normalize(n) {
        SubgroupKind::Gamma0 => pn * phi,
        SubgroupKind::Gamma1 => pn,
        SubgroupKind::Gamma1pm => pn * 2u32,
        SubgroupKind::GammaSp => phi,
        SubgroupKind::GammaSpPlus => phi * 2u32,
        // |I_k| = p^(3n-k-1) (p-1) for 1 <= k <= n.
        SubgroupKind::Iwahori(k) => {
            BigUint::from(p).pow(3 * n - k - 1) * BigUint::from(p - 1)
        }
        SubgroupKind::FullSl2 => rings::sl2_order(p, n),
    })
}

/// Full closure of a generating set, by breadth-first multiplication.
pub fn subgroup_closure(generators: &[ResidueMatrix]) -> Result<BTreeSet<ResidueMatrix>> {
    let mut seen: BTreeSet<ResidueMatrix> = BTreeSet::new();
    let Some(first) = generators.first() else {
        return Err(Error::domain("closure of an empty generating set".to_string()));
    };
    let id = ResidueMatrix::identity(first.modulus);
    let mut frontier = vec![id];
    seen.insert(id);
    while let Some(g) = frontier.pop() {
        for h in generators {
            let gh = g.mul(h)?;
            if seen.insert(gh) {
                frontier.push(gh);
            }
        }
    }
    Ok(seen)
}

/// Orbit partition of a point set under the group generated by `generators`.
/// Orbits are sorted internally and listed by ascending least representative.
pub fn orbits(
    generators: &[ResidueMatrix],
    points: &[CosetPoint],
) -> Result<Vec<Vec<CosetPoint>>> {
    let index: HashMap<CosetPoint, usize> =
        points.iter().enumerate().map(|(i, p)| (*p, i)).collect();
    let mats = with_inverses(generators);
    let mut seen = vec![false; points.len()];
    let mut parts = Vec::new();
    for start in 0..points.len() {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut orbit = vec![points[start]];
        let mut frontier = vec![points[start]];
        while let Some(pt) = frontier.pop() {
            for mat in &mats {
                let img = act(mat, &pt)?;
                let &i = index.get(&img).ok_or_else(|| {
                    Error::domain(format!("orbit left the point set at {img}"))
                })?;
                if !seen[i] {
                    seen[i] = true;
                    orbit.push(img);
                    frontier.push(img);
                }
            }
        }
        orbit.sort_unstable();
        parts.push(orbit);
    }
    parts.sort_by_key(|orbit| orbit[0]);
    Ok(parts)
}

fn with_inverses(generators: &[ResidueMatrix]) -> Vec<ResidueMatrix> {
    let mut mats: Vec<ResidueMatrix> = Vec::with_capacity(2 * generators.len());
    for g in generators {
        mats.push(*g);
        let inv = g.inverse();
        if !mats.contains(&inv) {
            mats.push(inv);
        }
    }
    mats
}

/// One row of a double-coset table: an orbit's least point and its size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TableEntry {
    pub rep: CosetPoint,
    pub orbit: u64,
}

/// A table of (acting subgroup)-orbits on a coset scheme, i.e. of double
/// cosets  left \ SL_2 / right.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DoubleCosetTable {
    pub left: SubgroupKind,
    pub right: SubgroupKind,
    pub modulus: Modulus,
    pub entries: Vec<TableEntry>,
}

impl DoubleCosetTable {
    pub fn class_count(&self) -> usize {
        self.entries.len()
    }

    pub fn total_size(&self) -> u64 {
        self.entries.iter().map(|e| e.orbit).sum()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "left": self.left.to_string(),
            "right": self.right.to_string(),
            "entries": self.entries.iter().map(|e| serde_json::json!({
                "rep": e.rep.to_string(),
                "orbit": e.orbit,
            })).collect::<Vec<_>>(),
        })
    }

    fn sorted(mut self) -> Self {
        self.entries.sort_by_key(|e| e.rep);
        self
    }
}

/// Closed-form table of Gamma_0-orbits on the scheme of `family` over
/// Z/p^n Z.  Class counts: 2n for Gamma_0; 2 p^((n-1)/2) (n odd) or
/// p^(n/2) + p^(n/2-1) (n even) for Gamma_1 and Gamma_1^{+-}; 4n for
/// Gamma_sp; 2n + 1 (p = 1 mod 4) or 2n (p = 3 mod 4) for Gamma_sp^+.
pub fn borel_double_cosets(family: CurveFamily, p: u64, n: u32) -> Result<DoubleCosetTable> {
    if n == 0 {
        return Err(Error::domain("double cosets need n >= 1".to_string()));
    }
    let md = Modulus::prime_power(p, n)?;
    let entries = closed_entries(family, md, n)?;
    let table = DoubleCosetTable {
        left: SubgroupKind::Gamma0,
        right: family.subgroup(),
        modulus: md,
        entries,
    };
    Ok(table.sorted())
}

/// The closed-form entries at full level; factored out so the Iwahori
/// tables can reuse them at level k with rescaled orbit sizes.
fn closed_entries(family: CurveFamily, md: Modulus, level: u32) -> Result<Vec<TableEntry>> {
    let p = md.p;
    let pl = Modulus::prime_power(p, level)?;
    let m = pl.m;
    let phi = pl.phi_pn();
    let r = least_nonresidue(p);
    let point = |coords: Coords| CosetPoint { coords, modulus: md };
    let entry = |coords: Coords, orbit: u64| TableEntry { rep: point(coords), orbit };
    let mut out = Vec::new();
    match family {
        CurveFamily::Gamma0 => {
            out.push(entry(Coords::Proj((0, 1)), m));
            out.push(entry(Coords::Proj((1, 0)), 1));
            let mut pi = 1u64;
            for i in 1..level {
                pi *= p;
                // phi(p^(level-i)) / 2 elements in each of the two orbits.
                let size = Modulus::prime_power(p, level - i)?.phi_pn() / 2;
                out.push(entry(Coords::Proj((1, pi)), size));
                out.push(entry(Coords::Proj((1, mul_mod(r, pi, m))), size));
            }
        }
        CurveFamily::Gamma1 | CurveFamily::Gamma1pm => {
            let half = family == CurveFamily::Gamma1pm;
            let scale = |s: u64| if half { s / 2 } else { s };
            let wrap = |x: u64, y: u64| {
                if half {
                    Coords::PairPm(x, y)
                } else {
                    Coords::Pair(x, y)
                }
            };
            out.push(entry(wrap(0, 1), scale(m * phi)));
            out.push(entry(wrap(1, 0), scale(phi)));
            let mut pk = 1u64;
            for k in 1..level {
                pk *= p;
                let k0 = k.min(level - k);
                let pk0 = Modulus::prime_power(p, k0)?.m;
                let size = if k >= level - k {
                    phi
                } else {
                    phi * m / (pk * pk)
                };
                for u in 1..pk0 {
                    if u % p != 0 {
                        out.push(entry(wrap(1, u * pk), scale(size)));
                    }
                }
            }
        }
        CurveFamily::Sp => {
            let zero = (0, 1);
            let inf = (1, 0);
            out.push(entry(Coords::Split(zero, inf), m));
            out.push(entry(Coords::Split(inf, zero), m));
            out.push(entry(Coords::Split(zero, (1, 1)), m * phi / 2));
            out.push(entry(Coords::Split(zero, (1, r)), m * phi / 2));
            let mut pk = 1u64;
            for _ in 1..level {
                pk *= p;
                let size = phi * (m / pk) / 2;
                for d in [1, r] {
                    let blob = (1, mul_mod(d, pk, m));
                    out.push(entry(Coords::Split(zero, blob), size));
                    out.push(entry(Coords::Split(blob, zero), size));
                }
            }
        }
        CurveFamily::SpPlus => {
            let zero = (0, 1);
            let inf = (1, 0);
            out.push(entry(Coords::SplitPlus(zero, inf), m));
            if p % 4 == 1 {
                // -1 is a square: the two generic orbits are swap-stable.
                out.push(entry(Coords::SplitPlus(zero, (1, 1)), m * phi / 4));
                out.push(entry(Coords::SplitPlus(zero, (1, r)), m * phi / 4));
            } else {
                // Swap exchanges the generic square and nonsquare orbits.
                out.push(entry(Coords::SplitPlus(zero, (1, 1)), m * phi / 2));
            }
            let mut pk = 1u64;
            for _ in 1..level {
                pk *= p;
                let size = phi * (m / pk) / 2;
                for d in [1, r] {
                    out.push(entry(Coords::SplitPlus(zero, (1, mul_mod(d, pk, m))), size));
                }
            }
        }
    }
    Ok(out)
}

/// Brute-force table: orbit BFS of Borel generators over the enumerated
/// scheme, with no reference to the closed form.
pub fn borel_double_cosets_bruteforce(
    family: CurveFamily,
    p: u64,
    n: u32,
    cap: u64,
) -> Result<DoubleCosetTable> {
    bruteforce_table(family, p, n, SubgroupKind::Gamma0, cap)
}

/// Brute-force Iwahori-orbit table (oracle for [`iwahori_double_cosets`]).
pub fn iwahori_double_cosets_bruteforce(
    family: CurveFamily,
    p: u64,
    n: u32,
    k: u32,
    cap: u64,
) -> Result<DoubleCosetTable> {
    bruteforce_table(family, p, n, SubgroupKind::Iwahori(k).normalize(n), cap)
}

fn bruteforce_table(
    family: CurveFamily,
    p: u64,
    n: u32,
    left: SubgroupKind,
    cap: u64,
) -> Result<DoubleCosetTable> {
    if n == 0 {
        return Err(Error::domain("double cosets need n >= 1".to_string()));
    }
    let md = Modulus::prime_power(p, n)?;
    if md.m > cap {
        return Err(Error::CapExceeded { needed: md.m, cap });
    }
    let gens = with_inverses(&subgroup_generators(left, p, n)?);
    let space = IndexedScheme::new(family.scheme(), md);
    let slots = space.slots();
    let mut seen = vec![false; slots];
    let mut entries = Vec::new();
    let mut frontier: Vec<usize> = Vec::new();
    for start in 0..slots {
        if seen[start] || !space.is_valid(start) {
            continue;
        }
        seen[start] = true;
        let mut size = 0u64;
        let mut rep = space.decode(start);
        frontier.push(start);
        while let Some(idx) = frontier.pop() {
            size += 1;
            for mat in &gens {
                let img = space.act(mat, idx);
                if !seen[img] {
                    seen[img] = true;
                    let c = space.decode(img);
                    if c < rep {
                        rep = c;
                    }
                    frontier.push(img);
                }
            }
        }
        entries.push(TableEntry { rep: CosetPoint { coords: rep, modulus: md }, orbit: size });
    }
    let table =
        DoubleCosetTable { left, right: family.subgroup(), modulus: md, entries };
    Ok(table.sorted())
}

/// I_k-orbit table on the level-p^n scheme.  Since I_k-orbits pull back
/// Borel orbits at level p^k, the table is the level-k closed form with
/// representatives lifted literally and orbit sizes multiplied by the
/// fiber count p^(n-k) (for F_0) or p^(2(n-k)) (all other schemes).
pub fn iwahori_double_cosets(
    family: CurveFamily,
    p: u64,
    n: u32,
    k: u32,
) -> Result<DoubleCosetTable> {
    if n == 0 {
        return Err(Error::domain("double cosets need n >= 1".to_string()));
    }
    if k > n {
        return Err(Error::domain(format!("Iwahori level k = {k} exceeds n = {n}")));
    }
    let md = Modulus::prime_power(p, n)?;
    let left = SubgroupKind::Iwahori(k).normalize(n);
    if k == 0 {
        // I_0 = SL_2 acts transitively.
        let rep = match family.scheme() {
            SchemeKind::F0 => Coords::Proj((0, 1)),
            SchemeKind::F1 => Coords::Pair(0, 1),
            SchemeKind::F1pm => Coords::PairPm(0, 1),
            SchemeKind::Fsp => Coords::Split((0, 1), (1, 0)),
            SchemeKind::FspPlus => Coords::SplitPlus((0, 1), (1, 0)),
        };
        return Ok(DoubleCosetTable {
            left,
            right: family.subgroup(),
            modulus: md,
            entries: vec![TableEntry {
                rep: CosetPoint { coords: rep, modulus: md },
                orbit: scheme_cardinality(family.scheme(), p, n)?,
            }],
        });
    }
    if k >= n {
        return borel_double_cosets(family, p, n);
    }
    let fiber = match family.scheme() {
        SchemeKind::F0 => Modulus::prime_power(p, n - k)?.m,
        _ => {
            let q = Modulus::prime_power(p, n - k)?.m;
            q * q
        }
    };
    let mut entries = closed_entries(family, md, k)?;
    for e in &mut entries {
        e.orbit *= fiber;
    }
    let table = DoubleCosetTable { left, right: family.subgroup(), modulus: md, entries };
    Ok(table.sorted())
}

/// The I_k-orbit representative of a single canonical point, computed by
/// direct classification rather than orbit search.  Agrees with the reps
/// of [`iwahori_double_cosets`]: k = 0 classifies under the full group,
/// k >= n under the Borel subgroup.
pub fn iwahori_class_rep(pt: &CosetPoint, k: u32) -> Result<Coords> {
    let md = pt.modulus;
    if md.n == 0 {
        return Err(Error::domain(
            "orbit classification needs a prime-power modulus".to_string(),
        ));
    }
    let k = k.min(md.n);
    if k == 0 {
        return Ok(match pt.coords {
            Coords::Proj(..) => Coords::Proj((0, 1)),
            Coords::Pair(..) => Coords::Pair(0, 1),
            Coords::PairPm(..) => Coords::PairPm(0, 1),
            Coords::Split(..) => Coords::Split((0, 1), (1, 0)),
            Coords::SplitPlus(..) => Coords::SplitPlus((0, 1), (1, 0)),
        });
    }
    let p = md.p;
    let pk = Modulus::prime_power(p, k)?.m;
    let r = least_nonresidue(p);
    let quad = |e: u64| {
        let info = rings::unit_square_class(e, p, 1).expect("unit residue");
        if info.is_square == Some(true) {
            1
        } else {
            r
        }
    };
    // Valuation and unit part of a nonzero residue mod p^k.
    let split_val = |t: u64| {
        let mut v = 0u32;
        let mut e = t;
        while e % p == 0 {
            e /= p;
            v += 1;
        }
        (v, e)
    };
    let proj_class = |x: u64, y: u64| -> (u64, u64) {
        if x != 1 {
            // Canonical form (c, 1): the second coordinate is a unit.
            return (0, 1);
        }
        let t = y % pk;
        if t == 0 {
            return (1, 0);
        }
        let (v, e) = split_val(t);
        if v == 0 {
            (0, 1)
        } else {
            (1, quad(e) * p.pow(v))
        }
    };
    let pair_class = |x: u64, y: u64| -> (u64, u64) {
        let t = y % pk;
        if t == 0 {
            return (1, 0);
        }
        let (v, e) = split_val(t);
        if v == 0 {
            return (0, 1);
        }
        // Orbit invariant u = x * (y / p^v) modulo p^min(v, k-v).
        let pk0 = p.pow(v.min(k - v));
        let u = mul_mod(x % pk0, e % pk0, pk0);
        (1, u * p.pow(v))
    };
    // A projective component at level k, in the affine chart where possible.
    enum Chart {
        Finite(u64),
        Blob(u64),
    }
    let chart = |(x, y): (u64, u64)| -> Chart {
        if x != 1 {
            return Chart::Finite(x % pk);
        }
        let t = y % pk;
        if t % p == 0 {
            Chart::Blob(t)
        } else {
            Chart::Finite(inv_mod(t, pk).expect("unit"))
        }
    };
    // Joint invariant of a finite point s and a blob point t under the
    // Borel action: u = t / (1 - s t), which scales by inverse squares.
    let blob_invariant = |s: u64, t: u64| -> u64 {
        let denom = (1 + pk - mul_mod(s, t, pk)) % pk;
        mul_mod(t, inv_mod(denom, pk).expect("unit"), pk)
    };
    let split_class = |a: (u64, u64), b: (u64, u64)| -> Result<((u64, u64), (u64, u64))> {
        let zero = (0, 1);
        match (chart(a), chart(b)) {
            (Chart::Finite(sa), Chart::Finite(sb)) => {
                let delta = (sb + pk - sa) % pk;
                Ok((zero, (1, quad(delta))))
            }
            (Chart::Finite(sa), Chart::Blob(tb)) => {
                let u = blob_invariant(sa, tb);
                if u == 0 {
                    Ok((zero, (1, 0)))
                } else {
                    let (v, e) = split_val(u);
                    Ok((zero, (1, quad(e) * p.pow(v))))
                }
            }
            (Chart::Blob(ta), Chart::Finite(sb)) => {
                let u = blob_invariant(sb, ta);
                if u == 0 {
                    Ok(((1, 0), zero))
                } else {
                    let (v, e) = split_val(u);
                    Ok(((1, quad(e) * p.pow(v)), zero))
                }
            }
            (Chart::Blob(_), Chart::Blob(_)) => Err(Error::Inconsistency(
                "pair of non-transverse points in a split scheme".to_string(),
            )),
        }
    };
    match pt.coords {
        Coords::Proj((x, y)) => Ok(Coords::Proj(proj_class(x, y))),
        Coords::Pair(x, y) => {
            let (cx, cy) = pair_class(x, y);
            Ok(Coords::Pair(cx, cy))
        }
        Coords::PairPm(x, y) => {
            let (cx, cy) = pair_class(x, y);
            Ok(Coords::PairPm(cx, cy))
        }
        Coords::Split(a, b) => {
            let (ca, cb) = split_class(a, b)?;
            Ok(Coords::Split(ca, cb))
        }
        Coords::SplitPlus(a, b) => {
            let (ca, cb) = split_class(a, b)?;
            let merged = match (ca, cb) {
                // Orientation is forgotten: put the affine class first.
                ((1, t), (0, 1)) => ((0, 1), (1, t)),
                // For p = 3 mod 4 the swap exchanges the square classes.
                ((0, 1), (1, t)) if t == r && p % 4 == 3 => ((0, 1), (1, 1)),
                other => other,
            };
            Ok(Coords::SplitPlus(merged.0, merged.1))
        }
    }
}

/// The p-part of the group that effectively acts at auxiliary level M.
/// Only Gamma_1 at M <= 2 changes: there -1 acts through the level-M
/// factor, enlarging the p-part to Gamma_1^{+-}.
pub fn epsilon_p_part(kind: SubgroupKind, big_m: u64) -> SubgroupKind {
    match kind {
        SubgroupKind::Gamma1 if big_m <= 2 => SubgroupKind::Gamma1pm,
        other => other,
    }
}

/// Points of the auxiliary level-M space F_Gamma(Z/MZ) / {+-1} on which the
/// level-M part of the group acts; the modulus records p with n = 0.
pub fn level_m_points(family: CurveFamily, p: u64, big_m: u64) -> Result<Vec<CosetPoint>> {
    let md = Modulus::new(p, 0, big_m)?;
    let m = md.m;
    let mut set: BTreeSet<CosetPoint> = BTreeSet::new();
    match family {
        CurveFamily::Gamma0 => {
            for x in 0..m.max(1) {
                for y in 0..m.max(1) {
                    if num_integer::gcd(num_integer::gcd(x, y), m) == 1 || m == 1 {
                        set.insert(CosetPoint::proj(x, y, md)?);
                    }
                }
            }
        }
        CurveFamily::Gamma1 | CurveFamily::Gamma1pm => {
            for x in 0..m.max(1) {
                for y in 0..m.max(1) {
                    if num_integer::gcd(num_integer::gcd(x, y), m) == 1 || m == 1 {
                        set.insert(CosetPoint::pair_pm(x, y, md)?);
                    }
                }
            }
        }
        CurveFamily::Sp | CurveFamily::SpPlus => {
            let mut projs: BTreeSet<(u64, u64)> = BTreeSet::new();
            for x in 0..m.max(1) {
                for y in 0..m.max(1) {
                    if num_integer::gcd(num_integer::gcd(x, y), m) == 1 || m == 1 {
                        projs.insert(canonical_proj(x, y, md)?);
                    }
                }
            }
            for &a in &projs {
                for &b in &projs {
                    let pt = if family == CurveFamily::Sp {
                        CosetPoint::split(a, b, md)
                    } else {
                        CosetPoint::split_plus(a, b, md)
                    };
                    if let Ok(pt) = pt {
                        set.insert(pt);
                    }
                }
            }
        }
    }
    Ok(set.into_iter().collect())
}

/// Compact integer indexing of scheme points over Z/p^n Z, so orbit search
/// can use flat bitmaps instead of hash maps.  Projective points take
/// index y for [1:y] and m + x/p for [x:1] (x a multiple of p); pairs and
/// split pairs combine componentwise indices positionally.
struct IndexedScheme {
    scheme: SchemeKind,
    md: Modulus,
    proj_count: u64,
}

impl IndexedScheme {
    fn new(scheme: SchemeKind, md: Modulus) -> IndexedScheme {
        IndexedScheme { scheme, md, proj_count: md.m + md.m / md.p }
    }

    /// Size of the index space (some slots may be invalid).
    fn slots(&self) -> usize {
        let m = self.md.m;
        (match self.scheme {
            SchemeKind::F0 => self.proj_count,
            SchemeKind::F1 | SchemeKind::F1pm => m * m,
            SchemeKind::Fsp | SchemeKind::FspPlus => self.proj_count * self.proj_count,
        }) as usize
    }

    fn encode_proj(&self, (x, y): (u64, u64)) -> u64 {
        if x == 1 {
            y
        } else {
            debug_assert_eq!(y, 1);
            self.md.m + x / self.md.p
        }
    }

    fn decode_proj(&self, idx: u64) -> (u64, u64) {
        if idx < self.md.m {
            (1, idx)
        } else {
            ((idx - self.md.m) * self.md.p, 1)
        }
    }

    /// Reduction of a canonical projective point to P^1(F_p), already
    /// canonical: [1:y] -> [1:y mod p], [x:1] -> [0:1].
    fn proj_mod_p(&self, (x, y): (u64, u64)) -> (u64, u64) {
        if x == 1 {
            (1, y % self.md.p)
        } else {
            (0, 1)
        }
    }

    fn act_proj(&self, mat: &ResidueMatrix, (x, y): (u64, u64)) -> (u64, u64) {
        let m = self.md.m;
        let nx = (mul_mod(mat.a, x, m) + mul_mod(mat.b, y, m)) % m;
        let ny = (mul_mod(mat.c, x, m) + mul_mod(mat.d, y, m)) % m;
        if num_integer::gcd(nx, m) == 1 {
            (1, mul_mod(inv_mod(nx, m).expect("unit"), ny, m))
        } else {
            (mul_mod(nx, inv_mod(ny, m).expect("unit"), m), 1)
        }
    }

    fn is_valid(&self, idx: usize) -> bool {
        let idx = idx as u64;
        let m = self.md.m;
        let p = self.md.p;
        match self.scheme {
            SchemeKind::F0 => true,
            SchemeKind::F1 => {
                let (x, y) = (idx / m, idx % m);
                x % p != 0 || y % p != 0
            }
            SchemeKind::F1pm => {
                let (x, y) = (idx / m, idx % m);
                (x % p != 0 || y % p != 0) && pm_min(x, y, m) == (x, y)
            }
            SchemeKind::Fsp => {
                let a = self.decode_proj(idx / self.proj_count);
                let b = self.decode_proj(idx % self.proj_count);
                self.proj_mod_p(a) != self.proj_mod_p(b)
            }
            SchemeKind::FspPlus => {
                let a = self.decode_proj(idx / self.proj_count);
                let b = self.decode_proj(idx % self.proj_count);
                self.proj_mod_p(a) != self.proj_mod_p(b) && a <= b
            }
        }
    }

    fn decode(&self, idx: usize) -> Coords {
        let idx = idx as u64;
        let m = self.md.m;
        match self.scheme {
            SchemeKind::F0 => Coords::Proj(self.decode_proj(idx)),
            SchemeKind::F1 => Coords::Pair(idx / m, idx % m),
            SchemeKind::F1pm => Coords::PairPm(idx / m, idx % m),
            SchemeKind::Fsp => Coords::Split(
                self.decode_proj(idx / self.proj_count),
                self.decode_proj(idx % self.proj_count),
            ),
            SchemeKind::FspPlus => Coords::SplitPlus(
                self.decode_proj(idx / self.proj_count),
                self.decode_proj(idx % self.proj_count),
            ),
        }
    }

    fn act(&self, mat: &ResidueMatrix, idx: usize) -> usize {
        let idx = idx as u64;
        let m = self.md.m;
        (match self.scheme {
            SchemeKind::F0 => self.encode_proj(self.act_proj(mat, self.decode_proj(idx))),
            SchemeKind::F1 => {
                let (x, y) = (idx / m, idx % m);
                let nx = (mul_mod(mat.a, x, m) + mul_mod(mat.b, y, m)) % m;
                let ny = (mul_mod(mat.c, x, m) + mul_mod(mat.d, y, m)) % m;
                nx * m + ny
            }
            SchemeKind::F1pm => {
                let (x, y) = (idx / m, idx % m);
                let nx = (mul_mod(mat.a, x, m) + mul_mod(mat.b, y, m)) % m;
                let ny = (mul_mod(mat.c, x, m) + mul_mod(mat.d, y, m)) % m;
                let (nx, ny) = pm_min(nx, ny, m);
                nx * m + ny
            }
            SchemeKind::Fsp => {
                let a = self.act_proj(mat, self.decode_proj(idx / self.proj_count));
                let b = self.act_proj(mat, self.decode_proj(idx % self.proj_count));
                self.encode_proj(a) * self.proj_count + self.encode_proj(b)
            }
            SchemeKind::FspPlus => {
                let a = self.act_proj(mat, self.decode_proj(idx / self.proj_count));
                let b = self.act_proj(mat, self.decode_proj(idx % self.proj_count));
                let (a, b) = if a <= b { (a, b) } else { (b, a) };
                self.encode_proj(a) * self.proj_count + self.encode_proj(b)
            }
        }) as usize
    }
}
