//! Finite models of the basic data of a circle action: strata, perversities,
//! the graded ambient complex with per-stratum perverse-degree filtrations,
//! the Euler cocycle and the Euler operator.
//!
//! The perverse degree of a form along a stratum is never computed. Instead
//! each stratum carries the chain of subspaces `F_S^l = {ω : ‖ω‖_S ≤ l}` per
//! degree, which is exactly the data every construction needs. Levels below
//! zero are the zero subspace and levels above the last stored one are the
//! whole space.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ratla::{fmt_rational, is_zero_vec, parse_rational, zero_vec, Matrix, Rational, Subspace, Vector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StratumKind {
    Mobile,
    FixedNonperverse,
    FixedPerverse,
}

impl StratumKind {
    pub fn is_fixed(self) -> bool {
        self != StratumKind::Mobile
    }

    /// Value of the characteristic perversity.
    pub fn xbar(self) -> i64 {
        if self.is_fixed() {
            1
        } else {
            0
        }
    }

    /// Value of the Euler perversity.
    pub fn ebar(self) -> i64 {
        match self {
            StratumKind::Mobile => 0,
            StratumKind::FixedNonperverse => 1,
            StratumKind::FixedPerverse => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Stratum {
    pub name: String,
    pub kind: StratumKind,
}

/// An integer per singular stratum.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Perversity {
    values: BTreeMap<String, i64>,
}

impl fmt::Display for Perversity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.values.iter().map(|(k, v)| format!("{k}={v}")).collect();
        write!(f, "{}", parts.join(","))
    }
}

impl Perversity {
    pub fn new(values: BTreeMap<String, i64>) -> Self {
        Perversity { values }
    }

    pub fn constant(strata: &[Stratum], v: i64) -> Self {
        Perversity { values: strata.iter().map(|s| (s.name.clone(), v)).collect() }
    }

    pub fn from_fn(strata: &[Stratum], f: impl Fn(&Stratum) -> i64) -> Self {
        Perversity { values: strata.iter().map(|s| (s.name.clone(), f(s))).collect() }
    }

    pub fn values(&self) -> &BTreeMap<String, i64> {
        &self.values
    }

    pub fn get(&self, stratum: &str) -> Option<i64> {
        self.values.get(stratum).copied()
    }

    /// Parse `a=1,b=-1`; the empty string is the perversity on no strata.
    pub fn parse(s: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("perversity entry `{part}` is not of the form stratum=int")))?;
            let v: i64 = v.trim().parse().map_err(|_| Error::Parse(format!("perversity value `{v}` is not an integer")))?;
            if values.insert(k.trim().to_string(), v).is_some() {
                return Err(Error::Parse(format!("stratum `{}` assigned twice", k.trim())));
            }
        }
        Ok(Perversity { values })
    }

    fn same_strata(&self, other: &Perversity) -> Result<()> {
        if self.values.keys().ne(other.values.keys()) {
            return Err(Error::StrataMismatch(format!("`{self}` vs `{other}`")));
        }
        Ok(())
    }

    pub fn add(&self, other: &Perversity) -> Result<Perversity> {
        self.same_strata(other)?;
        Ok(Perversity { values: self.values.iter().map(|(k, v)| (k.clone(), v + other.values[k])).collect() })
    }

    /// Pointwise difference clamped below at −1.
    pub fn sub_clamped(&self, other: &Perversity) -> Result<Perversity> {
        self.same_strata(other)?;
        Ok(Perversity { values: self.values.iter().map(|(k, v)| (k.clone(), (v - other.values[k]).max(-1))).collect() })
    }

    pub fn le(&self, other: &Perversity) -> Result<bool> {
        self.same_strata(other)?;
        Ok(self.values.iter().all(|(k, v)| *v <= other.values[k]))
    }
}

/// Per-degree subspaces `levels[l][k]` for `l = 0..=kmax`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Filtration {
    pub levels: Vec<Vec<Subspace>>,
}

impl Filtration {
    pub fn kmax(&self) -> i64 {
        self.levels.len() as i64 - 1
    }
}

/// Auxiliary data of a cone model: the cohomology of the link quotient and
/// the Euler map on it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConeData {
    pub apex: String,
    pub link_dims: Vec<usize>,
    /// `link_eub[k] : IH^k → IH^{k+2}`
    pub link_eub: Vec<Matrix>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductEntry {
    pub left: usize,
    pub right: usize,
    pub out: usize,
    pub coeff: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Model {
    pub name: String,
    pub top_degree: usize,
    pub dims: Vec<usize>,
    /// `d[k] : A^k → A^{k+1}` for `k = 0..=N` (the last one has no rows).
    pub d: Vec<Matrix>,
    pub strata: Vec<Stratum>,
    pub filtrations: BTreeMap<String, Filtration>,
    pub euler_cocycle: Vector,
    /// `euler_op[k] : A^k → A^{k+2}` for `k = 0..=N`.
    pub euler_op: Vec<Matrix>,
    pub product: Option<Vec<ProductEntry>>,
    pub perversities: Vec<Perversity>,
    pub normal: Option<bool>,
    pub free: Option<bool>,
    pub cone: Option<ConeData>,
}

impl Model {
    pub fn dim(&self, k: i32) -> usize {
        if k < 0 {
            return 0;
        }
        self.dims.get(k as usize).copied().unwrap_or(0)
    }

    pub fn d(&self, k: i32) -> Matrix {
        if k >= 0 && (k as usize) < self.d.len() {
            self.d[k as usize].clone()
        } else {
            Matrix::zeros(self.dim(k + 1), self.dim(k))
        }
    }

    pub fn e(&self, k: i32) -> Matrix {
        if k >= 0 && (k as usize) < self.euler_op.len() {
            self.euler_op[k as usize].clone()
        } else {
            Matrix::zeros(self.dim(k + 2), self.dim(k))
        }
    }

    pub fn stratum(&self, name: &str) -> Result<&Stratum> {
        self.strata.iter().find(|s| s.name == name).ok_or_else(|| Error::UnknownStratum(name.to_string()))
    }

    /// `F_S^l` in degree `k`, with the clamping conventions.
    pub fn level(&self, stratum: &str, l: i64, k: i32) -> Subspace {
        let n = self.dim(k);
        if l < 0 {
            return Subspace::zero(n);
        }
        let f = &self.filtrations[stratum];
        match f.levels.get(l as usize) {
            Some(per_degree) if k >= 0 && (k as usize) < per_degree.len() => per_degree[k as usize].clone(),
            Some(_) => Subspace::zero(n),
            None => Subspace::full(n),
        }
    }

    /// `F_p = ∩_S F_S^{p(S)}` in degree `k`.
    pub fn f_p(&self, p: &Perversity, k: i32) -> Result<Subspace> {
        self.check_perversity(p)?;
        let mut acc = Subspace::full(self.dim(k));
        for s in &self.strata {
            acc = acc.intersect(&self.level(&s.name, p.values[&s.name], k))?;
        }
        Ok(acc)
    }

    /// Every stratum assigned, nothing else.
    pub fn check_perversity(&self, p: &Perversity) -> Result<()> {
        for k in p.values.keys() {
            self.stratum(k)?;
        }
        for s in &self.strata {
            if !p.values.contains_key(&s.name) {
                return Err(Error::StrataMismatch(format!("perversity `{p}` does not assign stratum `{}`", s.name)));
            }
        }
        Ok(())
    }

    pub fn xbar(&self) -> Perversity {
        Perversity::from_fn(&self.strata, |s| s.kind.xbar())
    }

    pub fn ebar(&self) -> Perversity {
        Perversity::from_fn(&self.strata, |s| s.kind.ebar())
    }

    pub fn zero_perversity(&self) -> Perversity {
        Perversity::constant(&self.strata, 0)
    }

    /// `p − x̄`, clamped at −1.
    pub fn minus_xbar(&self, p: &Perversity) -> Result<Perversity> {
        self.check_perversity(p)?;
        p.sub_clamped(&self.xbar())
    }

    /// True when no stratum is perverse, i.e. `ē = x̄`.
    pub fn no_perverse_strata(&self) -> bool {
        self.strata.iter().all(|s| s.kind != StratumKind::FixedPerverse)
    }

    pub fn has_fixed_strata(&self) -> bool {
        self.strata.iter().any(|s| s.kind.is_fixed())
    }

    /// Perversity with every value clamped into `[−1, kmax(S)+1]`; two
    /// perversities with the same normal form define the same `F_p`.
    pub fn normalize(&self, p: &Perversity) -> Perversity {
        Perversity {
            values: p
                .values
                .iter()
                .map(|(k, &v)| {
                    let top = self.filtrations.get(k).map_or(0, |f| f.kmax() + 1);
                    (k.clone(), v.clamp(-1, top))
                })
                .collect(),
        }
    }

    fn offset(&self, k: usize) -> usize {
        self.dims[..k].iter().sum()
    }

    fn degree_of_global(&self, g: usize) -> Option<(usize, usize)> {
        let mut acc = 0;
        for (k, &n) in self.dims.iter().enumerate() {
            if g < acc + n {
                return Some((k, g - acc));
            }
            acc += n;
        }
        None
    }

    /// Product of `a ∈ A^i` and `b ∈ A^j` through the product table.
    pub fn multiply(&self, i: usize, a: &[Rational], j: usize, b: &[Rational]) -> Option<Vector> {
        let table = self.product.as_ref()?;
        let k = i + j;
        let mut out = zero_vec(self.dim(k as i32));
        if k > self.top_degree {
            return Some(out);
        }
        let (oi, oj, ok) = (self.offset(i), self.offset(j), self.offset(k));
        for e in table {
            if e.left < oi || e.left >= oi + self.dims[i] || e.right < oj || e.right >= oj + self.dims[j] {
                continue;
            }
            let x = &a[e.left - oi];
            let y = &b[e.right - oj];
            if num_traits::Zero::is_zero(x) || num_traits::Zero::is_zero(y) {
                continue;
            }
            out[e.out - ok] += x * y * &e.coeff;
        }
        Some(out)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AxiomCheck {
    pub axiom: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub strict: bool,
    pub pass: bool,
    pub checks: Vec<AxiomCheck>,
}

impl ValidationReport {
    pub fn failed(&self) -> Vec<&AxiomCheck> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }

    pub fn check(&self, axiom: &str) -> Option<&AxiomCheck> {
        self.checks.iter().find(|c| c.axiom == axiom)
    }
}

fn fmt_vec(v: &[Rational]) -> String {
    let parts: Vec<String> = v.iter().map(fmt_rational).collect();
    format!("({})", parts.join(", "))
}

struct Checker {
    checks: Vec<AxiomCheck>,
}

impl Checker {
    fn record(&mut self, axiom: &str, failure: Option<String>) {
        self.checks.push(AxiomCheck { axiom: axiom.to_string(), pass: failure.is_none(), detail: failure.unwrap_or_default() });
    }
}

/// Check the model axioms; `strict` adds the Euler-operator filtration
/// condition, the level bound `‖ω‖ ≤ |ω|` and product/filtration
/// compatibility.
pub fn validate(m: &Model, strict: bool) -> ValidationReport {
    let mut c = Checker { checks: Vec::new() };
    let n = m.top_degree as i32;

    c.record("complex", {
        (0..=n).find_map(|k| {
            let dd = m.d(k + 1).mul(&m.d(k));
            (!dd.is_zero()).then(|| {
                let j = (0..dd.cols()).find(|&j| !is_zero_vec(&dd.col(j))).unwrap_or(0);
                format!("not a complex: d∘d ≠ 0 on basis vector {j} of degree {k}")
            })
        })
    });

    c.record("filtration_nested", {
        let mut fail = None;
        'outer: for s in &m.strata {
            let kmax = m.filtrations[&s.name].kmax();
            for l in 0..=kmax {
                for k in 0..=n {
                    let (lo, hi) = (m.level(&s.name, l, k), m.level(&s.name, l + 1, k));
                    if let Some(v) = lo.basis().iter().find(|v| !hi.contains(v)) {
                        fail = Some(format!("stratum {}, degree {k}: {} in level {l} but not in level {}", s.name, fmt_vec(v), l + 1));
                        break 'outer;
                    }
                }
            }
        }
        fail
    });

    c.record("degree_zero_level", {
        m.strata
            .iter()
            .find(|s| !m.level(&s.name, 0, 0).is_full())
            .map(|s| format!("stratum {}: degree-0 forms are not all in level 0", s.name))
    });

    c.record("euler_chain_map", {
        (0..=n).find_map(|k| {
            (m.e(k + 1).mul(&m.d(k)) != m.d(k + 2).mul(&m.e(k))).then(|| format!("E∘d ≠ d∘E in degree {k}"))
        })
    });

    c.record("euler_cocycle_closed", {
        let eps = &m.euler_cocycle;
        let de = m.d(2).apply(eps);
        (!is_zero_vec(&de)).then(|| format!("dε = {} ≠ 0", fmt_vec(&de)))
    });

    c.record("euler_cocycle_placement", {
        m.strata.iter().find_map(|s| {
            let l = s.kind.ebar();
            (!m.level(&s.name, l, 2).contains(&m.euler_cocycle))
                .then(|| format!("ε = {} is not in level {l} of stratum {}", fmt_vec(&m.euler_cocycle), s.name))
        })
    });

    c.record("perversity_set", {
        let normal: Vec<Perversity> = m.perversities.iter().map(|p| m.normalize(p)).collect();
        let mut fail = None;
        for p in &m.perversities {
            if let Err(e) = m.check_perversity(p) {
                fail = Some(e.to_string());
                break;
            }
            let q = m.normalize(&m.minus_xbar(p).expect("checked"));
            if !normal.contains(&q) {
                fail = Some(format!("`{p}` is in the set but `{q}` = p − x̄ is not"));
                break;
            }
        }
        fail
    });

    if m.product.is_some() {
        product_checks(m, &mut c, false);
    }

    if strict {
        c.record("euler_filtration", {
            let mut fail = None;
            'outer: for s in &m.strata {
                let kmax = m.filtrations[&s.name].kmax();
                for l in 0..=kmax {
                    for k in 0..=n {
                        let src = m.level(&s.name, l, k);
                        let tgt = m.level(&s.name, l + s.kind.ebar(), k + 2);
                        let e = m.e(k);
                        if let Some(v) = src.basis().iter().find(|v| !tgt.contains(&e.apply(v))) {
                            fail = Some(format!(
                                "stratum {}, degree {k}: E{} leaves level {}",
                                s.name,
                                fmt_vec(v),
                                l + s.kind.ebar()
                            ));
                            break 'outer;
                        }
                    }
                }
            }
            fail
        });
        c.record("level_within_degree", {
            m.strata.iter().find_map(|s| {
                (0..=n)
                    .find(|&k| !m.level(&s.name, k as i64, k).is_full())
                    .map(|k| format!("stratum {}: some form of degree {k} has perverse degree above {k}", s.name))
            })
        });
        if m.product.is_some() {
            product_checks(m, &mut c, true);
        }
    }

    let pass = c.checks.iter().all(|x| x.pass);
    ValidationReport { strict, pass, checks: c.checks }
}

fn basis_vectors(m: &Model, k: usize) -> Vec<Vector> {
    (0..m.dims[k]).map(|i| crate::ratla::unit_vec(m.dims[k], i)).collect()
}

fn product_checks(m: &Model, c: &mut Checker, strict: bool) {
    let n = m.top_degree;
    if !strict {
        c.record("product_graded_commutative", {
            let mut fail = None;
            'outer: for i in 0..=n {
                for j in 0..=n {
                    for a in basis_vectors(m, i) {
                        for b in basis_vectors(m, j) {
                            let ab = m.multiply(i, &a, j, &b).expect("product present");
                            let ba = m.multiply(j, &b, i, &a).expect("product present");
                            let sgn = crate::ratla::sign((i * j) as i64);
                            if ab != crate::ratla::scale_vec(&sgn, &ba) {
                                fail = Some(format!("ab ≠ ±ba for basis elements in degrees {i}, {j}"));
                                break 'outer;
                            }
                        }
                    }
                }
            }
            fail
        });
        c.record("product_associative", {
            let mut fail = None;
            'outer: for i in 0..=n {
                for j in 0..=n - i.min(n) {
                    for k in 0..=n {
                        if i + j + k > n {
                            continue;
                        }
                        for a in basis_vectors(m, i) {
                            for b in basis_vectors(m, j) {
                                let ab = m.multiply(i, &a, j, &b).unwrap();
                                for x in basis_vectors(m, k) {
                                    let l = m.multiply(i + j, &ab, k, &x).unwrap();
                                    let bx = m.multiply(j, &b, k, &x).unwrap();
                                    let r = m.multiply(i, &a, j + k, &bx).unwrap();
                                    if l != r {
                                        fail = Some(format!("(ab)c ≠ a(bc) in degrees {i}, {j}, {k}"));
                                        break 'outer;
                                    }
                                }
                            }
                        }
                    }
                }
            }
            fail
        });
        c.record("product_leibniz", {
            let mut fail = None;
            'outer: for i in 0..=n {
                for j in 0..=n {
                    if i + j + 1 > n {
                        continue;
                    }
                    for a in basis_vectors(m, i) {
                        for b in basis_vectors(m, j) {
                            let ab = m.multiply(i, &a, j, &b).unwrap();
                            let lhs = m.d((i + j) as i32).apply(&ab);
                            let da = m.d(i as i32).apply(&a);
                            let db = m.d(j as i32).apply(&b);
                            let t1 = m.multiply(i + 1, &da, j, &b).unwrap();
                            let t2 = m.multiply(i, &a, j + 1, &db).unwrap();
                            let rhs = crate::ratla::add_vec(&t1, &crate::ratla::scale_vec(&crate::ratla::sign(i as i64), &t2));
                            if lhs != rhs {
                                fail = Some(format!("d(ab) ≠ da·b ± a·db in degrees {i}, {j}"));
                                break 'outer;
                            }
                        }
                    }
                }
            }
            fail
        });
        c.record("euler_is_product", {
            let mut fail = None;
            'outer: for k in 0..=n {
                for (idx, a) in basis_vectors(m, k).into_iter().enumerate() {
                    let prod = m.multiply(k, &a, 2, &m.euler_cocycle).unwrap();
                    if m.e(k as i32).apply(&a) != prod {
                        fail = Some(format!("E(e_{idx}) ≠ e_{idx}·ε in degree {k}"));
                        break 'outer;
                    }
                }
            }
            fail
        });
    } else {
        c.record("product_filtration", {
            let mut fail = None;
            'outer: for s in &m.strata {
                let kmax = m.filtrations[&s.name].kmax();
                for la in 0..=kmax {
                    for lb in 0..=kmax {
                        for i in 0..=n {
                            for j in 0..=n - i {
                                let fa = m.level(&s.name, la, i as i32);
                                let fb = m.level(&s.name, lb, j as i32);
                                let tgt = m.level(&s.name, la + lb, (i + j) as i32);
                                for a in fa.basis() {
                                    for b in fb.basis() {
                                        let ab = m.multiply(i, a, j, b).unwrap();
                                        if !tgt.contains(&ab) {
                                            fail = Some(format!(
                                                "stratum {}: levels {la}·{lb} land outside level {} in degree {}",
                                                s.name,
                                                la + lb,
                                                i + j
                                            ));
                                            break 'outer;
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
            fail
        });
    }
}

// ---------------------------------------------------------------------------
// File format

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum RawRat {
    Str(String),
    Int(i64),
}

impl RawRat {
    fn parse(&self) -> Result<Rational> {
        match self {
            RawRat::Str(s) => parse_rational(s),
            RawRat::Int(i) => Ok(crate::ratla::q(*i)),
        }
    }
}

fn raw(x: &Rational) -> RawRat {
    RawRat::Str(fmt_rational(x))
}

type RawMatrix = Vec<Vec<RawRat>>;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCone {
    apex: String,
    link_dims: Vec<usize>,
    link_eub: Vec<RawMatrix>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    name: String,
    top_degree: usize,
    dims: Vec<usize>,
    d: Vec<RawMatrix>,
    #[serde(default)]
    strata: Vec<Stratum>,
    #[serde(default)]
    filtrations: BTreeMap<String, BTreeMap<String, Vec<Vec<Vec<RawRat>>>>>,
    euler_cocycle: Vec<RawRat>,
    euler_op: Vec<RawMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    product: Option<Vec<(usize, usize, usize, RawRat)>>,
    #[serde(default)]
    perversities: Vec<BTreeMap<String, i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    normal: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    free: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cone: Option<RawCone>,
}

fn parse_matrix(raw: &RawMatrix, rows: usize, cols: usize, what: &str) -> Result<Matrix> {
    let bad = || Error::InvalidModel(format!("{what}: expected a {rows}×{cols} matrix"));
    if raw.len() != rows {
        return Err(bad());
    }
    let mut out = Matrix::zeros(rows, cols);
    for (r, row) in raw.iter().enumerate() {
        if row.len() != cols {
            return Err(bad());
        }
        for (c, x) in row.iter().enumerate() {
            out[(r, c)] = x.parse().map_err(|e| Error::InvalidModel(format!("{what}: {e}")))?;
        }
    }
    Ok(out)
}

fn matrix_raw(m: &Matrix) -> RawMatrix {
    (0..m.rows()).map(|r| m.row(r).iter().map(raw).collect()).collect()
}

fn parse_vector(raw: &[RawRat], len: usize, what: &str) -> Result<Vector> {
    if raw.len() != len {
        return Err(Error::InvalidModel(format!("{what}: expected {len} entries, found {}", raw.len())));
    }
    raw.iter().map(|x| x.parse().map_err(|e| Error::InvalidModel(format!("{what}: {e}")))).collect()
}

impl Model {
    pub fn from_json(text: &str) -> Result<Model> {
        let raw: RawModel = serde_json::from_str(text)?;
        Model::from_raw(raw)
    }

    fn from_raw(r: RawModel) -> Result<Model> {
        let n = r.top_degree;
        if r.dims.len() != n + 1 {
            return Err(Error::InvalidModel(format!("`dims` must have top_degree + 1 = {} entries", n + 1)));
        }
        let dims = r.dims.clone();
        let dim = |k: usize| dims.get(k).copied().unwrap_or(0);

        if r.d.len() != n && r.d.len() != n + 1 {
            return Err(Error::InvalidModel(format!("`d` must list d^0..d^{{N-1}} ({n} matrices)")));
        }
        let mut d = Vec::with_capacity(n + 1);
        for k in 0..=n {
            match r.d.get(k) {
                Some(raw) => d.push(parse_matrix(raw, dim(k + 1), dim(k), &format!("d^{k}"))?),
                None => d.push(Matrix::zeros(0, dim(k))),
            }
        }

        let e_needed = n.saturating_sub(1);
        if r.euler_op.len() < e_needed || r.euler_op.len() > n + 1 {
            return Err(Error::InvalidModel(format!("`euler_op` must list E^0..E^{{N-2}} ({e_needed} matrices)")));
        }
        let mut euler_op = Vec::with_capacity(n + 1);
        for k in 0..=n {
            match r.euler_op.get(k) {
                Some(raw) => euler_op.push(parse_matrix(raw, dim(k + 2), dim(k), &format!("euler_op^{k}"))?),
                None => euler_op.push(Matrix::zeros(dim(k + 2), dim(k))),
            }
        }

        let mut seen = std::collections::BTreeSet::new();
        for s in &r.strata {
            if !seen.insert(s.name.clone()) {
                return Err(Error::InvalidModel(format!("stratum name `{}` is not unique", s.name)));
            }
        }
        for name in r.filtrations.keys() {
            if !seen.contains(name) {
                return Err(Error::UnknownStratum(name.clone()));
            }
        }

        let mut filtrations = BTreeMap::new();
        for s in &r.strata {
            let raw_levels = r
                .filtrations
                .get(&s.name)
                .ok_or_else(|| Error::InvalidModel(format!("no filtration for stratum `{}`", s.name)))?;
            let mut parsed: BTreeMap<i64, Vec<Subspace>> = BTreeMap::new();
            for (lk, per_degree) in raw_levels {
                let l: i64 = lk
                    .parse()
                    .map_err(|_| Error::InvalidModel(format!("filtration level `{lk}` of `{}` is not an integer", s.name)))?;
                if per_degree.len() != n + 1 {
                    return Err(Error::InvalidModel(format!(
                        "filtration level {l} of `{}` must list {} degrees",
                        s.name,
                        n + 1
                    )));
                }
                let mut spaces = Vec::with_capacity(n + 1);
                for (k, vecs) in per_degree.iter().enumerate() {
                    let what = format!("filtration `{}` level {l} degree {k}", s.name);
                    let vs: Vec<Vector> = vecs.iter().map(|v| parse_vector(v, dim(k), &what)).collect::<Result<_>>()?;
                    spaces.push(Subspace::span(dim(k), &vs));
                }
                parsed.insert(l, spaces);
            }
            if let Some(floor) = parsed.remove(&-1) {
                if floor.iter().any(|x| !x.is_zero()) {
                    return Err(Error::InvalidModel(format!("level −1 of `{}` must be zero", s.name)));
                }
            }
            let levels: Vec<Vec<Subspace>> = parsed.values().cloned().collect();
            if parsed.keys().copied().ne(0..levels.len() as i64) {
                return Err(Error::InvalidModel(format!("filtration levels of `{}` must be 0, 1, …, kmax", s.name)));
            }
            filtrations.insert(s.name.clone(), Filtration { levels });
        }

        let euler_cocycle = parse_vector(&r.euler_cocycle, dim(2), "euler_cocycle")?;

        let total: usize = dims.iter().sum();
        let product = match &r.product {
            None => None,
            Some(entries) => {
                let mut out = Vec::with_capacity(entries.len());
                for (a, b, o, c) in entries {
                    if *a >= total || *b >= total || *o >= total {
                        return Err(Error::InvalidModel("product index out of range".into()));
                    }
                    out.push(ProductEntry {
                        left: *a,
                        right: *b,
                        out: *o,
                        coeff: c.parse().map_err(|e| Error::InvalidModel(format!("product: {e}")))?,
                    });
                }
                Some(out)
            }
        };

        let strata = r.strata.clone();
        let mut perversities = Vec::with_capacity(r.perversities.len());
        for p in &r.perversities {
            let p = Perversity::new(p.clone());
            for k in p.values.keys() {
                if !seen.contains(k) {
                    return Err(Error::UnknownStratum(k.clone()));
                }
            }
            if p.values.len() != strata.len() {
                return Err(Error::StrataMismatch(format!("perversity `{p}` is not defined on every stratum")));
            }
            perversities.push(p);
        }

        let cone = match &r.cone {
            None => None,
            Some(c) => {
                let ld = c.link_dims.clone();
                let ldim = |k: usize| ld.get(k).copied().unwrap_or(0);
                let link_eub = c
                    .link_eub
                    .iter()
                    .enumerate()
                    .map(|(k, m)| parse_matrix(m, ldim(k + 2), ldim(k), &format!("cone.link_eub^{k}")))
                    .collect::<Result<_>>()?;
                Some(ConeData { apex: c.apex.clone(), link_dims: ld, link_eub })
            }
        };

        let m = Model {
            name: r.name,
            top_degree: n,
            dims,
            d,
            strata,
            filtrations,
            euler_cocycle,
            euler_op,
            product,
            perversities,
            normal: r.normal,
            free: r.free,
            cone,
        };
        if let Some(p) = &m.product {
            for e in p {
                let (da, _) = m.degree_of_global(e.left).expect("range checked");
                let (db, _) = m.degree_of_global(e.right).expect("range checked");
                let (dout, _) = m.degree_of_global(e.out).expect("range checked");
                if da + db != dout {
                    return Err(Error::InvalidModel("product table does not respect degrees".into()));
                }
            }
        }
        Ok(m)
    }

    fn to_raw(&self) -> RawModel {
        let n = self.top_degree;
        RawModel {
            name: self.name.clone(),
            top_degree: n,
            dims: self.dims.clone(),
            d: self.d[..n].iter().map(matrix_raw).collect(),
            strata: self.strata.clone(),
            filtrations: self
                .filtrations
                .iter()
                .map(|(s, f)| {
                    let levels = f
                        .levels
                        .iter()
                        .enumerate()
                        .map(|(l, per_degree)| {
                            let degs = per_degree.iter().map(|sp| sp.basis().iter().map(|v| v.iter().map(raw).collect()).collect()).collect();
                            (l.to_string(), degs)
                        })
                        .collect();
                    (s.clone(), levels)
                })
                .collect(),
            euler_cocycle: self.euler_cocycle.iter().map(raw).collect(),
            euler_op: self.euler_op[..n.saturating_sub(1)].iter().map(matrix_raw).collect(),
            product: self.product.as_ref().map(|p| p.iter().map(|e| (e.left, e.right, e.out, raw(&e.coeff))).collect()),
            perversities: self.perversities.iter().map(|p| p.values.clone()).collect(),
            normal: self.normal,
            free: self.free,
            cone: self.cone.as_ref().map(|c| RawCone {
                apex: c.apex.clone(),
                link_dims: c.link_dims.clone(),
                link_eub: c.link_eub.iter().map(matrix_raw).collect(),
            }),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_raw()).expect("model serializes")
    }

    /// Unknown-stratum-safe lookup table from stratum name to kind.
    pub fn kinds(&self) -> HashMap<&str, StratumKind> {
        self.strata.iter().map(|s| (s.name.as_str(), s.kind)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{cone2, hopf};

    #[test]
    fn perversity_arithmetic() {
        let p = Perversity::parse("a=2,b=0").unwrap();
        let zero = Perversity::parse("a=0,b=0").unwrap();
        assert_eq!(p.add(&zero).unwrap(), p);
        let x = Perversity::parse("a=1,b=1").unwrap();
        assert_eq!(p.sub_clamped(&x).unwrap(), Perversity::parse("a=1,b=-1").unwrap());
        assert_eq!(zero.sub_clamped(&x).unwrap(), Perversity::parse("a=-1,b=-1").unwrap());
        assert!(zero.le(&p).unwrap());
        assert!(matches!(p.add(&Perversity::parse("a=0").unwrap()), Err(Error::StrataMismatch(_))));
        assert_eq!(Perversity::parse("").unwrap(), Perversity::default());
        assert!(Perversity::parse("a").is_err());
    }

    #[test]
    fn characteristic_and_euler_perversities() {
        let strata = vec![
            Stratum { name: "m".into(), kind: StratumKind::Mobile },
            Stratum { name: "n".into(), kind: StratumKind::FixedNonperverse },
            Stratum { name: "p".into(), kind: StratumKind::FixedPerverse },
        ];
        let x = Perversity::from_fn(&strata, |s| s.kind.xbar());
        let e = Perversity::from_fn(&strata, |s| s.kind.ebar());
        assert_eq!(x, Perversity::parse("m=0,n=1,p=1").unwrap());
        assert_eq!(e, Perversity::parse("m=0,n=1,p=2").unwrap());
        assert_eq!(e.sub_clamped(&x).unwrap().get("p"), Some(1));
    }

    #[test]
    fn fixtures_validate_and_tampering_is_caught() {
        assert!(validate(&hopf(), true).pass);

        let mut bad = hopf();
        bad.top_degree = 2;
        bad.dims = vec![1, 1, 1];
        bad.d = vec![Matrix::identity(1), Matrix::identity(1), Matrix::zeros(0, 1)];
        bad.euler_op = vec![Matrix::zeros(1, 1), Matrix::zeros(0, 1), Matrix::zeros(0, 1)];
        bad.product = None;
        let rep = validate(&bad, false);
        assert!(!rep.check("complex").unwrap().pass);
        assert!(rep.check("complex").unwrap().detail.contains("not a complex"));

        let mut moved = cone2();
        let f = moved.filtrations.get_mut("apex").unwrap();
        f.levels[2][2] = Subspace::zero(1);
        f.levels.push(vec![Subspace::full(1), Subspace::full(0), Subspace::full(1)]);
        assert!(validate(&cone2(), true).pass);
        let rep = validate(&moved, false);
        assert!(!rep.check("euler_cocycle_placement").unwrap().pass);
        assert!(rep.check("complex").unwrap().pass);
    }

    #[test]
    fn json_round_trip() {
        for m in [hopf(), cone2()] {
            let back = Model::from_json(&m.to_json()).unwrap();
            assert_eq!(back, m);
        }
    }

    #[test]
    fn malformed_input_is_an_input_error() {
        let e = Model::from_json("{\"name\": 3}").unwrap_err();
        assert!(e.is_input_error());
        let mut text = hopf().to_json();
        text = text.replace("\"top_degree\": 2", "\"top_degree\": 3");
        assert!(matches!(Model::from_json(&text), Err(Error::InvalidModel(_))));
    }
}
