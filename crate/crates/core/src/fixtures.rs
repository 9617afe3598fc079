//! Fixture models, a seeded random model generator and a brute-force oracle
//! for equivariant cohomology.
//!
//! | name     | geometry it stands for                         |
//! |----------|------------------------------------------------|
//! | `HOPF`   | Hopf action on `S³`, orbit space `S²`           |
//! | `ROT`    | rotation of the circle factor of `S²×S¹`        |
//! | `CONE2`  | open cone on `S³` with the Hopf action on links |
//! | `NOPERV` | a fixed stratum that is not perverse            |
//! | `RANDOM` | seeded random models for property tests         |

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ConeData, Filtration, Model, Perversity, ProductEntry, Stratum, StratumKind};
use crate::ratla::{q, unit_vec, zero_vec, Matrix, Subspace, Vector};

fn spans(dim: usize, vs: &[Vector]) -> Subspace {
    Subspace::span(dim, vs)
}

fn unit_product(dims: &[usize]) -> Vec<ProductEntry> {
    let total: usize = dims.iter().sum();
    (0..total)
        .flat_map(|g| {
            let e = |l, r| ProductEntry { left: l, right: r, out: g, coeff: q(1) };
            if g == 0 {
                vec![e(0, 0)]
            } else {
                vec![e(0, g), e(g, 0)]
            }
        })
        .collect()
}

/// `A = ⟨1⟩ ⊕ 0 ⊕ ⟨v⟩`, `d = 0`, `E(1) = λv`.
fn sphere_base(name: &str, lambda: i64) -> Model {
    let dims = vec![1, 0, 1];
    Model {
        name: name.into(),
        top_degree: 2,
        d: vec![Matrix::zeros(0, 1), Matrix::zeros(1, 0), Matrix::zeros(0, 1)],
        euler_cocycle: vec![q(lambda)],
        euler_op: vec![Matrix::from_i64(1, 1, &[lambda]), Matrix::zeros(0, 0), Matrix::zeros(0, 1)],
        product: Some(unit_product(&dims)),
        dims,
        strata: Vec::new(),
        filtrations: BTreeMap::new(),
        perversities: vec![Perversity::default()],
        normal: Some(true),
        free: Some(true),
        cone: None,
    }
}

pub fn hopf() -> Model {
    sphere_base("HOPF", 1)
}

pub fn rot() -> Model {
    sphere_base("ROT", 0)
}

/// HOPF with the Euler cocycle multiplied by `lambda`.
pub fn hopf_scaled(lambda: i64) -> Model {
    let mut m = sphere_base("HOPF", lambda);
    m.name = format!("HOPF-x{lambda}");
    m
}

fn apex_perversities(lo: i64, hi: i64) -> Vec<Perversity> {
    (lo..=hi).map(|v| Perversity::new(BTreeMap::from([("apex".to_string(), v)]))).collect()
}

/// Orbit space `cS²` with the apex fixed and perverse.
pub fn cone2() -> Model {
    let mut m = sphere_base("CONE2", 1);
    m.strata = vec![Stratum { name: "apex".into(), kind: StratumKind::FixedPerverse }];
    let low = vec![Subspace::full(1), Subspace::zero(0), Subspace::zero(1)];
    let top = vec![Subspace::full(1), Subspace::full(0), Subspace::full(1)];
    m.filtrations = BTreeMap::from([("apex".to_string(), Filtration { levels: vec![low.clone(), low, top] })]);
    m.perversities = apex_perversities(-1, 3);
    m.free = Some(false);
    m.cone = Some(ConeData {
        apex: "apex".into(),
        link_dims: vec![1, 0, 1],
        link_eub: vec![Matrix::from_i64(1, 1, &[1]), Matrix::zeros(0, 0), Matrix::zeros(0, 1)],
    });
    m
}

/// One fixed stratum that is not perverse: `A = ⟨1⟩ ⊕ ⟨w⟩ ⊕ ⟨v, ε⟩` with
/// `dw = ε` and `E(1) = ε`, so the Euler class vanishes.
pub fn noperv() -> Model {
    let dims = vec![1, 1, 2];
    let eps = vec![q(0), q(1)];
    let levels = vec![
        vec![Subspace::full(1), Subspace::zero(1), Subspace::zero(2)],
        vec![Subspace::full(1), Subspace::full(1), spans(2, std::slice::from_ref(&eps))],
        vec![Subspace::full(1), Subspace::full(1), Subspace::full(2)],
    ];
    Model {
        name: "NOPERV".into(),
        top_degree: 2,
        d: vec![Matrix::zeros(1, 1), Matrix::from_i64(2, 1, &[0, 1]), Matrix::zeros(0, 2)],
        euler_cocycle: eps,
        euler_op: vec![Matrix::from_i64(2, 1, &[0, 1]), Matrix::zeros(0, 1), Matrix::zeros(0, 2)],
        product: None,
        dims,
        strata: vec![Stratum { name: "apex".into(), kind: StratumKind::FixedNonperverse }],
        filtrations: BTreeMap::from([("apex".to_string(), Filtration { levels })]),
        perversities: apex_perversities(-1, 2),
        normal: Some(true),
        free: Some(false),
        cone: None,
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Role {
    Closed,
    Source,
    Boundary,
}

struct Gen {
    role: Role,
    /// For a source, the index of its boundary in the next degree; for a
    /// boundary, its source in the previous degree.
    partner: usize,
    levels: Vec<i64>,
}

/// A seeded random model. `size` bounds the top degree and the dimension
/// per degree.
pub fn random(seed: u64, size: usize) -> Model {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let size = size.max(1);
    let n = 2 + rng.gen_range(0..=size.min(2));
    let max_dim = 1 + size.min(3);
    let n_strata = [0, 1, 1, 1, 2][rng.gen_range(0..5)];
    // A pair a → da whose Euler image A → dA sits one level higher on a
    // perverse stratum: then d₃ = eub∘∂ is nonzero at the Euler perversity.
    let plant = n == 4 && n_strata > 0 && rng.gen_bool(0.5);
    let kinds = [StratumKind::Mobile, StratumKind::FixedNonperverse, StratumKind::FixedPerverse];
    let strata: Vec<Stratum> = (0..n_strata)
        .map(|i| {
            let kind = if plant && i == 0 { StratumKind::FixedPerverse } else { kinds[rng.gen_range(0..3)] };
            Stratum { name: format!("s{i}"), kind }
        })
        .collect();
    let ebar: Vec<i64> = strata.iter().map(|s| s.kind.ebar()).collect();

    let mut gens: Vec<Vec<Gen>> = (0..=n).map(|_| Vec::new()).collect();
    gens[0].push(Gen { role: Role::Closed, partner: 0, levels: vec![0; n_strata] });
    if plant {
        let rest: Vec<i64> = (1..n_strata).map(|_| rng.gen_range(0..=1)).collect();
        let lv = |first: i64| [vec![first], rest.clone()].concat();
        gens[1].push(Gen { role: Role::Source, partner: 0, levels: lv(1) });
        gens[2].push(Gen { role: Role::Boundary, partner: 0, levels: lv(0) });
        gens[3].push(Gen { role: Role::Source, partner: 0, levels: lv(2) });
        gens[4].push(Gen { role: Role::Boundary, partner: 0, levels: lv(1) });
    }
    for k in 0..=n {
        let have = gens[k].len();
        let room = max_dim.saturating_sub(have).max(if k == 0 { 0 } else { 1 });
        let add = if k == 0 { 0 } else { rng.gen_range(0..=room) };
        for _ in 0..add {
            let source = k < n && rng.gen_bool(0.4);
            let levels: Vec<i64> = (0..n_strata).map(|_| rng.gen_range(0..=k as i64)).collect();
            if source {
                let b_levels: Vec<i64> = (0..n_strata).map(|_| rng.gen_range(0..=k as i64 + 1)).collect();
                let here = gens[k].len();
                let there = gens[k + 1].len();
                gens[k].push(Gen { role: Role::Source, partner: there, levels });
                gens[k + 1].push(Gen { role: Role::Boundary, partner: here, levels: b_levels });
            } else {
                gens[k].push(Gen { role: Role::Closed, partner: 0, levels });
            }
        }
    }
    let dims: Vec<usize> = gens.iter().map(Vec::len).collect();
    let dim = |k: usize| dims.get(k).copied().unwrap_or(0);

    let mut d = Vec::new();
    for k in 0..=n {
        let mut m = Matrix::zeros(dim(k + 1), dim(k));
        for (i, g) in gens[k].iter().enumerate() {
            if g.role == Role::Source {
                m[(g.partner, i)] = q(1);
            }
        }
        d.push(m);
    }

    let fits = |lv: &[i64], cap: &[i64]| lv.iter().zip(cap).zip(&ebar).all(|((a, b), e)| *a <= b + e);
    let mut e_ops = Vec::new();
    for k in 0..=n {
        let mut m = Matrix::zeros(dim(k + 2), dim(k));
        if k + 2 <= n {
            for (i, g) in gens[k].iter().enumerate() {
                if g.role == Role::Boundary {
                    continue;
                }
                for (t, h) in gens[k + 2].iter().enumerate() {
                    let ok = match h.role {
                        Role::Source => {
                            g.role == Role::Source
                                && fits(&h.levels, &g.levels)
                                && fits(&gens[k + 3][h.partner].levels, &gens[k + 1][g.partner].levels)
                        }
                        _ => fits(&h.levels, &g.levels),
                    };
                    let c = if i == 0 && k == 0 { rng.gen_range(0..=2) } else { rng.gen_range(-1..=1) };
                    if ok && rng.gen_bool(0.6) {
                        m[(t, i)] = q(c);
                    }
                }
            }
        }
        e_ops.push(m);
    }
    if plant {
        e_ops[1][(0, 0)] = q(1);
    }
    for k in 1..=n {
        if k + 2 > n {
            break;
        }
        for i in 0..dim(k) {
            if gens[k][i].role != Role::Boundary {
                continue;
            }
            let src = gens[k][i].partner;
            let ex = e_ops[k - 1].col(src);
            let col = d[k + 1].apply(&ex);
            for (r, x) in col.into_iter().enumerate() {
                e_ops[k][(r, i)] = x;
            }
        }
    }

    let filtrations: BTreeMap<String, Filtration> = strata
        .iter()
        .enumerate()
        .map(|(s, st)| {
            let levels = (0..=n as i64)
                .map(|l| {
                    (0..=n)
                        .map(|k| {
                            let vs: Vec<Vector> = gens[k]
                                .iter()
                                .enumerate()
                                .filter(|(_, g)| g.levels[s] <= l)
                                .map(|(i, _)| unit_vec(dim(k), i))
                                .collect();
                            spans(dim(k), &vs)
                        })
                        .collect()
                })
                .collect();
            (st.name.clone(), Filtration { levels })
        })
        .collect();

    let euler_cocycle = if n >= 2 { e_ops[0].col(0) } else { zero_vec(dim(2)) };
    let mut m = Model {
        name: format!("RANDOM({seed},{size})"),
        top_degree: n,
        dims: dims.clone(),
        d,
        strata,
        filtrations,
        euler_cocycle,
        euler_op: e_ops,
        product: None,
        perversities: Vec::new(),
        normal: None,
        free: None,
        cone: None,
    };

    let zero = m.zero_perversity();
    let e = m.ebar();
    let vals: Vec<i64> = (0..n_strata).map(|_| rng.gen_range(-1..=n as i64 + 1)).collect();
    let r = Perversity::new(m.strata.iter().zip(&vals).map(|(s, v)| (s.name.clone(), *v)).collect());
    m.perversities = close_under_minus_xbar(&m, vec![zero, e, r]);

    let q_mats: Vec<Matrix> = (0..=n).map(|k| random_unimodular(&mut rng, dim(k))).collect();
    transport(&m, &q_mats).expect("unimodular matrices are invertible")
}

/// Normalize, add `p − x̄` until nothing new appears, deduplicate.
pub fn close_under_minus_xbar(m: &Model, seeds: Vec<Perversity>) -> Vec<Perversity> {
    let mut out: Vec<Perversity> = Vec::new();
    let mut todo: Vec<Perversity> = seeds.iter().map(|p| m.normalize(p)).collect();
    while let Some(p) = todo.pop() {
        if out.contains(&p) {
            continue;
        }
        let next = m.normalize(&m.minus_xbar(&p).expect("perversity on the model strata"));
        out.push(p);
        todo.push(next);
    }
    out.sort();
    out
}

fn random_unimodular(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    let mut m = Matrix::identity(n);
    if n < 2 {
        if n == 1 && rng.gen_bool(0.5) {
            m[(0, 0)] = q(-1);
        }
        return m;
    }
    for _ in 0..2 * n {
        let i = rng.gen_range(0..n);
        let j = rng.gen_range(0..n);
        if i == j {
            continue;
        }
        let c = q([-1, 1, 2][rng.gen_range(0..3)]);
        for col in 0..n {
            let x = &m[(j, col)] * &c;
            m[(i, col)] += x;
        }
    }
    m
}

/// The model expressed in the new basis `v ↦ Q_k v`: `d' = Q d Q⁻¹`,
/// `E' = Q E Q⁻¹`, `F' = Q(F)`, `ε' = Q ε`. The product table is dropped.
pub fn transport(m: &Model, q_mats: &[Matrix]) -> Result<Model> {
    let n = m.top_degree;
    if q_mats.len() != n + 1 {
        return Err(Error::InvalidIso("one matrix per degree is required".into()));
    }
    let inv: Vec<Matrix> =
        q_mats.iter().map(|x| x.inverse().ok_or_else(|| Error::InvalidIso("matrix is not invertible".into()))).collect::<Result<_>>()?;
    let qm = |k: usize| q_mats.get(k).cloned().unwrap_or_else(|| Matrix::identity(0));
    let mut out = m.clone();
    out.d = (0..=n).map(|k| qm(k + 1).mul(&m.d[k]).mul(&inv[k])).collect();
    out.euler_op = (0..=n).map(|k| qm(k + 2).mul(&m.euler_op[k]).mul(&inv[k])).collect();
    out.euler_cocycle = qm(2).apply(&m.euler_cocycle);
    for f in out.filtrations.values_mut() {
        for lvl in f.levels.iter_mut() {
            for (k, s) in lvl.iter_mut().enumerate() {
                *s = s.image_under(&qm(k));
            }
        }
    }
    out.product = None;
    Ok(out)
}

/// A fixture by name: `HOPF`, `ROT`, `CONE2`, `NOPERV` or
/// `RANDOM(seed,size)`.
pub fn make(name: &str) -> Result<Model> {
    let upper = name.trim().to_ascii_uppercase();
    match upper.as_str() {
        "HOPF" => return Ok(hopf()),
        "ROT" => return Ok(rot()),
        "CONE2" => return Ok(cone2()),
        "NOPERV" => return Ok(noperv()),
        _ => {}
    }
    let args = upper
        .strip_prefix("RANDOM(")
        .and_then(|r| r.strip_suffix(')'))
        .ok_or_else(|| Error::Parse(format!("unknown fixture `{name}`")))?;
    let (seed, size) = args.split_once(',').ok_or_else(|| Error::Parse("RANDOM takes (seed,size)".into()))?;
    let seed = seed.trim().parse().map_err(|_| Error::Parse(format!("bad seed `{seed}`")))?;
    let size = size.trim().parse().map_err(|_| Error::Parse(format!("bad size `{size}`")))?;
    Ok(random(seed, size))
}

/// The model with every ambient space zero.
pub fn zero_model() -> Model {
    Model {
        name: "ZERO".into(),
        top_degree: 2,
        dims: vec![0, 0, 0],
        d: (0..3).map(|_| Matrix::zeros(0, 0)).collect(),
        strata: Vec::new(),
        filtrations: BTreeMap::new(),
        euler_cocycle: Vec::new(),
        euler_op: (0..3).map(|_| Matrix::zeros(0, 0)).collect(),
        product: None,
        perversities: vec![Perversity::default()],
        normal: None,
        free: None,
        cone: None,
    }
}

pub const FIXTURE_NAMES: [&str; 4] = ["HOPF", "ROT", "CONE2", "NOPERV"];

pub fn all_named() -> Vec<Model> {
    vec![hopf(), rot(), cone2(), noperv()]
}

/// Where an expected value comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    /// Known cohomology of the space the fixture stands for.
    Geometry,
    /// Forced by how the fixture is built.
    Construction,
    /// Computed by [`oracle_cohomology`] and checked by hand.
    Oracle,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Expectation {
    pub fixture: String,
    pub perversity: String,
    pub quantity: String,
    pub value: Vec<usize>,
    pub origin: Origin,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Expectations {
    pub version: u32,
    pub entries: Vec<Expectation>,
}

const EXPECTATIONS: &str = include_str!("../data/expectations.json");

pub fn expectations() -> Expectations {
    serde_json::from_str(EXPECTATIONS).expect("bundled expectations parse")
}

/// Graded dimensions and `u`-ranks of equivariant cohomology computed
/// directly from the definitions: per total degree the space of chains
/// `⊕_j (α_j, β_j) ⊗ u^j` under the pointwise perversity constraints and the
/// full `∇`, then rank and nullity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OracleResult {
    pub dims: Vec<usize>,
    pub u_ranks: Vec<usize>,
}

struct OracleDegree {
    /// `(j, m, offset)` of each `(A^m ⊕ A^{m−1}) ⊗ u^j` block.
    blocks: Vec<(usize, usize, usize)>,
    dim: usize,
}

pub fn oracle_cohomology(m: &Model, p: &Perversity, nu: usize) -> Result<OracleResult> {
    let n_top = m.top_degree;
    let dim = |k: i64| if k < 0 || k as usize > n_top { 0 } else { m.dims[k as usize] };
    let mat = |v: &Vec<Matrix>, k: i64, rows: usize, cols: usize| {
        if k < 0 || k as usize >= v.len() {
            Matrix::zeros(rows, cols)
        } else {
            v[k as usize].clone()
        }
    };
    let d = |k: i64| mat(&m.d, k, dim(k + 1), dim(k));
    let e = |k: i64| mat(&m.euler_op, k, dim(k + 2), dim(k));
    let sgn = |k: i64| if k.rem_euclid(2) == 0 { q(1) } else { q(-1) };

    let level_meet = |p: &Perversity, k: i64| -> Result<Subspace> {
        let mut acc = Subspace::full(dim(k));
        for s in &m.strata {
            let l = p.get(&s.name).ok_or_else(|| Error::UnknownStratum(s.name.clone()))?;
            acc = acc.intersect(&m.level(&s.name, l, k as i32))?;
        }
        Ok(acc)
    };
    let pm = p.sub_clamped(&m.xbar())?;

    let layout = |n: usize| -> OracleDegree {
        let mut blocks = Vec::new();
        let mut off = 0;
        for j in 0..=n / 2 {
            let mdeg = n - 2 * j;
            if mdeg <= n_top + 1 {
                blocks.push((j, mdeg, off));
                off += dim(mdeg as i64) + dim(mdeg as i64 - 1);
            }
        }
        OracleDegree { blocks, dim: off }
    };

    let nabla = |n: usize| -> Matrix {
        let src = layout(n);
        let tgt = layout(n + 1);
        let mut out = Matrix::zeros(tgt.dim, src.dim);
        for &(j, k, off) in &src.blocks {
            let ki = k as i64;
            let (a0, a1) = (dim(ki), dim(ki - 1));
            if let Some(&(_, _, toff)) = tgt.blocks.iter().find(|b| b.0 == j) {
                let b0 = dim(ki + 1);
                out.set_block(toff, off, &d(ki));
                out.set_block(toff, off + a0, &e(ki - 1).scale(&sgn(ki - 1)));
                out.set_block(toff + b0, off + a0, &d(ki - 1));
            }
            if let Some(&(_, _, toff)) = tgt.blocks.iter().find(|b| b.0 == j + 1) {
                let mut t = Matrix::zeros(dim(ki - 1), a1);
                for r in 0..a1 {
                    t[(r, r)] = sgn(ki - 1);
                }
                out.set_block(toff, off + a0, &t);
            }
        }
        out
    };

    let constraint = |n: usize| -> Result<Subspace> {
        let lay = layout(n);
        let mut space = Subspace::zero(0);
        for &(_, k, _) in &lay.blocks {
            let ki = k as i64;
            let alpha = level_meet(p, ki)?;
            let beta = level_meet(&pm, ki - 1)?.intersect(&level_meet(&pm, ki)?.preimage(&d(ki - 1)))?;
            space = space.direct_sum(&alpha.direct_sum(&beta));
        }
        for &(_, k, off) in &lay.blocks {
            let ki = k as i64;
            let mut mix = Matrix::zeros(dim(ki + 1), lay.dim);
            mix.set_block(0, off, &d(ki));
            mix.set_block(0, off + dim(ki), &e(ki - 1).scale(&sgn(ki - 1)));
            space = space.intersect(&level_meet(p, ki + 1)?.preimage(&mix))?;
        }
        Ok(space)
    };

    let mut s = Vec::new();
    let mut nab = Vec::new();
    for n in 0..=nu + 3 {
        s.push(constraint(n)?);
        nab.push(nabla(n));
    }
    let z = |n: usize| -> Result<Subspace> { s[n].intersect(&nab[n].kernel()) };
    let b = |n: usize| -> Subspace {
        if n == 0 {
            Subspace::zero(layout(0).dim)
        } else {
            s[n - 1].image_under(&nab[n - 1])
        }
    };
    let mut dims = Vec::new();
    let mut u_ranks = Vec::new();
    for n in 0..=nu {
        let zn = z(n)?;
        dims.push(zn.dim() - b(n).dim());
        let src = layout(n);
        let tgt = layout(n + 2);
        let mut u = Matrix::zeros(tgt.dim, src.dim);
        for &(j, k, off) in &src.blocks {
            if let Some(&(_, _, toff)) = tgt.blocks.iter().find(|b| b.0 == j + 1) {
                u.set_block(toff, off, &Matrix::identity(dim(k as i64) + dim(k as i64 - 1)));
            }
        }
        let bn2 = b(n + 2);
        let image = zn.image_under(&u).sum(&bn2)?;
        u_ranks.push(image.dim() - bn2.dim());
    }
    Ok(OracleResult { dims, u_ranks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate;

    #[test]
    fn fixtures_are_strictly_valid() {
        for m in all_named() {
            let r = validate(&m, true);
            assert!(r.pass, "{}: {:?}", m.name, r.failed());
        }
        for seed in 0..40 {
            let m = random(seed, 3);
            let r = validate(&m, true);
            assert!(r.pass, "{}: {:?}", m.name, r.failed());
        }
    }

    #[test]
    fn random_is_deterministic() {
        assert_eq!(random(7, 3), random(7, 3));
        assert_eq!(random(7, 3).to_json(), random(7, 3).to_json());
    }

    #[test]
    fn fixtures_round_trip() {
        for m in all_named().into_iter().chain((0..5).map(|s| random(s, 2))) {
            let back = Model::from_json(&m.to_json()).unwrap();
            assert_eq!(back, m, "{}", m.name);
        }
    }

    #[test]
    fn make_by_name() {
        assert_eq!(make("hopf").unwrap(), hopf());
        assert_eq!(make("RANDOM(3, 2)").unwrap(), random(3, 2));
        assert!(make("SPHERE").unwrap_err().is_input_error());
    }

    #[test]
    fn oracle_on_fixtures() {
        let h = oracle_cohomology(&hopf(), &Perversity::default(), 6).unwrap();
        assert_eq!(h.dims, vec![1, 0, 1, 0, 0, 0, 0]);
        assert_eq!(h.u_ranks[0], 1);
        let c = oracle_cohomology(&cone2(), &Perversity::parse("apex=2").unwrap(), 6).unwrap();
        assert_eq!(c.dims, vec![1, 0, 1, 0, 1, 0, 1]);
    }

    #[test]
    fn zero_model_oracle_is_zero() {
        let m = zero_model();
        let r = oracle_cohomology(&m, &Perversity::default(), 4).unwrap();
        assert!(r.dims.iter().chain(&r.u_ranks).all(|&x| x == 0));
    }
}
