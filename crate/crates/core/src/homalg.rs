//! Bounded cochain complexes in coordinates, chain maps, cohomology and the
//! long exact sequence of a short exact sequence.
//!
//! A [`Complex`] stores one dimension and one differential matrix per degree
//! in `[lo, hi]`; everything outside that range is zero. All chain maps have
//! degree zero: shifted complexes are built explicitly with [`Complex::shift`].

use crate::error::{Error, Result};
use crate::ratla::{is_zero_vec, quotient, solve_preimage, zero_vec, Matrix, QuotientSpace, Subspace, Vector};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Complex {
    lo: i32,
    dims: Vec<usize>,
    // d[i] : degree lo+i -> degree lo+i+1, shape dims[i+1] x dims[i]
    d: Vec<Matrix>,
}

impl Complex {
    /// Checks shapes and `d∘d = 0`.
    pub fn new(lo: i32, dims: Vec<usize>, d: Vec<Matrix>) -> Result<Self> {
        if dims.len() != d.len() {
            return Err(Error::Internal(format!("{} dimensions but {} differentials", dims.len(), d.len())));
        }
        for (i, m) in d.iter().enumerate() {
            let next = dims.get(i + 1).copied().unwrap_or(0);
            if m.shape() != (next, dims[i]) {
                return Err(Error::Internal(format!(
                    "differential in degree {} has shape {:?}, expected {:?}",
                    lo + i as i32,
                    m.shape(),
                    (next, dims[i])
                )));
            }
        }
        for i in 0..d.len().saturating_sub(1) {
            if !d[i + 1].mul(&d[i]).is_zero() {
                return Err(Error::NotAComplex { degree: lo + i as i32 });
            }
        }
        Ok(Complex { lo, dims, d })
    }

    pub fn zero(lo: i32, hi: i32) -> Self {
        let n = (hi - lo + 1).max(0) as usize;
        Complex { lo, dims: vec![0; n], d: vec![Matrix::zeros(0, 0); n] }
    }

    pub fn lo(&self) -> i32 {
        self.lo
    }

    pub fn hi(&self) -> i32 {
        self.lo + self.dims.len() as i32 - 1
    }

    pub fn degrees(&self) -> std::ops::RangeInclusive<i32> {
        self.lo()..=self.hi()
    }

    fn idx(&self, k: i32) -> Option<usize> {
        (k >= self.lo && k <= self.hi()).then(|| (k - self.lo) as usize)
    }

    pub fn dim(&self, k: i32) -> usize {
        self.idx(k).map_or(0, |i| self.dims[i])
    }

    /// Differential out of degree `k`, shape `dim(k+1) × dim(k)`.
    pub fn d(&self, k: i32) -> Matrix {
        match self.idx(k) {
            Some(i) => self.d[i].clone(),
            None => Matrix::zeros(self.dim(k + 1), self.dim(k)),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.dims.iter().all(|&n| n == 0)
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.degrees().map(|k| if k % 2 == 0 { self.dim(k) as i64 } else { -(self.dim(k) as i64) }).sum()
    }

    /// The same complex viewed on the degree range `[lo, hi]`, which must
    /// contain every nonzero degree.
    pub fn padded(&self, lo: i32, hi: i32) -> Result<Complex> {
        for k in self.degrees() {
            if (k < lo || k > hi) && self.dim(k) > 0 {
                return Err(Error::Internal(format!("padding to [{lo}, {hi}] drops degree {k}")));
            }
        }
        let dims: Vec<usize> = (lo..=hi).map(|k| self.dim(k)).collect();
        let d = (lo..=hi).map(|k| self.d(k)).collect();
        Complex::new(lo, dims, d)
    }

    /// `C[-s]`: degree `k` of the result is degree `k - s` of `self`. The
    /// differential carries no sign.
    pub fn shift(&self, s: i32) -> Complex {
        Complex { lo: self.lo + s, dims: self.dims.clone(), d: self.d.clone() }
    }

    /// Restrict an ambient differential to a family of subspaces, one per
    /// degree in `[lo, lo + spaces.len())`, written in canonical coordinates.
    pub fn from_subspaces(lo: i32, spaces: &[Subspace], ambient_d: impl Fn(i32) -> Matrix) -> Result<Complex> {
        let mut d = Vec::with_capacity(spaces.len());
        for (i, s) in spaces.iter().enumerate() {
            let k = lo + i as i32;
            let next = spaces.get(i + 1);
            let dk = ambient_d(k);
            let mut cols = Vec::with_capacity(s.dim());
            for b in s.basis() {
                let img = dk.apply(b);
                let c = match next {
                    Some(t) => t.coords(&img),
                    None => is_zero_vec(&img).then(Vec::new),
                };
                cols.push(c.ok_or_else(|| Error::NotASubspace(format!("family is not d-stable in degree {k}")))?);
            }
            let rows = next.map_or(0, |t| t.dim());
            d.push(Matrix::from_cols(&cols, rows));
        }
        Complex::new(lo, spaces.iter().map(|s| s.dim()).collect(), d)
    }

    /// Quotient by a d-stable family of subspaces of the coordinate spaces.
    pub fn quotient(&self, sub: &[Subspace]) -> Result<(Complex, ChainMap, Vec<QuotientSpace>)> {
        if sub.len() != self.dims.len() {
            return Err(Error::Internal("quotient family has the wrong length".into()));
        }
        let qs: Vec<QuotientSpace> = sub
            .iter()
            .zip(&self.dims)
            .map(|(w, &n)| quotient(&Subspace::full(n), w))
            .collect::<Result<_>>()?;
        let mut d = Vec::with_capacity(qs.len());
        for (i, q) in qs.iter().enumerate() {
            let k = self.lo + i as i32;
            if let Some(w_next) = sub.get(i + 1) {
                for b in sub[i].basis() {
                    if !w_next.contains(&self.d[i].apply(b)) {
                        return Err(Error::NotASubspace(format!("subcomplex is not d-stable in degree {k}")));
                    }
                }
            }
            let cols: Vec<Vector> = q
                .complement()
                .iter()
                .map(|c| {
                    let img = self.d[i].apply(c);
                    match qs.get(i + 1) {
                        Some(qn) => qn.project(&img),
                        None => Vec::new(),
                    }
                })
                .collect();
            d.push(Matrix::from_cols(&cols, qs.get(i + 1).map_or(0, |x| x.dim())));
        }
        let quot = Complex::new(self.lo, qs.iter().map(|q| q.dim()).collect(), d)?;
        let proj = ChainMap::new(self, &quot, qs.iter().map(|q| q.projection().clone()).collect())?;
        Ok((quot, proj, qs))
    }

    pub fn cohomology(&self) -> Result<Cohomology> {
        let mut spaces = Vec::with_capacity(self.dims.len());
        for k in self.degrees() {
            let z = self.d(k).kernel();
            let b = self.d(k - 1).image();
            spaces.push(quotient(&z, &b)?);
        }
        Ok(Cohomology { lo: self.lo, spaces })
    }
}

/// Degree-zero chain map, stored as one matrix per degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainMap {
    lo: i32,
    maps: Vec<Matrix>,
}

impl ChainMap {
    /// Checks shapes and `f∘d = d∘f` exactly. Both complexes must share
    /// their degree range.
    pub fn new(source: &Complex, target: &Complex, maps: Vec<Matrix>) -> Result<Self> {
        if source.lo() != target.lo() || source.hi() != target.hi() || maps.len() != source.dims.len() {
            return Err(Error::Internal("chain map between complexes on different degree ranges".into()));
        }
        for (i, m) in maps.iter().enumerate() {
            let k = source.lo + i as i32;
            if m.shape() != (target.dim(k), source.dim(k)) {
                return Err(Error::Internal(format!("chain map has the wrong shape in degree {k}")));
            }
        }
        for (i, m) in maps.iter().enumerate() {
            let k = source.lo + i as i32;
            let lhs = target.d(k).mul(m);
            let rhs = match maps.get(i + 1) {
                Some(next) => next.mul(&source.d(k)),
                None => Matrix::zeros(target.dim(k + 1), source.dim(k)),
            };
            if lhs != rhs {
                return Err(Error::PropertyViolation {
                    location: format!("chain map, degree {k}"),
                    detail: "does not commute with the differentials".into(),
                });
            }
        }
        Ok(ChainMap { lo: source.lo, maps })
    }

    pub fn at(&self, k: i32) -> Option<&Matrix> {
        (k >= self.lo).then(|| self.maps.get((k - self.lo) as usize)).flatten()
    }

    pub fn compose(&self, first: &ChainMap) -> ChainMap {
        ChainMap { lo: self.lo, maps: self.maps.iter().zip(&first.maps).map(|(g, f)| g.mul(f)).collect() }
    }

    /// Matrices of the induced maps `H^k(source) → H^k(target)`.
    pub fn induced(&self, hs: &Cohomology, ht: &Cohomology) -> Result<Vec<Matrix>> {
        let mut out = Vec::new();
        for (i, m) in self.maps.iter().enumerate() {
            let k = self.lo + i as i32;
            let cols: Vec<Vector> = (0..hs.dim(k))
                .map(|j| {
                    let z = hs.lift(k, &crate::ratla::unit_vec(hs.dim(k), j));
                    ht.class_of(k, &m.apply(&z))
                        .ok_or_else(|| Error::Internal(format!("image of a cocycle is not a cocycle in degree {k}")))
                })
                .collect::<Result<_>>()?;
            out.push(Matrix::from_cols(&cols, ht.dim(k)));
        }
        Ok(out)
    }
}

/// `H^k = ker d^k / im d^{k-1}` for every degree, with class and lift maps.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cohomology {
    lo: i32,
    spaces: Vec<QuotientSpace>,
}

impl Cohomology {
    pub fn lo(&self) -> i32 {
        self.lo
    }

    pub fn hi(&self) -> i32 {
        self.lo + self.spaces.len() as i32 - 1
    }

    pub fn space(&self, k: i32) -> Option<&QuotientSpace> {
        (k >= self.lo).then(|| self.spaces.get((k - self.lo) as usize)).flatten()
    }

    pub fn dim(&self, k: i32) -> usize {
        self.space(k).map_or(0, |q| q.dim())
    }

    pub fn dims(&self) -> Vec<usize> {
        self.spaces.iter().map(|q| q.dim()).collect()
    }

    /// Coordinates of the class of a cocycle; `None` if `v` is not a cocycle.
    pub fn class_of(&self, k: i32, v: &[crate::ratla::Rational]) -> Option<Vector> {
        match self.space(k) {
            Some(q) => q.class_of(v),
            None => is_zero_vec(v).then(Vec::new),
        }
    }

    /// A cocycle representing the class with coordinates `c`.
    pub fn lift(&self, k: i32, c: &[crate::ratla::Rational]) -> Vector {
        match self.space(k) {
            Some(q) => q.lift(c),
            None => Vec::new(),
        }
    }

    /// Replace the basis of `H^k` by the classes of the given cocycles.
    pub fn rebased(&self, k: i32, reps: Vec<Vector>) -> Result<Cohomology> {
        let i = (k - self.lo) as usize;
        let old = self.space(k).ok_or_else(|| Error::Internal(format!("no cohomology in degree {k}")))?;
        let q = QuotientSpace::with_complement(old.numerator().clone(), old.denominator().clone(), reps)?;
        let mut spaces = self.spaces.clone();
        spaces[i] = q;
        Ok(Cohomology { lo: self.lo, spaces })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LesNode {
    pub label: String,
    pub dim: usize,
}

/// A finite stretch of a long exact sequence. `maps[t]` goes from node `t`
/// to node `t + 1`. A closed end means the sequence genuinely starts or
/// stops there (the missing neighbour is zero); an open end is a truncation
/// and the end node is not checked.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LongExactSequence {
    pub nodes: Vec<LesNode>,
    pub maps: Vec<Matrix>,
    pub closed_left: bool,
    pub closed_right: bool,
}

impl LongExactSequence {
    pub fn new(nodes: Vec<LesNode>, maps: Vec<Matrix>, closed_left: bool, closed_right: bool) -> Result<Self> {
        if !nodes.is_empty() && maps.len() + 1 != nodes.len() {
            return Err(Error::Internal("sequence needs exactly one map between consecutive nodes".into()));
        }
        for (t, m) in maps.iter().enumerate() {
            if m.shape() != (nodes[t + 1].dim, nodes[t].dim) {
                return Err(Error::Internal(format!("map out of `{}` has the wrong shape", nodes[t].label)));
            }
        }
        Ok(LongExactSequence { nodes, maps, closed_left, closed_right })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct NodeCheck {
    pub label: String,
    pub dim: usize,
    pub image_dim: usize,
    pub kernel_dim: usize,
    pub composite_zero: bool,
    pub checked: bool,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct ExactnessReport {
    pub nodes: Vec<NodeCheck>,
    pub pass: bool,
}

impl ExactnessReport {
    pub fn first_failure(&self) -> Option<&NodeCheck> {
        self.nodes.iter().find(|n| !n.pass)
    }

    pub fn checked_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.checked).count()
    }
}

/// Check `im = ker` at every node that has both neighbours.
pub fn check_exact(seq: &LongExactSequence) -> ExactnessReport {
    let n = seq.nodes.len();
    let mut nodes = Vec::with_capacity(n);
    for t in 0..n {
        let node = &seq.nodes[t];
        let incoming = if t > 0 { Some(&seq.maps[t - 1]) } else { None };
        let outgoing = seq.maps.get(t);
        let has_in = incoming.is_some() || seq.closed_left;
        let has_out = outgoing.is_some() || seq.closed_right;
        let image_dim = incoming.map_or(0, |m| m.rank());
        let kernel_dim = node.dim - outgoing.map_or(0, |m| m.rank());
        let composite_zero = match (incoming, outgoing) {
            (Some(a), Some(b)) => b.mul(a).is_zero(),
            _ => true,
        };
        let checked = has_in && has_out;
        let pass = !checked || (composite_zero && image_dim == kernel_dim);
        nodes.push(NodeCheck { label: node.label.clone(), dim: node.dim, image_dim, kernel_dim, composite_zero, checked, pass });
    }
    let pass = nodes.iter().all(|c| c.pass);
    ExactnessReport { nodes, pass }
}

/// A short exact sequence `0 → A →i B →s C → 0` of complexes.
#[derive(Clone, Debug)]
pub struct ShortExact<'a> {
    pub a: &'a Complex,
    pub b: &'a Complex,
    pub c: &'a Complex,
    pub i: &'a ChainMap,
    pub s: &'a ChainMap,
}

/// The long exact sequence together with the pieces it was built from.
#[derive(Clone, Debug)]
pub struct Les {
    pub ha: Cohomology,
    pub hb: Cohomology,
    pub hc: Cohomology,
    pub i_star: Vec<Matrix>,
    pub s_star: Vec<Matrix>,
    /// `connecting[k] : H^k(C) → H^{k+1}(A)`
    pub connecting: Vec<Matrix>,
    pub sequence: LongExactSequence,
}

impl Les {
    pub fn i_star_at(&self, k: i32) -> &Matrix {
        &self.i_star[(k - self.ha.lo()) as usize]
    }

    pub fn s_star_at(&self, k: i32) -> &Matrix {
        &self.s_star[(k - self.ha.lo()) as usize]
    }

    pub fn connecting_at(&self, k: i32) -> &Matrix {
        &self.connecting[(k - self.ha.lo()) as usize]
    }
}

impl<'a> ShortExact<'a> {
    /// Verify injectivity, surjectivity and `im i = ker s` degreewise.
    pub fn check(&self) -> Result<()> {
        for k in self.b.degrees() {
            let (Some(i), Some(s)) = (self.i.at(k), self.s.at(k)) else {
                return Err(Error::NotExact { degree: k, reason: "maps missing".into() });
            };
            if i.rank() != self.a.dim(k) {
                return Err(Error::NotExact { degree: k, reason: "first map is not injective".into() });
            }
            if s.rank() != self.c.dim(k) {
                return Err(Error::NotExact { degree: k, reason: "second map is not surjective".into() });
            }
            if !s.mul(i).is_zero() || self.a.dim(k) + self.c.dim(k) != self.b.dim(k) {
                return Err(Error::NotExact { degree: k, reason: "image of the first map is not the kernel of the second".into() });
            }
        }
        Ok(())
    }

    pub fn les(&self, labels: [&str; 3], closed_right: bool) -> Result<Les> {
        self.les_with(self.a.cohomology()?, self.b.cohomology()?, self.c.cohomology()?, labels, closed_right)
    }

    /// Like [`ShortExact::les`], reusing cohomologies whose bases the caller
    /// has chosen.
    pub fn les_with(&self, ha: Cohomology, hb: Cohomology, hc: Cohomology, labels: [&str; 3], closed_right: bool) -> Result<Les> {
        self.check()?;
        let i_star = self.i.induced(&ha, &hb)?;
        let s_star = self.s.induced(&hb, &hc)?;
        let mut connecting = Vec::new();
        for k in self.b.degrees() {
            connecting.push(self.connecting_map(&ha, &hc, k, &|_, x| x)?);
        }
        let mut nodes = Vec::new();
        let mut maps = Vec::new();
        for (idx, k) in self.b.degrees().enumerate() {
            for (j, l) in labels.iter().enumerate() {
                let dim = [&ha, &hb, &hc][j].dim(k);
                nodes.push(LesNode { label: format!("{l}^{k}"), dim });
            }
            maps.push(i_star[idx].clone());
            maps.push(s_star[idx].clone());
            if k < self.b.hi() {
                maps.push(connecting[idx].clone());
            }
        }
        let sequence = LongExactSequence::new(nodes, maps, true, closed_right)?;
        Ok(Les { ha, hb, hc, i_star, s_star, connecting, sequence })
    }

    /// `∂[c] = [i⁻¹ d_B s⁻¹ c]`. `perturb` may move the chosen preimage
    /// within `s⁻¹(c)`; the induced map must not depend on it.
    pub fn connecting_map(
        &self,
        ha: &Cohomology,
        hc: &Cohomology,
        k: i32,
        perturb: &dyn Fn(usize, Vector) -> Vector,
    ) -> Result<Matrix> {
        let n = hc.dim(k);
        let s = self.s.at(k).cloned().unwrap_or_else(|| Matrix::zeros(self.c.dim(k), self.b.dim(k)));
        let i_next = self.i.at(k + 1).cloned().unwrap_or_else(|| Matrix::zeros(self.b.dim(k + 1), self.a.dim(k + 1)));
        let db = self.b.d(k);
        let mut cols = Vec::with_capacity(n);
        for j in 0..n {
            let z = hc.lift(k, &crate::ratla::unit_vec(n, j));
            let y = solve_preimage(&s, &z).ok_or_else(|| Error::NotExact { degree: k, reason: "second map is not surjective".into() })?;
            let y = perturb(j, y);
            let dy = db.apply(&y);
            let x = if i_next.cols() == 0 {
                if !is_zero_vec(&dy) {
                    return Err(Error::Internal(format!("connecting map leaves the subcomplex in degree {k}")));
                }
                zero_vec(0)
            } else {
                solve_preimage(&i_next, &dy)
                    .ok_or_else(|| Error::Internal(format!("connecting map leaves the subcomplex in degree {k}")))?
            };
            let cls = ha
                .class_of(k + 1, &x)
                .ok_or_else(|| Error::Internal(format!("connecting map produced a non-cocycle in degree {}", k + 1)))?;
            cols.push(cls);
        }
        Ok(Matrix::from_cols(&cols, ha.dim(k + 1)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratla::{ivec, q};

    fn id_complex() -> Complex {
        // 0 → Q →1 Q → 0 in degrees 0, 1
        Complex::new(0, vec![1, 1], vec![Matrix::identity(1), Matrix::zeros(0, 1)]).unwrap()
    }

    #[test]
    fn cohomology_examples() {
        assert_eq!(Complex::zero(0, 3).cohomology().unwrap().dims(), vec![0; 4]);
        assert_eq!(id_complex().cohomology().unwrap().dims(), vec![0, 0]);
        let hopf = Complex::new(0, vec![1, 0, 1], vec![Matrix::zeros(0, 1), Matrix::zeros(1, 0), Matrix::zeros(0, 1)]).unwrap();
        assert_eq!(hopf.cohomology().unwrap().dims(), vec![1, 0, 1]);
    }

    #[test]
    fn rejects_non_complex() {
        let d0 = Matrix::identity(1);
        let d1 = Matrix::identity(1);
        let r = Complex::new(0, vec![1, 1, 1], vec![d0, d1, Matrix::zeros(0, 1)]);
        assert!(matches!(r, Err(Error::NotAComplex { degree: 0 })));
    }

    #[test]
    fn split_ses_has_zero_connecting_map() {
        let a = id_complex();
        let c = Complex::new(0, vec![1, 0], vec![Matrix::zeros(0, 1), Matrix::zeros(0, 0)]).unwrap();
        let b = Complex::new(
            0,
            vec![2, 1],
            vec![Matrix::from_i64(1, 2, &[1, 0]), Matrix::zeros(0, 1)],
        )
        .unwrap();
        let i = ChainMap::new(&a, &b, vec![Matrix::from_i64(2, 1, &[1, 0]), Matrix::identity(1)]).unwrap();
        let s = ChainMap::new(&b, &c, vec![Matrix::from_i64(1, 2, &[0, 1]), Matrix::zeros(0, 1)]).unwrap();
        let les = ShortExact { a: &a, b: &b, c: &c, i: &i, s: &s }.les(["A", "B", "C"], true).unwrap();
        assert!(les.connecting.iter().all(Matrix::is_zero));
        assert!(check_exact(&les.sequence).pass);
    }

    #[test]
    fn nonsplit_ses_connecting_map_is_iso() {
        // 0 → Q[-1] → (Q →1 Q) → Q → 0
        let a = Complex::new(0, vec![0, 1], vec![Matrix::zeros(1, 0), Matrix::zeros(0, 1)]).unwrap();
        let b = id_complex();
        let c = Complex::new(0, vec![1, 0], vec![Matrix::zeros(0, 1), Matrix::zeros(0, 0)]).unwrap();
        let i = ChainMap::new(&a, &b, vec![Matrix::zeros(1, 0), Matrix::identity(1)]).unwrap();
        let s = ChainMap::new(&b, &c, vec![Matrix::identity(1), Matrix::zeros(0, 1)]).unwrap();
        let ses = ShortExact { a: &a, b: &b, c: &c, i: &i, s: &s };
        let les = ses.les(["A", "B", "C"], true).unwrap();
        assert_eq!(les.connecting_at(0), &Matrix::identity(1));
        assert!(check_exact(&les.sequence).pass);
    }

    #[test]
    fn connecting_map_ignores_lift_choice() {
        // 0 → A → B → C → 0 with B = Q² in degree 0 mapping onto Q in degree 1
        let a = Complex::new(0, vec![1, 1], vec![Matrix::zeros(1, 1), Matrix::zeros(0, 1)]).unwrap();
        let b = Complex::new(0, vec![2, 1], vec![Matrix::from_i64(1, 2, &[0, 1]), Matrix::zeros(0, 1)]).unwrap();
        let c = Complex::new(0, vec![1, 0], vec![Matrix::zeros(0, 1), Matrix::zeros(0, 0)]).unwrap();
        let i = ChainMap::new(&a, &b, vec![Matrix::from_i64(2, 1, &[1, 0]), Matrix::identity(1)]).unwrap();
        let s = ChainMap::new(&b, &c, vec![Matrix::from_i64(1, 2, &[0, 1]), Matrix::zeros(0, 1)]).unwrap();
        let ses = ShortExact { a: &a, b: &b, c: &c, i: &i, s: &s };
        let (ha, hc) = (a.cohomology().unwrap(), c.cohomology().unwrap());
        let plain = ses.connecting_map(&ha, &hc, 0, &|_, y| y).unwrap();
        let moved = ses.connecting_map(&ha, &hc, 0, &|_, y| vec![&y[0] + q(7), y[1].clone()]).unwrap();
        assert_eq!(plain, moved);
        assert!(!plain.is_zero());
    }

    #[test]
    fn non_exact_triple_fails_in_the_middle() {
        let nodes = ["X", "Y", "Z"].iter().map(|l| LesNode { label: l.to_string(), dim: 1 }).collect();
        let seq = LongExactSequence::new(nodes, vec![Matrix::identity(1), Matrix::identity(1)], true, true).unwrap();
        let rep = check_exact(&seq);
        assert!(!rep.pass);
        assert_eq!(rep.first_failure().unwrap().label, "Y");
        assert!(!rep.nodes[1].pass);
    }

    #[test]
    fn zero_ses_gives_zero_sequence() {
        let z = Complex::zero(0, 2);
        let m = ChainMap::new(&z, &z, vec![Matrix::zeros(0, 0); 3]).unwrap();
        let les = ShortExact { a: &z, b: &z, c: &z, i: &m, s: &m }.les(["A", "B", "C"], true).unwrap();
        assert!(les.sequence.nodes.iter().all(|n| n.dim == 0));
        assert!(check_exact(&les.sequence).pass);
    }

    #[test]
    fn euler_characteristic_matches_cohomology() {
        let c = Complex::new(
            0,
            vec![2, 2, 1],
            vec![Matrix::from_i64(2, 2, &[1, 1, 0, 0]), Matrix::from_i64(1, 2, &[0, 1]), Matrix::zeros(0, 1)],
        )
        .unwrap();
        let h = c.cohomology().unwrap();
        let chi_h: i64 = h.dims().iter().enumerate().map(|(k, &n)| if k % 2 == 0 { n as i64 } else { -(n as i64) }).sum();
        assert_eq!(c.euler_characteristic(), chi_h);
        let z = ivec(&[1, -1]);
        assert!(h.class_of(0, &z).is_some());
    }
}
