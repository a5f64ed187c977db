//! The centralizer 𝔞 = 𝔤^e of the nilpotent element attached to λ: its basis
//! E_ij^(r), structure constants, the μ-gradation with the subspaces 𝔫 and 𝔭,
//! the character χ, the invariant bilinear form, the trace correction, the
//! coadjoint action and the map φ with its kernel.

use crate::error::{Error, Result};
use crate::linalg;
use crate::pyramid::Pyramid;
use crate::scalar::{q, Q};
use num::{One, Zero};
use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::hash::{Hash, Hasher};

/// Index (i, j, r) of a basis element E_ij^(r) of the centralizer.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct GenIndex {
    pub i: usize,
    pub j: usize,
    pub r: i64,
}

impl GenIndex {
    pub fn new(i: usize, j: usize, r: i64) -> Self {
        GenIndex { i, j, r }
    }
}

impl fmt::Display for GenIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "E[{},{},{}]", self.i, self.j, self.r)
    }
}

/// Membership test for the index set S^e of λ.
pub fn in_basis(lambda: &Pyramid, idx: GenIndex) -> bool {
    let n = lambda.rows();
    if idx.i < 1 || idx.i > n || idx.j < 1 || idx.j > n {
        return false;
    }
    let li = lambda.part(idx.i) as i64;
    let lj = lambda.part(idx.j) as i64;
    idx.r >= lj - li.min(lj) && idx.r < lj
}

/// All indices of S^e in a fixed deterministic order (by i, j, r).
pub fn basis_indices(lambda: &Pyramid) -> Vec<GenIndex> {
    let n = lambda.rows();
    let mut out = Vec::new();
    for i in 1..=n {
        for j in 1..=n {
            let li = lambda.part(i) as i64;
            let lj = lambda.part(j) as i64;
            for r in (lj - li.min(lj))..lj {
                out.push(GenIndex::new(i, j, r));
            }
        }
    }
    out
}

/// The N×N matrix of E_ij^(r): the sum of e_ab over boxes a in row i and b in
/// row j with col(b) − col(a) = r.
pub fn embed(lambda: &Pyramid, idx: GenIndex) -> Result<Vec<Vec<i64>>> {
    if !in_basis(lambda, idx) {
        return Err(Error::IndexNotInBasis(idx.to_string()));
    }
    let n = lambda.boxes();
    let mut m = vec![vec![0i64; n]; n];
    for a in 1..=n {
        if lambda.row_of(a) != idx.i {
            continue;
        }
        for b in 1..=n {
            if lambda.row_of(b) == idx.j
                && lambda.col_of(b) as i64 - lambda.col_of(a) as i64 == idx.r
            {
                m[a - 1][b - 1] = 1;
            }
        }
    }
    Ok(m)
}

/// An exact linear combination of basis symbols E_ij^(r).
///
/// No explicit zero coefficients are stored and every index lies in S^e of
/// the context it was produced in.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct CentElt {
    terms: BTreeMap<GenIndex, Q>,
}

impl CentElt {
    pub fn zero() -> Self {
        CentElt::default()
    }

    pub fn gen(idx: GenIndex) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(idx, Q::one());
        CentElt { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&GenIndex, &Q)> {
        self.terms.iter()
    }

    pub fn coeff(&self, idx: GenIndex) -> Q {
        self.terms.get(&idx).cloned().unwrap_or_else(Q::zero)
    }

    pub fn add_term(&mut self, idx: GenIndex, c: Q) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(idx).or_insert_with(Q::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&idx);
        }
    }

    pub fn add(&self, other: &CentElt) -> CentElt {
        let mut out = self.clone();
        for (&idx, c) in &other.terms {
            out.add_term(idx, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &CentElt) -> CentElt {
        let mut out = self.clone();
        for (&idx, c) in &other.terms {
            out.add_term(idx, -c.clone());
        }
        out
    }

    pub fn scale(&self, c: &Q) -> CentElt {
        if c.is_zero() {
            return CentElt::zero();
        }
        CentElt {
            terms: self.terms.iter().map(|(&i, v)| (i, v * c)).collect(),
        }
    }

    pub fn neg(&self) -> CentElt {
        self.scale(&-Q::one())
    }
}

impl fmt::Display for CentElt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (idx, c) in &self.terms {
            crate::text::write_coeff_prefix(f, c, first)?;
            write!(f, "{}", idx)?;
            first = false;
        }
        Ok(())
    }
}

impl fmt::Debug for CentElt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

/// Bracket of two basis elements:
/// [E_ij^(r), E_hl^(s)] = δ_hj E_il^(r+s) − δ_il E_hj^(r+s),
/// with terms outside S^e dropped.
pub fn bracket(lambda: &Pyramid, a: GenIndex, b: GenIndex) -> CentElt {
    let mut out = CentElt::zero();
    if b.i == a.j {
        let idx = GenIndex::new(a.i, b.j, a.r + b.r);
        if in_basis(lambda, idx) {
            out.add_term(idx, Q::one());
        }
    }
    if a.i == b.j {
        let idx = GenIndex::new(b.i, a.j, a.r + b.r);
        if in_basis(lambda, idx) {
            out.add_term(idx, -Q::one());
        }
    }
    out
}

/// Bilinear extension of `bracket`.
pub fn bracket_elt(lambda: &Pyramid, x: &CentElt, y: &CentElt) -> CentElt {
    let mut out = CentElt::zero();
    for (&a, ca) in x.terms() {
        for (&b, cb) in y.terms() {
            let br = bracket(lambda, a, b);
            for (&idx, c) in br.terms() {
                out.add_term(idx, ca * cb * c);
            }
        }
    }
    out
}

/// An element of 𝔫* expressed over the dual basis symbols (E_ij^(r))*.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct DualElt {
    terms: BTreeMap<GenIndex, Q>,
}

impl DualElt {
    pub fn zero() -> Self {
        DualElt::default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&GenIndex, &Q)> {
        self.terms.iter()
    }

    pub fn coeff(&self, idx: GenIndex) -> Q {
        self.terms.get(&idx).cloned().unwrap_or_else(Q::zero)
    }

    pub fn add_term(&mut self, idx: GenIndex, c: Q) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(idx).or_insert_with(Q::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&idx);
        }
    }

    /// Evaluate the functional on an element of 𝔞 (zero off 𝔫).
    pub fn eval(&self, x: &CentElt) -> Q {
        let mut out = Q::zero();
        for (&idx, c) in x.terms() {
            if let Some(v) = self.terms.get(&idx) {
                out += v * c;
            }
        }
        out
    }

    pub fn add(&self, other: &DualElt) -> DualElt {
        let mut out = self.clone();
        for (&idx, c) in &other.terms {
            out.add_term(idx, c.clone());
        }
        out
    }

    pub fn scale(&self, c: &Q) -> DualElt {
        if c.is_zero() {
            return DualElt::zero();
        }
        DualElt {
            terms: self.terms.iter().map(|(&i, v)| (i, v * c)).collect(),
        }
    }
}

impl fmt::Display for DualElt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (idx, c) in &self.terms {
            crate::text::write_coeff_prefix(f, c, first)?;
            write!(f, "E*[{},{},{}]", idx.i, idx.j, idx.r)?;
            first = false;
        }
        Ok(())
    }
}

impl fmt::Debug for DualElt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

/// Everything attached to a fixed pair (λ, μ): the μ-grading, the ordered
/// basis with the 𝔭/𝔫 split, the element 𝖾, the character χ, and the grading
/// element h.
#[derive(Clone)]
pub struct GradedData {
    lambda: Pyramid,
    mu: Pyramid,
    /// All of S^e: 𝔭-indices first, then 𝔫-indices; within each block
    /// ordered lexicographically by (deg_μ, i, j, r).
    basis: Vec<GenIndex>,
    pos: BTreeMap<GenIndex, usize>,
    /// Number of leading 𝔭 entries in `basis`.
    p_dim: usize,
    e_elt: CentElt,
    chi: DualElt,
    h: CentElt,
    ctx_id: u64,
}

/// Builds the graded data for a pair of pyramids. μ must have as many boxes
/// as λ has rows.
pub fn graded_data(lambda: &Pyramid, mu: &Pyramid) -> Result<GradedData> {
    let n = lambda.rows();
    if mu.boxes() != n {
        return Err(Error::MuSizeMismatch {
            mu_boxes: mu.boxes(),
            rows: n,
        });
    }
    let deg = |idx: GenIndex| mu.col_of(idx.j) as i64 - mu.col_of(idx.i) as i64;
    let mut p_block: Vec<GenIndex> = basis_indices(lambda)
        .into_iter()
        .filter(|&i| deg(i) <= 0)
        .collect();
    let mut n_block: Vec<GenIndex> = basis_indices(lambda)
        .into_iter()
        .filter(|&i| deg(i) > 0)
        .collect();
    let key = |i: &GenIndex| (deg(*i), i.i, i.j, i.r);
    p_block.sort_by_key(key);
    n_block.sort_by_key(key);
    let p_dim = p_block.len();
    let mut basis = p_block;
    basis.extend(n_block);
    let pos = basis.iter().enumerate().map(|(k, &i)| (i, k)).collect();

    let mut e_elt = CentElt::zero();
    let mut chi = DualElt::zero();
    for i in 1..n {
        if mu.row_of(i) == mu.row_of(i + 1) {
            let idx = GenIndex::new(i, i + 1, lambda.part(i + 1) as i64 - 1);
            debug_assert!(in_basis(lambda, idx));
            e_elt.add_term(idx, Q::one());
            chi.add_term(idx, Q::one());
        }
    }

    let mut h = CentElt::zero();
    for i in 1..=n {
        let c = n as i64 - mu.col_of(i) as i64;
        h.add_term(GenIndex::new(i, i, 0), Q::from_integer(c.into()));
    }

    let mut hasher = DefaultHasher::new();
    lambda.parts().hash(&mut hasher);
    0xffusize.hash(&mut hasher);
    mu.parts().hash(&mut hasher);
    let ctx_id = hasher.finish();

    let data = GradedData {
        lambda: lambda.clone(),
        mu: mu.clone(),
        basis,
        pos,
        p_dim,
        e_elt,
        chi,
        h,
        ctx_id,
    };
    debug_assert!(data.chi_vanishes_on_brackets());
    Ok(data)
}

impl GradedData {
    pub fn lambda(&self) -> &Pyramid {
        &self.lambda
    }

    pub fn mu(&self) -> &Pyramid {
        &self.mu
    }

    pub fn ctx_id(&self) -> u64 {
        self.ctx_id
    }

    /// deg_μ(E_ij^(r)) = col_μ(j) − col_μ(i).
    pub fn deg_mu(&self, idx: GenIndex) -> i64 {
        self.mu.col_of(idx.j) as i64 - self.mu.col_of(idx.i) as i64
    }

    /// Position of a basis index in the module-wide total order.
    pub fn position(&self, idx: GenIndex) -> Result<usize> {
        self.pos
            .get(&idx)
            .copied()
            .ok_or_else(|| Error::IndexNotInBasis(idx.to_string()))
    }

    pub fn index_at(&self, pos: usize) -> GenIndex {
        self.basis[pos]
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// The ordered basis of all of S^e (𝔭 block first).
    pub fn basis(&self) -> &[GenIndex] {
        &self.basis
    }

    /// The 𝔭 block of the basis.
    pub fn p_basis(&self) -> &[GenIndex] {
        &self.basis[..self.p_dim]
    }

    /// The 𝔫 block of the basis (indices in S_{λ,μ}).
    pub fn n_basis(&self) -> &[GenIndex] {
        &self.basis[self.p_dim..]
    }

    pub fn dim_p(&self) -> usize {
        self.p_dim
    }

    pub fn dim_n(&self) -> usize {
        self.basis.len() - self.p_dim
    }

    /// Basis of the degree-zero subspace 𝔞(0).
    pub fn a0_basis(&self) -> Vec<GenIndex> {
        self.basis
            .iter()
            .copied()
            .filter(|&i| self.deg_mu(i) == 0)
            .collect()
    }

    pub fn in_n(&self, idx: GenIndex) -> bool {
        self.deg_mu(idx) > 0
    }

    pub fn in_p(&self, idx: GenIndex) -> bool {
        self.deg_mu(idx) <= 0
    }

    /// The element 𝖾 ∈ 𝔞(1) attached to (λ, μ).
    pub fn e_elt(&self) -> &CentElt {
        &self.e_elt
    }

    /// The character χ ∈ 𝔫* (dual to 𝖾 on its support).
    pub fn chi(&self) -> &DualElt {
        &self.chi
    }

    /// χ extended by zero on 𝔭, evaluated on an arbitrary element.
    pub fn chi_of(&self, x: &CentElt) -> Q {
        self.chi.eval(x)
    }

    /// The grading element h = Σ (n − col_μ(i)) E_ii^(0); [h, a] = deg_μ(a)·a.
    pub fn h(&self) -> &CentElt {
        &self.h
    }

    /// Projection onto 𝔫 (coefficient-wise).
    pub fn pi_plus(&self, x: &CentElt) -> CentElt {
        let mut out = CentElt::zero();
        for (&idx, c) in x.terms() {
            if self.in_n(idx) {
                out.add_term(idx, c.clone());
            }
        }
        out
    }

    /// Projection onto 𝔭 (coefficient-wise).
    pub fn pi_leq(&self, x: &CentElt) -> CentElt {
        let mut out = CentElt::zero();
        for (&idx, c) in x.terms() {
            if self.in_p(idx) {
                out.add_term(idx, c.clone());
            }
        }
        out
    }

    pub fn bracket(&self, x: &CentElt, y: &CentElt) -> CentElt {
        bracket_elt(&self.lambda, x, y)
    }

    /// Coadjoint action (x·m)(y) = m([y, x]) of x on a functional m supported
    /// on 𝔫 (m extended by zero outside 𝔫); the result is restricted to 𝔫.
    pub fn coadjoint(&self, x: &CentElt, m: &DualElt) -> DualElt {
        let mut out = DualElt::zero();
        for &y in self.n_basis() {
            let br = self.bracket(&CentElt::gen(y), x);
            let v = m.eval(&br);
            out.add_term(y, v);
        }
        out
    }

    /// The map φ : 𝔭 → 𝔫*, a ↦ (a·χ)|_𝔫 with χ extended by zero on 𝔭.
    pub fn phi(&self, a: &CentElt) -> Result<DualElt> {
        if a.terms().any(|(&idx, _)| self.in_n(idx)) {
            return Err(Error::NotInP);
        }
        Ok(self.coadjoint(a, &self.chi))
    }

    /// tr over 𝔫 of (π₊ ∘ ad a)(π₊ ∘ ad b).
    pub fn trace_term(&self, a: &CentElt, b: &CentElt) -> Q {
        let mut out = Q::zero();
        for &y in self.n_basis() {
            let inner = self.pi_plus(&self.bracket(b, &CentElt::gen(y)));
            let outer = self.pi_plus(&self.bracket(a, &inner));
            out += outer.coeff(y);
        }
        out
    }

    /// Conformal weight 1 − deg_μ of a homogeneous element, if homogeneous.
    pub fn conformal_weight(&self, x: &CentElt) -> Option<i64> {
        let mut w = None;
        for (&idx, _) in x.terms() {
            let cur = 1 - self.deg_mu(idx);
            match w {
                None => w = Some(cur),
                Some(prev) if prev != cur => return None,
                _ => {}
            }
        }
        w
    }

    /// Basis of ker φ as pairs (element, conformal weight), computed degree
    /// by degree with exact elimination and echelon-normalized vectors.
    pub fn ker_phi_basis(&self) -> Vec<(CentElt, i64)> {
        let mut degrees: BTreeSet<i64> = BTreeSet::new();
        for &idx in self.p_basis() {
            degrees.insert(self.deg_mu(idx));
        }
        let mut out = Vec::new();
        for jdeg in degrees {
            let cols: Vec<GenIndex> = self
                .p_basis()
                .iter()
                .copied()
                .filter(|&i| self.deg_mu(i) == jdeg)
                .collect();
            let rows: Vec<GenIndex> = self
                .n_basis()
                .iter()
                .copied()
                .filter(|&y| self.deg_mu(y) == 1 - jdeg)
                .collect();
            let mut m = Vec::with_capacity(rows.len());
            for &y in &rows {
                let mut row = Vec::with_capacity(cols.len());
                for &a in &cols {
                    let br = self.bracket(&CentElt::gen(y), &CentElt::gen(a));
                    row.push(self.chi.eval(&br));
                }
                m.push(row);
            }
            for v in linalg::kernel_basis(m, cols.len()) {
                let mut elt = CentElt::zero();
                for (ci, c) in v.into_iter().enumerate() {
                    elt.add_term(cols[ci], c);
                }
                out.push((elt, 1 - jdeg));
            }
        }
        out.sort_by_key(|(_, w)| *w);
        out
    }

    /// Rank of φ as a linear map 𝔭 → 𝔫*.
    pub fn phi_rank(&self) -> usize {
        let cols = self.p_basis();
        let rows = self.n_basis();
        let mut m = Vec::with_capacity(rows.len());
        for &y in rows {
            let mut row = Vec::with_capacity(cols.len());
            for &a in cols {
                let br = self.bracket(&CentElt::gen(y), &CentElt::gen(a));
                row.push(self.chi.eval(&br));
            }
            m.push(row);
        }
        linalg::rank(m)
    }

    fn chi_vanishes_on_brackets(&self) -> bool {
        for &a in self.n_basis() {
            for &b in self.n_basis() {
                let br = bracket(&self.lambda, a, b);
                if !self.chi.eval(&br).is_zero() {
                    return false;
                }
            }
        }
        true
    }
}

/// The invariant bilinear form (X|Y) = tr_{𝔤₀}(ad X ad Y)/2N on 𝔞₀, zero
/// when either argument sits in a nonzero λ-degree. 𝔤₀ is spanned by the
/// e_ab with col_λ(a) = col_λ(b).
pub fn bilinear_form(lambda: &Pyramid, x: &CentElt, y: &CentElt) -> Q {
    let mut out = Q::zero();
    for (&a, ca) in x.terms() {
        if a.r != 0 {
            continue; // deg_λ(E_ij^(r)) = r
        }
        for (&b, cb) in y.terms() {
            if b.r != 0 {
                continue;
            }
            out += ca * cb * form_on_basis(lambda, a, b);
        }
    }
    out
}

fn form_on_basis(lambda: &Pyramid, a: GenIndex, b: GenIndex) -> Q {
    let n = lambda.boxes();
    let ma = embed(lambda, a).expect("index in S^e");
    let mb = embed(lambda, b).expect("index in S^e");
    let prod = |x: &[Vec<i64>], y: &[Vec<i64>], i: usize| -> i64 {
        (0..n).map(|k| x[i][k] * y[k][i]).sum()
    };
    // The coefficient of e_pr in (ad A)(ad B)(e_pr) is
    // (AB)_pp + (BA)_rr - A_pp B_rr - B_pp A_rr; sum over the basis of g_0.
    let mut trace = 0i64;
    for p in 0..n {
        for r in 0..n {
            if lambda.col_of(p + 1) != lambda.col_of(r + 1) {
                continue;
            }
            trace += prod(&ma, &mb, p) + prod(&mb, &ma, r) - ma[p][p] * mb[r][r]
                - mb[p][p] * ma[r][r];
        }
    }
    q(trace, 2 * n as i64)
}
