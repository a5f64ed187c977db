//! λ-bracket and normally ordered product calculus over a finite set of
//! generators with prescribed pairwise brackets.
//!
//! States are ℚ\[k\]-combinations of canonical monomials: left-normed normally
//! ordered words :a(:b(:c…:):): of derivative-decorated generators in a fixed
//! total order. Reordering and re-association corrections are driven entirely
//! by the bracket table via quasi-commutativity, quasi-associativity and the
//! non-commutative Wick formula.

use crate::centralizer::GenIndex;
use crate::error::{Error, Result};
use crate::scalar::{q, Q, KPoly};
use num::One;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

static NEXT_TABLE_ID: AtomicU64 = AtomicU64::new(1);

/// What a generator is; fixes its display form and its place in the
/// canonical monomial order (ghosts φ^I, then φ_𝗇, then currents/blocks).
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum GenKind {
    /// φ^I, dual ghost attached to I ∈ S_{λ,μ} (odd).
    GhostStar(GenIndex),
    /// φ_𝗇, ghost attached to a basis element of 𝔫 (odd).
    Ghost(GenIndex),
    /// Plain affine current a_I in the full complex (even).
    Current(GenIndex),
    /// Building block J_a in the reduced complex (even).
    Block(GenIndex),
}

impl GenKind {
    fn rank(&self) -> u32 {
        match self {
            GenKind::GhostStar(_) => 0,
            GenKind::Ghost(_) => 1,
            GenKind::Current(_) => 2,
            GenKind::Block(_) => 3,
        }
    }

    pub fn index(&self) -> GenIndex {
        match self {
            GenKind::GhostStar(i) | GenKind::Ghost(i) | GenKind::Current(i) | GenKind::Block(i) => {
                *i
            }
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            GenKind::GhostStar(_) => "Phi*",
            GenKind::Ghost(_) => "Phi",
            GenKind::Current(_) => "A",
            GenKind::Block(_) => "J",
        }
    }
}

/// A vertex generator: kind, parity and conformal weight.
#[derive(Clone, Copy, Debug)]
pub struct VGen {
    pub kind: GenKind,
    pub odd: bool,
    pub weight: i64,
}

/// A derivative-decorated generator ∂^t g.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct Factor {
    pub gen: u32,
    pub t: u32,
}

impl Factor {
    pub fn new(gen: u32, t: u32) -> Self {
        Factor { gen, t }
    }
}

type Word = Vec<Factor>;

/// A state: finite ℚ\[k\]-combination of canonical normally ordered words.
#[derive(Clone, PartialEq, Eq)]
pub struct VState {
    ctx: u64,
    terms: BTreeMap<Word, KPoly>,
}

/// A polynomial in the formal bracket variable λ with VState coefficients.
#[derive(Clone, PartialEq, Eq)]
pub struct LambdaPoly {
    ctx: u64,
    coeffs: BTreeMap<u32, VState>,
}

impl VState {
    pub fn zero(table: &BracketTable) -> Self {
        VState {
            ctx: table.id,
            terms: BTreeMap::new(),
        }
    }

    pub fn vacuum(table: &BracketTable) -> Self {
        let mut s = Self::zero(table);
        s.add_word(Vec::new(), KPoly::one());
        s
    }

    pub fn scalar(table: &BracketTable, c: KPoly) -> Self {
        let mut s = Self::zero(table);
        s.add_word(Vec::new(), c);
        s
    }

    pub fn from_factor(table: &BracketTable, f: Factor) -> Self {
        debug_assert!((f.gen as usize) < table.gens.len());
        let mut s = Self::zero(table);
        s.add_word(vec![f], KPoly::one());
        s
    }

    pub fn generator(table: &BracketTable, gen: u32) -> Self {
        Self::from_factor(table, Factor::new(gen, 0))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &KPoly)> {
        self.terms.iter()
    }

    pub fn ctx(&self) -> u64 {
        self.ctx
    }

    fn add_word(&mut self, w: Word, c: KPoly) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(w) {
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
            Entry::Vacant(e) => {
                e.insert(c);
            }
        }
    }

    fn accumulate(&mut self, other: VState) {
        debug_assert_eq!(self.ctx, other.ctx);
        for (w, c) in other.terms {
            self.add_word(w, c);
        }
    }

    pub fn add(&self, other: &VState) -> Result<VState> {
        if self.ctx != other.ctx {
            return Err(Error::ContextMismatch);
        }
        let mut out = self.clone();
        out.accumulate(other.clone());
        Ok(out)
    }

    pub fn sub(&self, other: &VState) -> Result<VState> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> VState {
        self.scale(&KPoly::constant(-Q::one()))
    }

    pub fn scale(&self, c: &KPoly) -> VState {
        let mut out = VState {
            ctx: self.ctx,
            terms: BTreeMap::new(),
        };
        if !c.is_zero() {
            for (w, v) in &self.terms {
                out.terms.insert(w.clone(), v * c);
            }
        }
        out
    }

    /// Specialize the level symbol k to a rational value.
    pub fn eval_k(&self, k: &Q) -> VState {
        let mut out = VState {
            ctx: self.ctx,
            terms: BTreeMap::new(),
        };
        for (w, v) in &self.terms {
            out.add_word(w.clone(), KPoly::constant(v.eval(k)));
        }
        out
    }
}

impl LambdaPoly {
    pub fn zero(table: &BracketTable) -> Self {
        LambdaPoly {
            ctx: table.id,
            coeffs: BTreeMap::new(),
        }
    }

    fn zero_ctx(ctx: u64) -> Self {
        LambdaPoly {
            ctx,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, exp: u32) -> Option<&VState> {
        self.coeffs.get(&exp)
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (&u32, &VState)> {
        self.coeffs.iter()
    }

    pub fn max_degree(&self) -> Option<u32> {
        self.coeffs.keys().max().copied()
    }

    pub fn add_term(&mut self, exp: u32, state: VState) {
        debug_assert_eq!(self.ctx, state.ctx);
        if state.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.coeffs.entry(exp) {
            Entry::Occupied(mut e) => {
                e.get_mut().accumulate(state);
                if e.get().is_zero() {
                    e.remove();
                }
            }
            Entry::Vacant(e) => {
                e.insert(state);
            }
        }
    }

    pub fn accumulate(&mut self, other: LambdaPoly) {
        for (exp, st) in other.coeffs {
            self.add_term(exp, st);
        }
    }

    pub fn add(&self, other: &LambdaPoly) -> Result<LambdaPoly> {
        if self.ctx != other.ctx {
            return Err(Error::ContextMismatch);
        }
        let mut out = self.clone();
        out.accumulate(other.clone());
        Ok(out)
    }

    pub fn sub(&self, other: &LambdaPoly) -> Result<LambdaPoly> {
        self.add(&other.scale(&KPoly::constant(-Q::one())))
    }

    pub fn scale(&self, c: &KPoly) -> LambdaPoly {
        let mut out = LambdaPoly::zero_ctx(self.ctx);
        for (&exp, st) in &self.coeffs {
            out.add_term(exp, st.scale(c));
        }
        out
    }

    /// Shift every exponent up by `s`.
    fn shift(&self, s: u32) -> LambdaPoly {
        let mut out = LambdaPoly::zero_ctx(self.ctx);
        for (&exp, st) in &self.coeffs {
            out.add_term(exp + s, st.clone());
        }
        out
    }
}

/// The bracket table of a complex: the generator list and, for every ordered
/// pair, the λ-bracket as a LambdaPoly. Immutable after construction; all
/// calculus below is pure.
pub struct BracketTable {
    id: u64,
    gens: Vec<VGen>,
    brackets: Vec<Vec<LambdaPoly>>,
    rank: Vec<u32>,
}

/// Staged construction of a [`BracketTable`]. Brackets may be given in one
/// direction only; the missing direction is filled by skew-symmetry, and
/// doubly specified pairs are verified for consistency.
pub struct TableBuilder {
    id: u64,
    gens: Vec<VGen>,
    raw: BTreeMap<(u32, u32), LambdaPoly>,
}

impl TableBuilder {
    pub fn new() -> Self {
        TableBuilder {
            id: NEXT_TABLE_ID.fetch_add(1, Ordering::Relaxed),
            gens: Vec::new(),
            raw: BTreeMap::new(),
        }
    }

    pub fn ctx_id(&self) -> u64 {
        self.id
    }

    pub fn add_gen(&mut self, gen: VGen) -> u32 {
        self.gens.push(gen);
        (self.gens.len() - 1) as u32
    }

    /// A λ-polynomial under construction, before the table exists.
    pub fn poly(&self) -> LambdaPoly {
        LambdaPoly::zero_ctx(self.id)
    }

    pub fn state(&self) -> VState {
        VState {
            ctx: self.id,
            terms: BTreeMap::new(),
        }
    }

    pub fn state_word(&self, w: Vec<Factor>, c: KPoly) -> VState {
        let mut s = self.state();
        s.add_word(w, c);
        s
    }

    pub fn set_bracket(&mut self, a: u32, b: u32, p: LambdaPoly) {
        self.raw.insert((a, b), p);
    }

    /// Finalizes the table, filling unspecified directions by skew-symmetry
    /// and checking consistency of doubly specified pairs.
    pub fn build(self) -> Result<BracketTable> {
        let ngen = self.gens.len();
        let mut order: Vec<u32> = (0..ngen as u32).collect();
        let key = |g: u32| {
            let vg = &self.gens[g as usize];
            let idx = vg.kind.index();
            (vg.kind.rank(), vg.weight, idx.i, idx.j, idx.r)
        };
        order.sort_by_key(|&g| key(g));
        let mut rank = vec![0u32; ngen];
        for (pos, &g) in order.iter().enumerate() {
            rank[g as usize] = pos as u32;
        }
        let empty = LambdaPoly::zero_ctx(self.id);
        let mut table = BracketTable {
            id: self.id,
            gens: self.gens,
            brackets: vec![vec![empty; ngen]; ngen],
            rank,
        };
        for ((a, b), p) in &self.raw {
            for (_, st) in p.coeffs() {
                for (w, _) in st.terms() {
                    debug_assert!(w.len() <= 1, "bracket table entries must be linear");
                }
            }
            table.brackets[*a as usize][*b as usize] = p.clone();
        }
        // fill / verify the opposite directions
        for a in 0..ngen as u32 {
            for b in a..ngen as u32 {
                let has_ab = self.raw.contains_key(&(a, b));
                let has_ba = self.raw.contains_key(&(b, a));
                let sign_parity =
                    table.gens[a as usize].odd && table.gens[b as usize].odd;
                if has_ab {
                    let skew = table.skew_transform(
                        &table.brackets[a as usize][b as usize].clone(),
                        sign_parity,
                    );
                    if has_ba && a != b {
                        if table.brackets[b as usize][a as usize] != skew {
                            return Err(Error::ParseError {
                                at: 0,
                                msg: format!(
                                    "bracket table violates skew-symmetry on pair ({}, {})",
                                    a, b
                                ),
                            });
                        }
                    } else if a != b {
                        table.brackets[b as usize][a as usize] = skew;
                    } else if table.brackets[a as usize][a as usize] != skew {
                        return Err(Error::ParseError {
                            at: 0,
                            msg: format!("bracket [g λ g] violates skew-symmetry on {}", a),
                        });
                    }
                } else if has_ba && a != b {
                    let skew = table.skew_transform(
                        &table.brackets[b as usize][a as usize].clone(),
                        sign_parity,
                    );
                    table.brackets[a as usize][b as usize] = skew;
                }
            }
        }
        Ok(table)
    }
}

impl Default for TableBuilder {
    fn default() -> Self {
        Self::new()
    }
}

impl BracketTable {
    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn gens(&self) -> &[VGen] {
        &self.gens
    }

    pub fn gen(&self, g: u32) -> &VGen {
        &self.gens[g as usize]
    }

    pub fn find_generator(&self, tag: &str, idx: GenIndex) -> Option<u32> {
        self.gens
            .iter()
            .position(|g| g.kind.tag() == tag && g.kind.index() == idx)
            .map(|p| p as u32)
    }

    fn parity_factor(&self, f: Factor) -> bool {
        self.gens[f.gen as usize].odd
    }

    pub fn parity_word(&self, w: &[Factor]) -> bool {
        w.iter().fold(false, |p, f| p ^ self.parity_factor(*f))
    }

    /// Parity of a state, if parity-homogeneous.
    pub fn parity(&self, s: &VState) -> Option<bool> {
        let mut out = None;
        for (w, _) in s.terms() {
            let p = self.parity_word(w);
            match out {
                None => out = Some(p),
                Some(prev) if prev != p => return None,
                _ => {}
            }
        }
        out
    }

    fn factor_key(&self, f: Factor) -> (u32, u32) {
        (self.rank[f.gen as usize], u32::MAX - f.t)
    }

    pub fn factor_weight(&self, f: Factor) -> i64 {
        self.gens[f.gen as usize].weight + f.t as i64
    }

    fn word_weight(&self, w: &[Factor]) -> i64 {
        w.iter().map(|&f| self.factor_weight(f)).sum()
    }

    /// The common conformal weight of a homogeneous state (`None` if mixed;
    /// the zero state has every weight and reports `Some(0)`).
    pub fn conformal_weight(&self, s: &VState) -> Option<i64> {
        let mut out = None;
        for (w, _) in s.terms() {
            let wt = self.word_weight(w);
            match out {
                None => out = Some(wt),
                Some(prev) if prev != wt => return None,
                _ => {}
            }
        }
        out.or(Some(0))
    }

    // ---- normally ordered product ----------------------------------------

    /// Canonical form of :AB: (left-normed nesting).
    pub fn normal_product(&self, a: &VState, b: &VState) -> Result<VState> {
        if a.ctx != self.id || b.ctx != self.id {
            return Err(Error::ContextMismatch);
        }
        Ok(self.mul_states(a, b))
    }

    fn mul_states(&self, a: &VState, b: &VState) -> VState {
        let mut out = VState::zero(self);
        for (w1, c1) in a.terms() {
            for (w2, c2) in b.terms() {
                out.accumulate(self.mul_words(w1, w2).scale(&(c1 * c2)));
            }
        }
        out
    }

    fn word_state(&self, w: &[Factor]) -> VState {
        let mut s = VState::zero(self);
        s.add_word(w.to_vec(), KPoly::one());
        s
    }

    fn mul_words(&self, w1: &[Factor], w2: &[Factor]) -> VState {
        if w1.is_empty() {
            return self.word_state(w2);
        }
        if w2.is_empty() {
            return self.word_state(w1);
        }
        if w1.len() == 1 {
            return self.insert(w1[0], w2);
        }
        // ::a A': B: = :a(:A'B:): + Σ_j (1/(j+1)) [ :(∂^{j+1}a)(A'_(j)B):
        //            + (−1)^{p(a)p(A')} :(∂^{j+1}A')(a_(j)B): ]
        let a = w1[0];
        let rest = &w1[1..];
        let mut out = self.mul1(a, &self.mul_words(rest, w2));
        let sign = self.parity_factor(a) && self.parity_word(rest);
        let br_rest = self.bracket_words(rest, w2);
        for (&j, vj) in br_rest.coeffs() {
            let da = self.word_state(&[Factor::new(a.gen, a.t + j + 1)]);
            let term = self.mul_states(&da, vj).scale(&KPoly::constant(q(1, j as i64 + 1)));
            out.accumulate(term);
        }
        let br_a = self.bracket_words(&[a], w2);
        for (&j, vj) in br_a.coeffs() {
            let mut drest = self.word_state(rest);
            for _ in 0..=j {
                drest = self.derivative(&drest);
            }
            let mut c = KPoly::constant(q(1, j as i64 + 1));
            if sign {
                c = -c;
            }
            out.accumulate(self.mul_states(&drest, vj).scale(&c));
        }
        out
    }

    fn mul1(&self, a: Factor, s: &VState) -> VState {
        let mut out = VState::zero(self);
        for (w, c) in s.terms() {
            out.accumulate(self.insert(a, w).scale(c));
        }
        out
    }

    /// Canonical form of :a W: for a single factor and a canonical word,
    /// via :a(:xC:): = ±:x(:aC:): + :(∫_{−∂}^0 [a λ x] dλ) C:.
    fn insert(&self, a: Factor, w: &[Factor]) -> VState {
        if w.is_empty() {
            return self.word_state(&[a]);
        }
        let x = w[0];
        let ka = self.factor_key(a);
        let kx = self.factor_key(x);
        if ka < kx || (ka == kx && !self.parity_factor(a)) {
            let mut word = Vec::with_capacity(w.len() + 1);
            word.push(a);
            word.extend_from_slice(w);
            return self.word_state(&word);
        }
        if a == x {
            // odd square: 2 :a(:aC:): = :(∫_{−∂}^0 [a λ a] dλ) C:
            let integral = self.int_neg_del(&self.bracket_factors(a, a));
            return self
                .mul_states(&integral, &self.word_state(&w[1..]))
                .scale(&KPoly::constant(q(1, 2)));
        }
        let sign = self.parity_factor(a) && self.parity_factor(x);
        let swapped = self.mul1(x, &self.insert(a, &w[1..]));
        let mut out = if sign { swapped.neg() } else { swapped };
        let integral = self.int_neg_del(&self.bracket_factors(a, x));
        out.accumulate(self.mul_states(&integral, &self.word_state(&w[1..])));
        out
    }

    /// ∫_{−∂}^0 P dλ : the term λ^m v contributes (−1)^m ∂^{m+1} v / (m+1).
    fn int_neg_del(&self, p: &LambdaPoly) -> VState {
        let mut out = VState::zero(self);
        for (&m, v) in p.coeffs() {
            let mut dv = v.clone();
            for _ in 0..=m {
                dv = self.derivative(&dv);
            }
            let mut c = q(1, m as i64 + 1);
            if m % 2 == 1 {
                c = -c;
            }
            out.accumulate(dv.scale(&KPoly::constant(c)));
        }
        out
    }

    /// Canonical form of an arbitrary factor list read as a right-nested
    /// normally ordered word.
    pub fn canon_word(&self, factors: &[Factor]) -> VState {
        match factors.len() {
            0 => VState::vacuum(self),
            _ => {
                let mut state = self.word_state(&factors[factors.len() - 1..]);
                for &f in factors[..factors.len() - 1].iter().rev() {
                    state = self.mul1(f, &state);
                }
                state
            }
        }
    }

    // ---- derivative -------------------------------------------------------

    /// The translation operator ∂ (Leibniz over word factors).
    pub fn derivative(&self, s: &VState) -> VState {
        let mut out = VState::zero(self);
        for (w, c) in s.terms() {
            for i in 0..w.len() {
                let mut word = w.clone();
                word[i].t += 1;
                out.accumulate(self.canon_word(&word).scale(c));
            }
        }
        out
    }

    // ---- λ-bracket ----------------------------------------------------------

    pub fn lambda_bracket(&self, a: &VState, b: &VState) -> Result<LambdaPoly> {
        if a.ctx != self.id || b.ctx != self.id {
            return Err(Error::ContextMismatch);
        }
        Ok(self.bracket_states(a, b))
    }

    fn bracket_states(&self, a: &VState, b: &VState) -> LambdaPoly {
        let mut out = LambdaPoly::zero(self);
        for (w1, c1) in a.terms() {
            for (w2, c2) in b.terms() {
                out.accumulate(self.bracket_words(w1, w2).scale(&(c1 * c2)));
            }
        }
        out
    }

    fn bracket_state_word(&self, a: &VState, w: &[Factor]) -> LambdaPoly {
        let mut out = LambdaPoly::zero(self);
        for (w1, c1) in a.terms() {
            out.accumulate(self.bracket_words(w1, w).scale(c1));
        }
        out
    }

    fn bracket_words(&self, w1: &[Factor], w2: &[Factor]) -> LambdaPoly {
        if w1.is_empty() || w2.is_empty() {
            return LambdaPoly::zero(self);
        }
        if w1.len() == 1 && w2.len() == 1 {
            return self.bracket_factors(w1[0], w2[0]);
        }
        if w2.len() > 1 {
            // non-commutative Wick formula on B = :y Y':
            let y = w2[0];
            let yrest = &w2[1..];
            let p1 = self.bracket_words(w1, &[y]);
            let mut out = LambdaPoly::zero(self);
            for (&m, v) in p1.coeffs() {
                out.add_term(m, self.mul_states(v, &self.word_state(yrest)));
            }
            let sign = self.parity_word(w1) && self.parity_factor(y);
            let p2 = self.bracket_words(w1, yrest);
            for (&m, v) in p2.coeffs() {
                let mut term = self.mul_states(&self.word_state(&[y]), v);
                if sign {
                    term = term.neg();
                }
                out.add_term(m, term);
            }
            // ∫_0^λ [[w1 λ y] μ Y'] dμ
            for (&m, v) in p1.coeffs() {
                let inner = self.bracket_state_word(v, yrest);
                for (&j, w) in inner.coeffs() {
                    out.add_term(
                        m + j + 1,
                        w.scale(&KPoly::constant(q(1, j as i64 + 1))),
                    );
                }
            }
            return out;
        }
        // w1 composite, w2 single: skew-symmetry
        let p = self.bracket_words(w2, w1);
        let parity = self.parity_word(w1) && self.parity_word(w2);
        self.skew_transform(&p, parity)
    }

    /// [B λ A] from P = [A λ B]: −(−1)^{p(A)p(B)} P(−λ−∂).
    fn skew_transform(&self, p: &LambdaPoly, parity_product: bool) -> LambdaPoly {
        let mut out = LambdaPoly::zero_ctx(p.ctx);
        for (&m, v) in p.coeffs() {
            // (−λ−∂)^m v = Σ_i C(m,i) (−1)^m λ^{m−i} ∂^i v
            let mut binom = 1i64;
            let mut dv = v.clone();
            for i in 0..=m {
                if i > 0 {
                    binom = binom * (m - i + 1) as i64 / i as i64;
                    dv = self.derivative(&dv);
                }
                let mut c = q(binom, 1);
                if m % 2 == 1 {
                    c = -c;
                }
                if !parity_product {
                    c = -c;
                }
                out.add_term(m - i, dv.scale(&KPoly::constant(c)));
            }
        }
        out
    }

    fn bracket_factors(&self, a: Factor, b: Factor) -> LambdaPoly {
        let base = &self.brackets[a.gen as usize][b.gen as usize];
        if base.is_zero() {
            return LambdaPoly::zero(self);
        }
        // [∂^s g λ ∂^t g'] = (−λ)^s (λ+∂)^t [g λ g']
        let mut p = base.clone();
        for _ in 0..b.t {
            let mut next = p.shift(1);
            for (&m, v) in p.coeffs() {
                next.add_term(m, self.derivative(v));
            }
            p = next;
        }
        if a.t > 0 {
            p = p.shift(a.t);
            if a.t % 2 == 1 {
                p = p.scale(&KPoly::constant(-Q::one()));
            }
        }
        p
    }
}

impl fmt::Display for VState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (w, c) in &self.terms {
            if w.is_empty() {
                if let Some(0) = c.degree() {
                    crate::text::write_coeff_prefix(f, &c.coeff(0), first)?;
                    write!(f, "1")?;
                } else {
                    if !first {
                        write!(f, "+")?;
                    }
                    write!(f, "({})", c)?;
                }
            } else {
                crate::text::write_kpoly_prefix(f, c, first)?;
                write!(f, "{}", WordDisplay { state: self, w })?;
            }
            first = false;
        }
        Ok(())
    }
}

struct WordDisplay<'a> {
    state: &'a VState,
    w: &'a Word,
}

impl fmt::Display for WordDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let _ = self.state;
        if self.w.len() > 1 {
            write!(f, ":( ")?;
        }
        for (i, factor) in self.w.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}", FACTOR_NAMES.with(|n| n.borrow().get(factor)))?;
        }
        if self.w.len() > 1 {
            write!(f, " ):")?;
        }
        Ok(())
    }
}

// Display needs the generator list, which lives on the table; states carry
// only the context id. A thread-local registry of id -> printable names keeps
// Display signatures standard.
use std::cell::RefCell;

#[derive(Default)]
struct NameRegistry {
    maps: BTreeMap<u64, Vec<String>>,
    current: u64,
}

impl NameRegistry {
    fn get(&self, f: &Factor) -> String {
        let base = self
            .maps
            .get(&self.current)
            .and_then(|v| v.get(f.gen as usize))
            .cloned()
            .unwrap_or_else(|| format!("g{}", f.gen));
        if f.t > 0 {
            format!("D^{} {}", f.t, base)
        } else {
            base
        }
    }
}

thread_local! {
    static FACTOR_NAMES: RefCell<NameRegistry> = RefCell::new(NameRegistry::default());
}

impl BracketTable {
    /// Registers this table's generator names for Display on the current
    /// thread and marks it current. Called by the table constructors in the
    /// complex-assembly module; harmless to call repeatedly.
    pub fn register_names(&self) {
        FACTOR_NAMES.with(|n| {
            let mut reg = n.borrow_mut();
            reg.current = self.id;
            reg.maps.entry(self.id).or_insert_with(|| {
                self.gens
                    .iter()
                    .map(|g| {
                        let idx = g.kind.index();
                        format!("{}[{},{},{}]", g.kind.tag(), idx.i, idx.j, idx.r)
                    })
                    .collect()
            });
        });
    }

    /// Renders a state with this table's generator names.
    pub fn display(&self, s: &VState) -> String {
        self.register_names();
        FACTOR_NAMES.with(|n| n.borrow_mut().current = self.id);
        s.to_string()
    }

    /// Renders a λ-polynomial (ascending powers of `L`).
    pub fn display_lambda(&self, p: &LambdaPoly) -> String {
        self.register_names();
        if p.is_zero() {
            return "0".to_string();
        }
        let mut parts = Vec::new();
        for (&m, v) in p.coeffs() {
            let body = self.display(v);
            if m == 0 {
                parts.push(body);
            } else if m == 1 {
                parts.push(format!("L ({})", body));
            } else {
                parts.push(format!("L^{} ({})", m, body));
            }
        }
        parts.join(" + ")
    }
}

impl fmt::Debug for VState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Debug for LambdaPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, v) in &self.coeffs {
            if !first {
                write!(f, " + ")?;
            }
            write!(f, "L^{}({:?})", m, v)?;
            first = false;
        }
        Ok(())
    }
}

// ---- verification helpers ----------------------------------------------

/// Bivariate polynomial in (λ, μ) used by the Jacobi check.
pub struct BiPoly {
    coeffs: BTreeMap<(u32, u32), VState>,
}

impl BiPoly {
    fn new() -> Self {
        BiPoly {
            coeffs: BTreeMap::new(),
        }
    }

    fn add(&mut self, e: (u32, u32), state: VState, negate: bool) {
        if state.is_zero() {
            return;
        }
        let state = if negate { state.neg() } else { state };
        use std::collections::btree_map::Entry;
        match self.coeffs.entry(e) {
            Entry::Occupied(mut en) => {
                en.get_mut().accumulate(state);
                if en.get().is_zero() {
                    en.remove();
                }
            }
            Entry::Vacant(en) => {
                en.insert(state);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
}

/// [A λ B] + (−1)^{p(A)p(B)} [B_{−λ−∂} A]; zero iff skew-symmetry holds.
pub fn skew_defect(table: &BracketTable, a: &VState, b: &VState) -> Result<LambdaPoly> {
    let pa = table.parity(a).ok_or(Error::NotInReducedComplex);
    let pb = table.parity(b).ok_or(Error::NotInReducedComplex);
    let (pa, pb) = (pa?, pb?);
    let ab = table.lambda_bracket(a, b)?;
    let ba = table.lambda_bracket(b, a)?;
    let skew = table.skew_transform(&ba, pa && pb);
    ab.sub(&skew)
}

/// Jacobi defect \[AλB\]_{λ+μ}C\] + (−1)^{p(A)p(B)}\[Bμ\[AλC\]\] − \[Aλ\[BμC\]\] as a
/// bivariate polynomial; zero iff the Jacobi identity holds on the triple.
pub fn jacobi_defect(
    table: &BracketTable,
    a: &VState,
    b: &VState,
    c: &VState,
) -> Result<BiPoly> {
    let pa = table.parity(a).ok_or(Error::NotInReducedComplex)?;
    let pb = table.parity(b).ok_or(Error::NotInReducedComplex)?;
    let mut out = BiPoly::new();
    // LHS: [A λ [B μ C]]
    let inner_bc = table.lambda_bracket(b, c)?;
    for (&j, w) in inner_bc.coeffs() {
        let outer = table.lambda_bracket(a, w)?;
        for (&i, v) in outer.coeffs() {
            out.add((i, j), v.clone(), true);
        }
    }
    // (−1)^{p(A)p(B)} [B μ [A λ C]]
    let inner_ac = table.lambda_bracket(a, c)?;
    for (&i, w) in inner_ac.coeffs() {
        let outer = table.lambda_bracket(b, w)?;
        for (&j, v) in outer.coeffs() {
            out.add((i, j), v.clone(), pa && pb);
        }
    }
    // [[A λ B]_{λ+μ} C]: inner λ-powers stay; bracket variable becomes λ+μ
    let ab = table.lambda_bracket(a, b)?;
    for (&m, t) in ab.coeffs() {
        let outer = table.lambda_bracket(t, c)?;
        for (&i, s) in outer.coeffs() {
            // (λ+μ)^i = Σ C(i,p) λ^p μ^{i−p}
            let mut binom = 1i64;
            for p in 0..=i {
                if p > 0 {
                    binom = binom * (i - p + 1) as i64 / p as i64;
                }
                out.add(
                    (m + p, i - p),
                    s.scale(&KPoly::constant(q(binom, 1))),
                    false,
                );
            }
        }
    }
    Ok(out)
}

/// Quasi-commutativity defect :AB: − (−1)^{p(A)p(B)}:BA: − ∫_{−∂}^0 \[AλB\] dλ.
pub fn quasi_commutativity_defect(
    table: &BracketTable,
    a: &VState,
    b: &VState,
) -> Result<VState> {
    let pa = table.parity(a).ok_or(Error::NotInReducedComplex)?;
    let pb = table.parity(b).ok_or(Error::NotInReducedComplex)?;
    let ab = table.normal_product(a, b)?;
    let mut ba = table.normal_product(b, a)?;
    if pa && pb {
        ba = ba.neg();
    }
    let integral = table.int_neg_del(&table.lambda_bracket(a, b)?);
    ab.sub(&ba)?.sub(&integral)
}

/// Non-commutative Wick formula defect
/// \[Aλ:BC:\] − :\[AλB\]C: − (−1)^{p(A)p(B)}:B\[AλC\]: − ∫_0^λ \[\[AλB\] μ C\] dμ.
pub fn wick_defect(
    table: &BracketTable,
    a: &VState,
    b: &VState,
    c: &VState,
) -> Result<LambdaPoly> {
    let pa = table.parity(a).ok_or(Error::NotInReducedComplex)?;
    let pb = table.parity(b).ok_or(Error::NotInReducedComplex)?;
    let bc = table.normal_product(b, c)?;
    let mut out = table.lambda_bracket(a, &bc)?;
    let ab = table.lambda_bracket(a, b)?;
    for (&m, v) in ab.coeffs() {
        out.add_term(m, table.normal_product(v, c)?.neg());
    }
    let ac = table.lambda_bracket(a, c)?;
    for (&m, v) in ac.coeffs() {
        let mut term = table.normal_product(b, v)?;
        if pa && pb {
            term = term.neg();
        }
        out.add_term(m, term.neg());
    }
    for (&m, v) in ab.coeffs() {
        let inner = table.bracket_state_word_pub(v, c)?;
        for (&j, w) in inner.coeffs() {
            out.add_term(
                m + j + 1,
                w.scale(&KPoly::constant(q(-1, j as i64 + 1))),
            );
        }
    }
    Ok(out)
}

impl BracketTable {
    fn bracket_state_word_pub(&self, a: &VState, c: &VState) -> Result<LambdaPoly> {
        self.lambda_bracket(a, c)
    }
}
